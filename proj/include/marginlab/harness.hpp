#pragma once

#include "marginlab/io.hpp"
#include "marginlab/parallel.hpp"
#include "marginlab/random.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace marginlab {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Tables

/// CSV-ready table. `metadata` holds the config hash, version and wall time;
/// the CSV text itself never contains the wall time.
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::map<std::string, std::string> metadata;

  void add(std::vector<std::string> row) {
    if (row.size() != columns.size()) throw InputError("result table: row width does not match the columns");
    rows.push_back(std::move(row));
  }

  std::string to_csv() const {
    std::string out;
    auto cell = [](const std::string& s) {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string q = "\"";
      for (char c : s) {
        if (c == '"') q += '"';
        q += c;
      }
      return q + "\"";
    };
    auto line = [&](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out += ',';
        out += cell(r[i]);
      }
      out += '\n';
    };
    line(columns);
    for (const auto& r : rows) line(r);
    return out;
  }
};

/// %.12g, which keeps tables stable across runs and readable.
inline std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::string fmt(const Rational& x) { return rational_to_string(x); }

/// FNV-1a, for config hashes in table metadata.
inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Configuration

enum class Outcome { Decided = 0, Marginal = 2, Error = 1 };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Decided: return "decided";
    case Outcome::Marginal: return "marginal";
    case Outcome::Error: return "error";
  }
  return "?";
}

/// Worse of two outcomes: error over marginal over decided.
inline Outcome worst(Outcome a, Outcome b) {
  auto rank = [](Outcome o) { return o == Outcome::Error ? 2 : o == Outcome::Marginal ? 1 : 0; };
  return rank(a) >= rank(b) ? a : b;
}

inline const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = {"lp-profile",  "submulti-audit",   "metric-dichotomy",
                                               "lip-packing", "equivalence-fuzz", "phi-growth"};
  return ids;
}

/// Experiment parameters. Empty lists and zero counts select each
/// experiment's defaults.
struct ExperimentConfig {
  std::string id;
  std::vector<Rational> gammas;
  std::vector<double> ps;
  std::vector<std::size_t> sizes;
  std::size_t count = 0;
  std::uint64_t seed = 1;
  SolverConfig solver;
  std::string output;  // directory; nothing is written when empty
  bool keep_going = false;
  std::string phi = "exp";  // "exp" or "inverse-power"
  int phi_k = 1;
  std::uint64_t phi_n = 1000000;

  void validate() const {
    bool known = false;
    for (const auto& e : experiment_ids()) known = known || e == id;
    if (!known) throw InputError("unknown experiment '" + id + "'");
    solver.validate();
    for (const auto& g : gammas)
      if (g <= 0) throw InputError("experiment gamma grid: values must be positive");
  }

  /// Everything that determines the table; jobs and output path excluded.
  Json to_json() const {
    Json j;
    j["id"] = id;
    Json g = Json::array();
    for (const auto& x : gammas) g.push_back(rational_json(x));
    j["gammas"] = g;
    j["ps"] = ps;
    j["sizes"] = sizes;
    j["count"] = count;
    j["seed"] = seed;
    j["tol"] = solver.tol;
    j["arithmetic"] = solver.arithmetic == Arithmetic::Rational ? "rational" : "float";
    j["keep_going"] = keep_going;
    j["phi"] = phi;
    j["phi_k"] = phi_k;
    j["phi_n"] = phi_n;
    return j;
  }
  std::string hash() const { return fnv1a_hex(to_json().dump()); }
};

struct ExperimentResult {
  ResultTable table;
  ResultTable summary;  // name, value
  std::vector<std::pair<std::string, Json>> certificates;  // file stem, document
  Outcome outcome = Outcome::Decided;
  double wall_seconds = 0.0;

  int exit_code() const { return static_cast<int>(outcome); }
};

namespace detail {

struct TaskOutput {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<std::string, Json>> certificates;
  Outcome outcome = Outcome::Decided;
};

using Task = std::function<TaskOutput()>;

// Runs tasks on the pool and concatenates their rows in task order. Without
// keep_going, the first failing task (lowest index) cancels the rest; its
// error row ends the table.
inline void run_tasks(const std::vector<Task>& tasks, const std::vector<std::string>& columns,
                      const ExperimentConfig& cfg, ExperimentResult& out) {
  std::vector<std::optional<TaskOutput>> results(tasks.size());
  std::vector<std::string> errors(tasks.size());
  const std::size_t stop = parallel_first(tasks.size(), cfg.solver.jobs, [&](std::size_t i) {
    try {
      results[i] = tasks[i]();
      return false;
    } catch (const std::exception& e) {
      errors[i] = e.what();
      return !cfg.keep_going;
    }
  });
  out.table.columns = columns;
  for (std::size_t i = 0; i < tasks.size() && i <= stop; ++i) {
    if (!errors[i].empty()) {
      std::vector<std::string> row(columns.size());
      row[0] = std::to_string(i);
      row[columns.size() - 2] = "error: " + errors[i];
      row[columns.size() - 1] = to_string(Outcome::Error);
      out.table.add(std::move(row));
      out.outcome = Outcome::Error;
      continue;
    }
    if (!results[i]) continue;
    for (auto& r : results[i]->rows) out.table.add(std::move(r));
    for (auto& c : results[i]->certificates) out.certificates.push_back(std::move(c));
    out.outcome = worst(out.outcome, results[i]->outcome);
  }
}

inline Outcome outcome_of(ShatterStatus s) {
  return s == ShatterStatus::Marginal ? Outcome::Marginal : Outcome::Decided;
}

inline std::vector<Rational> default_grid(const ExperimentConfig& cfg, std::vector<Rational> fallback) {
  return cfg.gammas.empty() ? fallback : cfg.gammas;
}

inline Margin margin_of(const Rational& g) { return Margin::exact(g); }

inline ShatterOptions experiment_shatter_options() {
  ShatterOptions o;
  o.realize.exact_fallback = true;
  return o;
}

// Largest n for which make(n) is shattered at gamma, scanning n upward.
struct SizeScan {
  std::size_t dim = 0;
  bool capped = false;
  bool marginal_stop = false;
  Json certificate;
};

inline SizeScan scan_sizes(const std::vector<std::size_t>& sizes,
                           const std::function<ConceptClassOracle(std::size_t)>& make, const Margin& gamma,
                           const SolverConfig& solver) {
  SizeScan s;
  Json last_yes, first_no;
  bool stopped = false;
  for (std::size_t n : sizes) {
    const ConceptClassOracle o = make(n);
    ShatterOptions opt = experiment_shatter_options();
    auto v = is_shattered(o, iota_points(n), gamma, solver, opt);
    if (v.status == ShatterStatus::Shattered) {
      s.dim = n;
      last_yes = shatter_certificate(o, gamma, v);
      continue;
    }
    s.marginal_stop = v.status == ShatterStatus::Marginal;
    first_no = shatter_certificate(o, gamma, v);
    stopped = true;
    break;
  }
  s.capped = !stopped;
  s.certificate = Json{{"type", "size-scan"}, {"largest_shattered", last_yes}, {"first_failure", first_no}};
  return s;
}

// Number of named witnesses of a gamma-space bundle that realize their
// labeling under D^> over all centers, checked in floats and exactly.
inline std::size_t verified_bundle_witnesses(const ConstructionBundle& b) {
  const Rational g = parse_rational(b.params.at("gamma"));
  const auto space = b.metric().exact_space();
  const ConceptClassOracle o = DistanceCombinationClass(space, iota_points(space.size()), DistanceVariant::Pos);
  const auto& dc = std::get<DistanceCombinationClass>(o);
  std::size_t ok = 0;
  for (const auto& w : b.witnesses) {
    bool good = verify_witness(o, make_sample(w.points, w.labels), w.witness, to_double(g));
    if (w.witness.exact.size() == 2 * space.size()) {
      const auto vals = polyhedral_form<Rational>(space, dc.centers, dc.variant, w.points).evaluate(w.witness.exact);
      for (std::size_t i = 0; i < vals.size(); ++i) good = good && w.labels[i] * vals[i] >= g;
    } else {
      good = false;
    }
    ok += good;
  }
  return ok;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiments

/// Lower bounds on dim(gamma) in l_p from the basis set (all p) and Hadamard
/// sets (p > 2), with the fitted exponent per p.
inline ExperimentResult run_lp_profile(const ExperimentConfig& cfg) {
  ExperimentResult out;
  const auto grid = detail::default_grid(cfg, {Rational(1, 2), Rational(1, 3), Rational(1, 4), Rational(1, 5)});
  const std::vector<double> ps = cfg.ps.empty() ? std::vector<double>{1.5, 2.0, 3.0} : cfg.ps;
  const std::size_t max_basis = cfg.sizes.empty() ? 256 : cfg.sizes.front();
  std::vector<detail::Task> tasks;
  for (double p : ps)
    for (const auto& g : grid)
      tasks.push_back([&cfg, p, g, max_basis] {
        detail::TaskOutput t;
        const Margin gamma = detail::margin_of(g);
        std::vector<std::size_t> basis_sizes;
        for (std::size_t n = 1; n <= max_basis; ++n) basis_sizes.push_back(n);
        auto basis = detail::scan_sizes(
            basis_sizes, [p](std::size_t n) -> ConceptClassOracle { return standard_basis_set(n, p).vectors().oracle(); },
            gamma, cfg.solver);
        std::string construction = "basis";
        detail::SizeScan best = basis;
        if (p > 2.0) {
          auto had = detail::scan_sizes(
              {1, 2, 4, 8, 16},
              [p](std::size_t n) -> ConceptClassOracle {
                if (n == 1) return DualBallClass(std::vector<Vector>{{1.0}}, NormSpec(p));
                return hadamard_shattered_set(static_cast<unsigned>(std::countr_zero(n)), p).vectors().oracle();
              },
              gamma, cfg.solver);
          if (had.dim > best.dim) {
            best = had;
            construction = "hadamard";
          }
        }
        const std::string id = "lp-p" + fmt(p) + "-g" + fmt(g);
        std::string id_file = id;
        for (char& c : id_file)
          if (c == '/') c = '_';
        t.rows.push_back({id, fmt(p), fmt(g), construction, std::to_string(best.dim), "lower",
                          best.capped ? "capped" : best.marginal_stop ? "marginal" : "not-shattered",
                          "certs/" + id_file + ".json", to_string(Outcome::Decided)});
        t.certificates.emplace_back(id_file, best.certificate);
        return t;
      });
  detail::run_tasks(tasks,
                    {"id", "p", "gamma", "construction", "dim", "status", "next_size", "certificate", "outcome"}, cfg,
                    out);
  out.summary.columns = {"name", "value"};
  for (double p : ps) {
    DimensionReport rep;
    rep.label = "p=" + fmt(p);
    for (const auto& r : out.table.rows)
      if (r[1] == fmt(p) && r[4] != "" && r[4] != "0")
        rep.entries.push_back({to_double(parse_rational(r[2])), std::stoull(r[4]), DimStatus::Lower});
    if (rep.entries.size() >= 4) {
      auto f = fit_rate(rep);
      out.summary.add({"p=" + fmt(p) + " exponent", fmt(f.exponent)});
      out.summary.add({"p=" + fmt(p) + " residual", fmt(f.residual)});
    }
  }
  return out;
}

/// dim(g1 g2) + 1 <= (dim g1 + 1)(dim g2 + 1) on exact l2 dims (orthonormal
/// ground set of size 8) and on polynomial phi classes.
inline ExperimentResult run_submulti_audit(const ExperimentConfig& cfg) {
  ExperimentResult out;
  const std::size_t ground = cfg.sizes.empty() ? 8 : cfg.sizes.front();
  const auto l2_grid = detail::default_grid(
      cfg, {Rational(3, 10), Rational(9, 25), Rational(2, 5), Rational(1, 2), Rational(3, 5), Rational(4, 5)});
  const std::vector<Rational> phi_grid = {Rational(1),    Rational(1, 2), Rational(1, 3),  Rational(1, 4), Rational(1, 6),
                                          Rational(1, 8), Rational(1, 9), Rational(1, 12), Rational(1, 16)};

  // Dims first (one task per l2 grid point), then the audit itself.
  std::vector<DimEntry> l2(l2_grid.size());
  std::vector<Json> l2_certs(l2_grid.size());
  std::vector<detail::Task> tasks;
  for (std::size_t i = 0; i < l2_grid.size(); ++i)
    tasks.push_back([&, i] {
      const ConceptClassOracle o = standard_basis_set(ground, 2.0).vectors().oracle();
      SubsetSearchOptions so;
      so.shatter = detail::experiment_shatter_options();
      const Margin g = detail::margin_of(l2_grid[i]);
      auto r = max_shattered_subset(o, iota_points(ground), g, cfg.solver, so);
      l2[i] = {to_double(l2_grid[i]), r.size, r.lower_bound_only ? DimStatus::Lower : DimStatus::Exact};
      Json c{{"type", "max-shattered-subset"}, {"size", r.size}, {"subset", r.subset}, {"tests", r.tests}};
      if (r.verdict) c["shattered"] = shatter_certificate(o, g, *r.verdict);
      l2_certs[i] = c;
      return detail::TaskOutput{};
    });
  ExperimentResult dims;
  detail::run_tasks(tasks, {"id", "error", "outcome"}, cfg, dims);
  if (dims.outcome == Outcome::Error) {
    out.table = dims.table;
    out.outcome = Outcome::Error;
    return out;
  }

  out.table.columns = {"id", "family", "gamma1", "gamma2", "product", "lhs", "rhs", "pass", "certificate", "outcome"};
  auto emit = [&](const std::string& family, const std::vector<DimEntry>& dims_of, const std::string& cert) {
    auto a = audit_submultiplicativity(dims_of);
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
      const auto& r = a.rows[k];
      out.table.add({family + "-" + std::to_string(k), family, fmt(r.gamma1), fmt(r.gamma2), fmt(r.product),
                     std::to_string(r.lhs), std::to_string(r.rhs), r.pass ? "true" : "false", cert,
                     to_string(Outcome::Decided)});
    }
    out.summary.add({family + " triples", std::to_string(a.rows.size())});
    out.summary.add({family + " all_pass", a.all_pass() ? "true" : "false"});
    for (const auto& n : a.notices) out.summary.add({family + " notice", n});
  };
  out.summary.columns = {"name", "value"};

  Json l2_doc{{"type", "dimension-entries"}, {"family", "l2"}};
  Json arr = Json::array();
  for (std::size_t i = 0; i < l2.size(); ++i)
    arr.push_back({{"gamma", rational_json(l2_grid[i])}, {"dim", l2[i].dim}, {"status", to_string(l2[i].status)},
                   {"certificate", l2_certs[i]}});
  l2_doc["entries"] = arr;
  out.certificates.emplace_back("submulti-l2", l2_doc);
  emit("l2", l2, "certs/submulti-l2.json");

  for (int k : {1, 2}) {
    const PhiClass phi(PhiSpec::inverse_power(k, 1000000));
    std::vector<DimEntry> d;
    Json doc{{"type", "dimension-entries"}, {"family", "phi-k" + std::to_string(k)}};
    Json e = Json::array();
    for (const auto& g : phi_grid) {
      d.push_back(phi_dimension(phi, to_double(g), cfg.solver));
      e.push_back({{"gamma", rational_json(g)}, {"dim", d.back().dim}, {"status", "exact"}});
    }
    doc["entries"] = e;
    const std::string stem = "submulti-phi-k" + std::to_string(k);
    out.certificates.emplace_back(stem, doc);
    emit("phi-k" + std::to_string(k), d, "certs/" + stem + ".json");
  }
  return out;
}

/// Random diameter-1 spaces: no pair (1/3 + 0.01)-shattered by D^>; plus the
/// two-sided subset space at gamma = 3/10 (k = 6) and 0.34 (k = 2).
inline ExperimentResult run_metric_dichotomy(const ExperimentConfig& cfg) {
  ExperimentResult out;
  const std::size_t count = cfg.count ? cfg.count : 200;
  const std::size_t max_n = cfg.sizes.empty() ? 12 : cfg.sizes.front();
  const Rational gamma = cfg.gammas.empty() ? Rational(1, 3) + Rational(1, 100) : cfg.gammas.front();
  const SplitMix64 root(cfg.seed);
  std::vector<detail::Task> tasks;
  for (std::size_t i = 0; i < count; ++i)
    tasks.push_back([&, i] {
      SplitMix64 rng = root.fork(i);
      const std::size_t n = 2 + static_cast<std::size_t>(rng.below(max_n - 1));
      const MetricSpace space = random_unit_metric_space(rng, n);
      const ConceptClassOracle o = DistanceCombinationClass::all_centers(space, DistanceVariant::Pos);
      std::size_t yes = 0, no = 0, marginal = 0;
      Json verdicts = Json::array();
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
          auto v = is_shattered(o, {a, b}, detail::margin_of(gamma), cfg.solver, detail::experiment_shatter_options());
          (v.status == ShatterStatus::Shattered ? yes : v.status == ShatterStatus::NotShattered ? no : marginal)++;
          verdicts.push_back(shatter_json(v));
        }
      const std::string id = "space-" + std::to_string(i);
      detail::TaskOutput t;
      t.outcome = marginal ? Outcome::Marginal : Outcome::Decided;
      t.rows.push_back({id, "random", std::to_string(n), fmt(gamma), std::to_string(no + yes + marginal),
                        std::to_string(yes), std::to_string(marginal), "", "certs/" + id + ".json",
                        to_string(t.outcome)});
      t.certificates.emplace_back(id, Json{{"type", "shatter-family"},
                                           {"class", class_json(o)},
                                           {"gamma", to_double(gamma)},
                                           {"gamma_squared", rational_json(gamma * gamma)},
                                           {"verdicts", verdicts}});
      return t;
    });
  tasks.push_back([&] {
    detail::TaskOutput t;
    const Rational g(3, 10);
    auto b = gamma_counterexample_space(6, g);
    const auto viol = b.metric().validate();
    const std::size_t ok = detail::verified_bundle_witnesses(b);
    const std::size_t points = b.metric().size();
    const std::string status = viol ? "MetricInvalid " + describe(*viol) : "MetricValid";
    t.rows.push_back({"gamma-space-k6", "gamma-space", std::to_string(points), fmt(g),
                      std::to_string(b.witnesses.size()), std::to_string(ok), "0", status,
                      "certs/gamma-space-k6.json", to_string(Outcome::Decided)});
    t.certificates.emplace_back("gamma-space-k6", bundle_json(b));
    return t;
  });
  tasks.push_back([&] {
    detail::TaskOutput t;
    const Rational g(34, 100);
    auto b = gamma_counterexample_space(2, g);
    const auto viol = b.metric().validate();
    const std::string status = viol ? "MetricInvalid " + describe(*viol) : "MetricValid";
    Json doc = bundle_json(b);
    doc["validation"] = violation_json(viol, b.metric().ids);
    t.rows.push_back({"gamma-space-k2", "gamma-space", std::to_string(b.metric().size()), fmt(g), "", "", "", status,
                      "certs/gamma-space-k2.json", to_string(Outcome::Decided)});
    t.certificates.emplace_back("gamma-space-k2", doc);
    return t;
  });
  // Columns: for random spaces, pairs tested / shattered / marginal; for the
  // gamma space, witnesses / verified.
  detail::run_tasks(tasks,
                    {"id", "kind", "points", "gamma", "tested", "shattered_or_verified", "marginal", "metric",
                     "certificate", "outcome"},
                    cfg, out);
  out.summary.columns = {"name", "value"};
  std::size_t shattered = 0, spaces = 0;
  for (const auto& r : out.table.rows)
    if (r[1] == "random") {
      ++spaces;
      shattered += std::stoull(r[5]);
    }
  out.summary.add({"sampling model", "uniform weights on [0.05, 1], shortest-path closure, diameter 1"});
  out.summary.add({"random spaces", std::to_string(spaces)});
  out.summary.add({"shattered pairs", std::to_string(shattered)});
  return out;
}

/// max_shattered_subset under the Lipschitz class against packing_number(2 gamma).
inline ExperimentResult run_lip_packing(const ExperimentConfig& cfg) {
  ExperimentResult out;
  const std::size_t count = cfg.count ? cfg.count : 100;
  const std::size_t max_n = cfg.sizes.empty() ? 10 : cfg.sizes.front();
  const std::vector<double> factors = cfg.ps.empty() ? std::vector<double>{0.1, 0.25, 0.4} : cfg.ps;
  const SplitMix64 root(cfg.seed);
  std::vector<detail::Task> tasks;
  for (std::size_t i = 0; i < count; ++i)
    tasks.push_back([&, i] {
      SplitMix64 rng = root.fork(i);
      const std::size_t n = 2 + static_cast<std::size_t>(rng.below(max_n - 1));
      const MetricSpace space = random_metric_space(rng, n);
      const ConceptClassOracle o = LipschitzClass(space);
      detail::TaskOutput t;
      for (double f : factors) {
        const double gamma = f * space.diameter();
        auto m = max_shattered_subset(o, iota_points(n), gamma, cfg.solver);
        auto p = packing_number(space, 2.0 * gamma);
        const std::string id = "space-" + std::to_string(i) + "-f" + fmt(f);
        const Outcome oc = m.lower_bound_only ? Outcome::Marginal : Outcome::Decided;
        t.outcome = worst(t.outcome, oc);
        t.rows.push_back({id, std::to_string(n), fmt(f), fmt(gamma), std::to_string(m.size), std::to_string(p.size),
                          m.size == p.size ? "true" : "false", "certs/" + id + ".json", to_string(oc)});
        Json c{{"type", "lipschitz-packing"}, {"gamma", gamma}, {"space", metric_json(space)}};
        c["shattered"] = m.verdict ? shatter_certificate(o, gamma, *m.verdict) : Json();
        c["max_shattered"] = m.size;
        c["packing"] = packing_json(p, space.ids());
        t.certificates.emplace_back(id, c);
      }
      return t;
    });
  detail::run_tasks(tasks, {"id", "points", "factor", "gamma", "max_shattered", "packing", "equal", "certificate", "outcome"},
                    cfg, out);
  out.summary.columns = {"name", "value"};
  std::size_t eq = 0;
  for (const auto& r : out.table.rows) eq += r[6] == "true";
  out.summary.add({"sampling model", "uniform weights on [0.05, 1], shortest-path closure"});
  out.summary.add({"rows", std::to_string(out.table.rows.size())});
  out.summary.add({"equal", std::to_string(eq)});
  return out;
}

namespace detail {

// Random finite function polytope over 1..5 points. Half the instances take
// 1..6 vertices with values k/4, k in [-4, 4], and gamma = k/8, k in [1, 6];
// the other half (gamma = k/16, k in [1, 4]) take a scaled sign pattern plus noise for each
// pattern, each pattern dropped with probability 1/8, so shattering is often
// close to the threshold.
struct FuzzInstance {
  PolytopeClass polytope;
  Rational gamma;
};

inline FuzzInstance random_polytope(SplitMix64& rng) {
  const std::size_t n = 1 + rng.below(5);
  std::vector<std::vector<Rational>> vert;
  if (rng.below(2) == 0) {
    vert.assign(1 + rng.below(6), std::vector<Rational>(n));
    for (auto& row : vert)
      for (auto& x : row) x = Rational(static_cast<long long>(rng.below(9)) - 4, 4);
  } else {
    for (std::uint64_t k = 0; k < (std::uint64_t{1} << n); ++k) {
      if (rng.below(8) == 0) continue;
      const Rational scale(static_cast<long long>(1 + rng.below(3)), 4);
      std::vector<Rational> row;
      for (int y : sign_pattern(n, k)) row.push_back(y * scale + Rational(static_cast<long long>(rng.below(5)) - 2, 8));
      vert.push_back(std::move(row));
    }
    if (vert.empty()) vert.push_back(std::vector<Rational>(n, Rational(0)));
    return {PolytopeClass(std::move(vert)), Rational(static_cast<long long>(1 + rng.below(4)), 16)};
  }
  return {PolytopeClass(std::move(vert)), Rational(static_cast<long long>(1 + rng.below(6)), 8)};
}

struct EquivalenceDecisions {
  bool enumeration = false;  // every pattern realized
  bool cube = false;         // every cube vertex gamma * y in F restricted to S
  bool lp = false;           // min over patterns of the exact min support >= gamma
  Rational min_support;
  bool lambda_sample_ok = true;  // sampled lambdas never beat the exact minimum
};

inline EquivalenceDecisions decide_three_ways(const PolytopeClass& poly, const Rational& gamma, SplitMix64& rng,
                                              const SolverConfig& base) {
  SolverConfig exact = base;
  exact.arithmetic = Arithmetic::Rational;
  const ConceptClassOracle o = poly;
  const std::size_t n = poly.size();
  const auto pts = iota_points(n);
  EquivalenceDecisions d;
  ShatterOptions so;
  so.keep_witnesses = false;
  d.enumeration = is_shattered(o, pts, Margin::exact(gamma), exact, so).status == ShatterStatus::Shattered;
  d.cube = true;
  for (std::uint64_t k = 0; k < (std::uint64_t{1} << n) && d.cube; ++k) {
    const auto y = sign_pattern(n, k);
    std::vector<Rational> target;
    for (int s : y) target.push_back(s * gamma);
    d.cube = check_cube_condition(o, pts, gamma, target, exact).yes;
  }
  bool first = true;
  for (std::uint64_t k = 0; k < (std::uint64_t{1} << n); ++k) {
    const auto y = sign_pattern(n, k);
    auto m = min_support_exact(polyhedral_form<Rational>(poly, pts), y);
    if (first || m.value < d.min_support) d.min_support = m.value;
    first = false;
  }
  d.lp = d.min_support >= gamma;
  // Sampled signed weights: support(lambda) is never below the exact minimum.
  for (int s = 0; s < 16; ++s) {
    Vector mu(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      mu[i] = rng.uniform() + 1e-3;
      y[i] = rng.below(2) ? 1 : -1;
    }
    const double v = support_polytope(poly, make_sample(pts, y), SimplexWeights::normalized(mu)).value;
    if (v < to_double(d.min_support) - 1e-9) d.lambda_sample_ok = false;
  }
  return d;
}

// Best margin over unit functionals on a 1e-3 angular grid.
inline double grid_margin(const std::vector<Vector>& x, const std::vector<int>& y) {
  const std::size_t steps = static_cast<std::size_t>(std::ceil(2.0 * M_PI / 1e-3));
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) * 1e-3;
    const double c = std::cos(t), sn = std::sin(t);
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) m = std::min(m, y[i] * (c * x[i][0] + sn * x[i][1]));
    best = std::max(best, m);
  }
  return best;
}

}  // namespace detail

/// Three exact decisions of shattering on random function polytopes, and
/// realize() against a grid oracle on random planar l2 samples.
inline ExperimentResult run_equivalence_fuzz(const ExperimentConfig& cfg) {
  ExperimentResult out;
  const std::size_t count = cfg.count ? cfg.count : 500;
  const std::size_t grid_count = cfg.sizes.empty() ? 100 : cfg.sizes.front();
  const SplitMix64 root(cfg.seed);
  std::vector<detail::Task> tasks;
  for (std::size_t i = 0; i < count; ++i)
    tasks.push_back([&, i] {
      SplitMix64 rng = root.fork(i);
      auto inst = detail::random_polytope(rng);
      auto d = detail::decide_three_ways(inst.polytope, inst.gamma, rng, cfg.solver);
      const bool agree = d.enumeration == d.cube && d.cube == d.lp && d.lambda_sample_ok;
      const std::string id = "polytope-" + std::to_string(i);
      detail::TaskOutput t;
      auto b = [](bool x) { return std::string(x ? "true" : "false"); };
      t.rows.push_back({id, "polytope", std::to_string(inst.polytope.size()), fmt(inst.gamma), b(d.enumeration),
                        b(d.cube), b(d.lp) + " (" + fmt(d.min_support) + ")", "", b(agree),
                        "certs/" + id + ".json", to_string(Outcome::Decided)});
      SolverConfig ex = cfg.solver;
      ex.arithmetic = Arithmetic::Rational;
      const ConceptClassOracle o = inst.polytope;
      auto v = is_shattered(o, iota_points(inst.polytope.size()), Margin::exact(inst.gamma), ex);
      t.certificates.emplace_back(id, shatter_certificate(o, Margin::exact(inst.gamma), v));
      return t;
    });
  // Grid-oracle part: instances are drawn until grid_count have
  // |m* - gamma| > 1e-2, m* judged by the grid itself.
  tasks.push_back([&] {
    detail::TaskOutput t;
    SplitMix64 rng = root.fork(count + 1);
    std::size_t accepted = 0;
    for (std::size_t attempt = 0; accepted < grid_count && attempt < 100 * grid_count; ++attempt) {
      std::vector<Vector> x;
      std::vector<int> y;
      for (int i = 0; i < 4; ++i) {
        const double r = std::sqrt(rng.uniform()), a = rng.uniform(0.0, 2.0 * M_PI);
        x.push_back({r * std::cos(a), r * std::sin(a)});
        y.push_back(rng.below(2) ? 1 : -1);
      }
      const double gamma = rng.uniform(0.01, 0.4);
      const double gm = std::max(0.0, detail::grid_margin(x, y));
      if (std::abs(gm - gamma) <= 1e-2) continue;
      const ConceptClassOracle o = DualBallClass(x, NormSpec(2.0));
      auto v = realize(o, make_sample(iota_points(4), y), gamma, cfg.solver);
      const bool grid_yes = gm >= gamma;
      const bool agree = v.status != Verdict::Marginal && grid_yes == (v.status == Verdict::Realized);
      const std::string id = "grid-" + std::to_string(accepted);
      t.rows.push_back({id, "grid-l2", "4", fmt(gamma), to_string(v.status), "", "", fmt(gm), agree ? "true" : "false",
                        "certs/" + id + ".json", to_string(Outcome::Decided)});
      t.certificates.emplace_back(id, Json{{"type", "realize-certificate"},
                                           {"class", class_json(o)},
                                           {"points", iota_points(4)},
                                           {"labels", y},
                                           {"gamma", gamma},
                                           {"verdict", realize_json(v)}});
      ++accepted;
    }
    return t;
  });
  detail::run_tasks(tasks,
                    {"id", "kind", "points", "gamma", "enumeration", "cube", "lp_min", "grid_margin", "agree",
                     "certificate", "outcome"},
                    cfg, out);
  out.summary.columns = {"name", "value"};
  std::size_t poly = 0, poly_agree = 0, grid = 0, grid_agree = 0;
  for (const auto& r : out.table.rows) {
    if (r[1] == "polytope") {
      ++poly;
      poly_agree += r[8] == "true";
    } else if (r[1] == "grid-l2") {
      ++grid;
      grid_agree += r[8] == "true";
    }
  }
  out.summary.add({"polytopes", std::to_string(poly)});
  out.summary.add({"polytopes agreeing", std::to_string(poly_agree)});
  out.summary.add({"grid instances", std::to_string(grid)});
  out.summary.add({"grid agreeing", std::to_string(grid_agree)});
  return out;
}

/// Phi-class dims on gamma = 1/k, k = 2..13 by default, with the rate fit.
inline ExperimentResult run_phi_growth(const ExperimentConfig& cfg) {
  ExperimentResult out;
  std::vector<Rational> grid;
  if (cfg.gammas.empty())
    for (int k = 2; k <= 13; ++k) grid.push_back(Rational(1, k));
  else
    grid = cfg.gammas;
  const PhiSpec spec = cfg.phi == "exp" ? PhiSpec::exponential(cfg.phi_n) : PhiSpec::inverse_power(cfg.phi_k, cfg.phi_n);
  const PhiClass phi(spec);
  std::vector<detail::Task> tasks;
  for (std::size_t i = 0; i < grid.size(); ++i)
    tasks.push_back([&, i] {
      detail::TaskOutput t;
      const double g = to_double(grid[i]);
      auto e = phi_dimension(phi, g, cfg.solver);
      const std::string id = "phi-" + std::to_string(i);
      t.rows.push_back({id, spec.name(), fmt(grid[i]), std::to_string(e.dim), std::to_string(spec.dimension(g)),
                        to_string(e.status), "certs/" + id + ".json", to_string(Outcome::Decided)});
      const ConceptClassOracle o = phi;
      Json c{{"type", "phi-dimension"}, {"gamma", g}, {"dim", e.dim}};
      if (e.dim > 0) {
        auto v = is_shattered(o, iota_points(static_cast<std::size_t>(e.dim)), g, cfg.solver);
        c["prefix"] = shatter_certificate(o, g, v);
      }
      if (e.dim < spec.N) {
        auto v = is_shattered(o, {static_cast<std::size_t>(e.dim)}, g, cfg.solver);
        c["next_point"] = shatter_certificate(o, g, v);
      }
      t.certificates.emplace_back(id, c);
      return t;
    });
  detail::run_tasks(tasks, {"id", "phi", "gamma", "dim", "predicted", "status", "certificate", "outcome"}, cfg, out);
  out.summary.columns = {"name", "value"};
  DimensionReport rep;
  for (const auto& r : out.table.rows)
    if (r.size() > 3 && !r[3].empty()) rep.entries.push_back({to_double(parse_rational(r[2])), std::stoull(r[3]), DimStatus::Exact});
  if (rep.entries.size() >= 4) {
    auto f = fit_rate(rep);
    out.summary.add({"exponent", fmt(f.exponent)});
    out.summary.add({"residual", fmt(f.residual)});
    out.summary.add({"super_polynomial", f.super_polynomial ? "true" : "false"});
  }
  return out;
}

/// Runs the named experiment and, when `cfg.output` is set, writes
/// table.csv, summary.csv, meta.json and certs/*.json there.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult r;
  if (cfg.id == "lp-profile") r = run_lp_profile(cfg);
  else if (cfg.id == "submulti-audit") r = run_submulti_audit(cfg);
  else if (cfg.id == "metric-dichotomy") r = run_metric_dichotomy(cfg);
  else if (cfg.id == "lip-packing") r = run_lip_packing(cfg);
  else if (cfg.id == "equivalence-fuzz") r = run_equivalence_fuzz(cfg);
  else r = run_phi_growth(cfg);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.table.metadata = {{"experiment", cfg.id}, {"config_hash", cfg.hash()}, {"version", kVersion}};
  if (!cfg.output.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(cfg.output) / "certs");
    write_text_file((fs::path(cfg.output) / "table.csv").string(), r.table.to_csv());
    write_text_file((fs::path(cfg.output) / "summary.csv").string(), r.summary.to_csv());
    for (const auto& [stem, doc] : r.certificates)
      write_text_file((fs::path(cfg.output) / "certs" / (stem + ".json")).string(), doc.dump() + "\n");
    Json meta{{"experiment", cfg.id},     {"config", cfg.to_json()},       {"config_hash", cfg.hash()},
              {"version", kVersion},      {"wall_seconds", r.wall_seconds}, {"outcome", to_string(r.outcome)},
              {"rows", r.table.rows.size()}};
    write_json_file((fs::path(cfg.output) / "meta.json").string(), meta);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Certificate re-checks across document types

/// Re-checks any certificate document written by the experiments or the CLI.
inline RecheckResult recheck_certificate(const Json& doc, double tol = 1e-7) {
  const std::string type = doc.value("type", std::string());
  if (type == "shatter-certificate") return recheck_shatter_certificate(doc, tol);
  if (type == "shatter-family") {
    for (const auto& v : doc.at("verdicts")) {
      Json single{{"type", "shatter-certificate"},
                  {"class", doc.at("class")},
                  {"gamma", doc.at("gamma")},
                  {"gamma_squared", doc.at("gamma_squared")},
                  {"verdict", v}};
      auto r = recheck_shatter_certificate(single, tol);
      if (!r.ok) return r;
    }
    return {true, "all verdicts re-evaluated"};
  }
  if (type == "size-scan") {
    for (const char* key : {"largest_shattered", "first_failure"})
      if (doc.contains(key) && !doc.at(key).is_null()) {
        auto r = recheck_shatter_certificate(doc.at(key), tol);
        if (!r.ok) return r;
      }
    return {true, "scan endpoints re-evaluated"};
  }
  if (type == "phi-dimension") {
    for (const char* key : {"prefix", "next_point"})
      if (doc.contains(key)) {
        auto r = recheck_shatter_certificate(doc.at(key), tol);
        if (!r.ok) return r;
      }
    return {true, "phi endpoints re-evaluated"};
  }
  if (type == "construction-bundle") {
    const ConstructionBundle b = read_bundle(doc);
    if (b.name != "gamma-space" && b.name != "intro") return {true, "bundle parsed"};
    const bool valid = !b.metric().validate();
    if (valid != (b.predicted_status == PredictedStatus::MetricValid)) return {false, "metric validity differs from prediction"};
    if (valid && !b.witnesses.empty() && detail::verified_bundle_witnesses(b) != b.witnesses.size())
      return {false, "a named witness does not realize its labeling"};
    return {true, "metric validity and witnesses re-evaluated"};
  }
  if (type == "dimension-entries") {
    for (const auto& e : doc.at("entries"))
      if (e.contains("certificate") && e.at("certificate").contains("shattered")) {
        auto r = recheck_shatter_certificate(e.at("certificate").at("shattered"), tol);
        if (!r.ok) return r;
      }
    return {true, "dimension entries re-evaluated"};
  }
  if (type == "lipschitz-packing") {
    if (!doc.at("shattered").is_null()) {
      auto r = recheck_shatter_certificate(doc.at("shattered"), tol);
      if (!r.ok) return r;
    }
    const MetricObject m = read_metric_object(doc.at("space"));
    const double s = 2.0 * doc.at("gamma").get<double>();
    const auto sub = doc.at("packing").at("subset").get<std::vector<std::size_t>>();
    const auto d = m.float_matrix();
    for (std::size_t a = 0; a < sub.size(); ++a)
      for (std::size_t b = a + 1; b < sub.size(); ++b)
        if (d[sub[a]][sub[b]] < s) return {false, "packing subset is not 2 gamma separated"};
    if (sub.size() != doc.at("max_shattered").get<std::size_t>()) return {false, "packing size differs from the shattered size"};
    return {true, "shattered subset and packing re-evaluated"};
  }
  if (type == "realize-certificate") {
    const ConceptClassOracle o = read_class(doc.at("class"));
    const LabeledSample sample = make_sample(doc.at("points").get<std::vector<std::size_t>>(), doc.at("labels").get<std::vector<int>>());
    const double gamma = doc.at("gamma").get<double>();
    const Json& v = doc.at("verdict");
    const std::string st = v.at("status").get<std::string>();
    if (st == "Realized") {
      const bool ok = verify_witness(o, sample, read_witness(v.at("witness")), gamma, tol);
      return {ok, ok ? "witness re-evaluated" : "witness margin below gamma"};
    }
    if (st == "NotRealized") {
      Collapse c;
      c.mu = SimplexWeights::normalized(v.at("collapse").at("mu").get<Vector>());
      const bool ok = verify_collapse_support(o, sample, c, gamma, tol);
      return {ok, ok ? "collapse support re-evaluated" : "collapse support not below gamma"};
    }
    return {true, "marginal verdict carries no certificate"};
  }
  return {false, "unknown certificate type '" + type + "'"};
}

}  // namespace marginlab
