// marginlab command-line interface.
//
// Exit codes: 0 when every verdict is decided, 2 when any verdict is
// Marginal, 1 on usage errors, malformed input or solver failures.

#include "marginlab/harness.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>

namespace ml = marginlab;
using ml::Json;

namespace {

struct CommonFlags {
  double tol = 1e-7;
  bool exact = false;
  unsigned jobs = 0;
  std::string output;

  ml::SolverConfig solver() const {
    ml::SolverConfig c;
    c.tol = tol;
    c.arithmetic = exact ? ml::Arithmetic::Rational : ml::Arithmetic::Float;
    c.jobs = jobs;
    c.validate();
    return c;
  }
};

void add_common(CLI::App* app, CommonFlags& f, bool with_output = true) {
  app->add_option("--tol", f.tol, "solver tolerance; Marginal band is 3 tol")->capture_default_str();
  app->add_flag("--exact", f.exact, "rational arithmetic throughout");
  app->add_option("--jobs", f.jobs, "worker threads (default MARGINLAB_JOBS or all cores)");
  if (with_output) app->add_option("--output", f.output, "output file");
}

/// "0.49", "1/3" (exact literals) or "sqrt(1/16)".
ml::Margin parse_gamma(const std::string& text) {
  if (text.rfind("sqrt(", 0) == 0 && text.back() == ')')
    return ml::Margin::sqrt_of(ml::parse_rational(text.substr(5, text.size() - 6)));
  const ml::Rational g = ml::parse_rational(text);
  if (g <= 0) throw ml::InputError("gamma must be positive");
  return ml::Margin::exact(g);
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void emit(const Json& doc, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << doc.dump(2) << "\n";
  } else {
    ml::write_json_file(path, doc);
  }
}

// A class together with its ground-point names and default points.
struct LoadedClass {
  ml::ConceptClassOracle oracle;
  std::vector<std::string> ids;
  std::vector<std::size_t> default_points;
  std::optional<ml::MetricObject> metric;
};

struct ClassFlags {
  std::string kind;
  double p = 0.0;
  std::string r, R;
};

void add_class_flags(CLI::App* app, ClassFlags& f) {
  app->add_option("--class", f.kind,
                  "class kind for metric inputs: DistanceCombination, DistanceCombinationPos, "
                  "DistanceCombinationNeg, Lipschitz, BallPair");
  app->add_option("--p", f.p, "norm exponent for vector inputs (0 keeps the file's; inf allowed)");
  app->add_option("--r", f.r, "BallPair inner radius");
  app->add_option("--R", f.R, "BallPair outer radius");
}

LoadedClass metric_class(const ml::MetricObject& m, std::string kind, const ClassFlags& f) {
  if (kind.empty()) throw ml::InputError("metric input needs --class");
  Json params = Json::object();
  if (kind == "BallPair") {
    if (f.r.empty() || f.R.empty()) throw ml::InputError("BallPair needs --r and --R");
    params["r"] = ml::to_double(ml::parse_rational(f.r));
    params["R"] = ml::to_double(ml::parse_rational(f.R));
  }
  if (auto v = m.validate()) throw ml::InputError("metric input violates the " + ml::describe(*v) + " axiom");
  LoadedClass c{ml::metric_oracle(kind, m, params), m.ids, ml::iota_points(m.size()), m};
  return c;
}

LoadedClass load_class(const Json& j, const ClassFlags& f) {
  std::optional<ml::NormSpec> norm;
  if (f.p != 0.0) norm = ml::NormSpec(f.p);
  auto numbered = [](std::size_t n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
    return ids;
  };
  if (j.contains("object_type")) {
    const ml::ConstructionBundle b = ml::read_bundle(j);
    if (auto* v = std::get_if<ml::VectorSetObject>(&b.object)) {
      ml::VectorSetObject vs = *v;
      if (norm) vs.norm = *norm;
      return {vs.oracle(), numbered(vs.points.size()), ml::iota_points(vs.points.size()), std::nullopt};
    }
    if (auto* m = std::get_if<ml::MetricObject>(&b.object)) {
      ClassFlags g = f;
      std::string kind = f.kind;
      if (kind.empty() && b.name == "gamma-space") kind = "DistanceCombinationPos";
      if (kind.empty() && b.name == "intro") {
        kind = "BallPair";
        if (g.r.empty()) g.r = b.params.at("r");
        if (g.R.empty()) g.R = b.params.at("R");
      }
      LoadedClass c = metric_class(*m, kind, g);
      if (!b.focus.empty()) c.default_points = b.focus;
      return c;
    }
    const auto& spec = std::get<ml::PhiSpec>(b.object);
    return {ml::PhiClass(spec), {}, {}, std::nullopt};
  }
  if (j.contains("kind")) {
    const ml::ConceptClassOracle o = ml::read_class(j);
    const std::size_t n = ml::ground_size(o);
    return {o, numbered(std::min<std::size_t>(n, 64)), n <= 64 ? ml::iota_points(n) : std::vector<std::size_t>{},
            std::nullopt};
  }
  if (j.contains("points")) {
    const ml::VectorSetObject vs = ml::read_vector_set(j, norm);
    return {vs.oracle(), numbered(vs.points.size()), ml::iota_points(vs.points.size()), std::nullopt};
  }
  if (j.contains("dist")) return metric_class(ml::read_metric_object(j), f.kind, f);
  if (j.contains("vertices")) {
    Json c{{"kind", "Polytope"}, {"params", {{"vertices", j.at("vertices")}}}};
    const ml::ConceptClassOracle o = ml::read_class(c);
    const std::size_t n = ml::ground_size(o);
    return {o, numbered(n), ml::iota_points(n), std::nullopt};
  }
  throw ml::InputError("input is neither a bundle, a class descriptor, a vector set, a metric space nor a polytope");
}

// Indices or ids, comma separated.
std::vector<std::size_t> parse_points(const std::string& text, const LoadedClass& c) {
  if (text.empty()) {
    if (c.default_points.empty()) throw ml::InputError("this input needs --points");
    return c.default_points;
  }
  std::vector<std::size_t> out;
  for (const auto& item : split(text)) {
    if (c.metric && !std::isdigit(static_cast<unsigned char>(item.front()))) {
      out.push_back(c.metric->index_of(item));
      continue;
    }
    try {
      out.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw ml::InputError("bad point '" + item + "'");
    }
  }
  return out;
}

int status_code(ml::ShatterStatus s) { return s == ml::ShatterStatus::Marginal ? 2 : 0; }

// ---------------------------------------------------------------------------

int cmd_certify(const std::string& input, const std::string& gamma_text, const std::string& points_text,
                const ClassFlags& cf, const CommonFlags& f, bool no_fallback, bool tightest) {
  const LoadedClass c = load_class(ml::read_json_file(input), cf);
  const ml::Margin gamma = parse_gamma(gamma_text);
  ml::ShatterOptions opt;
  opt.realize.exact_fallback = !no_fallback;
  opt.tightest = tightest;
  const auto pts = parse_points(points_text, c);
  const auto v = ml::is_shattered(c.oracle, pts, gamma, f.solver(), opt);
  const Json cert = ml::shatter_certificate(c.oracle, gamma, v);
  if (!f.output.empty()) ml::write_json_file(f.output, cert);
  Json summary{{"status", ml::to_string(v.status)},
               {"gamma", gamma.value()},
               {"points", pts.size()},
               {"patterns_checked", v.patterns_checked},
               {"exact", v.exact}};
  if (v.counterexample) {
    summary["counterexample_pattern"] = v.counterexample->pattern;
    summary["collapse_value"] = v.counterexample->value;
  }
  std::cout << summary.dump() << "\n";
  return status_code(v.status);
}

int cmd_realize(const std::string& input, const std::string& gamma_text, const std::string& points_text,
                const std::string& labels_text, const ClassFlags& cf, const CommonFlags& f, bool no_fallback) {
  const LoadedClass c = load_class(ml::read_json_file(input), cf);
  const ml::Margin gamma = parse_gamma(gamma_text);
  const auto pts = parse_points(points_text, c);
  std::vector<int> labels;
  for (const auto& s : split(labels_text)) {
    if (s != "1" && s != "+1" && s != "-1") throw ml::InputError("labels must be +1 or -1");
    labels.push_back(s == "-1" ? -1 : 1);
  }
  ml::RealizeOptions ro;
  ro.exact_fallback = !no_fallback;
  const auto v = ml::realize(c.oracle, ml::make_sample(pts, labels), gamma, f.solver(), ro);
  Json doc{{"type", "realize-certificate"}, {"class", ml::class_json(c.oracle)}, {"points", pts},
           {"labels", labels},               {"gamma", gamma.value()},            {"verdict", ml::realize_json(v)}};
  if (!f.output.empty()) ml::write_json_file(f.output, doc);
  std::cout << Json{{"status", ml::to_string(v.status)}, {"value", v.value}, {"exact", v.exact}}.dump() << "\n";
  return v.status == ml::Verdict::Marginal ? 2 : 0;
}

struct ConstructFlags {
  std::string kind;
  unsigned m = 2;
  double p = 2.0;
  std::size_t n = 4;
  unsigned k = 4;
  std::string r = "1/4", R = "1/2", gamma = "3/10";
  bool include_empty = false;
  std::string preset = "exp";
  int phi_k = 1;
  std::uint64_t N = 100;
};

int cmd_construct(const ConstructFlags& c, const std::string& output) {
  ml::ConstructionBundle b;
  if (c.kind == "hadamard") b = ml::hadamard_shattered_set(c.m, c.p);
  else if (c.kind == "basis") b = ml::standard_basis_set(c.n, c.p);
  else if (c.kind == "intro")
    b = ml::intro_counterexample_space(c.k, ml::parse_rational(c.r), ml::parse_rational(c.R), c.include_empty);
  else if (c.kind == "gamma-space") b = ml::gamma_counterexample_space(c.k, ml::parse_rational(c.gamma));
  else if (c.kind == "phi")
    b = ml::phi_class_truncation(c.preset == "exp" ? ml::PhiSpec::exponential(c.N) : ml::PhiSpec::inverse_power(c.phi_k, c.N));
  else throw ml::InputError("unknown construction '" + c.kind + "'");
  emit(ml::bundle_json(b), output);
  return 0;
}

int cmd_validate(const std::string& input, const std::string& output) {
  const Json j = ml::read_json_file(input);
  const ml::MetricObject m = j.contains("object_type") ? ml::read_bundle(j).metric() : ml::read_metric_object(j);
  Json doc = ml::violation_json(m.validate(), m.ids);
  doc["points"] = m.size();
  if (!output.empty()) ml::write_json_file(output, doc);
  std::cout << doc.dump() << "\n";
  return 0;
}

int cmd_packing(const std::string& input, const std::string& s_text, const std::string& gamma_text,
                const std::string& output) {
  const Json j = ml::read_json_file(input);
  const ml::MetricObject m = j.contains("object_type") ? ml::read_bundle(j).metric() : ml::read_metric_object(j);
  if (auto v = m.validate()) throw ml::InputError("metric input violates the " + ml::describe(*v) + " axiom");
  if (s_text.empty() == gamma_text.empty()) throw ml::InputError("give exactly one of --s and --gamma");
  const ml::Rational s = s_text.empty() ? 2 * ml::parse_rational(gamma_text) : ml::parse_rational(s_text);
  const auto p = ml::packing_number(m.exact_space(), s);
  Json doc = ml::packing_json(p, m.ids);
  doc["separation"] = ml::rational_json(s);
  emit(doc, output);
  return 0;
}

int cmd_dim_profile(const std::string& input, const std::string& gammas, const std::string& points_text,
                    const ClassFlags& cf, const CommonFlags& f) {
  const LoadedClass c = load_class(ml::read_json_file(input), cf);
  ml::DimensionReport rep;
  rep.label = ml::kind_name(c.oracle);
  bool marginal = false;
  Json certs = Json::array();
  for (const auto& g : split(gammas)) {
    const ml::Margin gamma = parse_gamma(g);
    if (auto* phi = std::get_if<ml::PhiClass>(&c.oracle)) {
      rep.entries.push_back(ml::phi_dimension(*phi, gamma.value(), f.solver()));
      continue;
    }
    ml::SubsetSearchOptions so;
    so.shatter.realize.exact_fallback = true;
    const auto r = ml::max_shattered_subset(c.oracle, parse_points(points_text, c), gamma, f.solver(), so);
    rep.entries.push_back({gamma.value(), r.size, r.lower_bound_only ? ml::DimStatus::Lower : ml::DimStatus::Exact});
    marginal = marginal || r.lower_bound_only;
    if (r.verdict) certs.push_back(ml::shatter_certificate(c.oracle, gamma, *r.verdict));
  }
  if (rep.entries.size() >= 4) rep.fit = ml::fit_rate(rep);
  Json doc = ml::dim_report_json(rep);
  if (!certs.empty() && !f.output.empty()) doc["certificates"] = certs;
  emit(doc, f.output);
  return marginal ? 2 : 0;
}

struct ExperimentFlags {
  std::string id, gammas, ps, sizes, phi = "exp";
  std::size_t count = 0;
  std::uint64_t seed = 1;
  bool keep_going = false;
  int phi_k = 1;
  std::uint64_t phi_n = 1000000;
};

int cmd_experiment(const ExperimentFlags& e, const CommonFlags& f) {
  ml::ExperimentConfig cfg;
  cfg.id = e.id;
  for (const auto& g : split(e.gammas)) cfg.gammas.push_back(ml::parse_rational(g));
  for (const auto& p : split(e.ps)) cfg.ps.push_back(p == "inf" ? std::numeric_limits<double>::infinity() : std::stod(p));
  for (const auto& s : split(e.sizes)) cfg.sizes.push_back(std::stoull(s));
  cfg.count = e.count;
  cfg.seed = e.seed;
  cfg.solver = f.solver();
  cfg.output = f.output.empty() ? "results/" + e.id : f.output;
  cfg.keep_going = e.keep_going;
  cfg.phi = e.phi;
  cfg.phi_k = e.phi_k;
  cfg.phi_n = e.phi_n;
  const auto r = ml::run_experiment(cfg);
  std::cout << r.summary.to_csv();
  std::cerr << "wrote " << r.table.rows.size() << " rows to " << cfg.output << " (" << ml::to_string(r.outcome)
            << ")\n";
  return r.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified margin shattering, realizability and dimension profiles"};
  app.set_version_flag("--version", ml::kVersion);
  app.require_subcommand(1);

  CommonFlags common;
  ClassFlags cls;
  std::string input, gamma, points, labels, s_sep;
  bool no_fallback = false;
  bool tightest = false;

  auto* certify = app.add_subcommand("certify-shatter", "decide whether a point set is gamma-shattered");
  certify->add_option("--input", input, "bundle, vector set, metric space, class descriptor or polytope")->required();
  certify->add_option("--gamma", gamma, "margin: decimal, a/b or sqrt(a/b)")->required();
  certify->add_option("--points", points, "indices or ids (default: bundle focus or all points)");
  certify->add_flag("--no-exact-fallback", no_fallback, "leave float Marginal verdicts undecided");
  certify->add_flag("--tightest", tightest, "report the failing pattern with the smallest collapse value");
  add_class_flags(certify, cls);
  add_common(certify, common);

  auto* realize_cmd = app.add_subcommand("realize", "decide whether one labeling is realized with margin gamma");
  realize_cmd->add_option("--input", input)->required();
  realize_cmd->add_option("--gamma", gamma)->required();
  realize_cmd->add_option("--points", points);
  realize_cmd->add_option("--labels", labels, "comma separated +1/-1")->required();
  realize_cmd->add_flag("--no-exact-fallback", no_fallback);
  add_class_flags(realize_cmd, cls);
  add_common(realize_cmd, common);

  ConstructFlags cons;
  auto* construct = app.add_subcommand("construct", "emit a construction bundle");
  construct->add_option("kind", cons.kind, "hadamard, basis, intro, gamma-space or phi")->required();
  construct->add_option("--m", cons.m, "Hadamard order exponent");
  construct->add_option("--p", cons.p, "norm exponent");
  construct->add_option("--n", cons.n, "basis size");
  construct->add_option("--k", cons.k, "number of A points");
  construct->add_option("--r", cons.r);
  construct->add_option("--R", cons.R);
  construct->add_option("--gamma", cons.gamma);
  construct->add_flag("--include-empty", cons.include_empty, "add b0 for the empty subset");
  construct->add_option("--preset", cons.preset, "phi preset: exp or inverse-power");
  construct->add_option("--phi-k", cons.phi_k);
  construct->add_option("--N", cons.N, "phi ground size");
  construct->add_option("--output", common.output);

  auto* validate = app.add_subcommand("validate-metric", "check the metric axioms");
  validate->add_option("--input", input)->required();
  validate->add_option("--output", common.output);

  auto* packing = app.add_subcommand("packing", "maximum s-separated subset");
  packing->add_option("--input", input)->required();
  packing->add_option("--s", s_sep, "separation");
  packing->add_option("--gamma", gamma, "margin; separation 2 gamma");
  packing->add_option("--output", common.output);

  std::string gammas;
  auto* profile = app.add_subcommand("dim-profile", "largest shattered subset across a gamma grid");
  profile->add_option("--input", input)->required();
  profile->add_option("--gammas", gammas, "comma separated margins")->required();
  profile->add_option("--points", points, "ground set (default all points)");
  add_class_flags(profile, cls);
  add_common(profile, common);

  ExperimentFlags ex;
  auto* experiment = app.add_subcommand("run-experiment", "run an experiment driver");
  experiment->add_option("id", ex.id)->required()->check(CLI::IsMember(ml::experiment_ids()));
  experiment->add_option("--gammas", ex.gammas, "gamma grid");
  experiment->add_option("--ps", ex.ps, "norm exponents or factors");
  experiment->add_option("--sizes", ex.sizes, "size parameters");
  experiment->add_option("--count", ex.count, "instances");
  experiment->add_option("--seed", ex.seed)->capture_default_str();
  experiment->add_flag("--keep-going", ex.keep_going, "record failing rows and continue");
  experiment->add_option("--phi", ex.phi);
  experiment->add_option("--phi-k", ex.phi_k);
  experiment->add_option("--phi-N", ex.phi_n);
  add_common(experiment, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*certify) return cmd_certify(input, gamma, points, cls, common, no_fallback, tightest);
    if (*realize_cmd) return cmd_realize(input, gamma, points, labels, cls, common, no_fallback);
    if (*construct) return cmd_construct(cons, common.output);
    if (*validate) return cmd_validate(input, common.output);
    if (*packing) return cmd_packing(input, s_sep, gamma, common.output);
    if (*profile) return cmd_dim_profile(input, gammas, points, cls, common);
    if (*experiment) return cmd_experiment(ex, common);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
