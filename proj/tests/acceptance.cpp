// Acceptance suite: one PASS/FAIL line per criterion A1..A10, with the
// measured wall time against the stated budget. Exits 1 when any criterion
// fails.

#include "marginlab/harness.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>

namespace ml = marginlab;
using R = ml::Rational;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "FAILED: ";
      detail << what << "; ";
      pass = false;
    }
  }
};

ml::ShatterOptions fallback() {
  ml::ShatterOptions o;
  o.realize.exact_fallback = true;
  return o;
}

std::string summary_value(const ml::ExperimentResult& r, const std::string& name) {
  for (const auto& row : r.summary.rows)
    if (row[0] == name) return row[1];
  return "";
}

// Every certificate of an experiment rechecks from its JSON text.
std::size_t failing_certificates(const ml::ExperimentResult& r) {
  std::size_t bad = 0;
  for (const auto& [stem, doc] : r.certificates)
    if (!ml::recheck_certificate(ml::Json::parse(doc.dump())).ok) ++bad;
  return bad;
}

bool rechecks(const ml::ConceptClassOracle& o, const ml::Margin& g, const ml::ShatterVerdict& v) {
  return ml::recheck_shatter_certificate(ml::Json::parse(ml::shatter_certificate(o, g, v).dump())).ok;
}

ml::ExperimentResult experiment(const std::string& id) {
  ml::ExperimentConfig c;
  c.id = id;
  return ml::run_experiment(c);
}

const ml::SolverConfig kFloat{};

// ---------------------------------------------------------------------------

void a1(Outcome& o) {
  int sets = 0;
  for (unsigned m = 1; m <= 4; ++m)
    for (double p : {2.0, 3.0, 4.0}) {
      const auto b = ml::hadamard_shattered_set(m, p);
      const auto& vs = b.vectors();
      const double n = static_cast<double>(vs.points.size());
      const ml::Margin g(1.0 / std::sqrt(n) - 1e-6);
      const ml::ConceptClassOracle c = vs.oracle();
      const auto v = ml::is_shattered(c, ml::iota_points(vs.points.size()), g, kFloat, fallback());
      const std::string tag = "m=" + std::to_string(m) + " p=" + ml::fmt(p);
      o.require(v.status == ml::ShatterStatus::Shattered, tag + " " + ml::to_string(v.status));
      if (v.status == ml::ShatterStatus::Shattered) o.require(rechecks(c, g, v), tag + " certificate");
      ++sets;
    }
  o.detail << sets << " sets Shattered at 1/sqrt(n) - 1e-6 with rechecked witnesses";
}

void a2(Outcome& o) {
  double worst = 0.0;
  for (double p : {1.0, 1.5, 2.0})
    for (std::size_t n : {4u, 8u, 16u}) {
      const auto b = ml::standard_basis_set(n, p);
      const auto& vs = b.vectors();
      const ml::ConceptClassOracle c = vs.oracle();
      const auto pts = ml::iota_points(n);
      const double pred = std::pow(static_cast<double>(n), 1.0 / p - 1.0);
      const std::string tag = "n=" + std::to_string(n) + " p=" + ml::fmt(p);

      ml::SolverConfig cfg;
      ml::Margin at(pred - 1e-6);
      if (p != 1.5) {
        cfg.arithmetic = ml::Arithmetic::Rational;
        at = p == 1.0 ? ml::Margin::exact(R(1)) : ml::Margin::sqrt_of(R(1, static_cast<long>(n)));
      }
      const auto v = ml::is_shattered(c, pts, at, cfg, fallback());
      o.require(v.status == ml::ShatterStatus::Shattered, tag + " boundary " + ml::to_string(v.status));
      if (p != 1.5) o.require(v.exact, tag + " boundary verdict not exact");

      const double above = pred + 1e-4;
      const auto w = ml::is_shattered(c, pts, above, kFloat, fallback());
      o.require(w.status == ml::ShatterStatus::NotShattered, tag + " above " + ml::to_string(w.status));
      if (w.status != ml::ShatterStatus::NotShattered) continue;
      // Uniform weights signed by the failing labeling.
      ml::Vector lam(n);
      for (std::size_t i = 0; i < n; ++i) lam[i] = w.counterexample->labels[i] / static_cast<double>(n);
      const ml::SignedWeights uniform(lam);
      const double val = ml::collapse_value(vs.points, vs.norm, uniform);
      worst = std::max(worst, std::abs(val - pred));
      o.require(std::abs(val - pred) <= 1e-9, tag + " uniform collapse " + ml::fmt(val));
      o.require(ml::verify_collapse(vs.points, vs.norm, uniform, above), tag + " uniform collapse does not verify");
      o.require(ml::verify_collapse(vs.points, vs.norm, w.counterexample->lambda, above), tag + " solver collapse");
    }
  o.detail << "9 sets; boundary Shattered, +1e-4 NotShattered; max |uniform collapse - n^(1/p-1)| = " << worst;
}

void a3(Outcome& o) {
  ml::SplitMix64 root(2024);
  ml::ShatterOptions tight = fallback();
  tight.tightest = true;
  double worst = 0.0;
  std::size_t sets = 0, idx = 0;
  for (std::size_t d : {2u, 3u, 5u})
    for (double p : {1.5, 2.0, 3.0}) {
      const ml::NormSpec norm(p);
      for (int t = 0; t < 100; ++t) {
        ml::SplitMix64 rng = root.fork(idx++);
        std::vector<ml::Vector> x(d + 1);
        for (auto& v : x) v = ml::random_unit_vector(rng, d, norm);
        const ml::DualBallClass c(x, norm);
        const auto v = ml::is_shattered(c, ml::iota_points(d + 1), 1e-3, kFloat, tight);
        ++sets;
        if (v.status != ml::ShatterStatus::NotShattered) {
          o.require(false, "d=" + std::to_string(d) + " p=" + ml::fmt(p) + " trial " + std::to_string(t) + " " +
                               ml::to_string(v.status));
          continue;
        }
        const double val = ml::collapse_value(x, norm, v.counterexample->lambda);
        worst = std::max(worst, val);
        o.require(ml::verify_collapse(x, norm, v.counterexample->lambda, 1e-6),
                  "d=" + std::to_string(d) + " p=" + ml::fmt(p) + " collapse " + ml::fmt(val));
      }
    }
  o.detail << sets << " sets NotShattered at 1e-3; largest collapse value " << worst;
}

void a4(Outcome& o) {
  const auto b = ml::standard_basis_set(8, 2.0);
  const auto& vs = b.vectors();
  const ml::ConceptClassOracle c = vs.oracle();
  const std::vector<std::pair<R, std::size_t>> cases = {{R(3, 10), 8}, {R(9, 25), 7}, {R(2, 5), 6},
                                                        {R(1, 2), 4},  {R(3, 5), 2},  {R(4, 5), 1}};
  ml::SubsetSearchOptions so;
  so.shatter = fallback();
  std::ostringstream dims;
  for (const auto& [g, want] : cases) {
    const ml::Margin m = ml::Margin::exact(g);
    const auto r = ml::max_shattered_subset(c, ml::iota_points(8), m, kFloat, so);
    dims << r.size << " ";
    const std::string tag = "gamma=" + ml::fmt(g);
    o.require(r.size == want && !r.lower_bound_only, tag + " size " + std::to_string(r.size));
    o.require(r.verdict && rechecks(c, m, *r.verdict), tag + " shattered certificate");
    if (want < 8) {
      // Upper side: by symmetry every (want+1)-subset is alike; uniform
      // signed weights on the first one collapse below gamma exactly.
      std::vector<std::vector<R>> x(vs.exact->begin(), vs.exact->begin() + static_cast<long>(want + 1));
      std::vector<R> lam(want + 1, R(1, static_cast<long>(want + 1)));
      o.require(ml::verify_collapse(x, vs.norm, lam, m), tag + " upper collapse");
    }
  }
  o.detail << "dims " << dims.str() << "with shattered witnesses and exact collapses one size up";
}

void a5(Outcome& o) {
  const auto r = experiment("submulti-audit");
  std::size_t rows = 0;
  for (const auto& row : r.table.rows) {
    ++rows;
    o.require(row[7] == "true", "triple " + row[0] + " fails");
  }
  o.require(r.outcome == ml::Outcome::Decided, "outcome " + std::string(ml::to_string(r.outcome)));
  o.require(rows > 0, "no triples");
  o.require(summary_value(r, "l2 all_pass") == "true", "l2 audit");
  o.require(failing_certificates(r) == 0, "certificates");
  o.detail << rows << " triples (l2 " << summary_value(r, "l2 triples") << ", phi-k1 "
           << summary_value(r, "phi-k1 triples") << ", phi-k2 " << summary_value(r, "phi-k2 triples") << ") pass";
}

void a6(Outcome& o) {
  const auto r = experiment("metric-dichotomy");
  o.require(summary_value(r, "random spaces") == "200", "random spaces " + summary_value(r, "random spaces"));
  o.require(summary_value(r, "shattered pairs") == "0", "shattered pairs " + summary_value(r, "shattered pairs"));
  std::size_t marginal = 0;
  for (const auto& row : r.table.rows) {
    if (row[1] == "random") marginal += std::stoull(row[6]);
    if (row[0] == "gamma-space-k6") {
      o.require(row[7] == "MetricValid", "k=6 " + row[7]);
      o.require(row[4] == "64" && row[5] == "64", "k=6 witnesses " + row[5] + "/" + row[4]);
    }
    if (row[0] == "gamma-space-k2") o.require(row[7].rfind("MetricInvalid", 0) == 0, "k=2 " + row[7]);
  }
  o.require(marginal == 0, std::to_string(marginal) + " marginal pair verdicts");
  o.require(failing_certificates(r) == 0, "certificates");
  o.detail << "(a) 200 spaces, 0 pairs shattered at 1/3 + 0.01; (b) k=6 MetricValid, 64/64 witnesses verified;"
              " (c) k=2 at 0.34 MetricInvalid";
}

void a7(Outcome& o) {
  const auto r = experiment("equivalence-fuzz");
  const auto poly = summary_value(r, "polytopes agreeing");
  const auto grid = summary_value(r, "grid agreeing");
  o.require(summary_value(r, "polytopes") == "500" && poly == "500", "polytopes agreeing " + poly);
  o.require(summary_value(r, "grid instances") == "100" && grid == "100", "grid agreeing " + grid);
  o.require(failing_certificates(r) == 0, "certificates");
  o.detail << poly << "/500 polytopes agree three ways; " << grid << "/100 grid instances agree";
}

void a8(Outcome& o) {
  const auto r = experiment("lip-packing");
  const auto rows = summary_value(r, "rows");
  const auto eq = summary_value(r, "equal");
  o.require(rows == "300" && eq == rows, "equal " + eq + "/" + rows);
  o.require(r.outcome == ml::Outcome::Decided, "outcome " + std::string(ml::to_string(r.outcome)));
  o.require(failing_certificates(r) == 0, "certificates");
  o.detail << eq << "/" << rows << " (space, gamma) rows with max shattered = 2 gamma packing";
}

void a9(Outcome& o) {
  ml::SplitMix64 root(99);
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    ml::SplitMix64 rng = root.fork(i);
    const std::size_t n = 2 + static_cast<std::size_t>(rng.below(11));
    const auto space = ml::random_metric_space(rng, n);
    const double diam = space.diameter();
    const double r = rng.uniform(0.02, 0.3) * diam;
    // Every fourth space sits exactly on R = 3r.
    const double bigR = i % 4 == 0 ? 3.0 * r : 3.0 * r + rng.uniform(0.0, 0.3) * diam;
    const ml::ConceptClassOracle c = ml::BallPairClass(space, {r, bigR});
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        ++pairs;
        const auto v = ml::is_shattered(c, {a, b}, 0.5, kFloat);
        const std::string tag = "space " + std::to_string(i) + " pair (" + std::to_string(a) + "," +
                                std::to_string(b) + ")";
        o.require(v.status == ml::ShatterStatus::NotShattered, tag + " " + ml::to_string(v.status));
        if (v.status == ml::ShatterStatus::NotShattered) o.require(rechecks(c, 0.5, v), tag + " certificate");
      }
  }
  const auto b = ml::intro_counterexample_space(4, R(1, 4), R(1, 2), true);
  o.require(!b.metric().validate(), "intro space is not a metric");
  const ml::BallPairClass c(b.metric().space(), {0.25, 0.5});
  int realized = 0;
  for (std::uint64_t k = 0; k < 16; ++k)
    if (ml::realize(c, ml::make_sample(b.focus, ml::sign_pattern(4, k)), 0.5, kFloat).status == ml::Verdict::Realized)
      ++realized;
  o.require(realized == 16, std::to_string(realized) + "/16 intro labelings");
  o.detail << pairs << " pairs over 200 spaces not shattered at R >= 3r; intro k=4 (r=1/4, R=1/2) realizes "
           << realized << "/16 labelings";
}

void a10(Outcome& o) {
  // The four-point grid pins the dims; its log-log fit is nearly straight
  // (e^k against k over k = 2..5), so the growth flag is read off the full
  // 1/k, k = 2..13 grid of the phi-growth experiment.
  const auto spec = ml::PhiSpec::exponential(1000000);
  const ml::PhiClass phi(spec);
  ml::DimensionReport four;
  std::ostringstream dims;
  const std::vector<std::uint64_t> want = {7, 20, 54, 148};
  for (int k = 2; k <= 5; ++k) {
    const auto e = ml::phi_dimension(phi, 1.0 / k, kFloat);
    four.entries.push_back(e);
    dims << e.dim << " ";
    o.require(e.dim == want[static_cast<std::size_t>(k - 2)], "gamma=1/" + std::to_string(k) + " dim " +
                                                                  std::to_string(e.dim));
    const auto v = ml::is_shattered(phi, ml::iota_points(static_cast<std::size_t>(e.dim)), 1.0 / k, kFloat);
    o.require(v.status == ml::ShatterStatus::Shattered, "prefix not shattered at 1/" + std::to_string(k));
  }
  const auto f4 = ml::fit_rate(four);
  const auto r = experiment("phi-growth");
  o.require(summary_value(r, "super_polynomial") == "true", "phi-growth not flagged");
  for (const auto& row : r.table.rows) o.require(row[3] == row[4], row[0] + " dim differs from floor(e^k)");
  o.require(failing_certificates(r) == 0, "certificates");
  o.detail << "dims " << dims.str() << "(4-point fit residual " << ml::fmt(f4.residual) << "); 1/k, k=2..13 fit residual "
           << summary_value(r, "residual") << " > 0.5 flags super-polynomial";
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    double budget_seconds;
    std::function<void(Outcome&)> run;
  };
  const std::vector<Criterion> all = {
      {"A1", 300, a1}, {"A2", 180, a2}, {"A3", 120, a3}, {"A4", 300, a4},  {"A5", 60, a5},
      {"A6", 240, a6}, {"A7", 600, a7}, {"A8", 300, a8}, {"A9", 120, a9}, {"A10", 60, a10},
  };
  int failed = 0;
  for (const auto& c : all) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(s <= c.budget_seconds, "over the time budget");
    failed += !o.pass;
    std::printf("%-4s %s  %7.1fs / %4.0fs  %s\n", c.id, o.pass ? "PASS" : "FAIL", s, c.budget_seconds,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed ? 1 : 0;
}
