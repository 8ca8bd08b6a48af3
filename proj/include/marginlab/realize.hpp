#pragma once

#include "marginlab/classes.hpp"
#include "marginlab/min_norm.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace marginlab {

/// A margin gamma > 0. In exact mode it is carried as gamma^2, so values such
/// as 1/sqrt(8) compare exactly.
class Margin {
 public:
  Margin(double g) : value_(g), sq_(to_rational(g) * to_rational(g)) {  // NOLINT: implicit by design
    if (!(g > 0.0) || !std::isfinite(g)) throw InputError("margin gamma must be positive and finite");
  }
  static Margin exact(const Rational& g) {
    if (g <= 0) throw InputError("margin gamma must be positive");
    return Margin(to_double(g), g * g);
  }
  /// gamma = sqrt(q).
  static Margin sqrt_of(const Rational& q) {
    if (q <= 0) throw InputError("margin gamma must be positive");
    return Margin(std::sqrt(to_double(q)), q);
  }

  double value() const noexcept { return value_; }
  const Rational& squared() const noexcept { return sq_; }

  /// gamma <= v, exactly.
  bool at_most(const Rational& v) const { return v >= 0 && v * v >= sq_; }
  /// gamma <= sqrt(vsq), exactly.
  bool at_most_sqrt(const Rational& vsq) const { return vsq >= sq_; }
  /// v <= gamma, exactly.
  bool at_least(const Rational& v) const { return v <= 0 || v * v <= sq_; }
  /// sqrt(vsq) <= gamma, exactly.
  bool at_least_sqrt(const Rational& vsq) const { return vsq <= sq_; }

 private:
  Margin(double g, Rational sq) : value_(g), sq_(std::move(sq)) {}
  double value_;
  Rational sq_;
};

enum class Verdict { Realized, NotRealized, Marginal };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Realized: return "Realized";
    case Verdict::NotRealized: return "NotRealized";
    case Verdict::Marginal: return "Marginal";
  }
  return "?";
}

/// What realizes a labeling.
///   Functional:   w in the dual ball (DualBall); `exact` may hold an unnormalised exact copy.
///   Coefficients: z in the class's polyhedral form (DistanceCombination*, Polytope).
///   Center:       ball-pair center index.
///   Values:       function values, over the whole space (Lipschitz) or the sample (Phi).
struct Witness {
  enum class Kind { Functional, Coefficients, Center, Values };
  Kind kind = Kind::Functional;
  Vector data;
  std::vector<Rational> exact;
  std::size_t center = 0;
};

inline const char* to_string(Witness::Kind k) {
  switch (k) {
    case Witness::Kind::Functional: return "functional";
    case Witness::Kind::Coefficients: return "coefficients";
    case Witness::Kind::Center: return "center";
    case Witness::Kind::Values: return "values";
  }
  return "?";
}

/// Weights mu with support value below the margin.
struct Collapse {
  SimplexWeights mu;
  double value = 0.0;
  std::vector<Rational> exact_mu;
  std::optional<Rational> exact_value_squared;
  std::optional<Rational> exact_value;  // signed; polyhedral and Lipschitz classes
};

struct RealizeVerdict {
  Verdict status = Verdict::Marginal;
  double value = 0.0;        // best estimate of m*
  double lower = 0.0;        // certified lower bound on m*
  double band = 0.0;         // decision band used (0 for exact or closed-form decisions)
  bool exact = false;        // decided in rational arithmetic
  std::optional<Witness> witness;
  std::optional<Collapse> collapse;
};

struct RealizeOptions {
  /// On NotRealized, minimise to convergence instead of stopping once the
  /// value is below the band, so the collapse value is as small as possible.
  bool full_collapse = false;
  /// Re-decide float Marginal verdicts exactly (p in {1, 2, inf} and
  /// polyhedral classes) on the exact binary values of the inputs.
  bool exact_fallback = false;
};

namespace detail {

inline std::vector<int> labels_of(const LabeledSample& s) { return s.labels; }

inline std::vector<Vector> signed_points(const DualBallClass& c, const LabeledSample& s) {
  std::vector<Vector> u;
  u.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    Vector v = c.points[s.points[i]];
    if (s.labels[i] < 0)
      for (double& x : v) x = -x;
    u.push_back(std::move(v));
  }
  return u;
}

inline std::vector<std::vector<Rational>> signed_points_exact(const std::vector<std::vector<Rational>>& pts,
                                                              const LabeledSample& s) {
  std::vector<std::vector<Rational>> u;
  u.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto v = pts[s.points[i]];
    if (s.labels[i] < 0)
      for (auto& x : v) x = -x;
    u.push_back(std::move(v));
  }
  return u;
}

inline SimplexWeights simplex_from_exact(const std::vector<Rational>& mu) {
  Vector v;
  v.reserve(mu.size());
  for (const auto& x : mu) v.push_back(to_double(x));
  return SimplexWeights::normalized(std::move(v));
}

inline RealizeVerdict realize_dual_ball_exact(const DualBallClass& c, const LabeledSample& s, const Margin& g,
                                              const std::vector<std::size_t>& hint) {
  const NormSpec& n = c.norm;
  if (!(n.is_one() || n.is_two() || n.is_infinite()))
    throw InputError("exact arithmetic supports only p in {1, 2, inf}");
  const auto pts = c.rational_points();
  const auto u = signed_points_exact(pts, s);
  auto ex = min_norm_point_exact(u, n, hint);
  RealizeVerdict v;
  v.exact = true;
  v.value = std::sqrt(to_double(ex.value_squared));
  v.lower = v.value;
  const bool ok = g.at_most_sqrt(ex.value_squared);
  if (ok) {
    v.status = Verdict::Realized;
    Witness w;
    w.kind = Witness::Kind::Functional;
    w.exact = ex.witness;
    Vector wd;
    for (const auto& x : ex.witness) wd.push_back(to_double(x));
    if (n.is_two()) {
      const double nn = norm(wd, n);
      for (double& x : wd) x /= nn;
    }
    w.data = std::move(wd);
    v.witness = std::move(w);
  } else {
    v.status = Verdict::NotRealized;
    Collapse col;
    col.mu = simplex_from_exact(ex.mu);
    col.exact_mu = ex.mu;
    col.value = v.value;
    col.exact_value_squared = ex.value_squared;
    v.collapse = std::move(col);
  }
  return v;
}

inline RealizeVerdict realize_dual_ball(const DualBallClass& c, const LabeledSample& s, const Margin& g,
                                        const SolverConfig& cfg, const RealizeOptions& opt) {
  const NormSpec& n = c.norm;
  if (cfg.arithmetic == Arithmetic::Rational) {
    std::vector<std::size_t> hint;
    if (n.is_two()) {
      // A float solve supplies the support; the exact step verifies it.
      auto r = min_norm_point(signed_points(c, s), n, cfg);
      for (std::size_t i = 0; i < r.mu.size(); ++i)
        if (r.mu[i] > 1e-12) hint.push_back(i);
    }
    return realize_dual_ball_exact(c, s, g, hint);
  }
  const auto u = signed_points(c, s);
  const double gamma = g.value();
  const double band = cfg.band();
  EarlyStop stop;
  stop.stop_above = gamma + band;
  stop.stop_below = gamma - band;
  auto r = min_norm_point(u, n, cfg, stop);
  RealizeVerdict v;
  v.band = band;
  v.value = r.value;
  v.lower = r.lower_bound;
  if (r.witness && r.lower_bound > gamma + band) {
    v.status = Verdict::Realized;
    v.witness = Witness{Witness::Kind::Functional, *r.witness, {}, 0};
    return v;
  }
  if (r.value < gamma - band) {
    if (opt.full_collapse && r.stopped_early) {
      r = min_norm_point(u, n, cfg);
      v.value = r.value;
      v.lower = r.lower_bound;
    }
    v.status = Verdict::NotRealized;
    v.collapse = Collapse{r.mu, r.value, {}, std::nullopt, std::nullopt};
    return v;
  }
  v.status = Verdict::Marginal;
  if (opt.exact_fallback && (n.is_one() || n.is_two() || n.is_infinite())) {
    std::vector<std::size_t> hint;
    for (std::size_t i = 0; i < r.mu.size(); ++i)
      if (r.mu[i] > 1e-12) hint.push_back(i);
    return realize_dual_ball_exact(c, s, g, hint);
  }
  return v;
}

// max s  s.t.  s - y_i f_z(x_i) <= 0, z in the polyhedral form.
// The duals of the margin rows form the collapse weights.
template <class T>
LinearProgram<T> max_margin_program(const PolyhedralForm<T>& f, const std::vector<int>& y) {
  const std::size_t nz = f.vars();
  const std::size_t n = f.values.size();
  LinearProgram<T> lp;
  lp.objective.assign(nz + 1, T(0));
  lp.objective[nz] = 1;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<T> row(nz + 1, T(0));
    for (std::size_t k = 0; k < nz; ++k) row[k] = y[i] > 0 ? T(-f.values[i][k]) : f.values[i][k];
    row[nz] = 1;
    lp.a_ub.push_back(std::move(row));
    lp.b_ub.push_back(T(0));
  }
  for (std::size_t r = 0; r < f.a_ub.size(); ++r) {
    auto row = f.a_ub[r];
    row.push_back(T(0));
    lp.a_ub.push_back(std::move(row));
    lp.b_ub.push_back(f.b_ub[r]);
  }
  for (std::size_t r = 0; r < f.a_eq.size(); ++r) {
    auto row = f.a_eq[r];
    row.push_back(T(0));
    lp.a_eq.push_back(std::move(row));
    lp.b_eq.push_back(f.b_eq[r]);
  }
  lp.bounds.assign(nz + 1, Bound<T>::nonneg());
  lp.bounds[nz] = Bound<T>::free();
  return lp;
}

template <class T>
RealizeVerdict realize_polyhedral(const PolyhedralForm<T>& f, const std::vector<int>& y, const Margin& g,
                                  const SolverConfig& cfg) {
  auto lp = max_margin_program(f, y);
  LpOptions<T> lo;
  lo.max_iter = cfg.max_iter;
  lo.tol = cfg.tol;
  auto r = lp_solve(lp, lo);
  if (r.status != LpStatus::Optimal)
    throw SolverFailure(std::string("max-margin LP: ") + to_string(r.status), {}, 0.0, 0.0);
  const std::size_t n = y.size();
  const std::size_t nz = f.vars();
  RealizeVerdict v;
  v.value = to_double(r.value);
  v.lower = v.value;
  bool realized;
  bool marginal = false;
  if constexpr (std::is_same_v<T, Rational>) {
    v.exact = true;
    realized = g.at_most(r.value);
  } else {
    v.band = cfg.band();
    realized = r.value >= g.value() + v.band;
    marginal = !realized && r.value > g.value() - v.band;
  }
  if (marginal) {
    v.status = Verdict::Marginal;
    return v;
  }
  if (realized) {
    v.status = Verdict::Realized;
    Witness w;
    w.kind = Witness::Kind::Coefficients;
    for (std::size_t k = 0; k < nz; ++k) {
      w.data.push_back(to_double(r.x[k]));
      if constexpr (std::is_same_v<T, Rational>) w.exact.push_back(r.x[k]);
    }
    v.witness = std::move(w);
  } else {
    v.status = Verdict::NotRealized;
    Collapse col;
    Vector mu(n);
    for (std::size_t i = 0; i < n; ++i) mu[i] = to_double(r.dual_ub[i]);
    col.mu = SimplexWeights::normalized(std::move(mu));
    col.value = v.value;
    if constexpr (std::is_same_v<T, Rational>) {
      col.exact_mu.assign(r.dual_ub.begin(), r.dual_ub.begin() + static_cast<std::ptrdiff_t>(n));
      col.exact_value_squared = r.value * r.value;
      col.exact_value = r.value;
    }
    v.collapse = std::move(col);
  }
  return v;
}

template <class T>
RealizeVerdict realize_lipschitz(const BasicMetricSpace<T>& space, const LabeledSample& s, const Margin& g) {
  RealizeVerdict v;
  v.exact = std::is_same_v<T, Rational>;
  auto [pair, dist] = closest_cross_pair(space, s);
  const double gamma = g.value();
  if (!pair) {
    // One-sided sample: a constant function of the right sign.
    const double c = s.labels.front() > 0 ? gamma : -gamma;
    v.status = Verdict::Realized;
    v.value = v.lower = std::numeric_limits<double>::infinity();
    v.witness = Witness{Witness::Kind::Values, Vector(space.size(), c), {}, 0};
    return v;
  }
  v.value = v.lower = to_double(dist) / 2.0;
  bool ok;
  if constexpr (std::is_same_v<T, Rational>) ok = g.at_most(dist / 2);
  else ok = dist >= 2.0 * gamma;
  if (ok) {
    v.status = Verdict::Realized;
    Witness w;
    w.kind = Witness::Kind::Values;
    for (std::size_t x = 0; x < space.size(); ++x) {
      const T fx = lip_extension_eval(space, s, x);
      w.data.push_back(to_double(fx));
      if constexpr (std::is_same_v<T, Rational>) w.exact.push_back(fx);
    }
    v.witness = std::move(w);
  } else {
    v.status = Verdict::NotRealized;
    // Half weight on each end of the closest cross pair: the support is d/2.
    Vector mu(s.size(), 0.0);
    std::size_t ip = s.size(), in = s.size();
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (ip == s.size() && s.labels[i] == 1 && s.points[i] == pair->first) ip = i;
      if (in == s.size() && s.labels[i] == -1 && s.points[i] == pair->second) in = i;
    }
    mu[ip] = 0.5;
    mu[in] = 0.5;
    Collapse col{SimplexWeights(std::move(mu)), v.value, {}, std::nullopt, std::nullopt};
    if constexpr (std::is_same_v<T, Rational>) {
      col.exact_value_squared = (dist / 2) * (dist / 2);
      col.exact_value = dist / 2;
    }
    v.collapse = std::move(col);
  }
  return v;
}

}  // namespace detail

/// Decides whether one labeled sample is gamma-realized by the class.
///
/// m* = min over mu in the simplex of the support value; Realized iff
/// m* >= gamma, NotRealized iff m* < gamma. Float decisions within the band
/// |m* - gamma| <= 3 tol are Marginal; rational mode and the closed forms
/// (Lipschitz, BallPair, Phi) never are.
inline RealizeVerdict realize(const ConceptClassOracle& oracle, const LabeledSample& sample, const Margin& gamma,
                              const SolverConfig& cfg, const RealizeOptions& opt = {}) {
  cfg.validate();
  sample.validate(ground_size(oracle));
  const bool exact = cfg.arithmetic == Arithmetic::Rational;

  if (auto* c = std::get_if<DualBallClass>(&oracle)) return detail::realize_dual_ball(*c, sample, gamma, cfg, opt);

  if (auto* c = std::get_if<DistanceCombinationClass>(&oracle)) {
    if (exact) {
      auto f = polyhedral_form<Rational>(c->rational_space(), c->centers, c->variant, sample.points);
      return detail::realize_polyhedral(f, sample.labels, gamma, cfg);
    }
    auto f = polyhedral_form<double>(c->space, c->centers, c->variant, sample.points);
    auto v = detail::realize_polyhedral(f, sample.labels, gamma, cfg);
    if (v.status == Verdict::Marginal && opt.exact_fallback) {
      auto fe = polyhedral_form<Rational>(c->rational_space(), c->centers, c->variant, sample.points);
      return detail::realize_polyhedral(fe, sample.labels, gamma, cfg);
    }
    return v;
  }

  if (auto* c = std::get_if<PolytopeClass>(&oracle)) {
    if (exact) return detail::realize_polyhedral(polyhedral_form<Rational>(*c, sample.points), sample.labels, gamma, cfg);
    auto v = detail::realize_polyhedral(polyhedral_form<double>(*c, sample.points), sample.labels, gamma, cfg);
    if (v.status == Verdict::Marginal && opt.exact_fallback)
      return detail::realize_polyhedral(polyhedral_form<Rational>(*c, sample.points), sample.labels, gamma, cfg);
    return v;
  }

  if (auto* c = std::get_if<LipschitzClass>(&oracle)) {
    if (exact) return detail::realize_lipschitz(c->exact ? *c->exact : c->space.to_rational(), sample, gamma);
    return detail::realize_lipschitz(c->space, sample, gamma);
  }

  if (auto* c = std::get_if<BallPairClass>(&oracle)) {
    RealizeVerdict v;
    if (auto center = ball_pair_realizable(c->space, sample, c->params)) {
      v.status = Verdict::Realized;
      v.witness = Witness{Witness::Kind::Center, {}, {}, *center};
    } else {
      v.status = Verdict::NotRealized;
    }
    return v;
  }

  const auto& phi = std::get<PhiClass>(oracle);
  if (!(gamma.value() <= 1.0)) throw InputError("phi class: gamma must lie in (0, 1]");
  auto pv = phi_realizable(phi.spec, sample, gamma.value());
  RealizeVerdict v;
  if (pv.realizable) {
    v.status = Verdict::Realized;
    Vector vals(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) vals[i] = sample.labels[i] * gamma.value();
    v.witness = Witness{Witness::Kind::Values, std::move(vals), {}, 0};
    v.value = v.lower = gamma.value();
  } else {
    v.status = Verdict::NotRealized;
    std::size_t at = 0;
    for (std::size_t i = 0; i < sample.size(); ++i)
      if (sample.points[i] + 1 == pv.violating) at = i;
    v.value = v.lower = phi.spec.t_max(pv.violating);
    v.collapse = Collapse{SimplexWeights::vertex(sample.size(), at), v.value, {}, std::nullopt, std::nullopt};
  }
  return v;
}

// ---------------------------------------------------------------------------
// Re-checking certificates

/// Re-evaluates a Realized witness: margin >= gamma - tol on every sample
/// point, plus membership of the witness in the class (within tol).
inline bool verify_witness(const ConceptClassOracle& oracle, const LabeledSample& sample, const Witness& w,
                           double gamma, double tol = 1e-7) {
  sample.validate(ground_size(oracle));
  auto margins_ok = [&](const std::vector<double>& f) {
    for (std::size_t i = 0; i < sample.size(); ++i)
      if (sample.labels[i] * f[i] < gamma - tol) return false;
    return true;
  };
  if (auto* c = std::get_if<DualBallClass>(&oracle)) {
    if (w.kind != Witness::Kind::Functional || w.data.size() != c->points.front().size()) return false;
    if (dual_norm(w.data, c->norm) > 1.0 + tol) return false;
    std::vector<double> f;
    for (auto p : sample.points) f.push_back(dot(w.data, c->points[p]));
    return margins_ok(f);
  }
  if (auto* c = std::get_if<DistanceCombinationClass>(&oracle)) {
    if (w.kind != Witness::Kind::Coefficients) return false;
    auto form = polyhedral_form<double>(c->space, c->centers, c->variant, sample.points);
    if (w.data.size() != form.vars()) return false;
    for (double z : w.data)
      if (z < -tol) return false;
    for (std::size_t r = 0; r < form.a_ub.size(); ++r)
      if (dot(form.a_ub[r], w.data) > form.b_ub[r] + tol) return false;
    return margins_ok(form.evaluate(w.data));
  }
  if (auto* c = std::get_if<PolytopeClass>(&oracle)) {
    if (w.kind != Witness::Kind::Coefficients || w.data.size() != c->vertices.size()) return false;
    double s = 0.0;
    for (double z : w.data) {
      if (z < -tol) return false;
      s += z;
    }
    if (std::abs(s - 1.0) > tol) return false;
    return margins_ok(polyhedral_form<double>(*c, sample.points).evaluate(w.data));
  }
  if (auto* c = std::get_if<LipschitzClass>(&oracle)) {
    if (w.kind != Witness::Kind::Values || w.data.size() != c->space.size()) return false;
    for (std::size_t i = 0; i < c->space.size(); ++i)
      for (std::size_t j = i + 1; j < c->space.size(); ++j)
        if (std::abs(w.data[i] - w.data[j]) > c->space(i, j) + tol) return false;
    std::vector<double> f;
    for (auto p : sample.points) f.push_back(w.data[p]);
    return margins_ok(f);
  }
  if (auto* c = std::get_if<BallPairClass>(&oracle)) {
    if (w.kind != Witness::Kind::Center || w.center >= c->space.size()) return false;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      const double d = c->space(w.center, sample.points[i]);
      if (sample.labels[i] == 1 ? d > c->params.r : d < c->params.R) return false;
    }
    return true;
  }
  const auto& phi = std::get<PhiClass>(oracle);
  if (w.kind != Witness::Kind::Values || w.data.size() != sample.size()) return false;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double a = std::abs(w.data[i]);
    if (a > phi.spec.t_max(sample.points[i] + 1) + 1e-15) return false;
  }
  return margins_ok(w.data);
}

/// Support value of the class at (mu, y), by direct evaluation.
inline double support_value(const ConceptClassOracle& oracle, const LabeledSample& sample, const SimplexWeights& mu) {
  sample.validate(ground_size(oracle));
  if (auto* c = std::get_if<DualBallClass>(&oracle)) {
    std::vector<Vector> pts;
    for (auto p : sample.points) pts.push_back(c->points[p]);
    return support_dual_ball(pts, c->norm, mu, sample.labels).value;
  }
  if (auto* c = std::get_if<DistanceCombinationClass>(&oracle))
    return support_distance_combination(c->space, c->centers, sample, mu, c->variant).value;
  if (auto* c = std::get_if<PolytopeClass>(&oracle)) return support_polytope(*c, sample, mu).value;
  if (auto* c = std::get_if<PhiClass>(&oracle)) return support_phi(c->spec, sample, mu);
  if (auto* c = std::get_if<LipschitzClass>(&oracle)) {
    // Finite only when the signed weights sum to zero; then it is the optimal
    // transport cost between the positive and negative parts. Only the
    // two-point collapse used by realize() is supported here.
    std::vector<std::size_t> nz;
    for (std::size_t i = 0; i < mu.size(); ++i)
      if (mu[i] > 0.0) nz.push_back(i);
    if (nz.size() == 2 && sample.labels[nz[0]] != sample.labels[nz[1]] && std::abs(mu[nz[0]] - mu[nz[1]]) < 1e-12)
      return 0.5 * c->space(sample.points[nz[0]], sample.points[nz[1]]);
    throw InputError("support_value: Lipschitz support is evaluated only for balanced two-point weights");
  }
  throw InputError("support_value: the ball-pair class has no support function");
}

/// Re-checks a NotRealized collapse: support(mu, y) <= gamma - tol.
inline bool verify_collapse_support(const ConceptClassOracle& oracle, const LabeledSample& sample,
                                    const Collapse& c, double gamma, double tol = 1e-7) {
  return support_value(oracle, sample, c.mu) <= gamma - tol;
}

}  // namespace marginlab
