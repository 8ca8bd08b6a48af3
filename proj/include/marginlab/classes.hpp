#pragma once

#include "marginlab/common.hpp"
#include "marginlab/lp.hpp"
#include "marginlab/min_norm.hpp"
#include "marginlab/spaces.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace marginlab {

// ---------------------------------------------------------------------------
// Samples

/// Points (indices into the class's ground set) with +-1 labels.
struct LabeledSample {
  std::vector<std::size_t> points;
  std::vector<int> labels;

  std::size_t size() const noexcept { return points.size(); }

  void validate(std::size_t ground_size, bool allow_empty = false) const {
    if (points.size() != labels.size()) throw InputError("sample: point and label counts differ");
    if (points.empty() && !allow_empty) throw InputError("sample: empty");
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i] >= ground_size)
        throw InputError("sample: point index " + std::to_string(points[i]) + " out of range");
      if (labels[i] != 1 && labels[i] != -1) throw InputError("sample: labels must be +1 or -1");
    }
  }
};

/// Sign pattern number `k` over n points: bit (n-1-i) set means y_i = -1, so
/// patterns come in lexicographic order with + before -.
inline std::vector<int> sign_pattern(std::size_t n, std::uint64_t k) {
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = ((k >> (n - 1 - i)) & 1U) ? -1 : 1;
  return y;
}

inline LabeledSample make_sample(std::vector<std::size_t> points, std::vector<int> labels) {
  return LabeledSample{std::move(points), std::move(labels)};
}

inline std::vector<std::size_t> iota_points(std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  return p;
}

// ---------------------------------------------------------------------------
// Class descriptors

/// Unit dual ball of l_p^d acting on a fixed set of points in the unit ball.
struct DualBallClass {
  std::vector<Vector> points;
  NormSpec norm;
  std::vector<std::vector<Rational>> exact;  // rational copy for exact mode; may be empty

  DualBallClass(std::vector<Vector> pts, NormSpec n) : points(std::move(pts)), norm(n) {
    check();
  }
  DualBallClass(std::vector<std::vector<Rational>> pts, NormSpec n) : norm(n), exact(std::move(pts)) {
    for (const auto& x : exact) {
      Vector v;
      for (const auto& c : x) v.push_back(to_double(c));
      points.push_back(std::move(v));
    }
    check();
  }

  std::size_t size() const noexcept { return points.size(); }
  static constexpr bool symmetric() { return true; }

  std::vector<std::vector<Rational>> rational_points() const {
    if (!exact.empty()) return exact;
    return to_rational(std::span<const Vector>(points));
  }

 private:
  void check() const {
    if (points.empty()) throw InputError("dual-ball class: no points");
    const std::size_t d = points.front().size();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i].size() != d || d == 0) throw InputError("dual-ball class: inconsistent dimensions");
      require_finite(points[i], "point");
      if (marginlab::norm(points[i], norm) > 1.0 + 1e-9)
        throw InputError("dual-ball class: point " + std::to_string(i) + " lies outside the unit ball");
    }
  }
};

enum class DistanceVariant { Full, Pos, Neg };

inline const char* to_string(DistanceVariant v) {
  switch (v) {
    case DistanceVariant::Full: return "full";
    case DistanceVariant::Pos: return "pos";
    case DistanceVariant::Neg: return "neg";
  }
  return "?";
}

/// Combinations sum_c a_c d(c, .) with sum |a_c| <= 1 over a finite center set.
/// Pos adds sum of positive parts >= 1/2, Neg adds sum of positive parts <= 1/2.
struct DistanceCombinationClass {
  MetricSpace space;
  std::optional<RationalMetricSpace> exact;
  std::vector<std::size_t> centers;
  DistanceVariant variant = DistanceVariant::Full;

  DistanceCombinationClass(MetricSpace s, std::vector<std::size_t> c, DistanceVariant v)
      : space(std::move(s)), centers(std::move(c)), variant(v) {
    check();
  }
  DistanceCombinationClass(RationalMetricSpace s, std::vector<std::size_t> c, DistanceVariant v)
      : space(s.to_double()), exact(std::move(s)), centers(std::move(c)), variant(v) {
    check();
  }
  /// Every point of the space is a center.
  static DistanceCombinationClass all_centers(MetricSpace s, DistanceVariant v) {
    auto c = iota_points(s.size());
    return DistanceCombinationClass(std::move(s), std::move(c), v);
  }

  std::size_t size() const noexcept { return space.size(); }
  bool symmetric() const noexcept { return variant == DistanceVariant::Full; }
  RationalMetricSpace rational_space() const { return exact ? *exact : space.to_rational(); }

 private:
  void check() const {
    if (centers.empty()) throw InputError("distance-combination class: empty center set");
    for (auto c : centers)
      if (c >= space.size()) throw InputError("distance-combination class: center out of range");
  }
};

/// All 1-Lipschitz real functions on the space.
struct LipschitzClass {
  MetricSpace space;
  std::optional<RationalMetricSpace> exact;

  explicit LipschitzClass(MetricSpace s) : space(std::move(s)) {}
  explicit LipschitzClass(RationalMetricSpace s) : space(s.to_double()), exact(std::move(s)) {}
  std::size_t size() const noexcept { return space.size(); }
  static constexpr bool symmetric() { return true; }
};

struct BallPairParams {
  double r = 0.0;
  double R = 0.0;
  void validate() const {
    if (!(r >= 0.0) || !(R > r) || !std::isfinite(R)) throw InputError("ball-pair params: need 0 <= r < R");
  }
};

/// Partial concepts indexed by centers c: +1 within r of c, -1 at distance at
/// least R, undefined in between. Centers range over the space's own points.
struct BallPairClass {
  MetricSpace space;
  BallPairParams params;
  BallPairClass(MetricSpace s, BallPairParams p) : space(std::move(s)), params(p) { params.validate(); }
  std::size_t size() const noexcept { return space.size(); }
  static constexpr bool symmetric() { return false; }
};

/// Nonincreasing phi: (0, 1) -> N from a named preset, truncated to the
/// domain {1..N}. Ground index i stands for domain element i + 1.
struct PhiSpec {
  enum class Preset { InversePower, Exponential };
  Preset preset = Preset::Exponential;
  int k = 1;
  std::uint64_t N = 100;

  static PhiSpec inverse_power(int k, std::uint64_t n) {
    if (k < 1) throw InputError("phi preset: exponent k must be at least 1");
    return PhiSpec{Preset::InversePower, k, check_n(n)};
  }
  static PhiSpec exponential(std::uint64_t n) { return PhiSpec{Preset::Exponential, 1, check_n(n)}; }

  std::string name() const {
    return preset == Preset::Exponential ? "floor(exp(1/g))" : "floor(1/g^" + std::to_string(k) + ")";
  }

  /// phi(gamma), saturating at the largest uint64.
  std::uint64_t operator()(double gamma) const {
    if (!(gamma > 0.0) || !(gamma <= 1.0)) throw InputError("phi: gamma must lie in (0, 1]");
    const double x = preset == Preset::Exponential ? std::exp(1.0 / gamma) : std::pow(1.0 / gamma, k);
    return robust_floor(x);
  }

  /// sup{t in (0, 1] : phi(t) >= n}.
  double t_max(std::uint64_t n) const {
    if (n <= 1) return 1.0;
    const double t = preset == Preset::Exponential ? 1.0 / std::log(static_cast<double>(n))
                                                   : std::pow(static_cast<double>(n), -1.0 / k);
    return std::min(1.0, t);
  }

  /// Predicted dimension min(phi(gamma), N).
  std::uint64_t dimension(double gamma) const { return std::min((*this)(gamma), N); }

  // floor, except that values within 1e-9 (relative) of an integer snap to it,
  // so 1/(1/3) and e^k computed in floating point land on the intended side.
  static std::uint64_t robust_floor(double x) {
    if (!(x < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
    const double r = std::round(x);
    if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::uint64_t>(r);
    return static_cast<std::uint64_t>(std::floor(x));
  }

 private:
  static std::uint64_t check_n(std::uint64_t n) {
    if (n < 1 || n > 1000000) throw InputError("phi truncation: N must lie in [1, 10^6]");
    return n;
  }
};

struct PhiClass {
  PhiSpec spec;
  explicit PhiClass(PhiSpec s) : spec(s) {}
  std::size_t size() const noexcept { return static_cast<std::size_t>(spec.N); }
  static constexpr bool symmetric() { return true; }
};

/// Finite function polytope: the convex hull of `vertices`, each a vector of
/// values on the ground points. Values are rational so exact mode is faithful.
struct PolytopeClass {
  std::vector<std::vector<Rational>> vertices;
  std::size_t ground = 0;

  explicit PolytopeClass(std::vector<std::vector<Rational>> v) : vertices(std::move(v)) {
    if (vertices.empty()) throw InputError("polytope class: no vertices");
    ground = vertices.front().size();
    if (ground == 0) throw InputError("polytope class: no ground points");
    for (const auto& x : vertices)
      if (x.size() != ground) throw InputError("polytope class: vertices differ in length");
  }
  std::size_t size() const noexcept { return ground; }
  static constexpr bool symmetric() { return false; }
};

using ConceptClassOracle =
    std::variant<DualBallClass, DistanceCombinationClass, LipschitzClass, BallPairClass, PhiClass, PolytopeClass>;

inline std::string kind_name(const ConceptClassOracle& o) {
  struct V {
    std::string operator()(const DualBallClass&) const { return "DualBall"; }
    std::string operator()(const DistanceCombinationClass& c) const {
      switch (c.variant) {
        case DistanceVariant::Full: return "DistanceCombination";
        case DistanceVariant::Pos: return "DistanceCombinationPos";
        case DistanceVariant::Neg: return "DistanceCombinationNeg";
      }
      return "DistanceCombination";
    }
    std::string operator()(const LipschitzClass&) const { return "Lipschitz"; }
    std::string operator()(const BallPairClass&) const { return "BallPair"; }
    std::string operator()(const PhiClass&) const { return "Phi"; }
    std::string operator()(const PolytopeClass&) const { return "Polytope"; }
  };
  return std::visit(V{}, o);
}

inline std::size_t ground_size(const ConceptClassOracle& o) {
  return std::visit([](const auto& c) { return c.size(); }, o);
}

/// Whether realizability is invariant under the global flip y -> -y.
inline bool is_symmetric(const ConceptClassOracle& o) {
  return std::visit([](const auto& c) { return c.symmetric(); }, o);
}

// ---------------------------------------------------------------------------
// Support functions

struct SupportValue {
  double value = 0.0;
  std::optional<Vector> maximizer;  // functional (dual ball) or coefficient vector
};

namespace detail {
inline void check_mu_sample(const SimplexWeights& mu, std::span<const int> y) {
  if (mu.size() != y.size()) throw InputError("support: weights and labels differ in length");
  for (int s : y)
    if (s != 1 && s != -1) throw InputError("support: labels must be +1 or -1");
}
}  // namespace detail

/// sup over the dual ball of sum_i mu_i y_i <w, x_i> = ||sum_i mu_i y_i x_i||.
inline SupportValue support_dual_ball(std::span<const Vector> points, const NormSpec& n, const SimplexWeights& mu,
                                      std::span<const int> y) {
  detail::check_mu_sample(mu, y);
  if (points.size() != y.size()) throw InputError("support: points and labels differ in length");
  for (std::size_t i = 0; i < points.size(); ++i)
    if (norm(points[i], n) > 1.0 + 1e-9)
      throw InputError("support: point " + std::to_string(i) + " lies outside the unit ball");
  Vector lambda(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) lambda[i] = y[i] * mu[i];
  const Vector v = combine(points, lambda);
  SupportValue out;
  out.value = norm(v, n);
  if (out.value > 0.0) out.maximizer = duality_map(v, n);
  return out;
}

// ---------------------------------------------------------------------------
// Polyhedral presentation: F restricted to a sample is { M z : z >= 0,
// A_ub z <= b_ub, A_eq z = b_eq }.

template <class T>
struct PolyhedralForm {
  std::vector<std::vector<T>> values;  // M: one row per sample point, one column per z variable
  std::vector<std::vector<T>> a_ub;
  std::vector<T> b_ub;
  std::vector<std::vector<T>> a_eq;
  std::vector<T> b_eq;

  std::size_t vars() const { return values.empty() ? 0 : values.front().size(); }

  /// Function values M z on the sample.
  std::vector<T> evaluate(const std::vector<T>& z) const {
    std::vector<T> out(values.size(), T(0));
    for (std::size_t i = 0; i < values.size(); ++i)
      for (std::size_t k = 0; k < z.size(); ++k)
        if (z[k] != 0) out[i] += values[i][k] * z[k];
    return out;
  }
};

namespace detail {
template <class T>
T scalar_of(const Rational& r) {
  if constexpr (std::is_same_v<T, Rational>) return r;
  else return to_double(r);
}
template <class T, class S>
T convert(const S& v) {
  if constexpr (std::is_same_v<T, S>) return v;
  else if constexpr (std::is_same_v<T, double>) return to_double(v);
  else return to_rational(v);
}
}  // namespace detail

/// Distance-combination class on a sample; z = (a+, a-) over centers.
template <class T>
PolyhedralForm<T> polyhedral_form(const BasicMetricSpace<T>& space, const std::vector<std::size_t>& centers,
                                  DistanceVariant variant, const std::vector<std::size_t>& sample) {
  const std::size_t c = centers.size();
  PolyhedralForm<T> f;
  for (auto x : sample) {
    std::vector<T> row(2 * c);
    for (std::size_t k = 0; k < c; ++k) {
      row[k] = space(centers[k], x);
      row[c + k] = -space(centers[k], x);
    }
    f.values.push_back(std::move(row));
  }
  f.a_ub.push_back(std::vector<T>(2 * c, T(1)));
  f.b_ub.push_back(T(1));
  if (variant != DistanceVariant::Full) {
    std::vector<T> pos(2 * c, T(0));
    for (std::size_t k = 0; k < c; ++k) pos[k] = variant == DistanceVariant::Pos ? T(-1) : T(1);
    f.a_ub.push_back(std::move(pos));
    f.b_ub.push_back(variant == DistanceVariant::Pos ? T(-1) / T(2) : T(1) / T(2));
  }
  return f;
}

/// Polytope class on a sample; z = convex weights over vertices.
template <class T>
PolyhedralForm<T> polyhedral_form(const PolytopeClass& p, const std::vector<std::size_t>& sample) {
  PolyhedralForm<T> f;
  for (auto x : sample) {
    std::vector<T> row;
    for (const auto& v : p.vertices) row.push_back(detail::scalar_of<T>(v[x]));
    f.values.push_back(std::move(row));
  }
  f.a_eq.push_back(std::vector<T>(p.vertices.size(), T(1)));
  f.b_eq.push_back(T(1));
  return f;
}

template <class T>
struct PolyhedralSupport {
  T value = 0;
  std::vector<T> z;
};

/// max over F of sum_i c_i f(x_i).
template <class T>
PolyhedralSupport<T> support_polyhedral(const PolyhedralForm<T>& f, const std::vector<T>& c) {
  if (c.size() != f.values.size()) throw InputError("support: weight count does not match sample");
  LinearProgram<T> lp;
  lp.objective.assign(f.vars(), T(0));
  for (std::size_t k = 0; k < f.vars(); ++k)
    for (std::size_t i = 0; i < c.size(); ++i) lp.objective[k] += c[i] * f.values[i][k];
  lp.a_ub = f.a_ub;
  lp.b_ub = f.b_ub;
  lp.a_eq = f.a_eq;
  lp.b_eq = f.b_eq;
  auto r = lp_solve(lp);
  if (r.status != LpStatus::Optimal) throw SolverFailure("support LP not optimal", {}, 0.0, 0.0);
  return {r.value, r.x};
}

/// Support value of a distance-combination class. Full uses the closed form
/// max_c |sum_i mu_i y_i d(c, x_i)|; Pos and Neg solve an LP.
inline SupportValue support_distance_combination(const MetricSpace& space, const std::vector<std::size_t>& centers,
                                                 const LabeledSample& sample, const SimplexWeights& mu,
                                                 DistanceVariant variant) {
  if (centers.empty()) throw InputError("support: empty center set");
  sample.validate(space.size());
  detail::check_mu_sample(mu, sample.labels);
  const std::size_t c = centers.size();
  std::vector<double> s(c, 0.0);
  for (std::size_t k = 0; k < c; ++k)
    for (std::size_t i = 0; i < sample.size(); ++i) s[k] += mu[i] * sample.labels[i] * space(centers[k], sample.points[i]);
  SupportValue out;
  if (variant == DistanceVariant::Full) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < c; ++k)
      if (std::abs(s[k]) > std::abs(s[best])) best = k;
    Vector a(c, 0.0);
    a[best] = s[best] < 0 ? -1.0 : 1.0;
    out.value = std::abs(s[best]);
    out.maximizer = std::move(a);
    return out;
  }
  auto form = polyhedral_form<double>(space, centers, variant, sample.points);
  std::vector<double> w(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) w[i] = mu[i] * sample.labels[i];
  auto r = support_polyhedral(form, w);
  Vector a(c);
  for (std::size_t k = 0; k < c; ++k) a[k] = r.z[k] - r.z[c + k];
  out.value = r.value;
  out.maximizer = std::move(a);
  return out;
}

/// sum_c a_c d(c, x) for a coefficient vector over centers.
template <class T>
T evaluate_distance_combination(const BasicMetricSpace<T>& space, const std::vector<std::size_t>& centers,
                                const std::vector<T>& a, std::size_t x) {
  T v = 0;
  for (std::size_t k = 0; k < centers.size(); ++k)
    if (a[k] != 0) v += a[k] * space(centers[k], x);
  return v;
}

// ---------------------------------------------------------------------------
// Lipschitz class

struct LipVerdict {
  bool realizable = false;
  std::size_t pos = 0, neg = 0;  // closest cross pair (space indices) when not realizable
  double distance = std::numeric_limits<double>::infinity();  // d(S+, S-)
};

/// Closest (positive, negative) pair; distance +inf when one side is empty.
template <class T>
std::pair<std::optional<std::pair<std::size_t, std::size_t>>, T> closest_cross_pair(const BasicMetricSpace<T>& space,
                                                                                   const LabeledSample& s) {
  std::optional<std::pair<std::size_t, std::size_t>> best;
  T dist = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.labels[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (s.labels[j] != -1) continue;
      const T& d = space(s.points[i], s.points[j]);
      if (!best || d < dist) {
        best = std::make_pair(s.points[i], s.points[j]);
        dist = d;
      }
    }
  }
  return {best, dist};
}

/// Realizable iff d(S+, S-) >= 2 gamma.
inline LipVerdict lip_realizable(const MetricSpace& space, const LabeledSample& sample, double gamma) {
  if (!(gamma > 0.0)) throw InputError("lip_realizable: gamma must be positive");
  sample.validate(space.size());
  auto [pair, dist] = closest_cross_pair(space, sample);
  LipVerdict v;
  if (!pair) {
    v.realizable = true;
    return v;
  }
  v.distance = dist;
  v.realizable = dist >= 2.0 * gamma;
  if (!v.realizable) std::tie(v.pos, v.neg) = *pair;
  return v;
}

/// (d(S-, x) - d(S+, x)) / 2. With one side empty its set distance is taken
/// as 2 diam(X), which keeps the function 1-Lipschitz and of the right sign.
template <class T>
T lip_extension_eval(const BasicMetricSpace<T>& space, const LabeledSample& sample, std::size_t x) {
  sample.validate(space.size(), true);
  if (x >= space.size()) throw InputError("lip_extension_eval: query point out of range");
  std::optional<T> dp, dn;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const T& d = space(sample.points[i], x);
    auto& slot = sample.labels[i] == 1 ? dp : dn;
    if (!slot || d < *slot) slot = d;
  }
  if (!dp && !dn) throw DegenerateInputError("lip_extension_eval: sample has no labeled points");
  const T far = 2 * space.diameter();
  return ((dn ? *dn : far) - (dp ? *dp : far)) / 2;
}

// ---------------------------------------------------------------------------
// Ball-pair class

/// First center in index order with d(c, x) <= r on positives and d(c, x) >= R
/// on negatives. The negative side is closed; see the README.
inline std::optional<std::size_t> ball_pair_realizable(const MetricSpace& space, const LabeledSample& sample,
                                                       const BallPairParams& params) {
  params.validate();
  sample.validate(space.size());
  for (std::size_t c = 0; c < space.size(); ++c) {
    bool ok = true;
    for (std::size_t i = 0; i < sample.size() && ok; ++i) {
      const double d = space(c, sample.points[i]);
      ok = sample.labels[i] == 1 ? d <= params.r : d >= params.R;
    }
    if (ok) return c;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Phi class

struct PhiVerdict {
  bool realizable = false;
  std::uint64_t violating = 0;  // largest domain element with phi(gamma) < x
};

/// Realizable iff phi(gamma) >= x for every sample point (labels play no role:
/// coordinates are independent and the class is symmetric).
inline PhiVerdict phi_realizable(const PhiSpec& spec, const LabeledSample& sample, double gamma) {
  sample.validate(static_cast<std::size_t>(spec.N));
  const std::uint64_t cap = spec(gamma);
  PhiVerdict v{true, 0};
  for (auto p : sample.points) {
    const std::uint64_t x = p + 1;
    if (cap < x) {
      v.realizable = false;
      v.violating = std::max(v.violating, x);
    }
  }
  return v;
}

/// Support of the phi class: coordinates range independently over
/// (-t_max(x), t_max(x)), so the supremum is sum_i mu_i t_max(x_i).
inline double support_phi(const PhiSpec& spec, const LabeledSample& sample, const SimplexWeights& mu) {
  sample.validate(static_cast<std::size_t>(spec.N));
  detail::check_mu_sample(mu, sample.labels);
  double v = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) v += mu[i] * spec.t_max(sample.points[i] + 1);
  return v;
}

/// Support of a polytope class: the best vertex.
inline SupportValue support_polytope(const PolytopeClass& p, const LabeledSample& sample, const SimplexWeights& mu) {
  sample.validate(p.size());
  detail::check_mu_sample(mu, sample.labels);
  SupportValue out;
  out.value = -std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  for (std::size_t v = 0; v < p.vertices.size(); ++v) {
    double s = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i)
      s += mu[i] * sample.labels[i] * to_double(p.vertices[v][sample.points[i]]);
    if (s > out.value) {
      out.value = s;
      best = v;
    }
  }
  Vector z(p.vertices.size(), 0.0);
  z[best] = 1.0;
  out.maximizer = std::move(z);
  return out;
}

}  // namespace marginlab
