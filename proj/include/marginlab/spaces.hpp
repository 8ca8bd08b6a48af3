#pragma once

#include "marginlab/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace marginlab {

/// An l_p norm, p in [1, inf]. Infinity is stored as +inf.
class NormSpec {
 public:
  NormSpec() = default;
  explicit NormSpec(double p) : p_(p) {
    if (std::isnan(p) || p < 1.0) throw InputError("norm exponent must satisfy p >= 1");
  }

  static NormSpec lp(double p) { return NormSpec(p); }
  static NormSpec infinity() { return NormSpec(std::numeric_limits<double>::infinity()); }

  double p() const noexcept { return p_; }
  bool is_infinite() const noexcept { return std::isinf(p_); }
  bool is_one() const noexcept { return p_ == 1.0; }
  bool is_two() const noexcept { return p_ == 2.0; }
  bool is_smooth() const noexcept { return p_ > 1.0 && !is_infinite(); }

  /// Hoelder conjugate q with 1/p + 1/q = 1.
  double dual_exponent() const noexcept {
    if (is_one()) return std::numeric_limits<double>::infinity();
    if (is_infinite()) return 1.0;
    return p_ / (p_ - 1.0);
  }
  NormSpec dual() const { return NormSpec(dual_exponent()); }

  friend bool operator==(const NormSpec&, const NormSpec&) = default;

 private:
  double p_ = 2.0;
};

inline void require_finite(std::span<const double> v, const char* what = "vector") {
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (!std::isfinite(v[j])) {
      throw InputError(std::string(what) + " has a non-finite coordinate at index " + std::to_string(j));
    }
  }
}

/// a^e for a >= 0, with short paths for the exponents that dominate in
/// practice (p in {3, 4} and their duals).
inline double fast_pow(double a, double e) {
  if (e == 1.0) return a;
  if (e == 2.0) return a * a;
  if (e == 3.0) return a * a * a;
  if (e == 4.0) return (a * a) * (a * a);
  if (e == 0.5) return std::sqrt(a);
  if (e == 0.0) return 1.0;
  return std::pow(a, e);
}

/// (sum |v_j|^p)^(1/p), or max |v_j| when p is infinite. Scaled by the max
/// coordinate to avoid overflow for large p.
inline double norm(std::span<const double> v, const NormSpec& n) {
  if (v.empty()) throw InputError("norm of an empty vector");
  require_finite(v);
  double big = 0.0;
  for (double x : v) big = std::max(big, std::abs(x));
  if (n.is_infinite() || big == 0.0) return big;
  if (n.is_one()) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
  }
  if (n.is_two()) {
    double s = 0.0;
    for (double x : v) s += (x / big) * (x / big);
    return big * std::sqrt(s);
  }
  const double p = n.p();
  double s = 0.0;
  for (double x : v) s += fast_pow(std::abs(x) / big, p);
  return big * std::pow(s, 1.0 / p);
}

inline double dual_norm(std::span<const double> w, const NormSpec& n) { return norm(w, n.dual()); }

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("dimension mismatch in inner product");
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

/// Norming functional: w with dual-norm(w) = 1 and <w, v> = norm(v).
///
/// For p in (1, inf) the map is single valued,
/// w_j = sign(v_j) |v_j|^(p-1) / norm(v)^(p-1). For p = 1 the sign vector on the
/// largest coordinate is used (lowest index on ties); for p = inf the functional
/// is concentrated on the largest coordinate the same way.
inline Vector duality_map(std::span<const double> v, const NormSpec& n) {
  const double nv = norm(v, n);
  if (nv == 0.0) throw DegenerateInputError("duality map of the zero vector");
  Vector w(v.size(), 0.0);
  if (n.is_infinite()) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < v.size(); ++j) {
      if (std::abs(v[j]) > std::abs(v[best])) best = j;
    }
    w[best] = v[best] > 0 ? 1.0 : -1.0;
    return w;
  }
  if (n.is_one()) {
    // The dual ball is the cube and sign(v) norms v; zero coordinates get 0.
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] > 0) w[j] = 1.0;
      else if (v[j] < 0) w[j] = -1.0;
    }
    return w;
  }
  const double p = n.p();
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double r = std::abs(v[j]) / nv;
    const double mag = (p == 2.0) ? r : fast_pow(r, p - 1.0);
    w[j] = v[j] > 0 ? mag : (v[j] < 0 ? -mag : 0.0);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Exact norms for the LP-representable and Euclidean cases.

template <class T>
T norm1(std::span<const T> v) {
  T s = 0;
  for (const auto& x : v) s += (x < 0 ? T(-x) : x);
  return s;
}

template <class T>
T norm_inf(std::span<const T> v) {
  T s = 0;
  for (const auto& x : v) {
    T a = x < 0 ? T(-x) : x;
    if (a > s) s = a;
  }
  return s;
}

template <class T>
T norm2_squared(std::span<const T> v) {
  T s = 0;
  for (const auto& x : v) s += x * x;
  return s;
}

// ---------------------------------------------------------------------------
// Finite metric spaces.

enum class MetricAxiom { Symmetry, Diagonal, Positivity, Triangle };

inline const char* to_string(MetricAxiom a) {
  switch (a) {
    case MetricAxiom::Symmetry: return "symmetry";
    case MetricAxiom::Diagonal: return "diagonal";
    case MetricAxiom::Positivity: return "positivity";
    case MetricAxiom::Triangle: return "triangle";
  }
  return "?";
}

/// First violated axiom. Indices: (i, j) for pairwise axioms, (i, i) for the
/// diagonal, and (i, j, k) for d[i][k] > d[i][j] + d[j][k].
struct MetricViolation {
  MetricAxiom kind;
  std::size_t i = 0, j = 0, k = 0;
};

template <class T>
using DistanceMatrix = std::vector<std::vector<T>>;

/// Checks the metric axioms in a fixed scan order: symmetry, diagonal,
/// positivity, then triangles in lexicographic (i, j, k) order over distinct
/// indices. Floating-point triangle checks allow a relative slack of 1e-12 of the
/// largest entry; rational checks are exact.
template <class T>
std::optional<MetricViolation> validate_metric(const DistanceMatrix<T>& d) {
  const std::size_t n = d.size();
  for (const auto& row : d) {
    if (row.size() != n) throw InputError("distance matrix is not square");
  }
  if constexpr (!ScalarTraits<T>::exact) {
    for (const auto& row : d) require_finite(row, "distance matrix row");
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (d[i][j] != d[j][i]) return MetricViolation{MetricAxiom::Symmetry, i, j, 0};
  for (std::size_t i = 0; i < n; ++i)
    if (d[i][i] != 0) return MetricViolation{MetricAxiom::Diagonal, i, i, 0};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!(d[i][j] > 0)) return MetricViolation{MetricAxiom::Positivity, i, j, 0};

  T slack = 0;
  if constexpr (!ScalarTraits<T>::exact) {
    double big = 0.0;
    for (const auto& row : d)
      for (double x : row) big = std::max(big, x);
    slack = 1e-12 * big;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        if (d[i][k] > d[i][j] + d[j][k] + slack) return MetricViolation{MetricAxiom::Triangle, i, j, k};
      }
    }
  return std::nullopt;
}

inline std::string describe(const MetricViolation& v) {
  std::string s = std::string(to_string(v.kind)) + " (" + std::to_string(v.i) + ", " + std::to_string(v.j);
  if (v.kind == MetricAxiom::Triangle) s += ", " + std::to_string(v.k);
  return s + ")";
}

/// Labeled points with an explicit distance matrix satisfying the metric axioms.
/// Immutable once built.
template <class T>
class BasicMetricSpace {
 public:
  using Scalar = T;

  BasicMetricSpace(std::vector<std::string> ids, DistanceMatrix<T> dist)
      : ids_(std::move(ids)), dist_(std::move(dist)) {
    if (ids_.size() != dist_.size()) throw InputError("metric space: id count does not match matrix size");
    if (ids_.empty()) throw InputError("metric space: no points");
    if (auto v = validate_metric(dist_)) throw InputError("metric space: violates " + describe(*v));
  }

  /// Builds with default ids "x0", "x1", ...
  explicit BasicMetricSpace(DistanceMatrix<T> dist) : dist_(std::move(dist)) {
    ids_ = default_ids(dist_.size());
    if (ids_.empty()) throw InputError("metric space: no points");
    if (auto v = validate_metric(dist_)) throw InputError("metric space: violates " + describe(*v));
  }

  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const DistanceMatrix<T>& matrix() const noexcept { return dist_; }
  const T& operator()(std::size_t i, std::size_t j) const { return dist_[i][j]; }

  std::size_t index_of(const std::string& id) const {
    auto it = std::find(ids_.begin(), ids_.end(), id);
    if (it == ids_.end()) throw InputError("unknown point id '" + id + "'");
    return static_cast<std::size_t>(it - ids_.begin());
  }

  T diameter() const {
    T best = 0;
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j)
        if (dist_[i][j] > best) best = dist_[i][j];
    return best;
  }

  /// Divides every distance by the diameter. Without `force`, a space whose
  /// diameter is already at most 1 is returned unchanged.
  BasicMetricSpace rescaled_to_unit_diameter(bool force = false) const {
    if (size() < 2) throw DegenerateInputError("cannot rescale a single-point space");
    const T diam = diameter();
    if (!force && diam <= 1) return *this;
    DistanceMatrix<T> d = dist_;
    for (auto& row : d)
      for (auto& x : row) x = x / diam;
    if constexpr (!ScalarTraits<T>::exact) {
      // Pin the extreme pair(s) so the diameter is exactly 1.
      for (std::size_t i = 0; i < size(); ++i)
        for (std::size_t j = 0; j < size(); ++j)
          if (i != j && dist_[i][j] == diam) d[i][j] = 1.0;
    }
    return BasicMetricSpace(ids_, std::move(d));
  }

  BasicMetricSpace<double> to_double() const {
    if constexpr (std::is_same_v<T, double>) {
      return *this;
    } else {
      DistanceMatrix<double> d(size(), std::vector<double>(size()));
      for (std::size_t i = 0; i < size(); ++i)
        for (std::size_t j = 0; j < size(); ++j) d[i][j] = marginlab::to_double(dist_[i][j]);
      return BasicMetricSpace<double>(ids_, std::move(d));
    }
  }

  BasicMetricSpace<Rational> to_rational() const {
    if constexpr (std::is_same_v<T, Rational>) {
      return *this;
    } else {
      DistanceMatrix<Rational> d(size(), std::vector<Rational>(size()));
      for (std::size_t i = 0; i < size(); ++i)
        for (std::size_t j = 0; j < size(); ++j) d[i][j] = marginlab::to_rational(dist_[i][j]);
      return BasicMetricSpace<Rational>(ids_, std::move(d));
    }
  }

  static std::vector<std::string> default_ids(std::size_t n) {
    std::vector<std::string> ids;
    ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) ids.push_back("x" + std::to_string(i));
    return ids;
  }

 private:
  std::vector<std::string> ids_;
  DistanceMatrix<T> dist_;
};

using MetricSpace = BasicMetricSpace<double>;
using RationalMetricSpace = BasicMetricSpace<Rational>;

inline double diameter(const MetricSpace& m) { return m.diameter(); }
inline MetricSpace rescale_to_unit_diameter(const MetricSpace& m, bool force = false) {
  return m.rescaled_to_unit_diameter(force);
}

}  // namespace marginlab
