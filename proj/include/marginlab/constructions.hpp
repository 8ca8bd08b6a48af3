#pragma once

#include "marginlab/classes.hpp"
#include "marginlab/realize.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace marginlab {

// ---------------------------------------------------------------------------
// Hadamard matrices

struct HadamardMatrix {
  std::size_t order = 1;
  std::vector<std::vector<int>> entries;
};

namespace detail {

// H h_i for a Sylvester matrix via the fast Walsh-Hadamard transform.
inline void fwht(std::vector<std::int64_t>& a) {
  for (std::size_t h = 1; h < a.size(); h *= 2)
    for (std::size_t i = 0; i < a.size(); i += 2 * h)
      for (std::size_t j = i; j < i + h; ++j) {
        const std::int64_t x = a[j], y = a[j + h];
        a[j] = x + y;
        a[j + h] = x - y;
      }
}

}  // namespace detail

/// H_1 = [1], H_2n = [[H_n, H_n], [H_n, -H_n]]. Checks entries in {-1, +1} and
/// H H^T = n I in integer arithmetic before returning (the product is taken
/// with the fast transform, exact for Sylvester matrices).
inline HadamardMatrix sylvester_hadamard(unsigned m) {
  if (m > 13) throw InputError("sylvester_hadamard: m must be at most 13");
  HadamardMatrix h;
  h.order = std::size_t{1} << m;
  h.entries.assign(1, std::vector<int>{1});
  while (h.entries.size() < h.order) {
    const std::size_t n = h.entries.size();
    std::vector<std::vector<int>> next(2 * n, std::vector<int>(2 * n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const int v = h.entries[i][j];
        next[i][j] = v;
        next[i][j + n] = v;
        next[i + n][j] = v;
        next[i + n][j + n] = -v;
      }
    h.entries = std::move(next);
  }
  const auto n = static_cast<std::int64_t>(h.order);
  for (std::size_t i = 0; i < h.order; ++i) {
    std::vector<std::int64_t> row(h.order);
    for (std::size_t j = 0; j < h.order; ++j) {
      const int v = h.entries[i][j];
      if (v != 1 && v != -1) throw SolverFailure("sylvester_hadamard: entry outside {-1, +1}", {}, 0.0, 0.0);
      row[j] = v;
    }
    detail::fwht(row);  // row j of H times h_i = <h_j, h_i>, H being symmetric
    for (std::size_t j = 0; j < h.order; ++j)
      if (row[j] != (i == j ? n : 0)) throw SolverFailure("sylvester_hadamard: rows not orthogonal", {}, 0.0, 0.0);
  }
  return h;
}

/// H H^T computed by plain triple loop; for tests of small orders.
inline std::vector<std::vector<std::int64_t>> gram_matrix(const HadamardMatrix& h) {
  std::vector<std::vector<std::int64_t>> g(h.order, std::vector<std::int64_t>(h.order, 0));
  for (std::size_t i = 0; i < h.order; ++i)
    for (std::size_t j = 0; j < h.order; ++j)
      for (std::size_t k = 0; k < h.order; ++k) g[i][j] += h.entries[i][k] * h.entries[j][k];
  return g;
}

// ---------------------------------------------------------------------------
// Bundles

enum class PredictedStatus { Shattered, NotShattered, MetricValid, MetricInvalid };

inline const char* to_string(PredictedStatus s) {
  switch (s) {
    case PredictedStatus::Shattered: return "Shattered";
    case PredictedStatus::NotShattered: return "NotShattered";
    case PredictedStatus::MetricValid: return "MetricValid";
    case PredictedStatus::MetricInvalid: return "MetricInvalid";
  }
  return "?";
}

struct VectorSetObject {
  std::vector<Vector> points;
  NormSpec norm{2.0};
  std::optional<std::vector<std::vector<Rational>>> exact;  // when the coordinates are rational

  DualBallClass oracle() const {
    if (exact) return DualBallClass(*exact, norm);
    return DualBallClass(points, norm);
  }
};

/// An explicit distance matrix that may or may not be a metric. Validation is
/// on demand; the triangle scan is cubic in the point count.
struct MetricObject {
  std::vector<std::string> ids;
  DistanceMatrix<Rational> dist;

  std::size_t size() const noexcept { return ids.size(); }
  std::size_t index_of(const std::string& id) const {
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (ids[i] == id) return i;
    throw InputError("unknown point id '" + id + "'");
  }
  std::optional<MetricViolation> validate() const { return validate_metric(dist); }
  RationalMetricSpace exact_space() const { return RationalMetricSpace(ids, dist); }
  MetricSpace space() const { return exact_space().to_double(); }
  DistanceMatrix<double> float_matrix() const {
    DistanceMatrix<double> d(size(), std::vector<double>(size()));
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < size(); ++j) d[i][j] = to_double(dist[i][j]);
    return d;
  }
};

using ConstructionObject = std::variant<VectorSetObject, MetricObject, PhiSpec>;

/// A witness named after the labeling it realizes.
struct NamedWitness {
  std::string name;
  std::vector<std::size_t> points;  // indices into the object
  std::vector<int> labels;
  Witness witness;
};

struct ConstructionBundle {
  std::string name;
  std::map<std::string, std::string> params;
  ConstructionObject object;
  std::optional<double> predicted_gamma;
  std::optional<Rational> predicted_gamma_squared;  // exact, when known
  PredictedStatus predicted_status = PredictedStatus::Shattered;
  std::string provenance;
  std::vector<std::string> notices;
  std::vector<NamedWitness> witnesses;
  std::vector<std::size_t> focus;  // the point subset the prediction is about (all points when empty)

  const VectorSetObject& vectors() const { return std::get<VectorSetObject>(object); }
  const MetricObject& metric() const { return std::get<MetricObject>(object); }
  const PhiSpec& phi() const { return std::get<PhiSpec>(object); }
};

namespace detail {

// Exact k-th root of an integer, if it is one.
inline std::optional<std::uint64_t> integer_root(std::uint64_t n, double p) {
  if (!std::isfinite(p)) return std::nullopt;
  const double r = std::round(std::pow(static_cast<double>(n), 1.0 / p));
  if (r < 1.0) return std::nullopt;
  // p must be an integer for r^p to be checked exactly.
  if (p != std::floor(p)) return std::nullopt;
  std::uint64_t acc = 1;
  for (int e = 0; e < static_cast<int>(p); ++e) acc *= static_cast<std::uint64_t>(r);
  if (acc != n) return std::nullopt;
  return static_cast<std::uint64_t>(r);
}

inline std::string num(double x) {
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

}  // namespace detail

/// Rows of the Sylvester matrix of order n = 2^m scaled by n^(-1/p): unit
/// l_p norm, predicted shattered at 1/sqrt(n). The tight rate needs p > 2;
/// p <= 2 is built with a notice.
inline ConstructionBundle hadamard_shattered_set(unsigned m, double p) {
  if (m < 1) throw InputError("hadamard_shattered_set: m must be at least 1");
  const NormSpec norm(p);
  const HadamardMatrix h = sylvester_hadamard(m);
  const std::size_t n = h.order;
  ConstructionBundle b;
  b.name = "hadamard";
  b.params = {{"m", std::to_string(m)}, {"p", detail::num(p)}};
  if (p < 2.0)
    b.notices.push_back("p < 2: the set need not be shattered at 1/sqrt(n); for m = 1 equal weights collapse "
                        "to 2^(-1/p) < 1/sqrt(2)");
  else if (!(p > 2.0) || norm.is_infinite())
    b.notices.push_back("p outside (2, inf): the set is still shattered at 1/sqrt(n), but that is not the tight rate");
  VectorSetObject obj;
  obj.norm = norm;
  const double scale = norm.is_infinite() ? 1.0 : std::pow(static_cast<double>(n), -1.0 / p);
  std::optional<Rational> exact_scale;
  if (norm.is_infinite()) exact_scale = Rational(1);
  else if (auto r = detail::integer_root(n, p)) exact_scale = Rational(1) / Rational(*r);
  for (const auto& row : h.entries) {
    Vector v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = row[j] * scale;
    obj.points.push_back(std::move(v));
  }
  if (exact_scale) {
    std::vector<std::vector<Rational>> ex;
    for (const auto& row : h.entries) {
      std::vector<Rational> v(n);
      for (std::size_t j = 0; j < n; ++j) v[j] = row[j] * *exact_scale;
      ex.push_back(std::move(v));
    }
    obj.exact = std::move(ex);
  }
  b.object = std::move(obj);
  b.predicted_gamma = 1.0 / std::sqrt(static_cast<double>(n));
  b.predicted_gamma_squared = Rational(1) / Rational(static_cast<long long>(n));
  b.predicted_status = PredictedStatus::Shattered;
  b.provenance = "Sylvester Hadamard rows x_i(j) = H_ij / n^(1/p); ||sum lambda_i x_i||_p >= 1/sqrt(n) for ||lambda||_1 = 1";
  return b;
}

/// The n standard basis vectors of l_p^n, predicted shattered at n^(1/p - 1)
/// and not beyond (uniform weights collapse to exactly that value).
inline ConstructionBundle standard_basis_set(std::size_t n, double p) {
  if (n < 1) throw InputError("standard_basis_set: n must be at least 1");
  const NormSpec norm(p);
  ConstructionBundle b;
  b.name = "basis";
  b.params = {{"n", std::to_string(n)}, {"p", detail::num(p)}};
  VectorSetObject obj;
  obj.norm = norm;
  std::vector<std::vector<Rational>> ex(n, std::vector<Rational>(n, Rational(0)));
  for (std::size_t i = 0; i < n; ++i) {
    Vector v(n, 0.0);
    v[i] = 1.0;
    ex[i][i] = 1;
    obj.points.push_back(std::move(v));
  }
  obj.exact = std::move(ex);
  b.object = std::move(obj);
  const double dn = static_cast<double>(n);
  const Rational rn(static_cast<long long>(n));
  if (norm.is_one()) {
    b.predicted_gamma = 1.0;
    b.predicted_gamma_squared = Rational(1);
  } else if (norm.is_infinite()) {
    b.predicted_gamma = 1.0 / dn;
    b.predicted_gamma_squared = 1 / (rn * rn);
  } else {
    b.predicted_gamma = std::pow(dn, 1.0 / p - 1.0);
    if (norm.is_two()) b.predicted_gamma_squared = 1 / rn;
  }
  b.predicted_status = PredictedStatus::Shattered;
  b.provenance = "standard basis: ||sum lambda_i e_i||_p = ||lambda||_p >= n^(1/p - 1) ||lambda||_1";
  return b;
}

/// A = {a1..ak}, B = {b_s : s nonempty subset of A} (plus b0 when
/// include_empty), with d(a_i, b_s) = r if a_i in s and R otherwise, and all
/// other distinct pairs at (r + R) / 2. A metric iff R <= 3r; then every
/// labeling of A is realized by the ball pair centred at b_s. Point ids are
/// "a{i}" and "b{mask}", bit i-1 of the mask standing for a_i, B in counter
/// order.
inline ConstructionBundle intro_counterexample_space(unsigned k, const Rational& r, const Rational& R,
                                                     bool include_empty = false) {
  if (k < 1 || k > 12) throw InputError("intro_counterexample_space: k must lie in [1, 12]");
  if (r < 0 || !(R > r)) throw InputError("intro_counterexample_space: need 0 <= r < R");
  MetricObject obj;
  for (unsigned i = 1; i <= k; ++i) obj.ids.push_back("a" + std::to_string(i));
  const std::uint64_t full = (std::uint64_t{1} << k);
  for (std::uint64_t s = include_empty ? 0 : 1; s < full; ++s) obj.ids.push_back("b" + std::to_string(s));
  const std::size_t n = obj.ids.size();
  const Rational mid = (r + R) / 2;
  obj.dist.assign(n, std::vector<Rational>(n, mid));
  for (std::size_t i = 0; i < n; ++i) obj.dist[i][i] = 0;
  for (unsigned i = 0; i < k; ++i)
    for (std::size_t b = k; b < n; ++b) {
      const std::uint64_t s = (b - k) + (include_empty ? 0 : 1);
      const Rational& d = (s >> i & 1U) ? r : R;
      obj.dist[i][b] = d;
      obj.dist[b][i] = d;
    }
  ConstructionBundle out;
  out.name = "intro";
  out.params = {{"k", std::to_string(k)}, {"r", rational_to_string(r)}, {"R", rational_to_string(R)},
                {"include_empty", include_empty ? "true" : "false"}};
  out.object = std::move(obj);
  out.predicted_status = R <= 3 * r ? PredictedStatus::MetricValid : PredictedStatus::MetricInvalid;
  out.provenance = "ball-pair space: rho(a_i, b_s) = r if a_i in s, R otherwise; a metric for R <= 3r";
  out.focus.resize(k);
  for (unsigned i = 0; i < k; ++i) out.focus[i] = i;
  if (r == 0) out.notices.push_back("r = 0 puts a_i and b_{a_i} at distance 0; not a metric");
  return out;
}

inline ConstructionBundle intro_counterexample_space(unsigned k, double r, double R, bool include_empty = false) {
  return intro_counterexample_space(k, to_rational(r), to_rational(R), include_empty);
}

/// A = {a1..ak}, B1 and B2 each indexed by all subsets s of A, with
/// d(a_i, b1_s) = 2/3 - g if a_i in s else 2/3 + g, d(a_i, b2_s) the other
/// way round, and all other distinct pairs at 2/3. A metric of diameter
/// 2/3 + g <= 1 iff g <= 1/3. The witness delta_s = d(b1_s, .)/2 - d(b2_s, .)/2
/// lies in D^> and takes the value -g on s and +g on A \ s. Ids are "a{i}",
/// "b1{mask}", "b2{mask}".
inline ConstructionBundle gamma_counterexample_space(unsigned k, const Rational& gamma) {
  if (k < 1 || k > 10) throw InputError("gamma_counterexample_space: k must lie in [1, 10]");
  if (gamma <= 0) throw InputError("gamma_counterexample_space: gamma must be positive");
  const std::uint64_t subsets = std::uint64_t{1} << k;
  MetricObject obj;
  for (unsigned i = 1; i <= k; ++i) obj.ids.push_back("a" + std::to_string(i));
  for (int j = 1; j <= 2; ++j)
    for (std::uint64_t s = 0; s < subsets; ++s) obj.ids.push_back("b" + std::to_string(j) + std::to_string(s));
  const std::size_t n = obj.ids.size();
  const Rational two3(2, 3);
  obj.dist.assign(n, std::vector<Rational>(n, two3));
  for (std::size_t i = 0; i < n; ++i) obj.dist[i][i] = 0;
  auto b_index = [&](int j, std::uint64_t s) { return k + static_cast<std::size_t>(j - 1) * subsets + s; };
  for (unsigned i = 0; i < k; ++i)
    for (int j = 1; j <= 2; ++j)
      for (std::uint64_t s = 0; s < subsets; ++s) {
        const bool in = s >> i & 1U;
        const Rational d = (in == (j == 1)) ? two3 - gamma : two3 + gamma;
        obj.dist[i][b_index(j, s)] = d;
        obj.dist[b_index(j, s)][i] = d;
      }

  ConstructionBundle out;
  out.name = "gamma-space";
  out.params = {{"k", std::to_string(k)}, {"gamma", rational_to_string(gamma)}};
  out.predicted_gamma = to_double(gamma);
  out.predicted_gamma_squared = gamma * gamma;
  out.predicted_status = gamma <= Rational(1, 3) ? PredictedStatus::MetricValid : PredictedStatus::MetricInvalid;
  out.provenance = "two-sided subset space: rho(a_i, b^j_s) = 2/3 -+ gamma; delta_s = d_{b1_s}/2 - d_{b2_s}/2";
  out.focus.resize(k);
  for (unsigned i = 0; i < k; ++i) out.focus[i] = i;
  if (gamma >= Rational(2, 3)) out.notices.push_back("gamma >= 2/3 gives nonpositive distances");

  // Witness coefficients in the all-centers layout z = (a+, a-).
  for (std::uint64_t s = 0; s < subsets; ++s) {
    NamedWitness w;
    w.name = "delta_" + std::to_string(s);
    w.points = out.focus;
    for (unsigned i = 0; i < k; ++i) w.labels.push_back((s >> i & 1U) ? -1 : 1);
    w.witness.kind = Witness::Kind::Coefficients;
    w.witness.data.assign(2 * n, 0.0);
    w.witness.exact.assign(2 * n, Rational(0));
    w.witness.data[b_index(1, s)] = 0.5;
    w.witness.exact[b_index(1, s)] = Rational(1, 2);
    w.witness.data[n + b_index(2, s)] = 0.5;
    w.witness.exact[n + b_index(2, s)] = Rational(1, 2);
    out.witnesses.push_back(std::move(w));
  }
  out.object = std::move(obj);
  return out;
}

inline ConstructionBundle gamma_counterexample_space(unsigned k, double gamma) {
  return gamma_counterexample_space(k, to_rational(gamma));
}

/// The phi class over {1..N}; predicted dim(gamma) = min(phi(gamma), N).
inline ConstructionBundle phi_class_truncation(const PhiSpec& spec) {
  ConstructionBundle b;
  b.name = "phi";
  b.params = {{"phi", spec.name()}, {"N", std::to_string(spec.N)}};
  b.object = spec;
  b.predicted_status = PredictedStatus::Shattered;
  b.provenance = "phi class: {x_i} is gamma-shattered iff phi(gamma) >= x_i, so dim(gamma) = phi(gamma)";
  return b;
}

/// Predicted dims of a phi bundle on a grid.
inline std::vector<std::uint64_t> predicted_dims(const PhiSpec& spec, const std::vector<double>& grid) {
  std::vector<std::uint64_t> out;
  for (double g : grid) out.push_back(spec.dimension(g));
  return out;
}

}  // namespace marginlab
