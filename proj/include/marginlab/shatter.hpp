#pragma once

#include "marginlab/parallel.hpp"
#include "marginlab/realize.hpp"

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <vector>

namespace marginlab {

enum class ShatterStatus { Shattered, NotShattered, Marginal };

inline const char* to_string(ShatterStatus s) {
  switch (s) {
    case ShatterStatus::Shattered: return "Shattered";
    case ShatterStatus::NotShattered: return "NotShattered";
    case ShatterStatus::Marginal: return "Marginal";
  }
  return "?";
}

/// The first failing labeling and its collapse. `lambda` = fold_signs(mu, y).
/// Ball-pair counterexamples carry the labeling only (empty lambda).
struct Counterexample {
  std::uint64_t pattern = 0;
  std::vector<int> labels;
  SignedWeights lambda;
  double value = 0.0;
  Collapse collapse;
  std::vector<Rational> exact_lambda;  // rational mode only
};

struct ShatterVerdict {
  ShatterStatus status = ShatterStatus::Marginal;
  std::vector<std::size_t> points;
  bool symmetric = false;          // patterns enumerated up to a global flip
  bool symmetry_reduced = false;   // disjoint supports: pattern 0 decides all
  bool exact = false;
  double band = 0.0;
  std::uint64_t patterns_checked = 0;
  std::optional<Counterexample> counterexample;
  std::optional<std::uint64_t> marginal_pattern;

  /// Witness of pattern k (see sign_pattern). Available for Shattered
  /// verdicts computed with keep_witnesses.
  Witness witness_for(std::uint64_t k) const {
    if (status != ShatterStatus::Shattered) throw InputError("witness_for: verdict is not Shattered");
    const std::size_t n = points.size();
    if (n < 64 && k >= (std::uint64_t{1} << n)) throw InputError("witness_for: pattern index out of range");
    if (symmetry_reduced) {
      Witness w = stored_.front();
      const auto y = sign_pattern(n, k);
      for (std::size_t j = 0; j < owner_.size(); ++j) {
        if (owner_[j] < 0 || y[static_cast<std::size_t>(owner_[j])] > 0) continue;
        w.data[j] = -w.data[j];
        if (!w.exact.empty()) w.exact[j] = -w.exact[j];
      }
      return w;
    }
    if (stored_.empty()) throw InputError("witness_for: witnesses were not kept");
    const std::uint64_t half = std::uint64_t{1} << (n - 1);
    if (!symmetric || k < half) return stored_.at(k);
    return negate(stored_.at(k ^ ((half << 1) - 1)));
  }
  std::size_t stored_witnesses() const noexcept { return stored_.size(); }

  // Filled by is_shattered.
  std::vector<Witness> stored_;
  std::vector<int> owner_;       // symmetry_reduced: row owning each coordinate, -1 if none
  bool swap_negation_ = false;   // coefficient witnesses (a+, a-) negate by swapping halves

 private:
  Witness negate(Witness w) const {
    if (swap_negation_) {
      const std::size_t h = w.data.size() / 2;
      for (std::size_t j = 0; j < h; ++j) std::swap(w.data[j], w.data[h + j]);
      if (!w.exact.empty())
        for (std::size_t j = 0; j < h; ++j) std::swap(w.exact[j], w.exact[h + j]);
      return w;
    }
    for (double& x : w.data) x = -x;
    for (auto& x : w.exact) x = -x;
    return w;
  }
};

struct ShatterOptions {
  RealizeOptions realize;
  bool keep_witnesses = true;
  std::size_t cap = 20;
  /// On NotShattered, fully solve every pattern from the first failure on and
  /// report the failing one with the smallest collapse value (first in pattern
  /// order on ties) instead of the first failure.
  bool tightest = false;
};

namespace detail {

// Coordinate owners when the selected vectors have pairwise disjoint supports.
inline std::optional<std::vector<int>> disjoint_owners(const DualBallClass& c, const std::vector<std::size_t>& pts) {
  const std::size_t d = c.points.front().size();
  std::vector<int> owner(d, -1);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vector& x = c.points[pts[i]];
    for (std::size_t j = 0; j < d; ++j) {
      if (x[j] == 0.0) continue;
      if (owner[j] >= 0) return std::nullopt;
      owner[j] = static_cast<int>(i);
    }
  }
  return owner;
}

inline Counterexample make_counterexample(std::uint64_t k, std::vector<int> y, Collapse col) {
  Counterexample ce;
  ce.pattern = k;
  ce.lambda = fold_signs(col.mu, y);
  ce.value = col.value;
  if (!col.exact_mu.empty()) {
    ce.exact_lambda = col.exact_mu;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] < 0) ce.exact_lambda[i] = -ce.exact_lambda[i];
  }
  ce.labels = std::move(y);
  ce.collapse = std::move(col);
  return ce;
}

}  // namespace detail

/// Decides whether `points` (indices into the oracle's ground set) are
/// gamma-shattered: every labeling realized with margin >= gamma.
///
/// Patterns run in sign_pattern order, up to a global flip for symmetric
/// classes. The reported counterexample is the lowest failing pattern,
/// re-solved to convergence. Dual-ball sets with pairwise disjoint supports
/// need only pattern 0: flipping coordinate signs maps its witness to any
/// other pattern and preserves every l_p norm. Phi classes likewise need only
/// pattern 0. Otherwise at most `cap` points are accepted.
inline ShatterVerdict is_shattered(const ConceptClassOracle& oracle, const std::vector<std::size_t>& points,
                                   const Margin& gamma, const SolverConfig& cfg, const ShatterOptions& opt = {}) {
  cfg.validate();
  if (points.empty()) throw InputError("is_shattered: empty point set");
  const std::size_t ground = ground_size(oracle);
  for (auto p : points)
    if (p >= ground) throw InputError("is_shattered: point index out of range");
  const std::size_t n = points.size();

  ShatterVerdict out;
  out.points = points;
  out.symmetric = is_symmetric(oracle);
  out.exact = cfg.arithmetic == Arithmetic::Rational;
  out.band = out.exact ? 0.0 : cfg.band();
  if (auto* dc = std::get_if<DistanceCombinationClass>(&oracle)) out.swap_negation_ = dc->variant == DistanceVariant::Full;

  RealizeOptions full = opt.realize;
  full.full_collapse = true;

  if (auto* db = std::get_if<DualBallClass>(&oracle)) {
    if (auto owner = detail::disjoint_owners(*db, points)) {
      out.symmetry_reduced = true;
      out.owner_ = std::move(*owner);
      auto y = sign_pattern(n, 0);
      auto v = realize(oracle, make_sample(points, y), gamma, cfg, full);
      out.patterns_checked = 1;
      out.exact = out.exact || v.exact;
      if (v.status == Verdict::Realized) {
        out.status = ShatterStatus::Shattered;
        out.stored_.push_back(std::move(*v.witness));
      } else if (v.status == Verdict::NotRealized) {
        out.status = ShatterStatus::NotShattered;
        out.counterexample = detail::make_counterexample(0, std::move(y), std::move(*v.collapse));
      } else {
        out.status = ShatterStatus::Marginal;
        out.marginal_pattern = 0;
      }
      return out;
    }
  }

  if (std::holds_alternative<PhiClass>(oracle)) {
    // Phi realizability ignores labels; the witness for pattern k is gamma * y.
    out.symmetry_reduced = true;
    out.owner_.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.owner_[i] = static_cast<int>(i);
    auto y = sign_pattern(n, 0);
    auto v = realize(oracle, make_sample(points, y), gamma, cfg, full);
    out.patterns_checked = 1;
    if (v.status == Verdict::Realized) {
      out.status = ShatterStatus::Shattered;
      out.stored_.push_back(std::move(*v.witness));
    } else {
      out.status = ShatterStatus::NotShattered;
      out.counterexample = detail::make_counterexample(0, std::move(y), std::move(*v.collapse));
    }
    return out;
  }

  if (n > opt.cap)
    throw InputError("is_shattered: " + std::to_string(n) + " points exceed the cap of " + std::to_string(opt.cap) +
                     "; use max_shattered_subset for larger ground sets");

  const std::uint64_t count = std::uint64_t{1} << (out.symmetric ? n - 1 : n);
  std::vector<std::uint8_t> status(count, 0);
  if (opt.keep_witnesses) out.stored_.resize(count);
  std::atomic<bool> any_exact{false};

  const std::size_t first = parallel_first(count, cfg.jobs, [&](std::size_t k) {
    auto v = realize(oracle, make_sample(points, sign_pattern(n, k)), gamma, cfg, opt.realize);
    if (v.exact) any_exact = true;
    status[k] = static_cast<std::uint8_t>(v.status);
    if (v.status == Verdict::Realized && opt.keep_witnesses) out.stored_[k] = std::move(*v.witness);
    return v.status == Verdict::NotRealized;
  });

  if (first < count) {
    out.patterns_checked = first + 1;
    out.stored_.clear();
    auto y = sign_pattern(n, first);
    auto v = realize(oracle, make_sample(points, y), gamma, cfg, full);
    if (v.status != Verdict::NotRealized)
      throw SolverFailure("is_shattered: failing pattern changed verdict on re-solve", {}, v.value, 0.0);
    out.status = ShatterStatus::NotShattered;
    out.exact = out.exact || v.exact;
    if (!v.collapse) {
      // Ball pairs are not convex; the failing labeling itself is the
      // certificate, re-checked by scanning every center.
      if (!std::holds_alternative<BallPairClass>(oracle))
        throw SolverFailure("is_shattered: no collapse certificate for this class", {}, v.value, 0.0);
      Counterexample ce;
      ce.pattern = first;
      ce.labels = std::move(y);
      ce.value = v.value;
      out.counterexample = std::move(ce);
      return out;
    }
    out.counterexample = detail::make_counterexample(first, std::move(y), std::move(*v.collapse));
    if (opt.tightest) {
      for (std::uint64_t k = first + 1; k < count; ++k) {
        auto yk = sign_pattern(n, k);
        auto vk = realize(oracle, make_sample(points, yk), gamma, cfg, full);
        if (vk.status != Verdict::NotRealized || !vk.collapse) continue;
        if (vk.collapse->value < out.counterexample->value)
          out.counterexample = detail::make_counterexample(k, std::move(yk), std::move(*vk.collapse));
      }
      out.patterns_checked = count;
    }
    return out;
  }

  out.patterns_checked = count;
  out.exact = out.exact || any_exact;
  for (std::uint64_t k = 0; k < count; ++k)
    if (status[k] == static_cast<std::uint8_t>(Verdict::Marginal)) {
      out.status = ShatterStatus::Marginal;
      out.marginal_pattern = k;
      out.stored_.clear();
      return out;
    }
  out.status = ShatterStatus::Shattered;
  return out;
}

// ---------------------------------------------------------------------------
// Collapse re-checks

/// ||sum lambda_i x_i||.
inline double collapse_value(std::span<const Vector> points, const NormSpec& n, const SignedWeights& lambda) {
  if (points.size() != lambda.size()) throw InputError("collapse: weight count does not match point count");
  return norm(combine(points, lambda.values()), n);
}

/// True iff ||sum lambda_i x_i|| <= gamma. Pure re-evaluation.
inline bool verify_collapse(std::span<const Vector> points, const NormSpec& n, const SignedWeights& lambda,
                            double gamma) {
  double s = 0.0;
  for (double x : lambda.values()) s += std::abs(x);
  if (std::abs(s - 1.0) > 1e-9) throw InputError("verify_collapse: weights must have l1 norm 1");
  return collapse_value(points, n, lambda) <= gamma;
}

/// Exact variant for p in {1, 2, inf}; the weights must have l1 norm exactly 1.
inline bool verify_collapse(std::span<const std::vector<Rational>> points, const NormSpec& n,
                            const std::vector<Rational>& lambda, const Margin& gamma) {
  if (points.size() != lambda.size()) throw InputError("collapse: weight count does not match point count");
  Rational s = 0;
  for (const auto& x : lambda) s += abs(x);
  if (s != 1) throw InputError("verify_collapse: weights must have l1 norm exactly 1");
  if (!(n.is_one() || n.is_two() || n.is_infinite()))
    throw InputError("exact arithmetic supports only p in {1, 2, inf}");
  const std::size_t d = points.front().size();
  std::vector<Rational> v(d, Rational(0));
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = 0; j < d; ++j) v[j] += lambda[i] * points[i][j];
  if (n.is_two()) {
    Rational q = 0;
    for (const auto& x : v) q += x * x;
    return gamma.at_least_sqrt(q);
  }
  Rational r = 0;
  for (const auto& x : v) r = n.is_one() ? r + abs(x) : (abs(x) > r ? abs(x) : r);
  return gamma.at_least(r);
}

// ---------------------------------------------------------------------------
// Cube condition

struct CubeAnswer {
  bool yes = false;
  std::optional<Witness> witness;
};

namespace detail {

template <class T>
CubeAnswer polyhedral_feasible(const PolyhedralForm<T>& f, const std::vector<T>& y, const SolverConfig& cfg) {
  const std::size_t nz = f.vars();
  LinearProgram<T> lp;
  lp.objective.assign(nz, T(0));
  lp.a_ub = f.a_ub;
  lp.b_ub = f.b_ub;
  lp.a_eq = f.a_eq;
  lp.b_eq = f.b_eq;
  for (std::size_t i = 0; i < y.size(); ++i) {
    lp.a_eq.push_back(f.values[i]);
    lp.b_eq.push_back(y[i]);
  }
  lp.bounds.assign(nz, Bound<T>::nonneg());
  LpOptions<T> lo;
  lo.max_iter = cfg.max_iter;
  lo.tol = cfg.tol;
  auto r = lp_solve(lp, lo);
  CubeAnswer a;
  if (r.status == LpStatus::Infeasible) return a;
  if (r.status != LpStatus::Optimal) throw SolverFailure(std::string("cube LP: ") + to_string(r.status), {}, 0.0, 0.0);
  a.yes = true;
  Witness w;
  w.kind = Witness::Kind::Coefficients;
  for (std::size_t k = 0; k < nz; ++k) {
    w.data.push_back(to_double(r.x[k]));
    if constexpr (std::is_same_v<T, Rational>) w.exact.push_back(r.x[k]);
  }
  a.witness = std::move(w);
  return a;
}

// Least l2-norm solution of X w = y, exactly; nullopt when inconsistent.
inline std::optional<std::vector<Rational>> least_norm_exact(const std::vector<std::vector<Rational>>& x,
                                                             const std::vector<Rational>& y) {
  const std::size_t n = x.size(), d = x.front().size();
  // Row echelon form of [X | y] to pick independent rows and check consistency.
  std::vector<std::vector<Rational>> a = x;
  std::vector<Rational> b = y;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<std::size_t> basis;
  std::size_t row = 0;
  for (std::size_t col = 0; col < d && row < n; ++col) {
    std::size_t piv = n;
    for (std::size_t r = row; r < n; ++r)
      if (a[r][col] != 0) {
        piv = r;
        break;
      }
    if (piv == n) continue;
    std::swap(a[piv], a[row]);
    std::swap(b[piv], b[row]);
    std::swap(order[piv], order[row]);
    for (std::size_t r = row + 1; r < n; ++r) {
      if (a[r][col] == 0) continue;
      const Rational f = a[r][col] / a[row][col];
      for (std::size_t c = col; c < d; ++c) a[r][c] -= f * a[row][c];
      b[r] -= f * b[row];
    }
    basis.push_back(order[row]);
    ++row;
  }
  for (std::size_t r = row; r < n; ++r)
    if (b[r] != 0) return std::nullopt;
  if (basis.empty()) return std::vector<Rational>(d, Rational(0));
  const std::size_t k = basis.size();
  std::vector<std::vector<Rational>> g(k, std::vector<Rational>(k));
  std::vector<Rational> rhs(k);
  for (std::size_t i = 0; i < k; ++i) {
    rhs[i] = y[basis[i]];
    for (std::size_t j = 0; j < k; ++j) {
      Rational s = 0;
      for (std::size_t c = 0; c < d; ++c) s += x[basis[i]][c] * x[basis[j]][c];
      g[i][j] = s;
    }
  }
  auto coef = solve_exact(std::move(g), std::move(rhs));
  if (!coef) return std::nullopt;
  std::vector<Rational> w(d, Rational(0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t c = 0; c < d; ++c) w[c] += (*coef)[i] * x[basis[i]][c];
  return w;
}

// min ||w||_q subject to X w = y, as an LP (q = inf for p = 1, q = 1 for p = inf).
template <class T>
std::optional<std::pair<std::vector<T>, T>> least_dual_norm_lp(const std::vector<std::vector<T>>& x,
                                                               const std::vector<T>& y, bool p_is_one,
                                                               const SolverConfig& cfg) {
  const std::size_t d = x.front().size();
  const std::size_t nv = 2 * d + 1;  // w+, w-, t
  LinearProgram<T> lp;
  lp.objective.assign(nv, T(0));
  if (p_is_one) {
    lp.objective[2 * d] = -1;
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<T> row(nv, T(0));
      row[j] = 1;
      row[d + j] = 1;
      row[2 * d] = -1;
      lp.a_ub.push_back(std::move(row));
      lp.b_ub.push_back(T(0));
    }
  } else {
    for (std::size_t j = 0; j < 2 * d; ++j) lp.objective[j] = -1;
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<T> row(nv, T(0));
    for (std::size_t j = 0; j < d; ++j) {
      row[j] = x[i][j];
      row[d + j] = -x[i][j];
    }
    lp.a_eq.push_back(std::move(row));
    lp.b_eq.push_back(y[i]);
  }
  lp.bounds.assign(nv, Bound<T>::nonneg());
  LpOptions<T> lo;
  lo.max_iter = cfg.max_iter;
  lo.tol = cfg.tol;
  auto r = lp_solve(lp, lo);
  if (r.status == LpStatus::Infeasible) return std::nullopt;
  if (r.status != LpStatus::Optimal) throw SolverFailure(std::string("cube LP: ") + to_string(r.status), {}, 0.0, 0.0);
  std::vector<T> w(d);
  for (std::size_t j = 0; j < d; ++j) w[j] = r.x[j] - r.x[d + j];
  return std::make_pair(std::move(w), T(-r.value));
}

template <class T>
CubeAnswer cube_dual_ball(const DualBallClass& c, const std::vector<std::size_t>& pts, const std::vector<T>& y,
                          const SolverConfig& cfg) {
  const NormSpec& n = c.norm;
  const bool exact = std::is_same_v<T, Rational>;
  CubeAnswer a;
  if (n.is_two()) {
    const auto all = c.rational_points();
    std::vector<std::vector<Rational>> x;
    for (auto p : pts) x.push_back(all[p]);
    std::vector<Rational> yr;
    for (const auto& v : y) yr.push_back(convert<Rational>(v));
    auto w = least_norm_exact(x, yr);
    if (!w) return a;
    Rational q = 0;
    for (const auto& v : *w) q += v * v;
    a.yes = exact ? q <= 1 : to_double(q) <= 1.0 + cfg.tol;
    if (a.yes) {
      Witness wt;
      for (const auto& v : *w) wt.data.push_back(to_double(v));
      wt.exact = std::move(*w);
      a.witness = std::move(wt);
    }
    return a;
  }
  if (!(n.is_one() || n.is_infinite()))
    throw InputError("check_cube_condition: dual-ball classes are supported for p in {1, 2, inf}");
  std::vector<std::vector<T>> x;
  if constexpr (std::is_same_v<T, Rational>) {
    const auto all = c.rational_points();
    for (auto p : pts) x.push_back(all[p]);
  } else {
    for (auto p : pts) x.push_back(c.points[p]);
  }
  auto r = least_dual_norm_lp(x, y, n.is_one(), cfg);
  if (!r) return a;
  if constexpr (std::is_same_v<T, Rational>) a.yes = r->second <= 1;
  else a.yes = r->second <= 1.0 + cfg.tol;
  if (a.yes) {
    Witness wt;
    for (const auto& v : r->first) {
      wt.data.push_back(to_double(v));
      if constexpr (std::is_same_v<T, Rational>) wt.exact.push_back(v);
    }
    a.witness = std::move(wt);
  }
  return a;
}

template <class T>
CubeAnswer cube_condition(const ConceptClassOracle& oracle, const std::vector<std::size_t>& pts,
                          const std::vector<T>& y, const SolverConfig& cfg) {
  if (auto* c = std::get_if<DualBallClass>(&oracle)) return cube_dual_ball(*c, pts, y, cfg);
  if (auto* c = std::get_if<DistanceCombinationClass>(&oracle)) {
    if constexpr (std::is_same_v<T, Rational>)
      return polyhedral_feasible(polyhedral_form<Rational>(c->rational_space(), c->centers, c->variant, pts), y, cfg);
    else
      return polyhedral_feasible(polyhedral_form<double>(c->space, c->centers, c->variant, pts), y, cfg);
  }
  if (auto* c = std::get_if<PolytopeClass>(&oracle)) return polyhedral_feasible(polyhedral_form<T>(*c, pts), y, cfg);
  if (auto* c = std::get_if<LipschitzClass>(&oracle)) {
    // Values extend to a 1-Lipschitz function iff they are 1-Lipschitz on the
    // sample (McShane); the witness is the smallest such extension.
    auto check = [&](const auto& space) {
      using S = std::decay_t<decltype(space(0, 0))>;
      std::vector<S> ys;
      for (const auto& v : y) ys.push_back(convert<S>(v));
      CubeAnswer a;
      for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
          S diff = ys[i] - ys[j];
          if (diff < 0) diff = -diff;
          if (diff > space(pts[i], pts[j])) return a;
        }
      a.yes = true;
      Witness w;
      w.kind = Witness::Kind::Values;
      for (std::size_t x = 0; x < space.size(); ++x) {
        S best = ys[0] + space(pts[0], x);
        for (std::size_t i = 1; i < pts.size(); ++i) {
          S v = ys[i] + space(pts[i], x);
          if (v < best) best = v;
        }
        w.data.push_back(to_double(best));
        if constexpr (std::is_same_v<S, Rational>) w.exact.push_back(best);
      }
      a.witness = std::move(w);
      return a;
    };
    if constexpr (std::is_same_v<T, Rational>) return check(c->exact ? *c->exact : c->space.to_rational());
    else return check(c->space);
  }
  if (auto* c = std::get_if<PhiClass>(&oracle)) {
    CubeAnswer a;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double v = std::abs(to_double(y[i]));
      if (v > 0.0 && c->spec(v) < pts[i] + 1) return a;
    }
    a.yes = true;
    Witness w;
    w.kind = Witness::Kind::Values;
    for (const auto& v : y) w.data.push_back(to_double(v));
    a.witness = std::move(w);
    return a;
  }
  throw InputError("check_cube_condition: the ball-pair class has no real-valued members");
}

}  // namespace detail

/// Does some f in the class take the values y on the points? F restricted to
/// the points is convex, so it contains the cube [-gamma, gamma]^n iff it
/// contains all 2^n vertices gamma * y.
///
/// Polyhedral classes use LP feasibility. Dual-ball classes use the exact
/// least-norm solution for p = 2 and an LP over the dual norm for p in
/// {1, inf}; other p are rejected. Ball-pair classes are rejected.
inline CubeAnswer check_cube_condition(const ConceptClassOracle& oracle, const std::vector<std::size_t>& points,
                                       double gamma, const std::vector<double>& y, const SolverConfig& cfg) {
  cfg.validate();
  if (points.size() != y.size()) throw InputError("check_cube_condition: target length does not match point count");
  for (auto p : points)
    if (p >= ground_size(oracle)) throw InputError("check_cube_condition: point index out of range");
  for (double v : y)
    if (!(std::abs(v) <= gamma * (1.0 + 1e-12))) throw InputError("check_cube_condition: target outside the cube");
  if (cfg.arithmetic == Arithmetic::Rational) {
    std::vector<Rational> yr;
    for (double v : y) yr.push_back(to_rational(v));
    return detail::cube_condition(oracle, points, yr, cfg);
  }
  return detail::cube_condition(oracle, points, y, cfg);
}

/// Exact targets.
inline CubeAnswer check_cube_condition(const ConceptClassOracle& oracle, const std::vector<std::size_t>& points,
                                       const Rational& gamma, const std::vector<Rational>& y,
                                       const SolverConfig& cfg) {
  cfg.validate();
  if (points.size() != y.size()) throw InputError("check_cube_condition: target length does not match point count");
  for (auto p : points)
    if (p >= ground_size(oracle)) throw InputError("check_cube_condition: point index out of range");
  for (const auto& v : y)
    if (abs(v) > gamma) throw InputError("check_cube_condition: target outside the cube");
  return detail::cube_condition(oracle, points, y, cfg);
}

}  // namespace marginlab
