#pragma once

#include "marginlab/common.hpp"
#include "marginlab/lp.hpp"
#include "marginlab/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace marginlab {

struct SolverConfig {
  double tol = 1e-7;
  std::size_t max_iter = 50000;
  Arithmetic arithmetic = Arithmetic::Float;
  unsigned jobs = 0;  // 0: MARGINLAB_JOBS or hardware concurrency

  void validate() const {
    if (!(tol > 0.0) || !(tol < 1e-2)) throw InputError("solver tol must lie in (0, 1e-2)");
    if (max_iter < 1) throw InputError("solver max_iter must be at least 1");
  }
  double band() const { return 3.0 * tol; }
};

/// Convex weights over n items, summing to one.
class SimplexWeights {
 public:
  SimplexWeights() = default;
  explicit SimplexWeights(Vector mu) : mu_(std::move(mu)) {
    double s = 0.0;
    for (double x : mu_) {
      if (!(x >= 0.0)) throw InputError("simplex weights must be nonnegative");
      s += x;
    }
    if (mu_.empty() || std::abs(s - 1.0) > 1e-12) throw InputError("simplex weights must sum to one");
  }
  static SimplexWeights uniform(std::size_t n) { return SimplexWeights(Vector(n, 1.0 / static_cast<double>(n))); }
  static SimplexWeights vertex(std::size_t n, std::size_t i) {
    Vector v(n, 0.0);
    v.at(i) = 1.0;
    return SimplexWeights(std::move(v));
  }
  /// Clips negatives and renormalises; for solver iterates carrying rounding noise.
  static SimplexWeights normalized(Vector mu) {
    double s = 0.0;
    for (double& x : mu) {
      x = std::max(0.0, x);
      s += x;
    }
    if (!(s > 0.0)) throw DegenerateInputError("cannot normalise all-zero weights");
    for (double& x : mu) x /= s;
    double t = 0.0;
    for (double x : mu) t += x;
    std::size_t big = static_cast<std::size_t>(std::max_element(mu.begin(), mu.end()) - mu.begin());
    mu[big] += 1.0 - t;
    return SimplexWeights(std::move(mu));
  }

  const Vector& values() const noexcept { return mu_; }
  std::size_t size() const noexcept { return mu_.size(); }
  double operator[](std::size_t i) const { return mu_[i]; }

 private:
  Vector mu_;
};

/// Signed weights with unit l1 norm.
class SignedWeights {
 public:
  SignedWeights() = default;
  explicit SignedWeights(Vector lambda) : lambda_(std::move(lambda)) {
    double s = 0.0;
    for (double x : lambda_) s += std::abs(x);
    if (lambda_.empty() || std::abs(s - 1.0) > 1e-12) throw InputError("signed weights must have unit l1 norm");
  }
  const Vector& values() const noexcept { return lambda_; }
  std::size_t size() const noexcept { return lambda_.size(); }
  double operator[](std::size_t i) const { return lambda_[i]; }

 private:
  Vector lambda_;
};

/// lambda_i = y_i * mu_i.
inline SignedWeights fold_signs(const SimplexWeights& mu, std::span<const int> y) {
  if (mu.size() != y.size()) throw InputError("fold_signs: length mismatch");
  Vector lambda(mu.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 1 && y[i] != -1) throw InputError("fold_signs: labels must be +1 or -1");
    lambda[i] = y[i] * mu[i];
  }
  return SignedWeights(std::move(lambda));
}

inline Vector combine(std::span<const Vector> u, std::span<const double> weights) {
  if (u.empty()) throw InputError("combine: no vectors");
  if (u.size() != weights.size()) throw InputError("combine: weight count mismatch");
  Vector v(u.front().size(), 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (weights[i] == 0.0) continue;
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += weights[i] * u[i][j];
  }
  return v;
}

struct MinNormResult {
  SimplexWeights mu;
  double value = 0.0;            // ||sum mu_i u_i||
  double lower_bound = 0.0;      // certified: value - gap
  double gap = 0.0;
  std::optional<Vector> witness; // dual-ball functional with min_i <w, u_i> >= lower_bound
  std::size_t iterations = 0;
  bool stopped_early = false;    // a decision threshold was crossed before convergence
};

/// Optional decision thresholds: the solve may stop as soon as the certified
/// lower bound exceeds `stop_above` or the achieved value drops below
/// `stop_below`.
struct EarlyStop {
  double stop_above = std::numeric_limits<double>::infinity();
  double stop_below = -std::numeric_limits<double>::infinity();
};

namespace detail {

inline void check_vectors(std::span<const Vector> u) {
  if (u.empty()) throw InputError("min_norm_point: empty vector set");
  const std::size_t d = u.front().size();
  if (d == 0) throw InputError("min_norm_point: zero-dimensional vectors");
  for (const auto& x : u) {
    if (x.size() != d) throw InputError("min_norm_point: vectors differ in dimension");
    require_finite(x, "input vector");
  }
}

// argmin over t in [0, tmax] of sum |v_j + t d_j|^p, convex in t.
inline double line_search(const Vector& v, const Vector& d, double p, double tmax) {
  if (p == 2.0) {
    double vd = 0.0, dd = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      vd += v[j] * d[j];
      dd += d[j] * d[j];
    }
    if (dd <= 0.0) return 0.0;
    return std::clamp(-vd / dd, 0.0, tmax);
  }
  auto deriv = [&](double t, double* second) {
    double g = 0.0, h = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double x = v[j] + t * d[j];
      const double a = std::abs(x);
      if (a == 0.0) continue;
      const double ap = fast_pow(a, p - 2.0);
      g += ap * x * d[j];
      h += ap * d[j] * d[j];
    }
    if (second) *second = (p - 1.0) * h;
    return g;
  };
  if (deriv(0.0, nullptr) >= 0.0) return 0.0;
  if (deriv(tmax, nullptr) <= 0.0) return tmax;
  double lo = 0.0, hi = tmax, t = 0.5 * tmax;
  for (int it = 0; it < 200 && hi - lo > 1e-17 * std::max(1.0, tmax); ++it) {
    double h = 0.0;
    const double g = deriv(t, &h);
    if (g == 0.0) return t;
    if (g < 0.0) lo = t;
    else hi = t;
    double next = (h > 0.0 && std::isfinite(h)) ? t - g / h : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  return 0.5 * (lo + hi);
}

inline MinNormResult min_norm_lp(std::span<const Vector> u, const NormSpec& n, const SolverConfig& cfg);

// Dense solve with partial pivoting; false when numerically singular.
inline bool dense_solve(std::vector<Vector>& a, Vector& b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (!(std::abs(a[piv][c]) > 1e-300)) return false;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t c = n; c-- > 0;) {
    double s = b[c];
    for (std::size_t k = c + 1; k < n; ++k) s -= a[c][k] * b[k];
    b[c] = s / a[c][c];
  }
  for (double x : b)
    if (!std::isfinite(x)) return false;
  return true;
}

inline double pnorm_pow(const Vector& x, double p) {
  double s = 0.0;
  for (double v : x) s += fast_pow(std::abs(v), p);
  return s;
}

// Newton iterations for sum_j |x_j|^p, x = sum mu_i u_i, restricted to the
// face spanned by the current support. Each step also tries the Euclidean
// Newton direction (exact on the affine hull of the face), which reaches the
// origin in one step when it lies on the face. Coordinates that hit zero leave
// the support; Frank-Wolfe steps bring vertices back when needed.
inline void newton_polish(std::span<const Vector> u, double p, Vector& mu, int steps) {
  const std::size_t d = u.front().size();
  auto direction = [&](const std::vector<std::size_t>& s, const Vector& g1, const Vector& h1, Vector& out) {
    const std::size_t k = s.size();
    std::vector<Vector> kkt(k + 1, Vector(k + 1, 0.0));
    out.assign(k + 1, 0.0);
    double trace = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
      const Vector& ur = u[s[r]];
      double gr = 0.0;
      for (std::size_t j = 0; j < d; ++j) gr += g1[j] * ur[j];
      out[r] = -gr;
      for (std::size_t c = r; c < k; ++c) {
        const Vector& uc = u[s[c]];
        double h = 0.0;
        for (std::size_t j = 0; j < d; ++j) h += h1[j] * ur[j] * uc[j];
        kkt[r][c] = kkt[c][r] = h;
      }
      trace += kkt[r][r];
      kkt[r][k] = kkt[k][r] = 1.0;
    }
    const double reg = 1e-12 * std::max(trace, 1e-300);
    for (std::size_t r = 0; r < k; ++r) kkt[r][r] += reg;
    return dense_solve(kkt, out);
  };
  // Backtracking along dir from mu; returns the objective reached (f0 if no decrease).
  auto search = [&](const std::vector<std::size_t>& s, const Vector& dir, double f0, Vector& best) {
    const std::size_t k = s.size();
    double tmax = 1.0;
    std::size_t blocking = k;
    for (std::size_t r = 0; r < k; ++r)
      if (dir[r] < 0.0 && mu[s[r]] / -dir[r] < tmax) {
        tmax = mu[s[r]] / -dir[r];
        blocking = r;
      }
    double t = tmax;
    Vector trial(mu.size());
    for (int bt = 0; bt < 40; ++bt, t *= 0.5) {
      trial = mu;
      for (std::size_t r = 0; r < k; ++r) trial[s[r]] = std::max(0.0, mu[s[r]] + t * dir[r]);
      if (t == tmax && blocking < k) trial[s[blocking]] = 0.0;
      double sum = 0.0;
      for (double v : trial) sum += v;
      for (double& v : trial) v /= sum;
      const double f = pnorm_pow(combine(u, trial), p);
      if (f < f0) {
        best = std::move(trial);
        return f;
      }
    }
    return f0;
  };

  for (int step = 0; step < steps; ++step) {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < mu.size(); ++i)
      if (mu[i] > 0.0) s.push_back(i);
    if (s.size() < 2) return;
    const Vector x = combine(u, mu);
    const double f0 = pnorm_pow(x, p);
    if (f0 == 0.0) return;
    double xmax = 0.0;
    for (double v : x) xmax = std::max(xmax, std::abs(v));
    Vector g1(d), h1(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double a = std::max(std::abs(x[j]), 1e-9 * xmax);
      g1[j] = p * fast_pow(std::abs(x[j]), p - 1.0) * (x[j] < 0 ? -1.0 : 1.0);
      h1[j] = p * (p - 1.0) * fast_pow(a, p - 2.0);
    }
    double fbest = f0;
    Vector best, dir;
    if (direction(s, g1, h1, dir)) fbest = search(s, dir, f0, best);
    if (p != 2.0 && direction(s, x, Vector(d, 1.0), dir)) {
      Vector alt;
      const double fe = search(s, dir, fbest, alt);
      if (fe < fbest) {
        fbest = fe;
        best = std::move(alt);
      }
    }
    if (!(fbest < f0)) return;
    mu = std::move(best);
    if (f0 - fbest <= 1e-15 * f0) return;
  }
}

}  // namespace detail

/// Minimises ||sum mu_i u_i|| over the probability simplex.
///
/// For p in (1, inf) this runs away-step conditional gradient with exact line
/// search; the stopping rule is the duality gap, and the returned witness is
/// the duality map of the final point, so min_i <witness, u_i> equals the
/// certified lower bound. For p in {1, inf} the problem is solved as an LP.
inline MinNormResult min_norm_point(std::span<const Vector> u, const NormSpec& n, const SolverConfig& cfg,
                                    const EarlyStop& stop = {}) {
  cfg.validate();
  detail::check_vectors(u);
  if (!n.is_smooth()) return detail::min_norm_lp(u, n, cfg);

  const std::size_t m = u.size();
  const std::size_t d = u.front().size();
  const double p = n.p();

  // Start at the shortest vertex.
  std::size_t start = 0;
  double best_norm = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    const double nv = norm(u[i], n);
    if (nv < best_norm) {
      best_norm = nv;
      start = i;
    }
  }
  Vector mu(m, 0.0);
  mu[start] = 1.0;
  Vector v = u[start];
  Vector g(m), dir(d);
  Vector best_witness;
  double lower = -std::numeric_limits<double>::infinity();
  MinNormResult out;
  double value = norm(v, n);

  for (std::size_t it = 0;; ++it) {
    if (it % 64 == 63) {
      v = combine(u, mu);
      value = norm(v, n);
    }
    if (value < cfg.tol) {
      // The gradient is undefined at the origin; the value alone decides.
      out.mu = SimplexWeights::normalized(mu);
      out.value = value;
      out.lower_bound = std::max(0.0, lower);
      out.gap = value - out.lower_bound;
      if (!best_witness.empty() && lower > 0.0) out.witness = best_witness;
      out.iterations = it;
      out.stopped_early = value < stop.stop_below;
      return out;
    }
    const Vector w = duality_map(v, n);
    std::size_t s = 0, a = m;
    for (std::size_t i = 0; i < m; ++i) {
      g[i] = dot(w, u[i]);
      if (g[i] < g[s]) s = i;
      if (mu[i] > 0.0 && (a == m || g[i] > g[a])) a = i;
    }
    if (g[s] > lower) {
      lower = g[s];
      best_witness = w;
    }
    const double gap = value - lower;
    const bool done = gap <= cfg.tol;
    const bool above = lower > stop.stop_above;
    const bool below = value < stop.stop_below;
    if (done || above || below) {
      out.mu = SimplexWeights::normalized(mu);
      out.value = value;
      out.lower_bound = lower;
      out.gap = std::max(0.0, gap);
      out.witness = best_witness;
      out.iterations = it;
      out.stopped_early = !done;
      return out;
    }
    if (it >= cfg.max_iter) {
      throw SolverFailure("min_norm_point: no convergence within max_iter", mu, value, gap);
    }
    if (it % 32 == 31) {
      detail::newton_polish(u, p, mu, 8);
      v = combine(u, mu);
      value = norm(v, n);
      continue;
    }
    const double gap_fw = value - g[s];
    const double gap_away = g[a] - value;
    double tmax;
    bool away = false;
    if (gap_fw >= gap_away || mu[a] >= 1.0) {
      for (std::size_t j = 0; j < d; ++j) dir[j] = u[s][j] - v[j];
      tmax = 1.0;
    } else {
      away = true;
      for (std::size_t j = 0; j < d; ++j) dir[j] = v[j] - u[a][j];
      tmax = mu[a] / (1.0 - mu[a]);
    }
    const double t = detail::line_search(v, dir, p, tmax);
    if (t <= 0.0) {
      // No descent along the chosen direction: the gap is numerical noise.
      out.mu = SimplexWeights::normalized(mu);
      out.value = value;
      out.lower_bound = lower;
      out.gap = std::max(0.0, gap);
      out.witness = best_witness;
      out.iterations = it;
      if (gap > cfg.tol && !(lower > stop.stop_above)) {
        throw SolverFailure("min_norm_point: stalled with gap above tolerance", mu, value, gap);
      }
      return out;
    }
    if (!away) {
      for (double& x : mu) x *= (1.0 - t);
      mu[s] += t;
    } else {
      for (double& x : mu) x *= (1.0 + t);
      mu[a] -= t;
      if (t >= tmax || mu[a] < 1e-16) mu[a] = 0.0;
    }
    for (std::size_t j = 0; j < d; ++j) v[j] += t * dir[j];
    value = norm(v, n);
  }
}

namespace detail {

// l1: max -sum t_j  s.t.  U mu - t <= 0, -U mu - t <= 0, sum mu = 1.
// l_inf: max -s      s.t.  U mu - s 1 <= 0, -U mu - s 1 <= 0, sum mu = 1.
// In both cases the duals (alpha, beta) of the two blocks give the witness
// w = alpha - beta in the dual ball with <w, u_i> >= optimum for every i.
template <class T>
LinearProgram<T> min_norm_program(std::span<const std::vector<T>> u, bool l1) {
  const std::size_t m = u.size();
  const std::size_t d = u.front().size();
  const std::size_t extra = l1 ? d : 1;
  LinearProgram<T> lp;
  lp.objective.assign(m + extra, T(0));
  for (std::size_t k = 0; k < extra; ++k) lp.objective[m + k] = -1;
  for (int sgn : {+1, -1}) {
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<T> row(m + extra, T(0));
      for (std::size_t i = 0; i < m; ++i) row[i] = sgn > 0 ? u[i][j] : T(-u[i][j]);
      row[m + (l1 ? j : 0)] = -1;
      lp.a_ub.push_back(std::move(row));
      lp.b_ub.push_back(T(0));
    }
  }
  std::vector<T> ones(m + extra, T(0));
  for (std::size_t i = 0; i < m; ++i) ones[i] = 1;
  lp.a_eq.push_back(std::move(ones));
  lp.b_eq.push_back(T(1));
  return lp;
}

inline MinNormResult min_norm_lp(std::span<const Vector> u, const NormSpec& n, const SolverConfig& cfg) {
  const std::size_t m = u.size();
  const std::size_t d = u.front().size();
  const bool l1 = n.is_one();
  LpOptions<double> opt;
  opt.max_iter = cfg.max_iter;
  opt.tol = cfg.tol;
  auto lp = min_norm_program<double>(u, l1);
  auto res = lp_solve(lp, opt);
  if (res.status != LpStatus::Optimal) throw SolverFailure("min_norm_point: LP not optimal", {}, 0.0, 0.0);
  Vector mu(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(m));
  MinNormResult out;
  out.mu = SimplexWeights::normalized(mu);
  out.value = norm(combine(u, out.mu.values()), n);
  Vector w(d);
  for (std::size_t j = 0; j < d; ++j) w[j] = res.dual_ub[j] - res.dual_ub[d + j];
  const double wn = dual_norm(w, n);
  if (wn > 1.0) for (double& x : w) x /= wn;
  double lower = std::numeric_limits<double>::infinity();
  for (const auto& x : u) lower = std::min(lower, dot(w, x));
  out.lower_bound = lower;
  out.gap = std::max(0.0, out.value - lower);
  if (lower > 0.0) out.witness = std::move(w);
  out.iterations = res.iterations;
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Exact route for rational inputs: l1 and l_inf through the rational LP, l2
// through Wolfe's minimum-norm-point algorithm.

/// Exact minimum. For l2 the value is kept squared (`value_squared`), since
/// the norm itself is generally irrational; for l1/l_inf `value` is exact and
/// `value_squared` = value^2.
struct ExactMinNorm {
  std::vector<Rational> mu;
  Rational value_squared;
  std::optional<Rational> value;   // l1 / l_inf only
  std::vector<Rational> point;     // sum mu_i u_i
  std::vector<Rational> witness;   // l1/l_inf: dual-ball functional; l2: the point itself (unnormalised)
};

namespace detail {

// Solves M x = rhs exactly; nullopt when M is singular.
inline std::optional<std::vector<Rational>> solve_exact(std::vector<std::vector<Rational>> a,
                                                        std::vector<Rational> b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = n;
    for (std::size_t r = col; r < n; ++r)
      if (a[r][col] != 0) {
        piv = r;
        break;
      }
    if (piv == n) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    const Rational inv = 1 / a[col][col];
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      const Rational f = a[r][col] * inv;
      for (std::size_t c = col; c < n; ++c)
        if (a[col][c] != 0) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

// Affine minimum-norm point of {u_i : i in S}: G a = t 1, 1^T a = 1.
inline std::optional<std::vector<Rational>> affine_min_norm(const std::vector<std::vector<Rational>>& gram,
                                                            const std::vector<std::size_t>& s) {
  const std::size_t k = s.size();
  std::vector<std::vector<Rational>> a(k + 1, std::vector<Rational>(k + 1));
  std::vector<Rational> b(k + 1);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) a[r][c] = gram[s[r]][s[c]];
    a[r][k] = -1;
    a[k][r] = 1;
  }
  b[k] = 1;
  auto x = solve_exact(std::move(a), std::move(b));
  if (!x) return std::nullopt;
  x->pop_back();
  return x;
}

}  // namespace detail

/// Checks the exact optimality conditions of a Euclidean min-norm point:
/// mu in the simplex and <x, u_i> >= ||x||^2 for every i.
inline bool is_exact_l2_optimum(std::span<const std::vector<Rational>> u, const std::vector<Rational>& mu) {
  Rational s = 0;
  for (const auto& x : mu) {
    if (x < 0) return false;
    s += x;
  }
  if (s != 1) return false;
  std::vector<Rational> pt(u.front().size(), Rational(0));
  for (std::size_t i = 0; i < u.size(); ++i)
    if (mu[i] != 0)
      for (std::size_t j = 0; j < pt.size(); ++j) pt[j] += mu[i] * u[i][j];
  const Rational nsq = norm2_squared<Rational>(pt);
  for (const auto& x : u) {
    Rational ip = 0;
    for (std::size_t j = 0; j < pt.size(); ++j) ip += pt[j] * x[j];
    if (ip < nsq) return false;
  }
  return true;
}

/// Exact minimum-norm point over the simplex for rational data and
/// p in {1, 2, inf}. `hint_support` (indices of a float solution's support)
/// is tried first for l2; Wolfe's algorithm runs when the hint does not verify.
inline ExactMinNorm min_norm_point_exact(std::span<const std::vector<Rational>> u, const NormSpec& n,
                                         const std::vector<std::size_t>& hint_support = {}) {
  if (u.empty()) throw InputError("min_norm_point: empty vector set");
  const std::size_t m = u.size();
  const std::size_t d = u.front().size();
  for (const auto& x : u)
    if (x.size() != d) throw InputError("min_norm_point: vectors differ in dimension");
  ExactMinNorm out;
  auto point_of = [&](const std::vector<Rational>& mu) {
    std::vector<Rational> pt(d, Rational(0));
    for (std::size_t i = 0; i < m; ++i)
      if (mu[i] != 0)
        for (std::size_t j = 0; j < d; ++j) pt[j] += mu[i] * u[i][j];
    return pt;
  };

  if (n.is_one() || n.is_infinite()) {
    auto lp = detail::min_norm_program<Rational>(u, n.is_one());
    auto res = lp_solve(lp);
    if (res.status != LpStatus::Optimal) throw SolverFailure("exact min_norm_point: LP not optimal", {}, 0.0, 0.0);
    out.mu.assign(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(m));
    out.point = point_of(out.mu);
    out.value = n.is_one() ? norm1<Rational>(out.point) : norm_inf<Rational>(out.point);
    out.value_squared = *out.value * *out.value;
    out.witness.resize(d);
    for (std::size_t j = 0; j < d; ++j) out.witness[j] = res.dual_ub[j] - res.dual_ub[d + j];
    return out;
  }
  if (!n.is_two()) throw InputError("exact arithmetic supports only p in {1, 2, inf}");

  std::vector<std::vector<Rational>> gram(m, std::vector<Rational>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = i; k < m; ++k) {
      Rational ip = 0;
      for (std::size_t j = 0; j < d; ++j)
        if (u[i][j] != 0 && u[k][j] != 0) ip += u[i][j] * u[k][j];
      gram[i][k] = gram[k][i] = ip;
    }
  auto finish = [&](std::vector<Rational> mu) {
    out.mu = std::move(mu);
    out.point = point_of(out.mu);
    out.value_squared = norm2_squared<Rational>(out.point);
    out.witness = out.point;
    return out;
  };

  if (!hint_support.empty()) {
    if (auto a = detail::affine_min_norm(gram, hint_support)) {
      std::vector<Rational> mu(m, Rational(0));
      bool ok = true;
      for (std::size_t r = 0; r < hint_support.size(); ++r) {
        if ((*a)[r] < 0) ok = false;
        mu[hint_support[r]] = (*a)[r];
      }
      if (ok && is_exact_l2_optimum(u, mu)) return finish(std::move(mu));
    }
  }

  // Wolfe's algorithm. Start from the vertex of least norm.
  std::size_t start = 0;
  for (std::size_t i = 1; i < m; ++i)
    if (gram[i][i] < gram[start][start]) start = i;
  std::vector<std::size_t> s{start};
  std::vector<Rational> lam{Rational(1)};
  auto ip_with = [&](const std::vector<std::size_t>& set, const std::vector<Rational>& w, std::size_t i) {
    Rational r = 0;
    for (std::size_t k = 0; k < set.size(); ++k)
      if (w[k] != 0) r += w[k] * gram[set[k]][i];
    return r;
  };
  for (std::size_t major = 0; major < 100 * m + 100; ++major) {
    Rational xx = 0;
    for (std::size_t k = 0; k < s.size(); ++k) xx += lam[k] * ip_with(s, lam, s[k]);
    std::size_t j = m;
    Rational best = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const Rational ip = ip_with(s, lam, i);
      if (j == m || ip < best) {
        best = ip;
        j = i;
      }
    }
    if (best >= xx || std::find(s.begin(), s.end(), j) != s.end()) {
      std::vector<Rational> mu(m, Rational(0));
      for (std::size_t k = 0; k < s.size(); ++k) mu[s[k]] = lam[k];
      return finish(std::move(mu));
    }
    s.push_back(j);
    lam.push_back(Rational(0));
    for (;;) {
      auto alpha = detail::affine_min_norm(gram, s);
      if (!alpha) throw SolverFailure("exact min_norm_point: affinely dependent support", {}, 0.0, 0.0);
      bool positive = true;
      for (const auto& a : *alpha)
        if (a <= 0) positive = false;
      if (positive) {
        lam = *alpha;
        break;
      }
      std::optional<Rational> theta;
      for (std::size_t k = 0; k < s.size(); ++k) {
        if ((*alpha)[k] <= 0) {
          const Rational denom = lam[k] - (*alpha)[k];
          if (denom == 0) continue;
          const Rational th = lam[k] / denom;
          if (!theta || th < *theta) theta = th;
        }
      }
      if (!theta) theta = Rational(0);
      std::vector<std::size_t> s2;
      std::vector<Rational> l2;
      for (std::size_t k = 0; k < s.size(); ++k) {
        const Rational v = (1 - *theta) * lam[k] + *theta * (*alpha)[k];
        if (v > 0) {
          s2.push_back(s[k]);
          l2.push_back(v);
        }
      }
      s = std::move(s2);
      lam = std::move(l2);
      if (s.size() == 1) {
        lam[0] = 1;
        break;
      }
    }
  }
  throw SolverFailure("exact min_norm_point: Wolfe iteration limit", {}, 0.0, 0.0);
}

inline std::vector<std::vector<Rational>> to_rational(std::span<const Vector> u) {
  std::vector<std::vector<Rational>> out;
  out.reserve(u.size());
  for (const auto& x : u) {
    std::vector<Rational> r;
    r.reserve(x.size());
    for (double v : x) r.push_back(to_rational(v));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace marginlab
