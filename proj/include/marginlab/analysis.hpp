#pragma once

#include "marginlab/shatter.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace marginlab {

// ---------------------------------------------------------------------------
// Maximum shattered subset

struct SubsetSearchOptions {
  ShatterOptions shatter;
  std::size_t max_tests = 100000;  // is_shattered calls before giving up
};

/// A tested extension that failed, with its certificate when it was tested
/// directly (`implied_by` names a failing subset otherwise).
struct PrunedExtension {
  std::vector<std::size_t> subset;
  std::optional<Counterexample> counterexample;
  std::optional<std::vector<std::size_t>> implied_by;
  bool marginal = false;
};

struct SubsetSearchResult {
  std::size_t size = 0;
  std::vector<std::size_t> subset;       // ground points, increasing
  std::optional<ShatterVerdict> verdict;  // for `subset`
  std::vector<PrunedExtension> pruned;
  bool lower_bound_only = false;          // budget ran out or a Marginal verdict was met
  std::size_t tests = 0;
};

namespace detail {

inline std::vector<std::size_t> subset_of(const std::vector<std::size_t>& ground, std::uint64_t mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ground.size(); ++i)
    if (mask >> i & 1U) out.push_back(ground[i]);
  return out;
}

}  // namespace detail

/// Largest gamma-shattered subset of `ground` (at most 64 points).
///
/// Depth-first over subsets in increasing index order, seeded by the greedy
/// pass that is its first branch. An extension is skipped without a solve
/// when one of its one-smaller subsets is already known to fail, since every
/// subset of a shattered set is shattered. Marginal verdicts count as failures
/// and mark the result lower-bound-only.
inline SubsetSearchResult max_shattered_subset(const ConceptClassOracle& oracle, const std::vector<std::size_t>& ground,
                                               const Margin& gamma, const SolverConfig& cfg,
                                               const SubsetSearchOptions& opt = {}) {
  cfg.validate();
  const std::size_t n = ground.size();
  if (n > 64) throw InputError("max_shattered_subset: at most 64 ground points");
  for (auto p : ground)
    if (p >= ground_size(oracle)) throw InputError("max_shattered_subset: point index out of range");

  enum : std::uint8_t { Yes = 1, No = 2, Undecided = 3 };
  std::unordered_map<std::uint64_t, std::uint8_t> memo;
  SubsetSearchResult out;
  ShatterOptions sopt = opt.shatter;
  sopt.keep_witnesses = false;
  std::uint64_t best_mask = 0;
  std::size_t best = 0;
  bool exhausted = false;

  auto test = [&](std::uint64_t mask) -> bool {
    if (auto it = memo.find(mask); it != memo.end()) return it->second == Yes;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1U)) continue;
      const std::uint64_t sub = mask & ~(std::uint64_t{1} << i);
      if (sub == 0) continue;
      auto it = memo.find(sub);
      if (it != memo.end() && it->second != Yes) {
        memo[mask] = No;
        out.pruned.push_back({detail::subset_of(ground, mask), std::nullopt, detail::subset_of(ground, sub), false});
        return false;
      }
    }
    if (out.tests >= opt.max_tests) {
      exhausted = true;
      return false;
    }
    ++out.tests;
    auto v = is_shattered(oracle, detail::subset_of(ground, mask), gamma, cfg, sopt);
    if (v.status == ShatterStatus::Shattered) {
      memo[mask] = Yes;
      return true;
    }
    const bool marginal = v.status == ShatterStatus::Marginal;
    memo[mask] = marginal ? Undecided : No;
    if (marginal) out.lower_bound_only = true;
    out.pruned.push_back({detail::subset_of(ground, mask), v.counterexample, std::nullopt, marginal});
    return false;
  };

  auto dfs = [&](auto&& self, std::uint64_t mask, std::size_t size, std::size_t next) -> void {
    if (size > best) {
      best = size;
      best_mask = mask;
    }
    for (std::size_t j = next; j < n && !exhausted; ++j) {
      if (size + (n - j) <= best) return;
      const std::uint64_t ext = mask | (std::uint64_t{1} << j);
      if (test(ext)) self(self, ext, size + 1, j + 1);
    }
  };
  dfs(dfs, 0, 0, 0);

  if (exhausted) out.lower_bound_only = true;
  out.size = best;
  out.subset = detail::subset_of(ground, best_mask);
  if (best > 0) {
    ShatterOptions keep = opt.shatter;
    keep.keep_witnesses = true;
    out.verdict = is_shattered(oracle, out.subset, gamma, cfg, keep);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Packing number

struct PackingResult {
  std::size_t size = 0;
  std::vector<std::size_t> subset;
};

/// Maximum subset with pairwise distances >= s: maximum independent set in
/// the graph with edges d(i, j) < s. Among maximum sets the lexicographically
/// first is returned.
template <class T>
PackingResult packing_number(const BasicMetricSpace<T>& space, const T& s) {
  if (!(s > 0)) throw InputError("packing_number: s must be positive");
  const std::size_t n = space.size();
  if (n > 64) throw InputError("packing_number: at most 64 points");
  std::vector<std::uint64_t> conflict(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && space(i, j) < s) conflict[i] |= std::uint64_t{1} << j;

  std::uint64_t best_mask = 0;
  int best = -1;
  // Inclusion-first in index order: leaves are met in lexicographic order, and
  // only a strictly larger set replaces the incumbent. The first leaf is the
  // greedy set, which serves as the initial bound.
  auto dfs = [&](auto&& self, std::uint64_t chosen, std::uint64_t cand, int size) -> void {
    if (cand == 0) {
      if (size > best) {
        best = size;
        best_mask = chosen;
      }
      return;
    }
    if (size + std::popcount(cand) <= best) return;
    const int j = std::countr_zero(cand);
    const std::uint64_t bit = std::uint64_t{1} << j;
    self(self, chosen | bit, cand & ~bit & ~conflict[j], size + 1);
    self(self, chosen, cand & ~bit, size);
  };
  const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  dfs(dfs, 0, all, 0);
  PackingResult out;
  out.size = static_cast<std::size_t>(best);
  for (std::size_t i = 0; i < n; ++i)
    if (best_mask >> i & 1U) out.subset.push_back(i);
  return out;
}

// ---------------------------------------------------------------------------
// Dimension reports

enum class DimStatus { Exact, Lower, Upper };

inline const char* to_string(DimStatus s) {
  switch (s) {
    case DimStatus::Exact: return "exact";
    case DimStatus::Lower: return "lower";
    case DimStatus::Upper: return "upper";
  }
  return "?";
}

struct DimEntry {
  double gamma = 0.0;
  std::uint64_t dim = 0;
  DimStatus status = DimStatus::Exact;
};

struct RateFit {
  double exponent = 0.0;   // slope of log dim against log(1/gamma)
  double intercept = 0.0;
  double residual = 0.0;   // max |log dim - fitted|
  bool super_polynomial = false;
  double threshold = 0.5;
};

struct DimensionReport {
  std::string label;
  std::vector<DimEntry> entries;  // any order
  std::optional<RateFit> fit;

  /// Entries sorted by increasing gamma.
  std::vector<DimEntry> sorted() const {
    auto e = entries;
    std::sort(e.begin(), e.end(), [](const DimEntry& a, const DimEntry& b) { return a.gamma < b.gamma; });
    return e;
  }

  /// dims nonincreasing in gamma, judged on the sound sides: a lower bound
  /// at a larger gamma may not exceed an upper bound at a smaller one.
  bool monotone() const {
    const auto e = sorted();
    for (std::size_t i = 0; i < e.size(); ++i)
      for (std::size_t j = i + 1; j < e.size(); ++j) {
        if (e[i].gamma == e[j].gamma) continue;
        const bool lo_j = e[j].status != DimStatus::Upper;
        const bool hi_i = e[i].status != DimStatus::Lower;
        if (lo_j && hi_i && e[j].dim > e[i].dim) return false;
      }
    return true;
  }
};

/// Least-squares slope of log(dim) against log(1/gamma). Growth is flagged
/// super-polynomial when the worst log deviation from the line exceeds
/// `threshold`.
inline RateFit fit_rate(const DimensionReport& report, double threshold = 0.5) {
  if (report.entries.size() < 4) throw InputError("fit_rate: at least 4 grid points are required");
  std::vector<double> xs, ys;
  for (const auto& e : report.entries) {
    if (!(e.gamma > 0.0)) throw InputError("fit_rate: gamma must be positive");
    if (e.dim == 0) throw InputError("fit_rate: zero dimension has no logarithm");
    xs.push_back(std::log(1.0 / e.gamma));
    ys.push_back(std::log(static_cast<double>(e.dim)));
  }
  const double k = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx < 1e-18) throw InputError("fit_rate: degenerate gamma grid");
  RateFit f;
  f.threshold = threshold;
  f.exponent = sxy / sxx;
  f.intercept = my - f.exponent * mx;
  for (std::size_t i = 0; i < xs.size(); ++i)
    f.residual = std::max(f.residual, std::abs(ys[i] - (f.intercept + f.exponent * xs[i])));
  f.super_polynomial = f.residual > threshold;
  return f;
}

// ---------------------------------------------------------------------------
// Submultiplicativity audit

struct AuditRow {
  double gamma1 = 0.0, gamma2 = 0.0, product = 0.0;
  std::uint64_t lhs = 0, rhs = 0;  // lower(dim(g1 g2)) + 1, (upper(dim g1) + 1)(upper(dim g2) + 1)
  bool pass = false;
};

struct AuditResult {
  std::vector<AuditRow> rows;
  std::vector<std::string> notices;
  bool all_pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }
};

/// Checks dim(g1 g2) + 1 <= (dim(g1) + 1)(dim(g2) + 1) for every pair
/// g1 <= g2 whose product is also in the map (1e-9 relative match), using the
/// lower bound on the left and upper bounds on the right.
inline AuditResult audit_submultiplicativity(const std::vector<DimEntry>& dims) {
  AuditResult out;
  auto lower = [](const DimEntry& e) -> std::uint64_t { return e.status == DimStatus::Upper ? 0 : e.dim; };
  auto upper = [](const DimEntry& e) -> std::optional<std::uint64_t> {
    if (e.status == DimStatus::Lower) return std::nullopt;
    return e.dim;
  };
  std::vector<DimEntry> e = dims;
  std::sort(e.begin(), e.end(), [](const DimEntry& a, const DimEntry& b) { return a.gamma < b.gamma; });
  for (std::size_t i = 0; i < e.size(); ++i)
    for (std::size_t j = i; j < e.size(); ++j) {
      const double prod = e[i].gamma * e[j].gamma;
      const DimEntry* target = nullptr;
      for (const auto& t : e)
        if (std::abs(t.gamma - prod) <= 1e-9 * prod) target = &t;
      if (!target) continue;
      const auto u1 = upper(e[i]), u2 = upper(e[j]);
      if (!u1 || !u2) {
        out.notices.push_back("skipped (" + std::to_string(e[i].gamma) + ", " + std::to_string(e[j].gamma) +
                              "): no upper bound on the right-hand side");
        continue;
      }
      AuditRow r;
      r.gamma1 = e[i].gamma;
      r.gamma2 = e[j].gamma;
      r.product = target->gamma;
      r.lhs = lower(*target) + 1;
      r.rhs = (*u1 + 1) * (*u2 + 1);
      r.pass = r.lhs <= r.rhs;
      out.rows.push_back(r);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Phi dimension

/// dim at gamma for a phi class, certified: the first min(phi(gamma), N)
/// points are shattered and, below N, point phi(gamma) + 1 is not realizable
/// on its own. Any larger set holds a point above phi(gamma), so the value is
/// exact.
inline DimEntry phi_dimension(const PhiClass& c, double gamma, const SolverConfig& cfg) {
  const std::uint64_t d = c.spec.dimension(gamma);
  const ConceptClassOracle o = c;
  if (d > 0) {
    auto v = is_shattered(o, iota_points(static_cast<std::size_t>(d)), gamma, cfg);
    if (v.status != ShatterStatus::Shattered) throw SolverFailure("phi_dimension: prefix not shattered", {}, 0.0, 0.0);
  }
  if (d < c.spec.N) {
    auto v = is_shattered(o, {static_cast<std::size_t>(d)}, gamma, cfg);
    if (v.status != ShatterStatus::NotShattered)
      throw SolverFailure("phi_dimension: next point unexpectedly realizable", {}, 0.0, 0.0);
  }
  return DimEntry{gamma, d, DimStatus::Exact};
}

// ---------------------------------------------------------------------------
// Exact minimum of the support over the simplex

struct MinSupport {
  Rational value;
  std::vector<Rational> mu;
};

/// min over mu in the simplex of sup_z sum_i mu_i y_i (M z)_i, z in the form,
/// as one LP through the dual of the inner maximum:
///   min b^T a + e^T b'  s.t.  M^T diag(y) mu - A^T a - E^T b' <= 0,
///   sum mu = 1, mu >= 0, a >= 0, b' free.
inline MinSupport min_support_exact(const PolyhedralForm<Rational>& f, const std::vector<int>& y) {
  const std::size_t n = f.values.size(), nz = f.vars(), na = f.a_ub.size(), ne = f.a_eq.size();
  const std::size_t nv = n + na + ne;
  LinearProgram<Rational> lp;
  lp.objective.assign(nv, Rational(0));
  for (std::size_t r = 0; r < na; ++r) lp.objective[n + r] = -f.b_ub[r];
  for (std::size_t r = 0; r < ne; ++r) lp.objective[n + na + r] = -f.b_eq[r];
  for (std::size_t k = 0; k < nz; ++k) {
    std::vector<Rational> row(nv, Rational(0));
    for (std::size_t i = 0; i < n; ++i) row[i] = y[i] * f.values[i][k];
    for (std::size_t r = 0; r < na; ++r) row[n + r] = -f.a_ub[r][k];
    for (std::size_t r = 0; r < ne; ++r) row[n + na + r] = -f.a_eq[r][k];
    lp.a_ub.push_back(std::move(row));
    lp.b_ub.push_back(Rational(0));
  }
  std::vector<Rational> sum(nv, Rational(0));
  for (std::size_t i = 0; i < n; ++i) sum[i] = 1;
  lp.a_eq.push_back(std::move(sum));
  lp.b_eq.push_back(Rational(1));
  lp.bounds.assign(nv, Bound<Rational>::nonneg());
  for (std::size_t r = 0; r < ne; ++r) lp.bounds[n + na + r] = Bound<Rational>::free();
  auto r = lp_solve(lp);
  if (r.status != LpStatus::Optimal) throw SolverFailure("min_support_exact: LP not optimal", {}, 0.0, 0.0);
  MinSupport out;
  out.value = -r.value;
  out.mu.assign(r.x.begin(), r.x.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

// ---------------------------------------------------------------------------
// Sample complexity

/// ceil((dim + ln(1/delta)) / eps): an order-of-magnitude figure with every
/// hidden constant set to 1.
inline std::uint64_t sample_complexity_estimate(std::uint64_t dim, double eps, double delta) {
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("sample_complexity_estimate: eps must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("sample_complexity_estimate: delta must lie in (0, 1)");
  const double v = (static_cast<double>(dim) + std::log(1.0 / delta)) / eps;
  // Guard against 20.000000000000004 style round-up.
  const double r = std::round(v);
  if (std::abs(v - r) <= 1e-9 * std::max(1.0, v)) return static_cast<std::uint64_t>(r);
  return static_cast<std::uint64_t>(std::ceil(v));
}

}  // namespace marginlab
