#pragma once

#include "marginlab/common.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace marginlab {

/// Variable bounds; nullopt means unbounded on that side.
template <class T>
struct Bound {
  std::optional<T> lower = T(0);
  std::optional<T> upper;

  static Bound free() { return Bound{std::nullopt, std::nullopt}; }
  static Bound nonneg() { return Bound{}; }
  static Bound box(T lo, T hi) { return Bound{std::move(lo), std::move(hi)}; }
};

/// maximize c^T x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  bounds.
/// Empty `bounds` means x >= 0.
template <class T>
struct LinearProgram {
  std::vector<T> objective;
  std::vector<std::vector<T>> a_ub;
  std::vector<T> b_ub;
  std::vector<std::vector<T>> a_eq;
  std::vector<T> b_eq;
  std::vector<Bound<T>> bounds;

  std::size_t num_vars() const { return objective.size(); }
};

/// The problem after bound elimination:
/// maximize c^T z + offset  s.t.  A_ub z <= b_ub, A_eq z = b_eq, z >= 0.
/// User inequality rows come first in A_ub, followed by rows for finite upper
/// bounds. Original variables are recovered as x_j = shift_j + sum coeff * z.
template <class T>
struct StandardForm {
  std::vector<T> c;
  T offset = 0;
  std::vector<std::vector<T>> a_ub;
  std::vector<T> b_ub;
  std::vector<std::vector<T>> a_eq;
  std::vector<T> b_eq;
  std::size_t user_ub_rows = 0;
  std::vector<T> shift;
  std::vector<std::vector<std::pair<std::size_t, int>>> columns;  // x_j -> (z index, +-1)

  std::size_t num_vars() const { return c.size(); }

  std::vector<T> to_original(const std::vector<T>& z, bool direction = false) const {
    std::vector<T> x(columns.size(), T(0));
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (!direction) x[j] = shift[j];
      for (auto [col, sgn] : columns[j]) x[j] += sgn > 0 ? z[col] : T(-z[col]);
    }
    return x;
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
  }
  return "?";
}

/// Outcome of lp_solve. Dual and Farkas vectors refer to the rows of the
/// StandardForm (`dual_ub` covers user rows first, then bound rows).
template <class T>
struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<T> x;        // original variables (Optimal)
  T value = 0;             // objective (Optimal)
  std::vector<T> z;        // standard-form primal
  std::vector<T> dual_ub;  // y >= 0 with A_ub^T y + A_eq^T w >= c
  std::vector<T> dual_eq;
  std::vector<T> farkas_ub;  // Infeasible: y_ub >= 0, y^T A >= 0, y^T b < 0
  std::vector<T> farkas_eq;
  std::vector<T> ray;        // Unbounded: direction in original variables
  std::size_t iterations = 0;

  T dual_value(const StandardForm<T>& sf) const {
    T v = sf.offset;
    for (std::size_t i = 0; i < dual_ub.size(); ++i) v += dual_ub[i] * sf.b_ub[i];
    for (std::size_t i = 0; i < dual_eq.size(); ++i) v += dual_eq[i] * sf.b_eq[i];
    return v;
  }
};

template <class T>
struct LpOptions {
  std::size_t max_iter = 50000;
  double tol = 1e-7;  // float-mode verification tolerance
};

template <class T>
StandardForm<T> standardize(const LinearProgram<T>& lp) {
  const std::size_t n = lp.num_vars();
  if (lp.a_ub.size() != lp.b_ub.size()) throw InputError("lp: A_ub/b_ub row count mismatch");
  if (lp.a_eq.size() != lp.b_eq.size()) throw InputError("lp: A_eq/b_eq row count mismatch");
  for (const auto& r : lp.a_ub)
    if (r.size() != n) throw InputError("lp: A_ub column count mismatch");
  for (const auto& r : lp.a_eq)
    if (r.size() != n) throw InputError("lp: A_eq column count mismatch");
  if (!lp.bounds.empty() && lp.bounds.size() != n) throw InputError("lp: bounds size mismatch");
  if constexpr (!ScalarTraits<T>::exact) {
    auto chk = [](const std::vector<T>& v) {
      for (const auto& x : v)
        if (!std::isfinite(x)) throw InputError("lp: non-finite entry");
    };
    chk(lp.objective);
    chk(lp.b_ub);
    chk(lp.b_eq);
    for (const auto& r : lp.a_ub) chk(r);
    for (const auto& r : lp.a_eq) chk(r);
  }

  StandardForm<T> sf;
  sf.shift.assign(n, T(0));
  sf.columns.resize(n);
  std::vector<std::pair<std::size_t, T>> upper_rows;  // (z col, bound)
  std::size_t nz = 0;
  for (std::size_t j = 0; j < n; ++j) {
    Bound<T> b = lp.bounds.empty() ? Bound<T>{} : lp.bounds[j];
    if (b.lower && b.upper && *b.upper < *b.lower) throw InputError("lp: empty bound interval");
    if (b.lower) {
      sf.shift[j] = *b.lower;
      sf.columns[j].push_back({nz, +1});
      if (b.upper) upper_rows.push_back({nz, T(*b.upper - *b.lower)});
      ++nz;
    } else if (b.upper) {
      sf.shift[j] = *b.upper;
      sf.columns[j].push_back({nz, -1});
      ++nz;
    } else {
      sf.columns[j].push_back({nz, +1});
      sf.columns[j].push_back({nz + 1, -1});
      nz += 2;
    }
  }
  auto map_row = [&](const std::vector<T>& row, T rhs, std::vector<T>& out, T& out_rhs) {
    out.assign(nz, T(0));
    out_rhs = rhs;
    for (std::size_t j = 0; j < n; ++j) {
      if (row[j] == 0) continue;
      out_rhs -= row[j] * sf.shift[j];
      for (auto [col, sgn] : sf.columns[j]) out[col] += sgn > 0 ? row[j] : T(-row[j]);
    }
  };
  sf.c.assign(nz, T(0));
  {
    T rhs = 0;
    map_row(lp.objective, T(0), sf.c, rhs);
    sf.offset = -rhs;
  }
  for (std::size_t i = 0; i < lp.a_ub.size(); ++i) {
    std::vector<T> row;
    T rhs;
    map_row(lp.a_ub[i], lp.b_ub[i], row, rhs);
    sf.a_ub.push_back(std::move(row));
    sf.b_ub.push_back(rhs);
  }
  sf.user_ub_rows = sf.a_ub.size();
  for (auto& [col, ub] : upper_rows) {
    std::vector<T> row(nz, T(0));
    row[col] = 1;
    sf.a_ub.push_back(std::move(row));
    sf.b_ub.push_back(ub);
  }
  for (std::size_t i = 0; i < lp.a_eq.size(); ++i) {
    std::vector<T> row;
    T rhs;
    map_row(lp.a_eq[i], lp.b_eq[i], row, rhs);
    sf.a_eq.push_back(std::move(row));
    sf.b_eq.push_back(rhs);
  }
  return sf;
}

namespace detail {

// Dense two-phase tableau simplex with Bland's rule.
template <class T>
class Tableau {
  using Tr = ScalarTraits<T>;

 public:
  Tableau(const StandardForm<T>& sf, const LpOptions<T>& opt) : sf_(sf), opt_(opt) {
    nz_ = sf.num_vars();
    mub_ = sf.a_ub.size();
    meq_ = sf.a_eq.size();
    m_ = mub_ + meq_;
    flipped_.assign(m_, false);
    identity_col_.assign(m_, 0);
    // Column layout: [z | slacks (one per ub row) | artificials]
    std::size_t n_art = 0;
    for (std::size_t i = 0; i < mub_; ++i)
      if (sf.b_ub[i] < 0) ++n_art;
    n_art += meq_;
    slack0_ = nz_;
    art0_ = nz_ + mub_;
    ncols_ = art0_ + n_art;
    tab_.assign(m_, std::vector<T>(ncols_ + 1, T(0)));
    basis_.assign(m_, 0);
    std::size_t art = art0_;
    for (std::size_t i = 0; i < mub_; ++i) {
      const bool flip = sf.b_ub[i] < 0;
      flipped_[i] = flip;
      for (std::size_t j = 0; j < nz_; ++j) tab_[i][j] = flip ? T(-sf.a_ub[i][j]) : sf.a_ub[i][j];
      tab_[i][slack0_ + i] = flip ? T(-1) : T(1);
      tab_[i][ncols_] = flip ? T(-sf.b_ub[i]) : sf.b_ub[i];
      if (flip) {
        tab_[i][art] = 1;
        identity_col_[i] = art;
        basis_[i] = art++;
      } else {
        identity_col_[i] = slack0_ + i;
        basis_[i] = slack0_ + i;
      }
    }
    for (std::size_t e = 0; e < meq_; ++e) {
      const std::size_t i = mub_ + e;
      const bool flip = sf.b_eq[e] < 0;
      flipped_[i] = flip;
      for (std::size_t j = 0; j < nz_; ++j) tab_[i][j] = flip ? T(-sf.a_eq[e][j]) : sf.a_eq[e][j];
      tab_[i][ncols_] = flip ? T(-sf.b_eq[e]) : sf.b_eq[e];
      tab_[i][art] = 1;
      identity_col_[i] = art;
      basis_[i] = art++;
    }
  }

  LpResult<T> solve() {
    LpResult<T> res;
    // Phase 1: maximize -sum(artificials).
    if (ncols_ > art0_) {
      std::vector<T> c1(ncols_, T(0));
      for (std::size_t j = art0_; j < ncols_; ++j) c1[j] = -1;
      set_objective(c1);
      run(/*allow_artificial=*/true, res);
      if (Tr::is_negative(obj_[ncols_])) {
        res.status = LpStatus::Infeasible;
        auto y = row_duals(c1);
        res.farkas_ub.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(mub_));
        res.farkas_eq.assign(y.begin() + static_cast<std::ptrdiff_t>(mub_), y.end());
        return res;
      }
      drive_out_artificials();
    }
    // Phase 2.
    std::vector<T> c2(ncols_, T(0));
    for (std::size_t j = 0; j < nz_; ++j) c2[j] = sf_.c[j];
    set_objective(c2);
    auto entering_unbounded = run(/*allow_artificial=*/false, res);
    if (entering_unbounded) {
      res.status = LpStatus::Unbounded;
      std::vector<T> dz(nz_, T(0));
      const std::size_t e = *entering_unbounded;
      if (e < nz_) dz[e] = 1;
      for (std::size_t i = 0; i < m_; ++i)
        if (basis_[i] < nz_) dz[basis_[i]] = -tab_[i][e];
      res.ray = sf_.to_original(dz, /*direction=*/true);
      return res;
    }
    res.status = LpStatus::Optimal;
    res.z.assign(nz_, T(0));
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < nz_) res.z[basis_[i]] = tab_[i][ncols_];
    res.x = sf_.to_original(res.z);
    res.value = obj_[ncols_] + sf_.offset;
    auto y = row_duals(c2);
    res.dual_ub.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(mub_));
    res.dual_eq.assign(y.begin() + static_cast<std::ptrdiff_t>(mub_), y.end());
    return res;
  }

 private:
  void set_objective(const std::vector<T>& c) {
    obj_.assign(ncols_ + 1, T(0));
    for (std::size_t j = 0; j < ncols_; ++j) obj_[j] = -c[j];
    for (std::size_t i = 0; i < m_; ++i) {
      const T& cb = c[basis_[i]];
      if (cb == 0) continue;
      for (std::size_t j = 0; j <= ncols_; ++j)
        if (tab_[i][j] != 0) obj_[j] += cb * tab_[i][j];
    }
  }

  // y_i = c_B^T B^{-1} e_i, expressed for the original (unflipped) row.
  std::vector<T> row_duals(const std::vector<T>& c) const {
    std::vector<T> y(m_, T(0));
    for (std::size_t r = 0; r < m_; ++r) {
      T s = 0;
      const std::size_t col = identity_col_[r];
      for (std::size_t i = 0; i < m_; ++i) {
        const T& cb = c[basis_[i]];
        if (cb != 0 && tab_[i][col] != 0) s += cb * tab_[i][col];
      }
      y[r] = flipped_[r] ? T(-s) : s;
    }
    return y;
  }

  void pivot(std::size_t r, std::size_t e) {
    const T inv = T(1) / tab_[r][e];
    for (auto& x : tab_[r])
      if (x != 0) x *= inv;
    tab_[r][e] = 1;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      const T f = tab_[i][e];
      if (f == 0) continue;
      for (std::size_t j = 0; j <= ncols_; ++j)
        if (tab_[r][j] != 0) tab_[i][j] -= f * tab_[r][j];
      tab_[i][e] = 0;
    }
    const T f = obj_[e];
    if (f != 0) {
      for (std::size_t j = 0; j <= ncols_; ++j)
        if (tab_[r][j] != 0) obj_[j] -= f * tab_[r][j];
      obj_[e] = 0;
    }
    basis_[r] = e;
    ++pivots_;
  }

  // Returns the entering column if the objective is unbounded along it.
  std::optional<std::size_t> run(bool allow_artificial, LpResult<T>& res) {
    const std::size_t limit = allow_artificial ? ncols_ : art0_;
    for (;;) {
      if constexpr (!Tr::exact) {
        if (pivots_ >= opt_.max_iter) {
          throw SolverFailure("lp: iteration limit reached", {}, to_double(obj_[ncols_]), 0.0);
        }
      }
      std::optional<std::size_t> enter;
      for (std::size_t j = 0; j < limit; ++j) {
        if (Tr::is_negative(obj_[j])) {
          enter = j;
          break;
        }
      }
      res.iterations = pivots_;
      if (!enter) return std::nullopt;
      const std::size_t e = *enter;
      std::optional<std::size_t> leave;
      T best_ratio = 0;
      T tie = 0;
      if constexpr (!Tr::exact) tie = Tr::eps;
      for (std::size_t i = 0; i < m_; ++i) {
        if (!Tr::is_positive(tab_[i][e])) continue;
        T ratio = tab_[i][ncols_] / tab_[i][e];
        if (!leave || ratio < best_ratio - tie) {
          leave = i;
          best_ratio = ratio;
        } else if (ratio <= best_ratio + tie && basis_[i] < basis_[*leave]) {
          leave = i;
          if (ratio < best_ratio) best_ratio = ratio;
        }
      }
      if (!leave) return e;
      pivot(*leave, e);
    }
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < art0_) continue;
      for (std::size_t j = 0; j < art0_; ++j) {
        if (!Tr::is_zero(tab_[i][j])) {
          pivot(i, j);
          break;
        }
      }
      // A row with no nonzero structural entry is redundant; its artificial
      // stays basic at zero and can never re-enter.
    }
  }

  const StandardForm<T>& sf_;
  LpOptions<T> opt_;
  std::size_t nz_ = 0, mub_ = 0, meq_ = 0, m_ = 0, slack0_ = 0, art0_ = 0, ncols_ = 0;
  std::vector<std::vector<T>> tab_;
  std::vector<T> obj_;
  std::vector<std::size_t> basis_;
  std::vector<bool> flipped_;
  std::vector<std::size_t> identity_col_;
  std::size_t pivots_ = 0;
};

}  // namespace detail

/// Residuals of an Optimal result against the standard form: primal
/// infeasibility, dual infeasibility, complementary slackness, duality gap.
template <class T>
struct LpResiduals {
  T primal = 0, dual = 0, slackness = 0, gap = 0;
  T worst() const {
    T w = primal;
    for (const T* v : {&dual, &slackness, &gap})
      if (*v > w) w = *v;
    return w;
  }
};

template <class T>
LpResiduals<T> lp_residuals(const StandardForm<T>& sf, const LpResult<T>& r) {
  auto absv = [](const T& x) { return x < 0 ? T(-x) : x; };
  auto upd = [](T& acc, const T& v) {
    if (v > acc) acc = v;
  };
  LpResiduals<T> out;
  const std::size_t n = sf.num_vars();
  for (const auto& z : r.z) upd(out.primal, T(-z));
  std::vector<T> reduced(n, T(0));
  for (std::size_t j = 0; j < n; ++j) reduced[j] = -sf.c[j];
  for (std::size_t i = 0; i < sf.a_ub.size(); ++i) {
    T ax = 0;
    for (std::size_t j = 0; j < n; ++j) ax += sf.a_ub[i][j] * r.z[j];
    const T slack = sf.b_ub[i] - ax;
    upd(out.primal, T(-slack));
    upd(out.dual, T(-r.dual_ub[i]));
    upd(out.slackness, absv(T(slack * r.dual_ub[i])));
    for (std::size_t j = 0; j < n; ++j) reduced[j] += sf.a_ub[i][j] * r.dual_ub[i];
  }
  for (std::size_t i = 0; i < sf.a_eq.size(); ++i) {
    T ax = 0;
    for (std::size_t j = 0; j < n; ++j) ax += sf.a_eq[i][j] * r.z[j];
    upd(out.primal, absv(T(sf.b_eq[i] - ax)));
    for (std::size_t j = 0; j < n; ++j) reduced[j] += sf.a_eq[i][j] * r.dual_eq[i];
  }
  for (std::size_t j = 0; j < n; ++j) {
    upd(out.dual, T(-reduced[j]));
    upd(out.slackness, absv(T(reduced[j] * r.z[j])));
  }
  out.gap = absv(T(r.value - r.dual_value(sf)));
  return out;
}

/// Re-checks a Farkas certificate with one pass over the rows:
/// y_ub >= 0, y^T A >= 0 componentwise, y^T b < 0.
template <class T>
bool verify_farkas(const StandardForm<T>& sf, const std::vector<T>& y_ub, const std::vector<T>& y_eq,
                   double tol = 1e-9) {
  if (y_ub.size() != sf.a_ub.size() || y_eq.size() != sf.a_eq.size()) return false;
  const T slack = ScalarTraits<T>::exact ? T(0) : ScalarTraits<T>::from_double(tol);
  const std::size_t n = sf.num_vars();
  std::vector<T> ya(n, T(0));
  T yb = 0;
  for (std::size_t i = 0; i < y_ub.size(); ++i) {
    if (y_ub[i] < -slack) return false;
    for (std::size_t j = 0; j < n; ++j) ya[j] += y_ub[i] * sf.a_ub[i][j];
    yb += y_ub[i] * sf.b_ub[i];
  }
  for (std::size_t i = 0; i < y_eq.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j) ya[j] += y_eq[i] * sf.a_eq[i][j];
    yb += y_eq[i] * sf.b_eq[i];
  }
  for (const auto& v : ya)
    if (v < -slack) return false;
  return yb < -slack;
}

/// Solves the LP. Rational mode is exact; float mode verifies the optimal basis
/// through complementary-slackness residuals and throws SolverFailure when they
/// exceed `opt.tol` or the pivot budget runs out.
template <class T>
LpResult<T> lp_solve(const LinearProgram<T>& lp, const LpOptions<T>& opt = {}) {
  const StandardForm<T> sf = standardize(lp);
  detail::Tableau<T> tab(sf, opt);
  LpResult<T> res = tab.solve();
  if constexpr (!ScalarTraits<T>::exact) {
    if (res.status == LpStatus::Optimal) {
      auto r = lp_residuals(sf, res);
      double scale = 1.0;
      for (double v : sf.b_ub) scale = std::max(scale, std::abs(v));
      for (double v : sf.b_eq) scale = std::max(scale, std::abs(v));
      for (double v : sf.c) scale = std::max(scale, std::abs(v));
      if (r.worst() > opt.tol * scale) {
        throw SolverFailure("lp: optimality residual " + std::to_string(r.worst()) + " exceeds tolerance",
                            res.x, res.value, r.worst());
      }
    }
  }
  return res;
}

}  // namespace marginlab
