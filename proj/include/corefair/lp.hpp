#pragma once

// Dense bounded-variable primal simplex.
//
// Variables live in [0, upper_j] (upper_j may be +inf). Rows are <=, >= or =.
// Upper bounds are handled implicitly through bound flips, so a box
// [0,1]^m costs nothing in tableau rows.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "corefair/errors.hpp"

namespace corefair {

enum class RowSense { le, ge, eq };
enum class LpStatus { optimal, infeasible, unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "unknown";
}

struct LinearProgram {
  std::vector<double> objective;
  bool maximize = true;
  std::vector<std::vector<double>> rows;
  std::vector<RowSense> senses;
  std::vector<double> rhs;
  /// Per-variable upper bound; empty means +inf for all.
  std::vector<double> upper;

  std::size_t variables() const noexcept { return objective.size(); }

  void add_row(std::vector<double> coeffs, RowSense sense, double b) {
    rows.push_back(std::move(coeffs));
    senses.push_back(sense);
    rhs.push_back(b);
  }
};

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  double value = 0.0;
  std::vector<double> x;
  std::size_t pivots = 0;
};

namespace detail {

class BoundedSimplex {
 public:
  static constexpr double kPivotTol = 1e-9;
  static constexpr double kCostTol = 1e-9;
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  explicit BoundedSimplex(const LinearProgram& lp) : n_(lp.variables()), rows_(lp.rows.size()) {
    if (lp.senses.size() != rows_ || lp.rhs.size() != rows_) {
      throw ValidationError("linear program: rows, senses and rhs disagree in length");
    }
    if (!lp.upper.empty() && lp.upper.size() != n_) {
      throw ValidationError("linear program: upper bounds need one entry per variable");
    }
    for (const auto& r : lp.rows) {
      if (r.size() != n_) throw ValidationError("linear program: row length mismatch");
    }

    // Column layout: originals, one slack/surplus per inequality row, one
    // artificial per >= or = row (after sign normalization).
    std::vector<double> b = lp.rhs;
    std::vector<RowSense> sense = lp.senses;
    std::vector<double> flip(rows_, 1.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      if (b[i] < 0.0) {
        flip[i] = -1.0;
        b[i] = -b[i];
        if (sense[i] == RowSense::le) {
          sense[i] = RowSense::ge;
        } else if (sense[i] == RowSense::ge) {
          sense[i] = RowSense::le;
        }
      }
    }
    std::size_t slacks = 0;
    std::size_t arts = 0;
    for (RowSense s : sense) {
      if (s != RowSense::eq) ++slacks;
      if (s != RowSense::le) ++arts;
    }
    cols_ = n_ + slacks + arts;
    first_art_ = n_ + slacks;
    t_.assign(rows_ * cols_, 0.0);
    upper_.assign(cols_, kInf);
    if (!lp.upper.empty()) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (!(lp.upper[j] >= 0.0)) {
          throw ValidationError("linear program: upper bounds must be nonnegative");
        }
        upper_[j] = lp.upper[j];
      }
    }
    at_upper_.assign(cols_, false);
    basis_.assign(rows_, 0);
    beta_ = b;

    std::size_t next_slack = n_;
    std::size_t next_art = first_art_;
    for (std::size_t i = 0; i < rows_; ++i) {
      double* row = &t_[i * cols_];
      for (std::size_t j = 0; j < n_; ++j) row[j] = flip[i] * lp.rows[i][j];
      if (sense[i] == RowSense::le) {
        row[next_slack] = 1.0;
        basis_[i] = next_slack++;
      } else if (sense[i] == RowSense::ge) {
        row[next_slack++] = -1.0;
        row[next_art] = 1.0;
        basis_[i] = next_art++;
      } else {
        row[next_art] = 1.0;
        basis_[i] = next_art++;
      }
    }
  }

  LpResult solve(const std::vector<double>& objective, bool maximize) {
    LpResult res;
    if (first_art_ < cols_) {
      std::vector<double> phase1(cols_, 0.0);
      for (std::size_t j = first_art_; j < cols_; ++j) phase1[j] = -1.0;
      if (!iterate(phase1, res.pivots)) {
        // Phase 1 is bounded below by construction.
        throw ConvergenceError("simplex phase 1 reported unboundedness", 0.0);
      }
      double infeas = 0.0;
      double scale = 1.0;
      for (std::size_t i = 0; i < rows_; ++i) {
        if (basis_[i] >= first_art_) infeas += beta_[i];
        scale = std::max(scale, std::abs(beta_[i]));
      }
      if (infeas > 1e-7 * scale) {
        res.status = LpStatus::infeasible;
        return res;
      }
      for (std::size_t j = first_art_; j < cols_; ++j) {
        upper_[j] = 0.0;
        at_upper_[j] = false;
      }
    }
    std::vector<double> c(cols_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) c[j] = maximize ? objective[j] : -objective[j];
    if (!iterate(c, res.pivots)) {
      res.status = LpStatus::unbounded;
      return res;
    }
    res.status = LpStatus::optimal;
    res.x.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      if (at_upper_[j]) res.x[j] = upper_[j];
    }
    for (std::size_t i = 0; i < rows_; ++i) {
      if (basis_[i] < n_) res.x[basis_[i]] = beta_[i];
    }
    for (std::size_t j = 0; j < n_; ++j) {
      double u = upper_[j];
      res.x[j] = std::clamp(res.x[j], 0.0, u);
    }
    double v = 0.0;
    for (std::size_t j = 0; j < n_; ++j) v += objective[j] * res.x[j];
    res.value = v;
    return res;
  }

 private:
  double& at(std::size_t i, std::size_t j) { return t_[i * cols_ + j]; }

  bool is_basic(std::size_t j) const {
    return std::find(basis_.begin(), basis_.end(), j) != basis_.end();
  }

  // Maximizes c.x from the current basis. Returns false on unboundedness.
  bool iterate(const std::vector<double>& c, std::size_t& pivots) {
    std::vector<char> basic(cols_, 0);
    for (std::size_t b : basis_) basic[b] = 1;
    std::vector<double> d(cols_);
    auto recompute_costs = [&] {
      for (std::size_t j = 0; j < cols_; ++j) {
        double s = c[j];
        for (std::size_t i = 0; i < rows_; ++i) s -= c[basis_[i]] * t_[i * cols_ + j];
        d[j] = basic[j] ? 0.0 : s;
      }
    };
    recompute_costs();

    std::size_t stall = 0;
    const std::size_t cap = 50000 + 200 * (rows_ + cols_);
    for (std::size_t iter = 0;; ++iter) {
      if (iter > cap) throw ConvergenceError("simplex iteration cap exceeded", 0.0);
      if (iter % 64 == 63) recompute_costs();
      const bool bland = stall > 30;
      std::size_t enter = cols_;
      double best = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (basic[j] || upper_[j] == 0.0) continue;
        const double gain = at_upper_[j] ? -d[j] : d[j];
        if (gain <= kCostTol) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (gain > best) {
          best = gain;
          enter = j;
        }
      }
      if (enter == cols_) return true;

      const double dir = at_upper_[enter] ? -1.0 : 1.0;
      double theta = upper_[enter];
      std::size_t leave = rows_;
      bool leave_to_upper = false;
      for (std::size_t i = 0; i < rows_; ++i) {
        const double a = dir * t_[i * cols_ + enter];
        const std::size_t bv = basis_[i];
        double limit;
        bool to_upper;
        if (a > kPivotTol) {
          limit = std::max(0.0, beta_[i]) / a;
          to_upper = false;
        } else if (a < -kPivotTol && upper_[bv] < kInf) {
          limit = std::max(0.0, upper_[bv] - beta_[i]) / -a;
          to_upper = true;
        } else {
          continue;
        }
        if (limit < theta - 1e-12 ||
            (leave != rows_ && std::abs(limit - theta) <= 1e-12 && bv < basis_[leave])) {
          theta = limit;
          leave = i;
          leave_to_upper = to_upper;
        }
      }
      if (theta == kInf) return false;
      stall = theta > 1e-12 ? 0 : stall + 1;

      for (std::size_t i = 0; i < rows_; ++i) {
        beta_[i] -= dir * theta * t_[i * cols_ + enter];
      }
      if (leave == rows_) {
        at_upper_[enter] = !at_upper_[enter];
        continue;
      }

      const double entering_value = (at_upper_[enter] ? upper_[enter] : 0.0) + dir * theta;
      const std::size_t old = basis_[leave];
      pivot(leave, enter);
      ++pivots;
      basic[old] = 0;
      basic[enter] = 1;
      at_upper_[old] = leave_to_upper;
      at_upper_[enter] = false;
      beta_[leave] = entering_value;

      const double de = d[enter];
      const double* prow = &t_[leave * cols_];
      for (std::size_t j = 0; j < cols_; ++j) d[j] -= de * prow[j];
      d[enter] = 0.0;
    }
  }

  void pivot(std::size_t r, std::size_t s) {
    double* prow = &t_[r * cols_];
    const double inv = 1.0 / prow[s];
    for (std::size_t j = 0; j < cols_; ++j) prow[j] *= inv;
    prow[s] = 1.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i == r) continue;
      double* row = &t_[i * cols_];
      const double f = row[s];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols_; ++j) row[j] -= f * prow[j];
      row[s] = 0.0;
    }
    basis_[r] = s;
  }

  std::size_t n_;
  std::size_t rows_;
  std::size_t cols_ = 0;
  std::size_t first_art_ = 0;
  std::vector<double> t_;
  std::vector<double> upper_;
  std::vector<bool> at_upper_;
  std::vector<std::size_t> basis_;
  std::vector<double> beta_;
};

}  // namespace detail

/// Solves the program. Never throws for infeasible or unbounded programs;
/// those come back as distinct statuses.
inline LpResult solve_lp(const LinearProgram& lp) {
  detail::BoundedSimplex s(lp);
  return s.solve(lp.objective, lp.maximize);
}

/// As solve_lp, but turns a non-optimal status into an exception.
inline LpResult solve_lp_or_throw(const LinearProgram& lp, const std::string& what) {
  LpResult r = solve_lp(lp);
  if (r.status == LpStatus::infeasible) throw InfeasibleError(what + ": LP infeasible");
  if (r.status == LpStatus::unbounded) {
    throw ValidationError(what + ": LP unbounded");
  }
  return r;
}

}  // namespace corefair
