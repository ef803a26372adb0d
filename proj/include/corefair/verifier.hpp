#pragma once

// Exhaustive (delta, alpha)-core verification, proportionality, Pareto
// optimality and exact smooth Nash welfare maximization on small instances.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "corefair/enumerate.hpp"
#include "corefair/errors.hpp"
#include "corefair/fractional.hpp"
#include "corefair/instance.hpp"
#include "corefair/lp.hpp"
#include "corefair/objective.hpp"
#include "corefair/optimum.hpp"

namespace corefair {

enum class VerifyMode { integral, fractional };

inline const char* to_string(VerifyMode m) {
  return m == VerifyMode::integral ? "integral" : "fractional";
}

struct SearchBounds {
  VerifyMode mode = VerifyMode::integral;
  DeviationSpace space = DeviationSpace::bases;
  std::size_t deviations_scanned = 0;
  std::size_t coalitions_scanned = 0;
  std::size_t max_coalition_size = 0;
};

/// Blocked: coalition S (ascending indices), the deviation and the per-member
/// slack (|S|/n) u_i(c') - (1 + delta) u_i(c) - alpha. For the endowment core
/// the slack is u_i(c') - (1 + delta) u_i(c) - alpha.
struct CoreCertificate {
  bool blocked = false;
  double delta = 0.0;
  double alpha = 0.0;
  std::vector<Index> coalition;
  std::optional<IntegralOutcome> deviation;
  std::optional<FractionalOutcome> fractional_deviation;
  std::vector<double> slacks;
  SearchBounds bounds;
};

namespace detail {

/// Lexicographically smallest s-subset of agents whose slack is >= -tol and
/// that contains an agent with slack > tol.
inline std::optional<std::vector<Index>> lexmin_coalition(const std::vector<double>& slack,
                                                          std::size_t s) {
  std::vector<Index> ok;
  for (Index i = 0; i < slack.size(); ++i) {
    if (slack[i] >= -kTolerance) ok.push_back(i);
  }
  if (ok.size() < s || s == 0) return std::nullopt;
  std::vector<Index> pick(ok.begin(), ok.begin() + static_cast<long>(s));
  for (Index i : pick) {
    if (slack[i] > kTolerance) return pick;
  }
  for (std::size_t p = s; p < ok.size(); ++p) {
    if (slack[ok[p]] > kTolerance) {
      pick.back() = ok[p];
      return pick;
    }
  }
  return std::nullopt;
}

inline void check_agents(const Instance& inst, const SizeCaps& caps) {
  if (inst.agents() > caps.agents) {
    throw SizeCapError("agents", static_cast<double>(caps.agents),
                       static_cast<double>(inst.agents()));
  }
}

inline void check_scalars(double delta, double alpha) {
  if (!std::isfinite(delta) || delta < 0.0) throw ValidationError("delta must be finite and >= 0");
  if (!std::isfinite(alpha)) throw ValidationError("alpha must be finite");
}

/// Scans every deviation once; for each coalition size keeps the
/// lexicographically smallest blocking coalition and its first deviation.
/// `scaled` applies the |S|/n factor to deviating utilities; `budget_scale`
/// maps a coalition size to the packing scale of its deviation space (only
/// used for the endowment core, where the scan runs per size).
template <class SlackFn>
CoreCertificate integral_scan(const Instance& inst, const std::vector<double>& base,
                              double delta, double alpha, DeviationSpace space,
                              const SizeCaps& caps, SlackFn&& slack_for_size) {
  const std::size_t n = inst.agents();
  CoreCertificate cert;
  cert.delta = delta;
  cert.alpha = alpha;
  cert.bounds.mode = VerifyMode::integral;
  cert.bounds.space = space;
  cert.bounds.max_coalition_size = n;
  std::vector<std::optional<std::vector<Index>>> best(n + 1);
  std::vector<IntegralOutcome> best_dev(n + 1);
  std::vector<double> threshold(n);
  for (std::size_t i = 0; i < n; ++i) threshold[i] = (1.0 + delta) * base[i] + alpha;
  std::vector<double> u(n);
  std::vector<double> slack(n);
  cert.bounds.deviations_scanned =
      for_each_distinct_outcome(inst, space, caps, [&](const std::vector<Index>& c) {
        std::fill(u.begin(), u.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          const double* row = inst.utilities().row(i);
          for (Index j : c) u[i] += row[j];
        }
        for (std::size_t s = 1; s <= n; ++s) {
          for (std::size_t i = 0; i < n; ++i) slack[i] = slack_for_size(s, u[i]) - threshold[i];
          auto pick = lexmin_coalition(slack, s);
          if (pick && (!best[s] || *pick < *best[s])) {
            best[s] = std::move(pick);
            best_dev[s] = IntegralOutcome(c);
          }
        }
        return true;
      });
  // One candidate coalition per (deviation, size) pair.
  cert.bounds.coalitions_scanned = cert.bounds.deviations_scanned * n;
  for (std::size_t s = 1; s <= n; ++s) {
    if (!best[s]) continue;
    cert.blocked = true;
    cert.coalition = *best[s];
    cert.deviation = best_dev[s];
    const std::vector<double> dev_u = utility_profile(inst, *cert.deviation);
    for (Index i : cert.coalition) cert.slacks.push_back(slack_for_size(s, dev_u[i]) - threshold[i]);
    break;
  }
  return cert;
}

}  // namespace detail

/// Integral mode enumerates every feasible deviation (bases for matroids by
/// default) and every coalition size. Fractional mode solves, per coalition,
/// max t s.t. u_i(w) >= (n/|S|)((1 + delta) u_i(c) + alpha) + t over the
/// packing polytope and blocks when t* > 1e-7; a near-zero t* is settled by a
/// second LP that looks for a weakly dominating point whose best member gains
/// more than 1e-7.
inline CoreCertificate find_blocking_coalition(const Instance& inst,
                                               const std::vector<double>& base, double delta,
                                               double alpha, VerifyMode mode,
                                               DeviationSpace space = DeviationSpace::bases,
                                               const SizeCaps& caps = SizeCaps::from_env()) {
  detail::check_scalars(delta, alpha);
  detail::check_agents(inst, caps);
  if (base.size() != inst.agents()) throw ValidationError("utility profile has the wrong length");
  const std::size_t n = inst.agents();
  const double nd = static_cast<double>(n);
  if (mode == VerifyMode::integral) {
    return detail::integral_scan(inst, base, delta, alpha, space, caps, [&](std::size_t s, double u) {
      return static_cast<double>(s) / nd * u;
    });
  }

  const Packing& pk = require_packing(inst, "fractional verification");
  const std::size_t m = inst.elements();
  CoreCertificate cert;
  cert.delta = delta;
  cert.alpha = alpha;
  cert.bounds.mode = VerifyMode::fractional;
  cert.bounds.space = space;
  cert.bounds.max_coalition_size = n;
  std::vector<double> theta(n);
  for (std::size_t i = 0; i < n; ++i) theta[i] = (1.0 + delta) * base[i] + alpha;

  auto slacks_at = [&](const std::vector<Index>& s_set, const std::vector<double>& w) {
    const std::vector<double> u = utility_profile(inst, FractionalOutcome{w});
    std::vector<double> out;
    for (Index i : s_set) out.push_back(static_cast<double>(s_set.size()) / nd * u[i] - theta[i]);
    return out;
  };
  auto base_lp = [&](std::size_t extra) {
    LinearProgram lp;
    lp.objective.assign(m + extra, 0.0);
    lp.upper.assign(m + extra, 1.0);
    for (std::size_t e = 0; e < extra; ++e) lp.upper[m + e] = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < pk.a.rows(); ++k) {
      std::vector<double> row = pk.a.row_vector(k);
      row.resize(m + extra, 0.0);
      lp.add_row(std::move(row), RowSense::le, pk.b[k]);
    }
    return lp;
  };

  std::vector<Index> s_set;
  for (std::size_t size = 1; size <= n; ++size) {
    // Coalitions of this size in lexicographic order.
    std::vector<Index> idx(size);
    for (std::size_t k = 0; k < size; ++k) idx[k] = k;
    for (;;) {
      ++cert.bounds.coalitions_scanned;
      s_set = idx;
      const double scale = nd / static_cast<double>(size);
      LinearProgram lp = base_lp(2);
      lp.objective[m] = 1.0;
      lp.objective[m + 1] = -1.0;
      for (Index i : s_set) {
        std::vector<double> row = inst.utilities().row_vector(i);
        row.push_back(-1.0);
        row.push_back(1.0);
        lp.add_row(std::move(row), RowSense::ge, scale * theta[i]);
      }
      const LpResult r = solve_lp(lp);
      ++cert.bounds.deviations_scanned;
      if (r.status == LpStatus::optimal) {
        std::optional<std::vector<double>> hit;
        if (r.value > 1e-7) {
          hit = std::vector<double>(r.x.begin(), r.x.begin() + static_cast<long>(m));
        } else if (r.value >= -kTolerance) {
          LinearProgram lp2 = base_lp(0);
          for (Index i : s_set) {
            std::vector<double> row = inst.utilities().row_vector(i);
            for (double& v : row) v /= scale;
            for (std::size_t j = 0; j < m; ++j) lp2.objective[j] += row[j];
            lp2.add_row(std::move(row), RowSense::ge, theta[i]);
          }
          const LpResult r2 = solve_lp(lp2);
          if (r2.status == LpStatus::optimal) {
            // Strict gain uses the same 1e-7 margin as t*.
            const std::vector<double> sl = slacks_at(s_set, r2.x);
            if (*std::min_element(sl.begin(), sl.end()) >= -kTolerance &&
                *std::max_element(sl.begin(), sl.end()) > 1e-7) {
              hit = r2.x;
            }
          }
        }
        if (hit) {
          cert.blocked = true;
          cert.coalition = s_set;
          cert.fractional_deviation = FractionalOutcome{*hit};
          cert.slacks = slacks_at(s_set, *hit);
          return cert;
        }
      }
      // Next combination.
      std::size_t k = size;
      while (k > 0 && idx[k - 1] == n - size + k - 1) --k;
      if (k == 0) break;
      ++idx[k - 1];
      for (std::size_t t = k; t < size; ++t) idx[t] = idx[t - 1] + 1;
    }
  }
  return cert;
}

inline CoreCertificate find_blocking_coalition(const Instance& inst, const IntegralOutcome& c,
                                               double delta, double alpha, VerifyMode mode,
                                               DeviationSpace space = DeviationSpace::bases,
                                               const SizeCaps& caps = SizeCaps::from_env()) {
  return find_blocking_coalition(inst, utility_profile(inst, c), delta, alpha, mode, space, caps);
}

inline CoreCertificate find_blocking_coalition(const Instance& inst, const FractionalOutcome& w,
                                               double delta, double alpha, VerifyMode mode,
                                               DeviationSpace space = DeviationSpace::bases,
                                               const SizeCaps& caps = SizeCaps::from_env()) {
  return find_blocking_coalition(inst, utility_profile(inst, w), delta, alpha, mode, space, caps);
}

/// Recomputes a blocked certificate's slacks from scratch and checks the
/// blocking conditions.
inline bool revalidate(const Instance& inst, const std::vector<double>& base,
                       const CoreCertificate& cert, bool endowment = false) {
  if (!cert.blocked || cert.coalition.empty()) return false;
  std::vector<double> dev;
  if (cert.deviation) {
    dev = utility_profile(inst, *cert.deviation);
  } else if (cert.fractional_deviation) {
    dev = utility_profile(inst, *cert.fractional_deviation);
  } else {
    return false;
  }
  const double factor =
      endowment ? 1.0 : static_cast<double>(cert.coalition.size()) / static_cast<double>(inst.agents());
  bool strict = false;
  for (Index i : cert.coalition) {
    const double s = factor * dev[i] - (1.0 + cert.delta) * base[i] - cert.alpha;
    if (s < -kTolerance) return false;
    strict = strict || s > kTolerance;
  }
  return strict;
}

/// Smallest alpha at which the outcome is (delta, alpha)-core: the maximum,
/// over deviations c' and sizes s, of the s-th largest
/// (s/n) u_i(c') - (1 + delta) u_i(c). The outcome is blocked at any smaller
/// alpha and clean at any larger one.
inline double minimal_core_alpha(const Instance& inst, const std::vector<double>& base,
                                 double delta, DeviationSpace space = DeviationSpace::bases,
                                 const SizeCaps& caps = SizeCaps::from_env()) {
  detail::check_agents(inst, caps);
  const std::size_t n = inst.agents();
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> u(n);
  std::vector<double> g(n);
  for_each_distinct_outcome(inst, space, caps, [&](const std::vector<Index>& c) {
    std::fill(u.begin(), u.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (Index j : c) u[i] += inst.utility(i, j);
    }
    for (std::size_t s = 1; s <= n; ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        g[i] = static_cast<double>(s) / static_cast<double>(n) * u[i] - (1.0 + delta) * base[i];
      }
      std::nth_element(g.begin(), g.begin() + static_cast<long>(s - 1), g.end(), std::greater<>());
      best = std::max(best, g[s - 1]);
    }
    return true;
  });
  return best;
}

struct ProportionalityResult {
  bool proportional = true;
  /// u_i(c) - beta V_i / n.
  std::vector<double> margins;
};

inline ProportionalityResult is_proportional(const Instance& inst, const std::vector<double>& base,
                                             double beta, const std::vector<double>& optima) {
  if (optima.size() != inst.agents()) throw ValidationError("is_proportional: optima length mismatch");
  ProportionalityResult res;
  const double n = static_cast<double>(inst.agents());
  for (std::size_t i = 0; i < inst.agents(); ++i) {
    const double margin = base[i] - beta * optima[i] / n;
    res.margins.push_back(margin);
    if (margin < -kTolerance) res.proportional = false;
  }
  return res;
}

inline ProportionalityResult is_proportional(const Instance& inst, const IntegralOutcome& c,
                                             double beta) {
  return is_proportional(inst, utility_profile(inst, c), beta,
                         agent_optima(inst, OptimumMode::integral));
}

struct ParetoResult {
  bool pareto_optimal = true;
  std::optional<IntegralOutcome> dominating;
};

/// Pareto optimality: no deviation weakly improves everyone and strictly
/// improves someone. The first dominating outcome in enumeration order is the
/// witness.
inline ParetoResult is_pareto_optimal(const Instance& inst, const IntegralOutcome& c,
                                      DeviationSpace space = DeviationSpace::bases,
                                      const SizeCaps& caps = SizeCaps::from_env()) {
  const std::vector<double> base = utility_profile(inst, c);
  ParetoResult res;
  std::vector<double> u(inst.agents());
  for_each_distinct_outcome(inst, space, caps, [&](const std::vector<Index>& d) {
    std::fill(u.begin(), u.end(), 0.0);
    for (std::size_t i = 0; i < inst.agents(); ++i) {
      for (Index j : d) u[i] += inst.utility(i, j);
    }
    bool weak = true;
    bool strict = false;
    for (std::size_t i = 0; i < inst.agents(); ++i) {
      if (u[i] < base[i] - kTolerance) weak = false;
      if (u[i] > base[i] + kTolerance) strict = true;
    }
    if (weak && strict) {
      res.pareto_optimal = false;
      res.dominating = IntegralOutcome(d);
      return false;
    }
    return true;
  });
  return res;
}

/// Global maximizer of sum_i ln(ell + u_i(c)) over feasible outcomes (bases
/// for matroids); ell = 0 uses the two-tier key. Ties go to the
/// lexicographically smallest outcome.
inline IntegralOutcome exact_smooth_mnw(const Instance& inst, double ell,
                                        DeviationSpace space = DeviationSpace::bases,
                                        const SizeCaps& caps = SizeCaps::from_env()) {
  const SmoothNashParams params{ell, true};
  std::optional<WelfareKey> best_key;
  IntegralOutcome best;
  std::vector<double> u(inst.agents());
  for_each_distinct_outcome(inst, space, caps, [&](const std::vector<Index>& c) {
    std::fill(u.begin(), u.end(), 0.0);
    for (std::size_t i = 0; i < inst.agents(); ++i) {
      const double* row = inst.utilities().row(i);
      for (Index j : c) u[i] += row[j];
    }
    const WelfareKey key = welfare_key(inst, u, params);
    IntegralOutcome cand(c);
    if (!best_key) {
      best_key = key;
      best = std::move(cand);
      return true;
    }
    const double tol = 1e-12 * std::max(1.0, std::abs(best_key->log_sum));
    const bool better = key.positive > best_key->positive ||
                        (key.positive == best_key->positive && key.log_sum > best_key->log_sum + tol);
    const bool tie = key.positive == best_key->positive &&
                     std::abs(key.log_sum - best_key->log_sum) <= tol;
    if (better || (tie && cand < best)) {
      best_key = key;
      best = std::move(cand);
    }
    return true;
  });
  return best;
}

}  // namespace corefair
