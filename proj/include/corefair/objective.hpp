#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "corefair/errors.hpp"
#include "corefair/instance.hpp"

namespace corefair {

struct SmoothNashParams {
  double ell = 1.0;
  /// With ell = 0, order outcomes by (agents with positive utility, log sum)
  /// instead of failing on ln 0.
  bool leximin = true;
};

/// Two-tier welfare value. For ell > 0 `positive` is always the agent count
/// and only `log_sum` matters.
struct WelfareKey {
  std::size_t positive = 0;
  double log_sum = 0.0;

  friend bool operator<(const WelfareKey& a, const WelfareKey& b) {
    if (a.positive != b.positive) return a.positive < b.positive;
    return a.log_sum < b.log_sum;
  }
};

namespace detail {

inline void check_params(const SmoothNashParams& p) {
  if (!(p.ell >= 0.0) || !std::isfinite(p.ell)) {
    throw ValidationError("smoothing constant ell must be finite and nonnegative");
  }
}

}  // namespace detail

/// Welfare key of a utility profile. Agents with an all-zero row are left out
/// when ell = 0; for ell > 0 they add the constant ln(ell).
inline WelfareKey welfare_key(const Instance& inst, const std::vector<double>& profile,
                              const SmoothNashParams& p) {
  detail::check_params(p);
  WelfareKey key;
  for (std::size_t i = 0; i < inst.agents(); ++i) {
    if (p.ell > 0.0) {
      key.log_sum += std::log(p.ell + profile[i]);
      ++key.positive;
    } else if (inst.is_zero_agent(i)) {
      continue;
    } else if (profile[i] > 0.0) {
      key.log_sum += std::log(profile[i]);
      ++key.positive;
    }
  }
  return key;
}

inline WelfareKey welfare_key(const Instance& inst, const IntegralOutcome& c,
                              const SmoothNashParams& p) {
  return welfare_key(inst, utility_profile(inst, c), p);
}

/// F(c) = sum_i ln(ell + u_i(c)). With ell = 0 and an agent left at zero
/// utility the value is -inf under the leximin convention (compare with
/// welfare_key instead) and a DomainError otherwise.
inline double smooth_nash(const Instance& inst, const std::vector<double>& profile,
                          const SmoothNashParams& p) {
  detail::check_params(p);
  double f = 0.0;
  for (std::size_t i = 0; i < inst.agents(); ++i) {
    if (p.ell > 0.0) {
      f += std::log(p.ell + profile[i]);
      continue;
    }
    if (inst.is_zero_agent(i)) continue;
    if (!(profile[i] > 0.0)) {
      if (!p.leximin) {
        throw DomainError("Nash welfare with ell = 0 is undefined: agent " +
                          std::to_string(i) + " has zero utility");
      }
      return -std::numeric_limits<double>::infinity();
    }
    f += std::log(profile[i]);
  }
  return f;
}

inline double smooth_nash(const Instance& inst, const IntegralOutcome& c,
                          const SmoothNashParams& p) {
  return smooth_nash(inst, utility_profile(inst, c), p);
}

/// F after replacing `removed` by `added`, minus F before, from a cached
/// profile. O(n * (|removed| + |added|)).
inline double delta_replace(const Instance& inst, const std::vector<double>& profile,
                            const std::vector<Index>& removed, const std::vector<Index>& added,
                            double ell) {
  double d = 0.0;
  for (std::size_t i = 0; i < inst.agents(); ++i) {
    if (ell == 0.0 && inst.is_zero_agent(i)) continue;
    double change = 0.0;
    for (Index j : removed) change -= inst.utility(i, j);
    for (Index j : added) change += inst.utility(i, j);
    if (change == 0.0) continue;
    d += std::log(ell + profile[i] + change) - std::log(ell + profile[i]);
  }
  return d;
}

/// F(c - remove + add) - F(c).
inline double delta_swap(const Instance& inst, const IntegralOutcome& c, Index remove,
                         Index add, const SmoothNashParams& p) {
  detail::check_params(p);
  if (!c.contains(remove)) {
    throw ValidationError("delta_swap: element " + std::to_string(remove) +
                          " is not in the outcome");
  }
  if (add >= inst.elements()) throw ValidationError("delta_swap: element out of range");
  if (c.contains(add)) {
    throw ValidationError("delta_swap: element " + std::to_string(add) +
                          " is already in the outcome");
  }
  return delta_replace(inst, utility_profile(inst, c), {remove}, {add}, p.ell);
}

}  // namespace corefair
