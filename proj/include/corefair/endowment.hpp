#pragma once

// Core with endowments: a coalition S may spend (1 - delta)|S|/n of every
// budget and keeps its utilities unscaled.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "corefair/enumerate.hpp"
#include "corefair/errors.hpp"
#include "corefair/instance.hpp"
#include "corefair/rng.hpp"
#include "corefair/verifier.hpp"

namespace corefair {

struct EndowmentParams {
  double delta = 0.0;
  double alpha = 0.0;
};

/// Pairwise rounding walk on the two lowest-indexed fractional coordinates.
/// Preserves every marginal, keeps the sum within {floor, ceil} of the input
/// sum and makes the indicators negatively correlated.
inline IntegralOutcome dependent_round(const FractionalOutcome& x, double budget,
                                       std::mt19937_64& rng) {
  constexpr double tol = 1e-9;
  std::vector<double> v = x.weights;
  double sum = 0.0;
  for (double& xj : v) {
    if (!(xj >= -tol && xj <= 1.0 + tol)) throw ValidationError("dependent_round: weights must lie in [0,1]");
    xj = std::clamp(xj, 0.0, 1.0);
    sum += xj;
  }
  if (sum > budget + 1e-7) throw ValidationError("dependent_round: weights exceed the budget");
  auto fractional = [&](double t) { return t > tol && t < 1.0 - tol; };
  auto snap = [&](double& t) {
    if (t <= tol) t = 0.0;
    if (t >= 1.0 - tol) t = 1.0;
  };
  for (;;) {
    std::size_t i = v.size();
    std::size_t j = v.size();
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!fractional(v[k])) continue;
      if (i == v.size()) {
        i = k;
      } else {
        j = k;
        break;
      }
    }
    if (i == v.size()) break;
    if (j == v.size()) {
      v[i] = bernoulli(rng, v[i]) ? 1.0 : 0.0;
      break;
    }
    const double a1 = std::min(1.0 - v[i], v[j]);
    const double a2 = std::min(v[i], 1.0 - v[j]);
    if (bernoulli(rng, a2 / (a1 + a2))) {
      v[i] += a1;
      v[j] -= a1;
    } else {
      v[i] -= a2;
      v[j] += a2;
    }
    snap(v[i]);
    snap(v[j]);
  }
  std::vector<Index> chosen;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k] > 0.5) chosen.push_back(k);
  }
  return IntegralOutcome(std::move(chosen));
}

inline IntegralOutcome dependent_round(const FractionalOutcome& x, double budget,
                                       std::uint64_t seed) {
  std::mt19937_64 rng = substream(seed, 0);
  return dependent_round(x, budget, rng);
}

/// Exhaustive endowment-core check on a packing instance. Coalitions are
/// scanned by ascending size; within a size the lexicographically smallest
/// blocking coalition is reported with its first deviation.
inline CoreCertificate endowment_core_check(const Instance& inst, const std::vector<double>& base,
                                            const EndowmentParams& p,
                                            const SizeCaps& caps = SizeCaps::from_env()) {
  detail::check_scalars(p.delta, p.alpha);
  if (p.delta > 1.0) throw ValidationError("endowment core: delta must be at most 1");
  detail::check_agents(inst, caps);
  require_packing(inst, "endowment core");
  const std::size_t n = inst.agents();
  CoreCertificate cert;
  cert.delta = p.delta;
  cert.alpha = p.alpha;
  cert.bounds.max_coalition_size = n;
  std::vector<double> threshold(n);
  for (std::size_t i = 0; i < n; ++i) threshold[i] = (1.0 + p.delta) * base[i] + p.alpha;
  std::vector<double> slack(n);
  for (std::size_t s = 1; s <= n; ++s) {
    const double scale = (1.0 - p.delta) * static_cast<double>(s) / static_cast<double>(n);
    std::optional<std::vector<Index>> best;
    IntegralOutcome best_dev;
    cert.bounds.deviations_scanned += for_each_distinct_outcome(
        inst, DeviationSpace::bases, caps,
        [&](const std::vector<Index>& c) {
          for (std::size_t i = 0; i < n; ++i) {
            double u = 0.0;
            for (Index j : c) u += inst.utility(i, j);
            slack[i] = u - threshold[i];
          }
          auto pick = detail::lexmin_coalition(slack, s);
          if (pick && (!best || *pick < *best)) {
            best = std::move(pick);
            best_dev = IntegralOutcome(c);
          }
          return true;
        },
        scale);
    if (best) {
      cert.blocked = true;
      cert.coalition = *best;
      cert.deviation = best_dev;
      const std::vector<double> u = utility_profile(inst, best_dev);
      for (Index i : cert.coalition) cert.slacks.push_back(u[i] - threshold[i]);
      return cert;
    }
  }
  return cert;
}

inline CoreCertificate endowment_core_check(const Instance& inst, const IntegralOutcome& c,
                                            double delta, double alpha,
                                            const SizeCaps& caps = SizeCaps::from_env()) {
  return endowment_core_check(inst, utility_profile(inst, c), EndowmentParams{delta, alpha}, caps);
}

}  // namespace corefair
