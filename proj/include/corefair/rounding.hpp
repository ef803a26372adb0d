#pragma once

// Randomized rounding of a mix of the fractional core and the MPF outcome,
// with grouping diagnostics and a tail-bound tester.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "corefair/errors.hpp"
#include "corefair/fractional.hpp"
#include "corefair/instance.hpp"
#include "corefair/report.hpp"
#include "corefair/rng.hpp"

namespace corefair {

struct RoundingConfig {
  double delta = 0.5;
  double gamma = 0.0625;
  std::size_t retries = 200;
  std::uint64_t seed = 0;

  static RoundingConfig make(double delta, std::uint64_t seed, std::size_t retries = 200) {
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("rounding: delta must lie in (0, 1)");
    if (retries == 0) throw ValidationError("rounding: retries must be positive");
    return RoundingConfig{delta, delta / 8.0, retries, seed};
  }
};

/// Iterated natural logarithm: applications of ln until the value is <= 1.
inline std::size_t log_star(double x) {
  std::size_t k = 0;
  while (x > 1.0) {
    x = std::log(x);
    ++k;
  }
  return k;
}

/// Groups agents by ln V_i. Q_0 = ln V_max, Q_{l+1} = 2 ln Q_l while the next
/// level stays at or above T = max(2, ln(R max(1, log* V_max) / gamma^3)).
/// Heavy group l < L holds Q_l >= ln V_i >= Q_{l+1} (first match); the light
/// group L holds the rest. The light-group level used in thresholds is
/// max(Q_L, T).
inline GroupingDiagnostics grouping(const std::vector<double>& optima, const RoundingConfig& cfg,
                                    double r) {
  GroupingDiagnostics g;
  const std::size_t n = optima.size();
  if (n == 0) throw ValidationError("grouping: no agents");
  const double vmax = *std::max_element(optima.begin(), optima.end());
  const double lstar = std::max(1.0, static_cast<double>(log_star(vmax)));
  g.threshold = std::max(2.0, std::log(std::max(r, 1e-300) * lstar / std::pow(cfg.gamma, 3)));
  g.group_of.assign(n, 0);
  if (!(vmax > 1.0)) {
    g.degenerate = true;
    g.levels = 0;
    g.q_levels = {vmax > 0.0 ? std::log(vmax) : -std::numeric_limits<double>::infinity()};
    g.q_light = g.threshold;
    g.group_sizes = {n};
    return g;
  }
  g.q_levels.push_back(std::log(vmax));
  if (g.q_levels.front() >= g.threshold) {
    for (;;) {
      const double next = 2.0 * std::log(g.q_levels.back());
      if (!(next >= g.threshold)) break;
      g.q_levels.push_back(next);
    }
  }
  g.levels = g.q_levels.front() >= g.threshold ? g.q_levels.size() - 1 : 0;
  g.q_light = std::max(g.q_levels[g.levels], g.threshold);
  g.group_sizes.assign(g.levels + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double lv = optima[i] > 0.0 ? std::log(optima[i]) : -std::numeric_limits<double>::infinity();
    std::size_t grp = g.levels;
    for (std::size_t l = 0; l < g.levels; ++l) {
      if (lv >= g.q_levels[l + 1]) {
        grp = l;
        break;
      }
    }
    g.group_of[i] = grp;
    ++g.group_sizes[grp];
  }
  return g;
}

/// Fills the violation sets and the per-group bound flags.
inline GroupingDiagnostics violation_sets(const Instance& inst, const FractionalOutcome& x,
                                          const IntegralOutcome& rounded,
                                          GroupingDiagnostics diag, const RoundingConfig& cfg) {
  const std::vector<double> u_star = utility_profile(inst, x);
  const std::vector<double> u_hat = utility_profile(inst, rounded);
  const double gamma = cfg.gamma;
  const std::size_t L = diag.levels;
  diag.violations.assign(L + 1, {});
  for (std::size_t i = 0; i < inst.agents(); ++i) {
    const std::size_t grp = diag.group_of.at(i);
    double bar = (1.0 - 3.0 * gamma) * u_star[i];
    if (grp == L) bar = std::min(bar, u_star[i] - 4.0 * diag.q_light / std::pow(gamma, 4));
    if (u_hat[i] < bar - kTolerance) diag.violations[grp].push_back(i);
  }
  diag.bound_holds.assign(L + 1, true);
  for (std::size_t l = 0; l <= L; ++l) {
    const double size = static_cast<double>(diag.group_sizes[l]);
    const double cap = l < L ? size / (2.0 * static_cast<double>(L) * std::exp(diag.q_levels[l]))
                             : size / (2.0 * std::exp(diag.q_light));
    diag.bound_holds[l] = static_cast<double>(diag.violations[l].size()) <= cap + kTolerance;
  }
  diag.completed = true;
  return diag;
}

/// z = (1 - gamma) x + gamma y.
inline std::vector<double> mix(const FractionalOutcome& x, const FractionalOutcome& y, double gamma) {
  if (x.weights.size() != y.weights.size()) throw ValidationError("mix: dimension mismatch");
  std::vector<double> z(x.weights.size());
  for (std::size_t j = 0; j < z.size(); ++j) z[j] = (1.0 - gamma) * x.weights[j] + gamma * y.weights[j];
  return z;
}

/// One independent draw: element j kept with probability (1 - gamma) z_j.
inline IntegralOutcome draw_rounding(const std::vector<double>& z, double gamma,
                                     std::mt19937_64& rng) {
  std::vector<Index> chosen;
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (bernoulli(rng, (1.0 - gamma) * z[j])) chosen.push_back(j);
  }
  return IntegralOutcome(std::move(chosen));
}

struct GroupingInputs {
  std::vector<double> optima;
  double r = 1.0;
};

/// Draws until A c <= b holds. Trial t uses substream (seed, t); the report's
/// `retries` counts rejected draws.
inline SolverReport round_outcome(const Instance& inst, const FractionalOutcome& x,
                                  const FractionalOutcome& y, const RoundingConfig& cfg,
                                  const GroupingInputs& inputs) {
  const Packing& pk = require_packing(inst, "round_outcome");
  if (x.weights.size() != inst.elements() || y.weights.size() != inst.elements()) {
    throw ValidationError("round_outcome: fractional outcomes have the wrong dimension");
  }
  const std::vector<double> z = mix(x, y, cfg.gamma);
  SolverReport rep;
  rep.solver = "packing_rounding";
  rep.seed = cfg.seed;
  bool accepted = false;
  for (std::size_t t = 0; t < cfg.retries; ++t) {
    std::mt19937_64 rng = substream(cfg.seed, t);
    IntegralOutcome c = draw_rounding(z, cfg.gamma, rng);
    if (detail::satisfies_packing(pk, c.elements())) {
      rep.outcome = std::move(c);
      rep.retries = t;
      accepted = true;
      break;
    }
  }
  if (!accepted) {
    throw InfeasibleError("round_outcome: every one of " + std::to_string(cfg.retries) +
                              " draws violated the packing constraints",
                          1.0);
  }
  rep.iterations = rep.retries + 1;
  GroupingDiagnostics g = grouping(inputs.optima, cfg, inputs.r);
  rep.grouping = violation_sets(inst, x, rep.outcome, std::move(g), cfg);
  rep.scalars["delta"] = cfg.delta;
  rep.scalars["gamma"] = cfg.gamma;
  rep.scalars["mpf_r"] = inputs.r;
  rep.scalars["q_light"] = rep.grouping->q_light;
  rep.scalars["alpha_target"] = 5.0 * rep.grouping->q_light / std::pow(cfg.gamma, 4);
  return rep;
}

inline SolverReport round_outcome(const Instance& inst, const FractionalOutcome& x,
                                  const FractionalOutcome& y, const RoundingConfig& cfg) {
  const MpfResult m = mpf(inst);
  return round_outcome(inst, x, y, cfg, GroupingInputs{m.optima, m.degenerate ? 1.0 : m.r});
}

/// exp(-(gamma^3 / 2) max(B, A / 2)).
inline double chernoff_variant_bound(double a, double b, double gamma) {
  if (!(gamma > 0.0 && gamma < 0.5)) throw ValidationError("chernoff bound: gamma must lie in (0, 1/2)");
  if (!(a >= 0.0) || !(b >= 0.0)) throw ValidationError("chernoff bound: A and B must be nonnegative");
  return std::exp(-0.5 * std::pow(gamma, 3) * std::max(b, a / 2.0));
}

struct TailTest {
  double empirical = 0.0;
  double bound = 0.0;
  double sigma = 0.0;
  std::size_t trials = 0;
  bool passes = false;
};

/// Monte-Carlo check of the tail bound: sums of independent Bernoulli
/// variables with mixed success probabilities and mean (1 - gamma) A + gamma B;
/// passes when the empirical frequency of X < (1 - 2 gamma) A is at most
/// bound + 3 sigma (sigma of a binomial proportion at the bound).
inline TailTest chernoff_monte_carlo(double a, double b, double gamma, std::size_t trials,
                                     std::uint64_t seed) {
  TailTest res;
  res.bound = chernoff_variant_bound(a, b, gamma);
  res.trials = trials;
  const double mean = (1.0 - gamma) * a + gamma * b;
  const std::size_t q = std::max<std::size_t>(2, 2 * static_cast<std::size_t>(std::ceil(mean)));
  std::vector<double> p(q);
  const double base = mean / static_cast<double>(q);
  for (std::size_t k = 0; k < q; ++k) p[k] = base * (k % 2 == 0 ? 0.5 : 1.5);
  const double cut = (1.0 - 2.0 * gamma) * a;
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::mt19937_64 rng = substream(seed, t);
    double x = 0.0;
    for (double pk : p) x += bernoulli(rng, pk) ? 1.0 : 0.0;
    if (x < cut) ++hits;
  }
  res.empirical = static_cast<double>(hits) / static_cast<double>(trials);
  res.sigma = std::sqrt(res.bound * (1.0 - res.bound) / static_cast<double>(trials));
  res.passes = res.empirical <= res.bound + 3.0 * res.sigma;
  return res;
}

/// fractional core -> MPF -> rounding. The report carries the alpha target
/// 5 Q_L / gamma^4 and the certificate value of the fractional stage.
inline SolverReport solve_packing(const Instance& inst, double delta, std::uint64_t seed,
                                  double epsilon = 0.01, std::size_t retries = 200) {
  const RoundingConfig cfg = RoundingConfig::make(delta, seed, retries);
  const MnwResult core = fractional_mnw(inst, delta, epsilon);
  const MpfResult m = mpf(inst);
  const FractionalOutcome y = m.outcome ? *m.outcome
                                        : FractionalOutcome{std::vector<double>(inst.elements(), 0.0)};
  SolverReport rep = round_outcome(inst, core.outcome, y, cfg,
                                   GroupingInputs{m.optima, m.degenerate ? 1.0 : m.r});
  rep.solver = "packing_pipeline";
  rep.scalars["epsilon"] = epsilon;
  rep.scalars["certificate_q"] = core.certificate.q_value;
  rep.scalars["fractional_iterations"] = static_cast<double>(core.certificate.iterations);
  return rep;
}

}  // namespace corefair
