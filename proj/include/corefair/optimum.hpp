#pragma once

// Per-agent optimum V_i over the feasible set or its packing polytope.

#include <algorithm>
#include <numeric>
#include <vector>

#include "corefair/enumerate.hpp"
#include "corefair/errors.hpp"
#include "corefair/instance.hpp"
#include "corefair/lp.hpp"

namespace corefair {

enum class OptimumMode { integral, fractional };

/// max c.w over {w in [0,1]^m : A w <= b}.
inline LinearProgram packing_lp(const Packing& p, std::vector<double> objective) {
  LinearProgram lp;
  lp.objective = std::move(objective);
  lp.maximize = true;
  lp.upper.assign(p.a.cols(), 1.0);
  for (std::size_t k = 0; k < p.a.rows(); ++k) lp.add_row(p.a.row_vector(k), RowSense::le, p.b[k]);
  return lp;
}

namespace detail {

inline double greedy_matroid_value(const Instance& inst, Index agent) {
  const std::size_t m = inst.elements();
  std::vector<Index> order(m);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return inst.utility(agent, a) > inst.utility(agent, b);
  });
  std::vector<Index> cur;
  double value = 0.0;
  for (Index j : order) {
    cur.push_back(j);
    if (is_independent(IntegralOutcome(cur), inst.constraint())) {
      value += inst.utility(agent, j);
    } else {
      cur.pop_back();
    }
  }
  return value;
}

}  // namespace detail

/// V_i. Matroids are solved exactly by the greedy algorithm; matching and
/// packing are searched exhaustively up to the element cap in integral mode.
/// Fractional mode is the LP over the packing polytope.
inline double max_agent_utility(const Instance& inst, Index agent, OptimumMode mode,
                                const SizeCaps& caps = SizeCaps::from_env()) {
  if (agent >= inst.agents()) throw ValidationError("agent index out of range");
  const ConstraintSpec& spec = inst.constraint();
  if (mode == OptimumMode::fractional) {
    const auto* pk = std::get_if<Packing>(&spec);
    if (pk == nullptr) {
      throw UnsupportedConstraintError("fractional optimum needs a packing constraint, got " +
                                       constraint_name(spec));
    }
    if (inst.is_zero_agent(agent)) return 0.0;
    const LpResult r = solve_lp_or_throw(packing_lp(*pk, inst.utilities().row_vector(agent)),
                                         "max_agent_utility");
    return r.value;
  }
  if (is_matroid(spec)) return detail::greedy_matroid_value(inst, agent);
  if (inst.elements() > caps.elements) {
    throw SizeCapError("elements", static_cast<double>(caps.elements),
                       static_cast<double>(inst.elements()));
  }
  double best = 0.0;
  for_each_distinct_outcome(inst, DeviationSpace::bases, caps, [&](const std::vector<Index>& c) {
    double v = 0.0;
    for (Index j : c) v += inst.utility(agent, j);
    best = std::max(best, v);
    return true;
  });
  return best;
}

inline std::vector<double> agent_optima(const Instance& inst, OptimumMode mode,
                                        const SizeCaps& caps = SizeCaps::from_env()) {
  std::vector<double> v(inst.agents());
  for (std::size_t i = 0; i < inst.agents(); ++i) v[i] = max_agent_utility(inst, i, mode, caps);
  return v;
}

}  // namespace corefair
