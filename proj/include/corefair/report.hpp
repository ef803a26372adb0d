#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corefair/instance.hpp"

namespace corefair {

/// Agent grouping by optimum utility and per-group violation counts.
struct GroupingDiagnostics {
  std::vector<double> q_levels;
  /// Number of heavy groups; group L is the light group.
  std::size_t levels = 0;
  /// Group index per agent, in [0, levels].
  std::vector<std::size_t> group_of;
  std::vector<std::size_t> group_sizes;
  std::vector<std::vector<Index>> violations;
  double threshold = 0.0;
  double q_light = 0.0;
  bool degenerate = false;
  /// Per-group flag: violation count within the bound. Filled by violation_sets.
  std::vector<bool> bound_holds;
  bool completed = false;

  bool all_bounds_hold() const {
    for (bool b : bound_holds) {
      if (!b) return false;
    }
    return completed;
  }
};

struct SolverReport {
  std::string solver;
  IntegralOutcome outcome;
  std::vector<double> objective_trace;
  std::size_t iterations = 0;
  std::optional<std::uint64_t> seed;
  std::size_t retries = 0;
  /// Named scalars: thresholds, alpha targets, certificate values.
  std::map<std::string, double> scalars;
  std::optional<GroupingDiagnostics> grouping;
};

}  // namespace corefair
