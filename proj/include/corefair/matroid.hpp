#pragma once

// Local search over matroid bases on the smooth Nash welfare with ell = 1.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "corefair/errors.hpp"
#include "corefair/instance.hpp"
#include "corefair/objective.hpp"
#include "corefair/report.hpp"

namespace corefair {

/// Independence test for the matroid families of ConstraintSpec.
class MatroidOracle {
 public:
  MatroidOracle(ConstraintSpec spec, std::size_t ground)
      : spec_(std::move(spec)), ground_(ground) {
    if (!is_matroid(spec_)) {
      throw UnsupportedConstraintError("not a matroid constraint: " + constraint_name(spec_));
    }
    rank_ = compute_rank();
  }

  explicit MatroidOracle(const Instance& inst)
      : MatroidOracle(inst.constraint(), inst.elements()) {}

  std::size_t ground_size() const noexcept { return ground_; }
  std::size_t rank() const noexcept { return rank_; }

  bool independent(const std::vector<Index>& set) const {
    for (Index j : set) {
      if (j >= ground_) return false;
    }
    return is_independent(IntegralOutcome(set), spec_);
  }

  bool is_basis(const std::vector<Index>& set) const {
    return set.size() == rank_ && independent(set);
  }

 private:
  std::size_t compute_rank() const {
    // Greedy over the ground set in index order yields a basis.
    std::vector<Index> cur;
    for (Index j = 0; j < ground_; ++j) {
      cur.push_back(j);
      if (!is_independent(IntegralOutcome(cur), spec_)) cur.pop_back();
    }
    return cur.size();
  }

  ConstraintSpec spec_;
  std::size_t ground_;
  std::size_t rank_ = 0;
};

struct SwapSearchConfig {
  double epsilon = 0.1;
  double gamma = 0.0;
  double threshold = 0.0;
  std::size_t max_iterations = 0;

  /// gamma = eps / (4m), threshold = n * gamma / m,
  /// cap = 4 m^2 ln(1 + m) / eps + 1.
  static SwapSearchConfig make(std::size_t n, std::size_t m, double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw ValidationError("epsilon must be positive");
    }
    SwapSearchConfig c;
    const double md = static_cast<double>(m);
    c.epsilon = epsilon;
    c.gamma = epsilon / (4.0 * md);
    c.threshold = static_cast<double>(n) * c.gamma / md;
    c.max_iterations =
        static_cast<std::size_t>(std::floor(4.0 * md * md * std::log1p(md) / epsilon)) + 1;
    return c;
  }
};

struct Swap {
  Index remove = 0;
  Index add = 0;
  double delta = 0.0;
};

/// Greedy basis: elements by descending total utility, ties by index.
inline IntegralOutcome initial_basis(const MatroidOracle& oracle, const Instance& inst) {
  const std::size_t m = inst.elements();
  std::vector<double> total(m, 0.0);
  for (std::size_t i = 0; i < inst.agents(); ++i) {
    for (std::size_t j = 0; j < m; ++j) total[j] += inst.utility(i, j);
  }
  std::vector<Index> order(m);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return total[a] > total[b]; });
  std::vector<Index> cur;
  for (Index j : order) {
    cur.push_back(j);
    if (!oracle.independent(cur)) cur.pop_back();
  }
  return IntegralOutcome(cur);
}

/// First swap, scanning removals then additions in ascending index order,
/// that keeps a basis and raises F (ell = 1) by at least the threshold.
inline std::optional<Swap> find_improving_swap(const Instance& inst, const IntegralOutcome& c,
                                               const MatroidOracle& oracle,
                                               const SwapSearchConfig& config) {
  const std::vector<double> profile = utility_profile(inst, c);
  for (Index r : c.elements()) {
    for (Index a = 0; a < inst.elements(); ++a) {
      if (c.contains(a)) continue;
      const IntegralOutcome next = c.with_swap(r, a);
      if (!oracle.independent(next.elements())) continue;
      const double d = delta_replace(inst, profile, {r}, {a}, 1.0);
      if (d >= config.threshold) return Swap{r, a, d};
    }
  }
  return std::nullopt;
}

inline SolverReport local_search_matroid(const Instance& inst, const MatroidOracle& oracle,
                                         double epsilon) {
  const SwapSearchConfig config = SwapSearchConfig::make(inst.agents(), inst.elements(), epsilon);
  const SmoothNashParams params{1.0, false};
  SolverReport rep;
  rep.solver = "matroid_local_search";
  rep.outcome = initial_basis(oracle, inst);
  rep.objective_trace.push_back(smooth_nash(inst, rep.outcome, params));
  while (auto swap = find_improving_swap(inst, rep.outcome, oracle, config)) {
    if (rep.iterations >= config.max_iterations) {
      throw ConvergenceError("matroid local search exceeded its iteration bound",
                             rep.objective_trace.back());
    }
    rep.outcome = rep.outcome.with_swap(swap->remove, swap->add);
    rep.objective_trace.push_back(smooth_nash(inst, rep.outcome, params));
    ++rep.iterations;
  }
  rep.scalars["epsilon"] = epsilon;
  rep.scalars["gamma"] = config.gamma;
  rep.scalars["threshold"] = config.threshold;
  rep.scalars["alpha_target"] = 2.0 + epsilon;
  return rep;
}

inline SolverReport local_search_matroid(const Instance& inst, double epsilon) {
  return local_search_matroid(inst, MatroidOracle(inst), epsilon);
}

/// Bijection f from basis a to basis b with a - j + f(j) a basis for every j,
/// found as a perfect matching in the exchange graph.
inline std::map<Index, Index> exchange_bijection(const MatroidOracle& oracle,
                                                 const IntegralOutcome& a,
                                                 const IntegralOutcome& b) {
  if (!oracle.is_basis(a.elements()) || !oracle.is_basis(b.elements())) {
    throw ValidationError("exchange_bijection: both arguments must be bases");
  }
  const auto& left = a.elements();
  const auto& right = b.elements();
  const std::size_t k = left.size();
  std::vector<std::vector<std::size_t>> adj(k);
  for (std::size_t x = 0; x < k; ++x) {
    for (std::size_t y = 0; y < k; ++y) {
      if (left[x] == right[y] ||
          (!a.contains(right[y]) && oracle.independent(a.with_swap(left[x], right[y]).elements()))) {
        adj[x].push_back(y);
      }
    }
  }
  // Kuhn's augmenting paths.
  std::vector<long> match_right(k, -1);
  std::vector<char> seen;
  auto augment = [&](auto&& self, std::size_t x) -> bool {
    for (std::size_t y : adj[x]) {
      if (seen[y]) continue;
      seen[y] = 1;
      if (match_right[y] < 0 || self(self, static_cast<std::size_t>(match_right[y]))) {
        match_right[y] = static_cast<long>(x);
        return true;
      }
    }
    return false;
  };
  for (std::size_t x = 0; x < k; ++x) {
    seen.assign(k, 0);
    if (!augment(augment, x)) {
      throw ValidationError("exchange_bijection: no perfect matching; the oracle violates "
                            "the basis exchange property");
    }
  }
  std::map<Index, Index> f;
  for (std::size_t y = 0; y < k; ++y) f[left[static_cast<std::size_t>(match_right[y])]] = right[y];
  return f;
}

}  // namespace corefair
