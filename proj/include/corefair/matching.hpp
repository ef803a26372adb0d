#pragma once

// Local search over matchings by bounded-size augmentations.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "corefair/errors.hpp"
#include "corefair/instance.hpp"
#include "corefair/objective.hpp"
#include "corefair/report.hpp"

namespace corefair {

/// A matching T outside the current outcome and the current edges M(T) it
/// displaces.
struct Augmentation {
  std::vector<Index> edges;
  std::vector<Index> displaced;

  friend bool operator==(const Augmentation&, const Augmentation&) = default;
};

struct MatchSearchConfig {
  double delta = 1.0;
  std::size_t kappa = 2;
  double ell = 5.0;
  double threshold = 0.0;

  /// kappa = ceil(2/delta), ell = 1 + 2 kappa, threshold = n / (kappa r).
  static MatchSearchConfig make(std::size_t n, std::size_t r, double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) throw ValidationError("delta must lie in (0, 1]");
    if (r == 0) throw ValidationError("matching graph has no vertices");
    MatchSearchConfig c;
    c.delta = delta;
    c.kappa = static_cast<std::size_t>(std::ceil(2.0 / delta - 1e-12));
    c.ell = 1.0 + 2.0 * static_cast<double>(c.kappa);
    c.threshold = static_cast<double>(n) / (static_cast<double>(c.kappa) * static_cast<double>(r));
    return c;
  }
};

/// Current edges sharing a vertex with some edge of t.
inline std::vector<Index> displaced_edges(const Matching& g, const IntegralOutcome& current,
                                          const std::vector<Index>& t) {
  std::vector<char> touched(g.vertices, 0);
  for (Index e : t) touched[g.edges[e].u] = touched[g.edges[e].v] = 1;
  std::vector<Index> out;
  for (Index e : current.elements()) {
    if (touched[g.edges[e].u] || touched[g.edges[e].v]) out.push_back(e);
  }
  return out;
}

/// Calls fn(aug) for every matching T with T disjoint from `current` and
/// 1 <= |T| <= kappa, in lexicographic order of sorted edge lists, until fn
/// returns false.
template <class Fn>
void for_each_augmentation(const Matching& g, const IntegralOutcome& current, std::size_t kappa,
                           Fn&& fn) {
  const std::size_t m = g.edges.size();
  std::vector<char> used(g.vertices, 0);
  std::vector<Index> t;
  bool stop = false;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    for (std::size_t e = start; e < m && !stop; ++e) {
      if (current.contains(e)) continue;
      const Edge& ed = g.edges[e];
      if (used[ed.u] || used[ed.v]) continue;
      used[ed.u] = used[ed.v] = 1;
      t.push_back(e);
      Augmentation aug{t, displaced_edges(g, current, t)};
      if (!fn(aug)) stop = true;
      if (!stop && t.size() < kappa) self(self, e + 1);
      t.pop_back();
      used[ed.u] = used[ed.v] = 0;
    }
  };
  if (kappa > 0) rec(rec, 0);
}

inline std::vector<Augmentation> enumerate_augmentations(const Matching& g,
                                                         const IntegralOutcome& current,
                                                         std::size_t kappa) {
  if (!detail::is_matching(g.edges, g.vertices, current.elements())) {
    throw ValidationError("enumerate_augmentations: current outcome is not a matching");
  }
  std::vector<Augmentation> out;
  for_each_augmentation(g, current, kappa, [&](const Augmentation& a) {
    out.push_back(a);
    return true;
  });
  return out;
}

/// (current - M(T)) + T.
inline IntegralOutcome apply_augmentation(const IntegralOutcome& current, const Augmentation& a) {
  std::vector<Index> next;
  for (Index e : current.elements()) {
    if (!std::binary_search(a.displaced.begin(), a.displaced.end(), e)) next.push_back(e);
  }
  next.insert(next.end(), a.edges.begin(), a.edges.end());
  return IntegralOutcome(next);
}

inline SolverReport local_search_matching(const Instance& inst, double delta) {
  const auto* g = std::get_if<Matching>(&inst.constraint());
  if (g == nullptr) {
    throw UnsupportedConstraintError("matching local search needs a matching constraint, got " +
                                     constraint_name(inst.constraint()));
  }
  const MatchSearchConfig cfg = MatchSearchConfig::make(inst.agents(), g->vertices, delta);
  const std::size_t n = inst.agents();
  const std::size_t m = inst.elements();

  // Greedy warm start by descending total utility, ties by index.
  std::vector<double> total(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) total[j] += inst.utility(i, j);
  }
  std::vector<Index> order(m);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return total[a] > total[b]; });
  std::vector<Index> start;
  std::vector<char> used(g->vertices, 0);
  for (Index e : order) {
    const Edge& ed = g->edges[e];
    if (used[ed.u] || used[ed.v]) continue;
    used[ed.u] = used[ed.v] = 1;
    start.push_back(e);
  }

  SolverReport rep;
  rep.solver = "matching_local_search";
  rep.outcome = IntegralOutcome(start);
  const SmoothNashParams params{cfg.ell, false};
  rep.objective_trace.push_back(smooth_nash(inst, rep.outcome, params));

  // F <= n ln(ell + m) and F >= n ln(ell) bound the number of ascents.
  const double span = static_cast<double>(n) * std::log((cfg.ell + static_cast<double>(m)) / cfg.ell);
  const auto cap = static_cast<std::size_t>(std::ceil(span / cfg.threshold)) + 1;

  for (;;) {
    const std::vector<double> profile = utility_profile(inst, rep.outcome);
    bool improved = false;
    Augmentation chosen;
    for_each_augmentation(*g, rep.outcome, cfg.kappa, [&](const Augmentation& a) {
      if (delta_replace(inst, profile, a.displaced, a.edges, cfg.ell) >= cfg.threshold) {
        chosen = a;
        improved = true;
        return false;
      }
      return true;
    });
    if (!improved) break;
    if (rep.iterations >= cap) {
      throw ConvergenceError("matching local search exceeded its iteration bound",
                             rep.objective_trace.back());
    }
    rep.outcome = apply_augmentation(rep.outcome, chosen);
    rep.objective_trace.push_back(smooth_nash(inst, rep.outcome, params));
    ++rep.iterations;
  }
  rep.scalars["delta"] = delta;
  rep.scalars["kappa"] = static_cast<double>(cfg.kappa);
  rep.scalars["ell"] = cfg.ell;
  rep.scalars["threshold"] = cfg.threshold;
  rep.scalars["alpha_target"] = 8.0 + 6.0 / delta;
  return rep;
}

/// gain(T) = sum_{T} w' - sum_{M(T)} w.
inline double augmentation_gain(const Augmentation& a, const std::vector<double>& w,
                                const std::vector<double>& w_prime) {
  double g = 0.0;
  for (Index e : a.edges) g += w_prime[e];
  for (Index e : a.displaced) g -= w[e];
  return g;
}

/// Multiset of augmentations with respect to `current` drawn from `target`:
/// every component of the symmetric difference contributes its target edges
/// kappa times when there are at most kappa of them, and otherwise one
/// window of kappa consecutive target edges (cyclically) per starting edge.
inline std::vector<Augmentation> build_opt_multiset(const Matching& g,
                                                    const IntegralOutcome& current,
                                                    const IntegralOutcome& target,
                                                    std::size_t kappa,
                                                    const std::vector<double>& w,
                                                    const std::vector<double>& w_prime) {
  const std::size_t m = g.edges.size();
  if (w.size() != m || w_prime.size() != m) {
    throw ValidationError("build_opt_multiset: weight vectors need one entry per edge");
  }
  for (std::size_t e = 0; e < m; ++e) {
    if (w[e] < w_prime[e] - kTolerance) {
      throw ValidationError("build_opt_multiset: requires w >= w' on every edge");
    }
  }
  if (!detail::is_matching(g.edges, g.vertices, current.elements()) ||
      !detail::is_matching(g.edges, g.vertices, target.elements())) {
    throw ValidationError("build_opt_multiset: both outcomes must be matchings");
  }
  if (kappa == 0) throw ValidationError("build_opt_multiset: kappa must be positive");

  std::vector<Index> diff;
  std::set_symmetric_difference(current.elements().begin(), current.elements().end(),
                                target.elements().begin(), target.elements().end(),
                                std::back_inserter(diff));
  std::vector<std::vector<Index>> incident(g.vertices);
  for (Index e : diff) {
    incident[g.edges[e].u].push_back(e);
    incident[g.edges[e].v].push_back(e);
  }
  std::vector<char> visited(m, 0);
  std::vector<Augmentation> opt;

  auto walk = [&](std::size_t start_vertex) {
    // Follows the alternating path or cycle from start_vertex, returning the
    // target edges in traversal order.
    std::vector<Index> along;
    std::size_t v = start_vertex;
    for (;;) {
      Index next = m;
      for (Index e : incident[v]) {
        if (!visited[e]) {
          next = e;
          break;
        }
      }
      if (next == m) break;
      visited[next] = 1;
      if (target.contains(next)) along.push_back(next);
      v = g.edges[next].u == v ? g.edges[next].v : g.edges[next].u;
    }
    return along;
  };
  auto emit = [&](const std::vector<Index>& td) {
    if (td.empty()) return;
    if (td.size() <= kappa) {
      std::vector<Index> t = td;
      std::sort(t.begin(), t.end());
      Augmentation a{t, displaced_edges(g, current, t)};
      for (std::size_t k = 0; k < kappa; ++k) opt.push_back(a);
      return;
    }
    for (std::size_t s = 0; s < td.size(); ++s) {
      std::vector<Index> t;
      for (std::size_t k = 0; k < kappa; ++k) t.push_back(td[(s + k) % td.size()]);
      std::sort(t.begin(), t.end());
      opt.push_back(Augmentation{t, displaced_edges(g, current, t)});
    }
  };

  // Paths first, each walked from its lower-indexed endpoint; then cycles.
  for (std::size_t v = 0; v < g.vertices; ++v) {
    if (incident[v].size() != 1 || visited[incident[v].front()]) continue;
    emit(walk(v));
  }
  for (std::size_t v = 0; v < g.vertices; ++v) {
    bool fresh = false;
    for (Index e : incident[v]) fresh = fresh || !visited[e];
    if (fresh) emit(walk(v));
  }
  return opt;
}

}  // namespace corefair
