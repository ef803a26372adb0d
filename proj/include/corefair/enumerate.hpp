#pragma once

// Exhaustive enumeration of feasible outcomes, guarded by size caps.

#include <cmath>
#include <cstdlib>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "corefair/errors.hpp"
#include "corefair/instance.hpp"

namespace corefair {

/// Limits for exhaustive search. COREFAIR_SIZE_CAPS (test-only) overrides the
/// defaults, e.g. "agents=12,outcomes=1048576,elements=20".
struct SizeCaps {
  std::size_t agents = 12;
  std::size_t outcomes = std::size_t{1} << 20;
  std::size_t elements = 20;

  static SizeCaps from_env() {
    SizeCaps caps;
    const char* env = std::getenv("COREFAIR_SIZE_CAPS");
    if (env == nullptr) return caps;
    std::stringstream ss(env);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = item.substr(0, eq);
      std::size_t value = 0;
      try {
        value = static_cast<std::size_t>(std::stoull(item.substr(eq + 1)));
      } catch (const std::exception&) {
        throw ValidationError("COREFAIR_SIZE_CAPS: bad value for '" + key + "'");
      }
      if (key == "agents") {
        caps.agents = value;
      } else if (key == "outcomes") {
        caps.outcomes = value;
      } else if (key == "elements") {
        caps.elements = value;
      } else {
        throw ValidationError("COREFAIR_SIZE_CAPS: unknown cap '" + key + "'");
      }
    }
    return caps;
  }
};

/// Which outcomes a deviating coalition may pick under matroid constraints.
/// Non-matroid families ignore it.
enum class DeviationSpace { bases, independent_sets };

namespace detail {

inline void charge(std::size_t& count, const SizeCaps& caps) {
  if (++count > caps.outcomes) {
    throw SizeCapError("outcomes", static_cast<double>(caps.outcomes),
                       static_cast<double>(count));
  }
}

inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

inline void precheck(double estimate, const SizeCaps& caps) {
  if (estimate > static_cast<double>(caps.outcomes)) {
    throw SizeCapError("outcomes", static_cast<double>(caps.outcomes), estimate);
  }
}

template <class Fn>
bool enum_partition(const PartitionMatroid& p, bool allow_none, std::size_t g,
                    std::vector<Index>& cur, std::size_t& count, const SizeCaps& caps,
                    Fn& fn) {
  if (g == p.groups.size()) {
    charge(count, caps);
    std::vector<Index> sorted = cur;
    std::sort(sorted.begin(), sorted.end());
    return fn(sorted);
  }
  if (allow_none && !enum_partition(p, allow_none, g + 1, cur, count, caps, fn)) return false;
  for (Index j : p.groups[g]) {
    cur.push_back(j);
    const bool go = enum_partition(p, allow_none, g + 1, cur, count, caps, fn);
    cur.pop_back();
    if (!go) return false;
  }
  return true;
}

template <class Fn>
bool enum_combinations(std::size_t m, std::size_t k, std::size_t start,
                       std::vector<Index>& cur, std::size_t& count, const SizeCaps& caps,
                       Fn& fn) {
  if (cur.size() == k) {
    charge(count, caps);
    return fn(cur);
  }
  for (std::size_t j = start; j + (k - cur.size()) <= m; ++j) {
    cur.push_back(j);
    const bool go = enum_combinations(m, k, j + 1, cur, count, caps, fn);
    cur.pop_back();
    if (!go) return false;
  }
  return true;
}

template <class Fn>
bool enum_matchings(const Matching& g, std::size_t e, std::vector<char>& used,
                    std::vector<Index>& cur, std::size_t& count, const SizeCaps& caps,
                    Fn& fn) {
  if (e == g.edges.size()) {
    charge(count, caps);
    return fn(cur);
  }
  if (!enum_matchings(g, e + 1, used, cur, count, caps, fn)) return false;
  const Edge& ed = g.edges[e];
  if (used[ed.u] || used[ed.v]) return true;
  used[ed.u] = used[ed.v] = 1;
  cur.push_back(e);
  const bool go = enum_matchings(g, e + 1, used, cur, count, caps, fn);
  cur.pop_back();
  used[ed.u] = used[ed.v] = 0;
  return go;
}

template <class Fn>
bool enum_packing(const Packing& p, double scale, std::size_t e, std::vector<double>& load,
                  std::vector<Index>& cur, std::size_t& count, const SizeCaps& caps,
                  Fn& fn) {
  if (e == p.a.cols()) {
    charge(count, caps);
    return fn(cur);
  }
  if (!enum_packing(p, scale, e + 1, load, cur, count, caps, fn)) return false;
  for (std::size_t k = 0; k < p.a.rows(); ++k) {
    if (load[k] + p.a(k, e) > scale * p.b[k] + kTolerance) return true;
  }
  for (std::size_t k = 0; k < p.a.rows(); ++k) load[k] += p.a(k, e);
  cur.push_back(e);
  const bool go = enum_packing(p, scale, e + 1, load, cur, count, caps, fn);
  cur.pop_back();
  for (std::size_t k = 0; k < p.a.rows(); ++k) load[k] -= p.a(k, e);
  return go;
}

template <class Fn>
bool enum_private(const PrivateGoods& pg, bool allow_none, std::size_t good,
                  std::vector<Index>& cur, std::size_t& count, const SizeCaps& caps,
                  Fn& fn) {
  if (good == pg.goods) {
    charge(count, caps);
    return fn(cur);
  }
  if (allow_none && !enum_private(pg, allow_none, good + 1, cur, count, caps, fn)) return false;
  for (Index a = 0; a < pg.agents; ++a) {
    cur.push_back(pg.element(good, a));
    const bool go = enum_private(pg, allow_none, good + 1, cur, count, caps, fn);
    cur.pop_back();
    if (!go) return false;
  }
  return true;
}

}  // namespace detail

/// Calls fn(chosen) for every feasible outcome of `spec` (sorted element
/// lists) until fn returns false. Packing outcomes satisfy A x <= scale * b.
/// Returns the number of outcomes visited.
template <class Fn>
std::size_t for_each_feasible(const ConstraintSpec& spec, std::size_t m, DeviationSpace space,
                              const SizeCaps& caps, Fn&& fn, double packing_scale = 1.0) {
  std::size_t count = 0;
  std::vector<Index> cur;
  const bool relaxed = space == DeviationSpace::independent_sets;
  if (const auto* p = std::get_if<PartitionMatroid>(&spec)) {
    double est = 1.0;
    for (const auto& g : p->groups) est *= static_cast<double>(g.size() + (relaxed ? 1 : 0));
    detail::precheck(est, caps);
    detail::enum_partition(*p, relaxed, 0, cur, count, caps, fn);
  } else if (const auto* u = std::get_if<UniformMatroid>(&spec)) {
    double est = 0.0;
    for (std::size_t k = relaxed ? 0 : u->rank; k <= u->rank; ++k) est += detail::binomial(m, k);
    detail::precheck(est, caps);
    for (std::size_t k = relaxed ? 0 : u->rank; k <= u->rank; ++k) {
      if (!detail::enum_combinations(m, k, 0, cur, count, caps, fn)) break;
    }
  } else if (const auto* g = std::get_if<GraphicMatroid>(&spec)) {
    const std::size_t edges = g->edges.size();
    if (edges > caps.elements) {
      throw SizeCapError("elements", static_cast<double>(caps.elements),
                         static_cast<double>(edges));
    }
    const std::size_t rank = detail::graphic_rank(g->edges, g->vertices);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << edges); ++mask) {
      if (!relaxed && static_cast<std::size_t>(__builtin_popcountll(mask)) != rank) continue;
      cur.clear();
      for (std::size_t j = 0; j < edges; ++j) {
        if (mask >> j & 1U) cur.push_back(j);
      }
      if (!detail::is_forest(g->edges, g->vertices, cur)) continue;
      detail::charge(count, caps);
      if (!fn(cur)) break;
    }
  } else if (const auto* mt = std::get_if<Matching>(&spec)) {
    std::vector<char> used(mt->vertices, 0);
    detail::enum_matchings(*mt, 0, used, cur, count, caps, fn);
  } else if (const auto* pk = std::get_if<Packing>(&spec)) {
    std::vector<double> load(pk->a.rows(), 0.0);
    detail::enum_packing(*pk, packing_scale, 0, load, cur, count, caps, fn);
  } else {
    const auto& pg = std::get<PrivateGoods>(spec);
    detail::precheck(std::pow(static_cast<double>(pg.agents + (relaxed ? 1 : 0)),
                              static_cast<double>(pg.goods)),
                     caps);
    detail::enum_private(pg, relaxed, 0, cur, count, caps, fn);
  }
  return count;
}

/// Instance-aware enumeration. Packing elements whose utility column and A column coincide are
/// interchangeable, so only one representative per count vector is visited
/// (the lowest indices of each class); every agent's utility and feasibility
/// are identical across the skipped outcomes.
template <class Fn>
std::size_t for_each_distinct_outcome(const Instance& inst, DeviationSpace space,
                                      const SizeCaps& caps, Fn&& fn,
                                      double packing_scale = 1.0) {
  const ConstraintSpec& spec = inst.constraint();
  const auto* pk = std::get_if<Packing>(&spec);
  if (pk == nullptr) {
    return for_each_feasible(spec, inst.elements(), space, caps, fn, packing_scale);
  }

  // Group identical (utility column, A column) pairs.
  const std::size_t m = inst.elements();
  std::map<std::vector<double>, std::vector<Index>> by_key;
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> key;
    key.reserve(inst.agents() + pk->a.rows());
    for (std::size_t i = 0; i < inst.agents(); ++i) key.push_back(inst.utility(i, j));
    for (std::size_t k = 0; k < pk->a.rows(); ++k) key.push_back(pk->a(k, j));
    by_key[key].push_back(j);
  }
  std::vector<std::vector<Index>> classes;
  for (auto& [key, members] : by_key) classes.push_back(members);
  std::sort(classes.begin(), classes.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });

  std::size_t count = 0;
  std::vector<double> load(pk->a.rows(), 0.0);
  std::vector<std::size_t> counts(classes.size(), 0);
  bool stop = false;
  std::vector<Index> chosen;
  auto rec = [&](auto&& self, std::size_t c) -> void {
    if (stop) return;
    if (c == classes.size()) {
      detail::charge(count, caps);
      chosen.clear();
      for (std::size_t q = 0; q < classes.size(); ++q) {
        for (std::size_t t = 0; t < counts[q]; ++t) chosen.push_back(classes[q][t]);
      }
      std::sort(chosen.begin(), chosen.end());
      if (!fn(chosen)) stop = true;
      return;
    }
    const Index rep = classes[c].front();
    const std::vector<double> saved = load;
    std::size_t k = 0;
    for (;;) {
      counts[c] = k;
      self(self, c + 1);
      if (stop || k == classes[c].size()) break;
      bool fits = true;
      for (std::size_t r = 0; r < pk->a.rows(); ++r) {
        if (load[r] + pk->a(r, rep) > packing_scale * pk->b[r] + kTolerance) fits = false;
      }
      if (!fits) break;
      for (std::size_t r = 0; r < pk->a.rows(); ++r) load[r] += pk->a(r, rep);
      ++k;
    }
    load = saved;
    counts[c] = 0;
  };
  rec(rec, 0);
  return count;
}

}  // namespace corefair
