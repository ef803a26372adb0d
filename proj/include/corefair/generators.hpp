#pragma once

// Instance generators: the fixed lower-bound constructions and seeded random
// pools.

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "corefair/errors.hpp"
#include "corefair/instance.hpp"
#include "corefair/rng.hpp"

namespace corefair {

struct GeneratorSpec {
  std::string name;
  std::map<std::string, std::string> params;
};

namespace detail {

inline long long param_int(const GeneratorSpec& g, const std::string& key, long long fallback) {
  const auto it = g.params.find(key);
  if (it == g.params.end()) return fallback;
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("generator " + g.name + ": parameter '" + key + "' must be an integer");
  }
}

inline double param_double(const GeneratorSpec& g, const std::string& key, double fallback) {
  const auto it = g.params.find(key);
  if (it == g.params.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("generator " + g.name + ": parameter '" + key + "' must be a number");
  }
}

inline std::uint64_t param_seed(const GeneratorSpec& g) {
  const auto it = g.params.find("seed");
  if (it == g.params.end()) return 0;
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("seed");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("generator " + g.name + ": seed must be an unsigned integer");
  }
}

inline void check_known(const GeneratorSpec& g, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : g.params) {
    bool ok = false;
    for (const char* key : keys) ok = ok || k == key;
    if (!ok) throw ValidationError("generator " + g.name + ": unknown parameter '" + k + "'");
  }
}

inline std::size_t positive(const GeneratorSpec& g, const std::string& key, long long v,
                            long long lo = 1, long long hi = 1000000) {
  if (v < lo || v > hi) {
    throw ValidationError("generator " + g.name + ": parameter '" + key + "' must lie in [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<std::size_t>(v);
}

/// Random utility matrix with roughly `density` positive entries, every row
/// nonzero, normalized to row maximum 1.
inline DenseMatrix random_utilities(std::size_t n, std::size_t m, double density,
                                    std::mt19937_64& rng) {
  DenseMatrix u(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    double mx = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (bernoulli(rng, density)) u(i, j) = 0.05 + 0.95 * uniform01(rng);
      mx = std::max(mx, u(i, j));
    }
    if (mx == 0.0) {
      const auto j = static_cast<std::size_t>(uniform_int(rng, 0, m - 1));
      u(i, j) = 1.0;
      mx = 1.0;
    }
    for (std::size_t j = 0; j < m; ++j) u(i, j) /= mx;
  }
  return u;
}

}  // namespace detail

/// m issues with two alternatives each (element 2t is the first alternative
/// of issue t, 2t + 1 the second). Agents 0..m-1 each value one first
/// alternative; agents m..2m-1 value every second alternative at 1 and every
/// first alternative at 1/m.
inline Instance make_example1(std::size_t m) {
  if (m < 2) throw ValidationError("example1: m must be at least 2");
  const std::size_t n = 2 * m;
  DenseMatrix u(n, 2 * m);
  PartitionMatroid p;
  for (std::size_t t = 0; t < m; ++t) {
    p.groups.push_back({2 * t, 2 * t + 1});
    u(t, 2 * t) = 1.0;
    for (std::size_t i = m; i < n; ++i) {
      u(i, 2 * t) = 1.0 / static_cast<double>(m);
      u(i, 2 * t + 1) = 1.0;
    }
  }
  return Instance(n, 2 * m, std::move(u), std::move(p));
}

inline IntegralOutcome example1_firsts(std::size_t m) {
  std::vector<Index> c;
  for (std::size_t t = 0; t < m; ++t) c.push_back(2 * t);
  return IntegralOutcome(c);
}

inline IntegralOutcome example1_seconds(std::size_t m) {
  std::vector<Index> c;
  for (std::size_t t = 0; t < m; ++t) c.push_back(2 * t + 1);
  return IntegralOutcome(c);
}

/// n agents (even), n - 2 private issues with one alternative per agent, and
/// n / 2 pair issues with one alternative per unordered pair of agents.
inline Instance make_lemma4(std::size_t n) {
  if (n < 2 || n % 2 != 0) throw ValidationError("lemma4: n must be even and at least 2");
  std::vector<std::vector<double>> cols;
  PartitionMatroid p;
  for (std::size_t t = 0; t + 2 < n; ++t) {
    std::vector<Index> group;
    for (std::size_t a = 0; a < n; ++a) {
      std::vector<double> col(n, 0.0);
      col[a] = 1.0;
      group.push_back(cols.size());
      cols.push_back(col);
    }
    p.groups.push_back(group);
  }
  for (std::size_t t = 0; t < n / 2; ++t) {
    std::vector<Index> group;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        std::vector<double> col(n, 0.0);
        col[a] = col[b] = 1.0;
        group.push_back(cols.size());
        cols.push_back(col);
      }
    }
    p.groups.push_back(group);
  }
  DenseMatrix u(n, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) u(i, j) = cols[j][i];
  }
  return Instance(n, cols.size(), std::move(u), std::move(p));
}

/// K_{2,2} on vertices {0,1} x {2,3}. Edges: 0:(0,2) 1:(0,3) 2:(1,2) 3:(1,3).
/// Agent 0 values the perfect matching {0,3}, agent 1 the matching {1,2}.
inline Instance make_k22() {
  Matching g{4, {{0, 2}, {0, 3}, {1, 2}, {1, 3}}};
  DenseMatrix u = DenseMatrix::from_rows({{1, 0, 0, 1}, {0, 1, 1, 0}});
  return Instance(2, 4, std::move(u), std::move(g));
}

/// Independent sets of the complete bipartite graph with sides of size m/2:
/// one row x_u + x_v <= 1 per edge. Agent 0 values the left side, agent 1
/// the right side.
inline Instance make_bipartite_is(std::size_t m) {
  if (m < 2 || m % 2 != 0) throw ValidationError("bipartite_is: m must be even and at least 2");
  const std::size_t h = m / 2;
  Packing pk;
  pk.a = DenseMatrix(h * h, m);
  pk.b.assign(h * h, 1.0);
  for (std::size_t l = 0; l < h; ++l) {
    for (std::size_t r = 0; r < h; ++r) {
      pk.a(l * h + r, l) = 1.0;
      pk.a(l * h + r, h + r) = 1.0;
    }
  }
  DenseMatrix u(2, m);
  for (std::size_t j = 0; j < h; ++j) {
    u(0, j) = 1.0;
    u(1, h + j) = 1.0;
  }
  return Instance(2, m, std::move(u), std::move(pk));
}

struct SmoothingLayout {
  std::size_t large = 0;
  std::size_t small = 0;
  std::size_t agents = 0;
  std::size_t special = 0;
};

/// Knapsack of capacity B (a fourth power): B^{1/4} large items of size
/// B^{3/4} valued by everyone, B unit items valued only by the special agents.
/// n = ceil(4 B^{1/4} ln 2B) agents, of which max(1, floor(n / (4 B^{1/4} ln 2B)))
/// are special. Sizes are divided by B^{3/4} so that A has entries in [0,1].
inline SmoothingLayout smoothing_layout(std::size_t budget) {
  const auto root = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(budget), 0.25)));
  if (budget == 0 || root * root * root * root != budget) {
    throw ValidationError("knapsack_smoothing: B must be a positive fourth power");
  }
  SmoothingLayout s;
  s.large = root;
  s.small = budget;
  const double denom = 4.0 * static_cast<double>(root) * std::log(2.0 * static_cast<double>(budget));
  s.agents = static_cast<std::size_t>(std::ceil(denom));
  s.special = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(static_cast<double>(s.agents) / denom)));
  return s;
}

inline Instance make_knapsack_smoothing(std::size_t budget) {
  const SmoothingLayout s = smoothing_layout(budget);
  const std::size_t m = s.large + s.small;
  const double big = static_cast<double>(s.large * s.large * s.large);
  Packing pk;
  pk.a = DenseMatrix(1, m);
  for (std::size_t j = 0; j < s.large; ++j) pk.a(0, j) = 1.0;
  for (std::size_t j = s.large; j < m; ++j) pk.a(0, j) = 1.0 / big;
  pk.b = {static_cast<double>(budget) / big};
  DenseMatrix u(s.agents, m);
  for (std::size_t i = 0; i < s.agents; ++i) {
    for (std::size_t j = 0; j < s.large; ++j) u(i, j) = 1.0;
    if (i < s.special) {
      for (std::size_t j = s.large; j < m; ++j) u(i, j) = 1.0;
    }
  }
  return Instance(s.agents, m, std::move(u), std::move(pk));
}

/// Three elements a, b, c of size 2 under budget 3 (scaled to sizes 1 and
/// budget 1.5), with cyclic preferences.
inline Instance make_cyclic_pb() {
  Packing pk;
  pk.a = DenseMatrix::from_rows({{1, 1, 1}});
  pk.b = {1.5};
  DenseMatrix u = DenseMatrix::from_rows({{1, 0.5, 0}, {0, 1, 0.5}, {0.5, 0, 1}});
  return Instance(3, 3, std::move(u), std::move(pk));
}

/// Random matroid instance. kind = partition | uniform | graphic | mixed
/// (mixed picks one of the three from the seed).
inline Instance make_random_matroid(std::size_t n, std::size_t m, const std::string& kind,
                                    std::uint64_t seed) {
  std::mt19937_64 rng = substream(seed, 0x6d61);
  std::string k = kind;
  if (k == "mixed") {
    static const char* kinds[] = {"partition", "uniform", "graphic"};
    k = kinds[uniform_int(rng, 0, 2)];
  }
  DenseMatrix u = detail::random_utilities(n, m, 0.6, rng);
  if (k == "partition") {
    const std::size_t groups = static_cast<std::size_t>(uniform_int(rng, 1, std::max<std::size_t>(1, m / 2)));
    PartitionMatroid p;
    p.groups.resize(groups);
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t g = j < groups ? j : static_cast<std::size_t>(uniform_int(rng, 0, groups - 1));
      p.groups[g].push_back(j);
    }
    return Instance(n, m, std::move(u), std::move(p));
  }
  if (k == "uniform") {
    const std::size_t rank = static_cast<std::size_t>(uniform_int(rng, 1, m));
    return Instance(n, m, std::move(u), UniformMatroid{rank});
  }
  if (k == "graphic") {
    const std::size_t v = static_cast<std::size_t>(uniform_int(rng, 3, std::max<std::size_t>(3, m / 2 + 2)));
    GraphicMatroid g{v, {}};
    for (std::size_t j = 0; j < m; ++j) {
      const auto a = static_cast<Index>(uniform_int(rng, 0, v - 1));
      auto b = static_cast<Index>(uniform_int(rng, 0, v - 2));
      if (b >= a) ++b;
      g.edges.push_back({a, b});
    }
    return Instance(n, m, std::move(u), std::move(g));
  }
  throw ValidationError("random_matroid: kind must be partition, uniform, graphic or mixed");
}

/// Random matching instance with distinct edges; bipartite graphs split the
/// vertices into two halves.
inline Instance make_random_matching(std::size_t n, std::size_t vertices, std::size_t edges,
                                     bool bipartite, std::uint64_t seed) {
  std::mt19937_64 rng = substream(seed, 0x6d74);
  std::vector<Edge> pool;
  const std::size_t half = vertices / 2;
  for (std::size_t a = 0; a < vertices; ++a) {
    for (std::size_t b = a + 1; b < vertices; ++b) {
      if (bipartite && !(a < half && b >= half)) continue;
      pool.push_back({a, b});
    }
  }
  if (edges == 0 || edges > pool.size()) {
    throw ValidationError("random_matching: edge count must lie in [1, " + std::to_string(pool.size()) + "]");
  }
  for (std::size_t k = 0; k < edges; ++k) {
    const auto pick = static_cast<std::size_t>(uniform_int(rng, k, pool.size() - 1));
    std::swap(pool[k], pool[pick]);
  }
  pool.resize(edges);
  DenseMatrix u = detail::random_utilities(n, edges, 0.6, rng);
  return Instance(n, edges, std::move(u), Matching{vertices, pool});
}

/// Random multi-row knapsack: sizes uniform in [0.1, 1], every budget b.
inline Instance make_random_knapsack(std::size_t n, std::size_t m, std::size_t rows, double b,
                                     double density, std::uint64_t seed) {
  if (!(b > 0.0)) throw ValidationError("random_knapsack: b must be positive");
  std::mt19937_64 rng = substream(seed, 0x6b6e);
  Packing pk;
  pk.a = DenseMatrix(rows, m);
  for (std::size_t k = 0; k < rows; ++k) {
    for (std::size_t j = 0; j < m; ++j) pk.a(k, j) = 0.1 + 0.9 * uniform01(rng);
  }
  pk.b.assign(rows, b);
  DenseMatrix u = detail::random_utilities(n, m, density, rng);
  return Instance(n, m, std::move(u), std::move(pk));
}

inline Instance generate(const GeneratorSpec& g) {
  using detail::check_known;
  using detail::param_double;
  using detail::param_int;
  using detail::positive;
  if (g.name == "example1") {
    check_known(g, {"m"});
    return make_example1(positive(g, "m", param_int(g, "m", 4), 2, 64));
  }
  if (g.name == "lemma4") {
    check_known(g, {"n"});
    return make_lemma4(positive(g, "n", param_int(g, "n", 4), 2, 64));
  }
  if (g.name == "k22") {
    check_known(g, {});
    return make_k22();
  }
  if (g.name == "bipartite_is") {
    check_known(g, {"m"});
    return make_bipartite_is(positive(g, "m", param_int(g, "m", 8), 2, 200));
  }
  if (g.name == "knapsack_smoothing") {
    check_known(g, {"B"});
    return make_knapsack_smoothing(positive(g, "B", param_int(g, "B", 4096), 1, 1 << 20));
  }
  if (g.name == "cyclic_pb") {
    check_known(g, {});
    return make_cyclic_pb();
  }
  if (g.name == "random_matroid") {
    check_known(g, {"n", "m", "kind", "seed"});
    const auto it = g.params.find("kind");
    return make_random_matroid(positive(g, "n", param_int(g, "n", 4), 1, 64),
                               positive(g, "m", param_int(g, "m", 8), 1, 64),
                               it == g.params.end() ? "mixed" : it->second, detail::param_seed(g));
  }
  if (g.name == "random_matching") {
    check_known(g, {"n", "vertices", "edges", "bipartite", "seed"});
    return make_random_matching(positive(g, "n", param_int(g, "n", 4), 1, 64),
                                positive(g, "vertices", param_int(g, "vertices", 6), 2, 64),
                                positive(g, "edges", param_int(g, "edges", 8), 1, 2016),
                                param_int(g, "bipartite", 1) != 0, detail::param_seed(g));
  }
  if (g.name == "random_knapsack") {
    check_known(g, {"n", "m", "rows", "b", "density", "seed"});
    const std::size_t m = positive(g, "m", param_int(g, "m", 10), 1, 100000);
    return make_random_knapsack(positive(g, "n", param_int(g, "n", 4), 1, 1000), m,
                                positive(g, "rows", param_int(g, "rows", 1), 1, 1000),
                                param_double(g, "b", static_cast<double>(m) / 2.0),
                                param_double(g, "density", 0.6), detail::param_seed(g));
  }
  throw ValidationError("unknown generator '" + g.name + "'");
}

}  // namespace corefair
