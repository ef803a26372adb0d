#pragma once

// Problem data model: agents, elements, additive utilities, and the
// constraint families that define which element subsets are feasible.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "corefair/errors.hpp"

namespace corefair {

using Index = std::size_t;

/// Absolute tolerance used for every utility comparison.
inline constexpr double kTolerance = 1e-9;

/// Row-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.front().size();
    DenseMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
      if (rows[i].size() != c) {
        throw ValidationError("ragged matrix: row " + std::to_string(i) + " has " +
                              std::to_string(rows[i].size()) + " entries, expected " +
                              std::to_string(c));
      }
      std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + i * c);
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  const double* row(std::size_t r) const { return data_.data() + r * cols_; }
  double* row(std::size_t r) { return data_.data() + r * cols_; }

  std::vector<double> row_vector(std::size_t r) const {
    return std::vector<double>(row(r), row(r) + cols_);
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Edge {
  Index u = 0;
  Index v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// One pick per group; groups are disjoint element-index lists.
struct PartitionMatroid {
  std::vector<std::vector<Index>> groups;
  friend bool operator==(const PartitionMatroid&, const PartitionMatroid&) = default;
};

/// Bases are the k-subsets; independent sets have at most k elements.
struct UniformMatroid {
  std::size_t rank = 0;
  friend bool operator==(const UniformMatroid&, const UniformMatroid&) = default;
};

/// Elements are the edges; bases are spanning forests.
struct GraphicMatroid {
  std::size_t vertices = 0;
  std::vector<Edge> edges;
  friend bool operator==(const GraphicMatroid&, const GraphicMatroid&) = default;
};

/// Elements are the edges; feasible outcomes are matchings.
struct Matching {
  std::size_t vertices = 0;
  std::vector<Edge> edges;
  friend bool operator==(const Matching&, const Matching&) = default;
};

/// Feasible outcomes satisfy A x <= b with A in [0,1]^{K x m}, b > 0.
struct Packing {
  DenseMatrix a;
  std::vector<double> b;
  friend bool operator==(const Packing&, const Packing&) = default;
};

/// Private goods encoded as public goods: element `good * agents + agent`
/// means "good goes to agent", and an outcome assigns every good exactly once.
struct PrivateGoods {
  std::size_t agents = 0;
  std::size_t goods = 0;

  Index element(Index good, Index agent) const { return good * agents + agent; }
  Index good_of(Index element) const { return element / agents; }
  Index agent_of(Index element) const { return element % agents; }

  friend bool operator==(const PrivateGoods&, const PrivateGoods&) = default;
};

using ConstraintSpec = std::variant<PartitionMatroid, UniformMatroid, GraphicMatroid,
                                    Matching, Packing, PrivateGoods>;

inline std::string constraint_name(const ConstraintSpec& spec) {
  struct Namer {
    std::string operator()(const PartitionMatroid&) const { return "partition_matroid"; }
    std::string operator()(const UniformMatroid&) const { return "uniform_matroid"; }
    std::string operator()(const GraphicMatroid&) const { return "graphic_matroid"; }
    std::string operator()(const Matching&) const { return "matching"; }
    std::string operator()(const Packing&) const { return "packing"; }
    std::string operator()(const PrivateGoods&) const { return "private_goods"; }
  };
  return std::visit(Namer{}, spec);
}

inline bool is_matroid(const ConstraintSpec& spec) {
  return std::holds_alternative<PartitionMatroid>(spec) ||
         std::holds_alternative<UniformMatroid>(spec) ||
         std::holds_alternative<GraphicMatroid>(spec) ||
         std::holds_alternative<PrivateGoods>(spec);
}

/// A chosen subset of elements, kept sorted and duplicate-free.
class IntegralOutcome {
 public:
  IntegralOutcome() = default;
  explicit IntegralOutcome(std::vector<Index> chosen) : chosen_(std::move(chosen)) {
    std::sort(chosen_.begin(), chosen_.end());
    chosen_.erase(std::unique(chosen_.begin(), chosen_.end()), chosen_.end());
  }

  const std::vector<Index>& elements() const noexcept { return chosen_; }
  std::size_t size() const noexcept { return chosen_.size(); }
  bool empty() const noexcept { return chosen_.empty(); }
  bool contains(Index j) const {
    return std::binary_search(chosen_.begin(), chosen_.end(), j);
  }

  IntegralOutcome with_swap(Index remove, Index add) const {
    std::vector<Index> next;
    next.reserve(chosen_.size());
    for (Index j : chosen_) {
      if (j != remove) next.push_back(j);
    }
    next.push_back(add);
    return IntegralOutcome(std::move(next));
  }

  /// Indicator vector of length m.
  std::vector<double> indicator(std::size_t m) const {
    std::vector<double> x(m, 0.0);
    for (Index j : chosen_) x[j] = 1.0;
    return x;
  }

  friend bool operator==(const IntegralOutcome&, const IntegralOutcome&) = default;
  friend auto operator<=>(const IntegralOutcome& a, const IntegralOutcome& b) {
    return a.chosen_ <=> b.chosen_;
  }

 private:
  std::vector<Index> chosen_;
};

/// Per-element weights in [0,1].
struct FractionalOutcome {
  std::vector<double> weights;
  friend bool operator==(const FractionalOutcome&, const FractionalOutcome&) = default;
};

namespace detail {

inline void check_edges(const std::vector<Edge>& edges, std::size_t vertices,
                        const char* what) {
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& ed = edges[e];
    if (ed.u >= vertices || ed.v >= vertices) {
      throw ValidationError(std::string(what) + ": edge " + std::to_string(e) +
                            " references a vertex outside [0, " +
                            std::to_string(vertices) + ")");
    }
    if (ed.u == ed.v) {
      throw ValidationError(std::string(what) + ": edge " + std::to_string(e) +
                            " is a self-loop");
    }
  }
}

inline void validate_constraint(const ConstraintSpec& spec, std::size_t n,
                                std::size_t m) {
  if (const auto* p = std::get_if<PartitionMatroid>(&spec)) {
    std::vector<bool> seen(m, false);
    for (const auto& g : p->groups) {
      if (g.empty()) throw ValidationError("partition_matroid: empty group");
      for (Index j : g) {
        if (j >= m) throw ValidationError("partition_matroid: element index out of range");
        if (seen[j]) {
          throw ValidationError("partition_matroid: element " + std::to_string(j) +
                                " appears in two groups");
        }
        seen[j] = true;
      }
    }
  } else if (const auto* u = std::get_if<UniformMatroid>(&spec)) {
    if (u->rank == 0) throw ValidationError("uniform_matroid: rank must be positive");
    if (u->rank > m) throw ValidationError("uniform_matroid: rank exceeds element count");
  } else if (const auto* g = std::get_if<GraphicMatroid>(&spec)) {
    if (g->edges.size() != m) {
      throw ValidationError("graphic_matroid: edge count must equal element count");
    }
    check_edges(g->edges, g->vertices, "graphic_matroid");
  } else if (const auto* mt = std::get_if<Matching>(&spec)) {
    if (mt->edges.size() != m) {
      throw ValidationError("matching: edge count must equal element count");
    }
    check_edges(mt->edges, mt->vertices, "matching");
  } else if (const auto* pk = std::get_if<Packing>(&spec)) {
    if (pk->a.cols() != m) throw ValidationError("packing: A must have one column per element");
    if (pk->a.rows() != pk->b.size()) {
      throw ValidationError("packing: A and b disagree on the number of constraints");
    }
    for (std::size_t k = 0; k < pk->a.rows(); ++k) {
      if (!(pk->b[k] > 0.0) || !std::isfinite(pk->b[k])) {
        throw ValidationError("packing: b entries must be positive and finite");
      }
      for (std::size_t j = 0; j < m; ++j) {
        const double a = pk->a(k, j);
        if (!(a >= 0.0 && a <= 1.0)) {
          throw ValidationError("packing: A entries must lie in [0,1]");
        }
      }
    }
  } else if (const auto* pg = std::get_if<PrivateGoods>(&spec)) {
    if (pg->agents != n) throw ValidationError("private_goods: agent count mismatch");
    if (pg->goods == 0) throw ValidationError("private_goods: need at least one good");
    if (pg->goods * pg->agents != m) {
      throw ValidationError("private_goods: element count must equal goods * agents");
    }
  }
}

}  // namespace detail

/// An instance: n agents, m elements, an n x m nonnegative utility matrix and
/// one constraint. Immutable after construction.
class Instance {
 public:
  Instance(std::size_t n_agents, std::size_t n_elements, DenseMatrix utilities,
           ConstraintSpec constraint)
      : n_(n_agents),
        m_(n_elements),
        utilities_(std::move(utilities)),
        constraint_(std::move(constraint)),
        zero_agent_(n_agents, false) {
    if (n_ == 0) throw ValidationError("instance needs at least one agent");
    if (m_ == 0) throw ValidationError("instance needs at least one element");
    if (utilities_.rows() != n_ || utilities_.cols() != m_) {
      throw ValidationError("utilities must be an " + std::to_string(n_) + " x " +
                            std::to_string(m_) + " matrix");
    }
    for (std::size_t i = 0; i < n_; ++i) {
      bool any = false;
      for (std::size_t j = 0; j < m_; ++j) {
        const double u = utilities_(i, j);
        if (!std::isfinite(u) || u < 0.0) {
          throw ValidationError("negative or non-finite utility at agent " +
                                std::to_string(i) + ", element " + std::to_string(j));
        }
        any = any || u > 0.0;
      }
      zero_agent_[i] = !any;
    }
    detail::validate_constraint(constraint_, n_, m_);
  }

  std::size_t agents() const noexcept { return n_; }
  std::size_t elements() const noexcept { return m_; }
  const DenseMatrix& utilities() const noexcept { return utilities_; }
  double utility(Index agent, Index element) const { return utilities_(agent, element); }
  const ConstraintSpec& constraint() const noexcept { return constraint_; }

  /// True when the agent values no element at all.
  bool is_zero_agent(Index agent) const { return zero_agent_.at(agent); }
  const std::vector<bool>& zero_agents() const noexcept { return zero_agent_; }

  Instance with_utilities(DenseMatrix u) const {
    return Instance(n_, m_, std::move(u), constraint_);
  }

  friend bool operator==(const Instance& a, const Instance& b) {
    return a.n_ == b.n_ && a.m_ == b.m_ && a.utilities_ == b.utilities_ &&
           a.constraint_ == b.constraint_;
  }

 private:
  std::size_t n_;
  std::size_t m_;
  DenseMatrix utilities_;
  ConstraintSpec constraint_;
  std::vector<bool> zero_agent_;
};

/// Divides each agent row by its maximum entry. All-zero rows stay as they
/// are and remain flagged through Instance::is_zero_agent.
inline Instance normalize_utilities(const Instance& inst) {
  DenseMatrix u = inst.utilities();
  for (std::size_t i = 0; i < inst.agents(); ++i) {
    double* row = u.row(i);
    const double mx = *std::max_element(row, row + inst.elements());
    if (mx > 0.0) {
      for (std::size_t j = 0; j < inst.elements(); ++j) row[j] /= mx;
    }
  }
  return inst.with_utilities(std::move(u));
}

inline bool is_normalized(const Instance& inst) {
  for (std::size_t i = 0; i < inst.agents(); ++i) {
    if (inst.is_zero_agent(i)) continue;
    const double* row = inst.utilities().row(i);
    const double mx = *std::max_element(row, row + inst.elements());
    if (std::abs(mx - 1.0) > kTolerance) return false;
  }
  return true;
}

namespace detail {
inline void check_agent(const Instance& inst, Index agent) {
  if (agent >= inst.agents()) {
    throw ValidationError("agent index " + std::to_string(agent) + " out of range");
  }
}
inline void check_elements(const Instance& inst, const IntegralOutcome& c) {
  if (!c.empty() && c.elements().back() >= inst.elements()) {
    throw ValidationError("element index " + std::to_string(c.elements().back()) +
                          " out of range");
  }
}
}  // namespace detail

inline double utility(const Instance& inst, Index agent, const IntegralOutcome& c) {
  detail::check_agent(inst, agent);
  detail::check_elements(inst, c);
  double s = 0.0;
  for (Index j : c.elements()) s += inst.utility(agent, j);
  return s;
}

inline double utility(const Instance& inst, Index agent, const FractionalOutcome& w) {
  detail::check_agent(inst, agent);
  if (w.weights.size() != inst.elements()) {
    throw ValidationError("fractional outcome has the wrong number of weights");
  }
  double s = 0.0;
  const double* row = inst.utilities().row(agent);
  for (std::size_t j = 0; j < inst.elements(); ++j) s += row[j] * w.weights[j];
  return s;
}

/// Utilities of every agent at once.
inline std::vector<double> utility_profile(const Instance& inst, const IntegralOutcome& c) {
  detail::check_elements(inst, c);
  std::vector<double> u(inst.agents(), 0.0);
  for (std::size_t i = 0; i < inst.agents(); ++i) {
    const double* row = inst.utilities().row(i);
    for (Index j : c.elements()) u[i] += row[j];
  }
  return u;
}

inline std::vector<double> utility_profile(const Instance& inst, const FractionalOutcome& w) {
  std::vector<double> u(inst.agents(), 0.0);
  for (std::size_t i = 0; i < inst.agents(); ++i) u[i] = utility(inst, i, w);
  return u;
}

namespace detail {

/// Union-find over vertex indices.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

inline bool is_forest(const std::vector<Edge>& edges, std::size_t vertices,
                      const std::vector<Index>& chosen) {
  DisjointSets ds(vertices);
  for (Index e : chosen) {
    if (!ds.unite(edges[e].u, edges[e].v)) return false;
  }
  return true;
}

inline std::size_t graphic_rank(const std::vector<Edge>& edges, std::size_t vertices) {
  DisjointSets ds(vertices);
  std::size_t r = 0;
  for (const Edge& e : edges) r += ds.unite(e.u, e.v) ? 1 : 0;
  return r;
}

inline bool is_matching(const std::vector<Edge>& edges, std::size_t vertices,
                        const std::vector<Index>& chosen) {
  std::vector<bool> used(vertices, false);
  for (Index e : chosen) {
    if (used[edges[e].u] || used[edges[e].v]) return false;
    used[edges[e].u] = used[edges[e].v] = true;
  }
  return true;
}

inline bool satisfies_packing(const Packing& p, const std::vector<Index>& chosen,
                              double scale = 1.0) {
  for (std::size_t k = 0; k < p.a.rows(); ++k) {
    double s = 0.0;
    for (Index j : chosen) s += p.a(k, j);
    if (s > scale * p.b[k] + kTolerance) return false;
  }
  return true;
}

/// Partition-matroid test. `basis` demands exactly one pick per group.
inline bool partition_ok(const PartitionMatroid& p, std::size_t m,
                         const std::vector<Index>& chosen, bool basis) {
  std::vector<long> group_of(m, -1);
  for (std::size_t g = 0; g < p.groups.size(); ++g) {
    for (Index j : p.groups[g]) group_of[j] = static_cast<long>(g);
  }
  std::vector<int> picks(p.groups.size(), 0);
  for (Index j : chosen) {
    if (group_of[j] < 0) return false;
    if (++picks[static_cast<std::size_t>(group_of[j])] > 1) return false;
  }
  if (basis) {
    for (int c : picks) {
      if (c != 1) return false;
    }
  }
  return true;
}

inline PartitionMatroid private_goods_partition(const PrivateGoods& pg) {
  PartitionMatroid p;
  p.groups.resize(pg.goods);
  for (Index g = 0; g < pg.goods; ++g) {
    for (Index a = 0; a < pg.agents; ++a) p.groups[g].push_back(pg.element(g, a));
  }
  return p;
}

inline std::size_t ground_size(const ConstraintSpec& spec) {
  struct Sizer {
    std::size_t operator()(const PartitionMatroid& p) const {
      std::size_t mx = 0;
      for (const auto& g : p.groups)
        for (Index j : g) mx = std::max(mx, j + 1);
      return mx;
    }
    std::size_t operator()(const UniformMatroid& u) const { return u.rank; }
    std::size_t operator()(const GraphicMatroid& g) const { return g.edges.size(); }
    std::size_t operator()(const Matching& g) const { return g.edges.size(); }
    std::size_t operator()(const Packing& p) const { return p.a.cols(); }
    std::size_t operator()(const PrivateGoods& p) const { return p.agents * p.goods; }
  };
  return std::visit(Sizer{}, spec);
}

}  // namespace detail

/// Feasibility as used for solver output: matroid outcomes must be bases,
/// matching outcomes matchings, packing outcomes must satisfy A x <= b, and
/// private-goods outcomes must assign every good to exactly one agent.
inline bool is_feasible(const IntegralOutcome& c, const ConstraintSpec& spec) {
  const auto& ch = c.elements();
  if (const auto* p = std::get_if<PartitionMatroid>(&spec)) {
    return detail::partition_ok(*p, std::max(detail::ground_size(spec),
                                             ch.empty() ? 0 : ch.back() + 1),
                                ch, true);
  }
  if (const auto* u = std::get_if<UniformMatroid>(&spec)) return ch.size() == u->rank;
  if (const auto* g = std::get_if<GraphicMatroid>(&spec)) {
    if (!ch.empty() && ch.back() >= g->edges.size()) return false;
    return detail::is_forest(g->edges, g->vertices, ch) &&
           ch.size() == detail::graphic_rank(g->edges, g->vertices);
  }
  if (const auto* mt = std::get_if<Matching>(&spec)) {
    if (!ch.empty() && ch.back() >= mt->edges.size()) return false;
    return detail::is_matching(mt->edges, mt->vertices, ch);
  }
  if (const auto* pk = std::get_if<Packing>(&spec)) {
    if (!ch.empty() && ch.back() >= pk->a.cols()) return false;
    return detail::satisfies_packing(*pk, ch);
  }
  const auto& pg = std::get<PrivateGoods>(spec);
  if (!ch.empty() && ch.back() >= pg.agents * pg.goods) return false;
  return detail::partition_ok(detail::private_goods_partition(pg), pg.agents * pg.goods,
                              ch, true);
}

/// Relaxed feasibility: independent sets for the matroid families, otherwise
/// identical to is_feasible.
inline bool is_independent(const IntegralOutcome& c, const ConstraintSpec& spec) {
  const auto& ch = c.elements();
  if (const auto* p = std::get_if<PartitionMatroid>(&spec)) {
    return detail::partition_ok(*p, std::max(detail::ground_size(spec),
                                             ch.empty() ? 0 : ch.back() + 1),
                                ch, false);
  }
  if (const auto* u = std::get_if<UniformMatroid>(&spec)) return ch.size() <= u->rank;
  if (const auto* g = std::get_if<GraphicMatroid>(&spec)) {
    if (!ch.empty() && ch.back() >= g->edges.size()) return false;
    return detail::is_forest(g->edges, g->vertices, ch);
  }
  if (const auto* pg = std::get_if<PrivateGoods>(&spec)) {
    if (!ch.empty() && ch.back() >= pg->agents * pg->goods) return false;
    return detail::partition_ok(detail::private_goods_partition(*pg),
                                pg->agents * pg->goods, ch, false);
  }
  return is_feasible(c, spec);
}

/// max_k (sum_j a_kj) / b_k.
inline double width(const ConstraintSpec& spec) {
  const auto* pk = std::get_if<Packing>(&spec);
  if (pk == nullptr) {
    throw UnsupportedConstraintError("width is defined for packing constraints only, got " +
                                     constraint_name(spec));
  }
  double rho = 0.0;
  for (std::size_t k = 0; k < pk->a.rows(); ++k) {
    const double* row = pk->a.row(k);
    const double s = std::accumulate(row, row + pk->a.cols(), 0.0);
    rho = std::max(rho, s / pk->b[k]);
  }
  return rho;
}

/// Whether a fractional point lies in {w in [0,1]^m : A w <= b}.
inline bool in_packing_polytope(const Packing& p, const FractionalOutcome& w,
                                double tol = 1e-7) {
  if (w.weights.size() != p.a.cols()) return false;
  for (double x : w.weights) {
    if (x < -tol || x > 1.0 + tol) return false;
  }
  for (std::size_t k = 0; k < p.a.rows(); ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < p.a.cols(); ++j) s += p.a(k, j) * w.weights[j];
    if (s > p.b[k] + tol) return false;
  }
  return true;
}

}  // namespace corefair
