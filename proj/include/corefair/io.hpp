#pragma once

// JSON instance format and report serialization.

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "corefair/errors.hpp"
#include "corefair/fractional.hpp"
#include "corefair/instance.hpp"
#include "corefair/report.hpp"
#include "corefair/verifier.hpp"

namespace corefair {

using Json = nlohmann::json;

namespace detail {

/// Accepts a JSON number or a string "p/q" or "p".
inline double parse_rational(const Json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) throw ValidationError(where + ": expected a number or \"p/q\" string");
  const std::string s = v.get<std::string>();
  const auto slash = s.find('/');
  try {
    std::size_t pos = 0;
    if (slash == std::string::npos) {
      const double x = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return x;
    }
    const std::string ps = s.substr(0, slash);
    const std::string qs = s.substr(slash + 1);
    const double p = std::stod(ps, &pos);
    if (pos != ps.size()) throw std::invalid_argument(s);
    const double q = std::stod(qs, &pos);
    if (pos != qs.size()) throw std::invalid_argument(s);
    if (q == 0.0) throw ValidationError(where + ": zero denominator in \"" + s + "\"");
    return p / q;
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    throw ValidationError(where + ": cannot parse \"" + s + "\" as a rational");
  }
}

inline const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ValidationError(where + ": missing field '" + key + "'");
  }
  return obj.at(key);
}

inline std::size_t as_index(const Json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ValidationError(where + ": expected a nonnegative integer");
  }
  return v.get<std::size_t>();
}

inline DenseMatrix parse_matrix(const Json& v, std::size_t rows, std::size_t cols,
                                const std::string& where) {
  if (!v.is_array() || v.size() != rows) {
    throw ValidationError(where + ": expected " + std::to_string(rows) + " rows");
  }
  DenseMatrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!v[r].is_array() || v[r].size() != cols) {
      throw ValidationError(where + ": row " + std::to_string(r) + " must have " +
                            std::to_string(cols) + " entries");
    }
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = parse_rational(v[r][c], where);
  }
  return out;
}

inline std::vector<Edge> parse_edges(const Json& v, const std::string& where) {
  if (!v.is_array()) throw ValidationError(where + ": edges must be an array");
  std::vector<Edge> edges;
  for (const Json& e : v) {
    if (!e.is_array() || e.size() != 2) throw ValidationError(where + ": each edge is a pair [u, v]");
    edges.push_back({as_index(e[0], where), as_index(e[1], where)});
  }
  return edges;
}

inline Json matrix_json(const DenseMatrix& a) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < a.rows(); ++r) rows.push_back(a.row_vector(r));
  return rows;
}

inline Json edges_json(const std::vector<Edge>& edges) {
  Json out = Json::array();
  for (const Edge& e : edges) out.push_back({e.u, e.v});
  return out;
}

/// Non-finite values have no JSON literal; they are written as strings.
inline Json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline Json numbers(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

}  // namespace detail

inline ConstraintSpec parse_constraint(const Json& c, std::size_t n, std::size_t m) {
  const std::string where = "constraint";
  const Json& type = detail::field(c, "type", where);
  if (!type.is_string()) throw ValidationError("constraint: 'type' must be a string");
  const std::string t = type.get<std::string>();
  if (t == "partition_matroid") {
    PartitionMatroid p;
    const Json& groups = detail::field(c, "groups", where);
    if (!groups.is_array()) throw ValidationError("partition_matroid: groups must be an array");
    for (const Json& g : groups) {
      if (!g.is_array()) throw ValidationError("partition_matroid: each group is an index list");
      std::vector<Index> group;
      for (const Json& j : g) group.push_back(detail::as_index(j, "partition_matroid"));
      p.groups.push_back(std::move(group));
    }
    return p;
  }
  if (t == "uniform_matroid") {
    return UniformMatroid{detail::as_index(detail::field(c, "rank", where), "uniform_matroid")};
  }
  if (t == "graphic_matroid") {
    return GraphicMatroid{detail::as_index(detail::field(c, "vertices", where), "graphic_matroid"),
                          detail::parse_edges(detail::field(c, "edges", where), "graphic_matroid")};
  }
  if (t == "matching") {
    return Matching{detail::as_index(detail::field(c, "vertices", where), "matching"),
                    detail::parse_edges(detail::field(c, "edges", where), "matching")};
  }
  if (t == "packing") {
    const Json& b = detail::field(c, "b", where);
    if (!b.is_array()) throw ValidationError("packing: b must be an array");
    Packing p;
    p.a = detail::parse_matrix(detail::field(c, "A", where), b.size(), m, "packing.A");
    for (const Json& x : b) p.b.push_back(detail::parse_rational(x, "packing.b"));
    return p;
  }
  if (t == "private_goods") {
    return PrivateGoods{n, detail::as_index(detail::field(c, "goods", where), "private_goods")};
  }
  throw ValidationError("unknown constraint type '" + t + "'");
}

inline Json constraint_json(const ConstraintSpec& spec) {
  Json c;
  c["type"] = constraint_name(spec);
  if (const auto* p = std::get_if<PartitionMatroid>(&spec)) c["groups"] = p->groups;
  if (const auto* u = std::get_if<UniformMatroid>(&spec)) c["rank"] = u->rank;
  if (const auto* g = std::get_if<GraphicMatroid>(&spec)) {
    c["vertices"] = g->vertices;
    c["edges"] = detail::edges_json(g->edges);
  }
  if (const auto* g = std::get_if<Matching>(&spec)) {
    c["vertices"] = g->vertices;
    c["edges"] = detail::edges_json(g->edges);
  }
  if (const auto* p = std::get_if<Packing>(&spec)) {
    c["A"] = detail::matrix_json(p->a);
    c["b"] = p->b;
  }
  if (const auto* p = std::get_if<PrivateGoods>(&spec)) c["goods"] = p->goods;
  return c;
}

/// Private-goods utilities may be given per good (n x goods); they are
/// expanded to the element encoding, which is also what emit writes.
inline Instance parse_instance(const Json& j) {
  if (!j.is_object()) throw ValidationError("instance: expected a JSON object");
  const std::size_t n = detail::as_index(detail::field(j, "agents", "instance"), "instance.agents");
  const std::size_t m = detail::as_index(detail::field(j, "elements", "instance"), "instance.elements");
  const Json& cj = detail::field(j, "constraint", "instance");
  ConstraintSpec spec = parse_constraint(cj, n, m);
  const Json& uj = detail::field(j, "utilities", "instance");
  if (const auto* pg = std::get_if<PrivateGoods>(&spec)) {
    if (uj.is_array() && !uj.empty() && uj[0].is_array() && uj[0].size() == pg->goods &&
        pg->goods != m) {
      const DenseMatrix compact = detail::parse_matrix(uj, n, pg->goods, "utilities");
      DenseMatrix u(n, m);
      for (std::size_t g = 0; g < pg->goods; ++g) {
        for (std::size_t i = 0; i < n; ++i) {
          if (pg->element(g, i) >= m) throw ValidationError("private_goods: element count must equal goods * agents");
          u(i, pg->element(g, i)) = compact(i, g);
        }
      }
      return Instance(n, m, std::move(u), std::move(spec));
    }
  }
  return Instance(n, m, detail::parse_matrix(uj, n, m, "utilities"), std::move(spec));
}

inline Instance parse_instance(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("instance: malformed JSON: ") + e.what());
  }
  return parse_instance(j);
}

inline Instance parse_instance(const char* text) { return parse_instance(std::string(text)); }

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open instance file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str());
}

inline Json instance_json(const Instance& inst) {
  Json j;
  j["agents"] = inst.agents();
  j["elements"] = inst.elements();
  j["utilities"] = detail::matrix_json(inst.utilities());
  j["constraint"] = constraint_json(inst.constraint());
  return j;
}

inline std::string emit_instance(const Instance& inst) { return instance_json(inst).dump(2); }

inline Json grouping_json(const GroupingDiagnostics& g) {
  Json j;
  j["q_levels"] = detail::numbers(g.q_levels);
  j["levels"] = g.levels;
  j["threshold"] = g.threshold;
  j["q_light"] = g.q_light;
  j["degenerate"] = g.degenerate;
  j["group_sizes"] = g.group_sizes;
  j["violations"] = g.violations;
  Json fractions = Json::array();
  for (std::size_t l = 0; l < g.violations.size() && l < g.group_sizes.size(); ++l) {
    fractions.push_back(g.group_sizes[l] == 0 ? 0.0
                                              : static_cast<double>(g.violations[l].size()) /
                                                    static_cast<double>(g.group_sizes[l]));
  }
  j["violation_fractions"] = fractions;
  j["bound_holds"] = g.bound_holds;
  j["all_bounds_hold"] = g.all_bounds_hold();
  return j;
}

inline Json report_json(const SolverReport& r) {
  Json j;
  j["solver"] = r.solver;
  j["outcome"] = r.outcome.elements();
  j["objective_trace"] = detail::numbers(r.objective_trace);
  j["iterations"] = r.iterations;
  j["seed"] = r.seed ? Json(*r.seed) : Json(nullptr);
  j["retries"] = r.retries;
  Json scalars = Json::object();
  for (const auto& [k, v] : r.scalars) scalars[k] = detail::number(v);
  j["scalars"] = scalars;
  if (r.grouping) j["grouping"] = grouping_json(*r.grouping);
  return j;
}

inline Json certificate_json(const CoreCertificate& c) {
  Json j;
  j["blocked"] = c.blocked;
  j["delta"] = c.delta;
  j["alpha"] = c.alpha;
  j["coalition"] = c.coalition;
  j["deviation"] = c.deviation ? Json(c.deviation->elements()) : Json(nullptr);
  j["fractional_deviation"] =
      c.fractional_deviation ? detail::numbers(c.fractional_deviation->weights) : Json(nullptr);
  j["slacks"] = detail::numbers(c.slacks);
  Json b;
  b["mode"] = to_string(c.bounds.mode);
  b["deviation_space"] = c.bounds.space == DeviationSpace::bases ? "bases" : "independent_sets";
  b["deviations_scanned"] = c.bounds.deviations_scanned;
  b["coalitions_scanned"] = c.bounds.coalitions_scanned;
  b["max_coalition_size"] = c.bounds.max_coalition_size;
  j["search"] = b;
  return j;
}

inline Json mpf_json(const MpfResult& r) {
  Json j;
  j["r"] = detail::number(r.r);
  j["r_hat"] = detail::number(r.r_hat);
  j["outcome"] = r.outcome ? detail::numbers(r.outcome->weights) : Json(nullptr);
  j["slacks"] = detail::numbers(r.slacks);
  j["optima"] = detail::numbers(r.optima);
  j["degenerate"] = r.degenerate;
  return j;
}

inline Json mnw_json(const MnwResult& r) {
  Json j;
  j["outcome"] = detail::numbers(r.outcome.weights);
  Json c;
  c["utilities"] = detail::numbers(r.certificate.utilities);
  c["q_value"] = detail::number(r.certificate.q_value);
  c["worst_deviation"] = detail::numbers(r.certificate.worst_deviation.weights);
  c["epsilon_prime"] = r.certificate.epsilon_prime;
  c["iterations"] = r.certificate.iterations;
  c["objective_trace"] = detail::numbers(r.certificate.objective_trace);
  j["certificate"] = c;
  return j;
}

inline Json error_json(const std::string& kind, int code, const std::string& message) {
  Json e;
  e["kind"] = kind;
  e["code"] = code;
  e["message"] = message;
  return Json{{"error", e}};
}

inline Json error_json(const Error& err) {
  Json j = error_json(err.kind(), static_cast<int>(err.code()), err.what());
  if (const auto* s = dynamic_cast<const SizeCapError*>(&err)) {
    j["error"]["cap"] = s->cap();
    j["error"]["limit"] = s->limit();
    j["error"]["actual"] = s->actual();
  }
  if (const auto* c = dynamic_cast<const ConvergenceError*>(&err)) {
    j["error"]["last_value"] = detail::number(c->last_value());
  }
  if (const auto* f = dynamic_cast<const InfeasibleError*>(&err)) {
    j["error"]["failure_fraction"] = f->failure_fraction();
  }
  return j;
}

}  // namespace corefair
