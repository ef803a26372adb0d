#pragma once

// Fractional benchmarks over a packing polytope: the smoothed Nash welfare
// optimum with its certificate, and the MPF value.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "corefair/errors.hpp"
#include "corefair/instance.hpp"
#include "corefair/lp.hpp"
#include "corefair/optimum.hpp"

namespace corefair {

struct MnwCertificate {
  std::vector<double> utilities;
  /// sum_i (U'_i + eps') / (U_i + eps') at the worst deviation U'.
  double q_value = 0.0;
  FractionalOutcome worst_deviation;
  double epsilon_prime = 0.0;
  std::size_t iterations = 0;
  /// sum_i ln(U_i + eps') after each round.
  std::vector<double> objective_trace;
};

struct MnwResult {
  FractionalOutcome outcome;
  MnwCertificate certificate;
};

struct MpfResult {
  double r = 0.0;
  double r_hat = 0.0;
  std::optional<FractionalOutcome> outcome;
  /// u_i(w) - (V_i / R - 1).
  std::vector<double> slacks;
  std::vector<double> optima;
  /// All agents have V_i = 0: R is set to V_max and there is no outcome.
  bool degenerate = false;
};

inline const Packing& require_packing(const Instance& inst, const char* who) {
  const auto* pk = std::get_if<Packing>(&inst.constraint());
  if (pk == nullptr) {
    throw UnsupportedConstraintError(std::string(who) + " needs a packing constraint, got " +
                                     constraint_name(inst.constraint()));
  }
  return *pk;
}

/// Q(U) = sum_i (U'_i + eps') / (U_i + eps'), maximized over the polytope.
/// Returns the value and the maximizing point.
inline std::pair<double, FractionalOutcome> certificate_value(const Instance& inst,
                                                              const Packing& polytope,
                                                              const std::vector<double>& u_hat,
                                                              double eps_prime) {
  const std::size_t n = inst.agents();
  const std::size_t m = inst.elements();
  std::vector<double> grad(m, 0.0);
  double constant = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double inv = 1.0 / (u_hat[i] + eps_prime);
    constant += eps_prime * inv;
    const double* row = inst.utilities().row(i);
    for (std::size_t j = 0; j < m; ++j) grad[j] += row[j] * inv;
  }
  const LpResult r = solve_lp_or_throw(packing_lp(polytope, grad), "certificate");
  return {r.value + constant, FractionalOutcome{r.x}};
}

namespace detail {

inline double log_objective(const std::vector<double>& u, double eps_prime) {
  double s = 0.0;
  for (double x : u) s += std::log(x + eps_prime);
  return s;
}

// argmax over t in [0, t_max] of sum_i ln(u_i + t d_i + eps'); concave.
inline double line_search(const std::vector<double>& u, const std::vector<double>& d,
                          double eps_prime, double t_max) {
  auto slope = [&](double t) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += d[i] / (u[i] + t * d[i] + eps_prime);
    return s;
  };
  if (slope(0.0) <= 0.0) return 0.0;
  if (slope(t_max) >= 0.0) return t_max;
  double lo = 0.0;
  double hi = t_max;
  for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (slope(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

inline std::vector<double> profile_of(const Instance& inst, const std::vector<double>& w) {
  return utility_profile(inst, FractionalOutcome{w});
}

}  // namespace detail

/// Maximizes sum_i ln(U_i + eps') over the polytope by away-step Frank-Wolfe
/// with exact line search. The linear subproblem is the certificate LP, so
/// the duality gap is exactly Q - n and the loop stops once Q <= n + delta.
inline MnwResult fractional_mnw(const Instance& inst, const Packing& polytope, double delta,
                                double epsilon, std::size_t max_iterations = 20000) {
  if (!(delta > 0.0) || !(epsilon > 0.0)) {
    throw ValidationError("fractional_mnw: delta and epsilon must be positive");
  }
  if (polytope.a.cols() != inst.elements()) {
    throw ValidationError("fractional_mnw: polytope dimension does not match the instance");
  }
  const std::size_t n = inst.agents();
  const std::size_t m = inst.elements();
  const double eps_prime = std::max(epsilon / (1.0 + delta), 1e-9);

  struct Atom {
    std::vector<double> w;
    std::vector<double> u;
    double weight;
  };
  std::vector<Atom> active;
  auto add_vertex = [&](const std::vector<double>& v, double weight) {
    for (Atom& a : active) {
      double diff = 0.0;
      for (std::size_t j = 0; j < m; ++j) diff = std::max(diff, std::abs(a.w[j] - v[j]));
      if (diff <= 1e-9) {
        a.weight += weight;
        return;
      }
    }
    active.push_back(Atom{v, detail::profile_of(inst, v), weight});
  };

  // Start from the average of the agents' favourite vertices.
  std::vector<std::vector<double>> starts;
  for (std::size_t i = 0; i < n; ++i) {
    if (inst.is_zero_agent(i)) continue;
    starts.push_back(solve_lp_or_throw(packing_lp(polytope, inst.utilities().row_vector(i)),
                                       "fractional_mnw")
                         .x);
  }
  if (starts.empty()) starts.push_back(std::vector<double>(m, 0.0));
  for (const auto& v : starts) add_vertex(v, 1.0 / static_cast<double>(starts.size()));

  std::vector<double> w(m, 0.0);
  std::vector<double> u(n, 0.0);
  auto rebuild = [&] {
    std::fill(w.begin(), w.end(), 0.0);
    std::fill(u.begin(), u.end(), 0.0);
    for (const Atom& a : active) {
      for (std::size_t j = 0; j < m; ++j) w[j] += a.weight * a.w[j];
      for (std::size_t i = 0; i < n; ++i) u[i] += a.weight * a.u[i];
    }
  };
  rebuild();

  MnwResult res;
  res.certificate.epsilon_prime = eps_prime;
  res.certificate.objective_trace.push_back(detail::log_objective(u, eps_prime));
  double q = 0.0;
  for (std::size_t it = 0;; ++it) {
    auto [qv, s] = certificate_value(inst, polytope, u, eps_prime);
    q = qv;
    if (q <= static_cast<double>(n) + delta) {
      res.certificate.q_value = q;
      res.certificate.worst_deviation = s;
      res.certificate.iterations = it;
      break;
    }
    if (it >= max_iterations) {
      throw ConvergenceError("fractional_mnw: certificate Q <= n + delta not reached", q);
    }
    const std::vector<double> us = detail::profile_of(inst, s.weights);
    const double fw_gap = q - static_cast<double>(n);

    // Away vertex: the active atom with the smallest gradient value.
    std::size_t away = 0;
    double away_val = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < active.size(); ++a) {
      double val = 0.0;
      for (std::size_t i = 0; i < n; ++i) val += active[a].u[i] / (u[i] + eps_prime);
      if (val < away_val) {
        away_val = val;
        away = a;
      }
    }
    double cur_val = 0.0;
    for (std::size_t i = 0; i < n; ++i) cur_val += u[i] / (u[i] + eps_prime);
    const double away_gap = cur_val - away_val;

    std::vector<double> d(n);
    if (fw_gap >= away_gap || active.size() == 1) {
      for (std::size_t i = 0; i < n; ++i) d[i] = us[i] - u[i];
      const double t = detail::line_search(u, d, eps_prime, 1.0);
      for (Atom& a : active) a.weight *= 1.0 - t;
      add_vertex(s.weights, t);
    } else {
      const double lam = active[away].weight;
      const double t_max = lam / (1.0 - lam);
      for (std::size_t i = 0; i < n; ++i) d[i] = u[i] - active[away].u[i];
      const double t = detail::line_search(u, d, eps_prime, t_max);
      for (Atom& a : active) a.weight *= 1.0 + t;
      active[away].weight -= t;
    }
    active.erase(std::remove_if(active.begin(), active.end(),
                                [](const Atom& a) { return a.weight <= 1e-15; }),
                 active.end());
    double total = 0.0;
    for (const Atom& a : active) total += a.weight;
    for (Atom& a : active) a.weight /= total;
    rebuild();
    res.certificate.objective_trace.push_back(detail::log_objective(u, eps_prime));
  }
  for (double& x : w) x = std::clamp(x, 0.0, 1.0);
  res.outcome = FractionalOutcome{w};
  res.certificate.utilities = utility_profile(inst, res.outcome);
  return res;
}

inline MnwResult fractional_mnw(const Instance& inst, double delta, double epsilon) {
  return fractional_mnw(inst, require_packing(inst, "fractional_mnw"), delta, epsilon);
}

/// MPF value: max r_hat with u_i(w) >= V_i r_hat - 1 for all i and w in P,
/// R = 1 / r_hat.
inline MpfResult mpf(const Instance& inst) {
  const Packing& pk = require_packing(inst, "mpf");
  const std::size_t n = inst.agents();
  const std::size_t m = inst.elements();
  MpfResult res;
  res.optima = agent_optima(inst, OptimumMode::fractional);
  const double vmax = *std::max_element(res.optima.begin(), res.optima.end());
  if (!(vmax > 0.0)) {
    res.degenerate = true;
    res.r = vmax;
    res.slacks.assign(n, 0.0);
    return res;
  }
  LinearProgram lp;
  lp.objective.assign(m + 1, 0.0);
  lp.objective[m] = 1.0;
  lp.upper.assign(m + 1, 1.0);
  lp.upper[m] = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(res.optima[i] > 0.0)) continue;
    std::vector<double> row(m + 1, 0.0);
    for (std::size_t j = 0; j < m; ++j) row[j] = -inst.utility(i, j);
    row[m] = res.optima[i];
    lp.add_row(std::move(row), RowSense::le, 1.0);
  }
  for (std::size_t k = 0; k < pk.a.rows(); ++k) {
    std::vector<double> row = pk.a.row_vector(k);
    row.push_back(0.0);
    lp.add_row(std::move(row), RowSense::le, pk.b[k]);
  }
  const LpResult r = solve_lp_or_throw(lp, "mpf");
  res.r_hat = r.x[m];
  res.r = 1.0 / res.r_hat;
  res.outcome = FractionalOutcome{std::vector<double>(r.x.begin(), r.x.begin() + static_cast<long>(m))};
  const std::vector<double> u = utility_profile(inst, *res.outcome);
  res.slacks.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.slacks[i] = u[i] - (res.optima[i] * res.r_hat - 1.0);
  return res;
}

}  // namespace corefair
