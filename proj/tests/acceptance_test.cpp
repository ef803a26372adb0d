// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "corefair/corefair.hpp"
#include "oracles.hpp"

#ifndef COREFAIR_CLI
#error "COREFAIR_CLI must name the command-line binary"
#endif

using namespace corefair;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void fail(const std::string& why) {
    if (pass) detail << why;
    pass = false;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::vector<Index>> all_outcomes(const Instance& inst) {
  std::vector<std::vector<Index>> out;
  oracle::for_each_subset(inst, false, 1.0, [&](const std::vector<Index>& c) { out.push_back(c); });
  return out;
}

std::string join(const std::vector<Index>& v) {
  std::string s = "{";
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
  return s + "}";
}

// ---------------------------------------------------------------------------

void c1(Outcome& r) {
  const auto t0 = Clock::now();
  const auto pool = oracle::matroid_pool(210, 501);
  std::size_t checked = 0;
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const SolverReport rep = local_search_matroid(pool[k], 0.1);
    const CoreCertificate c = find_blocking_coalition(pool[k], rep.outcome, 0.0, 2.1, VerifyMode::integral);
    if (c.blocked) r.fail("instance " + std::to_string(k) + " blocked by " + join(c.coalition) + "; ");
    ++checked;
  }
  const double secs = seconds_since(t0);
  if (secs >= 300.0) r.fail("runtime over 5 min; ");
  r.detail << checked << " instances, " << secs << " s";
}

void c2(Outcome& r) {
  const Instance inst = make_example1(4);
  const IntegralOutcome firsts = example1_firsts(4);
  const IntegralOutcome seconds = example1_seconds(4);
  if (exact_smooth_mnw(inst, 0.0) != firsts) r.fail("ell=0 optimum is not the firsts; ");
  const CoreCertificate b = find_blocking_coalition(inst, firsts, 0.0, 0.9, VerifyMode::integral);
  if (!b.blocked || b.coalition != std::vector<Index>({4, 5, 6, 7}) || b.deviation != seconds) {
    r.fail("firsts not blocked at (0, 0.9) by Y; ");
  }
  if (find_blocking_coalition(inst, seconds, 0.0, 1.0, VerifyMode::integral).blocked) {
    r.fail("seconds blocked at (0, 1); ");
  }
  // Firsts are blocked exactly when 1 + delta + alpha < m/2.
  for (double delta : {0.0, 0.25, 0.5}) {
    for (double alpha : {0.0, 0.2, 0.45, 0.5, 0.7, 0.75, 0.99, 1.0, 1.3}) {
      const bool want = 1.0 + delta + alpha < 2.0 - 1e-12;
      if (find_blocking_coalition(inst, firsts, delta, alpha, VerifyMode::integral).blocked != want) {
        std::ostringstream s;
        s << "threshold mismatch at (" << delta << ", " << alpha << "); ";
        r.fail(s.str());
      }
    }
  }
  r.detail << "witness " << join(b.coalition) << ", slack " << (b.slacks.empty() ? 0.0 : b.slacks.front());
}

void c3(Outcome& r) {
  struct Case {
    const char* name;
    Instance inst;
    double delta;
    double alpha;
  };
  const std::vector<Case> cases = {{"lemma4(4)", make_lemma4(4), 0.0, 0.49},
                                   {"k22", make_k22(), 1.0, 0.99},
                                   {"bipartite_is(8)", make_bipartite_is(8), 0.5, 2.0}};
  for (const Case& k : cases) {
    std::size_t outcomes = 0;
    std::size_t clean = 0;
    double least = INFINITY;
    for (const auto& c : all_outcomes(k.inst)) {
      ++outcomes;
      if (!find_blocking_coalition(k.inst, IntegralOutcome(c), k.delta, k.alpha, VerifyMode::integral).blocked) {
        ++clean;
      }
      least = std::min(least, minimal_core_alpha(k.inst, oracle::profile(k.inst, c), k.delta));
    }
    r.detail << k.name << ": " << clean << "/" << outcomes << " clean at (" << k.delta << ", " << k.alpha
             << "), least alpha " << least << "; ";
    if (clean > 0) r.fail("");
  }
}

void c4(Outcome& r) {
  const auto t0 = Clock::now();
  const auto pool = oracle::matching_pool(110, 502);
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const SolverReport rep = local_search_matching(pool[k], 1.0);
    const CoreCertificate c = find_blocking_coalition(pool[k], rep.outcome, 1.0, 14.01, VerifyMode::integral);
    if (c.blocked) r.fail("instance " + std::to_string(k) + " blocked; ");
  }
  const double secs = seconds_since(t0);
  if (secs >= 600.0) r.fail("runtime over 10 min; ");
  r.detail << pool.size() << " instances, " << secs << " s";
}

IntegralOutcome random_matching_in(const Matching& g, std::mt19937_64& rng) {
  std::vector<Index> order(g.edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<char> used(g.vertices, 0);
  std::vector<Index> picked;
  for (Index e : order) {
    if (rng() % 4 == 0 || used[g.edges[e].u] || used[g.edges[e].v]) continue;
    used[g.edges[e].u] = used[g.edges[e].v] = 1;
    picked.push_back(e);
  }
  return IntegralOutcome(picked);
}

void c5(Outcome& r) {
  std::mt19937_64 rng(503);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t failures = 0;
  std::size_t nonempty = 0;
  for (int t = 0; t < 1000; ++t) {
    Matching g;
    g.vertices = 4 + rng() % 7;
    for (std::size_t a = 0; a < g.vertices; ++a) {
      for (std::size_t b = a + 1; b < g.vertices; ++b) {
        if (rng() % 3 == 0) g.edges.push_back({a, b});
      }
    }
    if (g.edges.empty()) g.edges.push_back({0, 1});
    const IntegralOutcome current = random_matching_in(g, rng);
    const IntegralOutcome target = random_matching_in(g, rng);
    std::vector<double> w;
    std::vector<double> w_prime;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const double a = unit(rng);
      const double b = unit(rng);
      w.push_back(std::max(a, b));
      w_prime.push_back(std::min(a, b));
    }
    const std::size_t kappa = 1 + rng() % 4;
    const auto opt = build_opt_multiset(g, current, target, kappa, w, w_prime);
    bool ok = opt.size() <= kappa * g.vertices;
    double gain = 0.0;
    for (const auto& a : opt) {
      ok = ok && !a.edges.empty() && a.edges.size() <= kappa;
      for (Index e : a.edges) ok = ok && target.contains(e) && !current.contains(e);
      gain += augmentation_gain(a, w, w_prime);
    }
    double w_cur = 0.0;
    double w_tgt = 0.0;
    for (Index e : current.elements()) w_cur += w[e];
    for (Index e : target.elements()) w_tgt += w_prime[e];
    const double k = static_cast<double>(kappa);
    ok = ok && gain >= k * w_tgt - (k + 1.0) * w_cur - 1e-9;
    if (!ok) ++failures;
    if (!opt.empty()) ++nonempty;
  }
  if (failures > 0) r.fail(std::to_string(failures) + " draws violate a bullet; ");
  r.detail << "1000 draws, " << nonempty << " with a nonempty multiset";
}

std::vector<Instance> wide_knapsacks(std::size_t count) {
  std::vector<Instance> pool;
  std::uint64_t seed = 504;
  while (pool.size() < count) {
    for (Instance& inst : oracle::knapsack_pool(50, seed++, 8, 10)) {
      if (width(inst.constraint()) >= 1.0 && pool.size() < count) pool.push_back(std::move(inst));
    }
  }
  return pool;
}

void c6(Outcome& r, const std::vector<Instance>& pool) {
  const double delta = 0.05;
  double worst = -INFINITY;
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const MnwResult res = fractional_mnw(pool[k], delta, 0.01);
    const double n = static_cast<double>(pool[k].agents());
    worst = std::max(worst, res.certificate.q_value - n);
    if (res.certificate.q_value > n + delta) r.fail("certificate above n + delta on " + std::to_string(k) + "; ");
    if (find_blocking_coalition(pool[k], res.outcome, delta, 0.01, VerifyMode::fractional).blocked) {
      r.fail("fractional verifier blocks instance " + std::to_string(k) + "; ");
    }
  }
  r.detail << pool.size() << " instances, max Q - n " << worst;
}

void c7(Outcome& r, const std::vector<Instance>& pool) {
  double tightest = INFINITY;
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const MpfResult m = mpf(pool[k]);
    if (m.degenerate || !m.outcome) {
      r.fail("degenerate instance " + std::to_string(k) + "; ");
      continue;
    }
    const double vmax = *std::max_element(m.optima.begin(), m.optima.end());
    const double bound =
        std::min({vmax, static_cast<double>(pool[k].agents()), width(pool[k].constraint())});
    tightest = std::min(tightest, bound - m.r);
    if (m.r > bound + 1e-7) r.fail("R above the bound on " + std::to_string(k) + "; ");
    for (double s : m.slacks) {
      if (s < -1e-7) r.fail("negative slack on " + std::to_string(k) + "; ");
    }
  }
  r.detail << pool.size() << " instances, least bound - R " << tightest;
}

void c8(Outcome& r) {
  std::mt19937_64 rng(505);
  std::size_t count = 0;
  for (int t = 0; t < 110; ++t) {
    const std::size_t agents = 1 + rng() % 4;
    const std::size_t goods = 1 + rng() % 6;
    const Instance inst = oracle::private_goods(agents, goods, 5050 + t);
    const IntegralOutcome c = exact_smooth_mnw(inst, 1.0);
    if (find_blocking_coalition(inst, c, 0.0, 1.0, VerifyMode::integral).blocked) {
      r.fail("instance " + std::to_string(t) + " blocked; ");
    }
    ++count;
  }
  r.detail << count << " instances";
}

void c9(Outcome& r) {
  // Marginals.
  {
    const Instance inst = oracle::knapsack_pool(1, 506, 6, 12).front();
    const MnwResult core = fractional_mnw(inst, 0.5, 0.01);
    const MpfResult m = mpf(inst);
    const RoundingConfig cfg = RoundingConfig::make(0.5, 0);
    const std::vector<double> z = mix(core.outcome, *m.outcome, cfg.gamma);
    std::vector<double> hits(z.size(), 0.0);
    const std::size_t draws = 20000;
    for (std::size_t t = 0; t < draws; ++t) {
      std::mt19937_64 rng = substream(507, t);
      const IntegralOutcome c = draw_rounding(z, cfg.gamma, rng);
      for (Index j : c.elements()) hits[j] += 1.0;
    }
    double worst = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double p = (1.0 - cfg.gamma) * z[j];
      const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(draws));
      const double dev = std::abs(hits[j] / static_cast<double>(draws) - p);
      if (sigma > 0.0) worst = std::max(worst, dev / sigma);
      if (dev > 3.0 * sigma) r.fail("marginal of element " + std::to_string(j) + " off; ");
    }
    r.detail << "marginals max " << worst << " sigma; ";
  }
  // Per-draw feasibility on knapsacks with b = 50 ln K.
  {
    double least = 1.0;
    for (std::size_t rows : {2u, 3u, 4u}) {
      const double b = 50.0 * std::log(static_cast<double>(rows));
      const auto m = static_cast<std::size_t>(4.0 * b);
      for (std::uint64_t s = 0; s < 3; ++s) {
        const Instance inst = make_random_knapsack(4, m, rows, b, 0.6, 508 + 10 * rows + s);
        const Packing& pk = std::get<Packing>(inst.constraint());
        const MnwResult core = fractional_mnw(inst, 0.5, 0.01);
        const MpfResult mp = mpf(inst);
        const RoundingConfig cfg = RoundingConfig::make(0.5, 0);
        const std::vector<double> z = mix(core.outcome, *mp.outcome, cfg.gamma);
        std::size_t ok = 0;
        const std::size_t draws = 2000;
        for (std::size_t t = 0; t < draws; ++t) {
          std::mt19937_64 rng = substream(509 + s, t);
          const IntegralOutcome c = draw_rounding(z, cfg.gamma, rng);
          std::vector<double> load(rows, 0.0);
          for (Index j : c.elements()) {
            for (std::size_t k = 0; k < rows; ++k) load[k] += pk.a(k, j);
          }
          bool fits = true;
          for (std::size_t k = 0; k < rows; ++k) fits = fits && load[k] <= pk.b[k] + kTolerance;
          if (fits) ++ok;
        }
        least = std::min(least, static_cast<double>(ok) / static_cast<double>(draws));
      }
    }
    if (least < 0.9) r.fail("feasibility rate below 0.9; ");
    r.detail << "least feasibility rate " << least << "; ";
  }
  // Both grouping bounds in seeded trials.
  {
    std::size_t joint = 0;
    std::size_t trials = 0;
    const auto pool = oracle::knapsack_pool(30, 510, 8, 12);
    for (std::size_t t = 0; t < 300; ++t) {
      const Instance& inst = pool[t % pool.size()];
      const SolverReport rep = solve_packing(inst, 0.5, 5100 + t);
      ++trials;
      const auto& flags = rep.grouping->bound_holds;
      if (std::all_of(flags.begin(), flags.end(), [](bool f) { return f; })) ++joint;
    }
    const double frac = static_cast<double>(joint) / static_cast<double>(trials);
    if (frac < 0.1) r.fail("grouping bounds hold jointly in under 10% of trials; ");
    r.detail << "joint bounds " << joint << "/" << trials << "; ";
  }
  // Tail bound.
  {
    const std::array<std::array<double, 3>, 6> grid = {{{200, 200, 0.2},
                                                         {100, 20, 0.3},
                                                         {20, 100, 0.1},
                                                         {400, 50, 0.15},
                                                         {50, 400, 0.25},
                                                         {1000, 1000, 0.05}}};
    std::size_t k = 0;
    for (const auto& g : grid) {
      const TailTest tt = chernoff_monte_carlo(g[0], g[1], g[2], 20000, 511 + k++);
      if (!tt.passes) r.fail("tail above bound + 3 sigma; ");
    }
    r.detail << grid.size() << " tail cases";
  }
}

void c10(Outcome& r) {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::uint64_t seed = 512;
  while (accepted < 55 && seed < 600) {
    for (const Instance& inst : oracle::knapsack_pool(20, seed++, 8, 14)) {
      SolverReport rep;
      try {
        rep = solve_packing(inst, 0.5, seed * 100);
      } catch (const InfeasibleError&) {
        ++rejected;
        continue;
      }
      ++accepted;
      const double alpha = rep.scalars.at("alpha_target");
      if (find_blocking_coalition(inst, rep.outcome, 0.5, alpha, VerifyMode::integral).blocked) {
        r.fail("accepted run blocked at alpha*; ");
      }
    }
  }
  if (accepted < 50) r.fail("fewer than 50 accepted runs; ");
  r.detail << accepted << " accepted, " << rejected << " rejected";
}

void c11(Outcome& r) {
  std::mt19937_64 rng(513);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 2000; ++t) {
    FractionalOutcome x;
    const std::size_t m = 1 + rng() % 12;
    for (std::size_t j = 0; j < m; ++j) {
      const int kind = static_cast<int>(rng() % 5);
      x.weights.push_back(kind == 0 ? 0.0 : kind == 1 ? 1.0 : unit(rng));
    }
    const double s = std::accumulate(x.weights.begin(), x.weights.end(), 0.0);
    const IntegralOutcome c = dependent_round(x, std::ceil(s - 1e-9), rng);
    const double size = static_cast<double>(c.size());
    if (size < std::floor(s + 1e-9) || size > std::ceil(s - 1e-9)) r.fail("sum outside floor/ceil; ");
    for (Index j = 0; j < m; ++j) {
      if (x.weights[j] == 1.0 && !c.contains(j)) r.fail("integral coordinate dropped; ");
      if (x.weights[j] == 0.0 && c.contains(j)) r.fail("zero coordinate kept; ");
    }
  }
  const FractionalOutcome x{{0.3, 0.7, 0.5, 0.9, 0.2, 0.4}};
  const std::size_t m = x.weights.size();
  const std::size_t draws = 40000;
  std::vector<double> single(m, 0.0);
  std::vector<std::vector<double>> pair(m, std::vector<double>(m, 0.0));
  for (std::size_t t = 0; t < draws; ++t) {
    std::mt19937_64 g = substream(514, t);
    const IntegralOutcome c = dependent_round(x, 3.0, g);
    for (Index a : c.elements()) {
      single[a] += 1.0;
      for (Index b : c.elements()) pair[a][b] += 1.0;
    }
  }
  const double d = static_cast<double>(draws);
  for (std::size_t a = 0; a < m; ++a) {
    const double p = x.weights[a];
    if (std::abs(single[a] / d - p) > 3.0 * std::sqrt(p * (1.0 - p) / d)) r.fail("marginal off; ");
    for (std::size_t b = a + 1; b < m; ++b) {
      const double q = x.weights[a] * x.weights[b];
      if (pair[a][b] / d > q + 3.0 * std::sqrt(q * (1.0 - q) / d)) r.fail("positive correlation; ");
    }
  }
  const CoreCertificate w = endowment_core_check(make_cyclic_pb(), IntegralOutcome({0}), 0.0, 0.0);
  if (!w.blocked || w.coalition != std::vector<Index>({1, 2}) || w.deviation != IntegralOutcome({2})) {
    r.fail("cyclic witness differs; ");
  }
  r.detail << "witness coalition " << join(w.coalition) << ", deviation "
           << (w.deviation ? join(w.deviation->elements()) : std::string("none"));
}

std::string capture(const std::string& args) {
  const std::string cmd = std::string(COREFAIR_CLI) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return "<popen failed>";
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), got);
  const int status = pclose(p);
  return out + "\n<status " + std::to_string(status) + ">";
}

void c12(Outcome& r) {
  const std::vector<std::string> commands = {
      "gen --gen random_knapsack n=5 m=9 seed=3",
      "solve --gen random_matroid n=5 m=8 seed=4",
      "solve --gen random_matching n=4 seed=5",
      "solve --gen random_knapsack n=5 m=10 seed=2 --seed 9",
      "verify --gen example1 --outcome 0,2,4,6",
      "verify --gen cyclic_pb --outcome 0 --endowment",
      "mpf --gen random_knapsack seed=6",
      "fractional --gen random_knapsack seed=7",
      "round --gen random_knapsack n=5 m=10 seed=2 --seed 11 --trials 5",
      "bench --gen random_knapsack n=4 m=8 --seed 3 --trials 3 --format csv",
      "bench --gen random_matroid n=4 m=6 --seed 3 --trials 3",
      "round --gen bipartite_is --seed 1 --retries 1",
  };
  for (const std::string& c : commands) {
    if (capture(c) != capture(c)) r.fail("'" + c + "' differs; ");
  }
  r.detail << commands.size() << " commands run twice";
}

}  // namespace

int main() {
  const std::vector<Instance> packing_pool = wide_knapsacks(100);
  const std::vector<std::pair<int, std::function<void(Outcome&)>>> criteria = {
      {1, c1},
      {2, c2},
      {3, c3},
      {4, c4},
      {5, c5},
      {6, [&](Outcome& r) { c6(r, packing_pool); }},
      {7, [&](Outcome& r) { c7(r, packing_pool); }},
      {8, c8},
      {9, c9},
      {10, c10},
      {11, c11},
      {12, c12},
  };
  int failed = 0;
  for (const auto& [id, run] : criteria) {
    Outcome r;
    try {
      run(r);
    } catch (const std::exception& e) {
      r.fail(std::string("exception: ") + e.what() + "; ");
    }
    std::cout << "criterion " << id << ": " << (r.pass ? "PASS" : "FAIL") << " (" << r.detail.str() << ")"
              << std::endl;
    if (!r.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
