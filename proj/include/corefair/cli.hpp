#pragma once

// Command-line front end. run() never exits the process; it returns the exit
// status and writes artifacts to `out` (or --out) and error JSON to `out`.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "corefair/endowment.hpp"
#include "corefair/errors.hpp"
#include "corefair/fractional.hpp"
#include "corefair/generators.hpp"
#include "corefair/io.hpp"
#include "corefair/matching.hpp"
#include "corefair/matroid.hpp"
#include "corefair/rounding.hpp"
#include "corefair/verifier.hpp"

namespace corefair::cli {

/// Column order of `bench --format csv`.
inline const std::vector<std::string>& bench_columns() {
  static const std::vector<std::string> cols = {"instance_id", "solver", "delta", "alpha_achieved",
                                                "iterations", "wall_time_ms", "seed"};
  return cols;
}

struct Options {
  std::string command;
  std::string instance_file;
  std::vector<std::string> gen;
  std::string constraint;
  std::optional<double> delta;
  std::optional<double> alpha;
  std::optional<double> epsilon;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::size_t retries = 200;
  std::string out;
  /// Defaults to csv for bench and json otherwise.
  std::optional<std::string> format;
  std::optional<std::string> outcome;
  std::optional<std::string> weights;
  std::string mode = "integral";
  std::string deviations = "bases";
  bool endowment = false;
  bool timing = false;
};

namespace detail {

inline GeneratorSpec generator_spec(const std::vector<std::string>& args) {
  GeneratorSpec g;
  g.name = args.at(0);
  for (std::size_t k = 1; k < args.size(); ++k) {
    const auto eq = args[k].find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError("generator parameter '" + args[k] + "' must have the form key=value");
    }
    g.params[args[k].substr(0, eq)] = args[k].substr(eq + 1);
  }
  return g;
}

inline Instance load(const Options& o) {
  if (!o.instance_file.empty() && !o.gen.empty()) {
    throw ValidationError("--instance and --gen are mutually exclusive");
  }
  if (!o.instance_file.empty()) return load_instance(o.instance_file);
  if (!o.gen.empty()) return generate(generator_spec(o.gen));
  throw ValidationError("an instance is required: pass --instance FILE or --gen NAME key=val...");
}

inline std::string family(const Instance& inst) {
  const ConstraintSpec& c = inst.constraint();
  if (is_matroid(c) || std::holds_alternative<PrivateGoods>(c)) return "matroid";
  if (std::holds_alternative<Matching>(c)) return "matching";
  return "packing";
}

inline void check_family(const Options& o, const Instance& inst) {
  if (o.constraint.empty()) return;
  if (o.constraint != "matroid" && o.constraint != "matching" && o.constraint != "packing") {
    throw ValidationError("--constraint must be matroid, matching or packing");
  }
  if (o.constraint != family(inst)) {
    throw UnsupportedConstraintError("--constraint " + o.constraint + " does not fit a " +
                                     constraint_name(inst.constraint()) + " instance");
  }
}

inline std::uint64_t require_seed(const Options& o, const char* what) {
  if (!o.seed) throw ValidationError(std::string(what) + " is randomized and needs --seed");
  return *o.seed;
}

inline std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      parts.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  if (!cur.empty() || !parts.empty()) parts.push_back(cur);
  return parts;
}

inline IntegralOutcome parse_outcome(const std::string& s, const Instance& inst) {
  std::vector<Index> chosen;
  for (const std::string& p : split(s)) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(p, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (p.empty() || pos != p.size()) throw ValidationError("--outcome: '" + p + "' is not an element index");
    if (v >= inst.elements()) throw ValidationError("--outcome: element " + p + " out of range");
    chosen.push_back(static_cast<Index>(v));
  }
  std::sort(chosen.begin(), chosen.end());
  if (std::adjacent_find(chosen.begin(), chosen.end()) != chosen.end()) {
    throw ValidationError("--outcome: repeated element");
  }
  return IntegralOutcome(std::move(chosen));
}

inline FractionalOutcome parse_weights(const std::string& s, const Instance& inst) {
  FractionalOutcome w;
  for (const std::string& p : split(s)) w.weights.push_back(corefair::detail::parse_rational(Json(p), "--weights"));
  if (w.weights.size() != inst.elements()) {
    throw ValidationError("--weights: expected " + std::to_string(inst.elements()) + " values");
  }
  return w;
}

inline DeviationSpace parse_space(const Options& o) {
  if (o.deviations == "bases") return DeviationSpace::bases;
  if (o.deviations == "independent") return DeviationSpace::independent_sets;
  throw ValidationError("--deviations must be bases or independent");
}

inline Json verification(const Instance& inst, const IntegralOutcome& c, double delta, double alpha) {
  Json v;
  v["delta"] = delta;
  v["alpha"] = corefair::detail::number(alpha);
  try {
    const CoreCertificate cert = find_blocking_coalition(inst, c, delta, alpha, VerifyMode::integral);
    v["blocked"] = cert.blocked;
    if (cert.blocked) v["certificate"] = certificate_json(cert);
  } catch (const SizeCapError& e) {
    v["skipped"] = e.what();
  }
  return v;
}

struct Solved {
  SolverReport report;
  double delta = 0.0;
};

inline Solved solve(const Options& o, const Instance& inst, std::optional<std::uint64_t> seed) {
  const std::string f = family(inst);
  if (f == "matroid") {
    return {local_search_matroid(inst, o.epsilon.value_or(0.1)), 0.0};
  }
  if (f == "matching") {
    const double delta = o.delta.value_or(1.0);
    return {local_search_matching(inst, delta), delta};
  }
  if (!seed) throw ValidationError("solving a packing instance is randomized and needs --seed");
  const double delta = o.delta.value_or(0.5);
  return {solve_packing(inst, delta, *seed, o.epsilon.value_or(0.01), o.retries), delta};
}

inline Json cmd_solve(const Options& o, const Instance& inst) {
  check_family(o, inst);
  const Solved s = solve(o, inst, o.seed);
  Json j = report_json(s.report);
  j["verification"] = verification(inst, s.report.outcome, s.delta, s.report.scalars.at("alpha_target"));
  return j;
}

inline Json cmd_verify(const Options& o, const Instance& inst) {
  const double delta = o.delta.value_or(0.0);
  const double alpha = o.alpha.value_or(0.0);
  if (o.outcome && o.weights) throw ValidationError("--outcome and --weights are mutually exclusive");
  if (!o.outcome && !o.weights) throw ValidationError("verify needs --outcome or --weights");
  if (o.endowment) {
    if (!o.outcome) throw ValidationError("--endowment checks an integral --outcome");
    return certificate_json(endowment_core_check(inst, parse_outcome(*o.outcome, inst), delta, alpha));
  }
  VerifyMode mode;
  if (o.mode == "integral") {
    mode = VerifyMode::integral;
  } else if (o.mode == "fractional") {
    mode = VerifyMode::fractional;
  } else {
    throw ValidationError("--mode must be integral or fractional");
  }
  const DeviationSpace space = parse_space(o);
  if (o.outcome) {
    return certificate_json(find_blocking_coalition(inst, parse_outcome(*o.outcome, inst), delta,
                                                    alpha, mode, space));
  }
  return certificate_json(
      find_blocking_coalition(inst, parse_weights(*o.weights, inst), delta, alpha, mode, space));
}

inline Json cmd_round(const Options& o, const Instance& inst) {
  check_family(o, inst);
  const std::uint64_t seed = require_seed(o, "round");
  const double delta = o.delta.value_or(0.5);
  const std::size_t trials = o.trials.value_or(1);
  if (trials == 0) throw ValidationError("--trials must be positive");
  const MnwResult core = fractional_mnw(inst, delta, o.epsilon.value_or(0.01));
  const MpfResult m = mpf(inst);
  const FractionalOutcome y =
      m.outcome ? *m.outcome : FractionalOutcome{std::vector<double>(inst.elements(), 0.0)};
  const GroupingInputs inputs{m.optima, m.degenerate ? 1.0 : m.r};
  Json runs = Json::array();
  std::size_t accepted = 0;
  std::size_t bounds = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const RoundingConfig cfg = RoundingConfig::make(delta, seed + t, o.retries);
    try {
      const SolverReport r = round_outcome(inst, core.outcome, y, cfg, inputs);
      ++accepted;
      if (r.grouping && r.grouping->all_bounds_hold()) ++bounds;
      runs.push_back(report_json(r));
    } catch (const InfeasibleError& e) {
      runs.push_back(error_json(e));
    }
  }
  if (accepted == 0) throw InfeasibleError("round: no trial produced a feasible outcome", 1.0);
  Json j;
  j["runs"] = runs;
  j["trials"] = trials;
  j["accepted"] = accepted;
  j["bounds_hold"] = bounds;
  j["certificate_q"] = corefair::detail::number(core.certificate.q_value);
  return j;
}

struct BenchRow {
  std::string id;
  std::string solver;
  double delta = 0.0;
  double alpha = 0.0;
  std::size_t iterations = 0;
  std::optional<double> wall_ms;
  std::optional<std::uint64_t> seed;
};

inline std::string fmt(double v) { return corefair::detail::number(v).dump(); }

inline std::vector<BenchRow> bench_rows(const Options& o) {
  std::vector<std::pair<std::string, Instance>> pool;
  std::vector<std::optional<std::uint64_t>> seeds;
  const std::size_t trials = o.trials.value_or(10);
  if (trials == 0) throw ValidationError("--trials must be positive");
  if (!o.gen.empty() && o.instance_file.empty()) {
    GeneratorSpec g = generator_spec(o.gen);
    const bool seeded = g.name.rfind("random_", 0) == 0;
    const std::size_t count = seeded ? trials : 1;
    const std::uint64_t base = seeded ? require_seed(o, "bench over a random generator") : 0;
    for (std::size_t t = 0; t < count; ++t) {
      if (seeded) g.params["seed"] = std::to_string(base + t);
      std::ostringstream id;
      id << g.name << '-' << std::setw(4) << std::setfill('0') << t;
      pool.emplace_back(id.str(), generate(g));
      seeds.push_back(seeded ? std::optional<std::uint64_t>(base + t) : o.seed);
    }
  } else {
    pool.emplace_back(o.instance_file.empty() ? "instance" : o.instance_file, load(o));
    seeds.push_back(o.seed);
  }
  std::vector<BenchRow> rows;
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const Instance& inst = pool[k].second;
    check_family(o, inst);
    const auto start = std::chrono::steady_clock::now();
    const Solved s = solve(o, inst, seeds[k]);
    const auto stop = std::chrono::steady_clock::now();
    const std::vector<double> base = utility_profile(inst, s.report.outcome);
    const double achieved = std::max(0.0, minimal_core_alpha(inst, base, s.delta));
    // The achieved alpha must separate blocked from clean.
    const double above = achieved + 1e-6;
    if (find_blocking_coalition(inst, base, s.delta, above, VerifyMode::integral).blocked ||
        (achieved > 1e-6 &&
         !find_blocking_coalition(inst, base, s.delta, achieved - 1e-6, VerifyMode::integral).blocked)) {
      throw Error(ExitCode::failure, "verification",
                  "bench: verifier disagrees with alpha_achieved on " + pool[k].first);
    }
    BenchRow r;
    r.id = pool[k].first;
    r.solver = s.report.solver;
    r.delta = s.delta;
    r.alpha = achieved;
    r.iterations = s.report.iterations;
    if (o.timing) r.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    r.seed = seeds[k];
    rows.push_back(r);
  }
  std::sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) { return a.id < b.id; });
  return rows;
}

inline std::string cmd_bench(const Options& o, const Instance*) {
  const std::vector<BenchRow> rows = bench_rows(o);
  std::ostringstream out;
  if (o.format.value_or("csv") == "csv") {
    const auto& cols = bench_columns();
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
    out << '\n';
    for (const BenchRow& r : rows) {
      out << r.id << ',' << r.solver << ',' << fmt(r.delta) << ',' << fmt(r.alpha) << ','
          << r.iterations << ',' << (r.wall_ms ? fmt(*r.wall_ms) : "NA") << ','
          << (r.seed ? std::to_string(*r.seed) : "NA") << '\n';
    }
    return out.str();
  }
  Json arr = Json::array();
  for (const BenchRow& r : rows) {
    Json j;
    j["instance_id"] = r.id;
    j["solver"] = r.solver;
    j["delta"] = r.delta;
    j["alpha_achieved"] = corefair::detail::number(r.alpha);
    j["iterations"] = r.iterations;
    j["wall_time_ms"] = r.wall_ms ? Json(*r.wall_ms) : Json(nullptr);
    j["seed"] = r.seed ? Json(*r.seed) : Json(nullptr);
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

inline std::string dispatch(const Options& o) {
  if (o.format && *o.format != "json" && *o.format != "csv") {
    throw ValidationError("--format must be json or csv");
  }
  if (o.format == "csv" && o.command != "bench") throw ValidationError("--format csv applies to bench only");
  if (o.command == "bench") return cmd_bench(o, nullptr);
  const Instance inst = load(o);
  Json j;
  if (o.command == "gen") {
    j = instance_json(inst);
  } else if (o.command == "solve") {
    j = cmd_solve(o, inst);
  } else if (o.command == "verify") {
    j = cmd_verify(o, inst);
  } else if (o.command == "mpf") {
    j = mpf_json(mpf(inst));
  } else if (o.command == "fractional") {
    j = mnw_json(fractional_mnw(inst, o.delta.value_or(0.05), o.epsilon.value_or(0.01)));
  } else if (o.command == "round") {
    j = cmd_round(o, inst);
  } else {
    throw ValidationError("unknown command '" + o.command + "'");
  }
  return j.dump(2) + "\n";
}

inline void build(CLI::App& app, Options& o) {
  app.add_option("command", o.command, "solve | verify | mpf | fractional | round | gen | bench")
      ->required();
  app.add_option("--instance", o.instance_file, "instance JSON file");
  app.add_option("--gen", o.gen, "generator name followed by key=val parameters")->expected(1, 64);
  app.add_option("--constraint", o.constraint, "expected family: matroid | matching | packing");
  app.add_option("--delta", o.delta, "multiplicative slack");
  app.add_option("--alpha", o.alpha, "additive slack");
  app.add_option("--epsilon", o.epsilon, "solver accuracy");
  app.add_option("--seed", o.seed, "seed for randomized commands");
  app.add_option("--trials", o.trials, "rounding trials or bench instances");
  app.add_option("--retries", o.retries, "rounding redraws per trial");
  app.add_option("--out", o.out, "write output to FILE instead of stdout");
  app.add_option("--format", o.format, "json | csv (csv for bench)");
  app.add_option("--outcome", o.outcome, "comma-separated element indices");
  app.add_option("--weights", o.weights, "comma-separated fractional weights");
  app.add_option("--mode", o.mode, "integral | fractional");
  app.add_option("--deviations", o.deviations, "bases | independent");
  app.add_flag("--endowment", o.endowment, "check the endowment core");
  app.add_flag("--timing", o.timing, "record wall time in bench output");
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out) {
  CLI::App app{"core outcomes for public-goods allocation", "corefair"};
  Options o;
  detail::build(app, o);
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    out << error_json("validation", static_cast<int>(ExitCode::validation), e.what()).dump(2) << "\n";
    return static_cast<int>(ExitCode::validation);
  }
  try {
    const std::string text = detail::dispatch(o);
    if (o.out.empty()) {
      out << text;
    } else {
      std::ofstream f(o.out, std::ios::binary);
      if (!f) throw ValidationError("cannot write '" + o.out + "'");
      f << text;
    }
    return 0;
  } catch (const Error& e) {
    out << error_json(e).dump(2) << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    out << error_json("internal", static_cast<int>(ExitCode::failure), e.what()).dump(2) << "\n";
    return static_cast<int>(ExitCode::failure);
  }
}

}  // namespace corefair::cli
