#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "corefair/cli.hpp"
#include "corefair/io.hpp"
#include "oracles.hpp"

using namespace corefair;

namespace {

struct CliRun {
  int code = 0;
  std::string text;
};

CliRun run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  CliRun r;
  r.code = corefair::cli::run(args, out);
  r.text = out.str();
  return r;
}

Json cli_json(const std::vector<std::string>& args, int expected_code = 0) {
  const CliRun r = run_cli(args);
  EXPECT_EQ(r.code, expected_code) << r.text;
  return Json::parse(r.text);
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) out.push_back(cell);
  return out;
}

}  // namespace

TEST(Json, RoundTripsEveryGenerator) {
  for (const char* name : {"example1", "lemma4", "k22", "bipartite_is", "cyclic_pb", "random_matroid",
                           "random_matching", "random_knapsack"}) {
    const Instance inst = generate(GeneratorSpec{name, {}});
    const std::string text = emit_instance(inst);
    const Instance back = parse_instance(text);
    EXPECT_EQ(back, inst) << name;
    EXPECT_EQ(emit_instance(back), text) << name;
  }
  const Instance smooth = generate(GeneratorSpec{"knapsack_smoothing", {{"B", "16"}}});
  EXPECT_EQ(parse_instance(emit_instance(smooth)), smooth);
}

TEST(Json, RoundTripsRandomInstances) {
  std::size_t count = 0;
  for (const Instance& inst : oracle::matroid_pool(150, 111)) {
    ASSERT_EQ(parse_instance(instance_json(inst)), inst);
    ++count;
  }
  for (const Instance& inst : oracle::matching_pool(150, 112)) {
    ASSERT_EQ(parse_instance(instance_json(inst)), inst);
    ++count;
  }
  for (const Instance& inst : oracle::knapsack_pool(150, 113, 8, 14)) {
    ASSERT_EQ(parse_instance(instance_json(inst)), inst);
    ++count;
  }
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Instance inst = oracle::private_goods(1 + s % 4, 1 + s % 3, s);
    ASSERT_EQ(parse_instance(emit_instance(inst)), inst);
    ++count;
  }
  EXPECT_EQ(count, 500u);
}

TEST(Json, RationalStrings) {
  const Instance inst = parse_instance(R"({
    "agents": 1, "elements": 3,
    "utilities": [["1/3", 1, "0"]],
    "constraint": {"type": "packing", "A": [["1/2", "1/4", 1]], "b": ["3/2"]}
  })");
  EXPECT_DOUBLE_EQ(inst.utility(0, 0), 1.0 / 3.0);
  const Packing& pk = std::get<Packing>(inst.constraint());
  EXPECT_DOUBLE_EQ(pk.a(0, 1), 0.25);
  EXPECT_DOUBLE_EQ(pk.b[0], 1.5);
}

TEST(Json, Rejections) {
  const char* unknown = R"({"agents": 1, "elements": 1, "utilities": [[1]], "constraint": {"type": "polymatroid"}})";
  EXPECT_THROW(parse_instance(unknown), ValidationError);
  EXPECT_THROW(parse_instance("{not json"), ValidationError);
  const char* bad_ratio = R"({"agents": 1, "elements": 1, "utilities": [["1/0"]], "constraint": {"type": "uniform_matroid", "rank": 1}})";
  EXPECT_THROW(parse_instance(bad_ratio), ValidationError);
  const char* short_row = R"({"agents": 1, "elements": 2, "utilities": [[1]], "constraint": {"type": "uniform_matroid", "rank": 1}})";
  EXPECT_THROW(parse_instance(short_row), ValidationError);
}

TEST(Cli, GenK22IsByteStable) {
  const CliRun a = run_cli({"gen", "--gen", "k22"});
  const CliRun b = run_cli({"gen", "--gen", "k22"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.text, b.text);
  EXPECT_EQ(parse_instance(a.text), make_k22());
}

TEST(Cli, SolveExample1IsCleanAt21) {
  const Json j = cli_json({"solve", "--gen", "example1", "m=4", "--constraint", "matroid", "--epsilon", "0.1"});
  const IntegralOutcome c(j.at("outcome").get<std::vector<Index>>());
  const Instance inst = make_example1(4);
  EXPECT_FALSE(find_blocking_coalition(inst, c, 0.0, 2.1, VerifyMode::integral).blocked);
  EXPECT_FALSE(j.at("verification").at("blocked").get<bool>());
}

TEST(Cli, VerifyExample1Firsts) {
  const Json j = cli_json({"verify", "--gen", "example1", "m=4", "--outcome", "0,2,4,6", "--delta", "0",
                           "--alpha", "0.9"});
  EXPECT_TRUE(j.at("blocked").get<bool>());
  EXPECT_EQ(j.at("coalition").get<std::vector<Index>>(), std::vector<Index>({4, 5, 6, 7}));
  EXPECT_EQ(j.at("deviation").get<std::vector<Index>>(), example1_seconds(4).elements());
}

TEST(Cli, VerifyEndowmentCyclic) {
  const Json j = cli_json({"verify", "--gen", "cyclic_pb", "--outcome", "0", "--endowment"});
  EXPECT_EQ(j.at("coalition").get<std::vector<Index>>(), std::vector<Index>({1, 2}));
  EXPECT_EQ(j.at("deviation").get<std::vector<Index>>(), std::vector<Index>({2}));
}

TEST(Cli, MpfAndFractional) {
  const Json m = cli_json({"mpf", "--gen", "cyclic_pb"});
  EXPECT_NEAR(m.at("r").get<double>(), 1.0 / 1.4, 1e-9);
  const Json f = cli_json({"fractional", "--gen", "random_knapsack", "seed=3", "--delta", "0.05"});
  EXPECT_LE(f.at("certificate").at("q_value").get<double>(), 4.05);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli({"solve", "--bogus"}).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate", "--gen", "k22"}).code, 2);
  EXPECT_EQ(run_cli({"gen", "--gen", "example1", "q=3"}).code, 2);
  EXPECT_EQ(run_cli({"gen", "--gen", "nosuch"}).code, 2);
  EXPECT_EQ(run_cli({"solve", "--gen", "k22", "--constraint", "matroid"}).code, 2);
  EXPECT_EQ(run_cli({"solve", "--gen", "random_knapsack"}).code, 2);
  EXPECT_EQ(run_cli({"gen", "--gen", "k22", "--instance", "x.json"}).code, 2);
  EXPECT_EQ(run_cli({"gen", "--gen", "k22", "--format", "csv"}).code, 2);
  EXPECT_EQ(run_cli({"verify", "--gen", "random_matroid", "n=13", "m=4", "--outcome", "0"}).code, 3);
  EXPECT_EQ(run_cli({"round", "--gen", "bipartite_is", "--seed", "1", "--retries", "1"}).code, 5);
  const CliRun err = run_cli({"gen", "--gen", "nosuch"});
  const Json e = Json::parse(err.text);
  EXPECT_EQ(e.at("error").at("code").get<int>(), 2);
  EXPECT_EQ(e.at("error").at("kind").get<std::string>(), "validation");
  EXPECT_FALSE(e.at("error").at("message").get<std::string>().empty());
}

TEST(Cli, ConvergenceMapsToFour) {
  const ConvergenceError err("stalled", 3.5);
  EXPECT_EQ(static_cast<int>(err.code()), 4);
  const Json j = error_json(err);
  EXPECT_EQ(j.at("error").at("code").get<int>(), 4);
  EXPECT_DOUBLE_EQ(j.at("error").at("last_value").get<double>(), 3.5);
}

TEST(Cli, SizeCapErrorCarriesTheCap) {
  const Json j = Json::parse(run_cli({"verify", "--gen", "random_matroid", "n=13", "m=4", "--outcome", "0"}).text);
  EXPECT_EQ(j.at("error").at("kind").get<std::string>(), "size_cap");
  EXPECT_EQ(j.at("error").at("cap").get<std::string>(), "agents");
  EXPECT_DOUBLE_EQ(j.at("error").at("actual").get<double>(), 13.0);
}

TEST(Cli, BenchCsvSchemaAndRevalidation) {
  const CliRun r = run_cli({"bench", "--gen", "random_matching", "n=4", "--seed", "20", "--trials", "5"});
  ASSERT_EQ(r.code, 0) << r.text;
  const auto lines = split_lines(r.text);
  ASSERT_EQ(lines.size(), 6u);
  EXPECT_EQ(lines[0], "instance_id,solver,delta,alpha_achieved,iterations,wall_time_ms,seed");
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto cells = split_csv(lines[k]);
    ASSERT_EQ(cells.size(), 7u);
    EXPECT_EQ(cells[5], "NA");
    const std::uint64_t seed = std::stoull(cells[6]);
    EXPECT_EQ(seed, 20 + k - 1);
    const Instance inst = generate(GeneratorSpec{"random_matching", {{"n", "4"}, {"seed", cells[6]}}});
    const SolverReport rep = local_search_matching(inst, 1.0);
    const double alpha = std::stod(cells[3]);
    EXPECT_FALSE(find_blocking_coalition(inst, rep.outcome, 1.0, alpha + 1e-6, VerifyMode::integral).blocked);
    if (alpha > 1e-6) {
      EXPECT_TRUE(find_blocking_coalition(inst, rep.outcome, 1.0, alpha - 1e-6, VerifyMode::integral).blocked);
    }
  }
  const Json j = cli_json({"bench", "--gen", "random_matching", "n=4", "--seed", "20", "--trials", "5",
                           "--format", "json", "--timing"});
  ASSERT_EQ(j.size(), 5u);
  EXPECT_TRUE(j[0].at("wall_time_ms").is_number());
}

TEST(Cli, Determinism) {
  const std::vector<std::vector<std::string>> commands = {
      {"solve", "--gen", "random_knapsack", "n=5", "m=10", "seed=2", "--seed", "9"},
      {"round", "--gen", "random_knapsack", "n=5", "m=10", "seed=2", "--seed", "9", "--trials", "4"},
      {"bench", "--gen", "random_knapsack", "n=4", "m=8", "--seed", "3", "--trials", "3"},
      {"fractional", "--gen", "random_knapsack", "seed=7"},
      {"solve", "--gen", "random_matroid", "seed=4"},
  };
  for (const auto& c : commands) {
    const CliRun a = run_cli(c);
    const CliRun b = run_cli(c);
    EXPECT_EQ(a.code, 0) << a.text;
    EXPECT_EQ(a.text, b.text);
  }
  EXPECT_NE(run_cli({"round", "--gen", "random_knapsack", "seed=2", "--seed", "9", "--trials", "4"}).text,
            run_cli({"round", "--gen", "random_knapsack", "seed=2", "--seed", "10", "--trials", "4"}).text);
}

TEST(Cli, InstanceFileAndOutFile) {
  const std::string in = ::testing::TempDir() + "corefair_cli_in.json";
  const std::string out = ::testing::TempDir() + "corefair_cli_out.json";
  {
    std::ofstream f(in);
    f << emit_instance(make_cyclic_pb());
  }
  const CliRun direct = run_cli({"mpf", "--instance", in});
  ASSERT_EQ(direct.code, 0);
  ASSERT_EQ(run_cli({"mpf", "--instance", in, "--out", out}).code, 0);
  std::ifstream f(out);
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(ss.str(), direct.text);
  EXPECT_EQ(run_cli({"mpf", "--instance", ::testing::TempDir() + "missing.json"}).code, 2);
  std::remove(in.c_str());
  std::remove(out.c_str());
}
