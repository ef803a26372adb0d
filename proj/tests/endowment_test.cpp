#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "corefair/endowment.hpp"
#include "corefair/generators.hpp"
#include "oracles.hpp"

using namespace corefair;

namespace {

FractionalOutcome random_point(std::mt19937_64& rng, std::size_t m) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  FractionalOutcome x;
  for (std::size_t j = 0; j < m; ++j) {
    const int kind = static_cast<int>(rng() % 5);
    x.weights.push_back(kind == 0 ? 0.0 : kind == 1 ? 1.0 : unit(rng));
  }
  return x;
}

double total(const FractionalOutcome& x) {
  double s = 0.0;
  for (double v : x.weights) s += v;
  return s;
}

}  // namespace

TEST(DependentRound, SumStaysBetweenFloorAndCeil) {
  std::mt19937_64 rng(81);
  for (int t = 0; t < 2000; ++t) {
    const FractionalOutcome x = random_point(rng, 1 + rng() % 12);
    const double s = total(x);
    const IntegralOutcome c = dependent_round(x, std::ceil(s - 1e-9), rng);
    const double k = static_cast<double>(c.size());
    ASSERT_GE(k, std::floor(s + 1e-9));
    ASSERT_LE(k, std::ceil(s - 1e-9));
    for (Index j : c.elements()) ASSERT_GT(x.weights[j], 0.0);
    for (Index j = 0; j < x.weights.size(); ++j) {
      if (x.weights[j] == 1.0) {
        ASSERT_TRUE(c.contains(j));
      }
    }
  }
}

TEST(DependentRound, MarginalsAndNegativeCorrelation) {
  const FractionalOutcome x{{0.3, 0.7, 0.5, 0.9, 0.2, 0.4}};
  const std::size_t m = x.weights.size();
  const std::size_t draws = 40000;
  std::vector<double> single(m, 0.0);
  std::vector<std::vector<double>> pair(m, std::vector<double>(m, 0.0));
  for (std::size_t t = 0; t < draws; ++t) {
    std::mt19937_64 rng = substream(82, t);
    const IntegralOutcome c = dependent_round(x, 3.0, rng);
    for (Index a : c.elements()) {
      single[a] += 1.0;
      for (Index b : c.elements()) pair[a][b] += 1.0;
    }
  }
  const double d = static_cast<double>(draws);
  for (std::size_t a = 0; a < m; ++a) {
    const double p = x.weights[a];
    EXPECT_LE(std::abs(single[a] / d - p), 3.0 * std::sqrt(p * (1.0 - p) / d)) << a;
    for (std::size_t b = a + 1; b < m; ++b) {
      const double q = x.weights[a] * x.weights[b];
      EXPECT_LE(pair[a][b] / d, q + 3.0 * std::sqrt(q * (1.0 - q) / d)) << a << "," << b;
    }
  }
}

TEST(DependentRound, Validation) {
  std::mt19937_64 rng(83);
  EXPECT_THROW(dependent_round(FractionalOutcome{{1.5}}, 2.0, rng), ValidationError);
  EXPECT_THROW(dependent_round(FractionalOutcome{{0.9, 0.9}}, 1.0, rng), ValidationError);
  EXPECT_EQ(dependent_round(FractionalOutcome{{0.0, 1.0, 0.0}}, 1.0, rng), IntegralOutcome({1}));
  EXPECT_EQ(dependent_round(FractionalOutcome{{0.5, 0.5}}, 1.0, 7),
            dependent_round(FractionalOutcome{{0.5, 0.5}}, 1.0, 7));
}

TEST(EndowmentCore, CyclicWitness) {
  const Instance inst = make_cyclic_pb();
  const CoreCertificate c = endowment_core_check(inst, IntegralOutcome({0}), 0.0, 0.0);
  ASSERT_TRUE(c.blocked);
  EXPECT_EQ(c.coalition, std::vector<Index>({1, 2}));
  ASSERT_TRUE(c.deviation.has_value());
  EXPECT_EQ(*c.deviation, IntegralOutcome({2}));
  for (double s : c.slacks) EXPECT_GT(s, 0.0);
}

TEST(EndowmentCore, CyclicHasNoIntegralCore) {
  const Instance inst = make_cyclic_pb();
  oracle::for_each_subset(inst, false, 1.0, [&](const std::vector<Index>& c) {
    EXPECT_TRUE(endowment_core_check(inst, IntegralOutcome(c), 0.0, 0.0).blocked);
    EXPECT_TRUE(oracle::blocked(inst, oracle::profile(inst, c), 0.0, 0.0, false, true));
  });
}

TEST(EndowmentCore, AgreesWithDefinitionOracle) {
  std::mt19937_64 rng(84);
  std::size_t hits = 0;
  std::size_t clean = 0;
  for (const Instance& inst : oracle::knapsack_pool(80, 85, 5, 8)) {
    std::vector<std::vector<Index>> outcomes;
    oracle::for_each_subset(inst, false, 1.0, [&](const std::vector<Index>& c) { outcomes.push_back(c); });
    const auto& c = outcomes[rng() % outcomes.size()];
    const double delta = (rng() % 3) * 0.25;
    const double alpha = (rng() % 3) * 0.2;
    const auto base = oracle::profile(inst, c);
    const CoreCertificate cert = endowment_core_check(inst, base, EndowmentParams{delta, alpha});
    ASSERT_EQ(cert.blocked, oracle::blocked(inst, base, delta, alpha, false, true));
    ++(cert.blocked ? hits : clean);
    if (cert.blocked) {
      const double budget = (1.0 - delta) * static_cast<double>(cert.coalition.size()) /
                            static_cast<double>(inst.agents());
      ASSERT_TRUE(oracle::feasible(inst, cert.deviation->elements(), false, budget));
      bool strict = false;
      for (double s : cert.slacks) {
        ASSERT_GE(s, -1e-9);
        strict = strict || s > 1e-9;
      }
      ASSERT_TRUE(strict);
    }
  }
  EXPECT_GT(hits, 0u);
  EXPECT_GT(clean, 0u);
}

TEST(EndowmentCore, RejectsNonPackingAndBadDelta) {
  EXPECT_THROW(endowment_core_check(make_k22(), IntegralOutcome({0}), 0.0, 0.0),
               UnsupportedConstraintError);
  EXPECT_THROW(endowment_core_check(make_cyclic_pb(), IntegralOutcome({0}), 1.5, 0.0), ValidationError);
}
