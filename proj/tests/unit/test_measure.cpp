#include <gtest/gtest.h>

#include <random>

#include "doobkit/errors.hpp"
#include "doobkit/measure.hpp"
#include "oracle.hpp"

using namespace doobkit;

TEST(FiniteSpace, RejectsBadWeights) {
  EXPECT_THROW(FiniteSpace({}), ValidationError);
  EXPECT_THROW(FiniteSpace({0.5, 0.0, 0.5}), ValidationError);
  EXPECT_THROW(FiniteSpace({1.5, -0.5}), ValidationError);
  try {
    FiniteSpace({0.5, 0.4});
    FAIL() << "expected a normalization error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("normalization"), std::string::npos);
    EXPECT_EQ(e.kind(), ErrorKind::validation);
  }
}

TEST(FiniteSpace, UniformWeights) {
  const auto s = FiniteSpace::uniform(4);
  EXPECT_EQ(s.atom_count(), 4U);
  for (double p : s.probs()) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(Partition, CanonicalLabels) {
  const auto a = Partition::from_labels({7, 7, 3, 9, 3});
  const auto b = Partition::from_labels({0, 0, 1, 2, 1});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.block_count(), 3U);
  EXPECT_EQ(a.block_of(4), 1U);
  ASSERT_EQ(a.block(1).size(), 2U);
  EXPECT_EQ(a.block(1)[0], 2U);
}

TEST(Partition, Refinement) {
  const auto coarse = Partition::from_labels({0, 0, 1, 1});
  const auto fine = Partition::from_labels({0, 1, 2, 2});
  EXPECT_TRUE(refines(coarse, fine));
  EXPECT_FALSE(refines(fine, coarse));
  EXPECT_TRUE(refines(Partition::trivial(4), coarse));
  EXPECT_TRUE(refines(coarse, Partition::discrete(4)));
  EXPECT_FALSE(refines(Partition::from_labels({0, 1, 1, 0}), coarse));
}

TEST(RandomVariable, ArithmeticAndFiniteness) {
  const RandomVariable x{1.0, 2.0, 3.0};
  const RandomVariable y{0.5, 0.5, 0.5};
  EXPECT_EQ(x + y, (RandomVariable{1.5, 2.5, 3.5}));
  EXPECT_EQ(x * y, (RandomVariable{0.5, 1.0, 1.5}));
  EXPECT_EQ(-x, (RandomVariable{-1.0, -2.0, -3.0}));
  EXPECT_DOUBLE_EQ(x.max(), 3.0);
  EXPECT_THROW(RandomVariable({1.0, std::nan("")}), ValidationError);
  EXPECT_THROW(x + RandomVariable{1.0}, DimensionError);
}

TEST(CondExp, MatchesOracleOnRandomPartitions) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 9;
    std::vector<double> w(n);
    double total = 0.0;
    for (double& v : w) total += (v = u(rng));
    for (double& v : w) v /= total;
    std::vector<std::size_t> labels(n);
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = rng() % 3;
      xs[i] = u(rng) * 10 - 5;
    }
    const FiniteSpace space(w);
    const auto part = Partition::from_labels(labels);
    const auto got = cond_exp(space, RandomVariable(xs), part);
    const auto want = oracle::cond_exp(space.probs(), labels, xs);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
    EXPECT_TRUE(is_measurable(got, part, 1e-12));
    EXPECT_NEAR(expect(space, got), expect(space, RandomVariable(xs)), 1e-12);
  }
}

TEST(CondExp, EventExpectationAndProbability) {
  const FiniteSpace s({0.1, 0.2, 0.3, 0.4});
  const RandomVariable x{1.0, 2.0, 3.0, 4.0};
  const std::vector<std::size_t> event{1, 3};
  EXPECT_NEAR(probability(s, event), 0.6, 1e-15);
  EXPECT_NEAR(expect(s, x, event), 0.4 + 1.6, 1e-15);
  EXPECT_NEAR(expect(s, x), 3.0, 1e-15);
}

TEST(Measurability, DefectIsBlockSpread) {
  const auto p = Partition::from_labels({0, 0, 1});
  EXPECT_DOUBLE_EQ(measurability_defect(RandomVariable{1.0, 1.5, 9.0}, p), 0.5);
  EXPECT_TRUE(is_measurable(RandomVariable{2.0, 2.0, 5.0}, p, 0.0));
  EXPECT_FALSE(is_measurable(RandomVariable{2.0, 2.1, 5.0}, p, 1e-10));
}
