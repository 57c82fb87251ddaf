#include <gtest/gtest.h>

#include "doobkit/errors.hpp"
#include "doobkit/process.hpp"
#include "doobkit/trees.hpp"
#include "oracle.hpp"

using namespace doobkit;

TEST(TimeGrid, Validation) {
  EXPECT_THROW(TimeGrid({0.0}), ValidationError);
  EXPECT_THROW(TimeGrid({0.1, 1.0}), ValidationError);
  EXPECT_THROW(TimeGrid({0.0, 0.9}), ValidationError);
  EXPECT_THROW(TimeGrid({0.0, 0.5, 0.5, 1.0}), ValidationError);
  EXPECT_THROW(TimeGrid::uniform(0), ValidationError);
}

TEST(TimeGrid, LookupAndNesting) {
  const auto g4 = TimeGrid::uniform(4);
  const auto g2 = TimeGrid::uniform(2);
  EXPECT_EQ(g4.steps(), 4U);
  EXPECT_EQ(g4.index_of(0.5), std::optional<std::size_t>(2));
  EXPECT_FALSE(g4.index_of(0.3).has_value());
  EXPECT_TRUE(g4.contains(g2));
  EXPECT_FALSE(g2.contains(g4));
  EXPECT_FALSE(TimeGrid::uniform(3).contains(g2));
}

TEST(Filtration, MustRefine) {
  const auto space = FiniteSpace::uniform(4);
  EXPECT_THROW(Filtration(space, TimeGrid::uniform(1),
                          {Partition::from_labels({0, 0, 1, 1}), Partition::trivial(4)}),
               ValidationError);
  EXPECT_THROW(Filtration(space, TimeGrid::uniform(2), {Partition::trivial(4)}), DimensionError);
  EXPECT_NO_THROW(Filtration(space, TimeGrid::uniform(1), {Partition::trivial(4), Partition::discrete(4)}));
}

TEST(AdaptedProcess, AdaptednessIsChecked) {
  auto f = make_filtration(FiniteSpace::uniform(2), TimeGrid::uniform(1),
                           {Partition::trivial(2), Partition::discrete(2)});
  try {
    AdaptedProcess(f, {RandomVariable{0.0, 1.0}, RandomVariable{0.0, 1.0}});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("adaptedness", 0), 0U);
  }
  EXPECT_THROW(AdaptedProcess(f, {RandomVariable{0.0, 0.0}}), DimensionError);
}

TEST(AdaptedProcess, TreeWalkMatchesBits) {
  for (std::size_t n = 1; n <= 6; ++n) {
    const auto s = tree_walk(binary_tree_filtration(n));
    EXPECT_LE(oracle::max_abs_diff(oracle::tree_walk(n), s), 0.0);
  }
}

TEST(AdaptedProcess, MartingalePredicates) {
  auto tree = binary_tree_filtration(4);
  const auto s = tree_walk(tree);
  EXPECT_TRUE(is_martingale(s));
  EXPECT_TRUE(is_submartingale(s));
  EXPECT_FALSE(is_nondecreasing(s));
  const auto s2 = squared(s);
  EXPECT_FALSE(is_martingale(s2));
  EXPECT_TRUE(is_submartingale(s2));
  EXPECT_NEAR(martingale_defect(s2), 1.0, 1e-12);
  EXPECT_FALSE(is_submartingale(-1.0 * s2));
  // Biased coin: S drifts down.
  EXPECT_FALSE(is_submartingale(tree_walk(binary_tree_filtration(3, 0.3))));
}

TEST(StoppingTime, CrossingTimeOfDeterministicPath) {
  auto tree = binary_tree_filtration(4);
  const std::vector<double> path{0.0, 1.0, 2.0, 3.0, 4.0};
  const auto a = AdaptedProcess::deterministic(tree, path);
  const auto tau = crossing_time(a, 2.5);
  for (auto idx : tau.indices()) EXPECT_EQ(idx, 2U);
  EXPECT_TRUE(tau.is_valid());
  const auto v = value_at(a, tau);
  for (std::size_t w = 0; w < v.size(); ++w) EXPECT_EQ(v[w], 2.0);
  EXPECT_THROW(crossing_time(a, 0.0), DomainError);
  EXPECT_THROW(crossing_time(tree_walk(tree), 1.0), MonotonicityError);
}

TEST(StoppingTime, ValidityDependsOnInformation) {
  auto tree = binary_tree_filtration(2);
  // Stop at 1 on atoms whose second step goes up: needs time-2 information.
  std::vector<std::size_t> idx(4);
  for (std::size_t w = 0; w < 4; ++w) idx[w] = tree_step_up(w, 2, 2) ? 1 : 2;
  EXPECT_FALSE(StoppingTime(tree, idx).is_valid());
  for (std::size_t w = 0; w < 4; ++w) idx[w] = tree_step_up(w, 1, 2) ? 1 : 2;
  EXPECT_TRUE(StoppingTime(tree, idx).is_valid());
  EXPECT_THROW(StoppingTime(tree, {0, 1, 5, 1}), DimensionError);
}
