#include <gtest/gtest.h>

#include "doobkit/doob.hpp"
#include "doobkit/errors.hpp"
#include "doobkit/trees.hpp"
#include "oracle.hpp"

using namespace doobkit;

namespace {

bool all_passed(const std::vector<InvariantCheck>& checks) {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

}  // namespace

TEST(DoobDecompose, SquaredWalkCompensatorIsStepCount) {
  for (std::size_t n = 1; n <= 8; ++n) {
    const auto s = oracle::tree_walk(n);
    std::vector<RandomVariable> rows;
    for (const auto& r : s) {
      std::vector<double> sq(r.size());
      for (std::size_t w = 0; w < r.size(); ++w) sq[w] = r[w] * r[w];
      rows.emplace_back(sq);
    }
    const AdaptedProcess x(binary_tree_filtration(n), rows);
    const auto d = doob_decompose(x);
    for (std::size_t k = 0; k <= n; ++k) {
      for (std::size_t w = 0; w < x.atom_count(); ++w) {
        EXPECT_NEAR(d.a.value(k, w), static_cast<double>(k), 1e-12);
      }
    }
    EXPECT_TRUE(all_passed(check_decomposition(x, d)));
  }
}

TEST(DoobDecompose, MatchesOracleOnAbsWalk) {
  const auto x = absolute(tree_walk(binary_tree_filtration(7)));
  const auto d = doob_decompose(x);
  EXPECT_LE(oracle::max_abs_diff(oracle::compensator(x), d.a), 1e-12);
}

TEST(DoobDecompose, MartingaleHasZeroCompensator) {
  const auto s = tree_walk(binary_tree_filtration(5));
  const auto d = doob_decompose(s);
  for (const auto& r : d.a.rows()) EXPECT_DOUBLE_EQ(r.max(), 0.0);
  EXPECT_EQ(d.m.rows()[3], s.rows()[3]);
}

TEST(DoobDecompose, RejectsSupermartingale) {
  const auto x = -1.0 * squared(tree_walk(binary_tree_filtration(3)));
  EXPECT_THROW(doob_decompose(x), NotSubmartingaleError);
}

TEST(DoobDecompose, MartingaleFirstRouteAgrees) {
  const auto x = absolute(tree_walk(binary_tree_filtration(6)));
  const auto d1 = doob_decompose(x);
  const auto d2 = doob_decompose_martingale_first(x);
  EXPECT_LE(oracle::max_abs_diff(oracle::rows_of(d1.a), d2.a), 1e-12);
  EXPECT_TRUE(check_uniqueness(x, d1, d2));
  EXPECT_TRUE(is_martingale(martingale_part(x, d1.a.terminal())));
}

TEST(CheckDecomposition, NamesEveryInvariant) {
  const auto x = squared(tree_walk(binary_tree_filtration(2)));
  const auto d = doob_decompose(x);
  const auto checks = check_decomposition(x, d);
  ASSERT_EQ(checks.size(), 5U);
  EXPECT_EQ(checks[0].name, "a-starts-at-zero");
  EXPECT_EQ(checks[1].name, "a-nondecreasing");
  EXPECT_EQ(checks[2].name, "a-predictable");
  EXPECT_EQ(checks[3].name, "m-martingale");
  EXPECT_EQ(checks[4].name, "a-plus-m-equals-x");
}

TEST(CheckUniqueness, MalformedDecompositionNamesInvariant) {
  const auto x = squared(tree_walk(binary_tree_filtration(3)));
  const auto d = doob_decompose(x);
  auto shifted = d;
  shifted.a = d.a + AdaptedProcess::deterministic(x.shared_filtration(), std::vector<double>(4, 0.5));
  shifted.m = x - shifted.a;
  try {
    check_uniqueness(x, d, shifted);
    FAIL();
  } catch (const MalformedDecompositionError& e) {
    EXPECT_NE(std::string(e.what()).find("a-starts-at-zero"), std::string::npos);
  }
}

TEST(Predictability, AdaptedIncrementsAreNotPredictable) {
  auto tree = binary_tree_filtration(3);
  EXPECT_TRUE(is_predictable(doob_decompose(squared(tree_walk(tree))).a));
  // N_k = number of up steps so far: adapted, increasing, not predictable.
  const auto s = tree_walk(tree);
  std::vector<double> time_path{0, 1, 2, 3};
  const auto ups = 0.5 * (s + AdaptedProcess::deterministic(tree, time_path));
  EXPECT_TRUE(is_nondecreasing(ups));
  EXPECT_FALSE(is_predictable(ups));
  EXPECT_NEAR(predictability_defect(ups), 1.0, 1e-12);
}

TEST(Naturality, PairingMatchesOracle) {
  auto tree = binary_tree_filtration(4);
  const auto s = tree_walk(tree);
  std::vector<double> time_path{0, 1, 2, 3, 4};
  const auto ups = 0.5 * (s + AdaptedProcess::deterministic(tree, time_path));
  const auto mismatch = naturality_mismatch(ups);
  for (std::size_t w = 0; w < ups.atom_count(); ++w) {
    const auto n = basis_martingale(tree, w);
    EXPECT_TRUE(is_martingale(n));
    const auto [left, right] = oracle::basis_pairing(ups, w);
    EXPECT_NEAR(natural_pairing(n, ups), left, 1e-14);
    EXPECT_NEAR(mismatch[w], left - right, 1e-14);
  }
  EXPECT_FALSE(is_natural(ups));
  EXPECT_TRUE(is_natural(doob_decompose(ups).a));
}

TEST(Naturality, InputErrors) {
  auto tree = binary_tree_filtration(2);
  const auto s = tree_walk(tree);
  const auto a = doob_decompose(squared(s)).a;
  EXPECT_THROW(natural_pairing(squared(s), a), NotMartingaleError);
  EXPECT_THROW(natural_pairing(s, s), MonotonicityError);
  EXPECT_THROW(is_natural(s), MonotonicityError);
  EXPECT_THROW(is_natural(AdaptedProcess::deterministic(tree, std::vector<double>{1, 2, 3})),
               ValidationError);
}

TEST(Audit, OffDiagonalsVanish) {
  auto tree = binary_tree_filtration(3);
  const auto rep = doleans_dade_audit(tree, 300, 42);
  EXPECT_EQ(rep.trials, 300U);
  EXPECT_TRUE(rep.off_diagonal_zero());
  EXPECT_GT(rep.predictable_natural(), 50U);
  EXPECT_GT(rep.neither(), 50U);
  EXPECT_EQ(rep.predictable_natural() + rep.neither(), 300U);
}

TEST(Audit, ProcessesAreSeededPerTrial) {
  auto tree = binary_tree_filtration(3);
  const auto a = audit_process(tree, 9, 17);
  const auto b = audit_process(tree, 9, 17);
  EXPECT_EQ(a.rows()[3], b.rows()[3]);
  EXPECT_NE(audit_process(tree, 9, 18).rows()[3], a.rows()[3]);
  EXPECT_TRUE(is_nondecreasing(a));
  const auto empty = doleans_dade_audit(tree, 0, 1);
  EXPECT_EQ(empty.trials, 0U);
  EXPECT_TRUE(empty.off_diagonal_zero());
}
