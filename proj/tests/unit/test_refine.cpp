#include <gtest/gtest.h>

#include "doobkit/errors.hpp"
#include "doobkit/refine.hpp"

using namespace doobkit;

namespace {

ModelSpec with_default_target(ModelSpec m) {
  m.known = default_known_compensator(m);
  return m;
}

}  // namespace

TEST(DyadicGrid, Shapes) {
  EXPECT_EQ(dyadic_grid(0), TimeGrid({0.0, 1.0}));
  EXPECT_EQ(dyadic_grid(2), TimeGrid({0.0, 0.25, 0.5, 0.75, 1.0}));
  EXPECT_EQ(dyadic_grids(1, 3).size(), 3U);
  EXPECT_EQ(dyadic_grid(20).steps(), std::size_t{1} << 20);
  EXPECT_THROW(dyadic_grid(25), DomainError);
  EXPECT_THROW(dyadic_grids(3, 2), DomainError);
  EXPECT_THROW(dyadic_grids(0, 21), DomainError);
}

TEST(Refinement, GridsMustNest) {
  ModelSpec m;
  m.kind = ModelKind::recombining_lattice;
  EXPECT_THROW(compensator_convergence(m, {}), DomainError);
  EXPECT_THROW(compensator_convergence(m, {TimeGrid::uniform(2), TimeGrid::uniform(3)}), DomainError);
  EXPECT_THROW(compensator_convergence(m, {dyadic_grid(2), dyadic_grid(2)}), DomainError);
}

TEST(Refinement, BinaryTreeScaledSquareHitsTarget) {
  ModelSpec m;
  m.kind = ModelKind::binary_tree;
  m.steps = 4;
  m.scaling = StepScaling::variance;
  m = with_default_target(m);
  const auto study = compensator_convergence(m, dyadic_grids(0, 4));
  const auto rep = report_convergence(study);
  EXPECT_EQ(rep.verdict, "converged (exact)");
  EXPECT_TRUE(rep.target_pass);
  EXPECT_TRUE(rep.invariants_pass);
  ASSERT_EQ(study.rows.size(), 5U);
  EXPECT_EQ(study.rows[3].depth, std::optional<std::size_t>(3));
  EXPECT_EQ(study.rows[3].grid_size, 9U);
  EXPECT_LE(*study.rows[4].target_deviation, 1e-12);
}

TEST(Refinement, AbsWalkLatticeDeltasShrink) {
  ModelSpec m;
  m.kind = ModelKind::recombining_lattice;
  m.functional = WalkFunctional::abs_walk;
  m = with_default_target(m);
  const auto study = compensator_convergence(m, dyadic_grids(2, 9));
  const auto rep = report_convergence(study);
  EXPECT_FALSE(study.target.known());
  EXPECT_EQ(rep.verdict, "decreasing");
  EXPECT_GT(rep.deltas.front(), rep.deltas.back());
  // E(A_1) = E|B_1| on the lattice, close to sqrt(2/pi) on fine grids.
  EXPECT_NEAR(study.rows.back().a_terminal_mean, std::sqrt(2.0 / M_PI), 0.05);
}

TEST(Refinement, DriftDeviationsAreZero) {
  ModelSpec m;
  m.kind = ModelKind::recombining_lattice;
  m.functional = WalkFunctional::drift;
  m.rate = 0.75;
  m = with_default_target(m);
  const auto study = compensator_convergence(m, dyadic_grids(0, 6));
  for (const auto& r : study.rows) EXPECT_EQ(*r.target_deviation, 0.0);
  EXPECT_EQ(report_convergence(study).verdict, "converged (exact)");
}

TEST(Refinement, MonteCarloPoissonAnalytic) {
  ModelSpec m;
  m.kind = ModelKind::mc_poisson;
  m = with_default_target(m);
  McStudyOptions opt;
  opt.path_count = 2000;
  opt.seed = 5;
  opt.workers = 1;
  const auto study = compensator_convergence(m, dyadic_grids(2, 4), opt);
  EXPECT_TRUE(study.monte_carlo);
  EXPECT_EQ(study.model_id, "mc-poisson(1)");
  for (const auto& r : study.rows) {
    EXPECT_EQ(*r.target_deviation, 0.0);
    EXPECT_TRUE(*r.target_pass);
    EXPECT_TRUE(r.residual_max_abs_t.has_value());
  }
  EXPECT_EQ(report_convergence(study).verdict, "converged (exact)");
}

TEST(Report, VerdictRules) {
  RefinementStudy s;
  s.rows.resize(1);
  EXPECT_EQ(report_convergence(s).verdict, "single grid");
  s.rows.resize(4);
  s.l1_deltas = {0.4, 0.2, 0.1};
  EXPECT_EQ(report_convergence(s).verdict, "decreasing");
  s.l1_deltas = {0.4, 0.5, 0.1};
  EXPECT_EQ(report_convergence(s).verdict, "not decreasing");
  s.monte_carlo = true;
  s.rows[2].delta_se = 0.05;
  EXPECT_EQ(report_convergence(s).verdict, "decreasing");
  s.l1_deltas = {0.0, 1e-12, 0.0};
  EXPECT_EQ(report_convergence(s).verdict, "converged (exact)");
  EXPECT_THROW(report_convergence(RefinementStudy{}), DomainError);
}
