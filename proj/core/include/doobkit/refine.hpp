#pragma once

// Grid refinement studies: compensators computed on a nested family of time
// grids, compared at common times and against a known continuum compensator.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "doobkit/mc.hpp"
#include "doobkit/model.hpp"
#include "doobkit/process.hpp"

namespace doobkit {

inline constexpr std::size_t kMaxDepth = 20;
inline constexpr double kExactTol = 1e-10;

/// Times j / 2^depth.
TimeGrid dyadic_grid(std::size_t depth);
/// Grids for every depth in [depth_min, depth_max]; DomainError unless
/// 0 <= depth_min <= depth_max <= 20.
std::vector<TimeGrid> dyadic_grids(std::size_t depth_min, std::size_t depth_max);

/// Settings for Monte Carlo models; ignored by exact models.
struct McStudyOptions {
  std::size_t path_count = 100000;
  std::uint64_t seed = 0;
  CondExpEstimator estimator = CondExpEstimator::analytic();
  unsigned workers = 0;
  std::size_t residual_lags = 1;
};

struct GridRow {
  std::size_t grid_size = 0;
  /// log2 of the step count when the grid is dyadic.
  std::optional<std::size_t> depth;
  double a_terminal_mean = 0.0;
  double a_terminal_sd = 0.0;
  double a_terminal_min = 0.0;
  double a_terminal_max = 0.0;
  /// Standard error of a_terminal_mean (0 for exact models).
  double a_terminal_se = 0.0;
  /// Distance to the previous (coarser) grid at its times: max over common
  /// times of the Wasserstein-1 distance between compensator laws (exact),
  /// or of |difference of estimated means| (Monte Carlo).
  std::optional<double> delta_to_previous;
  /// Standard error of delta_to_previous (Monte Carlo only).
  double delta_se = 0.0;
  /// max over grid times of E|A_t - target(t)| (exact) or
  /// |mean A_1 - target(1)| (Monte Carlo), when a target is known.
  std::optional<double> target_deviation;
  /// Exact: deviation <= 1e-10. Monte Carlo: deviation <= 3 SE.
  std::optional<bool> target_pass;
  /// Decomposition/naturality/tail-chain suites for finite models; start,
  /// monotonicity and submartingale checks for lattices.
  bool invariants_passed = true;
  /// ResidualReport::max_abs_t of the held-out residual test (Monte Carlo).
  std::optional<double> residual_max_abs_t;
  bool estimator_fallback = false;
};

struct RefinementStudy {
  std::string model_id;
  bool monte_carlo = false;
  std::vector<TimeGrid> grids;
  std::vector<GridRow> rows;
  /// rows[i + 1].delta_to_previous for every consecutive pair.
  std::vector<double> l1_deltas;
  KnownCompensator target;
};

/// Runs the model on every grid (grids must be strictly nested).
/// Binary-tree models are re-gridded as finite spaces, lattice models use
/// the recombining engine, Monte Carlo models are simulated. The target is
/// model.known (see default_known_compensator).
RefinementStudy compensator_convergence(const ModelSpec& model, const std::vector<TimeGrid>& grids,
                                        const McStudyOptions& mc = {});

struct ConvergenceReport {
  std::vector<GridRow> table;
  std::vector<double> deltas;
  /// "single grid", "converged (exact)", "decreasing" or "not decreasing".
  std::string verdict;
  /// All rows with a target pass their target check.
  bool target_pass = true;
  bool invariants_pass = true;
};

/// Deltas are "decreasing" when each is at most the previous one plus a
/// slack of 1e-10 (exact) or 3 standard errors (Monte Carlo).
ConvergenceReport report_convergence(const RefinementStudy& study);

}  // namespace doobkit
