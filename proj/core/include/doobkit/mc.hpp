#pragma once

// Monte Carlo layer: path simulation with per-path counter-keyed streams,
// cross-sectional estimation of conditional increment means on the Markov
// state, compensator estimates with standard errors, and a residual test of
// the martingale property.

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "doobkit/model.hpp"
#include "doobkit/process.hpp"

namespace doobkit {

/// A simulable Markov model. The Markov state of every built-in model is its
/// current value.
class McModel {
 public:
  virtual ~McModel() = default;

  virtual std::string id() const = 0;
  /// Fills out[k] with the path value at grid time k.
  virtual void simulate_path(const TimeGrid& grid, std::mt19937_64& engine,
                             std::span<double> out) const = 0;
  /// E(X_{t1} - X_{t0} | state at t0), when known in closed form.
  virtual std::optional<double> increment_mean(double state, double t0, double t1) const = 0;
  virtual KnownCompensator known_compensator() const = 0;
};

/// Poisson counting process; arrivals from exponential inter-arrival times,
/// then counted at the grid times.
std::unique_ptr<McModel> make_poisson_model(double rate);
/// X = B^2 for a standard Brownian motion B sampled on the grid.
std::unique_ptr<McModel> make_gaussian_walk_squared_model();
/// X = B (a martingale).
std::unique_ptr<McModel> make_gaussian_walk_model();
/// Dispatches on the mc-* kinds; ModelError otherwise.
std::unique_ptr<McModel> make_mc_model(const ModelSpec& spec);

struct PathBatch {
  std::string model_id;
  TimeGrid grid;
  std::uint64_t seed = 0;
  /// Stream index of the first path; path i uses stream first_path + i.
  std::uint64_t first_path = 0;
  std::size_t path_count = 0;
  /// Row-major (path x time).
  std::vector<double> paths;

  std::size_t time_count() const { return grid.size(); }
  std::span<const double> path(std::size_t i) const {
    return std::span<const double>(paths).subspan(i * time_count(), time_count());
  }
  double at(std::size_t i, std::size_t k) const { return paths[i * time_count() + k]; }
};

/// Path i is drawn from stream_engine(seed, i). `workers` = 0 uses the
/// hardware concurrency; the output does not depend on it.
PathBatch simulate(const McModel& model, const TimeGrid& grid, std::size_t path_count,
                   std::uint64_t seed, unsigned workers = 0);

/// First half and second half of a batch (by path index).
std::pair<PathBatch, PathBatch> split_batch(const PathBatch& batch);

/// Flat binary dump: magic, model id, grid, seed, first path, path count,
/// then the row-major paths, all little-endian.
std::vector<unsigned char> dump_batch(const PathBatch& batch);
PathBatch load_batch(std::span<const unsigned char> bytes);

class CondExpEstimator {
 public:
  enum class Kind { analytic, binning, regression };

  static CondExpEstimator analytic() { return CondExpEstimator(Kind::analytic, 0); }
  /// bins >= 1.
  static CondExpEstimator binning(std::size_t bins);
  /// degree in [0, 6].
  static CondExpEstimator regression(std::size_t degree);
  /// "analytic", "binning:<bins>" or "regression:<degree>".
  static CondExpEstimator parse(const std::string& text);

  Kind kind() const { return kind_; }
  std::size_t parameter() const { return parameter_; }
  std::string to_string() const;

 private:
  CondExpEstimator(Kind kind, std::size_t parameter) : kind_(kind), parameter_(parameter) {}

  Kind kind_;
  std::size_t parameter_;
};

/// Fitted conditional increment means, one function of the state per step.
class IncrementFit {
 public:
  /// Estimated E(X_{k+1} - X_k | state_k = s).
  double mean(std::size_t k, double state) const;
  std::size_t steps() const { return steps_.size(); }
  /// True where the fit fell back to the unconditional mean because the
  /// design was degenerate.
  const std::vector<bool>& fallback() const { return fallback_; }

 private:
  friend IncrementFit fit_increments(const McModel&, const PathBatch&, const CondExpEstimator&);

  struct Step {
    CondExpEstimator::Kind kind = CondExpEstimator::Kind::analytic;
    double t0 = 0.0;
    double t1 = 0.0;
    double global_mean = 0.0;
    // binning
    double lo = 0.0;
    double width = 0.0;
    std::vector<double> bin_mean;
    std::vector<bool> bin_filled;
    // regression on z = (s - center) / scale
    double center = 0.0;
    double scale = 1.0;
    std::vector<double> coef;
  };

  const McModel* model_ = nullptr;
  std::vector<Step> steps_;
  std::vector<bool> fallback_;
};

IncrementFit fit_increments(const McModel& model, const PathBatch& batch,
                            const CondExpEstimator& est);

struct CompensatorEstimate {
  std::size_t path_count = 0;
  std::size_t time_count = 0;
  /// Row-major (path x time) estimated compensator.
  std::vector<double> per_path;
  std::vector<double> mean;
  /// Batch-means standard error of `mean` over contiguous path groups.
  std::vector<double> se;
  std::vector<bool> fallback;

  double at(std::size_t i, std::size_t k) const { return per_path[i * time_count + k]; }
  bool any_fallback() const;
};

inline constexpr std::size_t kSeGroups = 100;

/// Accumulates the fitted increment means along every path of `batch`.
CompensatorEstimate apply_increments(const IncrementFit& fit, const PathBatch& batch);

/// fit_increments on `batch` followed by apply_increments on the same batch.
/// The standard error is recomputed by refitting inside each of the
/// kSeGroups path groups, so it covers the estimation error of the fit.
CompensatorEstimate estimate_compensator(const McModel& model, const PathBatch& batch,
                                         const CondExpEstimator& est);

struct ResidualReport {
  /// Per step: t statistic of the mean residual (intercept with centered
  /// regressors), of the slope on the current state, and the largest |t|
  /// over all slope coefficients.
  std::vector<double> t_intercept;
  std::vector<double> t_slope;
  std::vector<double> t_slope_max;
  /// Path-level statistics. Each path contributes the sum over steps of its
  /// residuals (z_intercept) and of its residuals times the standardized
  /// current state (z_slope); z is the t statistic of the path mean. Under
  /// the martingale hypothesis both are approximately standard normal.
  /// Combining per-step t statistics instead would accumulate their
  /// small-sample skew bias over many sparse steps.
  double z_intercept = 0.0;
  double z_slope = 0.0;
  /// max(|z_intercept|, |z_slope|).
  double max_abs_t = 0.0;
  /// Largest per-step |t| (informational; grows with the step count).
  double max_step_abs_t = 0.0;
};

/// Regresses residual increments (x[k+1]-x[k]) - (a[k+1]-a[k]) on the
/// states at k, k-1, ..., k-lags+1 and reports t statistics with
/// heteroskedasticity-robust (White) standard errors. When the compensator
/// was fitted on `fit_paths` other paths, the path-level standard errors are
/// widened by sqrt(1 + n / fit_paths) for the fit's own estimation error;
/// 0 means no fit (closed form, or fitted on `batch` itself).
ResidualReport residual_martingale_test(const PathBatch& batch, const CompensatorEstimate& a,
                                        std::size_t lags = 1, std::size_t fit_paths = 0);

}  // namespace doobkit
