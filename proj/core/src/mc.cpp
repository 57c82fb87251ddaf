#include "doobkit/mc.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <thread>

#include <Eigen/Dense>

#include "doobkit/errors.hpp"
#include "doobkit/rng.hpp"

namespace doobkit {

// ---------------------------------------------------------------------------
// Built-in models

namespace {

class PoissonModel final : public McModel {
 public:
  explicit PoissonModel(double rate) : rate_(rate) {
    if (!(rate > 0.0)) throw ModelError("poisson rate must be > 0");
  }

  std::string id() const override {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, rate_);
    return "mc-poisson(" + std::string(buf, res.ptr) + ")";
  }

  void simulate_path(const TimeGrid& grid, std::mt19937_64& engine,
                     std::span<double> out) const override {
    // Arrival times on [0, 1] from exponential gaps, counted at grid times.
    std::size_t k = 0;
    double count = 0.0;
    double t = -std::log(open_uniform(engine)) / rate_;
    while (k < grid.size()) {
      if (t <= grid[k]) {
        count += 1.0;
        t += -std::log(open_uniform(engine)) / rate_;
      } else {
        out[k++] = count;
      }
    }
  }

  std::optional<double> increment_mean(double, double t0, double t1) const override {
    return rate_ * (t1 - t0);
  }

  KnownCompensator known_compensator() const override {
    return {KnownCompensator::Type::linear, rate_};
  }

 private:
  double rate_;
};

class GaussianWalkModel final : public McModel {
 public:
  explicit GaussianWalkModel(bool squared) : squared_(squared) {}

  std::string id() const override {
    return squared_ ? "mc-gaussian-walk-squared" : "mc-gaussian-walk";
  }

  void simulate_path(const TimeGrid& grid, std::mt19937_64& engine,
                     std::span<double> out) const override {
    std::normal_distribution<double> normal(0.0, 1.0);
    double b = 0.0;
    out[0] = 0.0;
    for (std::size_t k = 1; k < grid.size(); ++k) {
      b += std::sqrt(grid[k] - grid[k - 1]) * normal(engine);
      out[k] = squared_ ? b * b : b;
    }
  }

  std::optional<double> increment_mean(double, double t0, double t1) const override {
    return squared_ ? t1 - t0 : 0.0;
  }

  KnownCompensator known_compensator() const override {
    if (squared_) return {KnownCompensator::Type::identity_time, 1.0};
    return {};
  }

 private:
  bool squared_;
};

}  // namespace

std::unique_ptr<McModel> make_poisson_model(double rate) {
  return std::make_unique<PoissonModel>(rate);
}

std::unique_ptr<McModel> make_gaussian_walk_squared_model() {
  return std::make_unique<GaussianWalkModel>(true);
}

std::unique_ptr<McModel> make_gaussian_walk_model() {
  return std::make_unique<GaussianWalkModel>(false);
}

std::unique_ptr<McModel> make_mc_model(const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::mc_poisson: return make_poisson_model(spec.rate);
    case ModelKind::mc_gaussian_walk_squared: return make_gaussian_walk_squared_model();
    case ModelKind::mc_gaussian_walk: return make_gaussian_walk_model();
    default: break;
  }
  throw ModelError(std::string("model kind ") + to_string(spec.kind) +
                   " is not a Monte Carlo model");
}

// ---------------------------------------------------------------------------
// Simulation

PathBatch simulate(const McModel& model, const TimeGrid& grid, std::size_t path_count,
                   std::uint64_t seed, unsigned workers) {
  PathBatch batch{model.id(), grid, seed, 0, path_count, {}};
  const std::size_t t = grid.size();
  batch.paths.assign(path_count * t, 0.0);
  if (path_count == 0) return batch;

  if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, path_count));

  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto engine = stream_engine(seed, i);
      model.simulate_path(grid, engine, std::span<double>(batch.paths).subspan(i * t, t));
    }
  };
  if (workers == 1) {
    run(0, path_count);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = path_count * w / workers;
      const std::size_t end = path_count * (w + 1) / workers;
      pool.emplace_back(run, begin, end);
    }
  }
  return batch;
}

std::pair<PathBatch, PathBatch> split_batch(const PathBatch& batch) {
  const std::size_t half = batch.path_count / 2;
  const std::size_t t = batch.time_count();
  PathBatch first{batch.model_id, batch.grid, batch.seed, batch.first_path, half, {}};
  PathBatch second{batch.model_id, batch.grid, batch.seed, batch.first_path + half,
                   batch.path_count - half, {}};
  first.paths.assign(batch.paths.begin(), batch.paths.begin() + static_cast<std::ptrdiff_t>(half * t));
  second.paths.assign(batch.paths.begin() + static_cast<std::ptrdiff_t>(half * t), batch.paths.end());
  return {std::move(first), std::move(second)};
}

// ---------------------------------------------------------------------------
// Binary dump

namespace {

constexpr char kBatchMagic[8] = {'D', 'K', 'B', 'A', 'T', 'C', 'H', '1'};

template <class T>
void put(std::vector<unsigned char>& out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

template <class T>
T get(std::span<const unsigned char> bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw ValidationError("path batch dump is truncated");
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, bytes.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  pos += sizeof(T);
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

std::vector<unsigned char> dump_batch(const PathBatch& batch) {
  std::vector<unsigned char> out(kBatchMagic, kBatchMagic + sizeof kBatchMagic);
  put<std::uint64_t>(out, batch.model_id.size());
  out.insert(out.end(), batch.model_id.begin(), batch.model_id.end());
  put<std::uint64_t>(out, batch.grid.size());
  for (double t : batch.grid.times()) put<double>(out, t);
  put<std::uint64_t>(out, batch.seed);
  put<std::uint64_t>(out, batch.first_path);
  put<std::uint64_t>(out, batch.path_count);
  for (double v : batch.paths) put<double>(out, v);
  return out;
}

PathBatch load_batch(std::span<const unsigned char> bytes) {
  if (bytes.size() < sizeof kBatchMagic ||
      std::memcmp(bytes.data(), kBatchMagic, sizeof kBatchMagic) != 0) {
    throw ValidationError("not a path batch dump");
  }
  std::size_t pos = sizeof kBatchMagic;
  const auto id_len = get<std::uint64_t>(bytes, pos);
  if (pos + id_len > bytes.size()) throw ValidationError("path batch dump is truncated");
  std::string id(reinterpret_cast<const char*>(bytes.data() + pos), id_len);
  pos += id_len;
  const auto grid_len = get<std::uint64_t>(bytes, pos);
  std::vector<double> times(grid_len);
  for (auto& t : times) t = get<double>(bytes, pos);
  PathBatch b{std::move(id), TimeGrid(std::move(times)), 0, 0, 0, {}};
  b.seed = get<std::uint64_t>(bytes, pos);
  b.first_path = get<std::uint64_t>(bytes, pos);
  b.path_count = get<std::uint64_t>(bytes, pos);
  b.paths.resize(b.path_count * b.time_count());
  for (auto& v : b.paths) v = get<double>(bytes, pos);
  if (pos != bytes.size()) throw ValidationError("trailing bytes after path batch dump");
  return b;
}

// ---------------------------------------------------------------------------
// Estimators

CondExpEstimator CondExpEstimator::binning(std::size_t bins) {
  if (bins < 1) throw DomainError("binning estimator needs at least one bin");
  return CondExpEstimator(Kind::binning, bins);
}

CondExpEstimator CondExpEstimator::regression(std::size_t degree) {
  if (degree > 6) throw DomainError("regression degree must lie in [0, 6]");
  return CondExpEstimator(Kind::regression, degree);
}

CondExpEstimator CondExpEstimator::parse(const std::string& text) {
  if (text == "analytic") return analytic();
  auto number_after = [&](std::size_t colon) {
    std::size_t v = 0;
    const char* first = text.data() + colon + 1;
    const char* last = text.data() + text.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || first == last) {
      throw DomainError("estimator parameter must be a non-negative integer: '" + text + "'");
    }
    return v;
  };
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string head = text.substr(0, colon);
    if (head == "binning") return binning(number_after(colon));
    if (head == "regression") return regression(number_after(colon));
  }
  throw DomainError("estimator must be analytic, binning:<bins> or regression:<degree>, got '" +
                    text + "'");
}

std::string CondExpEstimator::to_string() const {
  switch (kind_) {
    case Kind::analytic: return "analytic";
    case Kind::binning: return "binning:" + std::to_string(parameter_);
    case Kind::regression: return "regression:" + std::to_string(parameter_);
  }
  return "?";
}

double IncrementFit::mean(std::size_t k, double state) const {
  const Step& s = steps_.at(k);
  switch (s.kind) {
    case CondExpEstimator::Kind::analytic: {
      auto m = model_->increment_mean(state, s.t0, s.t1);
      return *m;
    }
    case CondExpEstimator::Kind::binning: {
      if (s.bin_mean.size() <= 1 || s.width <= 0.0) return s.bin_mean.empty() ? s.global_mean : s.bin_mean[0];
      const double pos = (state - s.lo) / s.width;
      const auto last = static_cast<double>(s.bin_mean.size() - 1);
      const auto idx = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, last));
      return s.bin_filled[idx] ? s.bin_mean[idx] : s.global_mean;
    }
    case CondExpEstimator::Kind::regression: {
      if (s.coef.empty()) return s.global_mean;
      const double z = (state - s.center) / s.scale;
      double v = 0.0;
      for (std::size_t d = s.coef.size(); d-- > 0;) v = v * z + s.coef[d];
      return v;
    }
  }
  return s.global_mean;
}

IncrementFit fit_increments(const McModel& model, const PathBatch& batch,
                            const CondExpEstimator& est) {
  IncrementFit fit;
  fit.model_ = &model;
  const std::size_t steps = batch.time_count() - 1;
  const std::size_t n = batch.path_count;
  fit.steps_.resize(steps);
  fit.fallback_.assign(steps, false);

  std::vector<double> state(n);
  std::vector<double> inc(n);
  for (std::size_t k = 0; k < steps; ++k) {
    IncrementFit::Step& s = fit.steps_[k];
    s.kind = est.kind();
    s.t0 = batch.grid[k];
    s.t1 = batch.grid[k + 1];
    if (est.kind() == CondExpEstimator::Kind::analytic) {
      if (!model.increment_mean(0.0, s.t0, s.t1)) {
        throw ModelError("model " + model.id() + " has no closed-form increment mean");
      }
      continue;
    }
    if (n == 0) throw DomainError("cannot fit conditional means on an empty batch");
    for (std::size_t i = 0; i < n; ++i) {
      state[i] = batch.at(i, k);
      inc[i] = batch.at(i, k + 1) - batch.at(i, k);
    }
    s.global_mean = pairwise_sum(inc) / static_cast<double>(n);
    const auto [mn, mx] = std::minmax_element(state.begin(), state.end());

    if (est.kind() == CondExpEstimator::Kind::binning) {
      const std::size_t bins = est.parameter();
      s.lo = *mn;
      s.width = (*mx - *mn) / static_cast<double>(bins);
      if (!(s.width > 0.0)) {
        s.bin_mean = {s.global_mean};
        s.bin_filled = {true};
        continue;
      }
      std::vector<double> sum(bins, 0.0);
      std::vector<std::size_t> cnt(bins, 0);
      const auto last = static_cast<double>(bins - 1);
      for (std::size_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(
            std::clamp(std::floor((state[i] - s.lo) / s.width), 0.0, last));
        sum[idx] += inc[i];
        ++cnt[idx];
      }
      s.bin_mean.resize(bins);
      s.bin_filled.resize(bins);
      for (std::size_t b = 0; b < bins; ++b) {
        s.bin_filled[b] = cnt[b] > 0;
        s.bin_mean[b] = cnt[b] > 0 ? sum[b] / static_cast<double>(cnt[b]) : s.global_mean;
      }
      continue;
    }

    // Polynomial regression via normal equations in the standardized state.
    double mean_s = pairwise_sum(state) / static_cast<double>(n);
    double var = 0.0;
    for (double v : state) var += (v - mean_s) * (v - mean_s);
    var /= static_cast<double>(n);
    if (!(var > 0.0)) {
      fit.fallback_[k] = true;
      continue;
    }
    s.center = mean_s;
    s.scale = std::sqrt(var);
    const std::size_t p = est.parameter() + 1;
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    Eigen::VectorXd row(static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < n; ++i) {
      const double z = (state[i] - s.center) / s.scale;
      double pw = 1.0;
      for (std::size_t d = 0; d < p; ++d) {
        row[static_cast<Eigen::Index>(d)] = pw;
        pw *= z;
      }
      xtx.selfadjointView<Eigen::Lower>().rankUpdate(row);
      xty += inc[i] * row;
    }
    xtx.triangularView<Eigen::StrictlyUpper>() = xtx.transpose();
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(xtx);
    const Eigen::VectorXd beta = cod.solve(xty);
    s.coef.assign(beta.data(), beta.data() + beta.size());
  }
  return fit;
}

bool CompensatorEstimate::any_fallback() const {
  return std::any_of(fallback.begin(), fallback.end(), [](bool b) { return b; });
}

CompensatorEstimate apply_increments(const IncrementFit& fit, const PathBatch& batch) {
  if (fit.steps() + 1 != batch.time_count()) {
    throw DimensionError("increment fit and batch have different grids");
  }
  CompensatorEstimate est;
  est.path_count = batch.path_count;
  est.time_count = batch.time_count();
  est.fallback = fit.fallback();
  const std::size_t n = est.path_count;
  const std::size_t t = est.time_count;
  est.per_path.assign(n * t, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double a = 0.0;
    for (std::size_t k = 0; k + 1 < t; ++k) {
      a += fit.mean(k, batch.at(i, k));
      est.per_path[i * t + k + 1] = a;
    }
  }

  est.mean.assign(t, 0.0);
  est.se.assign(t, 0.0);
  if (n == 0) return est;
  const std::size_t groups = std::min(kSeGroups, n);
  std::vector<double> column(n);
  std::vector<double> group_means(groups);
  for (std::size_t k = 0; k < t; ++k) {
    for (std::size_t i = 0; i < n; ++i) column[i] = est.per_path[i * t + k];
    est.mean[k] = pairwise_sum(column) / static_cast<double>(n);
    if (groups < 2) continue;
    for (std::size_t g = 0; g < groups; ++g) {
      const std::size_t begin = n * g / groups;
      const std::size_t end = n * (g + 1) / groups;
      group_means[g] = pairwise_sum(std::span<const double>(column).subspan(begin, end - begin)) /
                       static_cast<double>(end - begin);
    }
    const double gm = pairwise_sum(group_means) / static_cast<double>(groups);
    double ss = 0.0;
    for (double v : group_means) ss += (v - gm) * (v - gm);
    est.se[k] = std::sqrt(ss / static_cast<double>(groups - 1) / static_cast<double>(groups));
  }
  return est;
}

CompensatorEstimate estimate_compensator(const McModel& model, const PathBatch& batch,
                                         const CondExpEstimator& est) {
  CompensatorEstimate out = apply_increments(fit_increments(model, batch, est), batch);
  const std::size_t n = batch.path_count;
  const std::size_t t = batch.time_count();
  const std::size_t groups = std::min(kSeGroups, n);
  if (groups < 2) return out;

  // Refit inside every group so the spread of the group means includes the
  // estimation error of the conditional means, not only path noise.
  std::vector<std::vector<double>> group_means(t, std::vector<double>(groups));
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t begin = n * g / groups;
    const std::size_t end = n * (g + 1) / groups;
    PathBatch part{batch.model_id, batch.grid, batch.seed, batch.first_path + begin, end - begin, {}};
    part.paths.assign(batch.paths.begin() + static_cast<std::ptrdiff_t>(begin * t),
                      batch.paths.begin() + static_cast<std::ptrdiff_t>(end * t));
    const CompensatorEstimate ge = apply_increments(fit_increments(model, part, est), part);
    for (std::size_t k = 0; k < t; ++k) group_means[k][g] = ge.mean[k];
  }
  for (std::size_t k = 0; k < t; ++k) {
    const double gm = pairwise_sum(group_means[k]) / static_cast<double>(groups);
    double ss = 0.0;
    for (double v : group_means[k]) ss += (v - gm) * (v - gm);
    out.se[k] = std::sqrt(ss / static_cast<double>(groups - 1) / static_cast<double>(groups));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Residual martingale test

ResidualReport residual_martingale_test(const PathBatch& batch, const CompensatorEstimate& a,
                                        std::size_t lags, std::size_t fit_paths) {
  if (a.path_count != batch.path_count || a.time_count != batch.time_count()) {
    throw DimensionError("compensator estimate does not match the batch");
  }
  if (lags < 1) throw DomainError("residual test needs at least one lag");
  ResidualReport rep;
  const std::size_t n = batch.path_count;
  const std::size_t t = batch.time_count();
  if (n < 3) return rep;
  std::vector<double> r(n);
  // Per-path martingale transforms: sum of residuals, and sum of residuals
  // times the standardized current state.
  std::vector<double> path_sum(n, 0.0);
  std::vector<double> path_transform(n, 0.0);
  for (std::size_t k = 0; k + 1 < t; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = (batch.at(i, k + 1) - batch.at(i, k)) - (a.at(i, k + 1) - a.at(i, k));
    }
    const double rbar = pairwise_sum(r) / static_cast<double>(n);

    // Centered regressors with nonzero spread among states k, k-1, ...
    std::vector<std::vector<double>> cols;
    for (std::size_t l = 0; l < lags && l <= k; ++l) {
      std::vector<double> c(n);
      for (std::size_t i = 0; i < n; ++i) c[i] = batch.at(i, k - l);
      const double cm = pairwise_sum(c) / static_cast<double>(n);
      double var = 0.0;
      for (double& v : c) {
        v -= cm;
        var += v * v;
      }
      if (var > 0.0) {
        if (l == 0) {
          const double sd = std::sqrt(var / static_cast<double>(n));
          for (std::size_t i = 0; i < n; ++i) path_transform[i] += r[i] * c[i] / sd;
        }
        cols.push_back(std::move(c));
      }
    }
    for (std::size_t i = 0; i < n; ++i) path_sum[i] += r[i];
    const std::size_t p = cols.size();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    Eigen::MatrixXd ztz_inv;
    if (p > 0) {
      Eigen::MatrixXd ztz(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
      Eigen::VectorXd zty(static_cast<Eigen::Index>(p));
      for (std::size_t a1 = 0; a1 < p; ++a1) {
        double sy = 0.0;
        for (std::size_t i = 0; i < n; ++i) sy += cols[a1][i] * (r[i] - rbar);
        zty[static_cast<Eigen::Index>(a1)] = sy;
        for (std::size_t a2 = 0; a2 <= a1; ++a2) {
          double s = 0.0;
          for (std::size_t i = 0; i < n; ++i) s += cols[a1][i] * cols[a2][i];
          ztz(static_cast<Eigen::Index>(a1), static_cast<Eigen::Index>(a2)) = s;
          ztz(static_cast<Eigen::Index>(a2), static_cast<Eigen::Index>(a1)) = s;
        }
      }
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(ztz);
      beta = cod.solve(zty);
      ztz_inv = cod.pseudoInverse();
    }
    // White (HC0) standard errors: increments of a martingale are rarely
    // homoskedastic in the state.
    std::vector<double> e(n);
    double see = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double fitted = rbar;
      for (std::size_t c = 0; c < p; ++c) fitted += beta[static_cast<Eigen::Index>(c)] * cols[c][i];
      e[i] = r[i] - fitted;
      see += e[i] * e[i];
    }
    Eigen::MatrixXd cov;
    if (p > 0) {
      Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
      for (std::size_t a1 = 0; a1 < p; ++a1) {
        for (std::size_t a2 = 0; a2 <= a1; ++a2) {
          double s = 0.0;
          for (std::size_t i = 0; i < n; ++i) s += e[i] * e[i] * cols[a1][i] * cols[a2][i];
          meat(static_cast<Eigen::Index>(a1), static_cast<Eigen::Index>(a2)) = s;
          meat(static_cast<Eigen::Index>(a2), static_cast<Eigen::Index>(a1)) = s;
        }
      }
      cov = ztz_inv * meat * ztz_inv;
    }
    auto tstat = [](double est, double se) {
      if (est == 0.0) return 0.0;
      if (!(se > 0.0)) return est > 0 ? std::numeric_limits<double>::infinity()
                                       : -std::numeric_limits<double>::infinity();
      return est / se;
    };
    const double t0 = tstat(rbar, std::sqrt(see) / static_cast<double>(n));
    double ts = 0.0;
    double t1 = 0.0;
    for (std::size_t c = 0; c < p; ++c) {
      const auto ci = static_cast<Eigen::Index>(c);
      const double tc = tstat(beta[ci], std::sqrt(cov(ci, ci)));
      if (c == 0) t1 = tc;
      ts = std::max(ts, std::abs(tc));
    }
    rep.t_intercept.push_back(t0);
    rep.t_slope.push_back(t1);
    rep.t_slope_max.push_back(ts);
    rep.max_step_abs_t = std::max({rep.max_step_abs_t, std::abs(t0), ts});
  }
  if (rep.t_intercept.empty()) return rep;
  // First-order allowance for the error of a compensator fitted on
  // fit_paths independent paths: it adds n / fit_paths times the held-out
  // variance to both transforms.
  const double inflation =
      fit_paths > 0 ? std::sqrt(1.0 + static_cast<double>(n) / static_cast<double>(fit_paths)) : 1.0;
  auto path_z = [&](const std::vector<double>& v) {
    const double mean = pairwise_sum(v) / static_cast<double>(n);
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) * inflation;
    if (mean == 0.0) return 0.0;
    if (!(se > 0.0)) return mean > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    return mean / se;
  };
  rep.z_intercept = path_z(path_sum);
  rep.z_slope = path_z(path_transform);
  rep.max_abs_t = std::max(std::abs(rep.z_intercept), std::abs(rep.z_slope));
  return rep;
}

}  // namespace doobkit
