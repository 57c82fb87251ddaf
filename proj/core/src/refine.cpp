#include "doobkit/refine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "doobkit/classd.hpp"
#include "doobkit/doob.hpp"
#include "doobkit/errors.hpp"
#include "doobkit/lattice.hpp"

namespace doobkit {

TimeGrid dyadic_grid(std::size_t depth) {
  if (depth > kMaxDepth) {
    throw DomainError("dyadic depth " + std::to_string(depth) + " exceeds the maximum of " +
                      std::to_string(kMaxDepth));
  }
  const std::size_t n = std::size_t{1} << depth;
  std::vector<double> t(n + 1);
  for (std::size_t j = 0; j <= n; ++j) t[j] = std::ldexp(static_cast<double>(j), -static_cast<int>(depth));
  return TimeGrid(std::move(t));
}

std::vector<TimeGrid> dyadic_grids(std::size_t depth_min, std::size_t depth_max) {
  if (depth_min > depth_max || depth_max > kMaxDepth) {
    throw DomainError("depth range must satisfy 0 <= min <= max <= " + std::to_string(kMaxDepth) +
                      ", got " + std::to_string(depth_min) + ".." + std::to_string(depth_max));
  }
  std::vector<TimeGrid> out;
  for (std::size_t d = depth_min; d <= depth_max; ++d) out.push_back(dyadic_grid(d));
  return out;
}

namespace {

std::optional<std::size_t> dyadic_depth(const TimeGrid& grid) {
  const std::size_t steps = grid.steps();
  if (!std::has_single_bit(steps)) return std::nullopt;
  const auto depth = static_cast<std::size_t>(std::countr_zero(steps));
  if (depth > kMaxDepth || !(grid == dyadic_grid(depth))) return std::nullopt;
  return depth;
}

DiscreteLaw law_of(const FiniteSpace& space, const RandomVariable& v) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(v.size());
  for (std::size_t w = 0; w < v.size(); ++w) pts.emplace_back(v[w], space.prob(w));
  std::sort(pts.begin(), pts.end());
  DiscreteLaw law;
  for (const auto& [x, p] : pts) {
    if (!law.values.empty() && law.values.back() == x) {
      law.probs.back() += p;
    } else {
      law.values.push_back(x);
      law.probs.push_back(p);
    }
  }
  return law;
}

void fill_from_law(GridRow& row, const DiscreteLaw& terminal) {
  row.a_terminal_mean = terminal.mean();
  row.a_terminal_sd = terminal.sd();
  row.a_terminal_min = terminal.min();
  row.a_terminal_max = terminal.max();
}

// Laws of A at every grid time, plus the invariant verdict.
struct ExactGridResult {
  std::vector<DiscreteLaw> laws;
  bool invariants = true;
};

ExactGridResult finite_grid(const ModelSpec& spec, const TimeGrid& grid) {
  const AdaptedProcess x = instantiate_finite(spec, grid);
  const Decomposition d = doob_decompose(x);
  ExactGridResult r;
  for (const auto& row : d.a.rows()) r.laws.push_back(law_of(x.space(), row));

  bool ok = true;
  for (const auto& c : check_decomposition(x, d)) ok = ok && c.passed;
  ok = ok && is_natural(d.a);
  const double top = std::max(1.0, d.a.terminal().max());
  const TailReport tail = epsilon_profile(x, {top / 8.0, top / 4.0, top / 2.0, top, 2.0 * top});
  ok = ok && tail.markov_holds() && tail.chain_holds() && tail.epsilon_nonincreasing();
  r.invariants = ok;
  return r;
}

ExactGridResult lattice_grid(const ModelSpec& spec, const TimeGrid& grid) {
  LatticeCompensator lc = lattice_compensator(spec, grid);
  ExactGridResult r;
  bool ok = lc.min_increment_mean >= -kExactTol;
  const auto& first = lc.a_law.front();
  ok = ok && first.values.size() == 1 && first.values[0] == 0.0;
  for (std::size_t k = 0; k + 1 < lc.a_law.size(); ++k) {
    ok = ok && lc.a_law[k + 1].min() >= lc.a_law[k].min() - kExactTol;
  }
  r.laws = std::move(lc.a_law);
  r.invariants = ok;
  return r;
}

}  // namespace

RefinementStudy compensator_convergence(const ModelSpec& model, const std::vector<TimeGrid>& grids,
                                        const McStudyOptions& mc) {
  if (grids.empty()) throw DomainError("refinement study needs at least one grid");
  for (std::size_t i = 1; i < grids.size(); ++i) {
    if (!(grids[i].size() > grids[i - 1].size()) || !grids[i].contains(grids[i - 1])) {
      throw DomainError("grids must be strictly nested");
    }
  }
  RefinementStudy study;
  study.grids = grids;
  study.target = model.known;
  study.model_id = to_string(model.kind);
  study.monte_carlo = is_mc_model(model);

  if (study.monte_carlo) {
    const auto m = make_mc_model(model);
    study.model_id = m->id();
    std::vector<double> prev_mean;
    std::vector<double> prev_se;
    for (std::size_t g = 0; g < grids.size(); ++g) {
      const TimeGrid& grid = grids[g];
      const PathBatch batch = simulate(*m, grid, mc.path_count, mc.seed, mc.workers);
      const CompensatorEstimate est = estimate_compensator(*m, batch, mc.estimator);

      GridRow row;
      row.grid_size = grid.size();
      row.depth = dyadic_depth(grid);
      const std::size_t last = grid.size() - 1;
      row.a_terminal_mean = est.mean[last];
      row.a_terminal_se = est.se[last];
      row.estimator_fallback = est.any_fallback();
      if (batch.path_count > 0) {
        double lo = est.at(0, last);
        double hi = lo;
        double ss = 0.0;
        for (std::size_t i = 0; i < batch.path_count; ++i) {
          const double v = est.at(i, last);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
          ss += (v - row.a_terminal_mean) * (v - row.a_terminal_mean);
        }
        row.a_terminal_min = lo;
        row.a_terminal_max = hi;
        row.a_terminal_sd = std::sqrt(ss / static_cast<double>(batch.path_count));
      }
      // Monotone mean, up to noise.
      for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double slack = 3.0 * std::hypot(est.se[k], est.se[k + 1]) + 1e-12;
        if (est.mean[k + 1] < est.mean[k] - slack) row.invariants_passed = false;
      }
      if (study.target.known()) {
        const double dev = std::abs(est.mean[last] - study.target.at(grid[last]));
        row.target_deviation = dev;
        row.target_pass = dev <= 3.0 * est.se[last] + 1e-12;
      }
      if (batch.path_count >= 6) {
        const auto [train, test] = split_batch(batch);
        const IncrementFit fit = fit_increments(*m, train, mc.estimator);
        const CompensatorEstimate held_out = apply_increments(fit, test);
        row.residual_max_abs_t = residual_martingale_test(
            test, held_out, mc.residual_lags,
            mc.estimator.kind() == CondExpEstimator::Kind::analytic ? 0 : train.path_count)
                                     .max_abs_t;
      }
      if (g > 0) {
        double worst = -1.0;
        double worst_se = 0.0;
        for (std::size_t k = 0; k < grids[g - 1].size(); ++k) {
          const std::size_t fine = *grid.index_of(grids[g - 1][k]);
          const double delta = std::abs(est.mean[fine] - prev_mean[k]);
          if (delta > worst) {
            worst = delta;
            worst_se = std::hypot(est.se[fine], prev_se[k]);
          }
        }
        row.delta_to_previous = worst;
        row.delta_se = worst_se;
        study.l1_deltas.push_back(worst);
      }
      prev_mean = est.mean;
      prev_se = est.se;
      study.rows.push_back(row);
    }
    return study;
  }

  const bool finite = is_finite_model(model);
  if (!finite && !is_lattice_model(model)) {
    throw ModelError(std::string("model kind ") + to_string(model.kind) +
                     " cannot be used in a refinement study");
  }
  std::vector<DiscreteLaw> prev;
  for (std::size_t g = 0; g < grids.size(); ++g) {
    const TimeGrid& grid = grids[g];
    ExactGridResult res = finite ? finite_grid(model, grid) : lattice_grid(model, grid);
    GridRow row;
    row.grid_size = grid.size();
    row.depth = dyadic_depth(grid);
    row.invariants_passed = res.invariants;
    fill_from_law(row, res.laws.back());
    if (study.target.known()) {
      double worst = 0.0;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        worst = std::max(worst, res.laws[k].mean_abs_deviation(study.target.at(grid[k])));
      }
      row.target_deviation = worst;
      row.target_pass = worst <= kExactTol;
    }
    if (g > 0) {
      double worst = 0.0;
      for (std::size_t k = 0; k < grids[g - 1].size(); ++k) {
        const std::size_t fine = *grid.index_of(grids[g - 1][k]);
        worst = std::max(worst, wasserstein1(res.laws[fine], prev[k]));
      }
      row.delta_to_previous = worst;
      study.l1_deltas.push_back(worst);
    }
    prev = std::move(res.laws);
    study.rows.push_back(row);
  }
  return study;
}

ConvergenceReport report_convergence(const RefinementStudy& study) {
  if (study.rows.empty()) throw DomainError("cannot report on an empty refinement study");
  ConvergenceReport rep;
  rep.table = study.rows;
  rep.deltas = study.l1_deltas;
  for (const auto& r : study.rows) {
    if (r.target_pass && !*r.target_pass) rep.target_pass = false;
    if (!r.invariants_passed) rep.invariants_pass = false;
  }
  if (study.rows.size() == 1) {
    rep.verdict = "single grid";
    return rep;
  }
  const bool exact = std::all_of(rep.deltas.begin(), rep.deltas.end(),
                                 [](double d) { return d <= kExactTol; });
  if (exact) {
    rep.verdict = "converged (exact)";
    return rep;
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < rep.deltas.size(); ++i) {
    const double slack = study.monte_carlo ? 3.0 * study.rows[i + 1].delta_se : kExactTol;
    if (rep.deltas[i] > rep.deltas[i - 1] + slack) decreasing = false;
  }
  rep.verdict = decreasing ? "decreasing" : "not decreasing";
  return rep;
}

}  // namespace doobkit
