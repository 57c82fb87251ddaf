#include "doobkit/trees.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "doobkit/errors.hpp"

namespace doobkit {

FiltrationPtr binary_tree_filtration(const TimeGrid& grid, double up_prob) {
  const std::size_t steps = grid.steps();
  if (steps > kMaxTreeSteps) {
    throw ResourceError("binary tree with " + std::to_string(steps) + " steps exceeds the " +
                        std::to_string(kMaxTreeSteps) + "-step path-space limit");
  }
  if (!(up_prob > 0.0 && up_prob < 1.0)) {
    throw DomainError("up probability must lie strictly between 0 and 1");
  }
  const std::size_t atoms = std::size_t{1} << steps;
  std::vector<double> probs(atoms);
  for (std::size_t w = 0; w < atoms; ++w) {
    double p = 1.0;
    for (std::size_t j = 1; j <= steps; ++j) p *= tree_step_up(w, j, steps) ? up_prob : 1.0 - up_prob;
    probs[w] = p;
  }
  std::vector<Partition> parts;
  parts.reserve(steps + 1);
  std::vector<std::size_t> labels(atoms);
  for (std::size_t k = 0; k <= steps; ++k) {
    for (std::size_t w = 0; w < atoms; ++w) labels[w] = w >> (steps - k);
    parts.push_back(Partition::from_labels(labels));
  }
  return make_filtration(FiniteSpace(std::move(probs)), grid, std::move(parts));
}

FiltrationPtr binary_tree_filtration(std::size_t steps, double up_prob) {
  return binary_tree_filtration(TimeGrid::uniform(steps), up_prob);
}

bool tree_step_up(std::size_t atom, std::size_t step, std::size_t steps) {
  return ((atom >> (steps - step)) & 1U) != 0;
}

AdaptedProcess tree_walk(FiltrationPtr tree, std::span<const double> step_sizes) {
  const std::size_t steps = tree->grid().steps();
  if (step_sizes.size() != steps) throw DimensionError("tree_walk needs one step size per step");
  const std::size_t atoms = tree->atom_count();
  std::vector<RandomVariable> rows;
  rows.reserve(steps + 1);
  std::vector<double> s(atoms, 0.0);
  rows.emplace_back(s);
  for (std::size_t j = 1; j <= steps; ++j) {
    for (std::size_t w = 0; w < atoms; ++w) {
      s[w] += tree_step_up(w, j, steps) ? step_sizes[j - 1] : -step_sizes[j - 1];
    }
    rows.emplace_back(s);
  }
  return AdaptedProcess(std::move(tree), std::move(rows));
}

AdaptedProcess tree_walk(FiltrationPtr tree) {
  std::vector<double> unit(tree->grid().steps(), 1.0);
  return tree_walk(std::move(tree), unit);
}

AdaptedProcess tree_scaled_walk(FiltrationPtr tree) {
  const auto& g = tree->grid();
  std::vector<double> sizes(g.steps());
  for (std::size_t k = 0; k < sizes.size(); ++k) sizes[k] = std::sqrt(g[k + 1] - g[k]);
  return tree_walk(std::move(tree), sizes);
}

namespace {

template <class F>
AdaptedProcess map_process(const AdaptedProcess& x, F f) {
  std::vector<RandomVariable> rows;
  rows.reserve(x.time_count());
  for (const auto& r : x.rows()) {
    std::vector<double> v(r.values().begin(), r.values().end());
    for (double& e : v) e = f(e);
    rows.emplace_back(std::move(v));
  }
  return AdaptedProcess(x.shared_filtration(), std::move(rows));
}

}  // namespace

AdaptedProcess squared(const AdaptedProcess& x) {
  return map_process(x, [](double v) { return v * v; });
}

AdaptedProcess absolute(const AdaptedProcess& x) {
  return map_process(x, [](double v) { return std::abs(v); });
}

}  // namespace doobkit
