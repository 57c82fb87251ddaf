#pragma once

// Exact compensators on recombining lattices.
//
// A lattice model is a Markov chain indexed by integer states. The
// compensator increment at step j is g_j(state) = E(X_{j+1} - X_j | state_j),
// so A_t depends on the whole path. The engine propagates the joint law of
// (state, A) forward, merging paths that land on the same state with the
// same compensator value. For the built-in models with state-free increment
// means every node carries a single A value and depth-20 grids stay cheap.

#include <cstddef>
#include <vector>

#include "doobkit/model.hpp"
#include "doobkit/process.hpp"

namespace doobkit {

/// A discrete law: sorted distinct support points with their masses.
struct DiscreteLaw {
  std::vector<double> values;
  std::vector<double> probs;

  double mean() const;
  double sd() const;
  double min() const { return values.front(); }
  double max() const { return values.back(); }
  /// E|V - c|.
  double mean_abs_deviation(double c) const;
};

/// Wasserstein-1 distance between two laws on the line: the smallest
/// E|U - V| over all couplings of U ~ p and V ~ q.
double wasserstein1(const DiscreteLaw& p, const DiscreteLaw& q);

struct LatticeCompensator {
  TimeGrid grid;
  /// Law of A_t at every grid time.
  std::vector<DiscreteLaw> a_law;
  /// Law of X at the final grid time.
  DiscreteLaw x_terminal_law;
  /// Smallest one-step conditional increment mean seen anywhere; negative
  /// values mean the model is not a submartingale on this grid.
  double min_increment_mean = 0.0;
  /// Probability mass removed by underflow pruning (entries below 1e-300).
  double dropped_mass = 0.0;
  /// Largest per-step jump mass cut off before renormalizing (Poisson only).
  double max_truncated_tail = 0.0;
  std::size_t node_steps = 0;
};

/// Budget on the total number of (node, A-value) entries processed.
inline constexpr std::size_t kLatticeEntryBudget = 400'000'000;

/// Per-step jump cap for a Poisson lattice step with mean `mu`: the
/// smallest b with P(J > b) < 1e-17, below double rounding of the
/// per-step mean.
std::size_t poisson_jump_cap(double mu);

/// Exact lattice compensator for recombining-lattice and poisson-lattice
/// models on `grid`. Walk lattices need a uniform grid. Throws ModelError
/// for other kinds and ResourceError when the work exceeds the budget.
LatticeCompensator lattice_compensator(const ModelSpec& spec, const TimeGrid& grid);

}  // namespace doobkit
