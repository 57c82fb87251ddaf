#pragma once

// Binary-tree (coin-flip path space) filtrations and the walk processes used
// throughout the examples and tests.
//
// Atom w of an n-step tree encodes a path: bit (n - j) of w is 1 when step j
// (1-based) goes up. Atoms sharing the first k steps form one block of the
// time-k partition, so the blocks are contiguous ranges of atoms.

#include <cstddef>
#include <span>

#include "doobkit/process.hpp"

namespace doobkit {

inline constexpr std::size_t kMaxTreeSteps = 16;

FiltrationPtr binary_tree_filtration(const TimeGrid& grid, double up_prob = 0.5);
/// Uniform grid with `steps` steps.
FiltrationPtr binary_tree_filtration(std::size_t steps, double up_prob = 0.5);

/// True when step j (1-based) of atom w goes up on an n-step tree.
bool tree_step_up(std::size_t atom, std::size_t step, std::size_t steps);

/// S_k = sum of +-step_sizes[j] over the first k steps; step_sizes has one
/// entry per step.
AdaptedProcess tree_walk(FiltrationPtr tree, std::span<const double> step_sizes);
/// Unit steps.
AdaptedProcess tree_walk(FiltrationPtr tree);
/// Steps of size sqrt(t_{k+1} - t_k), so each squared increment has
/// variance equal to the time step.
AdaptedProcess tree_scaled_walk(FiltrationPtr tree);

/// Pointwise transforms that keep adaptedness.
AdaptedProcess squared(const AdaptedProcess& x);
AdaptedProcess absolute(const AdaptedProcess& x);

}  // namespace doobkit
