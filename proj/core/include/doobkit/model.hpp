#pragma once

// Declarative model descriptions. A ModelSpec names a stochastic model and
// its parameters; the exact layer (binary trees, explicit listings), the
// lattice layer and the Monte Carlo layer each instantiate the kinds they
// understand.

#include <cstddef>
#include <string>
#include <vector>

#include "doobkit/process.hpp"

namespace doobkit {

enum class ModelKind {
  binary_tree,
  recombining_lattice,
  poisson_lattice,
  mc_poisson,
  mc_gaussian_walk_squared,
  mc_gaussian_walk,
  explicit_listing,
};

/// Functional of the coin-flip walk W that a tree or lattice model exposes.
enum class WalkFunctional { walk, walk_squared, abs_walk, drift };

/// unit: steps of +-1. variance: steps of +-sqrt(dt), so W approximates a
/// Brownian motion on [0, 1].
enum class StepScaling { unit, variance };

struct KnownCompensator {
  enum class Type { none, identity_time, linear };
  Type type = Type::none;
  double rate = 1.0;

  bool known() const { return type != Type::none; }
  double at(double t) const;

  friend bool operator==(const KnownCompensator&, const KnownCompensator&) = default;
};

struct ModelSpec {
  ModelKind kind = ModelKind::binary_tree;

  // binary-tree
  std::size_t steps = 0;
  double up_prob = 0.5;
  StepScaling scaling = StepScaling::unit;
  // binary-tree and recombining-lattice
  WalkFunctional functional = WalkFunctional::walk_squared;
  // poisson-lattice, mc-poisson, and the slope of a drift
  double rate = 1.0;

  // explicit: one probability per atom, one label vector and one value
  // vector per time.
  std::vector<double> probs;
  std::vector<double> times;
  std::vector<std::vector<std::size_t>> partitions;
  std::vector<std::vector<double>> values;

  KnownCompensator known;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

const char* to_string(ModelKind kind);
const char* to_string(WalkFunctional f);
const char* to_string(StepScaling s);
ModelKind parse_model_kind(const std::string& s);
WalkFunctional parse_walk_functional(const std::string& s);
StepScaling parse_step_scaling(const std::string& s);
/// "none", "identity-time" or "linear(<rate>)".
std::string to_string(const KnownCompensator& k);
KnownCompensator parse_known_compensator(const std::string& s);

/// The compensator a kind has when the file does not declare one.
KnownCompensator default_known_compensator(const ModelSpec& spec);

/// Checks parameter ranges, and for explicit models every finite-space,
/// filtration and adaptedness invariant. Throws ValidationError.
void validate(const ModelSpec& spec);

bool is_finite_model(const ModelSpec& spec);
bool is_lattice_model(const ModelSpec& spec);
bool is_mc_model(const ModelSpec& spec);

/// The process of a binary-tree model (on its own uniform grid) or of an
/// explicit model. Throws ModelError for other kinds.
AdaptedProcess instantiate_finite(const ModelSpec& spec);

/// A binary-tree model re-gridded onto `grid` (one coin flip per step).
AdaptedProcess instantiate_finite(const ModelSpec& spec, const TimeGrid& grid);

}  // namespace doobkit
