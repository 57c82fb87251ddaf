#include "doobkit/model.hpp"

#include <charconv>
#include <cmath>

#include "doobkit/errors.hpp"
#include "doobkit/trees.hpp"

namespace doobkit {

double KnownCompensator::at(double t) const {
  switch (type) {
    case Type::none: break;
    case Type::identity_time: return t;
    case Type::linear: return rate * t;
  }
  throw ModelError("model declares no known compensator");
}

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::binary_tree: return "binary-tree";
    case ModelKind::recombining_lattice: return "recombining-lattice";
    case ModelKind::poisson_lattice: return "poisson-lattice";
    case ModelKind::mc_poisson: return "mc-poisson";
    case ModelKind::mc_gaussian_walk_squared: return "mc-gaussian-walk-squared";
    case ModelKind::mc_gaussian_walk: return "mc-gaussian-walk";
    case ModelKind::explicit_listing: return "explicit";
  }
  return "?";
}

const char* to_string(WalkFunctional f) {
  switch (f) {
    case WalkFunctional::walk: return "walk";
    case WalkFunctional::walk_squared: return "walk-squared";
    case WalkFunctional::abs_walk: return "abs-walk";
    case WalkFunctional::drift: return "drift";
  }
  return "?";
}

const char* to_string(StepScaling s) {
  return s == StepScaling::unit ? "unit" : "variance";
}

ModelKind parse_model_kind(const std::string& s) {
  for (ModelKind k : {ModelKind::binary_tree, ModelKind::recombining_lattice,
                      ModelKind::poisson_lattice, ModelKind::mc_poisson,
                      ModelKind::mc_gaussian_walk_squared, ModelKind::mc_gaussian_walk,
                      ModelKind::explicit_listing}) {
    if (s == to_string(k)) return k;
  }
  throw ValidationError("unknown model kind '" + s + "'");
}

WalkFunctional parse_walk_functional(const std::string& s) {
  for (WalkFunctional f : {WalkFunctional::walk, WalkFunctional::walk_squared,
                           WalkFunctional::abs_walk, WalkFunctional::drift}) {
    if (s == to_string(f)) return f;
  }
  throw ValidationError("unknown process '" + s + "'");
}

StepScaling parse_step_scaling(const std::string& s) {
  if (s == "unit") return StepScaling::unit;
  if (s == "variance") return StepScaling::variance;
  throw ValidationError("unknown step scaling '" + s + "'");
}

std::string to_string(const KnownCompensator& k) {
  switch (k.type) {
    case KnownCompensator::Type::none: return "none";
    case KnownCompensator::Type::identity_time: return "identity-time";
    case KnownCompensator::Type::linear: {
      char buf[64];
      auto res = std::to_chars(buf, buf + sizeof buf, k.rate);
      return "linear(" + std::string(buf, res.ptr) + ")";
    }
  }
  return "none";
}

KnownCompensator parse_known_compensator(const std::string& s) {
  if (s == "none") return {};
  if (s == "identity-time") return {KnownCompensator::Type::identity_time, 1.0};
  const std::string prefix = "linear(";
  if (s.size() > prefix.size() + 1 && s.compare(0, prefix.size(), prefix) == 0 && s.back() == ')') {
    const char* first = s.data() + prefix.size();
    const char* last = s.data() + s.size() - 1;
    double rate = 0.0;
    auto res = std::from_chars(first, last, rate);
    if (res.ec == std::errc() && res.ptr == last) {
      if (!(rate > 0.0)) throw ValidationError("known_compensator: linear rate must be > 0");
      return {KnownCompensator::Type::linear, rate};
    }
  }
  throw ValidationError("known_compensator: expected none, identity-time or linear(<rate>), got '" +
                        s + "'");
}

KnownCompensator default_known_compensator(const ModelSpec& spec) {
  using T = KnownCompensator::Type;
  switch (spec.kind) {
    case ModelKind::binary_tree:
      if (spec.functional == WalkFunctional::drift) return {T::linear, spec.rate};
      if (spec.functional == WalkFunctional::walk_squared && spec.scaling == StepScaling::variance &&
          spec.up_prob == 0.5) {
        return {T::identity_time, 1.0};
      }
      return {};
    case ModelKind::recombining_lattice:
      if (spec.functional == WalkFunctional::drift) return {T::linear, spec.rate};
      if (spec.functional == WalkFunctional::walk_squared) return {T::identity_time, 1.0};
      return {};
    case ModelKind::poisson_lattice:
    case ModelKind::mc_poisson: return {T::linear, spec.rate};
    case ModelKind::mc_gaussian_walk_squared: return {T::identity_time, 1.0};
    case ModelKind::mc_gaussian_walk:
    case ModelKind::explicit_listing: return {};
  }
  return {};
}

bool is_finite_model(const ModelSpec& spec) {
  return spec.kind == ModelKind::binary_tree || spec.kind == ModelKind::explicit_listing;
}

bool is_lattice_model(const ModelSpec& spec) {
  return spec.kind == ModelKind::recombining_lattice || spec.kind == ModelKind::poisson_lattice;
}

bool is_mc_model(const ModelSpec& spec) {
  return spec.kind == ModelKind::mc_poisson || spec.kind == ModelKind::mc_gaussian_walk_squared ||
         spec.kind == ModelKind::mc_gaussian_walk;
}

namespace {

AdaptedProcess explicit_process(const ModelSpec& spec) {
  FiniteSpace space(spec.probs);
  TimeGrid grid(spec.times);
  if (spec.partitions.size() != grid.size()) {
    throw ValidationError("explicit model: need one partition per time (" +
                          std::to_string(grid.size()) + "), got " +
                          std::to_string(spec.partitions.size()));
  }
  std::vector<Partition> parts;
  for (std::size_t k = 0; k < spec.partitions.size(); ++k) {
    if (spec.partitions[k].size() != space.atom_count()) {
      throw ValidationError("explicit model: partition " + std::to_string(k) +
                            " must label every atom");
    }
    parts.push_back(Partition::from_labels(spec.partitions[k]));
  }
  auto filtration = make_filtration(std::move(space), std::move(grid), std::move(parts));
  if (spec.values.size() != filtration->time_count()) {
    throw ValidationError("explicit model: need one value row per time");
  }
  std::vector<RandomVariable> rows;
  for (std::size_t k = 0; k < spec.values.size(); ++k) {
    if (spec.values[k].size() != filtration->atom_count()) {
      throw ValidationError("explicit model: value row " + std::to_string(k) +
                            " must have one entry per atom");
    }
    rows.emplace_back(spec.values[k]);
  }
  return AdaptedProcess(std::move(filtration), std::move(rows));
}

AdaptedProcess tree_process(const ModelSpec& spec, const TimeGrid& grid) {
  auto tree = binary_tree_filtration(grid, spec.up_prob);
  if (spec.functional == WalkFunctional::drift) {
    std::vector<double> path(grid.times().begin(), grid.times().end());
    for (double& v : path) v *= spec.rate;
    return AdaptedProcess::deterministic(std::move(tree), path);
  }
  AdaptedProcess w = spec.scaling == StepScaling::unit ? tree_walk(tree) : tree_scaled_walk(tree);
  switch (spec.functional) {
    case WalkFunctional::walk: return w;
    case WalkFunctional::walk_squared: return squared(w);
    case WalkFunctional::abs_walk: return absolute(w);
    case WalkFunctional::drift: break;
  }
  return w;
}

}  // namespace

void validate(const ModelSpec& spec) {
  auto positive_rate = [&](const char* what) {
    if (!(spec.rate > 0.0) || !std::isfinite(spec.rate)) {
      throw ValidationError(std::string(what) + ": rate must be > 0");
    }
  };
  switch (spec.kind) {
    case ModelKind::binary_tree:
      if (spec.steps < 1) throw ValidationError("binary-tree: steps must be >= 1");
      if (!(spec.up_prob > 0.0 && spec.up_prob < 1.0)) {
        throw ValidationError("binary-tree: up_prob must lie strictly between 0 and 1");
      }
      if (spec.functional == WalkFunctional::drift) positive_rate("binary-tree drift");
      break;
    case ModelKind::recombining_lattice:
      if (spec.functional == WalkFunctional::drift) positive_rate("recombining-lattice drift");
      break;
    case ModelKind::poisson_lattice: positive_rate("poisson-lattice"); break;
    case ModelKind::mc_poisson: positive_rate("mc-poisson"); break;
    case ModelKind::mc_gaussian_walk_squared:
    case ModelKind::mc_gaussian_walk: break;
    case ModelKind::explicit_listing: (void)explicit_process(spec); break;
  }
  if (spec.known.type == KnownCompensator::Type::linear && !(spec.known.rate > 0.0)) {
    throw ValidationError("known_compensator: linear rate must be > 0");
  }
}

AdaptedProcess instantiate_finite(const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::binary_tree:
      if (spec.steps > kMaxTreeSteps) {
        throw ResourceError("binary-tree with " + std::to_string(spec.steps) +
                            " steps exceeds the path-space limit of " +
                            std::to_string(kMaxTreeSteps));
      }
      return tree_process(spec, TimeGrid::uniform(spec.steps));
    case ModelKind::explicit_listing: return explicit_process(spec);
    default: break;
  }
  throw ModelError(std::string("model kind ") + to_string(spec.kind) +
                   " has no finite path-space representation");
}

AdaptedProcess instantiate_finite(const ModelSpec& spec, const TimeGrid& grid) {
  if (spec.kind != ModelKind::binary_tree) {
    throw ModelError(std::string("model kind ") + to_string(spec.kind) +
                     " cannot be instantiated on an arbitrary grid as a finite space");
  }
  return tree_process(spec, grid);
}

}  // namespace doobkit
