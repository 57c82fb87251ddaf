#include "doobkit/measure.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "doobkit/errors.hpp"

namespace doobkit {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::validation: return "validation";
    case ErrorKind::domain: return "domain";
    case ErrorKind::monotonicity: return "monotonicity";
    case ErrorKind::not_submartingale: return "not-a-submartingale";
    case ErrorKind::not_martingale: return "not-a-martingale";
    case ErrorKind::consistency: return "consistency";
    case ErrorKind::malformed_decomposition: return "malformed-decomposition";
    case ErrorKind::model: return "model";
    case ErrorKind::resource: return "resource";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// FiniteSpace

FiniteSpace::FiniteSpace(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) {
    throw ValidationError("finite space needs at least one atom");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double p = probs_[i];
    if (!std::isfinite(p) || p <= 0.0) {
      throw ValidationError("atom " + std::to_string(i) +
                            " has non-positive probability (zero-probability atoms are not allowed)");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kNormalizationTol) {
    throw ValidationError("normalization: probabilities sum to " + std::to_string(total) +
                          ", expected 1 within 1e-12");
  }
}

FiniteSpace FiniteSpace::uniform(std::size_t atom_count) {
  if (atom_count == 0) throw ValidationError("finite space needs at least one atom");
  return FiniteSpace(std::vector<double>(atom_count, 1.0 / static_cast<double>(atom_count)));
}

// ---------------------------------------------------------------------------
// Partition

Partition Partition::from_labels(std::span<const std::size_t> labels) {
  if (labels.empty()) throw ValidationError("partition over an empty atom set");
  Partition p;
  p.block_of_.resize(labels.size());
  std::unordered_map<std::size_t, std::size_t> canonical;
  for (std::size_t atom = 0; atom < labels.size(); ++atom) {
    auto [it, inserted] = canonical.try_emplace(labels[atom], p.blocks_.size());
    if (inserted) p.blocks_.emplace_back();
    p.block_of_[atom] = it->second;
    p.blocks_[it->second].push_back(atom);
  }
  return p;
}

Partition Partition::from_labels(std::initializer_list<std::size_t> labels) {
  return from_labels(std::span<const std::size_t>(labels.begin(), labels.size()));
}

Partition Partition::trivial(std::size_t atom_count) {
  std::vector<std::size_t> labels(atom_count, 0);
  return from_labels(labels);
}

Partition Partition::discrete(std::size_t atom_count) {
  std::vector<std::size_t> labels(atom_count);
  for (std::size_t i = 0; i < atom_count; ++i) labels[i] = i;
  return from_labels(labels);
}

// ---------------------------------------------------------------------------
// RandomVariable

RandomVariable::RandomVariable(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw ValidationError("random variable entry " + std::to_string(i) + " is not finite");
    }
  }
}

RandomVariable::RandomVariable(std::initializer_list<double> values)
    : RandomVariable(std::vector<double>(values)) {}

RandomVariable RandomVariable::constant(std::size_t atom_count, double value) {
  return RandomVariable(std::vector<double>(atom_count, value));
}

RandomVariable RandomVariable::indicator(std::size_t atom_count, std::size_t atom) {
  if (atom >= atom_count) throw DimensionError("indicator atom out of range");
  std::vector<double> v(atom_count, 0.0);
  v[atom] = 1.0;
  return RandomVariable(std::move(v));
}

double RandomVariable::min() const {
  if (values_.empty()) throw DimensionError("min of an empty random variable");
  return *std::min_element(values_.begin(), values_.end());
}

double RandomVariable::max() const {
  if (values_.empty()) throw DimensionError("max of an empty random variable");
  return *std::max_element(values_.begin(), values_.end());
}

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": size " + std::to_string(a) + " vs " +
                         std::to_string(b));
  }
}

}  // namespace

RandomVariable& RandomVariable::operator+=(const RandomVariable& rhs) {
  require_same_size(size(), rhs.size(), "random variable sum");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += rhs.values_[i];
  return *this;
}

RandomVariable& RandomVariable::operator-=(const RandomVariable& rhs) {
  require_same_size(size(), rhs.size(), "random variable difference");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= rhs.values_[i];
  return *this;
}

RandomVariable& RandomVariable::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

RandomVariable operator*(const RandomVariable& a, const RandomVariable& b) {
  require_same_size(a.size(), b.size(), "random variable product");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values_[i] * b.values_[i];
  return RandomVariable(std::move(out));
}

// ---------------------------------------------------------------------------
// Operations

bool refines(const Partition& coarse, const Partition& fine) {
  require_same_size(coarse.atom_count(), fine.atom_count(), "refines");
  for (std::size_t b = 0; b < fine.block_count(); ++b) {
    auto atoms = fine.block(b);
    const std::size_t target = coarse.block_of(atoms.front());
    for (std::size_t atom : atoms) {
      if (coarse.block_of(atom) != target) return false;
    }
  }
  return true;
}

RandomVariable cond_exp(const FiniteSpace& space, const RandomVariable& x, const Partition& b) {
  require_same_size(space.atom_count(), x.size(), "cond_exp: space vs variable");
  require_same_size(space.atom_count(), b.atom_count(), "cond_exp: space vs partition");
  std::vector<double> out(x.size());
  const auto p = space.probs();
  for (std::size_t blk = 0; blk < b.block_count(); ++blk) {
    double mass = 0.0;
    double weighted = 0.0;
    for (std::size_t atom : b.block(blk)) {
      mass += p[atom];
      weighted += p[atom] * x[atom];
    }
    const double avg = weighted / mass;
    for (std::size_t atom : b.block(blk)) out[atom] = avg;
  }
  return RandomVariable(std::move(out));
}

double expect(const FiniteSpace& space, const RandomVariable& x,
              std::span<const std::size_t> event) {
  require_same_size(space.atom_count(), x.size(), "expect");
  double total = 0.0;
  for (std::size_t atom : event) {
    if (atom >= x.size()) {
      throw DimensionError("event atom " + std::to_string(atom) + " out of range");
    }
    total += space.prob(atom) * x[atom];
  }
  return total;
}

double expect(const FiniteSpace& space, const RandomVariable& x) {
  require_same_size(space.atom_count(), x.size(), "expect");
  double total = 0.0;
  const auto p = space.probs();
  for (std::size_t i = 0; i < x.size(); ++i) total += p[i] * x[i];
  return total;
}

double probability(const FiniteSpace& space, std::span<const std::size_t> event) {
  double total = 0.0;
  for (std::size_t atom : event) {
    if (atom >= space.atom_count()) {
      throw DimensionError("event atom " + std::to_string(atom) + " out of range");
    }
    total += space.prob(atom);
  }
  return total;
}

double measurability_defect(const RandomVariable& x, const Partition& b) {
  require_same_size(x.size(), b.atom_count(), "measurability");
  double worst = 0.0;
  for (std::size_t blk = 0; blk < b.block_count(); ++blk) {
    auto atoms = b.block(blk);
    double lo = x[atoms.front()];
    double hi = lo;
    for (std::size_t atom : atoms) {
      lo = std::min(lo, x[atom]);
      hi = std::max(hi, x[atom]);
    }
    worst = std::max(worst, hi - lo);
  }
  return worst;
}

bool is_measurable(const RandomVariable& x, const Partition& b, double tol) {
  double scale = 1.0;
  for (double v : x.values()) scale = std::max(scale, std::abs(v));
  return measurability_defect(x, b) <= tol * scale;
}

}  // namespace doobkit
