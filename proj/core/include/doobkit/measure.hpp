#pragma once

// Finite probability spaces, sub-sigma-algebras represented as partitions of
// the atom set, and exact conditional expectation.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace doobkit {

inline constexpr double kNormalizationTol = 1e-12;

/// A finite sample space: atoms 0..n-1 with strictly positive weights that
/// sum to one.
class FiniteSpace {
 public:
  explicit FiniteSpace(std::vector<double> probs);

  static FiniteSpace uniform(std::size_t atom_count);

  std::size_t atom_count() const noexcept { return probs_.size(); }
  double prob(std::size_t atom) const { return probs_.at(atom); }
  std::span<const double> probs() const noexcept { return probs_; }

  friend bool operator==(const FiniteSpace&, const FiniteSpace&) = default;

 private:
  std::vector<double> probs_;
};

/// A partition of the atom set. On a finite space every sub-sigma-algebra is
/// generated by exactly one partition, so this is the sigma-algebra type.
///
/// Block labels are canonical: blocks are numbered in order of the first
/// atom that belongs to them. Two partitions describe the same sigma-algebra
/// iff they compare equal.
class Partition {
 public:
  /// Builds from arbitrary integer labels (any labelling, any order).
  static Partition from_labels(std::span<const std::size_t> labels);
  static Partition from_labels(std::initializer_list<std::size_t> labels);
  static Partition trivial(std::size_t atom_count);
  static Partition discrete(std::size_t atom_count);

  std::size_t atom_count() const noexcept { return block_of_.size(); }
  std::size_t block_count() const noexcept { return blocks_.size(); }
  std::size_t block_of(std::size_t atom) const { return block_of_.at(atom); }
  std::span<const std::size_t> labels() const noexcept { return block_of_; }
  std::span<const std::size_t> block(std::size_t b) const { return blocks_.at(b); }

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.block_of_ == b.block_of_;
  }

 private:
  Partition() = default;

  std::vector<std::size_t> block_of_;
  std::vector<std::vector<std::size_t>> blocks_;
};

/// A real-valued function on the atoms. Entries are always finite.
class RandomVariable {
 public:
  RandomVariable() = default;
  explicit RandomVariable(std::vector<double> values);
  RandomVariable(std::initializer_list<double> values);

  static RandomVariable constant(std::size_t atom_count, double value);
  static RandomVariable indicator(std::size_t atom_count, std::size_t atom);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t atom) const { return values_[atom]; }
  std::span<const double> values() const noexcept { return values_; }

  double min() const;
  double max() const;

  RandomVariable& operator+=(const RandomVariable& rhs);
  RandomVariable& operator-=(const RandomVariable& rhs);
  RandomVariable& operator*=(double s);

  friend RandomVariable operator+(RandomVariable a, const RandomVariable& b) { return a += b; }
  friend RandomVariable operator-(RandomVariable a, const RandomVariable& b) { return a -= b; }
  friend RandomVariable operator*(RandomVariable a, double s) { return a *= s; }
  friend RandomVariable operator*(double s, RandomVariable a) { return a *= s; }
  /// Pointwise product.
  friend RandomVariable operator*(const RandomVariable& a, const RandomVariable& b);
  friend RandomVariable operator-(RandomVariable a) { return a *= -1.0; }

  friend bool operator==(const RandomVariable&, const RandomVariable&) = default;

 private:
  std::vector<double> values_;
};

/// True iff every block of `fine` lies inside a single block of `coarse`.
bool refines(const Partition& coarse, const Partition& fine);

/// E(x | b): probability-weighted block average, constant on blocks.
RandomVariable cond_exp(const FiniteSpace& space, const RandomVariable& x, const Partition& b);

/// E(x; event) = sum over event atoms of p * x.
double expect(const FiniteSpace& space, const RandomVariable& x,
              std::span<const std::size_t> event);
/// Plain expectation E(x).
double expect(const FiniteSpace& space, const RandomVariable& x);

/// Probability of a set of atoms.
double probability(const FiniteSpace& space, std::span<const std::size_t> event);

/// True iff x is constant on every block of b, up to `tol` (absolute, scaled
/// by max(1, |x|)).
bool is_measurable(const RandomVariable& x, const Partition& b, double tol);

/// Largest within-block spread of x over the blocks of b.
double measurability_defect(const RandomVariable& x, const Partition& b);

}  // namespace doobkit
