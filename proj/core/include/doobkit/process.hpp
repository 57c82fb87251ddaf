#pragma once

// Time grids, filtrations, adapted processes and stopping times on a finite
// filtered probability space. Processes live only at grid times.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "doobkit/measure.hpp"

namespace doobkit {

inline constexpr double kDefaultTol = 1e-10;

/// Strictly increasing times in [0, 1], starting at 0 and ending at 1.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times);

  /// times k / steps for k = 0..steps.
  static TimeGrid uniform(std::size_t steps);

  std::size_t size() const noexcept { return times_.size(); }
  std::size_t steps() const noexcept { return times_.size() - 1; }
  double operator[](std::size_t k) const { return times_[k]; }
  std::span<const double> times() const noexcept { return times_; }

  /// Index of t in the grid (exact comparison), if present.
  std::optional<std::size_t> index_of(double t) const;
  /// True iff every time of `coarser` is also a time of this grid.
  bool contains(const TimeGrid& coarser) const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  std::vector<double> times_;
};

/// One partition per grid time, each refined by the next.
class Filtration {
 public:
  Filtration(FiniteSpace space, TimeGrid grid, std::vector<Partition> partitions);

  const FiniteSpace& space() const noexcept { return space_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  const Partition& partition(std::size_t k) const { return partitions_.at(k); }
  std::span<const Partition> partitions() const noexcept { return partitions_; }
  std::size_t time_count() const noexcept { return grid_.size(); }
  std::size_t atom_count() const noexcept { return space_.atom_count(); }

  friend bool operator==(const Filtration&, const Filtration&) = default;

 private:
  FiniteSpace space_;
  TimeGrid grid_;
  std::vector<Partition> partitions_;
};

using FiltrationPtr = std::shared_ptr<const Filtration>;

FiltrationPtr make_filtration(FiniteSpace space, TimeGrid grid, std::vector<Partition> partitions);

/// Same object or structurally equal.
bool same_filtration(const FiltrationPtr& a, const FiltrationPtr& b);

/// A (time x atom) matrix whose row k is measurable for partitions[k].
class AdaptedProcess {
 public:
  AdaptedProcess(FiltrationPtr filtration, std::vector<RandomVariable> rows);

  static AdaptedProcess zero(FiltrationPtr filtration);
  /// The same value at every atom for each time.
  static AdaptedProcess deterministic(FiltrationPtr filtration, std::span<const double> path);

  const Filtration& filtration() const noexcept { return *filtration_; }
  const FiltrationPtr& shared_filtration() const noexcept { return filtration_; }
  const FiniteSpace& space() const noexcept { return filtration_->space(); }

  std::size_t time_count() const noexcept { return rows_.size(); }
  std::size_t atom_count() const noexcept { return filtration_->atom_count(); }
  const RandomVariable& row(std::size_t k) const { return rows_.at(k); }
  const RandomVariable& terminal() const { return rows_.back(); }
  std::span<const RandomVariable> rows() const noexcept { return rows_; }
  double value(std::size_t k, std::size_t atom) const { return rows_.at(k)[atom]; }

  AdaptedProcess& operator+=(const AdaptedProcess& rhs);
  AdaptedProcess& operator-=(const AdaptedProcess& rhs);
  AdaptedProcess& operator*=(double s);

  friend AdaptedProcess operator+(AdaptedProcess a, const AdaptedProcess& b) { return a += b; }
  friend AdaptedProcess operator-(AdaptedProcess a, const AdaptedProcess& b) { return a -= b; }
  friend AdaptedProcess operator*(AdaptedProcess a, double s) { return a *= s; }
  friend AdaptedProcess operator*(double s, AdaptedProcess a) { return a *= s; }
  /// Pointwise (per time, per atom) product.
  friend AdaptedProcess operator*(const AdaptedProcess& a, const AdaptedProcess& b);

 private:
  FiltrationPtr filtration_;
  std::vector<RandomVariable> rows_;
};

/// Largest |x[k] - E(x[k+1] | F_k)| over all k and atoms.
double martingale_defect(const AdaptedProcess& x);
/// Largest (x[k] - E(x[k+1] | F_k))^+ over all k and atoms.
double submartingale_defect(const AdaptedProcess& x);
/// Largest (a[k] - a[k+1])^+ over all k and atoms.
double monotonicity_defect(const AdaptedProcess& a);

bool is_martingale(const AdaptedProcess& x, double tol = kDefaultTol);
bool is_submartingale(const AdaptedProcess& x, double tol = kDefaultTol);
bool is_nondecreasing(const AdaptedProcess& a, double tol = kDefaultTol);

/// A random grid index. Validity ({tau = k} measurable for partitions[k])
/// is a property that can be queried; see crossing_time for why it is not
/// enforced on construction.
class StoppingTime {
 public:
  StoppingTime(FiltrationPtr filtration, std::vector<std::size_t> index_of);

  static StoppingTime constant(FiltrationPtr filtration, std::size_t index);

  const Filtration& filtration() const noexcept { return *filtration_; }
  const FiltrationPtr& shared_filtration() const noexcept { return filtration_; }
  std::size_t index(std::size_t atom) const { return index_of_.at(atom); }
  std::span<const std::size_t> indices() const noexcept { return index_of_; }

  /// True iff every event {tau = k} is partitions[k]-measurable.
  bool is_valid() const;

 private:
  FiltrationPtr filtration_;
  std::vector<std::size_t> index_of_;
};

/// Per atom, the largest grid index j with a[j] <= level (0 if none).
///
/// Throws DomainError for level <= 0 and MonotonicityError when `a` is not
/// nondecreasing. The result is a genuine stopping time when `a` is
/// predictable; for other monotone inputs is_valid() may be false.
StoppingTime crossing_time(const AdaptedProcess& a, double level);

/// x[tau(w)][w] per atom.
RandomVariable value_at(const AdaptedProcess& x, const StoppingTime& tau);

}  // namespace doobkit
