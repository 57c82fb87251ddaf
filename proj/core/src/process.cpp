#include "doobkit/process.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "doobkit/errors.hpp"

namespace doobkit {

namespace {

constexpr double kAdaptedTol = 1e-10;

void require_same(const FiltrationPtr& a, const FiltrationPtr& b, const char* what) {
  if (!same_filtration(a, b)) {
    throw DimensionError(std::string(what) + ": processes live on different filtrations");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// TimeGrid

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) throw ValidationError("time grid needs at least the times 0 and 1");
  if (times_.front() != 0.0) throw ValidationError("time grid must start at 0");
  if (times_.back() != 1.0) throw ValidationError("time grid must end at 1");
  for (std::size_t k = 0; k + 1 < times_.size(); ++k) {
    if (!(times_[k] < times_[k + 1])) {
      throw ValidationError("time grid must be strictly increasing (index " + std::to_string(k) +
                            ")");
    }
  }
}

TimeGrid TimeGrid::uniform(std::size_t steps) {
  if (steps == 0) throw ValidationError("uniform grid needs at least one step");
  std::vector<double> t(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    t[k] = static_cast<double>(k) / static_cast<double>(steps);
  }
  return TimeGrid(std::move(t));
}

std::optional<std::size_t> TimeGrid::index_of(double t) const {
  auto it = std::lower_bound(times_.begin(), times_.end(), t);
  if (it == times_.end() || *it != t) return std::nullopt;
  return static_cast<std::size_t>(it - times_.begin());
}

bool TimeGrid::contains(const TimeGrid& coarser) const {
  return std::all_of(coarser.times_.begin(), coarser.times_.end(),
                     [this](double t) { return index_of(t).has_value(); });
}

// ---------------------------------------------------------------------------
// Filtration

Filtration::Filtration(FiniteSpace space, TimeGrid grid, std::vector<Partition> partitions)
    : space_(std::move(space)), grid_(std::move(grid)), partitions_(std::move(partitions)) {
  if (partitions_.size() != grid_.size()) {
    throw DimensionError("filtration needs one partition per grid time (" +
                         std::to_string(grid_.size()) + "), got " +
                         std::to_string(partitions_.size()));
  }
  for (std::size_t k = 0; k < partitions_.size(); ++k) {
    if (partitions_[k].atom_count() != space_.atom_count()) {
      throw DimensionError("partition " + std::to_string(k) + " has the wrong atom count");
    }
    if (k > 0 && !refines(partitions_[k - 1], partitions_[k])) {
      throw ValidationError("filtration: partition " + std::to_string(k) +
                            " does not refine partition " + std::to_string(k - 1));
    }
  }
}

FiltrationPtr make_filtration(FiniteSpace space, TimeGrid grid, std::vector<Partition> partitions) {
  return std::make_shared<const Filtration>(std::move(space), std::move(grid),
                                            std::move(partitions));
}

bool same_filtration(const FiltrationPtr& a, const FiltrationPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

// ---------------------------------------------------------------------------
// AdaptedProcess

AdaptedProcess::AdaptedProcess(FiltrationPtr filtration, std::vector<RandomVariable> rows)
    : filtration_(std::move(filtration)), rows_(std::move(rows)) {
  if (!filtration_) throw ValidationError("adapted process without a filtration");
  if (rows_.size() != filtration_->time_count()) {
    throw DimensionError("adapted process needs " + std::to_string(filtration_->time_count()) +
                         " rows, got " + std::to_string(rows_.size()));
  }
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    if (rows_[k].size() != filtration_->atom_count()) {
      throw DimensionError("adapted process row " + std::to_string(k) + " has wrong length");
    }
    if (!is_measurable(rows_[k], filtration_->partition(k), kAdaptedTol)) {
      throw ValidationError("adaptedness: row " + std::to_string(k) +
                            " is not measurable for partition " + std::to_string(k));
    }
  }
}

AdaptedProcess AdaptedProcess::zero(FiltrationPtr filtration) {
  const std::size_t n = filtration->atom_count();
  std::vector<RandomVariable> rows(filtration->time_count(), RandomVariable::constant(n, 0.0));
  return AdaptedProcess(std::move(filtration), std::move(rows));
}

AdaptedProcess AdaptedProcess::deterministic(FiltrationPtr filtration,
                                             std::span<const double> path) {
  if (path.size() != filtration->time_count()) {
    throw DimensionError("deterministic path length does not match the grid");
  }
  const std::size_t n = filtration->atom_count();
  std::vector<RandomVariable> rows;
  rows.reserve(path.size());
  for (double v : path) rows.push_back(RandomVariable::constant(n, v));
  return AdaptedProcess(std::move(filtration), std::move(rows));
}

AdaptedProcess& AdaptedProcess::operator+=(const AdaptedProcess& rhs) {
  require_same(filtration_, rhs.filtration_, "process sum");
  for (std::size_t k = 0; k < rows_.size(); ++k) rows_[k] += rhs.rows_[k];
  return *this;
}

AdaptedProcess& AdaptedProcess::operator-=(const AdaptedProcess& rhs) {
  require_same(filtration_, rhs.filtration_, "process difference");
  for (std::size_t k = 0; k < rows_.size(); ++k) rows_[k] -= rhs.rows_[k];
  return *this;
}

AdaptedProcess& AdaptedProcess::operator*=(double s) {
  for (auto& r : rows_) r *= s;
  return *this;
}

AdaptedProcess operator*(const AdaptedProcess& a, const AdaptedProcess& b) {
  require_same(a.filtration_, b.filtration_, "process product");
  std::vector<RandomVariable> rows;
  rows.reserve(a.rows_.size());
  for (std::size_t k = 0; k < a.rows_.size(); ++k) rows.push_back(a.rows_[k] * b.rows_[k]);
  return AdaptedProcess(a.filtration_, std::move(rows));
}

// ---------------------------------------------------------------------------
// Predicates

double martingale_defect(const AdaptedProcess& x) {
  const auto& f = x.filtration();
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < x.time_count(); ++k) {
    const RandomVariable next = cond_exp(f.space(), x.row(k + 1), f.partition(k));
    for (std::size_t w = 0; w < x.atom_count(); ++w) {
      worst = std::max(worst, std::abs(next[w] - x.value(k, w)));
    }
  }
  return worst;
}

double submartingale_defect(const AdaptedProcess& x) {
  const auto& f = x.filtration();
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < x.time_count(); ++k) {
    const RandomVariable next = cond_exp(f.space(), x.row(k + 1), f.partition(k));
    for (std::size_t w = 0; w < x.atom_count(); ++w) {
      worst = std::max(worst, x.value(k, w) - next[w]);
    }
  }
  return worst;
}

double monotonicity_defect(const AdaptedProcess& a) {
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < a.time_count(); ++k) {
    for (std::size_t w = 0; w < a.atom_count(); ++w) {
      worst = std::max(worst, a.value(k, w) - a.value(k + 1, w));
    }
  }
  return worst;
}

bool is_martingale(const AdaptedProcess& x, double tol) { return martingale_defect(x) <= tol; }

bool is_submartingale(const AdaptedProcess& x, double tol) {
  return submartingale_defect(x) <= tol;
}

bool is_nondecreasing(const AdaptedProcess& a, double tol) {
  return monotonicity_defect(a) <= tol;
}

// ---------------------------------------------------------------------------
// Stopping times

StoppingTime::StoppingTime(FiltrationPtr filtration, std::vector<std::size_t> index_of)
    : filtration_(std::move(filtration)), index_of_(std::move(index_of)) {
  if (!filtration_) throw ValidationError("stopping time without a filtration");
  if (index_of_.size() != filtration_->atom_count()) {
    throw DimensionError("stopping time needs one index per atom");
  }
  for (std::size_t idx : index_of_) {
    if (idx >= filtration_->time_count()) {
      throw DimensionError("stopping time index " + std::to_string(idx) + " beyond the grid");
    }
  }
}

StoppingTime StoppingTime::constant(FiltrationPtr filtration, std::size_t index) {
  const std::size_t n = filtration->atom_count();
  return StoppingTime(std::move(filtration), std::vector<std::size_t>(n, index));
}

bool StoppingTime::is_valid() const {
  for (std::size_t k = 0; k < filtration_->time_count(); ++k) {
    const Partition& p = filtration_->partition(k);
    for (std::size_t b = 0; b < p.block_count(); ++b) {
      auto atoms = p.block(b);
      const bool first = index_of_[atoms.front()] == k;
      for (std::size_t w : atoms) {
        if ((index_of_[w] == k) != first) return false;
      }
    }
  }
  return true;
}

StoppingTime crossing_time(const AdaptedProcess& a, double level) {
  if (!(level > 0.0)) throw DomainError("crossing level must be positive");
  if (!is_nondecreasing(a)) {
    throw MonotonicityError("crossing_time needs a process that is nondecreasing per atom");
  }
  std::vector<std::size_t> idx(a.atom_count(), 0);
  for (std::size_t w = 0; w < a.atom_count(); ++w) {
    for (std::size_t j = a.time_count(); j-- > 0;) {
      if (a.value(j, w) <= level) {
        idx[w] = j;
        break;
      }
    }
  }
  return StoppingTime(a.shared_filtration(), std::move(idx));
}

RandomVariable value_at(const AdaptedProcess& x, const StoppingTime& tau) {
  require_same(x.shared_filtration(), tau.shared_filtration(), "value_at");
  std::vector<double> out(x.atom_count());
  for (std::size_t w = 0; w < out.size(); ++w) out[w] = x.value(tau.index(w), w);
  return RandomVariable(std::move(out));
}

}  // namespace doobkit
