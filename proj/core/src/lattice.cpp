#include "doobkit/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>

#include "doobkit/errors.hpp"

namespace doobkit {

// ---------------------------------------------------------------------------
// DiscreteLaw

double DiscreteLaw::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) m += probs[i] * values[i];
  return m;
}

double DiscreteLaw::sd() const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) v += probs[i] * (values[i] - m) * (values[i] - m);
  return std::sqrt(std::max(v, 0.0));
}

double DiscreteLaw::mean_abs_deviation(double c) const {
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) m += probs[i] * std::abs(values[i] - c);
  return m;
}

double wasserstein1(const DiscreteLaw& p, const DiscreteLaw& q) {
  // Integral of |F_p - F_q| over the merged support.
  std::size_t i = 0;
  std::size_t j = 0;
  double fp = 0.0;
  double fq = 0.0;
  double prev = 0.0;
  bool started = false;
  double total = 0.0;
  while (i < p.values.size() || j < q.values.size()) {
    const double x = (j >= q.values.size() || (i < p.values.size() && p.values[i] <= q.values[j]))
                         ? p.values[i]
                         : q.values[j];
    if (started) total += std::abs(fp - fq) * (x - prev);
    while (i < p.values.size() && p.values[i] == x) fp += p.probs[i++];
    while (j < q.values.size() && q.values[j] == x) fq += q.probs[j++];
    prev = x;
    started = true;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Lattice rules

namespace {

using State = std::int64_t;

struct Transition {
  State delta;
  double prob;
};

class LatticeRules {
 public:
  virtual ~LatticeRules() = default;
  virtual double value(std::size_t j, State s) const = 0;
  /// Transitions from any state at step j (state-free jump laws only).
  virtual const std::vector<Transition>& transitions(std::size_t j) = 0;
};

class WalkRules final : public LatticeRules {
 public:
  WalkRules(const ModelSpec& spec, const TimeGrid& grid)
      : functional_(spec.functional), rate_(spec.rate), grid_(grid) {
    dt_ = grid[1] - grid[0];
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
      if (std::abs((grid[k + 1] - grid[k]) - dt_) > 1e-12 * dt_) {
        throw ModelError("recombining-lattice walk models need a uniform grid");
      }
    }
    h_ = std::sqrt(dt_);
    if (functional_ == WalkFunctional::drift) {
      moves_ = {{0, 1.0}};
    } else {
      moves_ = {{-1, 0.5}, {1, 0.5}};
    }
  }

  double value(std::size_t j, State s) const override {
    const double m = static_cast<double>(s);
    switch (functional_) {
      case WalkFunctional::walk: return m * h_;
      case WalkFunctional::walk_squared: return m * m * dt_;
      case WalkFunctional::abs_walk: return std::abs(m) * h_;
      case WalkFunctional::drift: return rate_ * grid_[j];
    }
    return 0.0;
  }

  const std::vector<Transition>& transitions(std::size_t) override { return moves_; }

 private:
  WalkFunctional functional_;
  double rate_;
  const TimeGrid& grid_;
  double dt_ = 0.0;
  double h_ = 0.0;
  std::vector<Transition> moves_;
};

class PoissonRules final : public LatticeRules {
 public:
  PoissonRules(double rate, const TimeGrid& grid) : rate_(rate), grid_(grid) {}

  double value(std::size_t, State s) const override { return static_cast<double>(s); }

  const std::vector<Transition>& transitions(std::size_t j) override {
    const double mu = rate_ * (grid_[j + 1] - grid_[j]);
    if (mu != cached_mu_) {
      cached_mu_ = mu;
      const std::size_t cap = poisson_jump_cap(mu);
      moves_.clear();
      double term = std::exp(-mu);
      double total = 0.0;
      for (std::size_t i = 0; i <= cap; ++i) {
        if (i > 0) term *= mu / static_cast<double>(i);
        moves_.push_back({static_cast<State>(i), term});
        total += term;
      }
      for (auto& m : moves_) m.prob /= total;
      truncated_ = std::max(truncated_, 1.0 - total);
    }
    return moves_;
  }

  double truncated_tail() const { return truncated_; }

 private:
  double rate_;
  const TimeGrid& grid_;
  double cached_mu_ = -1.0;
  double truncated_ = 0.0;
  std::vector<Transition> moves_;
};

struct Entry {
  double a;
  double p;
};

constexpr double kPruneMass = 1e-300;

bool close_values(double x, double y) {
  return std::abs(x - y) <= 1e-14 * std::max(1.0, std::max(std::abs(x), std::abs(y)));
}

// Sorts by value and merges near-identical values (summing their mass).
void compact(std::vector<Entry>& entries) {
  if (entries.size() < 2) return;
  std::sort(entries.begin(), entries.end(), [](const Entry& l, const Entry& r) { return l.a < r.a; });
  std::size_t out = 0;
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (close_values(entries[out].a, entries[i].a)) {
      entries[out].p += entries[i].p;
    } else {
      entries[++out] = entries[i];
    }
  }
  entries.resize(out + 1);
}

DiscreteLaw to_law(std::vector<Entry> entries) {
  compact(entries);
  DiscreteLaw law;
  law.values.reserve(entries.size());
  law.probs.reserve(entries.size());
  for (const auto& e : entries) {
    law.values.push_back(e.a);
    law.probs.push_back(e.p);
  }
  return law;
}

}  // namespace

std::size_t poisson_jump_cap(double mu) {
  constexpr double kPoissonTail = 1e-17;
  if (!(mu > 0.0)) throw DomainError("poisson jump cap needs a positive mean");
  // Tail P(J > b) summed directly from the terms above b, largest index first.
  std::vector<double> terms;
  double term = std::exp(-mu);
  terms.push_back(term);
  for (std::size_t i = 1; i < 100000; ++i) {
    term *= mu / static_cast<double>(i);
    terms.push_back(term);
    if (static_cast<double>(i) > mu && term < 1e-40) break;
  }
  for (std::size_t b = 0; b < terms.size(); ++b) {
    double tail = 0.0;
    for (std::size_t i = terms.size(); i-- > b + 1;) tail += terms[i];
    if (tail < kPoissonTail) return b;
  }
  return terms.size() - 1;
}

LatticeCompensator lattice_compensator(const ModelSpec& spec, const TimeGrid& grid) {
  std::unique_ptr<LatticeRules> rules;
  PoissonRules* poisson = nullptr;
  if (spec.kind == ModelKind::recombining_lattice) {
    rules = std::make_unique<WalkRules>(spec, grid);
  } else if (spec.kind == ModelKind::poisson_lattice) {
    auto p = std::make_unique<PoissonRules>(spec.rate, grid);
    poisson = p.get();
    rules = std::move(p);
  } else {
    throw ModelError(std::string("model kind ") + to_string(spec.kind) + " is not a lattice model");
  }

  LatticeCompensator out{grid, {}, {}, std::numeric_limits<double>::infinity(), 0.0, 0.0, 0};
  out.a_law.reserve(grid.size());

  // Nodes indexed by state - lo; each node holds its (A, mass) entries.
  State lo = 0;
  std::vector<std::vector<Entry>> cur(1, std::vector<Entry>{{0.0, 1.0}});
  std::vector<std::vector<Entry>> next;
  std::vector<Entry> law_buffer;
  std::size_t entry_work = 0;

  auto record_law = [&]() {
    law_buffer.clear();
    for (const auto& node : cur) law_buffer.insert(law_buffer.end(), node.begin(), node.end());
    out.a_law.push_back(to_law(law_buffer));
  };
  record_law();

  for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
    const auto& moves = rules->transitions(j);
    State dmin = moves.front().delta;
    State dmax = moves.front().delta;
    for (const auto& m : moves) {
      dmin = std::min(dmin, m.delta);
      dmax = std::max(dmax, m.delta);
    }
    const State next_lo = lo + dmin;
    const std::size_t next_size = cur.size() + static_cast<std::size_t>(dmax - dmin);
    if (next.size() < next_size) next.resize(next_size);
    for (std::size_t i = 0; i < next_size; ++i) next[i].clear();

    for (std::size_t i = 0; i < cur.size(); ++i) {
      if (cur[i].empty()) continue;
      const State s = lo + static_cast<State>(i);
      const double here = rules->value(j, s);
      double g = 0.0;
      for (const auto& m : moves) g += m.prob * (rules->value(j + 1, s + m.delta) - here);
      out.min_increment_mean = std::min(out.min_increment_mean, g);
      ++out.node_steps;
      for (const auto& m : moves) {
        auto& child = next[static_cast<std::size_t>(s + m.delta - next_lo)];
        for (const auto& e : cur[i]) {
          const double p = e.p * m.prob;
          if (p < kPruneMass) {
            out.dropped_mass += p;
            continue;
          }
          child.push_back({e.a + g, p});
        }
        entry_work += cur[i].size();
      }
    }
    if (entry_work > kLatticeEntryBudget) {
      throw ResourceError("lattice computation exceeds the work budget of " +
                          std::to_string(kLatticeEntryBudget) + " entries");
    }
    for (std::size_t i = 0; i < next_size; ++i) compact(next[i]);

    // Trim empty nodes at both ends.
    std::size_t first = 0;
    while (first < next_size && next[first].empty()) ++first;
    std::size_t last = next_size;
    while (last > first && next[last - 1].empty()) --last;
    cur.resize(last - first);
    for (std::size_t i = first; i < last; ++i) cur[i - first].swap(next[i]);
    lo = next_lo + static_cast<State>(first);
    record_law();
  }

  law_buffer.clear();
  for (std::size_t i = 0; i < cur.size(); ++i) {
    double mass = 0.0;
    for (const auto& e : cur[i]) mass += e.p;
    if (mass > 0.0) law_buffer.push_back({rules->value(grid.size() - 1, lo + static_cast<State>(i)), mass});
  }
  out.x_terminal_law = to_law(law_buffer);
  if (poisson) out.max_truncated_tail = poisson->truncated_tail();
  if (!std::isfinite(out.min_increment_mean)) out.min_increment_mean = 0.0;
  return out;
}

}  // namespace doobkit
