#include "doobkit/classd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "doobkit/doob.hpp"
#include "doobkit/errors.hpp"

namespace doobkit {

namespace {

void require_positive_level(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw DomainError("level k must be a positive finite number, got " + std::to_string(k));
  }
}

// E(v; cond(w)) over atoms where cond holds.
template <class Pred>
double restricted(const FiniteSpace& space, std::span<const double> v, Pred cond) {
  double total = 0.0;
  for (std::size_t w = 0; w < v.size(); ++w) {
    if (cond(w)) total += space.prob(w) * v[w];
  }
  return total;
}

TailChain chain_at(const AdaptedProcess& x, const AdaptedProcess& a, double k) {
  const auto& space = x.space();
  const RandomVariable& a1 = a.terminal();
  const StoppingTime tau = crossing_time(a, k);
  const RandomVariable a_tau = value_at(a, tau);
  const RandomVariable x_tau = value_at(x, tau);
  const std::size_t n = x.atom_count();

  std::vector<double> a1v(a1.values().begin(), a1.values().end());
  std::vector<double> excess(n);
  std::vector<double> to_tau(n);
  std::vector<double> x_gain(n);
  for (std::size_t w = 0; w < n; ++w) {
    excess[w] = a1[w] - std::min(a1[w], k);
    to_tau[w] = a1[w] - a_tau[w];
    x_gain[w] = x.terminal()[w] - x_tau[w];
  }
  auto above_2k = [&](std::size_t w) { return a1[w] >= 2.0 * k; };
  auto above_k = [&](std::size_t w) { return a1[w] >= k; };
  auto all = [](std::size_t) { return true; };

  TailChain c;
  c.level = k;
  c.terms[0] = restricted(space, a1v, above_2k);
  c.terms[1] = 2.0 * restricted(space, excess, above_2k);
  c.terms[2] = 2.0 * restricted(space, excess, all);
  c.terms[3] = 2.0 * restricted(space, to_tau, all);
  c.terms[4] = 2.0 * restricted(space, x_gain, above_k);
  return c;
}

}  // namespace

double TailChain::slack() const {
  double s = terms[1] - terms[0];
  for (std::size_t i = 1; i + 1 < terms.size(); ++i) s = std::min(s, terms[i + 1] - terms[i]);
  return s;
}

BoundPair markov_bound(const AdaptedProcess& x, const AdaptedProcess& a, double k) {
  require_positive_level(k);
  const auto& space = x.space();
  BoundPair b;
  for (std::size_t w = 0; w < a.atom_count(); ++w) {
    if (a.terminal()[w] >= k) b.lhs += space.prob(w);
  }
  b.rhs = expect(space, x.terminal() - x.row(0)) / k;
  return b;
}

TailChain tail_bound(const AdaptedProcess& x, const AdaptedProcess& a, double k, double tol) {
  require_positive_level(k);
  if (!same_filtration(x.shared_filtration(), a.shared_filtration())) {
    throw DimensionError("tail_bound: processes live on different filtrations");
  }
  const Decomposition d = doob_decompose(x, tol);
  double worst = 0.0;
  for (std::size_t j = 0; j < x.time_count(); ++j) {
    for (std::size_t w = 0; w < x.atom_count(); ++w) {
      worst = std::max(worst, std::abs(d.a.value(j, w) - a.value(j, w)));
    }
  }
  if (worst > tol) {
    throw ConsistencyError("tail_bound: supplied process is not the compensator of x (off by " +
                           std::to_string(worst) + ")");
  }
  return chain_at(x, a, k);
}

bool TailReport::markov_holds(double tol) const {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (markov_lhs[i] > markov_rhs[i] + tol) return false;
  }
  return true;
}

bool TailReport::chain_holds(double tol) const {
  return std::all_of(chains.begin(), chains.end(),
                     [tol](const TailChain& c) { return c.slack() >= -tol; });
}

bool TailReport::epsilon_nonincreasing(double tol) const {
  for (std::size_t i = 0; i < epsilon.size(); ++i) {
    if (epsilon[i] < -tol) return false;
    if (i > 0 && epsilon[i] > epsilon[i - 1] + tol) return false;
  }
  return true;
}

TailReport epsilon_profile(const AdaptedProcess& x, const std::vector<double>& levels,
                           double tol) {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    require_positive_level(levels[i]);
    if (i > 0 && !(levels[i] > levels[i - 1])) {
      throw DomainError("levels must be strictly increasing");
    }
  }
  const Decomposition d = doob_decompose(x, tol);
  TailReport r;
  r.levels = levels;
  for (double k : levels) {
    const BoundPair mb = markov_bound(x, d.a, k);
    r.markov_lhs.push_back(mb.lhs);
    r.markov_rhs.push_back(mb.rhs);
    r.chains.push_back(chain_at(x, d.a, k));
    r.epsilon.push_back(r.chains.back().rhs());
  }
  return r;
}

}  // namespace doobkit
