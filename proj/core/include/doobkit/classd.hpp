#pragma once

// Uniform-integrability diagnostics for a compensator: the Markov bound on
// P(A_1 >= k) and the stopping-time tail chain bounding E(A_1; A_1 >= 2k).

#include <array>
#include <vector>

#include "doobkit/process.hpp"

namespace doobkit {

struct BoundPair {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// The five terms of the tail chain at level k, with tau = crossing_time(a, k):
///   [0] E(A_1; A_1 >= 2k)
///   [1] 2 E(A_1 - min(A_1, k); A_1 >= 2k)
///   [2] 2 E(A_1 - min(A_1, k))
///   [3] 2 E(A_1 - A_tau)
///   [4] 2 E(X_1 - X_tau; A_1 >= k)
/// Each term is bounded by the next; [3] and [4] are equal by optional
/// stopping for the martingale part.
struct TailChain {
  double level = 0.0;
  std::array<double, 5> terms{};

  double lhs() const { return terms.front(); }
  double rhs() const { return terms.back(); }
  /// min over consecutive pairs of terms[i+1] - terms[i].
  double slack() const;
};

/// lhs = P(a[last] >= k), rhs = E(x[last] - x[0]) / k.
BoundPair markov_bound(const AdaptedProcess& x, const AdaptedProcess& a, double k);

/// Throws DomainError for k <= 0 and ConsistencyError when `a` is not the
/// compensator of `x` within tol.
TailChain tail_bound(const AdaptedProcess& x, const AdaptedProcess& a, double k,
                     double tol = kDefaultTol);

struct TailReport {
  std::vector<double> levels;
  std::vector<double> markov_lhs;
  std::vector<double> markov_rhs;
  std::vector<TailChain> chains;
  /// epsilon(k) = 2 E(X_1 - X_tau_k; A_1 >= k), i.e. the chain's last term.
  std::vector<double> epsilon;

  bool markov_holds(double tol = kDefaultTol) const;
  bool chain_holds(double tol = kDefaultTol) const;
  bool epsilon_nonincreasing(double tol = kDefaultTol) const;
};

/// Decomposes x and evaluates markov_bound and tail_bound at every level.
/// Levels must be positive and strictly increasing.
TailReport epsilon_profile(const AdaptedProcess& x, const std::vector<double>& levels,
                           double tol = kDefaultTol);

}  // namespace doobkit
