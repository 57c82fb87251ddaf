#pragma once

// Discrete Doob decomposition X = A + M on a finite filtration and the
// checks that go with it: predictability, naturality, uniqueness and the
// predictable <=> natural audit for increasing processes.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "doobkit/process.hpp"

namespace doobkit {

/// A compensator `a` (predictable, nondecreasing, starting at 0) and a
/// martingale part `m`.
struct Decomposition {
  AdaptedProcess a;
  AdaptedProcess m;
};

/// One named invariant together with the largest violation observed.
struct InvariantCheck {
  std::string name;
  double max_violation = 0.0;
  bool passed = false;
};

/// Evaluates the five decomposition invariants against source process x:
/// a-starts-at-zero, a-nondecreasing, a-predictable, m-martingale, a-plus-m.
std::vector<InvariantCheck> check_decomposition(const AdaptedProcess& x, const Decomposition& d,
                                                double tol = kDefaultTol);

/// a[j] = sum_{k<j} E(x[k+1] - x[k] | F_k), m = x - a.
///
/// Throws NotSubmartingaleError when x fails the submartingale check by more
/// than tol: the sum is still defined, but it would not be monotone.
Decomposition doob_decompose(const AdaptedProcess& x, double tol = kDefaultTol);

/// m[j] = E(x[last] - a_terminal | F_j).
AdaptedProcess martingale_part(const AdaptedProcess& x, const RandomVariable& a_terminal);

/// Second, independently coded route to the decomposition. The terminal
/// compensator is recovered from the martingale innovations
///   A_1 = X_1 - X_0 - sum_k (X_{k+1} - E(X_{k+1} | F_k)),
/// then m = martingale_part(x, A_1) and a = x - m.
Decomposition doob_decompose_martingale_first(const AdaptedProcess& x);

/// Largest spread of a[k+1] over a block of partitions[k] (and of a[0] over
/// partitions[0]).
double predictability_defect(const AdaptedProcess& a);
bool is_predictable(const AdaptedProcess& a, double tol = kDefaultTol);

/// sum_k E(n[k] (a[k+1] - a[k])): the left-endpoint pairing.
/// Throws NotMartingaleError / MonotonicityError on bad inputs.
double natural_pairing(const AdaptedProcess& n, const AdaptedProcess& a);

/// The backward-closure martingale of the indicator of `atom`:
/// n[j] = E(1_{atom} | F_j).
AdaptedProcess basis_martingale(const FiltrationPtr& filtration, std::size_t atom);

/// Per basis martingale n^w, natural_pairing(n^w, a) - E(n^w[last] a[last]).
///
/// Computed in one pass: for the indicator basis both sides reduce to
/// p(w) * sum_k E(a[k+1] - a[k] | F_k)(w) and p(w) * a[last](w).
std::vector<double> naturality_mismatch(const AdaptedProcess& a);

/// True iff every basis pairing matches within tol.
/// Throws MonotonicityError if a is not nondecreasing and ValidationError if
/// a[0] is not zero.
bool is_natural(const AdaptedProcess& a, double tol = kDefaultTol);

/// True iff d1.a and d2.a agree entrywise within tol. Both arguments must be
/// valid decompositions of x, otherwise MalformedDecompositionError names the
/// first failing invariant.
bool check_uniqueness(const AdaptedProcess& x, const Decomposition& d1, const Decomposition& d2,
                      double tol = kDefaultTol);

/// 2x2 classification of random increasing processes.
struct AuditReport {
  std::size_t trials = 0;
  // counts[predictable][natural]
  std::array<std::array<std::size_t, 2>, 2> counts{};

  std::size_t predictable_natural() const { return counts[1][1]; }
  std::size_t predictable_not_natural() const { return counts[1][0]; }
  std::size_t natural_not_predictable() const { return counts[0][1]; }
  std::size_t neither() const { return counts[0][0]; }
  bool off_diagonal_zero() const { return counts[1][0] == 0 && counts[0][1] == 0; }
};

/// Random nondecreasing adapted process starting at 0 for audit trial
/// `trial`. Increments are |N(0,1)| per block of the next partition. Half of
/// the trials smooth every step onto the current partition (predictable);
/// the rest smooth each step with probability 1/2.
AdaptedProcess audit_process(const FiltrationPtr& filtration, std::uint64_t seed,
                             std::uint64_t trial);

AuditReport doleans_dade_audit(const FiltrationPtr& filtration, std::size_t trials,
                               std::uint64_t seed, double tol = kDefaultTol);

}  // namespace doobkit
