#include "doobkit/doob.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doobkit/errors.hpp"
#include "doobkit/rng.hpp"

namespace doobkit {

namespace {

std::string describe(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

double max_abs_difference(const AdaptedProcess& x, const AdaptedProcess& y) {
  double worst = 0.0;
  for (std::size_t k = 0; k < x.time_count(); ++k) {
    for (std::size_t w = 0; w < x.atom_count(); ++w) {
      worst = std::max(worst, std::abs(x.value(k, w) - y.value(k, w)));
    }
  }
  return worst;
}

void require_same_filtration(const AdaptedProcess& x, const AdaptedProcess& y, const char* what) {
  if (!same_filtration(x.shared_filtration(), y.shared_filtration())) {
    throw DimensionError(std::string(what) + ": processes live on different filtrations");
  }
}

}  // namespace

std::vector<InvariantCheck> check_decomposition(const AdaptedProcess& x, const Decomposition& d,
                                                double tol) {
  require_same_filtration(x, d.a, "check_decomposition");
  require_same_filtration(x, d.m, "check_decomposition");

  double start = 0.0;
  for (double v : d.a.row(0).values()) start = std::max(start, std::abs(v));

  std::vector<InvariantCheck> checks;
  checks.push_back({"a-starts-at-zero", start, false});
  checks.push_back({"a-nondecreasing", monotonicity_defect(d.a), false});
  checks.push_back({"a-predictable", predictability_defect(d.a), false});
  checks.push_back({"m-martingale", martingale_defect(d.m), false});
  checks.push_back({"a-plus-m-equals-x", max_abs_difference(d.a + d.m, x), false});
  for (auto& c : checks) c.passed = c.max_violation <= tol;
  return checks;
}

Decomposition doob_decompose(const AdaptedProcess& x, double tol) {
  const double defect = submartingale_defect(x);
  if (defect > tol) {
    throw NotSubmartingaleError("process is not a submartingale: E(x[k+1] | F_k) falls below x[k] by " +
                                describe(defect));
  }
  const auto& f = x.filtration();
  std::vector<RandomVariable> rows;
  rows.reserve(x.time_count());
  rows.push_back(RandomVariable::constant(x.atom_count(), 0.0));
  for (std::size_t k = 0; k + 1 < x.time_count(); ++k) {
    rows.push_back(rows.back() + cond_exp(f.space(), x.row(k + 1) - x.row(k), f.partition(k)));
  }
  AdaptedProcess a(x.shared_filtration(), std::move(rows));
  AdaptedProcess m = x - a;
  return {std::move(a), std::move(m)};
}

AdaptedProcess martingale_part(const AdaptedProcess& x, const RandomVariable& a_terminal) {
  if (a_terminal.size() != x.atom_count()) {
    throw DimensionError("martingale_part: terminal compensator has the wrong length");
  }
  const auto& f = x.filtration();
  const RandomVariable target = x.terminal() - a_terminal;
  std::vector<RandomVariable> rows;
  rows.reserve(x.time_count());
  for (std::size_t j = 0; j < x.time_count(); ++j) {
    rows.push_back(cond_exp(f.space(), target, f.partition(j)));
  }
  return AdaptedProcess(x.shared_filtration(), std::move(rows));
}

Decomposition doob_decompose_martingale_first(const AdaptedProcess& x) {
  const auto& f = x.filtration();
  RandomVariable innovations = x.row(0);
  for (std::size_t k = 0; k + 1 < x.time_count(); ++k) {
    innovations += x.row(k + 1) - cond_exp(f.space(), x.row(k + 1), f.partition(k));
  }
  const RandomVariable a_terminal = x.terminal() - innovations;
  AdaptedProcess m = martingale_part(x, a_terminal);
  AdaptedProcess a = x - m;
  return {std::move(a), std::move(m)};
}

double predictability_defect(const AdaptedProcess& a) {
  const auto& f = a.filtration();
  double worst = measurability_defect(a.row(0), f.partition(0));
  for (std::size_t k = 0; k + 1 < a.time_count(); ++k) {
    worst = std::max(worst, measurability_defect(a.row(k + 1), f.partition(k)));
  }
  return worst;
}

bool is_predictable(const AdaptedProcess& a, double tol) { return predictability_defect(a) <= tol; }

double natural_pairing(const AdaptedProcess& n, const AdaptedProcess& a) {
  require_same_filtration(n, a, "natural_pairing");
  const double mdef = martingale_defect(n);
  if (mdef > kDefaultTol) {
    throw NotMartingaleError("natural_pairing: integrand is not a martingale (defect " +
                             describe(mdef) + ")");
  }
  const double adef = monotonicity_defect(a);
  if (adef > kDefaultTol) {
    throw MonotonicityError("natural_pairing: integrator decreases by " + describe(adef));
  }
  const auto& space = a.space();
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < a.time_count(); ++k) {
    total += expect(space, n.row(k) * (a.row(k + 1) - a.row(k)));
  }
  return total;
}

AdaptedProcess basis_martingale(const FiltrationPtr& filtration, std::size_t atom) {
  const RandomVariable e = RandomVariable::indicator(filtration->atom_count(), atom);
  std::vector<RandomVariable> rows;
  rows.reserve(filtration->time_count());
  for (std::size_t j = 0; j < filtration->time_count(); ++j) {
    rows.push_back(cond_exp(filtration->space(), e, filtration->partition(j)));
  }
  return AdaptedProcess(filtration, std::move(rows));
}

std::vector<double> naturality_mismatch(const AdaptedProcess& a) {
  const auto& f = a.filtration();
  RandomVariable predicted = RandomVariable::constant(a.atom_count(), 0.0);
  for (std::size_t k = 0; k + 1 < a.time_count(); ++k) {
    predicted += cond_exp(f.space(), a.row(k + 1) - a.row(k), f.partition(k));
  }
  const RandomVariable closing = cond_exp(f.space(), a.terminal(), f.partition(a.time_count() - 1));
  std::vector<double> out(a.atom_count());
  for (std::size_t w = 0; w < out.size(); ++w) {
    out[w] = f.space().prob(w) * (predicted[w] - closing[w]);
  }
  return out;
}

bool is_natural(const AdaptedProcess& a, double tol) {
  const double adef = monotonicity_defect(a);
  if (adef > kDefaultTol) {
    throw MonotonicityError("is_natural: process decreases by " + describe(adef));
  }
  for (double v : a.row(0).values()) {
    if (std::abs(v) > tol) throw ValidationError("is_natural: process must start at 0");
  }
  const auto mismatch = naturality_mismatch(a);
  return std::all_of(mismatch.begin(), mismatch.end(),
                     [tol](double v) { return std::abs(v) <= tol; });
}

bool check_uniqueness(const AdaptedProcess& x, const Decomposition& d1, const Decomposition& d2,
                      double tol) {
  const Decomposition* ds[] = {&d1, &d2};
  for (int i = 0; i < 2; ++i) {
    for (const auto& c : check_decomposition(x, *ds[i], tol)) {
      if (!c.passed) {
        throw MalformedDecompositionError("decomposition " + std::to_string(i + 1) +
                                          " violates " + c.name + " (max violation " +
                                          describe(c.max_violation) + ")");
      }
    }
  }
  return max_abs_difference(d1.a, d2.a) <= tol;
}

AdaptedProcess audit_process(const FiltrationPtr& filtration, std::uint64_t seed,
                             std::uint64_t trial) {
  auto engine = stream_engine(seed, trial);
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool all_predictable = (engine() >> 63) != 0;

  const auto& space = filtration->space();
  const std::size_t n = filtration->atom_count();
  std::vector<RandomVariable> rows;
  rows.reserve(filtration->time_count());
  rows.push_back(RandomVariable::constant(n, 0.0));
  for (std::size_t k = 0; k + 1 < filtration->time_count(); ++k) {
    const Partition& next = filtration->partition(k + 1);
    std::vector<double> block_draw(next.block_count());
    for (double& d : block_draw) d = std::abs(normal(engine));
    std::vector<double> inc(n);
    for (std::size_t w = 0; w < n; ++w) inc[w] = block_draw[next.block_of(w)];
    const bool smooth = all_predictable || (engine() >> 63) != 0;
    RandomVariable increment(std::move(inc));
    if (smooth) increment = cond_exp(space, increment, filtration->partition(k));
    rows.push_back(rows.back() + increment);
  }
  return AdaptedProcess(filtration, std::move(rows));
}

AuditReport doleans_dade_audit(const FiltrationPtr& filtration, std::size_t trials,
                               std::uint64_t seed, double tol) {
  AuditReport report;
  report.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    const AdaptedProcess a = audit_process(filtration, seed, t);
    const bool predictable = is_predictable(a, tol);
    const bool natural = is_natural(a, tol);
    ++report.counts[predictable ? 1 : 0][natural ? 1 : 0];
  }
  return report;
}

}  // namespace doobkit
