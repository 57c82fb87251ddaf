// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all
// criteria pass (including their runtime limits).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "doobkit/classd.hpp"
#include "doobkit/csv.hpp"
#include "doobkit/doob.hpp"
#include "doobkit/errors.hpp"
#include "doobkit/lattice.hpp"
#include "doobkit/refine.hpp"
#include "doobkit/trees.hpp"
#include "oracle.hpp"
#include "suite.hpp"

using namespace doobkit;

namespace {

constexpr double kTol = 1e-10;
constexpr std::uint64_t kAuditSeed = 20240611;
constexpr std::uint64_t kMcSeed = 1729;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string num(double v) { return format_double(v); }

double worst_check(const std::vector<InvariantCheck>& checks, bool& all_passed) {
  double worst = 0.0;
  for (const auto& c : checks) {
    worst = std::max(worst, c.max_violation);
    all_passed = all_passed && c.passed;
  }
  return worst;
}

// 1. Decomposition theorem on the suite, S^2 against path enumeration.
Outcome decomposition_theorem() {
  Outcome o;
  const auto members = suite::submartingales();
  o.require(members.size() >= 20, "suite has fewer than 20 members");
  double worst = 0.0;
  for (const auto& m : members) {
    const auto d = doob_decompose(m.x, kTol);
    bool ok = true;
    worst = std::max(worst, worst_check(check_decomposition(m.x, d, kTol), ok));
    o.require(ok, m.name + " fails an invariant");
  }
  o.require(worst <= kTol, "max violation " + num(worst));

  std::size_t enumerated = 0;
  for (std::size_t n : {1, 2, 3, 5, 8, 10, 12}) {
    const auto walk = oracle::tree_walk(n);
    std::vector<RandomVariable> rows;
    for (const auto& r : walk) {
      std::vector<double> sq(r.size());
      for (std::size_t w = 0; w < r.size(); ++w) sq[w] = r[w] * r[w];
      rows.emplace_back(std::move(sq));
    }
    const AdaptedProcess x(binary_tree_filtration(n), rows);
    const auto a_oracle = oracle::compensator(x);
    const auto a = doob_decompose(x).a;
    for (std::size_t k = 0; k <= n; ++k) {
      for (std::size_t w = 0; w < a_oracle[k].size(); ++w) {
        const double kk = static_cast<double>(k);
        if (std::abs(a_oracle[k][w] - kk) > kTol || std::abs(a.value(k, w) - kk) > kTol) {
          o.require(false, "S^2 compensator differs from step count at n=" + std::to_string(n));
          k = n + 1;
          break;
        }
      }
    }
    ++enumerated;
  }
  o.detail = std::to_string(members.size()) + " members, max violation " + num(worst) + ", S^2 oracle on " +
             std::to_string(enumerated) + " trees" + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// 2. Uniqueness: two constructions agree; perturbed decompositions rejected.
Outcome uniqueness() {
  Outcome o;
  const auto members = suite::submartingales();
  double worst_diff = 0.0;
  std::size_t attempts = 0;
  std::size_t rejected = 0;
  for (const auto& m : members) {
    const auto& x = m.x;
    const auto f = x.shared_filtration();
    const auto d1 = doob_decompose(x, kTol);
    const auto d2 = doob_decompose_martingale_first(x);
    worst_diff = std::max(worst_diff, oracle::max_abs_diff(oracle::rows_of(d1.a), d2.a));

    const std::size_t steps = x.time_count() - 1;
    const std::size_t mid = steps / 2;
    const std::size_t n = x.atom_count();
    for (double delta : {1e-6, 1e-4, 1e-2, 1.0}) {
      std::vector<Decomposition> tries;
      // Predictable, nondecreasing bump on one block of partition `mid`.
      {
        const auto& part = f->partition(mid);
        std::vector<RandomVariable> rows;
        for (std::size_t k = 0; k <= steps; ++k) {
          std::vector<double> v(n, 0.0);
          if (k > mid) {
            for (std::size_t w = 0; w < n; ++w) v[w] = part.block_of(w) == 0 ? delta : 0.0;
          }
          rows.emplace_back(std::move(v));
        }
        const AdaptedProcess bump(f, rows);
        tries.push_back({d1.a + bump, d1.m - bump});
      }
      // Shift a martingale from m into a.
      {
        auto nb = basis_martingale(f, 0);
        nb = nb - AdaptedProcess::deterministic(f, std::vector<double>(steps + 1, nb.value(0, 0)));
        tries.push_back({d1.a + delta * nb, d1.m - delta * nb});
      }
      // Constant offset.
      {
        const auto c = AdaptedProcess::deterministic(f, std::vector<double>(steps + 1, delta));
        tries.push_back({d1.a + c, d1.m - c});
      }
      // m alone moved at the terminal time.
      {
        std::vector<RandomVariable> rows(steps + 1, RandomVariable::constant(n, 0.0));
        rows[steps] = RandomVariable::constant(n, delta);
        tries.push_back({d1.a, d1.m + AdaptedProcess(f, rows)});
      }
      for (const auto& t : tries) {
        ++attempts;
        bool ok = true;
        worst_check(check_decomposition(x, t, kTol), ok);
        bool threw = false;
        try {
          check_uniqueness(x, d1, t, kTol);
        } catch (const MalformedDecompositionError&) {
          threw = true;
        }
        if (!ok && threw) ++rejected;
      }
    }
  }
  o.require(worst_diff <= kTol, "constructions differ by " + num(worst_diff));
  o.require(rejected == attempts, std::to_string(attempts - rejected) + " perturbations accepted");
  o.detail = "max |a1 - a2| " + num(worst_diff) + ", " + std::to_string(rejected) + "/" +
             std::to_string(attempts) + " perturbations (>= 1e-6) rejected" +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// 3. Naturality over the full martingale basis.
Outcome naturality() {
  Outcome o;
  const auto members = suite::submartingales();
  double worst = 0.0;
  double worst_fast = 0.0;
  std::size_t largest_basis = 0;
  std::size_t pairings = 0;
  for (const auto& m : members) {
    const auto a = doob_decompose(m.x, kTol).a;
    const auto f = a.shared_filtration();
    largest_basis = std::max(largest_basis, a.atom_count());
    const auto fast = naturality_mismatch(a);
    for (std::size_t w = 0; w < a.atom_count(); ++w) {
      const auto n = basis_martingale(f, w);
      const double left = natural_pairing(n, a);
      const double right = expect(a.space(), n.terminal() * a.terminal());
      worst = std::max(worst, std::abs(left - right));
      worst_fast = std::max(worst_fast, std::abs(fast[w]));
      ++pairings;
    }
    o.require(is_natural(a, kTol), m.name + " compensator not natural");
  }
  o.require(worst <= kTol, "telescoping identity off by " + num(worst));
  o.require(worst_fast <= kTol, "closed-form mismatch " + num(worst_fast));
  o.detail = std::to_string(pairings) + " basis pairings, largest basis " + std::to_string(largest_basis) +
             ", max |lhs - rhs| " + num(worst) + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// 4. Doleans-Dade audit; returns its CSV through `csv`.
Outcome audit(std::string* csv) {
  Outcome o;
  const auto rep = doleans_dade_audit(binary_tree_filtration(3), 1000, kAuditSeed, kTol);
  o.require(rep.trials == 1000, "trial count");
  o.require(rep.off_diagonal_zero(), "off-diagonal cells are not zero");
  o.require(rep.predictable_natural() >= 100, "fewer than 100 predictable processes");
  o.require(rep.neither() >= 100, "fewer than 100 non-predictable processes");
  if (csv) *csv = audit_csv(rep);
  o.detail = "predictable&natural " + std::to_string(rep.predictable_natural()) + ", pred&!nat " +
             std::to_string(rep.predictable_not_natural()) + ", !pred&nat " +
             std::to_string(rep.natural_not_predictable()) + ", neither " + std::to_string(rep.neither()) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// 5. Tail chain for S^2 on the 10-step tree.
Outcome tail_chain() {
  Outcome o;
  const auto x = squared(tree_walk(binary_tree_filtration(10)));
  const std::vector<double> levels{1, 2, 4, 8, 16};
  const auto rep = epsilon_profile(x, levels, kTol);
  const auto a_oracle = oracle::compensator(x);
  double min_slack = INFINITY;
  double oracle_gap = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    min_slack = std::min(min_slack, rep.chains[i].slack());
    const auto want = oracle::tail_chain(x, a_oracle, levels[i]);
    for (std::size_t t = 0; t < 5; ++t) oracle_gap = std::max(oracle_gap, std::abs(want[t] - rep.chains[i].terms[t]));
  }
  o.require(min_slack >= -kTol, "chain slack " + num(min_slack));
  o.require(rep.markov_holds(kTol), "Markov bound fails");
  o.require(rep.epsilon_nonincreasing(kTol), "epsilon increases");
  o.require(std::abs(rep.epsilon.back()) <= kTol, "epsilon(16) = " + num(rep.epsilon.back()));
  o.require(oracle_gap <= kTol, "oracle disagrees by " + num(oracle_gap));
  std::string eps;
  for (double e : rep.epsilon) eps += (eps.empty() ? "" : ",") + num(e);
  o.detail = "epsilon(1,2,4,8,16) = " + eps + ", min slack " + num(min_slack) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// 6. Monte Carlo refinement; returns the four study CSVs through `csv`.
Outcome monte_carlo(std::string* csv) {
  Outcome o;
  const auto grids = dyadic_grids(4, 8);
  std::string out;
  std::string summary;
  for (ModelKind kind : {ModelKind::mc_poisson, ModelKind::mc_gaussian_walk_squared}) {
    ModelSpec m;
    m.kind = kind;
    m.rate = 1.0;
    m.known = default_known_compensator(m);
    for (const std::string est : {"analytic", "binning:50"}) {
      McStudyOptions opt;
      opt.path_count = 100000;
      opt.seed = kMcSeed;
      opt.estimator = CondExpEstimator::parse(est);
      const auto study = compensator_convergence(m, grids, opt);
      const std::string tag = study.model_id + " " + est;
      double worst_dev = 0.0;
      double worst_ratio = 0.0;
      double worst_t = 0.0;
      for (const auto& r : study.rows) {
        worst_dev = std::max(worst_dev, *r.target_deviation);
        if (r.a_terminal_se > 0) worst_ratio = std::max(worst_ratio, *r.target_deviation / r.a_terminal_se);
        worst_t = std::max(worst_t, *r.residual_max_abs_t);
        if (est == "analytic") {
          o.require(*r.target_deviation == 0.0, tag + " deviation " + num(*r.target_deviation));
        } else {
          o.require(*r.target_pass, tag + " |A1 - 1| above 3 SE at depth " + std::to_string(*r.depth));
          o.require(*r.residual_max_abs_t <= 4.0,
                    tag + " residual |t| " + num(*r.residual_max_abs_t) + " at depth " + std::to_string(*r.depth));
        }
      }
      out += "# " + tag + "\n" + refinement_csv(study);
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s: max dev %.3g (%.2f SE), max |t| %.2f", tag.c_str(), worst_dev,
                    worst_ratio, worst_t);
      summary += (summary.empty() ? "" : "; ") + std::string(buf);
    }
  }
  if (csv) *csv = out;
  o.detail = summary + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// 7. Grid consistency of recombining-lattice compensators, depths 0..10.
Outcome grid_consistency() {
  Outcome o;
  const auto grids = dyadic_grids(0, 10);
  std::string summary;
  for (WalkFunctional f : {WalkFunctional::drift, WalkFunctional::walk_squared}) {
    ModelSpec m;
    m.kind = ModelKind::recombining_lattice;
    m.functional = f;
    m.rate = 1.5;
    m.known = default_known_compensator(m);
    // Compare every grid against the finest directly, at the coarse times.
    const auto finest = lattice_compensator(m, grids.back());
    double worst = 0.0;
    for (const auto& g : grids) {
      const auto lc = lattice_compensator(m, g);
      for (std::size_t k = 0; k < g.size(); ++k) {
        const std::size_t j = *grids.back().index_of(g[k]);
        worst = std::max(worst, wasserstein1(lc.a_law[k], finest.a_law[j]));
      }
    }
    const auto study = compensator_convergence(m, grids);
    double worst_delta = 0.0;
    for (double d : study.l1_deltas) worst_delta = std::max(worst_delta, d);
    o.require(worst <= kTol, std::string(to_string(f)) + " differs by " + num(worst));
    o.require(worst_delta <= kTol, std::string(to_string(f)) + " delta " + num(worst_delta));
    o.require(report_convergence(study).target_pass, std::string(to_string(f)) + " misses its target");
    summary += (summary.empty() ? "" : ", ") + std::string(to_string(f)) + " max diff " + num(std::max(worst, worst_delta));
  }
  o.detail = summary + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// 8. Byte-identical CSV on re-running 4 and 6.
Outcome reproducibility(const std::string& audit_first, const std::string& mc_first) {
  Outcome o;
  std::string audit_again;
  std::string mc_again;
  audit(&audit_again);
  monte_carlo(&mc_again);
  o.require(!audit_first.empty() && audit_first == audit_again, "audit CSV differs");
  o.require(!mc_first.empty() && mc_first == mc_again, "Monte Carlo CSV differs");
  o.detail = "audit " + std::to_string(audit_again.size()) + " bytes, refinement " +
             std::to_string(mc_again.size()) + " bytes" + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;  // <= 0: no runtime limit
    std::function<Outcome()> run;
  };
  std::string audit_csv_text;
  std::string mc_csv_text;
  const std::vector<Criterion> criteria{
      {1, "decomposition theorem (exact)", 10, decomposition_theorem},
      {2, "uniqueness (exact)", 10, uniqueness},
      {3, "naturality (exact)", 30, naturality},
      {4, "Doleans-Dade audit", 10, [&] { return audit(&audit_csv_text); }},
      {5, "uniform-integrability chain", 5, tail_chain},
      {6, "hyperfinite-limit surrogate (Monte Carlo)", 60, [&] { return monte_carlo(&mc_csv_text); }},
      {7, "grid consistency", 0, grid_consistency},
      {8, "reproducibility", 0, [&] { return reproducibility(audit_csv_text, mc_csv_text); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_s > 0 && secs > c.limit_s) o.require(false, "runtime above limit");
    if (!o.pass) ++failed;
    char timing[64];
    if (c.limit_s > 0) {
      std::snprintf(timing, sizeof timing, "%.2f s, limit %.0f s", secs, c.limit_s);
    } else {
      std::snprintf(timing, sizeof timing, "%.2f s", secs);
    }
    std::printf("criterion %d [PRIMARY] %s: %s (%s) %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", timing,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
