#include "doobkit_cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

#include "CLI11.hpp"
#include "doobkit/classd.hpp"
#include "doobkit/csv.hpp"
#include "doobkit/doob.hpp"
#include "doobkit/refine.hpp"
#include "doobkit_cli/model_io.hpp"
#include "json.hpp"

namespace doobkit::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::size_t kAuditMaxAtoms = 64;
constexpr double kResidualTLimit = 4.0;

// Verdicts and their worst violations, in insertion order.
struct Verdicts {
  ordered_json verdicts = ordered_json::object();
  ordered_json violations = ordered_json::object();
  bool all = true;

  void add(const std::string& name, bool passed, double violation) {
    verdicts[name] = passed;
    violations[name] = violation;
    all = all && passed;
  }
  void add(const InvariantCheck& c) { add(c.name, c.passed, c.max_violation); }
};

ordered_json config_echo(const RunConfig& c, const ModelSpec& spec) {
  ordered_json j;
  j["model"] = c.model.string();
  j["model_kind"] = to_string(spec.kind);
  j["tol"] = c.tol;
  if (c.command == "verify") j["levels"] = c.levels;
  if (c.command == "converge") {
    j["depths"] = {c.depth_min, c.depth_max};
    j["paths"] = c.paths;
    j["estimator"] = c.estimator;
  }
  if (c.command == "audit") j["trials"] = c.trials;
  if (c.seed) j["seed"] = *c.seed;
  return j;
}

std::string finish(CommandResult& r, const RunConfig& c, const ModelSpec& spec, const Verdicts& v,
                   ordered_json extra = ordered_json::object()) {
  r.exit_code = v.all ? kExitOk : kExitCheckFailed;
  ordered_json s;
  s["command"] = c.command;
  s["config"] = config_echo(c, spec);
  s["verdicts"] = v.verdicts;
  s["max_violations"] = v.violations;
  for (auto& [k, val] : extra.items()) s[k] = val;
  s["passed"] = v.all;
  s["exit_code"] = r.exit_code;
  return s.dump(2) + "\n";
}

std::uint64_t require_seed(const RunConfig& c) {
  if (!c.seed) throw ValidationError(c.command + " requires --seed");
  return *c.seed;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::string naturality_csv(const std::vector<double>& mismatch) {
  CsvTable t({"atom", "mismatch"});
  for (std::size_t w = 0; w < mismatch.size(); ++w) t.row({std::to_string(w), format_double(mismatch[w])});
  return t.str();
}

CommandResult decompose_cmd(const RunConfig& c, const ModelSpec& spec) {
  const AdaptedProcess x = instantiate_finite(spec);
  const Decomposition d = doob_decompose(x, c.tol);
  const auto checks = check_decomposition(x, d, c.tol);
  CommandResult r;
  Verdicts v;
  for (const auto& ch : checks) v.add(ch);
  r.files["a.csv"] = process_csv(d.a);
  r.files["m.csv"] = process_csv(d.m);
  r.files["checks.csv"] = checks_csv(checks);
  r.summary = finish(r, c, spec, v);
  return r;
}

CommandResult verify_cmd(const RunConfig& c, const ModelSpec& spec) {
  const AdaptedProcess x = instantiate_finite(spec);
  const Decomposition d = doob_decompose(x, c.tol);
  CommandResult r;
  Verdicts v;
  const auto checks = check_decomposition(x, d, c.tol);
  for (const auto& ch : checks) v.add(ch);

  const TailReport tail = epsilon_profile(x, c.levels, c.tol);
  double chain_slack = 0.0;
  double markov_gap = 0.0;
  double eps_rise = 0.0;
  for (std::size_t i = 0; i < tail.levels.size(); ++i) {
    chain_slack = std::max(chain_slack, -tail.chains[i].slack());
    markov_gap = std::max(markov_gap, tail.markov_lhs[i] - tail.markov_rhs[i]);
    if (i > 0) eps_rise = std::max(eps_rise, tail.epsilon[i] - tail.epsilon[i - 1]);
  }
  v.add("tail-chain", tail.chain_holds(c.tol), chain_slack);
  v.add("markov-bound", tail.markov_holds(c.tol), markov_gap);
  v.add("epsilon-nonincreasing", tail.epsilon_nonincreasing(c.tol), eps_rise);

  const auto mismatch = naturality_mismatch(d.a);
  v.add("a-natural", max_abs(mismatch) <= c.tol, max_abs(mismatch));

  const Decomposition d2 = doob_decompose_martingale_first(x);
  double diff = 0.0;
  for (std::size_t k = 0; k < x.time_count(); ++k) {
    for (std::size_t w = 0; w < x.atom_count(); ++w) {
      diff = std::max(diff, std::abs(d.a.value(k, w) - d2.a.value(k, w)));
    }
  }
  v.add("uniqueness", check_uniqueness(x, d, d2, c.tol), diff);

  // An increasing process started at 0 is its own compensator only if it is
  // natural; report that directly.
  const double x0 = max_abs(std::vector<double>(x.row(0).values().begin(), x.row(0).values().end()));
  if (is_nondecreasing(x, c.tol) && x0 <= c.tol) {
    const auto xm = naturality_mismatch(x);
    v.add("x-natural", max_abs(xm) <= c.tol, max_abs(xm));
    r.files["x_naturality.csv"] = naturality_csv(xm);
  }

  r.files["tail.csv"] = tail_report_csv(tail);
  r.files["naturality.csv"] = naturality_csv(mismatch);
  r.files["checks.csv"] = checks_csv(checks);
  ordered_json extra;
  extra["epsilon"] = tail.epsilon;
  r.summary = finish(r, c, spec, v, extra);
  return r;
}

CommandResult converge_cmd(const RunConfig& c, const ModelSpec& spec) {
  const std::uint64_t seed = require_seed(c);
  const auto grids = dyadic_grids(c.depth_min, c.depth_max);
  McStudyOptions mc;
  mc.path_count = c.paths;
  mc.seed = seed;
  mc.estimator = CondExpEstimator::parse(c.estimator);
  mc.workers = c.workers;
  if (is_mc_model(spec) && c.paths < 2 * kSeGroups) {
    throw DomainError("Monte Carlo studies need --paths >= " + std::to_string(2 * kSeGroups));
  }
  const RefinementStudy study = compensator_convergence(spec, grids, mc);
  const ConvergenceReport rep = report_convergence(study);

  CommandResult r;
  Verdicts v;
  double worst_dev = 0.0;
  double worst_t = 0.0;
  for (const auto& row : study.rows) {
    if (row.target_deviation) worst_dev = std::max(worst_dev, *row.target_deviation);
    if (row.residual_max_abs_t) worst_t = std::max(worst_t, *row.residual_max_abs_t);
  }
  if (study.target.known()) v.add("target", rep.target_pass, worst_dev);
  v.add("invariants", rep.invariants_pass, rep.invariants_pass ? 0.0 : 1.0);
  if (study.monte_carlo) {
    v.add("residual-martingale", worst_t <= kResidualTLimit, worst_t);
  } else {
    const double worst_delta = rep.deltas.empty() ? 0.0 : *std::max_element(rep.deltas.begin(), rep.deltas.end());
    v.add("deltas-decreasing", rep.verdict != "not decreasing", worst_delta);
  }
  r.files["refinement.csv"] = refinement_csv(study);
  ordered_json extra;
  extra["model_id"] = study.model_id;
  extra["target"] = to_string(study.target);
  extra["verdict"] = rep.verdict;
  extra["deltas"] = rep.deltas;
  r.summary = finish(r, c, spec, v, extra);
  return r;
}

CommandResult audit_cmd(const RunConfig& c, const ModelSpec& spec) {
  const std::uint64_t seed = require_seed(c);
  if (!is_finite_model(spec)) {
    throw ModelError(std::string("audit needs a finite model, got ") + to_string(spec.kind));
  }
  const std::size_t atoms = spec.kind == ModelKind::binary_tree
                                ? (spec.steps >= 63 ? SIZE_MAX : std::size_t{1} << spec.steps)
                                : spec.probs.size();
  if (atoms > kAuditMaxAtoms) {
    throw ResourceError("audit supports at most " + std::to_string(kAuditMaxAtoms) +
                        " atoms; model has " + (atoms == SIZE_MAX ? std::string("more") : std::to_string(atoms)));
  }
  const AdaptedProcess x = instantiate_finite(spec);
  const AuditReport rep = doleans_dade_audit(x.shared_filtration(), c.trials, seed, c.tol);
  CommandResult r;
  Verdicts v;
  v.add("predictable-iff-natural", rep.off_diagonal_zero(),
        static_cast<double>(rep.predictable_not_natural() + rep.natural_not_predictable()));
  r.files["audit.csv"] = audit_csv(rep);
  ordered_json extra;
  extra["counts"] = {{"predictable_natural", rep.predictable_natural()},
                     {"predictable_not_natural", rep.predictable_not_natural()},
                     {"natural_not_predictable", rep.natural_not_predictable()},
                     {"neither", rep.neither()}};
  r.summary = finish(r, c, spec, v, extra);
  return r;
}

CommandResult dump_model_cmd(const RunConfig& c, const ModelSpec& spec) {
  CommandResult r;
  r.files["model.json"] = dump_model(spec);
  r.summary = finish(r, c, spec, Verdicts{});
  return r;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ValidationError("cannot write '" + path.string() + "'");
  f << contents;
  if (!f) throw ValidationError("failed writing '" + path.string() + "'");
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::monotonicity:
    case ErrorKind::not_submartingale:
    case ErrorKind::not_martingale:
    case ErrorKind::consistency:
    case ErrorKind::malformed_decomposition: return kExitCheckFailed;
    case ErrorKind::dimension:
    case ErrorKind::validation:
    case ErrorKind::domain:
    case ErrorKind::model:
    case ErrorKind::resource: return kExitInputError;
  }
  return kExitInputError;
}

CommandResult run_command(const RunConfig& config) {
  if (!(config.tol > 0.0) || !std::isfinite(config.tol)) throw ValidationError("--tol must be > 0");
  if (config.depth_min > config.depth_max || config.depth_max > kMaxDepth) {
    throw DomainError("--depths must satisfy 0 <= a <= b <= " + std::to_string(kMaxDepth) + ", got " +
                      std::to_string(config.depth_min) + ".." + std::to_string(config.depth_max));
  }
  const ModelSpec spec = load_model(config.model);
  if (config.command == "decompose") return decompose_cmd(config, spec);
  if (config.command == "verify") return verify_cmd(config, spec);
  if (config.command == "converge") return converge_cmd(config, spec);
  if (config.command == "audit") return audit_cmd(config, spec);
  if (config.command == "dump-model") return dump_model_cmd(config, spec);
  throw ValidationError("unknown command '" + config.command + "'");
}

std::pair<std::size_t, std::size_t> parse_depths(const std::string& text) {
  auto number = [&](std::string_view s) {
    std::size_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw ValidationError("--depths expects a..b with non-negative integers, got '" + text + "'");
    }
    return v;
  };
  const auto sep = text.find("..");
  if (sep == std::string::npos) {
    const std::size_t d = number(text);
    return {d, d};
  }
  return {number(std::string_view(text).substr(0, sep)), number(std::string_view(text).substr(sep + 2))};
}

std::vector<double> parse_levels(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string::npos ? text.size() : comma;
    out.push_back(parse_double(std::string_view(text).substr(start, end - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact Doob decompositions, tail diagnostics and compensator convergence studies"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string depths;
  std::string levels;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model, "Model file (JSON)")->required();
    sub->add_option("--out", out_dir, "Output directory for CSV files and summary.json");
    sub->add_option("--tol", cfg.tol, "Tolerance for the invariant checks");
  };
  auto* decompose = app.add_subcommand("decompose", "Doob decomposition with invariant checks");
  common(decompose);
  auto* verify = app.add_subcommand("verify", "Tail chain, naturality, predictability, uniqueness");
  common(verify);
  verify->add_option("--levels", levels, "Comma separated tail levels k");
  auto* converge = app.add_subcommand("converge", "Grid refinement study over dyadic depths");
  common(converge);
  converge->add_option("--seed", seed, "Random seed")->required();
  converge->add_option("--depths", depths, "Depth range a..b (0..20)");
  converge->add_option("--paths", cfg.paths, "Monte Carlo paths per grid");
  converge->add_option("--estimator", cfg.estimator, "analytic | binning:<bins> | regression:<degree>");
  converge->add_option("--workers", cfg.workers, "Simulation threads (0 = hardware)");
  auto* audit = app.add_subcommand("audit", "Predictable versus natural contingency table");
  common(audit);
  audit->add_option("--seed", seed, "Random seed")->required();
  audit->add_option("--trials", cfg.trials, "Number of random increasing processes");
  auto* dump = app.add_subcommand("dump-model", "Print the canonical form of a model file");
  common(dump);

  std::vector<std::string> argv_store{"doobkit"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    cfg.command = app.get_subcommands().front()->get_name();
    if (!out_dir.empty()) cfg.out = out_dir;
    const CLI::Option* seed_opt = app.get_subcommands().front()->get_option_no_throw("--seed");
    if (seed_opt != nullptr && seed_opt->count() > 0) cfg.seed = seed;
    if (!depths.empty()) std::tie(cfg.depth_min, cfg.depth_max) = parse_depths(depths);
    if (!levels.empty()) cfg.levels = parse_levels(levels);

    const CommandResult result = run_command(cfg);
    if (cfg.out) {
      std::filesystem::create_directories(*cfg.out);
      for (const auto& [name, contents] : result.files) write_file(*cfg.out / name, contents);
      write_file(*cfg.out / "summary.json", result.summary);
    }
    if (cfg.command == "dump-model" && !cfg.out) {
      out << result.files.at("model.json");
    } else {
      out << result.summary;
    }
    if (result.exit_code != kExitOk) err << "doobkit: " << cfg.command << ": a check failed\n";
    return result.exit_code;
  } catch (const Error& e) {
    err << "doobkit: " << to_string(e.kind()) << " error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "doobkit: io error: " << e.what() << "\n";
    return kExitInputError;
  }
}

}  // namespace doobkit::cli
