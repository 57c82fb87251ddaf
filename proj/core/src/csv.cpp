#include "doobkit/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <optional>
#include <system_error>

#include "doobkit/errors.hpp"

namespace doobkit {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // also folds -0
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ValidationError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw DimensionError("csv row has " + std::to_string(cells.size()) + " cells, header has " +
                         std::to_string(header_.size()));
  }
  rows_.push_back(std::move(cells));
  return *this;
}

namespace {

void append_line(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out += ',';
    out += cells[i];
  }
  out += '\n';
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::string flag(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string CsvTable::str() const {
  std::string out;
  append_line(out, header_);
  for (const auto& r : rows_) append_line(out, r);
  return out;
}

std::string process_csv(const AdaptedProcess& x) {
  CsvTable t({"time", "atom", "value"});
  const auto& grid = x.filtration().grid();
  for (std::size_t k = 0; k < x.time_count(); ++k) {
    const std::string time = format_double(grid[k]);
    for (std::size_t w = 0; w < x.atom_count(); ++w) {
      t.row({time, std::to_string(w), format_double(x.value(k, w))});
    }
  }
  return t.str();
}

std::string checks_csv(std::span<const InvariantCheck> checks) {
  CsvTable t({"invariant", "max_violation", "passed"});
  for (const auto& c : checks) t.row({c.name, format_double(c.max_violation), flag(c.passed)});
  return t.str();
}

std::string tail_report_csv(const TailReport& report) {
  CsvTable t({"k", "chain1", "chain2", "chain3", "chain4", "chain5", "markov_lhs", "markov_rhs"});
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    std::vector<std::string> cells{format_double(report.levels[i])};
    for (double term : report.chains[i].terms) cells.push_back(format_double(term));
    cells.push_back(format_double(report.markov_lhs[i]));
    cells.push_back(format_double(report.markov_rhs[i]));
    t.row(std::move(cells));
  }
  return t.str();
}

std::string refinement_csv(const RefinementStudy& study) {
  CsvTable t({"depth", "grid_size", "a_terminal_mean", "a_terminal_sd", "a_terminal_min",
              "a_terminal_max", "a_terminal_se", "delta_to_previous", "delta_se",
              "target_deviation", "target_pass", "invariants_passed", "residual_max_abs_t",
              "estimator_fallback"});
  for (const auto& r : study.rows) {
    t.row({r.depth ? std::to_string(*r.depth) : std::string(), std::to_string(r.grid_size),
           format_double(r.a_terminal_mean), format_double(r.a_terminal_sd),
           format_double(r.a_terminal_min), format_double(r.a_terminal_max),
           format_double(r.a_terminal_se), opt(r.delta_to_previous), format_double(r.delta_se),
           opt(r.target_deviation), r.target_pass ? flag(*r.target_pass) : std::string(),
           flag(r.invariants_passed), opt(r.residual_max_abs_t), flag(r.estimator_fallback)});
  }
  return t.str();
}

std::string audit_csv(const AuditReport& report) {
  CsvTable t({"predictable", "natural", "count"});
  for (int p = 1; p >= 0; --p) {
    for (int n = 1; n >= 0; --n) {
      t.row({flag(p == 1), flag(n == 1), std::to_string(report.counts[p][n])});
    }
  }
  return t.str();
}

}  // namespace doobkit
