#pragma once

// CSV serialization with fixed column sets. Doubles are written in the
// shortest decimal form that parses back to the same value, so outputs are
// diffable and byte-stable across runs.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "doobkit/classd.hpp"
#include "doobkit/doob.hpp"
#include "doobkit/process.hpp"
#include "doobkit/refine.hpp"

namespace doobkit {

/// Shortest round-trip representation; "nan", "inf", "-inf" otherwise.
std::string format_double(double v);
/// Inverse of format_double for finite values; ValidationError on junk.
double parse_double(std::string_view text);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row(std::vector<std::string> cells);
  std::size_t row_count() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Columns: time,atom,value (one row per grid time and atom).
std::string process_csv(const AdaptedProcess& x);
/// Columns: invariant,max_violation,passed.
std::string checks_csv(std::span<const InvariantCheck> checks);
/// Columns: k,chain1,chain2,chain3,chain4,chain5,markov_lhs,markov_rhs.
std::string tail_report_csv(const TailReport& report);
/// Columns: depth,grid_size,a_terminal_mean,a_terminal_sd,a_terminal_min,
/// a_terminal_max,a_terminal_se,delta_to_previous,delta_se,target_deviation,
/// target_pass,invariants_passed,residual_max_abs_t,estimator_fallback.
/// Missing optional values are written as empty cells.
std::string refinement_csv(const RefinementStudy& study);
/// Columns: predictable,natural,count (four rows).
std::string audit_csv(const AuditReport& report);

}  // namespace doobkit
