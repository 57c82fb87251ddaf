#pragma once

// JSON model files.
//
//   {
//     "kind": "binary-tree",
//     "parameters": { "steps": 3, "process": "walk-squared" },
//     "known_compensator": "identity-time"
//   }
//
// Parameters per kind (defaults in brackets):
//   binary-tree          steps, up_prob [0.5], scaling unit|variance [unit],
//                        process walk|walk-squared|abs-walk|drift [walk-squared],
//                        rate [1] (drift slope)
//   recombining-lattice  process [walk-squared], rate [1]
//   poisson-lattice      rate [1]
//   mc-poisson           rate [1]
//   mc-gaussian-walk-squared, mc-gaussian-walk   (none)
//   explicit             probabilities, times, partitions (atom labels per
//                        time), values (one row per time)
// known_compensator is none | identity-time | linear(<rate>); when absent the
// kind's default is used.

#include <filesystem>
#include <string>
#include <string_view>

#include "doobkit/model.hpp"

namespace doobkit::cli {

/// Parses and validates. Syntax errors carry the line and column, field
/// errors the field path; both throw ValidationError.
ModelSpec parse_model(std::string_view text);
ModelSpec load_model(const std::filesystem::path& path);

/// Canonical JSON; parse_model(dump_model(m)) == m for every parsed model.
std::string dump_model(const ModelSpec& spec);

}  // namespace doobkit::cli
