#pragma once

// Scenario files drive `simulate`: one synthetic defect plus the measurements
// to generate from it. Every output carries the seed and RNG name.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace defectspec::cli {

struct SimulateOptions {
  std::string out_dir;
  std::optional<std::uint64_t> seed;  ///< overrides the scenario's seed
  double truncation_tolerance = 1e-9;
};

/// Writes the scenario's outputs into `out_dir`; returns the written paths in order.
std::vector<std::string> run_scenario(const nlohmann::json& scenario, const SimulateOptions& options);

}  // namespace defectspec::cli
