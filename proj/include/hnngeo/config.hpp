#pragma once

// Run configuration shared by every command: a JSON file whose fields can be
// overridden from the command line.
//
// {
//   "preset": "bs:1:2",                    // or "presentation": {...}
//   "tree_radius": 5,
//   "y_model": {"grid_step": 0.05, "window": {"s_max": 6, "x_max": 32},
//               "base_metric": [["1"]]},    // optional, rational entries
//   "sample_budget": 300,
//   "seed": 1,
//   "p_values": [2, 4],
//   "output_dir": "out"                     // empty: no files written
// }

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hnngeo/presentation.hpp"
#include "hnngeo/y_space.hpp"
#include "json.hpp"

namespace hnngeo {

struct RunConfig {
  std::string preset = "bs:1:2";
  std::optional<nlohmann::json> presentation_json;  // takes precedence over preset
  int tree_radius = 5;
  double grid_step = 0.05;
  YWindow window{6, 32.0};
  std::optional<RatMatrix> base_metric;
  std::size_t sample_budget = 300;
  std::uint64_t seed = 1;
  std::vector<double> p_values{2.0};
  std::string output_dir;

  // Throws ConfigError on non-positive budgets or p <= 1.
  void validate() const;
  Presentation presentation() const;
};

RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);
nlohmann::json to_json(const RunConfig& config);

}  // namespace hnngeo
