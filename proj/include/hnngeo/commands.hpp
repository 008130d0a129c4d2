#pragma once

// The batch commands behind the hnngeo executable. Each returns its summary
// JSON, any CSV tables, and the process exit code; nothing here touches the
// filesystem except write_outputs.

#include <string>
#include <utility>
#include <vector>

#include "hnngeo/config.hpp"
#include "hnngeo/y_space.hpp"
#include "json.hpp"

namespace hnngeo {

// Exit codes. Library errors (bad input, budgets) map to kExitError.
inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitError = 3;

struct CommandResult {
  nlohmann::json summary;
  std::vector<std::pair<std::string, std::string>> files;  // (file name, CSV text)
  int exit_code = kExitOk;
};

// Writes every CSV plus <command>.json into dir (created if missing).
void write_outputs(const CommandResult& result, const std::string& dir,
                   const std::string& command);

CommandResult cmd_normal_form(const RunConfig& config, const std::string& word);
// BFS budget is config.tree_radius.
CommandResult cmd_word_length(const RunConfig& config, const std::string& word);
CommandResult cmd_ball_growth(const RunConfig& config);
CommandResult cmd_tree_ball(const RunConfig& config);
CommandResult cmd_y_dist(const RunConfig& config, const YPoint& from, const YPoint& to);
CommandResult cmd_verify_lemma(const RunConfig& config);
CommandResult cmd_probe(const RunConfig& config);
CommandResult cmd_estimate_compression(const RunConfig& config);

}  // namespace hnngeo
