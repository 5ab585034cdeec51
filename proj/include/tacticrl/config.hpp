#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tacticrl/search.hpp"
#include "tacticrl/trainers.hpp"

namespace tacticrl {

struct ReportConfig {
  std::vector<std::size_t> budgets = {0, 1, 2, 5, 10, 20, 50, 100};
};

/// Everything a subcommand can be configured with. Files are sectioned
/// `key = value` text:
///
///   [run]        seed, out_dir
///   [corpus]     n, max_depth, atoms, library_size, novel_holdout, seed, ...
///   [policy]     embed, hidden
///   [prompt]     retrieve_k, max_tactic_len
///   [reward]     softplus_beta
///   [train.sft]  steps, batch_size, learning_rate, ...
///   [train.dpo]  beta, strategy, online, dropout_p, width, sync_every, ...
///   [train.grpo] clip_epsilon, kl_beta, width, sync_every, dropout_p, ...
///   [search]     width, max_expansions, max_depth, record_time
///   [report]     budgets (comma separated)
///
/// `#` and `;` start comments. Unknown sections and keys are errors.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "runs";
  CorpusConfig corpus;
  PolicyDims policy;
  PromptConfig prompt;
  RewardConfig reward;
  SftConfig sft;
  DpoConfig dpo;
  GrpoConfig grpo;
  SearchConfig search;
  ReportConfig report;

  /// Pushes the run seed into every trainer config.
  void propagate_seed();
};

/// Throws ConfigError with `path:line` on syntax errors, unknown keys and
/// bad values, and MissingInput if the file cannot be read.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& origin);

/// Every key with its current value, section by section; parses back to an
/// equal config.
std::string render_config(const RunConfig& config);

/// Checks cross-field invariants; throws ConfigError.
void validate_config(const RunConfig& config);

}  // namespace tacticrl
