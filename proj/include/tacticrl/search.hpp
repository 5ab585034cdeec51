#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tacticrl/datagen.hpp"
#include "tacticrl/jsonl.hpp"

namespace tacticrl {

/// Proposes scored tactics for a state; the prompt is the state's rendered
/// retrieval prompt.
using TacticProposer = std::function<std::vector<ScoredTactic>(const ProofState&, const Prompt&)>;

TacticProposer policy_proposer(const PolicyParams& params, std::size_t width, std::size_t max_len);

struct SearchConfig {
  std::size_t width = 8;
  std::size_t max_expansions = 100;
  std::size_t max_depth = 12;
  /// Wall-clock durations make result files machine-dependent; off by default.
  bool record_time = false;
  PromptConfig prompt;
};

struct SearchResult {
  std::string theorem;
  bool proved = false;
  std::optional<std::vector<std::string>> proof;
  std::size_t expansions = 0;
  std::size_t tactics_attempted = 0;
  std::optional<double> duration_ms;
  /// Scores of expanded nodes in pop order.
  std::vector<double> popped_scores;
};

/// Best-first search on cumulative log-probability, ties by path. Error
/// outcomes are dropped, states already seen (by rendering) are not queued
/// again, and nodes at max_depth are not expanded.
SearchResult best_first_search(const TacticProposer& proposer, const Theorem& theorem, const SearchConfig& config);
SearchResult best_first_search(const PolicyParams& params, const Theorem& theorem, const SearchConfig& config);

struct PassAtOneReport {
  std::size_t theorems = 0;
  std::size_t proved = 0;
  double pass_at_1 = 0;
  bool empty = true;
  std::vector<SearchResult> results;
};

PassAtOneReport eval_pass_at_1(const TacticProposer& proposer, const std::vector<const CorpusEntry*>& theorems,
                               const SearchConfig& config);
PassAtOneReport eval_pass_at_1(const PolicyParams& params, const std::vector<const CorpusEntry*>& theorems,
                               const SearchConfig& config);

struct RankingStats {
  double precision = 0;
  double average_precision = 0;
  double reciprocal_rank = 0;
};

/// Precision over `k` slots, plus AP and RR with valid tactics as relevant.
RankingStats ranking_stats(const std::vector<bool>& valid, std::size_t k);

struct StepwiseReport {
  std::size_t states = 0;
  double prec_at_8 = 0;
  double map = 0;
  double mrr = 0;
  double mean_valid_length = 0;
  double mean_length = 0;
  double pct_zero_precision = 0;
};

StepwiseReport stepwise_metrics(const PolicyParams& params, const std::vector<StateRef>& states,
                                const PromptConfig& prompt_config, std::size_t width = 8);

struct LengthRow {
  std::string theorem;
  std::size_t len_a = 0;
  std::size_t len_b = 0;
  long delta = 0;
};

struct ProofLengthReport {
  std::vector<LengthRow> rows;
  std::size_t a_only = 0;
  std::size_t b_only = 0;
  std::size_t neither = 0;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> joint;
};

/// Throws MismatchedSplits when the theorem sets differ.
ProofLengthReport proof_length_report(const std::vector<SearchResult>& a, const std::vector<SearchResult>& b);

struct CurvePoint {
  double budget = 0;
  std::size_t count = 0;
};

/// Proved theorems with expansions <= b, for each b.
std::vector<CurvePoint> budget_curve(const std::vector<SearchResult>& results, const std::vector<std::size_t>& budgets);
/// Proved theorems with duration_ms <= t; results without a duration never count.
std::vector<CurvePoint> time_curve(const std::vector<SearchResult>& results, const std::vector<double>& limits_ms);

void write_results(const std::string& path, const std::vector<SearchResult>& results);
std::vector<SearchResult> read_results(const std::string& path);

Json to_json(const StepwiseReport& r);
Json to_json(const PassAtOneReport& r);

void write_length_csv(const std::string& path, const ProofLengthReport& r);
void write_joint_csv(const std::string& path, const ProofLengthReport& r);
void write_curve_csv(const std::string& path, const std::vector<CurvePoint>& curve);

}  // namespace tacticrl
