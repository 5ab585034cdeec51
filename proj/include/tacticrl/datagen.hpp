#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tacticrl/beam.hpp"
#include "tacticrl/corpus.hpp"
#include "tacticrl/premises.hpp"

namespace tacticrl {

struct RewardConfig {
  double softplus_beta = 1.0;
  static constexpr double invalid_score = 0.0;
};

/// (1/beta) * ln(1 + e^(beta x)), evaluated without overflow.
double softplus(double x, double beta);

/// Error -> 0; otherwise softplus(goals_before - goals_after, beta), where a
/// finished proof has zero goals after. Precondition: goals_before >= 1.
double tactic_reward(std::size_t goals_before, const TacticOutcome& outcome, const RewardConfig& config);

/// (r - mean) / population std; all zeros when the std is zero.
std::vector<double> normalize_advantages(std::span<const double> rewards);

/// How prompts are built from a state.
struct PromptConfig {
  std::size_t retrieve_k = 3;
  std::size_t max_tactic_len = 16;
};

/// One gold-proof state of a corpus theorem.
struct StateRef {
  const CorpusEntry* entry = nullptr;
  std::size_t step = 0;

  const ProofState& state() const { return entry->proof.steps[step].state; }
  const std::string& gold_tactic() const { return entry->proof.steps[step].tactic; }
  const PremiseLibrary& library() const { return entry->theorem.library; }
  const std::string& theorem() const { return entry->theorem.name; }
};

/// All gold-proof states of a split, ordered by (theorem name, step).
std::vector<StateRef> gold_states(const Corpus& corpus, Split split);

/// Retrieved premises for the state (no dropout).
std::vector<Premise> state_premises(const StateRef& ref, const PromptConfig& config);
Prompt base_prompt(const StateRef& ref, const PromptConfig& config);

/// Seed for per-state randomness (premise dropout, random pairing). `round`
/// is the sampler-refresh count; round 0 matches offline generation.
std::uint64_t state_seed(std::uint64_t seed, const StateRef& ref, std::uint64_t round);

struct TacticGroup {
  std::string theorem;
  std::size_t step = 0;
  Prompt prompt;
  ProofState state;
  /// Sampled tactics with per-token log-probs under the sampling policy.
  std::vector<ScoredTactic> tactics;
  std::vector<TacticOutcome> outcomes;
  std::vector<double> rewards;
  std::vector<double> advantages;
  bool gold_appended = false;

  std::size_t size() const { return tactics.size(); }
};

/// Beam-samples `width` tactics under `sampler`, appends the gold tactic last
/// when its surface string is absent, verifies each against `state`, and
/// fills rewards and advantages.
TacticGroup build_group(const ProofState& state, const Prompt& prompt, const PremiseLibrary& library,
                        const PolicyParams& sampler, const std::string& gold_tactic, std::size_t width,
                        std::size_t max_len, const RewardConfig& config);

enum class PairingStrategy { Random, ZeroAccuracy, Hard };

std::string_view to_string(PairingStrategy s);
PairingStrategy parse_pairing_strategy(std::string_view s);

/// A proposal in A_t order (likelihood-sorted, gold possibly last) with its
/// sampler log-likelihood and verifier verdict.
struct RankedTactic {
  std::string text;
  double logprob = 0;
  bool valid = false;
};

struct PairIndex {
  std::size_t positive;
  std::size_t negative;
  friend bool operator==(const PairIndex&, const PairIndex&) = default;
};

/// Pairs negatives with positives, indices into `proposals`, in emission order.
///  random:        each negative gets a uniformly drawn positive.
///  zero_accuracy: each negative, in order, takes the first positive in the
///                 current positive list whose likelihood is below its own;
///                 that positive then moves to the end of the list.
///  hard:          the same scan from the low-likelihood end; the chosen
///                 positive moves to the opposite end of the list.
std::vector<PairIndex> pair_proposals(const std::vector<RankedTactic>& proposals, PairingStrategy strategy,
                                      Rng& rng);

struct PreferenceTriplet {
  std::string prompt;
  std::string chosen;
  std::string rejected;
  std::string theorem;
  std::size_t step = 0;
  friend bool operator==(const PreferenceTriplet&, const PreferenceTriplet&) = default;
};

struct DpoDataConfig {
  PairingStrategy strategy = PairingStrategy::ZeroAccuracy;
  double dropout_p = 0.3;
  std::size_t width = 8;
  std::uint64_t seed = 1;
};

/// A_t for one state: beam proposals plus the gold tactic when absent, each
/// verified. Shared by DPO curation and reporting.
std::vector<RankedTactic> rank_proposals(const StateRef& ref, const PolicyParams& sampler,
                                         const PromptConfig& prompt_config, std::size_t width);

/// Triplets for one state; `round` feeds state_seed.
std::vector<PreferenceTriplet> curate_state(const StateRef& ref, const PolicyParams& sampler,
                                            const DpoDataConfig& config, const PromptConfig& prompt_config,
                                            std::uint64_t round);

std::vector<PreferenceTriplet> curate_dpo_dataset(const std::vector<StateRef>& states, const PolicyParams& sampler,
                                                  const DpoDataConfig& config, const PromptConfig& prompt_config);

/// File header shared by triplet and group files.
struct DatasetHeader {
  std::string sampler_checkpoint_id;
  std::uint64_t seed = 0;
  std::string strategy;
  double dropout_p = 0;
};

void write_triplets(const std::string& path, const DatasetHeader& header,
                    const std::vector<PreferenceTriplet>& triplets);
std::vector<PreferenceTriplet> read_triplets(const std::string& path, DatasetHeader* header = nullptr);

void write_groups(const std::string& path, const DatasetHeader& header, const std::vector<TacticGroup>& groups);

}  // namespace tacticrl
