#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tacticrl/proof_state.hpp"
#include "tacticrl/rng.hpp"

namespace tacticrl {

struct Theorem {
  std::string name;
  Formula statement;
  PremiseLibrary library;
};

struct ProofStep {
  ProofState state;
  std::string tactic;
};

struct GoldProof {
  std::vector<ProofStep> steps;

  std::size_t length() const { return steps.size(); }
  std::vector<std::string> tactics() const;
};

enum class Split { Train, Validation, TestRandom, TestNovel };

std::string_view to_string(Split s);
Split parse_split(std::string_view s);

struct CorpusConfig {
  std::size_t n = 2000;
  int max_depth = 4;
  int atoms = 4;
  std::size_t library_size = 24;
  std::size_t novel_holdout = 6;
  std::uint64_t seed = 7;
  /// train / validation / test-random / test-novel
  std::array<double, 4> splits = {0.80, 0.05, 0.10, 0.05};
  int oracle_depth = 8;
  std::size_t node_budget = 20000;
  std::size_t min_proof_length = 2;
  std::size_t attempt_factor = 100;
};

struct CorpusEntry {
  Theorem theorem;
  GoldProof proof;
  Split split = Split::Train;
};

struct Corpus {
  CorpusConfig config;
  std::vector<Premise> lemma_pool;
  std::vector<std::string> held_out;
  /// Sorted by theorem name.
  std::vector<CorpusEntry> entries;

  std::vector<const CorpusEntry*> split(Split s) const;
};

/// Random formula of depth <= max_depth. A node at level l (root = 1) is a
/// leaf with probability l / max_depth; leaves are T or F with probability
/// 0.1, otherwise a uniform atom. Inner nodes pick &, |, -> uniformly.
Formula sample_formula(Rng& rng, int max_depth, int atom_count);

/// Every syntactically distinct tactic the oracle considers at `goal`, in
/// enumeration order: grammar keyword order, identifiers by scope
/// (hypotheses, then library). `intro` uses the canonical fresh name.
std::vector<ParsedTactic> enumerate_tactics(const Goal& goal, const PremiseLibrary& library);

/// Canonical fresh hypothesis name used by the oracle: `h`, then `h1`, `h2`, ...
std::string canonical_intro_name(const Goal& goal);

/// Iterative-deepening search for the first shortest proof of length
/// <= max_depth; `node_budget` caps the number of tactic applications.
std::optional<GoldProof> brute_force_prove(const Formula& statement, const PremiseLibrary& library,
                                           int max_depth, std::size_t node_budget);

/// Throws GenerationExhausted when the attempt cap is hit.
Corpus generate_corpus(const CorpusConfig& config);

/// True iff the tactics drive the initial state to ProofFinished with every
/// intermediate outcome Applied (and, for a GoldProof, every recorded state
/// matches the replayed one).
bool replay_proof(const Theorem& theorem, const std::vector<std::string>& tactics);
bool replay_proof(const Theorem& theorem, const GoldProof& proof);

/// Rebuilds recorded states from a tactic list; nullopt if replay fails.
std::optional<GoldProof> reconstruct_proof(const Theorem& theorem, const std::vector<std::string>& tactics);

void write_corpus(const Corpus& corpus, const std::string& path);
Corpus read_corpus(const std::string& path);

}  // namespace tacticrl
