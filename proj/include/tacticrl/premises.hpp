#pragma once

#include <string>
#include <vector>

#include "tacticrl/proof_state.hpp"
#include "tacticrl/rng.hpp"

namespace tacticrl {

/// Top-k library entries ranked by atoms shared between the entry's final
/// conclusion and the first goal's target; ties by ascending name.
std::vector<Premise> retrieve_premises(const ProofState& state, const PremiseLibrary& library,
                                       std::size_t k);

/// Keeps each premise independently with probability 1 - p, preserving order.
std::vector<Premise> dropout_premises(const std::vector<Premise>& premises, double p, Rng& rng);

struct Prompt {
  std::string text;
  friend bool operator==(const Prompt&, const Prompt&) = default;
};

/// Premise lines `name : formula`, a `---` separator, the first goal's
/// hypothesis lines, and `|- target`, joined by newlines.
Prompt render_prompt(const ProofState& state, const std::vector<Premise>& premises);

}  // namespace tacticrl
