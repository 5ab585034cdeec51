#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tacticrl/formula.hpp"
#include "tacticrl/tactic.hpp"

namespace tacticrl {

struct Hypothesis {
  std::string name;
  Formula formula;
  friend bool operator==(const Hypothesis&, const Hypothesis&) = default;
};

struct Goal {
  std::vector<Hypothesis> hypotheses;
  Formula target;

  const Hypothesis* find(std::string_view name) const;
  friend bool operator==(const Goal&, const Goal&) = default;
};

/// Open goals in order; tactics address `goals.front()`. Empty means proved.
struct ProofState {
  std::vector<Goal> goals;

  static ProofState initial(const Formula& statement);
  bool finished() const { return goals.empty(); }
  friend bool operator==(const ProofState&, const ProofState&) = default;
};

struct Premise {
  std::string name;
  Formula formula;
  friend bool operator==(const Premise&, const Premise&) = default;
};

/// Named lemmas usable by `apply` (and `exact`); names are unique.
struct PremiseLibrary {
  std::vector<Premise> entries;

  const Premise* find(std::string_view name) const;
};

enum class TacticError { ParseError, UnknownName, Inapplicable, Timeout };

std::string_view to_string(TacticError e);

namespace outcome {
struct Applied { ProofState next; };
struct ProofFinished {};
struct Error { TacticError kind; };
}  // namespace outcome

using TacticOutcome = std::variant<outcome::Applied, outcome::ProofFinished, outcome::Error>;

inline bool is_valid(const TacticOutcome& o) { return !std::holds_alternative<outcome::Error>(o); }

inline std::size_t goal_count(const ProofState& s) { return s.goals.size(); }

/// Goal count after the outcome; ProofFinished counts as zero.
/// Only meaningful for non-error outcomes.
std::size_t goals_after(const TacticOutcome& o);

/// Runs one tactic against the first goal. Total over all strings: malformed
/// input comes back as an Error outcome, never an exception.
/// Precondition: state has at least one goal.
TacticOutcome apply_tactic(const ProofState& state, std::string_view tactic_text,
                           const PremiseLibrary& library);
TacticOutcome apply_tactic(const ProofState& state, const ParsedTactic& tactic,
                           const PremiseLibrary& library);

/// Full textual rendering of every goal, used as a state key.
std::string render_state(const ProofState& state);

/// Name for a new hypothesis derived from `base`: `base` itself when free,
/// otherwise `base` followed by the smallest positive integer that is free.
std::string fresh_name(const Goal& goal, std::string_view base);

}  // namespace tacticrl
