#include "tacticrl/proof_state.hpp"

#include "tacticrl/errors.hpp"

namespace tacticrl {

const Hypothesis* Goal::find(std::string_view name) const {
  for (const auto& h : hypotheses) {
    if (h.name == name) return &h;
  }
  return nullptr;
}

ProofState ProofState::initial(const Formula& statement) {
  return ProofState{{Goal{{}, statement}}};
}

const Premise* PremiseLibrary::find(std::string_view name) const {
  for (const auto& p : entries) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::string_view to_string(TacticError e) {
  switch (e) {
    case TacticError::ParseError: return "ParseError";
    case TacticError::UnknownName: return "UnknownName";
    case TacticError::Inapplicable: return "Inapplicable";
    case TacticError::Timeout: return "Timeout";
  }
  return "?";
}

std::size_t goals_after(const TacticOutcome& o) {
  if (const auto* a = std::get_if<outcome::Applied>(&o)) return a->next.goals.size();
  return 0;
}

std::string fresh_name(const Goal& goal, std::string_view base) {
  std::string name(base);
  for (int k = 1; goal.find(name) != nullptr; ++k) name = std::string(base) + std::to_string(k);
  return name;
}

namespace {

using outcome::Applied;
using outcome::ProofFinished;

TacticOutcome error(TacticError kind) { return outcome::Error{kind}; }

/// Replace the first goal of `state` with `replacement` (possibly empty).
TacticOutcome replace_first(const ProofState& state, std::vector<Goal> replacement) {
  ProofState next;
  next.goals.reserve(state.goals.size() - 1 + replacement.size());
  for (auto& g : replacement) next.goals.push_back(std::move(g));
  next.goals.insert(next.goals.end(), state.goals.begin() + 1, state.goals.end());
  if (next.goals.empty()) return ProofFinished{};
  return Applied{std::move(next)};
}

std::optional<Formula> resolve(const Goal& goal, const PremiseLibrary& library, std::string_view name) {
  if (const auto* h = goal.find(name)) return h->formula;
  if (const auto* p = library.find(name)) return p->formula;
  return std::nullopt;
}

/// Premises A1..Ak for the smallest k with `f = A1 -> ... -> Ak -> target`.
std::optional<std::vector<Formula>> match_conclusion(const Formula& f, const Formula& target) {
  std::vector<Formula> premises;
  Formula cur = f;
  while (true) {
    if (cur == target) return premises;
    if (!cur.is(Connective::Implies)) return std::nullopt;
    premises.push_back(cur.left());
    cur = cur.right();
  }
}

struct Executor {
  const ProofState& state;
  const PremiseLibrary& library;
  const Goal& goal = state.goals.front();

  TacticOutcome operator()(const tactic::Intro& t) const {
    if (!goal.target.is(Connective::Implies)) return error(TacticError::Inapplicable);
    if (goal.find(t.name) != nullptr) return error(TacticError::Inapplicable);
    Goal g = goal;
    g.hypotheses.push_back({t.name, goal.target.left()});
    g.target = goal.target.right();
    return replace_first(state, {std::move(g)});
  }

  TacticOutcome operator()(const tactic::Split&) const {
    if (!goal.target.is(Connective::And)) return error(TacticError::Inapplicable);
    Goal a{goal.hypotheses, goal.target.left()};
    Goal b{goal.hypotheses, goal.target.right()};
    return replace_first(state, {std::move(a), std::move(b)});
  }

  TacticOutcome operator()(const tactic::Left&) const { return pick_side(true); }
  TacticOutcome operator()(const tactic::Right&) const { return pick_side(false); }

  TacticOutcome pick_side(bool left) const {
    if (!goal.target.is(Connective::Or)) return error(TacticError::Inapplicable);
    Goal g{goal.hypotheses, left ? goal.target.left() : goal.target.right()};
    return replace_first(state, {std::move(g)});
  }

  TacticOutcome operator()(const tactic::Exact& t) const {
    auto f = resolve(goal, library, t.name);
    if (!f) return error(TacticError::UnknownName);
    if (!(*f == goal.target)) return error(TacticError::Inapplicable);
    return replace_first(state, {});
  }

  TacticOutcome operator()(const tactic::Assumption&) const {
    for (const auto& h : goal.hypotheses) {
      if (h.formula == goal.target) return replace_first(state, {});
    }
    return error(TacticError::Inapplicable);
  }

  TacticOutcome operator()(const tactic::Apply& t) const {
    auto f = resolve(goal, library, t.name);
    if (!f) return error(TacticError::UnknownName);
    auto premises = match_conclusion(*f, goal.target);
    if (!premises) return error(TacticError::Inapplicable);
    std::vector<Goal> subgoals;
    subgoals.reserve(premises->size());
    for (auto& p : *premises) subgoals.push_back(Goal{goal.hypotheses, std::move(p)});
    return replace_first(state, std::move(subgoals));
  }

  TacticOutcome operator()(const tactic::Cases& t) const {
    std::size_t index = 0;
    while (index < goal.hypotheses.size() && goal.hypotheses[index].name != t.name) ++index;
    if (index == goal.hypotheses.size()) {
      return error(library.find(t.name) ? TacticError::Inapplicable : TacticError::UnknownName);
    }
    const Formula& f = goal.hypotheses[index].formula;
    if (f.is(Connective::Or)) {
      Goal a = goal;
      Goal b = goal;
      a.hypotheses[index].formula = f.left();
      b.hypotheses[index].formula = f.right();
      return replace_first(state, {std::move(a), std::move(b)});
    }
    if (f.is(Connective::And)) {
      Goal g = goal;
      g.hypotheses.erase(g.hypotheses.begin() + static_cast<std::ptrdiff_t>(index));
      std::string left_name = fresh_name(g, t.name + "_l");
      g.hypotheses.insert(g.hypotheses.begin() + static_cast<std::ptrdiff_t>(index), {left_name, f.left()});
      std::string right_name = fresh_name(g, t.name + "_r");
      g.hypotheses.insert(g.hypotheses.begin() + static_cast<std::ptrdiff_t>(index) + 1,
                          {right_name, f.right()});
      return replace_first(state, {std::move(g)});
    }
    return error(TacticError::Inapplicable);
  }

  TacticOutcome operator()(const tactic::Trivial&) const {
    if (!goal.target.is(Connective::Top)) return error(TacticError::Inapplicable);
    return replace_first(state, {});
  }
};

void render_goal(const Goal& g, std::string& out) {
  for (const auto& h : g.hypotheses) {
    out += h.name;
    out += " : ";
    out += render(h.formula);
    out += '\n';
  }
  out += "|- ";
  out += render(g.target);
}

}  // namespace

TacticOutcome apply_tactic(const ProofState& state, const ParsedTactic& tactic,
                           const PremiseLibrary& library) {
  return std::visit(Executor{state, library}, tactic);
}

TacticOutcome apply_tactic(const ProofState& state, std::string_view tactic_text,
                           const PremiseLibrary& library) {
  ParsedTactic parsed;
  try {
    parsed = parse_tactic(tactic_text);
  } catch (const ParseError&) {
    return error(TacticError::ParseError);
  }
  return apply_tactic(state, parsed, library);
}

std::string render_state(const ProofState& state) {
  std::string out;
  for (std::size_t i = 0; i < state.goals.size(); ++i) {
    if (i > 0) out += "\n\n";
    render_goal(state.goals[i], out);
  }
  return out;
}

}  // namespace tacticrl
