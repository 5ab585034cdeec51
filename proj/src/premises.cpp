#include "tacticrl/premises.hpp"

#include <algorithm>
#include <bit>

namespace tacticrl {

std::vector<Premise> retrieve_premises(const ProofState& state, const PremiseLibrary& library,
                                       std::size_t k) {
  const std::uint8_t target_atoms = state.goals.front().target.atom_mask();
  struct Ranked {
    int score;
    const Premise* premise;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(library.entries.size());
  for (const auto& p : library.entries) {
    int score = std::popcount(static_cast<unsigned>(final_conclusion(p.formula).atom_mask() & target_atoms));
    ranked.push_back({score, &p});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.premise->name < b.premise->name;
  });
  std::vector<Premise> out;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) out.push_back(*ranked[i].premise);
  return out;
}

std::vector<Premise> dropout_premises(const std::vector<Premise>& premises, double p, Rng& rng) {
  std::vector<Premise> kept;
  for (const auto& premise : premises) {
    if (uniform01(rng) >= p) kept.push_back(premise);
  }
  return kept;
}

Prompt render_prompt(const ProofState& state, const std::vector<Premise>& premises) {
  std::string text;
  for (const auto& p : premises) {
    text += p.name;
    text += " : ";
    text += render(p.formula);
    text += '\n';
  }
  text += "---\n";
  const Goal& goal = state.goals.front();
  for (const auto& h : goal.hypotheses) {
    text += h.name;
    text += " : ";
    text += render(h.formula);
    text += '\n';
  }
  text += "|- ";
  text += render(goal.target);
  return Prompt{std::move(text)};
}

}  // namespace tacticrl
