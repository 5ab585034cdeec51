#include "tacticrl/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "tacticrl/errors.hpp"
#include "tacticrl/hash.hpp"
#include "tacticrl/jsonl.hpp"

namespace tacticrl {

double softplus(double x, double beta) {
  const double z = beta * x;
  // ln(1 + e^z) = max(z, 0) + ln(1 + e^-|z|)
  return (std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)))) / beta;
}

double tactic_reward(std::size_t goals_before, const TacticOutcome& outcome, const RewardConfig& config) {
  if (const auto* a = std::get_if<outcome::Applied>(&outcome)) {
    const double delta = static_cast<double>(goals_before) - static_cast<double>(goal_count(a->next));
    return softplus(delta, config.softplus_beta);
  }
  if (std::holds_alternative<outcome::ProofFinished>(outcome))
    return softplus(static_cast<double>(goals_before), config.softplus_beta);
  return RewardConfig::invalid_score;
}

std::vector<double> normalize_advantages(std::span<const double> rewards) {
  std::vector<double> out(rewards.size(), 0.0);
  // Equal rewards can still leave rounding residue around the mean.
  if (std::adjacent_find(rewards.begin(), rewards.end(), std::not_equal_to<>()) == rewards.end()) return out;
  const double n = static_cast<double>(rewards.size());
  double mean = 0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= n;
  const double sd = std::sqrt(var);
  if (!(sd > 0)) return out;
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / sd;
  return out;
}

std::vector<StateRef> gold_states(const Corpus& corpus, Split split) {
  std::vector<StateRef> out;
  for (const CorpusEntry* e : corpus.split(split))
    for (std::size_t i = 0; i < e->proof.steps.size(); ++i) out.push_back({e, i});
  return out;
}

std::vector<Premise> state_premises(const StateRef& ref, const PromptConfig& config) {
  return retrieve_premises(ref.state(), ref.library(), config.retrieve_k);
}

Prompt base_prompt(const StateRef& ref, const PromptConfig& config) {
  return render_prompt(ref.state(), state_premises(ref, config));
}

std::uint64_t state_seed(std::uint64_t seed, const StateRef& ref, std::uint64_t round) {
  std::uint64_t s = derive_seed(derive_seed(seed, ref.theorem()), static_cast<std::uint64_t>(ref.step));
  if (round > 0) s = derive_seed(s, round);
  return s;
}

TacticGroup build_group(const ProofState& state, const Prompt& prompt, const PremiseLibrary& library,
                        const PolicyParams& sampler, const std::string& gold_tactic, std::size_t width,
                        std::size_t max_len, const RewardConfig& config) {
  TacticGroup g;
  g.prompt = prompt;
  g.state = state;
  g.tactics = sample_beam(sampler, prompt, width, max_len);
  const bool present = std::any_of(g.tactics.begin(), g.tactics.end(),
                                   [&](const ScoredTactic& t) { return t.text == gold_tactic; });
  if (!present) {
    g.tactics.push_back(score_tactic(sampler, prompt, gold_tactic));
    g.gold_appended = true;
  }
  const std::size_t before = goal_count(state);
  for (const auto& t : g.tactics) {
    g.outcomes.push_back(apply_tactic(state, t.text, library));
    g.rewards.push_back(tactic_reward(before, g.outcomes.back(), config));
  }
  g.advantages = normalize_advantages(g.rewards);
  return g;
}

std::string_view to_string(PairingStrategy s) {
  switch (s) {
    case PairingStrategy::Random: return "random";
    case PairingStrategy::ZeroAccuracy: return "zero_accuracy";
    case PairingStrategy::Hard: return "hard";
  }
  return "?";
}

PairingStrategy parse_pairing_strategy(std::string_view s) {
  if (s == "random") return PairingStrategy::Random;
  if (s == "zero_accuracy") return PairingStrategy::ZeroAccuracy;
  if (s == "hard") return PairingStrategy::Hard;
  throw ConfigError("unknown pairing strategy '" + std::string(s) + "'");
}

std::vector<PairIndex> pair_proposals(const std::vector<RankedTactic>& proposals, PairingStrategy strategy,
                                      Rng& rng) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < proposals.size(); ++i) (proposals[i].valid ? pos : neg).push_back(i);
  std::vector<PairIndex> out;
  if (pos.empty()) return out;

  for (std::size_t n : neg) {
    if (strategy == PairingStrategy::Random) {
      out.push_back({pos[uniform_index(rng, pos.size())], n});
      continue;
    }
    const double lp_neg = proposals[n].logprob;
    if (strategy == PairingStrategy::ZeroAccuracy) {
      for (auto it = pos.begin(); it != pos.end(); ++it) {
        if (lp_neg > proposals[*it].logprob) {
          const std::size_t p = *it;
          out.push_back({p, n});
          pos.erase(it);
          pos.push_back(p);
          break;
        }
      }
    } else {
      // Scan from the low-likelihood end; the chosen one goes to the front,
      // which is the end this scan reaches last.
      for (auto it = pos.end(); it != pos.begin();) {
        --it;
        if (lp_neg > proposals[*it].logprob) {
          const std::size_t p = *it;
          out.push_back({p, n});
          pos.erase(it);
          pos.insert(pos.begin(), p);
          break;
        }
      }
    }
  }
  return out;
}

std::vector<RankedTactic> rank_proposals(const StateRef& ref, const PolicyParams& sampler,
                                         const PromptConfig& prompt_config, std::size_t width) {
  const Prompt prompt = base_prompt(ref, prompt_config);
  auto beam = sample_beam(sampler, prompt, width, prompt_config.max_tactic_len);
  const std::string& gold = ref.gold_tactic();
  if (std::none_of(beam.begin(), beam.end(), [&](const ScoredTactic& t) { return t.text == gold; }))
    beam.push_back(score_tactic(sampler, prompt, gold));
  std::vector<RankedTactic> out;
  out.reserve(beam.size());
  for (const auto& t : beam)
    out.push_back({t.text, t.score, is_valid(apply_tactic(ref.state(), t.text, ref.library()))});
  return out;
}

std::vector<PreferenceTriplet> curate_state(const StateRef& ref, const PolicyParams& sampler,
                                            const DpoDataConfig& config, const PromptConfig& prompt_config,
                                            std::uint64_t round) {
  const auto proposals = rank_proposals(ref, sampler, prompt_config, config.width);
  const std::uint64_t seed = state_seed(config.seed, ref, round);
  Rng pair_rng(derive_seed(seed, "pair"));
  Rng drop_rng(derive_seed(seed, "dropout"));
  const auto premises = state_premises(ref, prompt_config);
  std::vector<PreferenceTriplet> out;
  for (const auto& [p, n] : pair_proposals(proposals, config.strategy, pair_rng)) {
    PreferenceTriplet t;
    t.prompt = render_prompt(ref.state(), dropout_premises(premises, config.dropout_p, drop_rng)).text;
    t.chosen = proposals[p].text;
    t.rejected = proposals[n].text;
    t.theorem = ref.theorem();
    t.step = ref.step;
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<PreferenceTriplet> curate_dpo_dataset(const std::vector<StateRef>& states, const PolicyParams& sampler,
                                                  const DpoDataConfig& config, const PromptConfig& prompt_config) {
  std::vector<PreferenceTriplet> out;
  for (const auto& ref : states) {
    auto part = curate_state(ref, sampler, config, prompt_config, 0);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

namespace {

Json header_json(const DatasetHeader& h, std::string_view kind) {
  return Json{{"kind", kind},
              {"sampler_checkpoint_id", h.sampler_checkpoint_id},
              {"seed", h.seed},
              {"strategy", h.strategy},
              {"dropout_p", h.dropout_p}};
}

}  // namespace

void write_triplets(const std::string& path, const DatasetHeader& header,
                    const std::vector<PreferenceTriplet>& triplets) {
  std::vector<Json> lines;
  lines.push_back(header_json(header, "triplet_header"));
  for (const auto& t : triplets)
    lines.push_back(Json{{"prompt", t.prompt},
                         {"chosen", t.chosen},
                         {"rejected", t.rejected},
                         {"theorem", t.theorem},
                         {"step", t.step}});
  write_jsonl(path, lines);
}

std::vector<PreferenceTriplet> read_triplets(const std::string& path, DatasetHeader* header) {
  const auto lines = read_jsonl(path);
  if (lines.empty() || lines[0].value("kind", "") != "triplet_header")
    throw ParseError(path + ": missing triplet header");
  try {
    if (header) {
      header->sampler_checkpoint_id = lines[0].at("sampler_checkpoint_id").get<std::string>();
      header->seed = lines[0].at("seed").get<std::uint64_t>();
      header->strategy = lines[0].at("strategy").get<std::string>();
      header->dropout_p = lines[0].at("dropout_p").get<double>();
    }
    std::vector<PreferenceTriplet> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const Json& j = lines[i];
      PreferenceTriplet t;
      t.prompt = j.at("prompt").get<std::string>();
      t.chosen = j.at("chosen").get<std::string>();
      t.rejected = j.at("rejected").get<std::string>();
      t.theorem = j.value("theorem", "");
      t.step = j.value("step", std::size_t{0});
      out.push_back(std::move(t));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_groups(const std::string& path, const DatasetHeader& header, const std::vector<TacticGroup>& groups) {
  std::vector<Json> lines;
  lines.push_back(header_json(header, "group_header"));
  for (const auto& g : groups) {
    Json tactics = Json::array(), old = Json::array();
    for (const auto& t : g.tactics) {
      tactics.push_back(t.text);
      old.push_back(t.token_logprobs);
    }
    lines.push_back(Json{{"theorem", g.theorem},
                         {"step", g.step},
                         {"prompt", g.prompt.text},
                         {"tactics", tactics},
                         {"rewards", g.rewards},
                         {"advantages", g.advantages},
                         {"old_logprobs", old}});
  }
  write_jsonl(path, lines);
}

}  // namespace tacticrl
