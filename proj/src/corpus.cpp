#include "tacticrl/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "tacticrl/errors.hpp"
#include "tacticrl/jsonl.hpp"

namespace tacticrl {

std::vector<std::string> GoldProof::tactics() const {
  std::vector<std::string> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.tactic);
  return out;
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::TestRandom: return "test_random";
    case Split::TestNovel: return "test_novel";
  }
  return "?";
}

Split parse_split(std::string_view s) {
  for (Split x : {Split::Train, Split::Validation, Split::TestRandom, Split::TestNovel}) {
    if (to_string(x) == s) return x;
  }
  throw ConfigError("unknown split '" + std::string(s) + "'");
}

std::vector<const CorpusEntry*> Corpus::split(Split s) const {
  std::vector<const CorpusEntry*> out;
  for (const auto& e : entries) {
    if (e.split == s) out.push_back(&e);
  }
  return out;
}

namespace {

Formula sample_at(Rng& rng, int level, int max_depth, int atom_count) {
  double leaf_p = static_cast<double>(level) / max_depth;
  if (level >= max_depth || uniform01(rng) < leaf_p) {
    double u = uniform01(rng);
    if (u < 0.05) return Formula::top();
    if (u < 0.10) return Formula::bottom();
    return Formula::atom(static_cast<int>(uniform_index(rng, static_cast<std::size_t>(atom_count))));
  }
  std::size_t c = uniform_index(rng, 3);
  Formula l = sample_at(rng, level + 1, max_depth, atom_count);
  Formula r = sample_at(rng, level + 1, max_depth, atom_count);
  if (c == 0) return Formula::conj(l, r);
  if (c == 1) return Formula::disj(l, r);
  return Formula::implies(l, r);
}

class Oracle {
 public:
  Oracle(const PremiseLibrary& library, std::size_t budget) : library_(library), budget_(budget) {}

  std::optional<GoldProof> prove(const Formula& statement, int max_depth) {
    ProofState root = ProofState::initial(statement);
    for (int limit = 1; limit <= max_depth; ++limit) {
      path_.clear();
      if (search(root, limit)) {
        GoldProof proof;
        proof.steps = path_;
        return proof;
      }
      if (exhausted_) return std::nullopt;
    }
    return std::nullopt;
  }

 private:
  bool search(const ProofState& state, int remaining) {
    std::unordered_set<std::string> children;
    for (const auto& t : enumerate_tactics(state.goals.front(), library_)) {
      if (used_ >= budget_) {
        exhausted_ = true;
        return false;
      }
      ++used_;
      TacticOutcome o = apply_tactic(state, t, library_);
      if (std::holds_alternative<outcome::ProofFinished>(o)) {
        path_.push_back({state, render(t)});
        return true;
      }
      auto* applied = std::get_if<outcome::Applied>(&o);
      if (applied == nullptr || remaining <= 1) continue;
      std::string key = render_state(applied->next);
      if (!children.insert(key).second) continue;
      // Subtrees already shown to have no proof within this many steps.
      auto it = failed_.find(key);
      if (it != failed_.end() && it->second >= remaining - 1) continue;
      path_.push_back({state, render(t)});
      if (search(applied->next, remaining - 1)) return true;
      path_.pop_back();
      if (exhausted_) return false;
      int& best = failed_[key];
      best = std::max(best, remaining - 1);
    }
    return false;
  }

  const PremiseLibrary& library_;
  std::size_t budget_;
  std::size_t used_ = 0;
  bool exhausted_ = false;
  std::vector<ProofStep> path_;
  std::unordered_map<std::string, int> failed_;
};

std::size_t round_count(std::size_t n, double frac) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(n) * frac));
}

std::string zero_pad(std::size_t i, int width) {
  std::string s = std::to_string(i);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

/// Right-nested k-premise implication that is classically valid and not
/// provable by the tactic rules in three steps or fewer.
std::vector<Premise> generate_lemma_pool(const CorpusConfig& config) {
  std::vector<Premise> pool;
  std::unordered_set<Formula> seen;
  const PremiseLibrary empty;
  const std::size_t cap = std::max<std::size_t>(1000, config.library_size * config.attempt_factor * 10);
  for (std::size_t attempt = 0; pool.size() < config.library_size; ++attempt) {
    if (attempt >= cap) throw GenerationExhausted("lemma pool generation exceeded its attempt cap");
    Rng rng(derive_seed(config.seed, "lemma/" + std::to_string(attempt)));
    std::size_t k = 1 + uniform_index(rng, 2);
    std::vector<Formula> premises;
    for (std::size_t i = 0; i < k; ++i) premises.push_back(sample_formula(rng, 2, config.atoms));
    Formula conclusion = sample_formula(rng, 3, config.atoms);
    if (conclusion.is(Connective::Top) || conclusion.is(Connective::Implies)) continue;
    if (std::find(premises.begin(), premises.end(), conclusion) != premises.end()) continue;
    Formula lemma = conclusion;
    for (std::size_t i = k; i-- > 0;) lemma = Formula::implies(premises[i], lemma);
    if (!classically_valid(lemma, config.atoms)) continue;
    if (!seen.insert(lemma).second) continue;
    if (brute_force_prove(lemma, empty, 3, config.node_budget)) continue;
    pool.push_back({"lem" + std::to_string(pool.size()), lemma});
  }
  return pool;
}

struct Candidate {
  Formula statement;
  GoldProof proof;
};

std::vector<Candidate> generate_theorems(const CorpusConfig& config, const PremiseLibrary& library,
                                         std::size_t count, std::string_view stream) {
  std::vector<Candidate> out;
  std::unordered_set<Formula> seen;
  const std::size_t cap = config.attempt_factor * std::max<std::size_t>(count, 1);
  for (std::size_t attempt = 0; out.size() < count; ++attempt) {
    if (attempt >= cap) {
      throw GenerationExhausted("rejection sampling exceeded " + std::to_string(cap) + " attempts for " +
                                std::string(stream) + " theorems (" + std::to_string(out.size()) + "/" +
                                std::to_string(count) + " found)");
    }
    Rng rng(derive_seed(config.seed, std::string(stream) + "/" + std::to_string(attempt)));
    Formula statement = sample_formula(rng, config.max_depth, config.atoms);
    if (!classically_valid(statement, config.atoms)) continue;
    if (seen.contains(statement)) continue;
    auto proof = brute_force_prove(statement, library, config.oracle_depth, config.node_budget);
    if (!proof || proof->length() < config.min_proof_length) continue;
    seen.insert(statement);
    out.push_back({statement, std::move(*proof)});
  }
  return out;
}

}  // namespace

Formula sample_formula(Rng& rng, int max_depth, int atom_count) {
  return sample_at(rng, 1, max_depth, atom_count);
}

std::string canonical_intro_name(const Goal& goal) { return fresh_name(goal, "h"); }

std::vector<ParsedTactic> enumerate_tactics(const Goal& goal, const PremiseLibrary& library) {
  std::vector<ParsedTactic> out;
  out.reserve(6 + 3 * goal.hypotheses.size() + 2 * library.entries.size());
  out.emplace_back(tactic::Intro{canonical_intro_name(goal)});
  out.emplace_back(tactic::Split{});
  out.emplace_back(tactic::Left{});
  out.emplace_back(tactic::Right{});
  for (const auto& h : goal.hypotheses) out.emplace_back(tactic::Exact{h.name});
  for (const auto& p : library.entries) out.emplace_back(tactic::Exact{p.name});
  out.emplace_back(tactic::Assumption{});
  for (const auto& h : goal.hypotheses) out.emplace_back(tactic::Apply{h.name});
  for (const auto& p : library.entries) out.emplace_back(tactic::Apply{p.name});
  for (const auto& h : goal.hypotheses) out.emplace_back(tactic::Cases{h.name});
  out.emplace_back(tactic::Trivial{});
  return out;
}

std::optional<GoldProof> brute_force_prove(const Formula& statement, const PremiseLibrary& library,
                                           int max_depth, std::size_t node_budget) {
  return Oracle(library, node_budget).prove(statement, max_depth);
}

Corpus generate_corpus(const CorpusConfig& config) {
  if (config.novel_holdout > config.library_size) throw ConfigError("corpus.novel_holdout exceeds corpus.library_size");
  if (config.atoms < 1 || config.atoms > kMaxAtoms) throw ConfigError("corpus.atoms must be in [1, 8]");
  if (config.max_depth < 1) throw ConfigError("corpus.max_depth must be >= 1");
  Corpus corpus;
  corpus.config = config;
  corpus.lemma_pool = generate_lemma_pool(config);

  PremiseLibrary main_library;
  PremiseLibrary novel_library;
  const std::size_t main_size = config.library_size - config.novel_holdout;
  for (std::size_t i = 0; i < corpus.lemma_pool.size(); ++i) {
    if (i < main_size) {
      main_library.entries.push_back(corpus.lemma_pool[i]);
    } else {
      novel_library.entries.push_back(corpus.lemma_pool[i]);
      corpus.held_out.push_back(corpus.lemma_pool[i].name);
    }
  }

  const std::size_t n_novel = novel_library.entries.empty() ? 0 : round_count(config.n, config.splits[3]);
  const std::size_t n_main = config.n - n_novel;
  const std::size_t n_train = std::min(n_main, round_count(config.n, config.splits[0]));
  const std::size_t n_val = std::min(n_main - n_train, round_count(config.n, config.splits[1]));

  auto main_theorems = generate_theorems(config, main_library, n_main, "main");
  auto novel_theorems = generate_theorems(config, novel_library, n_novel, "novel");

  std::vector<Split> labels;
  labels.insert(labels.end(), n_train, Split::Train);
  labels.insert(labels.end(), n_val, Split::Validation);
  labels.insert(labels.end(), n_main - n_train - n_val, Split::TestRandom);
  Rng split_rng(derive_seed(config.seed, "splits"));
  shuffle(labels, split_rng);

  const int width = static_cast<int>(std::to_string(std::max<std::size_t>(config.n, 1) - 1).size());
  std::size_t index = 0;
  for (std::size_t i = 0; i < main_theorems.size(); ++i, ++index) {
    corpus.entries.push_back({{"thm" + zero_pad(index, width), main_theorems[i].statement, main_library},
                              std::move(main_theorems[i].proof), labels[i]});
  }
  for (auto& c : novel_theorems) {
    corpus.entries.push_back(
        {{"thm" + zero_pad(index++, width), c.statement, novel_library}, std::move(c.proof), Split::TestNovel});
  }
  return corpus;
}

bool replay_proof(const Theorem& theorem, const std::vector<std::string>& tactics) {
  return reconstruct_proof(theorem, tactics).has_value();
}

bool replay_proof(const Theorem& theorem, const GoldProof& proof) {
  auto rebuilt = reconstruct_proof(theorem, proof.tactics());
  if (!rebuilt) return false;
  for (std::size_t i = 0; i < proof.steps.size(); ++i) {
    if (!(rebuilt->steps[i].state == proof.steps[i].state)) return false;
  }
  return true;
}

std::optional<GoldProof> reconstruct_proof(const Theorem& theorem, const std::vector<std::string>& tactics) {
  GoldProof proof;
  ProofState state = ProofState::initial(theorem.statement);
  for (std::size_t i = 0; i < tactics.size(); ++i) {
    TacticOutcome o = apply_tactic(state, tactics[i], theorem.library);
    proof.steps.push_back({state, tactics[i]});
    if (std::holds_alternative<outcome::ProofFinished>(o)) {
      if (i + 1 != tactics.size()) return std::nullopt;
      return proof;
    }
    auto* applied = std::get_if<outcome::Applied>(&o);
    if (applied == nullptr) return std::nullopt;
    state = std::move(applied->next);
  }
  return std::nullopt;
}

namespace {

Json config_json(const CorpusConfig& c) {
  return Json{{"n", c.n},
              {"max_depth", c.max_depth},
              {"atoms", c.atoms},
              {"library_size", c.library_size},
              {"novel_holdout", c.novel_holdout},
              {"seed", c.seed},
              {"splits", c.splits},
              {"oracle_depth", c.oracle_depth},
              {"node_budget", c.node_budget},
              {"min_proof_length", c.min_proof_length},
              {"attempt_factor", c.attempt_factor}};
}

CorpusConfig config_from_json(const Json& j) {
  CorpusConfig c;
  c.n = j.at("n").get<std::size_t>();
  c.max_depth = j.at("max_depth").get<int>();
  c.atoms = j.at("atoms").get<int>();
  c.library_size = j.at("library_size").get<std::size_t>();
  c.novel_holdout = j.at("novel_holdout").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.splits = j.at("splits").get<std::array<double, 4>>();
  c.oracle_depth = j.at("oracle_depth").get<int>();
  c.node_budget = j.at("node_budget").get<std::size_t>();
  c.min_proof_length = j.at("min_proof_length").get<std::size_t>();
  c.attempt_factor = j.at("attempt_factor").get<std::size_t>();
  return c;
}

Json library_json(const PremiseLibrary& lib) {
  Json arr = Json::array();
  for (const auto& p : lib.entries) arr.push_back(Json{{"name", p.name}, {"formula", render(p.formula)}});
  return arr;
}

}  // namespace

void write_corpus(const Corpus& corpus, const std::string& path) {
  std::vector<Json> records;
  records.push_back(Json{{"kind", "corpus_header"},
                         {"format_version", 1},
                         {"config", config_json(corpus.config)},
                         {"held_out", corpus.held_out}});
  for (const auto& e : corpus.entries) {
    records.push_back(Json{{"name", e.theorem.name},
                           {"statement", render(e.theorem.statement)},
                           {"library", library_json(e.theorem.library)},
                           {"split", to_string(e.split)},
                           {"gold_proof", e.proof.tactics()}});
  }
  write_jsonl(path, records);
}

Corpus read_corpus(const std::string& path) {
  auto records = read_jsonl(path);
  Corpus corpus;
  std::unordered_set<std::string> pool_names;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Json& r = records[i];
    const std::string where = path + ":" + std::to_string(i + 1);
    try {
      if (r.contains("kind") && r["kind"] == "corpus_header") {
        corpus.config = config_from_json(r.at("config"));
        corpus.held_out = r.at("held_out").get<std::vector<std::string>>();
        continue;
      }
      CorpusEntry e;
      e.theorem.name = r.at("name").get<std::string>();
      e.theorem.statement = parse_formula(r.at("statement").get<std::string>());
      for (const auto& p : r.at("library")) {
        Premise premise{p.at("name").get<std::string>(), parse_formula(p.at("formula").get<std::string>())};
        if (pool_names.insert(premise.name).second) corpus.lemma_pool.push_back(premise);
        e.theorem.library.entries.push_back(std::move(premise));
      }
      e.split = parse_split(r.at("split").get<std::string>());
      auto proof = reconstruct_proof(e.theorem, r.at("gold_proof").get<std::vector<std::string>>());
      if (!proof) throw ParseError("gold proof does not replay");
      e.proof = std::move(*proof);
      corpus.entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(where + ": " + ex.what());
    } catch (const Error& ex) {
      throw ParseError(where + ": " + ex.what());
    }
  }
  std::sort(corpus.lemma_pool.begin(), corpus.lemma_pool.end(),
            [](const Premise& a, const Premise& b) { return a.name < b.name; });
  std::sort(corpus.entries.begin(), corpus.entries.end(),
            [](const CorpusEntry& a, const CorpusEntry& b) { return a.theorem.name < b.theorem.name; });
  return corpus;
}

}  // namespace tacticrl
