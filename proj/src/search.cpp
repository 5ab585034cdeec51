#include "tacticrl/search.hpp"

#include <chrono>
#include <sstream>
#include <queue>
#include <set>
#include <unordered_set>

#include "tacticrl/errors.hpp"

namespace tacticrl {

TacticProposer policy_proposer(const PolicyParams& params, std::size_t width, std::size_t max_len) {
  return [&params, width, max_len](const ProofState&, const Prompt& prompt) {
    return sample_beam(params, prompt, width, max_len);
  };
}

namespace {

struct Node {
  ProofState state;
  double score = 0;
  std::vector<std::string> path;
};

struct LowerPriority {
  bool operator()(const Node& a, const Node& b) const {
    if (a.score != b.score) return a.score < b.score;
    return a.path > b.path;
  }
};

}  // namespace

SearchResult best_first_search(const TacticProposer& proposer, const Theorem& theorem, const SearchConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  SearchResult result;
  result.theorem = theorem.name;

  std::priority_queue<Node, std::vector<Node>, LowerPriority> queue;
  std::unordered_set<std::string> seen;
  Node root{ProofState::initial(theorem.statement), 0.0, {}};
  seen.insert(render_state(root.state));
  queue.push(std::move(root));

  while (!queue.empty() && result.expansions < config.max_expansions) {
    Node node = queue.top();
    queue.pop();
    if (node.path.size() >= config.max_depth) continue;
    ++result.expansions;
    result.popped_scores.push_back(node.score);
    const Prompt prompt =
        render_prompt(node.state, retrieve_premises(node.state, theorem.library, config.prompt.retrieve_k));
    for (const ScoredTactic& t : proposer(node.state, prompt)) {
      ++result.tactics_attempted;
      const TacticOutcome out = apply_tactic(node.state, t.text, theorem.library);
      if (std::holds_alternative<outcome::ProofFinished>(out)) {
        auto proof = node.path;
        proof.push_back(t.text);
        result.proved = true;
        result.proof = std::move(proof);
        queue = {};
        break;
      }
      const auto* applied = std::get_if<outcome::Applied>(&out);
      if (!applied) continue;
      if (!seen.insert(render_state(applied->next)).second) continue;
      Node child{applied->next, node.score + t.score, node.path};
      child.path.push_back(t.text);
      queue.push(std::move(child));
    }
  }
  if (config.record_time)
    result.duration_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

SearchResult best_first_search(const PolicyParams& params, const Theorem& theorem, const SearchConfig& config) {
  return best_first_search(policy_proposer(params, config.width, config.prompt.max_tactic_len), theorem, config);
}

PassAtOneReport eval_pass_at_1(const TacticProposer& proposer, const std::vector<const CorpusEntry*>& theorems,
                               const SearchConfig& config) {
  PassAtOneReport r;
  r.theorems = theorems.size();
  r.empty = theorems.empty();
  for (const CorpusEntry* e : theorems) {
    r.results.push_back(best_first_search(proposer, e->theorem, config));
    if (r.results.back().proved) ++r.proved;
  }
  r.pass_at_1 = r.empty ? 0.0 : static_cast<double>(r.proved) / static_cast<double>(r.theorems);
  return r;
}

PassAtOneReport eval_pass_at_1(const PolicyParams& params, const std::vector<const CorpusEntry*>& theorems,
                               const SearchConfig& config) {
  return eval_pass_at_1(policy_proposer(params, config.width, config.prompt.max_tactic_len), theorems, config);
}

RankingStats ranking_stats(const std::vector<bool>& valid, std::size_t k) {
  RankingStats s;
  double hits = 0;
  for (std::size_t rank = 0; rank < valid.size() && rank < k; ++rank) {
    if (!valid[rank]) continue;
    hits += 1;
    s.average_precision += hits / static_cast<double>(rank + 1);
    if (hits == 1) s.reciprocal_rank = 1.0 / static_cast<double>(rank + 1);
  }
  if (hits > 0) s.average_precision /= hits;
  s.precision = k == 0 ? 0.0 : hits / static_cast<double>(k);
  return s;
}

StepwiseReport stepwise_metrics(const PolicyParams& params, const std::vector<StateRef>& states,
                                const PromptConfig& prompt_config, std::size_t width) {
  StepwiseReport r;
  r.states = states.size();
  if (states.empty()) return r;
  double len_all = 0, len_valid = 0;
  std::size_t n_all = 0, n_valid = 0, zero = 0;
  for (const auto& ref : states) {
    const auto beam = sample_beam(params, base_prompt(ref, prompt_config), width, prompt_config.max_tactic_len);
    std::vector<bool> valid;
    for (const auto& t : beam) {
      const bool ok = is_valid(apply_tactic(ref.state(), t.text, ref.library()));
      valid.push_back(ok);
      len_all += static_cast<double>(t.text.size());
      ++n_all;
      if (ok) {
        len_valid += static_cast<double>(t.text.size());
        ++n_valid;
      }
    }
    const auto s = ranking_stats(valid, width);
    r.prec_at_8 += s.precision;
    r.map += s.average_precision;
    r.mrr += s.reciprocal_rank;
    if (s.precision == 0) ++zero;
  }
  const double n = static_cast<double>(states.size());
  r.prec_at_8 /= n;
  r.map /= n;
  r.mrr /= n;
  r.pct_zero_precision = static_cast<double>(zero) / n;
  r.mean_length = n_all ? len_all / static_cast<double>(n_all) : 0.0;
  r.mean_valid_length = n_valid ? len_valid / static_cast<double>(n_valid) : 0.0;
  return r;
}

ProofLengthReport proof_length_report(const std::vector<SearchResult>& a, const std::vector<SearchResult>& b) {
  std::map<std::string, const SearchResult*> ma, mb;
  for (const auto& r : a) ma[r.theorem] = &r;
  for (const auto& r : b) mb[r.theorem] = &r;
  if (ma.size() != a.size() || mb.size() != b.size()) throw MismatchedSplits("duplicate theorem in result set");
  for (auto ia = ma.begin(), ib = mb.begin();; ++ia, ++ib) {
    if (ia == ma.end() || ib == mb.end()) {
      if (ia != ma.end() || ib != mb.end()) throw MismatchedSplits("result sets cover different theorems");
      break;
    }
    if (ia->first != ib->first)
      throw MismatchedSplits("result sets cover different theorems (first difference at " +
                             std::min(ia->first, ib->first) + ")");
  }
  ProofLengthReport rep;
  for (const auto& [name, ra] : ma) {
    const SearchResult* rb = mb.at(name);
    if (ra->proved && rb->proved) {
      const std::size_t la = ra->proof->size(), lb = rb->proof->size();
      rep.rows.push_back({name, la, lb, static_cast<long>(lb) - static_cast<long>(la)});
      ++rep.joint[{la, lb}];
    } else if (ra->proved) {
      ++rep.a_only;
    } else if (rb->proved) {
      ++rep.b_only;
    } else {
      ++rep.neither;
    }
  }
  return rep;
}

std::vector<CurvePoint> budget_curve(const std::vector<SearchResult>& results, const std::vector<std::size_t>& budgets) {
  std::vector<CurvePoint> out;
  for (std::size_t b : budgets) {
    std::size_t c = 0;
    for (const auto& r : results)
      if (r.proved && r.expansions <= b) ++c;
    out.push_back({static_cast<double>(b), c});
  }
  return out;
}

std::vector<CurvePoint> time_curve(const std::vector<SearchResult>& results, const std::vector<double>& limits_ms) {
  std::vector<CurvePoint> out;
  for (double t : limits_ms) {
    std::size_t c = 0;
    for (const auto& r : results)
      if (r.proved && r.duration_ms && *r.duration_ms <= t) ++c;
    out.push_back({t, c});
  }
  return out;
}

void write_results(const std::string& path, const std::vector<SearchResult>& results) {
  std::vector<Json> lines;
  for (const auto& r : results) {
    Json j{{"name", r.theorem}, {"proved", r.proved}};
    j["proof"] = r.proof ? Json(*r.proof) : Json(nullptr);
    j["expansions"] = r.expansions;
    j["tactics_attempted"] = r.tactics_attempted;
    j["duration_ms"] = r.duration_ms ? Json(*r.duration_ms) : Json(nullptr);
    lines.push_back(std::move(j));
  }
  write_jsonl(path, lines);
}

std::vector<SearchResult> read_results(const std::string& path) {
  std::vector<SearchResult> out;
  try {
    for (const Json& j : read_jsonl(path)) {
      SearchResult r;
      r.theorem = j.at("name").get<std::string>();
      r.proved = j.at("proved").get<bool>();
      if (!j.at("proof").is_null()) r.proof = j.at("proof").get<std::vector<std::string>>();
      r.expansions = j.at("expansions").get<std::size_t>();
      r.tactics_attempted = j.value("tactics_attempted", std::size_t{0});
      if (j.contains("duration_ms") && !j.at("duration_ms").is_null()) r.duration_ms = j.at("duration_ms").get<double>();
      if (r.proved != r.proof.has_value()) throw ParseError(path + ": proof/proved mismatch for " + r.theorem);
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return out;
}

Json to_json(const StepwiseReport& r) {
  return Json{{"states", r.states},
              {"prec_at_8", r.prec_at_8},
              {"map", r.map},
              {"mrr", r.mrr},
              {"mean_valid_length", r.mean_valid_length},
              {"mean_length", r.mean_length},
              {"pct_zero_precision", r.pct_zero_precision}};
}

Json to_json(const PassAtOneReport& r) {
  return Json{{"theorems", r.theorems}, {"proved", r.proved}, {"pass_at_1", r.pass_at_1}, {"empty", r.empty}};
}

void write_length_csv(const std::string& path, const ProofLengthReport& r) {
  std::ostringstream out;
  out << "lenA,lenB,delta\n";
  for (const auto& row : r.rows) out << row.len_a << "," << row.len_b << "," << row.delta << "\n";
  write_text(path, out.str());
}

void write_joint_csv(const std::string& path, const ProofLengthReport& r) {
  std::ostringstream out;
  out << "lenA,lenB,count\n";
  for (const auto& [k, c] : r.joint) out << k.first << "," << k.second << "," << c << "\n";
  write_text(path, out.str());
}

void write_curve_csv(const std::string& path, const std::vector<CurvePoint>& curve) {
  std::ostringstream out;
  out << "budget,count\n";
  for (const auto& p : curve) out << p.budget << "," << p.count << "\n";
  write_text(path, out.str());
}

}  // namespace tacticrl
