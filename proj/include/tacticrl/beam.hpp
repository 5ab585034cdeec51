#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "tacticrl/policy.hpp"

namespace tacticrl {

struct BeamHypothesis {
  std::vector<int> tokens;
  std::vector<double> token_logprobs;
  double score = 0;
  bool ended = false;
};

/// Score descending, then token sequence ascending.
inline bool beam_before(const BeamHypothesis& a, const BeamHypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.tokens < b.tokens;
}

/// Width-limited search over token sequences; scores are cumulative,
/// unnormalized log-probabilities. A hypothesis ends when it emits the model's
/// end token (if any) or reaches `max_len` tokens. Each step keeps the best
/// `width` items among finished hypotheses and all one-token extensions of
/// live ones.
///
/// Model requirements:
///   using State = ...;
///   State initial() const;
///   const std::vector<double>& log_probs(const State&) const;
///   State advance(const State&, int token) const;
///   std::optional<int> end_token() const;
template <class Model>
std::vector<BeamHypothesis> beam_search(const Model& model, std::size_t width, std::size_t max_len) {
  using State = typename Model::State;
  struct Live {
    BeamHypothesis hyp;
    State state;
  };
  const std::optional<int> end = model.end_token();
  std::vector<BeamHypothesis> finished;
  std::vector<Live> live;
  if (width == 0 || max_len == 0) return finished;
  live.push_back({BeamHypothesis{}, model.initial()});

  // Candidates stay light (parent, token, score) until they survive the cut.
  struct Candidate {
    double score;
    std::size_t parent;  // index into live, or into finished when token < 0
    int token;
  };
  const auto tokens_of = [&](const Candidate& c) -> const std::vector<int>& {
    return c.token < 0 ? finished[c.parent].tokens : live[c.parent].hyp.tokens;
  };
  // Same order as beam_before, without building the extended token vectors.
  const auto before = [&](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    const auto& ta = tokens_of(a);
    const auto& tb = tokens_of(b);
    const std::size_t na = ta.size() + (a.token >= 0);
    const std::size_t nb = tb.size() + (b.token >= 0);
    for (std::size_t i = 0; i < std::min(na, nb); ++i) {
      const int x = i < ta.size() ? ta[i] : a.token;
      const int y = i < tb.size() ? tb[i] : b.token;
      if (x != y) return x < y;
    }
    return na < nb;
  };

  std::vector<Candidate> pool;
  for (std::size_t step = 0; step < max_len && !live.empty(); ++step) {
    pool.clear();
    for (std::size_t i = 0; i < finished.size(); ++i) pool.push_back({finished[i].score, i, -1});
    for (std::size_t i = 0; i < live.size(); ++i) {
      const auto& lp = model.log_probs(live[i].state);
      for (std::size_t tok = 0; tok < lp.size(); ++tok)
        pool.push_back({live[i].hyp.score + lp[tok], i, static_cast<int>(tok)});
    }
    const std::size_t keep = std::min(width, pool.size());
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(), before);
    std::vector<BeamHypothesis> next_finished;
    std::vector<Live> next;
    for (std::size_t i = 0; i < keep; ++i) {
      const Candidate& c = pool[i];
      if (c.token < 0) {
        next_finished.push_back(finished[c.parent]);
        continue;
      }
      const Live& parent = live[c.parent];
      BeamHypothesis h = parent.hyp;
      h.tokens.push_back(c.token);
      h.token_logprobs.push_back(model.log_probs(parent.state)[static_cast<std::size_t>(c.token)]);
      h.score = c.score;
      h.ended = (end && c.token == *end) || h.tokens.size() >= max_len;
      if (h.ended) {
        next_finished.push_back(std::move(h));
      } else {
        State st = model.advance(parent.state, c.token);
        next.push_back({std::move(h), std::move(st)});
      }
    }
    finished = std::move(next_finished);
    live = std::move(next);
  }
  for (auto& l : live) finished.push_back(std::move(l.hyp));
  std::sort(finished.begin(), finished.end(), beam_before);
  return finished;
}

struct ScoredTactic {
  std::string text;
  std::vector<int> tokens;
  std::vector<double> token_logprobs;
  double score = 0;
  friend bool operator==(const ScoredTactic&, const ScoredTactic&) = default;
};

/// Sums token log-probs left to right (the same order beam search uses).
double sum_logprobs(const std::vector<double>& lps);

/// Beam search over tactic strings under `params`; at most `width` distinct
/// surface strings, best first (ties by surface string).
std::vector<ScoredTactic> sample_beam(const PolicyParams& params, const Prompt& prompt, std::size_t width,
                                      std::size_t max_len);

/// Scores an explicit tactic (EOS appended) under `params`.
ScoredTactic score_tactic(const PolicyParams& params, const Prompt& prompt, const std::string& tactic);

}  // namespace tacticrl
