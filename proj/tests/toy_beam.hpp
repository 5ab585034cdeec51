#pragma once

// Small hand-made models for checking beam search against brute force.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "tacticrl/beam.hpp"
#include "tacticrl/rng.hpp"

namespace tacticrl::toy {

inline std::vector<double> log_softmax(std::vector<double> z) {
  double m = *std::max_element(z.begin(), z.end());
  double s = 0;
  for (double v : z) s += std::exp(v - m);
  double lse = m + std::log(s);
  for (double& v : z) v -= lse;
  return z;
}

// Hand-written logits indexed by prefix; unlisted prefixes are uniform.
struct TableModel {
  using State = std::vector<int>;
  int vocab;
  std::map<std::vector<int>, std::vector<double>> logits;
  std::optional<int> end;
  mutable std::map<std::vector<int>, std::vector<double>> cache;

  State initial() const { return {}; }
  const std::vector<double>& log_probs(const State& s) const {
    auto it = cache.find(s);
    if (it != cache.end()) return it->second;
    auto l = logits.find(s);
    std::vector<double> z = l == logits.end() ? std::vector<double>(static_cast<std::size_t>(vocab), 0.0) : l->second;
    return cache.emplace(s, log_softmax(z)).first->second;
  }
  State advance(const State& s, int tok) const {
    State n = s;
    n.push_back(tok);
    return n;
  }
  std::optional<int> end_token() const { return end; }
};

// Every complete sequence, scored with the same left fold beam search uses.
inline std::vector<BeamHypothesis> enumerate_all(const TableModel& m, std::size_t max_len) {
  std::vector<BeamHypothesis> out;
  std::function<void(BeamHypothesis)> rec = [&](BeamHypothesis h) {
    const auto& lp = m.log_probs(h.tokens);
    for (int t = 0; t < m.vocab; ++t) {
      BeamHypothesis c = h;
      c.tokens.push_back(t);
      c.token_logprobs.push_back(lp[static_cast<std::size_t>(t)]);
      c.score = h.score + lp[static_cast<std::size_t>(t)];
      if ((m.end && t == *m.end) || c.tokens.size() >= max_len) {
        c.ended = true;
        out.push_back(c);
      } else {
        rec(c);
      }
    }
  };
  rec({});
  std::sort(out.begin(), out.end(), beam_before);
  return out;
}

inline TableModel random_table(int vocab, std::size_t max_len, std::optional<int> end, Rng& rng, bool prefix_free) {
  TableModel m{vocab, {}, end, {}};
  std::vector<double> shared(static_cast<std::size_t>(vocab));
  for (double& v : shared) v = 4 * uniform01(rng) - 2;
  std::function<void(std::vector<int>)> fill = [&](std::vector<int> p) {
    if (p.size() >= max_len) return;
    std::vector<double> z(static_cast<std::size_t>(vocab));
    for (double& v : z) v = 4 * uniform01(rng) - 2;
    m.logits[p] = prefix_free ? shared : z;
    for (int t = 0; t < vocab; ++t) {
      if (end && t == *end) continue;
      auto q = p;
      q.push_back(t);
      fill(q);
    }
  };
  fill({});
  return m;
}

// Beam search by definition: every step lists all extensions of the kept
// prefixes plus the kept finished sequences, sorts them, and keeps `width`.
inline std::vector<BeamHypothesis> reference_beam(const TableModel& m, std::size_t width, std::size_t max_len) {
  std::vector<BeamHypothesis> kept = {BeamHypothesis{}};
  for (std::size_t step = 0; step < max_len; ++step) {
    std::vector<BeamHypothesis> pool;
    bool any_live = false;
    for (const auto& h : kept) {
      if (h.ended) {
        pool.push_back(h);
        continue;
      }
      any_live = true;
      const auto& lp = m.log_probs(h.tokens);
      for (int t = 0; t < m.vocab; ++t) {
        BeamHypothesis c = h;
        c.tokens.push_back(t);
        c.token_logprobs.push_back(lp[static_cast<std::size_t>(t)]);
        c.score = h.score + lp[static_cast<std::size_t>(t)];
        c.ended = (m.end && t == *m.end) || c.tokens.size() >= max_len;
        pool.push_back(c);
      }
    }
    if (!any_live) break;
    std::sort(pool.begin(), pool.end(), beam_before);
    if (pool.size() > width) pool.resize(width);
    kept = std::move(pool);
  }
  std::sort(kept.begin(), kept.end(), beam_before);
  return kept;
}

}  // namespace tacticrl::toy
