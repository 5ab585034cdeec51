#include "tacticrl/beam.hpp"

#include <set>

namespace tacticrl {

namespace {

class PolicyStepModel {
 public:
  struct State {
    std::vector<double> hidden;
    std::vector<double> log_probs;
  };

  PolicyStepModel(const PolicyParams& params, const PromptEncoding& enc) : params_(params), enc_(enc) {}

  State initial() const {
    State s;
    decoder_step(params_, enc_, {}, params_.layout().input_vocab() - 1, s.hidden, s.log_probs);
    return s;
  }
  const std::vector<double>& log_probs(const State& s) const { return s.log_probs; }
  State advance(const State& s, int token) const {
    State next;
    decoder_step(params_, enc_, s.hidden, token, next.hidden, next.log_probs);
    return next;
  }
  std::optional<int> end_token() const { return Vocabulary::eos(); }

 private:
  const PolicyParams& params_;
  const PromptEncoding& enc_;
};

}  // namespace

double sum_logprobs(const std::vector<double>& lps) {
  double s = 0;
  for (double v : lps) s += v;
  return s;
}

std::vector<ScoredTactic> sample_beam(const PolicyParams& params, const Prompt& prompt, std::size_t width,
                                      std::size_t max_len) {
  const auto& vocab = Vocabulary::standard();
  PromptEncoding enc = encode_prompt(params, vocab.encode(prompt.text));
  auto hyps = beam_search(PolicyStepModel(params, enc), width, max_len);
  std::vector<ScoredTactic> out;
  std::set<std::string> seen;
  for (auto& h : hyps) {
    std::string text = vocab.decode(h.tokens);
    if (!seen.insert(text).second) continue;
    out.push_back({std::move(text), std::move(h.tokens), std::move(h.token_logprobs), h.score});
  }
  return out;
}

ScoredTactic score_tactic(const PolicyParams& params, const Prompt& prompt, const std::string& tactic) {
  ScoredTactic s;
  s.text = tactic;
  s.tokens = Vocabulary::standard().encode_tactic(tactic);
  s.token_logprobs = sequence_logprobs(params, prompt, std::span<const int>(s.tokens));
  s.score = sum_logprobs(s.token_logprobs);
  return s;
}

}  // namespace tacticrl
