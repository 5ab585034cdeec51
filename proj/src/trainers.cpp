#include "tacticrl/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "tacticrl/errors.hpp"

namespace tacticrl {

namespace {

const Vocabulary& vocab() { return Vocabulary::standard(); }

double log_sigmoid_neg(double z) { return softplus(-z, 1.0); }  // -log sigmoid(z)

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Visits indices in a fresh shuffled order each epoch.
class Cursor {
 public:
  Cursor(std::size_t n, std::uint64_t seed) : n_(n), seed_(seed) { reshuffle(); }

  std::size_t next() {
    if (pos_ == order_.size()) {
      ++epoch_;
      reshuffle();
    }
    return order_[pos_++];
  }
  std::uint64_t epoch() const { return epoch_; }
  /// Epoch the next call to next() will be drawn from.
  std::uint64_t upcoming_epoch() const { return pos_ == order_.size() ? epoch_ + 1 : epoch_; }

 private:
  void reshuffle() {
    order_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) order_[i] = i;
    Rng rng(derive_seed(seed_, epoch_));
    shuffle(order_, rng);
    pos_ = 0;
  }
  std::size_t n_;
  std::uint64_t seed_;
  std::uint64_t epoch_ = 0;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<SftExample> sft_examples(const std::vector<StateRef>& states, const PromptConfig& config) {
  std::vector<SftExample> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back({base_prompt(s, config), s.gold_tactic()});
  return out;
}

SftLoss::SftLoss(const std::vector<SftExample>& batch) {
  for (const auto& ex : batch) items_.push_back({vocab().encode(ex.prompt.text), vocab().encode_tactic(ex.tactic)});
}

double SftLoss::value(const PolicyParams& params) const {
  double total = 0;
  for (const auto& it : items_) {
    const auto enc = encode_prompt(params, it.prompt);
    total -= sum_logprobs(trace_sequence(params, enc, it.target).token_logprobs);
  }
  return items_.empty() ? 0.0 : total / static_cast<double>(items_.size());
}

double SftLoss::value_and_gradient(const PolicyParams& params, Gradient& grad) const {
  grad = Gradient(params.layout());
  if (items_.empty()) return 0.0;
  const double scale = 1.0 / static_cast<double>(items_.size());
  double total = 0;
  std::vector<double> drive_grad;
  for (const auto& it : items_) {
    const auto enc = encode_prompt(params, it.prompt);
    const auto tr = trace_sequence(params, enc, it.target);
    total -= sum_logprobs(tr.token_logprobs);
    std::vector<double> seeds(it.target.size(), -scale);
    drive_grad.assign(static_cast<std::size_t>(params.layout().dims().hidden), 0.0);
    backprop_sequence(params, enc, tr, seeds, grad, drive_grad);
    backprop_prompt(params, enc, drive_grad, grad);
  }
  return total * scale;
}

double sft_loss(const PolicyParams& params, const std::vector<SftExample>& batch) {
  return SftLoss(batch).value(params);
}

DpoLoss::DpoLoss(const PolicyParams& ref, const std::vector<PreferenceTriplet>& batch, double beta) : beta_(beta) {
  for (const auto& t : batch) {
    Item it{vocab().encode(t.prompt), vocab().encode_tactic(t.chosen), vocab().encode_tactic(t.rejected), 0, 0};
    const auto enc = encode_prompt(ref, it.prompt);
    it.ref_chosen = sum_logprobs(trace_sequence(ref, enc, it.chosen).token_logprobs);
    it.ref_rejected = sum_logprobs(trace_sequence(ref, enc, it.rejected).token_logprobs);
    items_.push_back(std::move(it));
  }
}

double DpoLoss::evaluate(const PolicyParams& params, Gradient* grad) const {
  if (grad) *grad = Gradient(params.layout());
  if (items_.empty()) return 0.0;
  const double scale = 1.0 / static_cast<double>(items_.size());
  double total = 0;
  std::vector<double> drive_grad;
  for (const auto& it : items_) {
    const auto enc = encode_prompt(params, it.prompt);
    const auto tc = trace_sequence(params, enc, it.chosen);
    const auto tr = trace_sequence(params, enc, it.rejected);
    const double dp = sum_logprobs(tc.token_logprobs) - it.ref_chosen;
    const double dn = sum_logprobs(tr.token_logprobs) - it.ref_rejected;
    const double z = beta_ * dp - beta_ * dn;
    total += dpo_pair_loss(dp, dn, beta_);
    if (!grad) continue;
    const double g = sigmoid(-z) * beta_ * scale;
    drive_grad.assign(static_cast<std::size_t>(params.layout().dims().hidden), 0.0);
    std::vector<double> seeds(it.chosen.size(), -g);
    backprop_sequence(params, enc, tc, seeds, *grad, drive_grad);
    seeds.assign(it.rejected.size(), g);
    backprop_sequence(params, enc, tr, seeds, *grad, drive_grad);
    backprop_prompt(params, enc, drive_grad, *grad);
  }
  return total * scale;
}

double DpoLoss::value(const PolicyParams& params) const { return evaluate(params, nullptr); }
double DpoLoss::value_and_gradient(const PolicyParams& params, Gradient& grad) const {
  return evaluate(params, &grad);
}

double dpo_loss(const PolicyParams& params, const PolicyParams& ref, const std::vector<PreferenceTriplet>& batch,
                double beta) {
  return DpoLoss(ref, batch, beta).value(params);
}

double dpo_pair_loss(double delta_pos, double delta_neg, double beta) {
  return log_sigmoid_neg(beta * delta_pos - beta * delta_neg);
}

double clipped_surrogate(double ratio, double advantage, double epsilon) {
  return std::min(ratio * advantage, std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon) * advantage);
}

double kl_term(double logp_theta, double logp_ref) {
  const double d = logp_ref - logp_theta;
  return std::max(0.0, std::expm1(d) - d);
}

std::vector<double> kl_estimate(const PolicyParams& params, const PolicyParams& ref, const Prompt& prompt,
                                std::span<const int> tokens) {
  const auto lp = sequence_logprobs(params, prompt, tokens);
  const auto lr = sequence_logprobs(ref, prompt, tokens);
  std::vector<double> out(lp.size());
  for (std::size_t t = 0; t < lp.size(); ++t) out[t] = kl_term(lp[t], lr[t]);
  return out;
}

GrpoLoss::GrpoLoss(const PolicyParams& ref, const std::vector<TacticGroup>& groups, const GrpoConfig& config)
    : epsilon_(config.clip_epsilon), kl_beta_(config.kl_beta) {
  for (const auto& g : groups) {
    Group out{vocab().encode(g.prompt.text), {}};
    const auto enc = encode_prompt(ref, out.prompt);
    for (std::size_t i = 0; i < g.tactics.size(); ++i) {
      const auto& t = g.tactics[i];
      Output o{t.tokens, t.token_logprobs, trace_sequence(ref, enc, t.tokens).token_logprobs, g.advantages[i]};
      out.outputs.push_back(std::move(o));
    }
    groups_.push_back(std::move(out));
  }
}

double GrpoLoss::evaluate(const PolicyParams& params, Gradient* grad) const {
  if (grad) *grad = Gradient(params.layout());
  if (groups_.empty()) return 0.0;
  const double batch_scale = 1.0 / static_cast<double>(groups_.size());
  double objective = 0;
  std::vector<double> drive_grad;
  for (const auto& g : groups_) {
    if (g.outputs.empty()) continue;
    const auto enc = encode_prompt(params, g.prompt);
    drive_grad.assign(static_cast<std::size_t>(params.layout().dims().hidden), 0.0);
    const double group_scale = 1.0 / static_cast<double>(g.outputs.size());
    double group_total = 0;
    for (const auto& o : g.outputs) {
      const auto tr = trace_sequence(params, enc, o.tokens);
      const std::size_t n = o.tokens.size();
      if (n == 0) continue;
      const double token_scale = 1.0 / static_cast<double>(n);
      std::vector<double> seeds(n);
      double sum = 0;
      for (std::size_t t = 0; t < n; ++t) {
        const double lp = tr.token_logprobs[t];
        const double ratio = std::exp(lp - o.old_logprobs[t]);
        if (!std::isfinite(ratio)) throw NonFiniteObjective("probability ratio overflow");
        const double unclipped = ratio * o.advantage;
        const double clipped = std::clamp(ratio, 1.0 - epsilon_, 1.0 + epsilon_) * o.advantage;
        sum += clipped_surrogate(ratio, o.advantage, epsilon_) - kl_beta_ * kl_term(lp, o.ref_logprobs[t]);
        // d/d lp of the surrogate is ratio * A on the unclipped branch and 0
        // where the clip is active; the KL part contributes -beta (1 - r).
        const double r = std::exp(o.ref_logprobs[t] - lp);
        const double d = (unclipped <= clipped ? unclipped : 0.0) - kl_beta_ * (1.0 - r);
        seeds[t] = -d * token_scale * group_scale * batch_scale;
      }
      group_total += sum * token_scale;
      if (grad) backprop_sequence(params, enc, tr, seeds, *grad, drive_grad);
    }
    objective += group_total * group_scale;
    if (grad) backprop_prompt(params, enc, drive_grad, *grad);
  }
  return -objective * batch_scale;
}

double GrpoLoss::value(const PolicyParams& params) const { return evaluate(params, nullptr); }
double GrpoLoss::value_and_gradient(const PolicyParams& params, Gradient& grad) const {
  return evaluate(params, &grad);
}

double grpo_objective(const PolicyParams& params, const PolicyParams& ref, const TacticGroup& group,
                      const GrpoConfig& config) {
  return -GrpoLoss(ref, {group}, config).value(params);
}

void adam_step(AdamState& state, PolicyParams& params, const Gradient& grad, const OptimizerConfig& config) {
  auto w = params.values();
  auto g = grad.values();
  if (state.m.size() != w.size()) {
    state.m.assign(w.size(), 0.0);
    state.v.assign(w.size(), 0.0);
    state.t = 0;
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < w.size(); ++i) {
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g[i];
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g[i] * g[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    w[i] -= config.learning_rate * (mhat / (std::sqrt(vhat) + config.epsilon) + config.weight_decay * w[i]);
  }
}

double mean_nll(const PolicyParams& params, const std::vector<SftExample>& examples) {
  return sft_loss(params, examples);
}

TrainResult train_sft(const std::vector<StateRef>& states, const PolicyParams& init, const SftConfig& config,
                      const PromptConfig& prompt_config, const TrainHooks& hooks) {
  if (states.empty()) throw ConfigError("sft: no training states");
  const auto examples = sft_examples(states, prompt_config);
  TrainResult result{init, {}};
  AdamState adam;
  Cursor cursor(examples.size(), derive_seed(config.seed, "sft-order"));
  for (std::size_t iter = 0; iter < config.steps; ++iter) {
    std::vector<SftExample> batch;
    for (std::size_t b = 0; b < config.batch_size; ++b) batch.push_back(examples[cursor.next()]);
    const auto lg = loss_gradient(result.params, SftLoss(batch));
    result.log.push_back({iter, lg.value, std::nullopt, std::nullopt, lg.gradient.norm(), std::nullopt});
    adam_step(adam, result.params, lg.gradient, config.optimizer);
    if (hooks.on_iteration) hooks.on_iteration(iter, result.params);
  }
  return result;
}

TrainResult train_dpo(const std::vector<StateRef>& states, const PolicyParams& base, const DpoConfig& config,
                      const PromptConfig& prompt_config, const std::vector<PreferenceTriplet>* offline_triplets,
                      const TrainHooks& hooks) {
  if (config.sync_every == 0) throw ConfigError("dpo: sync_every must be >= 1");
  if (!(config.beta > 0)) throw ConfigError("dpo: beta must be positive");
  const bool online = offline_triplets == nullptr;
  if (online != config.online)
    throw ConfigError(config.online ? "dpo: online mode does not take a triplet file"
                                    : "dpo: offline mode needs a triplet file");
  if (online && states.empty()) throw ConfigError("dpo: no training states");
  if (!online && offline_triplets->empty()) throw ConfigError("dpo: empty triplet file");

  TrainResult result{base, {}};
  PolicyParams sampler = base;
  AdamState adam;
  const DpoDataConfig data{config.strategy, config.dropout_p, config.width, config.seed};
  Cursor cursor(online ? states.size() : offline_triplets->size(), derive_seed(config.seed, "dpo-order"));
  std::deque<PreferenceTriplet> buffer;

  for (std::size_t iter = 0; iter < config.steps; ++iter) {
    std::vector<PreferenceTriplet> batch;
    if (online) {
      if (iter > 0 && iter % config.sync_every == 0) {
        sampler = result.params;
        buffer.clear();
      }
      std::size_t dry = 0;
      while (buffer.size() < config.batch_size) {
        const std::uint64_t epoch = cursor.upcoming_epoch();
        const StateRef& ref = states[cursor.next()];
        auto part = curate_state(ref, sampler, data, prompt_config, epoch);
        dry = part.empty() ? dry + 1 : 0;
        if (dry > states.size()) throw GenerationExhausted("dpo: sampler yields no preference pairs");
        buffer.insert(buffer.end(), part.begin(), part.end());
      }
      batch.assign(buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(config.batch_size));
      buffer.erase(buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(config.batch_size));
    } else {
      for (std::size_t b = 0; b < config.batch_size; ++b) batch.push_back((*offline_triplets)[cursor.next()]);
    }
    if (hooks.on_triplets) hooks.on_triplets(iter, batch);
    const auto lg = loss_gradient(result.params, DpoLoss(base, batch, config.beta));
    std::optional<std::string> old_hash;
    if (online) old_hash = sampler.content_hash();
    result.log.push_back({iter, lg.value, std::nullopt, std::nullopt, lg.gradient.norm(), old_hash});
    adam_step(adam, result.params, lg.gradient, config.optimizer);
    if (hooks.on_iteration) hooks.on_iteration(iter, result.params);
  }
  return result;
}

TacticGroup sample_group(const StateRef& ref, const PolicyParams& sampler, const GrpoConfig& config,
                         const PromptConfig& prompt_config, const RewardConfig& reward_config,
                         std::uint64_t round) {
  Rng rng(derive_seed(state_seed(config.seed, ref, round), "dropout"));
  const Prompt prompt =
      render_prompt(ref.state(), dropout_premises(state_premises(ref, prompt_config), config.dropout_p, rng));
  TacticGroup g = build_group(ref.state(), prompt, ref.library(), sampler, ref.gold_tactic(), config.width,
                              prompt_config.max_tactic_len, reward_config);
  g.theorem = ref.theorem();
  g.step = ref.step;
  return g;
}

TrainResult train_grpo(const std::vector<StateRef>& states, const PolicyParams& base, const GrpoConfig& config,
                       const PromptConfig& prompt_config, const RewardConfig& reward_config,
                       const TrainHooks& hooks) {
  if (config.sync_every == 0) throw ConfigError("grpo: sync_every must be >= 1");
  if (!(config.clip_epsilon > 0 && config.clip_epsilon < 1)) throw ConfigError("grpo: clip_epsilon must be in (0, 1)");
  if (config.kl_beta < 0) throw ConfigError("grpo: kl_beta must be >= 0");
  if (config.width == 0) throw ConfigError("grpo: width must be >= 1");
  if (states.empty()) throw ConfigError("grpo: no training states");

  TrainResult result{base, {}};
  PolicyParams sampler = base;
  AdamState adam;
  Cursor cursor(states.size(), derive_seed(config.seed, "grpo-order"));
  for (std::size_t iter = 0; iter < config.steps; ++iter) {
    if (iter > 0 && iter % config.sync_every == 0) sampler = result.params;
    std::vector<TacticGroup> groups;
    double reward_sum = 0;
    std::size_t valid = 0, total = 0;
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      const std::uint64_t epoch = cursor.upcoming_epoch();
      groups.push_back(sample_group(states[cursor.next()], sampler, config, prompt_config, reward_config, epoch));
      for (std::size_t i = 0; i < groups.back().size(); ++i) {
        reward_sum += groups.back().rewards[i];
        valid += is_valid(groups.back().outcomes[i]) ? 1 : 0;
        ++total;
      }
    }
    if (hooks.on_groups) hooks.on_groups(iter, groups);
    const auto lg = loss_gradient(result.params, GrpoLoss(base, groups, config));
    const double n = static_cast<double>(std::max<std::size_t>(total, 1));
    result.log.push_back({iter, -lg.value, reward_sum / n, static_cast<double>(valid) / n, lg.gradient.norm(),
                          sampler.content_hash()});
    adam_step(adam, result.params, lg.gradient, config.optimizer);
    if (hooks.on_iteration) hooks.on_iteration(iter, result.params);
  }
  return result;
}

}  // namespace tacticrl
