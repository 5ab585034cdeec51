#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tacticrl/datagen.hpp"
#include "tacticrl/gradcheck.hpp"

namespace tacticrl {

struct SftExample {
  Prompt prompt;
  std::string tactic;
};

std::vector<SftExample> sft_examples(const std::vector<StateRef>& states, const PromptConfig& config);

/// Mean over the batch of the gold tactic's negative log-likelihood
/// (EOS included).
class SftLoss : public Objective {
 public:
  explicit SftLoss(const std::vector<SftExample>& batch);
  double value(const PolicyParams& params) const override;
  double value_and_gradient(const PolicyParams& params, Gradient& grad) const override;

 private:
  struct Item {
    std::vector<int> prompt;
    std::vector<int> target;
  };
  std::vector<Item> items_;
};

double sft_loss(const PolicyParams& params, const std::vector<SftExample>& batch);

/// -log sigmoid(beta * (d+ - d-)) averaged over the batch, where d is the
/// summed log-ratio of the policy to the reference on a whole tactic.
class DpoLoss : public Objective {
 public:
  DpoLoss(const PolicyParams& ref, const std::vector<PreferenceTriplet>& batch, double beta);
  double value(const PolicyParams& params) const override;
  double value_and_gradient(const PolicyParams& params, Gradient& grad) const override;

 private:
  struct Item {
    std::vector<int> prompt;
    std::vector<int> chosen;
    std::vector<int> rejected;
    double ref_chosen;
    double ref_rejected;
  };
  std::vector<Item> items_;
  double beta_;
  double evaluate(const PolicyParams& params, Gradient* grad) const;
};

double dpo_loss(const PolicyParams& params, const PolicyParams& ref, const std::vector<PreferenceTriplet>& batch,
                double beta);

/// -log sigmoid(beta * delta_pos - beta * delta_neg) for one pair of log-ratios.
double dpo_pair_loss(double delta_pos, double delta_neg, double beta);

/// r - ln r - 1 with r = pi_ref / pi_theta, from the two log-probs.
double kl_term(double logp_theta, double logp_ref);

std::vector<double> kl_estimate(const PolicyParams& params, const PolicyParams& ref, const Prompt& prompt,
                                std::span<const int> tokens);

/// min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A)
double clipped_surrogate(double ratio, double advantage, double epsilon);

struct OptimizerConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

struct GrpoConfig {
  double clip_epsilon = 0.2;
  double kl_beta = 0.04;
  std::size_t width = 8;
  std::size_t sync_every = 50;
  std::size_t steps = 1000;
  std::size_t batch_size = 16;
  double dropout_p = 0.25;
  std::uint64_t seed = 1;
  OptimizerConfig optimizer;
};

/// Negated group objective averaged over groups. The old-policy log-probs
/// are the ones recorded in each group; reference log-probs are taken from
/// `ref` once at construction.
class GrpoLoss : public Objective {
 public:
  GrpoLoss(const PolicyParams& ref, const std::vector<TacticGroup>& groups, const GrpoConfig& config);
  double value(const PolicyParams& params) const override;
  double value_and_gradient(const PolicyParams& params, Gradient& grad) const override;

 private:
  struct Output {
    std::vector<int> tokens;
    std::vector<double> old_logprobs;
    std::vector<double> ref_logprobs;
    double advantage;
  };
  struct Group {
    std::vector<int> prompt;
    std::vector<Output> outputs;
  };
  std::vector<Group> groups_;
  double epsilon_;
  double kl_beta_;
  double evaluate(const PolicyParams& params, Gradient* grad) const;
};

/// The objective to maximize for one group. Throws NonFiniteObjective when a
/// probability ratio overflows.
double grpo_objective(const PolicyParams& params, const PolicyParams& ref, const TacticGroup& group,
                      const GrpoConfig& config);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t t = 0;
};

/// AdamW: bias-corrected moments, decoupled weight decay.
void adam_step(AdamState& state, PolicyParams& params, const Gradient& grad, const OptimizerConfig& config);

struct SftConfig {
  std::size_t steps = 3000;
  std::size_t batch_size = 16;
  std::uint64_t seed = 1;
  OptimizerConfig optimizer;
};

struct DpoConfig {
  double beta = 0.1;
  PairingStrategy strategy = PairingStrategy::ZeroAccuracy;
  bool online = true;
  double dropout_p = 0.3;
  std::size_t width = 8;
  std::size_t sync_every = 50;
  std::size_t steps = 1000;
  std::size_t batch_size = 16;
  std::uint64_t seed = 1;
  OptimizerConfig optimizer;
};

struct TrainLogRecord {
  std::size_t iter = 0;
  double loss_or_objective = 0;
  std::optional<double> mean_reward;
  std::optional<double> frac_valid;
  double grad_norm = 0;
  std::optional<std::string> theta_old_hash;
};

struct TrainResult {
  PolicyParams params;
  std::vector<TrainLogRecord> log;
};

/// Observation points for tests and tooling; all optional.
struct TrainHooks {
  std::function<void(std::size_t iter, const std::vector<PreferenceTriplet>&)> on_triplets;
  std::function<void(std::size_t iter, const std::vector<TacticGroup>&)> on_groups;
  std::function<void(std::size_t iter, const PolicyParams&)> on_iteration;
};

/// Mean per-example NLL.
double mean_nll(const PolicyParams& params, const std::vector<SftExample>& examples);

TrainResult train_sft(const std::vector<StateRef>& states, const PolicyParams& init, const SftConfig& config,
                      const PromptConfig& prompt_config, const TrainHooks& hooks = {});

/// Online when `offline_triplets` is null and config.online is set; the
/// base checkpoint serves as both the reference and the initial sampler.
TrainResult train_dpo(const std::vector<StateRef>& states, const PolicyParams& base, const DpoConfig& config,
                      const PromptConfig& prompt_config, const std::vector<PreferenceTriplet>* offline_triplets,
                      const TrainHooks& hooks = {});

TrainResult train_grpo(const std::vector<StateRef>& states, const PolicyParams& base, const GrpoConfig& config,
                       const PromptConfig& prompt_config, const RewardConfig& reward_config,
                       const TrainHooks& hooks = {});

/// GRPO group for one state with premise dropout drawn from state_seed.
TacticGroup sample_group(const StateRef& ref, const PolicyParams& sampler, const GrpoConfig& config,
                         const PromptConfig& prompt_config, const RewardConfig& reward_config,
                         std::uint64_t round);

}  // namespace tacticrl
