#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tacticrl/premises.hpp"
#include "tacticrl/vocab.hpp"

namespace tacticrl {

struct PolicyDims {
  int embed = 32;
  int hidden = 64;
  friend bool operator==(const PolicyDims&, const PolicyDims&) = default;
};

enum class Tensor : int {
  Embedding,    // input_vocab x embed
  EncoderProj,  // embed x embed
  CellInput,    // hidden x embed
  CellHidden,   // hidden x hidden
  CellContext,  // hidden x embed
  CellBias,     // hidden
  OutputProj,   // output_vocab x hidden
  OutputBias,   // output_vocab
};

inline constexpr int kTensorCount = 8;
inline constexpr std::array<Tensor, kTensorCount> kAllTensors = {
    Tensor::Embedding, Tensor::EncoderProj, Tensor::CellInput,  Tensor::CellHidden,
    Tensor::CellContext, Tensor::CellBias,  Tensor::OutputProj, Tensor::OutputBias};

std::string_view tensor_name(Tensor t);

/// Shapes and offsets of the named tensors inside one flat buffer.
class ParameterLayout {
 public:
  ParameterLayout() = default;
  ParameterLayout(PolicyDims dims, int input_vocab, int output_vocab);

  PolicyDims dims() const { return dims_; }
  int input_vocab() const { return input_vocab_; }
  int output_vocab() const { return output_vocab_; }
  std::size_t size() const { return total_; }
  std::size_t offset(Tensor t) const { return offsets_[static_cast<int>(t)]; }
  std::size_t rows(Tensor t) const { return rows_[static_cast<int>(t)]; }
  std::size_t cols(Tensor t) const { return cols_[static_cast<int>(t)]; }
  std::size_t count(Tensor t) const { return rows(t) * cols(t); }
  /// Tensor that owns flat coordinate `index`.
  Tensor owner(std::size_t index) const;

  friend bool operator==(const ParameterLayout&, const ParameterLayout&) = default;

 private:
  PolicyDims dims_;
  int input_vocab_ = 0;
  int output_vocab_ = 0;
  std::array<std::size_t, kTensorCount> offsets_{};
  std::array<std::size_t, kTensorCount> rows_{};
  std::array<std::size_t, kTensorCount> cols_{};
  std::size_t total_ = 0;
};

/// A flat, named parameter-shaped buffer. PolicyParams and Gradient share it
/// but are distinct types so a gradient cannot be passed where weights are
/// expected.
class ParameterBlock {
 public:
  const ParameterLayout& layout() const { return layout_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<double> tensor(Tensor t) { return values().subspan(layout_.offset(t), layout_.count(t)); }
  std::span<const double> tensor(Tensor t) const {
    return values().subspan(layout_.offset(t), layout_.count(t));
  }

 protected:
  ParameterBlock() = default;
  explicit ParameterBlock(ParameterLayout layout) : layout_(layout), values_(layout.size(), 0.0) {}
  ParameterLayout layout_;
  std::vector<double> values_;
};

class PolicyParams : public ParameterBlock {
 public:
  PolicyParams() = default;
  /// All-zero parameters (uniform output distribution).
  explicit PolicyParams(ParameterLayout layout) : ParameterBlock(layout) {}
  PolicyParams(PolicyDims dims, const Vocabulary& vocab)
      : ParameterBlock(ParameterLayout(dims, vocab.input_size(), vocab.output_size())) {}

  std::uint64_t seed = 0;

  /// Content id over the parameter values (hex FNV-1a of the raw doubles).
  std::string content_hash() const;
  friend bool operator==(const PolicyParams& a, const PolicyParams& b) {
    return a.layout_ == b.layout_ && a.values_ == b.values_;
  }
};

class Gradient : public ParameterBlock {
 public:
  Gradient() = default;
  explicit Gradient(const ParameterLayout& layout) : ParameterBlock(layout) {}

  double norm() const;
  bool all_finite() const;
  Gradient& operator+=(const Gradient& other);
  Gradient& operator*=(double s);
};

/// Uniform in [-0.08, 0.08] from the seeded generator.
PolicyParams init_policy(std::uint64_t seed, PolicyDims dims, const Vocabulary& vocab = Vocabulary::standard());

/// Context computed once per prompt: c = tanh(P * mean(E[x])) and the
/// recurrent drive U*c + b shared by every decoding step.
struct PromptEncoding {
  std::vector<int> tokens;
  std::vector<double> mean;
  std::vector<double> context;
  std::vector<double> drive;
};

PromptEncoding encode_prompt(const PolicyParams& params, std::span<const int> prompt_tokens);

/// One decoder step: h = tanh(Wx*E[input] + Wh*h_prev + drive), then
/// log_softmax(Wo*h + bo). `h_prev` empty means h_0 = 0.
void decoder_step(const PolicyParams& params, const PromptEncoding& enc, std::span<const double> h_prev,
                  int input_token, std::vector<double>& h_out, std::vector<double>& log_probs_out);

/// Forward record of one target sequence, enough to backpropagate.
struct SequenceTrace {
  std::vector<int> targets;
  /// hidden[t] = h_{t+1}: state after consuming the input at step t.
  std::vector<std::vector<double>> hidden;
  std::vector<std::vector<double>> log_probs;
  std::vector<double> token_logprobs;
};

SequenceTrace trace_sequence(const PolicyParams& params, const PromptEncoding& enc, std::span<const int> targets);

/// Accumulates d(sum_t seeds[t] * token_logprob[t]) into `grad`, and the
/// same quantity w.r.t. the prompt drive into `drive_grad` (hidden-sized).
void backprop_sequence(const PolicyParams& params, const PromptEncoding& enc, const SequenceTrace& trace,
                       std::span<const double> seeds, Gradient& grad, std::vector<double>& drive_grad);

/// Pushes an accumulated drive gradient through the encoder.
void backprop_prompt(const PolicyParams& params, const PromptEncoding& enc, std::span<const double> drive_grad,
                     Gradient& grad);

/// log pi(y_t | prompt, y_<t) for every tactic token including EOS.
/// Throws TokenizationError for characters outside the vocabulary.
std::vector<double> sequence_logprobs(const PolicyParams& params, const Prompt& prompt, std::string_view tactic);

/// Same, for an explicit target id sequence (which may lack a final EOS).
std::vector<double> sequence_logprobs(const PolicyParams& params, const Prompt& prompt, std::span<const int> targets);

}  // namespace tacticrl
