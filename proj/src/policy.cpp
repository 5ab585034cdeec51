#include "tacticrl/policy.hpp"

#include <algorithm>
#include <cmath>

#include "tacticrl/hash.hpp"
#include "tacticrl/rng.hpp"

namespace tacticrl {

std::string_view tensor_name(Tensor t) {
  switch (t) {
    case Tensor::Embedding: return "embedding";
    case Tensor::EncoderProj: return "encoder_proj";
    case Tensor::CellInput: return "cell_input";
    case Tensor::CellHidden: return "cell_hidden";
    case Tensor::CellContext: return "cell_context";
    case Tensor::CellBias: return "cell_bias";
    case Tensor::OutputProj: return "output_proj";
    case Tensor::OutputBias: return "output_bias";
  }
  return "?";
}

ParameterLayout::ParameterLayout(PolicyDims dims, int input_vocab, int output_vocab)
    : dims_(dims), input_vocab_(input_vocab), output_vocab_(output_vocab) {
  const auto d = static_cast<std::size_t>(dims.embed);
  const auto h = static_cast<std::size_t>(dims.hidden);
  const auto vi = static_cast<std::size_t>(input_vocab);
  const auto vo = static_cast<std::size_t>(output_vocab);
  const std::array<std::pair<std::size_t, std::size_t>, kTensorCount> shapes = {{
      {vi, d}, {d, d}, {h, d}, {h, h}, {h, d}, {h, 1}, {vo, h}, {vo, 1}}};
  for (int i = 0; i < kTensorCount; ++i) {
    offsets_[i] = total_;
    rows_[i] = shapes[i].first;
    cols_[i] = shapes[i].second;
    total_ += rows_[i] * cols_[i];
  }
}

Tensor ParameterLayout::owner(std::size_t index) const {
  for (int i = kTensorCount - 1; i >= 0; --i) {
    if (index >= offsets_[i]) return static_cast<Tensor>(i);
  }
  return Tensor::Embedding;
}

std::string PolicyParams::content_hash() const {
  Fnv1a h;
  h.update(values());
  return h.hex();
}

double Gradient::norm() const {
  double s = 0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

bool Gradient::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Gradient& Gradient::operator+=(const Gradient& other) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Gradient& Gradient::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

PolicyParams init_policy(std::uint64_t seed, PolicyDims dims, const Vocabulary& vocab) {
  PolicyParams p(dims, vocab);
  p.seed = seed;
  Rng rng(derive_seed(seed, "policy-init"));
  for (double& v : p.values()) v = (2.0 * uniform01(rng) - 1.0) * 0.08;
  return p;
}

namespace {

// y += M x for a row-major rows x cols matrix.
void gemv_add(std::span<const double> m, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = m.data() + r * cols;
    double acc = 0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] += acc;
  }
}

// y += M^T x
void gemv_t_add(std::span<const double> m, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = m.data() + r * cols;
    const double xr = x[r];
    if (xr == 0) continue;
    for (std::size_t c = 0; c < cols; ++c) y[c] += row[c] * xr;
  }
}

// M += a b^T
void outer_add(std::span<double> m, std::size_t rows, std::size_t cols, const double* a, const double* b) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double ar = a[r];
    if (ar == 0) continue;
    double* row = m.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += ar * b[c];
  }
}

void log_softmax_inplace(std::vector<double>& z) {
  double mx = *std::max_element(z.begin(), z.end());
  double sum = 0;
  for (double v : z) sum += std::exp(v - mx);
  double lse = mx + std::log(sum);
  for (double& v : z) v -= lse;
}

}  // namespace

PromptEncoding encode_prompt(const PolicyParams& params, std::span<const int> prompt_tokens) {
  const auto& L = params.layout();
  const auto d = static_cast<std::size_t>(L.dims().embed);
  const auto h = static_cast<std::size_t>(L.dims().hidden);
  PromptEncoding enc;
  enc.tokens.assign(prompt_tokens.begin(), prompt_tokens.end());
  enc.mean.assign(d, 0.0);
  auto emb = params.tensor(Tensor::Embedding);
  for (int tok : enc.tokens) {
    const double* row = emb.data() + static_cast<std::size_t>(tok) * d;
    for (std::size_t j = 0; j < d; ++j) enc.mean[j] += row[j];
  }
  if (!enc.tokens.empty()) {
    const double n = static_cast<double>(enc.tokens.size());
    for (double& v : enc.mean) v /= n;
  }
  enc.context.assign(d, 0.0);
  gemv_add(params.tensor(Tensor::EncoderProj), d, d, enc.mean.data(), enc.context.data());
  for (double& v : enc.context) v = std::tanh(v);
  auto bias = params.tensor(Tensor::CellBias);
  enc.drive.assign(bias.begin(), bias.end());
  gemv_add(params.tensor(Tensor::CellContext), h, d, enc.context.data(), enc.drive.data());
  return enc;
}

void decoder_step(const PolicyParams& params, const PromptEncoding& enc, std::span<const double> h_prev,
                  int input_token, std::vector<double>& h_out, std::vector<double>& log_probs_out) {
  const auto& L = params.layout();
  const auto d = static_cast<std::size_t>(L.dims().embed);
  const auto h = static_cast<std::size_t>(L.dims().hidden);
  const auto vo = static_cast<std::size_t>(L.output_vocab());
  h_out.assign(enc.drive.begin(), enc.drive.end());
  const double* e = params.tensor(Tensor::Embedding).data() + static_cast<std::size_t>(input_token) * d;
  gemv_add(params.tensor(Tensor::CellInput), h, d, e, h_out.data());
  if (!h_prev.empty()) gemv_add(params.tensor(Tensor::CellHidden), h, h, h_prev.data(), h_out.data());
  for (double& v : h_out) v = std::tanh(v);
  auto ob = params.tensor(Tensor::OutputBias);
  log_probs_out.assign(ob.begin(), ob.end());
  gemv_add(params.tensor(Tensor::OutputProj), vo, h, h_out.data(), log_probs_out.data());
  log_softmax_inplace(log_probs_out);
}

SequenceTrace trace_sequence(const PolicyParams& params, const PromptEncoding& enc, std::span<const int> targets) {
  SequenceTrace tr;
  tr.targets.assign(targets.begin(), targets.end());
  tr.hidden.resize(targets.size());
  tr.log_probs.resize(targets.size());
  tr.token_logprobs.resize(targets.size());
  int input = params.layout().input_vocab() - 1;  // BOS
  for (std::size_t t = 0; t < targets.size(); ++t) {
    std::span<const double> prev = t == 0 ? std::span<const double>() : std::span<const double>(tr.hidden[t - 1]);
    decoder_step(params, enc, prev, input, tr.hidden[t], tr.log_probs[t]);
    tr.token_logprobs[t] = tr.log_probs[t][static_cast<std::size_t>(targets[t])];
    input = targets[t];
  }
  return tr;
}

void backprop_sequence(const PolicyParams& params, const PromptEncoding& enc, const SequenceTrace& trace,
                       std::span<const double> seeds, Gradient& grad, std::vector<double>& drive_grad) {
  (void)enc;
  const auto& L = params.layout();
  const auto d = static_cast<std::size_t>(L.dims().embed);
  const auto h = static_cast<std::size_t>(L.dims().hidden);
  const auto vo = static_cast<std::size_t>(L.output_vocab());
  const int bos = L.input_vocab() - 1;
  auto wo = params.tensor(Tensor::OutputProj);
  auto wx = params.tensor(Tensor::CellInput);
  auto wh = params.tensor(Tensor::CellHidden);
  auto emb = params.tensor(Tensor::Embedding);
  auto g_wo = grad.tensor(Tensor::OutputProj);
  auto g_bo = grad.tensor(Tensor::OutputBias);
  auto g_wx = grad.tensor(Tensor::CellInput);
  auto g_wh = grad.tensor(Tensor::CellHidden);
  auto g_emb = grad.tensor(Tensor::Embedding);
  drive_grad.resize(h, 0.0);

  std::vector<double> dz(vo), dh(h, 0.0), dh_next(h, 0.0), da(h);
  for (std::size_t t = trace.targets.size(); t-- > 0;) {
    const double g = seeds[t];
    const auto& ht = trace.hidden[t];
    std::fill(dh.begin(), dh.end(), 0.0);
    std::swap(dh, dh_next);  // dh now carries the gradient from step t+1
    if (g != 0) {
      const auto& lp = trace.log_probs[t];
      for (std::size_t k = 0; k < vo; ++k) dz[k] = -g * std::exp(lp[k]);
      dz[static_cast<std::size_t>(trace.targets[t])] += g;
      outer_add(g_wo, vo, h, dz.data(), ht.data());
      for (std::size_t k = 0; k < vo; ++k) g_bo[k] += dz[k];
      gemv_t_add(wo, vo, h, dz.data(), dh.data());
    }
    for (std::size_t j = 0; j < h; ++j) da[j] = dh[j] * (1.0 - ht[j] * ht[j]);
    const int input = t == 0 ? bos : trace.targets[t - 1];
    const double* e = emb.data() + static_cast<std::size_t>(input) * d;
    outer_add(g_wx, h, d, da.data(), e);
    gemv_t_add(wx, h, d, da.data(), g_emb.data() + static_cast<std::size_t>(input) * d);
    if (t > 0) {
      outer_add(g_wh, h, h, da.data(), trace.hidden[t - 1].data());
      std::fill(dh_next.begin(), dh_next.end(), 0.0);
      gemv_t_add(wh, h, h, da.data(), dh_next.data());
    }
    for (std::size_t j = 0; j < h; ++j) drive_grad[j] += da[j];
  }
}

void backprop_prompt(const PolicyParams& params, const PromptEncoding& enc, std::span<const double> drive_grad,
                     Gradient& grad) {
  const auto& L = params.layout();
  const auto d = static_cast<std::size_t>(L.dims().embed);
  const auto h = static_cast<std::size_t>(L.dims().hidden);
  auto g_b = grad.tensor(Tensor::CellBias);
  for (std::size_t j = 0; j < h; ++j) g_b[j] += drive_grad[j];
  outer_add(grad.tensor(Tensor::CellContext), h, d, drive_grad.data(), enc.context.data());
  std::vector<double> dc(d, 0.0);
  gemv_t_add(params.tensor(Tensor::CellContext), h, d, drive_grad.data(), dc.data());
  for (std::size_t j = 0; j < d; ++j) dc[j] *= 1.0 - enc.context[j] * enc.context[j];
  outer_add(grad.tensor(Tensor::EncoderProj), d, d, dc.data(), enc.mean.data());
  if (enc.tokens.empty()) return;
  std::vector<double> dmean(d, 0.0);
  gemv_t_add(params.tensor(Tensor::EncoderProj), d, d, dc.data(), dmean.data());
  const double n = static_cast<double>(enc.tokens.size());
  for (double& v : dmean) v /= n;
  auto g_emb = grad.tensor(Tensor::Embedding);
  for (int tok : enc.tokens) {
    double* row = g_emb.data() + static_cast<std::size_t>(tok) * d;
    for (std::size_t j = 0; j < d; ++j) row[j] += dmean[j];
  }
}

std::vector<double> sequence_logprobs(const PolicyParams& params, const Prompt& prompt, std::span<const int> targets) {
  const auto& vocab = Vocabulary::standard();
  auto enc = encode_prompt(params, vocab.encode(prompt.text));
  return trace_sequence(params, enc, targets).token_logprobs;
}

std::vector<double> sequence_logprobs(const PolicyParams& params, const Prompt& prompt, std::string_view tactic) {
  auto targets = Vocabulary::standard().encode_tactic(tactic);
  return sequence_logprobs(params, prompt, std::span<const int>(targets));
}

}  // namespace tacticrl
