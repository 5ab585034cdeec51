#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "tacticrl/beam.hpp"
#include "tacticrl/errors.hpp"
#include "tacticrl/gradcheck.hpp"
#include "tacticrl/trainers.hpp"
#include "toy_beam.hpp"

using namespace tacticrl;
using namespace tacticrl::toy;

namespace {

Prompt sample_prompt(const std::string& statement) {
  ProofState s = ProofState::initial(parse_formula(statement));
  std::vector<Premise> premises = {{"lem0", parse_formula("A -> B")}, {"lem3", parse_formula("C & D -> A")}};
  return render_prompt(s, premises);
}

void check_same(const std::vector<BeamHypothesis>& a, const std::vector<BeamHypothesis>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].tokens == b[i].tokens);
    CHECK(a[i].score == b[i].score);
  }
}

}  // namespace

TEST_CASE("decoder distributions are normalized and log-probs are non-positive") {
  const auto params = init_policy(5, PolicyDims{});
  const auto& vocab = Vocabulary::standard();
  for (const std::string stmt : {"A -> A", "(A -> B) -> (B -> C) -> A -> C", "A & B | G"}) {
    const auto enc = encode_prompt(params, vocab.encode(sample_prompt(stmt).text));
    std::vector<double> h, lp;
    std::vector<double> prev;
    const auto tactic = vocab.encode_tactic("apply lem3");
    int input = vocab.bos();
    for (int t : tactic) {
      decoder_step(params, enc, prev, input, h, lp);
      REQUIRE(lp.size() == 57);
      double s = 0;
      for (double v : lp) {
        s += std::exp(v);
        CHECK(v <= 0);
      }
      CHECK(std::abs(s - 1.0) <= 1e-12);
      prev = h;
      input = t;
    }
  }
}

TEST_CASE("zero parameters give the uniform distribution") {
  const auto& vocab = Vocabulary::standard();
  PolicyParams zero(PolicyDims{}, vocab);
  const auto lps = sequence_logprobs(zero, sample_prompt("A -> B -> A"), "intro h");
  REQUIRE(lps.size() == 8);
  for (double v : lps) CHECK(v == doctest::Approx(-std::log(57.0)).epsilon(1e-14));
}

TEST_CASE("initialization is seeded and bounded") {
  const auto a = init_policy(11, PolicyDims{});
  const auto b = init_policy(11, PolicyDims{});
  const auto c = init_policy(12, PolicyDims{});
  CHECK(a == b);
  CHECK(a.content_hash() == b.content_hash());
  CHECK_FALSE(a == c);
  for (double v : a.values()) CHECK(std::abs(v) <= 0.08);
  CHECK(a.layout().input_vocab() == 58);
  CHECK(a.layout().output_vocab() == 57);
}

TEST_CASE("unknown characters raise TokenizationError") {
  const auto params = init_policy(1, PolicyDims{});
  CHECK_THROWS_AS(sequence_logprobs(params, sample_prompt("A"), "intro $"), TokenizationError);
}

TEST_CASE("beam search on a 3-token table matches exhaustive enumeration") {
  // Token 0 is the best first token, but the best pair starts with token 1.
  TableModel m{3, {{{}, {2, 1, 0}}, {{0}, {0, 0, 0}}, {{1}, {3, 0, 0}}, {{2}, {0, 0, 0}}}, std::nullopt, {}};
  const auto all = enumerate_all(m, 2);
  REQUIRE(all.size() == 9);
  const auto beam = beam_search(m, 2, 2);
  REQUIRE(beam.size() == 2);
  CHECK(beam[0].tokens == std::vector<int>{1, 0});
  CHECK(beam[1].tokens == std::vector<int>{0, 0});
  check_same(beam, {all.begin(), all.begin() + 2});
}

TEST_CASE("beam search is exact when the width covers every sequence") {
  Rng rng(99);
  for (int vocab = 2; vocab <= 5; ++vocab) {
    for (std::size_t len = 1; len <= 3; ++len) {
      for (std::optional<int> end : {std::optional<int>{}, std::optional<int>{0}}) {
        const auto m = random_table(vocab, len, end, rng, false);
        std::size_t w = 1;
        for (std::size_t i = 0; i < len; ++i) w *= static_cast<std::size_t>(vocab);
        const auto all = enumerate_all(m, len);
        check_same(beam_search(m, w, len), all);
        check_same(beam_search(m, w + 3, len), all);
      }
    }
  }
}

TEST_CASE("beam search is exact at every width for prefix-independent logits") {
  Rng rng(7);
  for (int vocab = 2; vocab <= 5; ++vocab) {
    for (std::size_t len = 1; len <= 3; ++len) {
      const auto m = random_table(vocab, len, std::nullopt, rng, true);
      const auto all = enumerate_all(m, len);
      for (std::size_t w = 1; w <= all.size(); ++w) check_same(beam_search(m, w, len), {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(w)});
    }
  }
}

TEST_CASE("width one is greedy decoding") {
  const auto params = init_policy(21, PolicyDims{});
  const Prompt prompt = sample_prompt("(A -> B) -> A -> B");
  const auto& vocab = Vocabulary::standard();
  const auto enc = encode_prompt(params, vocab.encode(prompt.text));
  std::vector<int> greedy;
  std::vector<double> h, lp, prev;
  int input = vocab.bos();
  for (std::size_t t = 0; t < 16; ++t) {
    decoder_step(params, enc, prev, input, h, lp);
    int best = static_cast<int>(std::max_element(lp.begin(), lp.end()) - lp.begin());
    greedy.push_back(best);
    if (best == Vocabulary::eos()) break;
    prev = h;
    input = best;
  }
  const auto beam = sample_beam(params, prompt, 1, 16);
  REQUIRE(beam.size() == 1);
  CHECK(beam[0].tokens == greedy);
}

TEST_CASE("sample_beam output is sorted, distinct and additive") {
  const auto params = init_policy(3, PolicyDims{});
  const Prompt prompt = sample_prompt("A & B -> B & A");
  const auto out = sample_beam(params, prompt, 8, 12);
  REQUIRE(!out.empty());
  CHECK(out.size() <= 8);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(seen.insert(out[i].text).second);
    CHECK(out[i].score == sum_logprobs(out[i].token_logprobs));
    if (i > 0) CHECK(out[i - 1].score >= out[i].score);
    CHECK(out[i].token_logprobs == sequence_logprobs(params, prompt, std::span<const int>(out[i].tokens)));
  }
  CHECK(out == sample_beam(params, prompt, 8, 12));
}

TEST_CASE("SFT loss gradient matches finite differences") {
  const auto params = init_policy(4, PolicyDims{});
  std::vector<SftExample> batch = {{sample_prompt("A -> A"), "intro h"},
                                   {sample_prompt("A & B -> A"), "cases h"},
                                   {sample_prompt("A -> B | A"), "right"},
                                   {sample_prompt("B"), "apply lem0"}};
  SftLoss loss(batch);
  const auto report = finite_difference_check(params, loss, 3e-4, 400, 1);
  CAPTURE(report.worst_coordinate);
  CAPTURE(report.worst_analytic);
  CAPTURE(report.worst_numeric);
  CHECK(report.coordinates == 400);
  CHECK(report.max_relative_error <= 1e-4);

  const auto lg = loss_gradient(params, loss);
  CHECK(lg.gradient.layout() == params.layout());
  CHECK(lg.gradient.values().size() == params.values().size());
  CHECK(lg.value == doctest::Approx(loss.value(params)).epsilon(1e-12));
}

TEST_CASE("a constant-zero loss has a zero gradient") {
  const auto params = init_policy(4, PolicyDims{});
  SftLoss empty({});
  const auto lg = loss_gradient(params, empty);
  CHECK(lg.value == 0);
  CHECK(lg.gradient.norm() == 0);
}
