#include "tacticrl/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "tacticrl/errors.hpp"

namespace tacticrl {

namespace {

struct Key {
  std::string section;
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError("expected a number, got '" + v + "'");
  return out;
}

double parse_double(const std::string& v) {
  // from_chars for double is not available in libstdc++ 11.
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw ConfigError("expected a real number, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("expected true or false, got '" + v + "'");
}

// Shortest form that reads back identically.
std::string fmt(double v) {
  std::string s;
  for (int p = 1; p <= 17; ++p) {
    std::ostringstream t;
    t.precision(p);
    t << v;
    s = t.str();
    if (std::stod(s) == v) break;
  }
  return s;
}

std::string fmt(bool v) { return v ? "true" : "false"; }
template <class T>
  requires std::is_integral_v<T>
std::string fmt(T v) {
  return std::to_string(v);
}

#define TACTICRL_KEY(section, name, field, parse)                                       \
  Key {                                                                                \
    section, name, [](RunConfig& c, const std::string& v) { c.field = parse(v); },     \
        [](const RunConfig& c) { return fmt(c.field); }                                \
  }

const std::vector<Key>& keys() {
  using U64 = std::uint64_t;
  using Size = std::size_t;
  static const auto pu64 = parse_number<U64>;
  static const auto psize = parse_number<Size>;
  static const auto pint = parse_number<int>;
  static const std::vector<Key> k = {
      TACTICRL_KEY("run", "seed", seed, pu64),
      Key{"run", "out_dir", [](RunConfig& c, const std::string& v) { c.out_dir = v; },
          [](const RunConfig& c) { return c.out_dir; }},

      TACTICRL_KEY("corpus", "n", corpus.n, psize),
      TACTICRL_KEY("corpus", "max_depth", corpus.max_depth, pint),
      TACTICRL_KEY("corpus", "atoms", corpus.atoms, pint),
      TACTICRL_KEY("corpus", "library_size", corpus.library_size, psize),
      TACTICRL_KEY("corpus", "novel_holdout", corpus.novel_holdout, psize),
      TACTICRL_KEY("corpus", "seed", corpus.seed, pu64),
      TACTICRL_KEY("corpus", "split_train", corpus.splits[0], parse_double),
      TACTICRL_KEY("corpus", "split_validation", corpus.splits[1], parse_double),
      TACTICRL_KEY("corpus", "split_test_random", corpus.splits[2], parse_double),
      TACTICRL_KEY("corpus", "split_test_novel", corpus.splits[3], parse_double),
      TACTICRL_KEY("corpus", "oracle_depth", corpus.oracle_depth, pint),
      TACTICRL_KEY("corpus", "node_budget", corpus.node_budget, psize),
      TACTICRL_KEY("corpus", "min_proof_length", corpus.min_proof_length, psize),
      TACTICRL_KEY("corpus", "attempt_factor", corpus.attempt_factor, psize),

      TACTICRL_KEY("policy", "embed", policy.embed, pint),
      TACTICRL_KEY("policy", "hidden", policy.hidden, pint),

      TACTICRL_KEY("prompt", "retrieve_k", prompt.retrieve_k, psize),
      TACTICRL_KEY("prompt", "max_tactic_len", prompt.max_tactic_len, psize),

      TACTICRL_KEY("reward", "softplus_beta", reward.softplus_beta, parse_double),

      TACTICRL_KEY("train.sft", "steps", sft.steps, psize),
      TACTICRL_KEY("train.sft", "batch_size", sft.batch_size, psize),
      TACTICRL_KEY("train.sft", "learning_rate", sft.optimizer.learning_rate, parse_double),
      TACTICRL_KEY("train.sft", "beta1", sft.optimizer.beta1, parse_double),
      TACTICRL_KEY("train.sft", "beta2", sft.optimizer.beta2, parse_double),
      TACTICRL_KEY("train.sft", "weight_decay", sft.optimizer.weight_decay, parse_double),

      TACTICRL_KEY("train.dpo", "beta", dpo.beta, parse_double),
      Key{"train.dpo", "strategy",
          [](RunConfig& c, const std::string& v) { c.dpo.strategy = parse_pairing_strategy(v); },
          [](const RunConfig& c) { return std::string(to_string(c.dpo.strategy)); }},
      TACTICRL_KEY("train.dpo", "online", dpo.online, parse_bool),
      TACTICRL_KEY("train.dpo", "dropout_p", dpo.dropout_p, parse_double),
      TACTICRL_KEY("train.dpo", "width", dpo.width, psize),
      TACTICRL_KEY("train.dpo", "sync_every", dpo.sync_every, psize),
      TACTICRL_KEY("train.dpo", "steps", dpo.steps, psize),
      TACTICRL_KEY("train.dpo", "batch_size", dpo.batch_size, psize),
      TACTICRL_KEY("train.dpo", "learning_rate", dpo.optimizer.learning_rate, parse_double),
      TACTICRL_KEY("train.dpo", "beta1", dpo.optimizer.beta1, parse_double),
      TACTICRL_KEY("train.dpo", "beta2", dpo.optimizer.beta2, parse_double),
      TACTICRL_KEY("train.dpo", "weight_decay", dpo.optimizer.weight_decay, parse_double),

      TACTICRL_KEY("train.grpo", "clip_epsilon", grpo.clip_epsilon, parse_double),
      TACTICRL_KEY("train.grpo", "kl_beta", grpo.kl_beta, parse_double),
      TACTICRL_KEY("train.grpo", "width", grpo.width, psize),
      TACTICRL_KEY("train.grpo", "sync_every", grpo.sync_every, psize),
      TACTICRL_KEY("train.grpo", "steps", grpo.steps, psize),
      TACTICRL_KEY("train.grpo", "batch_size", grpo.batch_size, psize),
      TACTICRL_KEY("train.grpo", "dropout_p", grpo.dropout_p, parse_double),
      TACTICRL_KEY("train.grpo", "learning_rate", grpo.optimizer.learning_rate, parse_double),
      TACTICRL_KEY("train.grpo", "beta1", grpo.optimizer.beta1, parse_double),
      TACTICRL_KEY("train.grpo", "beta2", grpo.optimizer.beta2, parse_double),
      TACTICRL_KEY("train.grpo", "weight_decay", grpo.optimizer.weight_decay, parse_double),

      TACTICRL_KEY("search", "width", search.width, psize),
      TACTICRL_KEY("search", "max_expansions", search.max_expansions, psize),
      TACTICRL_KEY("search", "max_depth", search.max_depth, psize),
      TACTICRL_KEY("search", "record_time", search.record_time, parse_bool),

      Key{"report", "budgets",
          [](RunConfig& c, const std::string& v) {
            c.report.budgets.clear();
            std::stringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ',')) c.report.budgets.push_back(parse_number<std::size_t>(trim(item)));
          },
          [](const RunConfig& c) {
            std::string s;
            for (std::size_t i = 0; i < c.report.budgets.size(); ++i)
              s += (i ? ", " : "") + std::to_string(c.report.budgets[i]);
            return s;
          }},
  };
  return k;
}

#undef TACTICRL_KEY

}  // namespace

void RunConfig::propagate_seed() {
  sft.seed = seed;
  dpo.seed = seed;
  grpo.seed = seed;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  RunConfig c;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  bool section_known = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    const auto hash = line.find_first_of("#;");
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(body.substr(1, body.size() - 2));
      section_known = false;
      for (const auto& k : keys()) section_known |= k.section == section;
      if (!section_known) throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    if (section.empty()) throw ConfigError(where + "key outside of any section");
    const std::string name = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const Key* key = nullptr;
    for (const auto& k : keys())
      if (k.section == section && k.name == name) key = &k;
    if (!key) throw ConfigError(where + "unknown key '" + section + "." + name + "'");
    try {
      key->set(c, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + section + "." + name + ": " + e.what());
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInput("cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string render_config(const RunConfig& config) {
  std::string out, section;
  for (const auto& k : keys()) {
    if (k.section != section) {
      if (!section.empty()) out += "\n";
      section = k.section;
      out += "[" + section + "]\n";
    }
    out += k.name + " = " + k.get(config) + "\n";
  }
  return out;
}

void validate_config(const RunConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (c.corpus.n == 0) fail("corpus.n must be positive");
  if (c.corpus.max_depth < 1) fail("corpus.max_depth must be >= 1");
  if (c.corpus.atoms < 1 || c.corpus.atoms > 8) fail("corpus.atoms must be in [1, 8]");
  double total = 0;
  for (double s : c.corpus.splits) {
    if (s < 0) fail("corpus split fractions must be non-negative");
    total += s;
  }
  if (std::abs(total - 1.0) > 1e-9) fail("corpus split fractions must sum to 1");
  if (c.policy.embed < 1 || c.policy.hidden < 1) fail("policy dims must be positive");
  if (c.prompt.max_tactic_len < 1) fail("prompt.max_tactic_len must be >= 1");
  if (!(c.reward.softplus_beta > 0)) fail("reward.softplus_beta must be positive");
  if (c.sft.batch_size == 0 || c.dpo.batch_size == 0 || c.grpo.batch_size == 0) fail("batch_size must be >= 1");
  if (!(c.dpo.beta > 0)) fail("train.dpo.beta must be positive");
  if (c.dpo.dropout_p < 0 || c.dpo.dropout_p >= 1) fail("train.dpo.dropout_p must be in [0, 1)");
  if (c.grpo.dropout_p < 0 || c.grpo.dropout_p >= 1) fail("train.grpo.dropout_p must be in [0, 1)");
  if (c.dpo.sync_every == 0 || c.grpo.sync_every == 0) fail("sync_every must be >= 1");
  if (!(c.grpo.clip_epsilon > 0 && c.grpo.clip_epsilon < 1)) fail("train.grpo.clip_epsilon must be in (0, 1)");
  if (c.grpo.kl_beta < 0) fail("train.grpo.kl_beta must be >= 0");
  if (c.grpo.width == 0 || c.dpo.width == 0 || c.search.width == 0) fail("width must be >= 1");
}

}  // namespace tacticrl
