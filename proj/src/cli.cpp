#include "tacticrl/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>

#include "tacticrl/charts.hpp"
#include "tacticrl/checkpoint.hpp"
#include "tacticrl/config.hpp"
#include "tacticrl/errors.hpp"
#include "tacticrl/hash.hpp"

namespace tacticrl {

namespace {

namespace fs = std::filesystem;

struct Common {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

struct Inputs {
  std::string corpus;
  std::string checkpoint;
  std::string triplets;
  std::string split = "test_random";
  std::string a, b;
  std::string label_a = "A", label_b = "B";
};

// Accumulates artifacts and writes the manifest and resolved config last.
class Run {
 public:
  Run(std::string command, const Common& common, const std::string& slug) : command_(std::move(command)) {
    config_ = common.config_path.empty() ? RunConfig{} : load_config(common.config_path);
    if (common.seed_given) {
      config_.seed = common.seed;
      if (slug == "corpus-gen") config_.corpus.seed = common.seed;
    }
    config_.propagate_seed();
    validate_config(config_);
    if (!common.out.empty()) {
      dir_ = common.out;
    } else {
      const char* env = std::getenv("TACTICRL_OUT");
      dir_ = (fs::path(env && *env ? env : config_.out_dir) / slug).string();
    }
    fs::create_directories(dir_);
    if (!common.config_path.empty()) input(common.config_path);
  }

  const RunConfig& config() const { return config_; }
  std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

  void input(const std::string& p) { manifest_.inputs[p] = hash_file(p); }
  void output(const std::string& name) { manifest_.outputs[name] = hash_file(path(name)); }
  void checkpoint(const std::string& name, const PolicyParams& params) {
    save_checkpoint(path(name), params);
    output(name);
    manifest_.checkpoints[name] = params.content_hash();
  }

  void finish(std::ostream& out) {
    const std::string resolved = render_config(config_);
    write_text(path("config.resolved.ini"), resolved);
    manifest_.command = command_;
    manifest_.tool_version = kToolVersion;
    manifest_.config_hash = hash_hex(resolved);
    manifest_.seed = config_.seed;
    write_manifest(path("manifest.json"), manifest_);
    out << "wrote " << dir_ << "\n";
  }

 private:
  std::string command_;
  RunConfig config_;
  std::string dir_;
  RunManifest manifest_;
};

Corpus need_corpus(Run& run, const Inputs& in) {
  if (in.corpus.empty()) throw ConfigError("--corpus is required");
  run.input(in.corpus);
  return read_corpus(in.corpus);
}

PolicyParams need_checkpoint(Run& run, const std::string& path, const char* flag) {
  if (path.empty()) throw ConfigError(std::string(flag) + " is required");
  run.input(path);
  return load_checkpoint(path);
}

Json log_json(const TrainLogRecord& r) {
  auto opt = [](const auto& o) { return o ? Json(*o) : Json(nullptr); };
  return Json{{"iter", r.iter},
              {"loss_or_objective", r.loss_or_objective},
              {"mean_reward", opt(r.mean_reward)},
              {"frac_valid", opt(r.frac_valid)},
              {"grad_norm", r.grad_norm},
              {"theta_old_hash", opt(r.theta_old_hash)}};
}

void write_log(Run& run, const std::vector<TrainLogRecord>& log) {
  std::vector<Json> lines;
  for (const auto& r : log) lines.push_back(log_json(r));
  write_jsonl(run.path("train_log.jsonl"), lines);
  run.output("train_log.jsonl");
}

void cmd_corpus_gen(Run& run, const Inputs&, std::ostream& out) {
  const Corpus c = generate_corpus(run.config().corpus);
  write_corpus(c, run.path("corpus.jsonl"));
  run.output("corpus.jsonl");
  out << "corpus: " << c.entries.size() << " theorems\n";
}

void cmd_train_sft(Run& run, const Inputs& in, std::ostream& out) {
  const auto& cfg = run.config();
  const Corpus c = need_corpus(run, in);
  const auto train = gold_states(c, Split::Train);
  const auto val = sft_examples(gold_states(c, Split::Validation), cfg.prompt);
  PolicyParams init = init_policy(cfg.seed, cfg.policy);
  const auto result = train_sft(train, init, cfg.sft, cfg.prompt);
  PolicyParams params = result.params;
  params.seed = cfg.seed;
  run.checkpoint("checkpoint.json", params);
  write_log(run, result.log);
  const double zero = mean_nll(PolicyParams(cfg.policy, Vocabulary::standard()), val);
  const double final_nll = mean_nll(params, val);
  write_json(run.path("summary.json"), Json{{"validation_states", val.size()},
                                             {"zero_init_val_nll", zero},
                                             {"init_val_nll", mean_nll(init, val)},
                                             {"final_val_nll", final_nll},
                                             {"reduction", zero > 0 ? 1.0 - final_nll / zero : 0.0}});
  run.output("summary.json");
  out << "validation NLL " << zero << " (zero init) -> " << final_nll << "\n";
}

void cmd_train_dpo(Run& run, const Inputs& in, std::ostream& out) {
  const auto& cfg = run.config();
  const Corpus c = need_corpus(run, in);
  PolicyParams base = need_checkpoint(run, in.checkpoint, "--base");
  std::vector<PreferenceTriplet> triplets;
  if (!in.triplets.empty()) {
    run.input(in.triplets);
    triplets = read_triplets(in.triplets);
  }
  const auto result = train_dpo(gold_states(c, Split::Train), base, cfg.dpo, cfg.prompt,
                                in.triplets.empty() ? nullptr : &triplets);
  PolicyParams params = result.params;
  params.seed = cfg.seed;
  run.checkpoint("checkpoint.json", params);
  write_log(run, result.log);
  out << "dpo (" << (cfg.dpo.online ? "online" : "offline") << "): " << result.log.size() << " iterations\n";
}

void cmd_train_grpo(Run& run, const Inputs& in, std::ostream& out) {
  const auto& cfg = run.config();
  const Corpus c = need_corpus(run, in);
  PolicyParams base = need_checkpoint(run, in.checkpoint, "--base");
  const auto result = train_grpo(gold_states(c, Split::Train), base, cfg.grpo, cfg.prompt, cfg.reward);
  PolicyParams params = result.params;
  params.seed = cfg.seed;
  run.checkpoint("checkpoint.json", params);
  write_log(run, result.log);
  out << "grpo: " << result.log.size() << " iterations\n";
}

void cmd_datagen_dpo(Run& run, const Inputs& in, std::ostream& out) {
  const auto& cfg = run.config();
  const Corpus c = need_corpus(run, in);
  PolicyParams sampler = need_checkpoint(run, in.checkpoint, "--sampler");
  const DpoDataConfig data{cfg.dpo.strategy, cfg.dpo.dropout_p, cfg.dpo.width, cfg.seed};
  const auto triplets = curate_dpo_dataset(gold_states(c, Split::Train), sampler, data, cfg.prompt);
  write_triplets(run.path("triplets.jsonl"),
                 {sampler.content_hash(), cfg.seed, std::string(to_string(cfg.dpo.strategy)), cfg.dpo.dropout_p},
                 triplets);
  run.output("triplets.jsonl");
  out << "triplets: " << triplets.size() << "\n";
}

void cmd_datagen_grpo(Run& run, const Inputs& in, std::ostream& out) {
  const auto& cfg = run.config();
  const Corpus c = need_corpus(run, in);
  PolicyParams sampler = need_checkpoint(run, in.checkpoint, "--sampler");
  std::vector<TacticGroup> groups;
  for (const auto& ref : gold_states(c, Split::Train))
    groups.push_back(sample_group(ref, sampler, cfg.grpo, cfg.prompt, cfg.reward, 0));
  write_groups(run.path("groups.jsonl"), {sampler.content_hash(), cfg.seed, "beam", cfg.grpo.dropout_p}, groups);
  run.output("groups.jsonl");
  out << "groups: " << groups.size() << "\n";
}

void cmd_eval_pass1(Run& run, const Inputs& in, std::ostream& out) {
  const auto& cfg = run.config();
  const Corpus c = need_corpus(run, in);
  PolicyParams params = need_checkpoint(run, in.checkpoint, "--checkpoint");
  SearchConfig sc = cfg.search;
  sc.prompt = cfg.prompt;
  const auto report = eval_pass_at_1(params, c.split(parse_split(in.split)), sc);
  write_results(run.path("results.jsonl"), report.results);
  run.output("results.jsonl");
  Json summary = to_json(report);
  summary["split"] = in.split;
  summary["max_expansions"] = sc.max_expansions;
  write_json(run.path("pass1.json"), summary);
  run.output("pass1.json");
  out << "pass@1 " << report.pass_at_1 << " (" << report.proved << "/" << report.theorems << ")\n";
}

void cmd_eval_stepwise(Run& run, const Inputs& in, std::ostream& out) {
  const auto& cfg = run.config();
  const Corpus c = need_corpus(run, in);
  PolicyParams params = need_checkpoint(run, in.checkpoint, "--checkpoint");
  const auto report = stepwise_metrics(params, gold_states(c, parse_split(in.split)), cfg.prompt, 8);
  Json j = to_json(report);
  j["split"] = in.split;
  write_json(run.path("stepwise.json"), j);
  run.output("stepwise.json");
  out << "prec@8 " << report.prec_at_8 << "  %zero " << report.pct_zero_precision << "\n";
}

void cmd_report_compare(Run& run, const Inputs& in, std::ostream& out) {
  if (in.a.empty() || in.b.empty()) throw ConfigError("--a and --b are required");
  run.input(in.a);
  run.input(in.b);
  const auto ra = read_results(in.a);
  const auto rb = read_results(in.b);
  const auto lengths = proof_length_report(ra, rb);
  write_length_csv(run.path("lengths.csv"), lengths);
  write_joint_csv(run.path("joint.csv"), lengths);
  run.output("lengths.csv");
  run.output("joint.csv");

  const auto& budgets = run.config().report.budgets;
  const auto ca = budget_curve(ra, budgets);
  const auto cb = budget_curve(rb, budgets);
  write_curve_csv(run.path("budget_a.csv"), ca);
  write_curve_csv(run.path("budget_b.csv"), cb);
  run.output("budget_a.csv");
  run.output("budget_b.csv");

  auto series = [](const std::string& label, const std::vector<CurvePoint>& c) {
    Series s{label, {}};
    for (const auto& p : c) s.points.emplace_back(p.budget, static_cast<double>(p.count));
    return s;
  };
  write_text(run.path("budget.svg"), step_chart_svg("Theorems proved within budget", "expansions", "proved",
                                                    {series(in.label_a, ca), series(in.label_b, cb)}));
  write_text(run.path("lengths.svg"),
             joint_scatter_svg("Proof lengths (both proved)", in.label_a + " length", in.label_b + " length",
                               lengths.joint));
  run.output("budget.svg");
  run.output("lengths.svg");

  std::map<long, std::size_t> deltas;
  for (const auto& r : lengths.rows) ++deltas[r.delta];
  Json delta_table = Json::array();
  for (const auto& [d, n] : deltas) delta_table.push_back({{"delta", d}, {"count", n}});
  write_json(run.path("compare.json"), Json{{"label_a", in.label_a},
                                            {"label_b", in.label_b},
                                            {"both", lengths.rows.size()},
                                            {"a_only", lengths.a_only},
                                            {"b_only", lengths.b_only},
                                            {"neither", lengths.neither},
                                            {"delta_table", delta_table}});
  run.output("compare.json");
  out << "both " << lengths.rows.size() << ", " << in.label_a << " only " << lengths.a_only << ", "
      << in.label_b << " only " << lengths.b_only << "\n";
}

using Handler = void (*)(Run&, const Inputs&, std::ostream&);

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Verifier-in-the-loop policy training for a propositional tactic prover", "tacticrl"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Common common;
  Inputs in;
  std::string command, slug;
  Handler handler = nullptr;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "Config file (sectioned key = value)");
    sub->add_option("--out", common.out, "Output directory");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t s) { common.seed = s, common.seed_given = true; }, "Global seed");
  };
  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help, Handler h) {
    CLI::App* sub = parent->add_subcommand(name, help);
    add_common(sub);
    sub->callback([&, parent, sub, h] {
      command = parent->get_name() + " " + sub->get_name();
      slug = parent->get_name() + "-" + sub->get_name();
      handler = h;
    });
    return sub;
  };

  CLI::App* corpus = app.add_subcommand("corpus", "Corpus generation")->require_subcommand(1);
  leaf(corpus, "gen", "Generate the theorem corpus", cmd_corpus_gen);

  CLI::App* train = app.add_subcommand("train", "Training")->require_subcommand(1);
  auto* sft = leaf(train, "sft", "Supervised base model", cmd_train_sft);
  sft->add_option("--corpus", in.corpus)->required();
  auto* dpo = leaf(train, "dpo", "DPO from a base checkpoint", cmd_train_dpo);
  dpo->add_option("--corpus", in.corpus)->required();
  dpo->add_option("--base", in.checkpoint)->required();
  dpo->add_option("--triplets", in.triplets, "Offline triplet file (requires train.dpo.online = false)");
  auto* grpo = leaf(train, "grpo", "Online GRPO from a base checkpoint", cmd_train_grpo);
  grpo->add_option("--corpus", in.corpus)->required();
  grpo->add_option("--base", in.checkpoint)->required();

  CLI::App* datagen = app.add_subcommand("datagen", "Offline training data")->require_subcommand(1);
  auto* ddpo = leaf(datagen, "dpo", "Preference triplets", cmd_datagen_dpo);
  ddpo->add_option("--corpus", in.corpus)->required();
  ddpo->add_option("--sampler", in.checkpoint)->required();
  auto* dgrpo = leaf(datagen, "grpo", "Tactic groups", cmd_datagen_grpo);
  dgrpo->add_option("--corpus", in.corpus)->required();
  dgrpo->add_option("--sampler", in.checkpoint)->required();

  CLI::App* eval = app.add_subcommand("eval", "Evaluation")->require_subcommand(1);
  auto* pass1 = leaf(eval, "pass1", "Best-first search Pass@1", cmd_eval_pass1);
  pass1->add_option("--corpus", in.corpus)->required();
  pass1->add_option("--checkpoint", in.checkpoint)->required();
  pass1->add_option("--split", in.split, "train|validation|test_random|test_novel");
  auto* step = leaf(eval, "stepwise", "Step-wise tactic metrics", cmd_eval_stepwise);
  step->add_option("--corpus", in.corpus)->required();
  step->add_option("--checkpoint", in.checkpoint)->required();
  step->add_option("--split", in.split, "train|validation|test_random|test_novel");

  CLI::App* report = app.add_subcommand("report", "Reports")->require_subcommand(1);
  auto* cmp = leaf(report, "compare", "Proof-length and budget comparison", cmd_report_compare);
  cmp->add_option("--a", in.a, "Result file A")->required();
  cmp->add_option("--b", in.b, "Result file B")->required();
  cmp->add_option("--label-a", in.label_a);
  cmp->add_option("--label-b", in.label_b);

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    Run run(command, common, slug);
    handler(run, in, out);
    run.finish(out);
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const MissingInput& e) {
    err << "missing input: " << e.what() << "\n";
    return 3;
  } catch (const CorruptCheckpoint& e) {
    err << "corrupt checkpoint: " << e.what() << "\n";
    return 4;
  } catch (const MismatchedSplits& e) {
    err << "mismatched splits: " << e.what() << "\n";
    return 4;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace tacticrl
