#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "eit/bias_injector.hpp"
#include "eit/corpus.hpp"
#include "eit/evaluator.hpp"
#include "eit/grpo.hpp"
#include "eit/remote_judge.hpp"
#include "eit/reward.hpp"
#include "eit/toy_judge.hpp"
#include "eit/trace_markers.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kCodeVersion = "0.1.0";
constexpr int kSchemaVersion = 1;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitPartial = 3;

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key))
      throw ValidationError(where + ": unknown key '" + key + "'");
}

struct RunConfig {
  std::uint64_t seed = 42;
  fs::path output_dir = "out";

  fs::path corpus_path;
  eit::CorpusFormat corpus_format = eit::CorpusFormat::JsonLines;
  bool corpus_strict = false;

  eit::SplitSpec split;
  fs::path templates_path;

  eit::RewardConfig reward;
  eit::GrpoConfig grpo;

  eit::toy::CuePolicy cue_policy = eit::toy::CuePolicy::BalancedConflict;
  int toy_n_items = 2000;
  eit::toy::GridSpec grid;

  eit::BiasType inject_bias_type = eit::BiasType::Bandwagon;
  bool inject_wrong_only = false;
  bool inject_mix_clean = false;

  std::string eval_judge = "truth";  // truth | cue | toy | remote
  fs::path eval_items_path;
  fs::path toy_params_path;
  std::string model_label = "model";

  std::optional<eit::EndpointConfig> endpoint;
  eit::MitigationMode mitigation = eit::MitigationMode::None;

  fs::path traces_path;
  fs::path lexicon_path;

  std::vector<fs::path> report_inputs;

  json snapshot;  // the raw parsed document, for manifests
};

template <typename T>
void get_if(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void get_path(const json& obj, const char* key, fs::path& out) {
  if (obj.contains(key)) out = fs::path(obj.at(key).get<std::string>());
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const std::exception& e) {
    throw ValidationError("config parse error: " + std::string(e.what()));
  }

  require_keys(doc, "config",
               {"schema_version", "seed", "output_dir", "corpus", "split",
                "templates_path", "reward", "grpo", "toy", "inject", "eval",
                "endpoint", "mitigation", "markers", "report"});
  if (doc.contains("schema_version") &&
      doc.at("schema_version").get<int>() != kSchemaVersion)
    throw ValidationError("unsupported schema_version");

  RunConfig cfg;
  cfg.snapshot = doc;
  get_if(doc, "seed", cfg.seed);
  get_path(doc, "output_dir", cfg.output_dir);

  if (doc.contains("corpus")) {
    const auto& c = doc["corpus"];
    require_keys(c, "corpus", {"path", "format", "strict"});
    get_path(c, "path", cfg.corpus_path);
    if (c.contains("format")) {
      const std::string f = c["format"];
      if (f == "json_lines")
        cfg.corpus_format = eit::CorpusFormat::JsonLines;
      else if (f == "csv")
        cfg.corpus_format = eit::CorpusFormat::Csv;
      else
        throw ValidationError("corpus.format: unknown value '" + f + "'");
    }
    get_if(c, "strict", cfg.corpus_strict);
  }

  if (doc.contains("split")) {
    const auto& s = doc["split"];
    require_keys(s, "split",
                 {"in_domain_subjects", "out_of_domain_subjects", "val_fraction"});
    std::vector<std::string> subjects;
    get_if(s, "in_domain_subjects", subjects);
    cfg.split.in_domain_subjects = {subjects.begin(), subjects.end()};
    subjects.clear();
    get_if(s, "out_of_domain_subjects", subjects);
    cfg.split.out_of_domain_subjects = {subjects.begin(), subjects.end()};
    get_if(s, "val_fraction", cfg.split.val_fraction);
    if (cfg.split.val_fraction <= 0.0 || cfg.split.val_fraction >= 1.0)
      throw ValidationError("split.val_fraction must be in (0,1)");
    for (const auto& subj : cfg.split.in_domain_subjects)
      if (cfg.split.out_of_domain_subjects.count(subj))
        throw ValidationError("split: subject in both sets: " + subj);
  }
  cfg.split.seed = cfg.seed;

  get_path(doc, "templates_path", cfg.templates_path);

  if (doc.contains("reward")) {
    const auto& r = doc["reward"];
    require_keys(r, "reward",
                 {"alpha", "acc_weight", "gamma1", "gamma2", "enable_struct",
                  "enable_acc", "enable_ind"});
    get_if(r, "alpha", cfg.reward.alpha);
    get_if(r, "acc_weight", cfg.reward.acc_weight);
    get_if(r, "gamma1", cfg.reward.gamma1);
    get_if(r, "gamma2", cfg.reward.gamma2);
    get_if(r, "enable_struct", cfg.reward.enable_struct);
    get_if(r, "enable_acc", cfg.reward.enable_acc);
    get_if(r, "enable_ind", cfg.reward.enable_ind);
    for (double v : {cfg.reward.alpha, cfg.reward.acc_weight, cfg.reward.gamma1,
                     cfg.reward.gamma2})
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ValidationError("reward weights must be finite and >= 0");
  }

  if (doc.contains("grpo")) {
    const auto& g = doc["grpo"];
    require_keys(g, "grpo",
                 {"group_size", "kl_beta", "learning_rate", "steps",
                  "batch_prompts", "eval_every"});
    get_if(g, "group_size", cfg.grpo.group_size);
    get_if(g, "kl_beta", cfg.grpo.kl_beta);
    get_if(g, "learning_rate", cfg.grpo.learning_rate);
    get_if(g, "steps", cfg.grpo.steps);
    get_if(g, "batch_prompts", cfg.grpo.batch_prompts);
    get_if(g, "eval_every", cfg.grpo.eval_every);
    if (cfg.grpo.group_size < 2) throw ValidationError("grpo.group_size must be >= 2");
    if (cfg.grpo.learning_rate <= 0.0)
      throw ValidationError("grpo.learning_rate must be positive");
    if (cfg.grpo.kl_beta < 0.0) throw ValidationError("grpo.kl_beta must be >= 0");
    if (cfg.grpo.eval_every < 1) throw ValidationError("grpo.eval_every must be >= 1");
  }
  cfg.grpo.seed = cfg.seed;

  if (doc.contains("toy")) {
    const auto& t = doc["toy"];
    require_keys(t, "toy", {"cue_policy", "n_items", "grid"});
    if (t.contains("cue_policy"))
      cfg.cue_policy = eit::toy::parse_cue_policy(t["cue_policy"]);
    get_if(t, "n_items", cfg.toy_n_items);
    if (cfg.toy_n_items < 1) throw ValidationError("toy.n_items must be >= 1");
    if (t.contains("grid")) {
      const auto& g = t["grid"];
      require_keys(g, "toy.grid",
                   {"w_evidence_min", "w_evidence_max", "w_bias_min", "w_bias_max",
                    "pitch", "w_format"});
      get_if(g, "w_evidence_min", cfg.grid.w_evidence_min);
      get_if(g, "w_evidence_max", cfg.grid.w_evidence_max);
      get_if(g, "w_bias_min", cfg.grid.w_bias_min);
      get_if(g, "w_bias_max", cfg.grid.w_bias_max);
      get_if(g, "pitch", cfg.grid.pitch);
      get_if(g, "w_format", cfg.grid.w_format);
      if (cfg.grid.pitch <= 0.0) throw ValidationError("toy.grid.pitch must be > 0");
    }
  }

  if (doc.contains("inject")) {
    const auto& i = doc["inject"];
    require_keys(i, "inject", {"bias_type", "mode", "mix_clean"});
    if (i.contains("bias_type"))
      cfg.inject_bias_type = eit::parse_bias_type(i["bias_type"]);
    if (i.contains("mode")) {
      const std::string mode = i["mode"];
      if (mode == "conflict")
        cfg.inject_wrong_only = false;
      else if (mode == "wrong_only")
        cfg.inject_wrong_only = true;
      else
        throw ValidationError("inject.mode: unknown value '" + mode + "'");
    }
    get_if(i, "mix_clean", cfg.inject_mix_clean);
  }

  if (doc.contains("eval")) {
    const auto& e = doc["eval"];
    require_keys(e, "eval",
                 {"judge", "items_path", "toy_params_path", "model_label"});
    get_if(e, "judge", cfg.eval_judge);
    if (cfg.eval_judge != "truth" && cfg.eval_judge != "cue" &&
        cfg.eval_judge != "toy" && cfg.eval_judge != "remote")
      throw ValidationError("eval.judge: unknown value '" + cfg.eval_judge + "'");
    get_path(e, "items_path", cfg.eval_items_path);
    get_path(e, "toy_params_path", cfg.toy_params_path);
    get_if(e, "model_label", cfg.model_label);
  }

  if (doc.contains("endpoint")) {
    const auto& e = doc["endpoint"];
    require_keys(e, "endpoint",
                 {"base_url", "model", "auth_env", "system_prompt",
                  "timeout_seconds", "max_retries", "max_in_flight",
                  "temperature"});
    eit::EndpointConfig ep;
    get_if(e, "base_url", ep.base_url);
    get_if(e, "model", ep.model);
    get_if(e, "auth_env", ep.auth_env);
    get_if(e, "system_prompt", ep.system_prompt);
    get_if(e, "timeout_seconds", ep.timeout_seconds);
    get_if(e, "max_retries", ep.max_retries);
    get_if(e, "max_in_flight", ep.max_in_flight);
    get_if(e, "temperature", ep.temperature);
    if (ep.timeout_seconds <= 0.0)
      throw ValidationError("endpoint.timeout_seconds must be > 0");
    if (ep.max_retries < 0) throw ValidationError("endpoint.max_retries must be >= 0");
    if (ep.max_in_flight < 1)
      throw ValidationError("endpoint.max_in_flight must be >= 1");
    cfg.endpoint = std::move(ep);
  }

  if (doc.contains("mitigation"))
    cfg.mitigation = eit::parse_mitigation_mode(doc["mitigation"]);

  if (doc.contains("markers")) {
    const auto& m = doc["markers"];
    require_keys(m, "markers", {"traces_path", "lexicon_path"});
    get_path(m, "traces_path", cfg.traces_path);
    get_path(m, "lexicon_path", cfg.lexicon_path);
  }

  if (doc.contains("report")) {
    const auto& r = doc["report"];
    require_keys(r, "report", {"inputs"});
    std::vector<std::string> inputs;
    get_if(r, "inputs", inputs);
    for (const auto& p : inputs) cfg.report_inputs.emplace_back(p);
  }
  return cfg;
}

std::string file_hash_hex(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot hash missing file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx",
                static_cast<unsigned long long>(eit::fnv1a(bytes)));
  return out;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const RunConfig& cfg, const std::vector<fs::path>& inputs,
                    json extra = json::object()) {
  json hashes = json::object();
  for (const auto& p : inputs) hashes[p.string()] = file_hash_hex(p);
  json doc{{"command", command},
           {"schema_version", kSchemaVersion},
           {"code_version", kCodeVersion},
           {"seed", cfg.seed},
           {"config", cfg.snapshot},
           {"input_hashes", hashes}};
  doc.update(extra);
  std::ofstream out(dir / "manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
  out << doc.dump(2) << '\n';
}

int cmd_inject(const RunConfig& cfg) {
  if (cfg.corpus_path.empty()) throw ValidationError("inject: corpus.path is required");
  const auto catalog = cfg.templates_path.empty()
                           ? eit::default_catalog()
                           : eit::load_catalog(cfg.templates_path);
  auto loaded = eit::load_corpus(cfg.corpus_path, cfg.corpus_format,
                                 cfg.corpus_strict);
  if (!loaded.rejects.empty())
    for (const auto& rej : loaded.rejects)
      std::cerr << "reject line " << rej.line << " (" << rej.id
                << "): " << rej.message << '\n';
  auto partition = eit::split_corpus(loaded.items, cfg.split);

  fs::create_directories(cfg.output_dir);
  auto pairwise = [&](const std::vector<eit::JudgeItem>& items) {
    std::vector<eit::PairwiseItem> out;
    out.reserve(items.size());
    for (const auto& item : items) {
      auto rng = eit::make_rng(cfg.seed, "pairwise-" + item.id);
      out.push_back(eit::make_pairwise(item, rng));
    }
    return out;
  };
  const auto train = pairwise(partition.train);
  const auto val = pairwise(partition.val);
  const auto test = pairwise(partition.test);
  eit::write_pairwise_jsonl(cfg.output_dir / "train.jsonl", train);
  eit::write_pairwise_jsonl(cfg.output_dir / "val.jsonl", val);
  eit::write_pairwise_jsonl(cfg.output_dir / "test.jsonl", test);

  auto rng = eit::make_rng(cfg.seed, "inject");
  const auto dataset =
      cfg.inject_wrong_only
          ? eit::build_wrong_only_dataset(train, cfg.inject_bias_type, catalog, rng)
          : eit::build_conflict_dataset(train, cfg.inject_bias_type, catalog, rng);
  eit::write_biased_jsonl(cfg.output_dir / "biased_train.jsonl", dataset);

  long long n_correct = 0, n_wrong = 0;
  for (const auto& p : dataset) {
    if (p.alignment == eit::Alignment::CorrectBias) ++n_correct;
    if (p.alignment == eit::Alignment::WrongBias) ++n_wrong;
  }
  json extra{{"counts",
              {{"train", train.size()},
               {"val", val.size()},
               {"test", test.size()},
               {"correct_bias", n_correct},
               {"wrong_bias", n_wrong},
               {"rejects", loaded.rejects.size()}}},
             {"mix_clean", cfg.inject_mix_clean}};
  std::vector<fs::path> inputs{cfg.corpus_path};
  if (!cfg.templates_path.empty()) inputs.push_back(cfg.templates_path);
  write_manifest(cfg.output_dir, "inject", cfg, inputs, extra);
  std::cout << "inject: " << dataset.size() << " prompts (" << n_correct << "/"
            << n_wrong << " correct/wrong bias)\n";
  return kExitOk;
}

int cmd_train_toy(const RunConfig& cfg) {
  namespace toy = eit::toy;
  fs::create_directories(cfg.output_dir);

  const auto train_items =
      toy::frozen_item_set(cfg.cue_policy, cfg.toy_n_items, cfg.seed);
  const auto val_items = toy::frozen_item_set(
      cfg.cue_policy, cfg.toy_n_items, eit::splitmix64(cfg.seed ^ 0x76616cULL));

  toy::ToyPolicy policy, ref;
  auto reward_fn = [&](const toy::SyntheticItem& item,
                       const toy::ToyResponse& resp) {
    return eit::total_reward(toy::to_judged(resp), item.truth, item.bias_target(),
                             cfg.reward)
        .total;
  };
  auto val_fn = [&](const toy::ToyPolicy& p) {
    return toy::expected_reward(p.parameters(), val_items, cfg.reward);
  };
  auto result = eit::train(policy, ref, train_items, reward_fn, val_fn, cfg.grpo);

  eit::write_training_csv(cfg.output_dir / "training_log.csv", result.log,
                          std::span<const char* const>(toy::kParamNames));
  toy::write_params_json(cfg.output_dir / "checkpoint.json",
                         result.policy.parameters());

  const auto oracle = toy::brute_force_optimal(cfg.cue_policy, cfg.reward, cfg.grid,
                                               cfg.toy_n_items, cfg.seed);
  toy::write_oracle_json(cfg.output_dir / "oracle.json", oracle);
  toy::write_surface_csv(cfg.output_dir / "reward_surface.csv", oracle.surface);

  const Eigen::VectorXd trained = result.policy.parameters();
  json cmp{{"best_step", result.log.best_step},
           {"best_val", result.log.best_val},
           {"w_bias_trained", trained[toy::kWBias]},
           {"w_bias_oracle", oracle.argmax[toy::kWBias]},
           {"w_evidence_trained", trained[toy::kWEvidence]},
           {"w_evidence_oracle", oracle.argmax[toy::kWEvidence]},
           {"w_bias_distance",
            std::abs(trained[toy::kWBias] - oracle.argmax[toy::kWBias])}};
  {
    std::ofstream out(cfg.output_dir / "oracle_comparison.json");
    out << cmp.dump(2) << '\n';
  }
  write_manifest(cfg.output_dir, "train-toy", cfg, {}, json{{"comparison", cmp}});
  std::cout << "train-toy: best step " << result.log.best_step << ", w_bias "
            << trained[toy::kWBias] << " (oracle "
            << oracle.argmax[toy::kWBias] << ")\n";
  return kExitOk;
}

class RemoteJudgeAdapter : public eit::Judge {
 public:
  RemoteJudgeAdapter(eit::EndpointConfig cfg, eit::MitigationMode mode)
      : client_(std::move(cfg)), mode_(mode) {}
  eit::Choice decide(const eit::JudgeRequest& req, eit::Rng&) override {
    auto result = client_.ask_judge(req.rendered_text, mode_);
    if (!result.ok())
      throw std::runtime_error("remote judge failed for " + req.item_id + ": " +
                               result.error->detail);
    return eit::parse_choice(result.text);
  }

 private:
  eit::ChatClient client_;
  eit::MitigationMode mode_;
};

int cmd_eval(const RunConfig& cfg) {
  if (cfg.eval_items_path.empty())
    throw ValidationError("eval: eval.items_path is required");
  const auto catalog = cfg.templates_path.empty()
                           ? eit::default_catalog()
                           : eit::load_catalog(cfg.templates_path);
  const auto items = eit::read_pairwise_jsonl(cfg.eval_items_path);

  std::unique_ptr<eit::Judge> judge;
  if (cfg.eval_judge == "truth") {
    judge = std::make_unique<eit::TruthJudge>();
  } else if (cfg.eval_judge == "cue") {
    judge = std::make_unique<eit::CueJudge>();
  } else if (cfg.eval_judge == "toy") {
    if (cfg.toy_params_path.empty())
      throw ValidationError("eval: toy judge needs eval.toy_params_path");
    judge = std::make_unique<eit::ToyBridgeJudge>(
        eit::toy::read_params_json(cfg.toy_params_path));
  } else {
    if (!cfg.endpoint) throw ValidationError("eval: remote judge needs endpoint");
    judge = std::make_unique<RemoteJudgeAdapter>(*cfg.endpoint, cfg.mitigation);
  }

  fs::create_directories(cfg.output_dir);
  std::vector<eit::PredictionRecord> predictions;
  auto report = eit::eval_matrix(*judge, items, catalog, cfg.seed, &predictions);
  report.model = cfg.model_label;
  report.partial = report.judge_failures > 0;

  eit::write_report_csv(cfg.output_dir / "report.csv", {&report, 1});
  eit::write_report_json(cfg.output_dir / "report.json", report);
  eit::write_prediction_log(cfg.output_dir / "predictions.jsonl", predictions);

  std::vector<fs::path> inputs{cfg.eval_items_path};
  if (!cfg.templates_path.empty()) inputs.push_back(cfg.templates_path);
  if (cfg.eval_judge == "toy") inputs.push_back(cfg.toy_params_path);
  write_manifest(cfg.output_dir, "eval", cfg, inputs,
                 json{{"partial", report.partial},
                      {"judge_failures", report.judge_failures}});
  std::cout << "eval: acc_clean " << report.acc_clean() << " over "
            << report.n_clean << " items"
            << (report.partial ? " (partial)" : "") << '\n';
  return report.partial ? kExitPartial : kExitOk;
}

int cmd_markers(const RunConfig& cfg) {
  if (cfg.traces_path.empty())
    throw ValidationError("markers: markers.traces_path is required");
  const auto lexicon = cfg.lexicon_path.empty()
                           ? eit::default_lexicon()
                           : eit::load_lexicon(cfg.lexicon_path);
  const auto traces = eit::read_traces_jsonl(cfg.traces_path);

  std::map<std::string, std::vector<eit::MarkerProfile>> by_method;
  for (const auto& rec : traces)
    by_method[rec.method].push_back(eit::detect_markers(rec.trace, lexicon));

  std::vector<eit::MarkerRow> rows;
  for (const auto& [method, profiles] : by_method) {
    if (profiles.empty()) {
      std::cerr << "warning: empty method group '" << method << "' omitted\n";
      continue;
    }
    rows.push_back(eit::aggregate_markers(profiles, method));
  }
  fs::create_directories(cfg.output_dir);
  eit::write_markers_csv(cfg.output_dir / "markers.csv", rows);

  std::vector<fs::path> inputs{cfg.traces_path};
  if (!cfg.lexicon_path.empty()) inputs.push_back(cfg.lexicon_path);
  write_manifest(cfg.output_dir, "markers", cfg, inputs,
                 json{{"methods", rows.size()}, {"traces", traces.size()}});
  std::cout << "markers: " << rows.size() << " method rows from "
            << traces.size() << " traces\n";
  return kExitOk;
}

eit::EvalCell cell_from_json(const json& c) {
  eit::EvalCell cell;
  cell.count = c.at("count").get<long long>();
  cell.correct = c.at("correct").get<long long>();
  cell.unchanged = c.at("unchanged").get<long long>();
  cell.parse_failures = c.at("parse_failures").get<long long>();
  return cell;
}

int cmd_report(const RunConfig& cfg) {
  if (cfg.report_inputs.empty())
    throw ValidationError("report: report.inputs is required");
  std::vector<eit::EvalReport> reports;
  for (const auto& path : cfg.report_inputs) {
    std::ifstream in(path);
    if (!in) throw ValidationError("report: cannot open " + path.string());
    json doc = json::parse(in);
    eit::EvalReport r;
    r.model = doc.at("model").get<std::string>();
    r.n_clean = doc.at("clean").at("count").get<long long>();
    r.clean_correct = doc.at("clean").at("correct").get<long long>();
    r.bandwagon = {cell_from_json(doc.at("bandwagon").at("C")),
                   cell_from_json(doc.at("bandwagon").at("W"))};
    r.authority = {cell_from_json(doc.at("authority").at("C")),
                   cell_from_json(doc.at("authority").at("W"))};
    r.distraction = {cell_from_json(doc.at("distraction").at("C")),
                     cell_from_json(doc.at("distraction").at("W"))};
    r.pos_a = cell_from_json(doc.at("position").at("A"));
    r.pos_b = cell_from_json(doc.at("position").at("B"));
    reports.push_back(std::move(r));
  }
  fs::create_directories(cfg.output_dir);
  eit::write_report_csv(cfg.output_dir / "combined_report.csv", reports);
  write_manifest(cfg.output_dir, "report", cfg, cfg.report_inputs);
  std::cout << "report: " << reports.size() << " rows\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bias-injection laboratory for judge robustness experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir_override;
  std::optional<std::uint64_t> seed_override;
  bool no_independence = false;
  std::string data_mode;

  for (const char* name : {"inject", "train-toy", "eval", "markers", "report"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", config_path, "run config JSON")->required();
    sub->add_option("-o,--output-dir", output_dir_override,
                    "override output directory");
    sub->add_option("--seed", seed_override, "override seed");
    if (std::string(name) == "train-toy") {
      sub->add_flag("--no-independence", no_independence,
                    "drop the independence reward (gamma1 = gamma2 = 0)");
      sub->add_option("--data", data_mode,
                      "cue policy override (balanced_conflict | wrong-only)");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (!output_dir_override.empty()) cfg.output_dir = output_dir_override;
    if (seed_override) {
      cfg.seed = *seed_override;
      cfg.split.seed = cfg.seed;
      cfg.grpo.seed = cfg.seed;
    }
    if (no_independence) cfg.reward.gamma1 = cfg.reward.gamma2 = 0.0;
    if (!data_mode.empty()) {
      if (data_mode == "wrong-only")
        cfg.cue_policy = eit::toy::CuePolicy::WrongOnly;
      else
        cfg.cue_policy = eit::toy::parse_cue_policy(data_mode);
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    if (sub == "inject") return cmd_inject(cfg);
    if (sub == "train-toy") return cmd_train_toy(cfg);
    if (sub == "eval") return cmd_eval(cfg);
    if (sub == "markers") return cmd_markers(cfg);
    return cmd_report(cfg);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
