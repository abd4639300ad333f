// Command-line front end: run / validate experiments, score CSVs with a saved
// checkpoint, and export mean attention maps.
#include <charconv>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <CLI11.hpp>

#include "disent/data/dataset.hpp"
#include "disent/experiment/experiment_config.hpp"
#include "disent/experiment/key_value.hpp"
#include "disent/experiment/runner.hpp"
#include "disent/metrics/metrics.hpp"
#include "disent/model/checkpoint.hpp"
#include "disent/model/network.hpp"

namespace {

namespace ex = disent::experiment;

constexpr int kExitFailure = 1;
constexpr int kExitInvalidConfig = 2;

struct Overrides {
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  bool save_checkpoints = false;
};

// Flag overrides replace the corresponding config keys. --seed and --trials
// drop an explicit seed list so trial seeds become seed, seed + 1, ...
ex::KeyValues apply_overrides(ex::KeyValues values, const Overrides& o) {
  if (o.output_dir) values["run.output_dir"] = {*o.output_dir, 0};
  if (o.seed) values["run.seed"] = {std::to_string(*o.seed), 0};
  if (o.trials) values["run.trials"] = {std::to_string(*o.trials), 0};
  if (o.seed || o.trials) values.erase("run.trial_seeds");
  if (o.save_checkpoints) values["run.save_checkpoints"] = {"true", 0};
  return values;
}

std::optional<ex::ExperimentConfig> load_config(const std::string& path, const Overrides& o) {
  const ex::ValidationResult r = ex::validate_config(apply_overrides(ex::load_key_values(path), o));
  if (!r.ok()) {
    std::cerr << path << ": invalid config\n";
    for (const std::string& e : r.errors) std::cerr << "  " << e << '\n';
    return std::nullopt;
  }
  return *r.config;
}

std::string number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

int cmd_run(const std::string& config_path, const Overrides& o) {
  const auto config = load_config(config_path, o);
  if (!config) return kExitInvalidConfig;
  const ex::RunResult r = ex::run_experiment(*config, &std::cerr);
  std::cout << ex::metrics_json(*config, r);
  return 0;
}

int cmd_validate(const std::string& config_path, const Overrides& o) {
  const auto config = load_config(config_path, o);
  if (!config) return kExitInvalidConfig;
  std::cout << ex::serialize_config(*config);
  return 0;
}

int cmd_score(const std::string& checkpoint_path, const std::string& csv_path) {
  const disent::model::Checkpoint ck = disent::model::load_checkpoint(checkpoint_path);
  const auto label = ck.metadata.contains("label_column") ? ck.metadata.at("label_column") : "label";
  const auto ds = disent::data::load_csv(csv_path, label, disent::data::LabelMode::kOptional);
  const auto scores =
      disent::model::anomaly_scores(ck.params, ck.config, ex::checkpoint_inputs(ck, ds.features));
  std::cout << "row,score\n";
  for (std::size_t i = 0; i < scores.size(); ++i) std::cout << i << ',' << number(scores[i]) << '\n';
  if (ds.has_labels && ds.num_anomalies() > 0 && ds.num_anomalies() < ds.num_rows()) {
    std::cerr << "auc_pr " << disent::metrics::auc_pr(scores, ds.labels) << ", auc_roc "
              << disent::metrics::auc_roc(scores, ds.labels) << '\n';
  }
  return 0;
}

int cmd_export_attn(const std::string& checkpoint_path, const std::string& csv_path,
                    const std::string& out_prefix) {
  const disent::model::Checkpoint ck = disent::model::load_checkpoint(checkpoint_path);
  const auto label = ck.metadata.contains("label_column") ? ck.metadata.at("label_column") : "label";
  const auto ds = disent::data::load_csv(csv_path, label, disent::data::LabelMode::kOptional);
  for (const auto& p : ex::export_attention_maps(ck.params, ck.config,
                                                 ex::checkpoint_inputs(ck, ds.features), out_prefix)) {
    std::cout << p.string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // Training allocates and frees multi-megabyte tensors every step; keep them
  // on the heap instead of round-tripping through mmap and page faults.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
  CLI::App app{"Attention-disentangling tabular anomaly detector"};
  app.require_subcommand(1);

  Overrides overrides;
  auto add_overrides = [&](CLI::App* cmd) {
    cmd->add_option_function<std::string>(
        "--output-dir", [&](const std::string& v) { overrides.output_dir = v; },
        "Directory for run outputs");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { overrides.seed = v; }, "Base seed (trial seeds seed, seed+1, ...)");
    cmd->add_option_function<std::size_t>(
        "--trials", [&](std::size_t v) { overrides.trials = v; }, "Number of trials")
        ->check(CLI::PositiveNumber);
  };

  std::string config_path, checkpoint_path, csv_path, out_prefix;

  CLI::App* run = app.add_subcommand("run", "Train and evaluate every trial of an experiment");
  run->add_option("config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  add_overrides(run);
  run->add_flag("--save-checkpoints", overrides.save_checkpoints,
                "Also write trial_<seed>.ckpt for use with score / export-attn");

  CLI::App* validate = app.add_subcommand("validate", "Print the normalized config or its errors");
  validate->add_option("config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  add_overrides(validate);

  CLI::App* score = app.add_subcommand("score", "Score CSV rows with a saved checkpoint");
  score->add_option("checkpoint", checkpoint_path)->required()->check(CLI::ExistingFile);
  score->add_option("csv", csv_path)->required()->check(CLI::ExistingFile);

  CLI::App* export_attn =
      app.add_subcommand("export-attn", "Write per-head mean attention maps for CSV rows");
  export_attn->add_option("checkpoint", checkpoint_path)->required()->check(CLI::ExistingFile);
  export_attn->add_option("csv", csv_path)->required()->check(CLI::ExistingFile);
  export_attn->add_option("out", out_prefix, "Output prefix; writes <out>_head<h>.csv")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, overrides);
    if (validate->parsed()) return cmd_validate(config_path, overrides);
    if (score->parsed()) return cmd_score(checkpoint_path, csv_path);
    if (export_attn->parsed()) return cmd_export_attn(checkpoint_path, csv_path, out_prefix);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
