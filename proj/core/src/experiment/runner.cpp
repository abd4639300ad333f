#include "disent/experiment/runner.hpp"

#include <charconv>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "disent/data/preprocess.hpp"
#include "disent/experiment/registry.hpp"
#include "disent/model/network.hpp"
#include "disent/numerics/errors.hpp"

namespace disent::experiment {
namespace fs = std::filesystem;
namespace {

constexpr std::size_t kAttentionChunk = 256;

std::string number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error("write failed for " + path.string());
}

std::string trial_prefix(std::uint64_t seed) { return "trial_" + std::to_string(seed); }

void write_manifest(const fs::path& dir, const std::vector<fs::path>& files, bool complete,
                    const std::string& error) {
  nlohmann::ordered_json j;
  j["complete"] = complete;
  if (!complete) j["incomplete"] = true;
  if (!error.empty()) j["error"] = error;
  j["files"] = nlohmann::json::array();
  for (const fs::path& f : files) j["files"].push_back(f.generic_string());
  const fs::path path = dir / "manifest.json";
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

std::string effective_label_column(const ExperimentConfig& config) {
  if (config.label_column) return *config.label_column;
  if (!config.dataset_path) {
    if (auto entry = find_registry_entry(config.dataset)) return entry->label_column;
  }
  return "label";
}

}  // namespace

data::RawDataset load_dataset(const ExperimentConfig& config) {
  fs::path path;
  if (config.dataset_path) {
    path = *config.dataset_path;
  } else if (auto found = resolve_dataset(config.dataset)) {
    path = *found;
  } else {
    std::string tried;
    for (const auto& p : dataset_candidates(config.dataset)) tried += " " + p.string();
    throw Error("dataset '" + config.dataset + "' not found (tried" + tried + "; set " +
                kDataRootEnv + " or dataset_path)");
  }
  data::RawDataset ds = data::load_csv(path, effective_label_column(config));
  ds.name = config.dataset;
  return ds;
}

PreparedTrial prepare_trial(const ExperimentConfig& config, const data::RawDataset& dataset,
                            std::uint64_t seed) {
  PreparedTrial p;
  p.split = data::split_train_test(dataset, seed);
  p.split = data::normalize(p.split, config.scaling);
  p.split = data::contaminate(p.split, config.contamination_ratio, seed);
  p.train_input = data::to_model_input(p.split.train, config.preprocessing);
  p.test_input = data::to_model_input(p.split.test, config.preprocessing);
  p.model = config.model;
  p.model.num_attributes = p.train_input.dim(1);
  p.model.channels_in = p.train_input.dim(2);
  p.model.seed = seed;
  p.model.require_valid();
  return p;
}

std::vector<Tensor> mean_attention_maps(const model::ModelParams& params,
                                        const model::ModelConfig& config, const Tensor& input,
                                        const std::vector<bool>& include) {
  const std::size_t n = input.dim(0), m = input.dim(1), c = input.dim(2);
  if (!include.empty() && include.size() != n) {
    throw DimensionError("mean_attention_maps: mask of " + std::to_string(include.size()) +
                         " rows for " + std::to_string(n) + " samples");
  }
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (include.empty() || include[i]) rows.push_back(i);
  }
  if (rows.empty()) throw ContractError("mean_attention_maps: no samples selected");

  std::vector<Tensor> sums(config.num_maps(), Tensor(Shape{m, m}));
  for (std::size_t start = 0; start < rows.size(); start += kAttentionChunk) {
    const std::size_t count = std::min(kAttentionChunk, rows.size() - start);
    Tensor batch(Shape{count, m, c});
    for (std::size_t i = 0; i < count; ++i) {
      const double* src = input.data() + rows[start + i] * m * c;
      std::copy(src, src + m * c, batch.data() + i * m * c);
    }
    const model::ForwardArtifacts out = model::forward_batch(params, config, batch);
    for (std::size_t h = 0; h < sums.size(); ++h) {
      const double* w = out.attention_maps[h].data();
      double* acc = sums[h].data();
      for (std::size_t i = 0; i < count * m * m; ++i) acc[i % (m * m)] += w[i];
    }
  }
  for (Tensor& s : sums) {
    for (double& v : s.values()) v /= static_cast<double>(rows.size());
  }
  return sums;
}

std::vector<fs::path> write_attention_maps(const std::vector<Tensor>& maps, const fs::path& prefix) {
  std::vector<fs::path> written;
  for (std::size_t h = 0; h < maps.size(); ++h) {
    fs::path path = prefix;
    path += "_head" + std::to_string(h) + ".csv";
    std::ofstream out = open_output(path);
    const Tensor& w = maps[h];
    for (std::size_t i = 0; i < w.dim(0); ++i) {
      for (std::size_t j = 0; j < w.dim(1); ++j) out << (j ? "," : "") << number(w.at(i, j));
      out << '\n';
    }
    finish(out, path);
    written.push_back(path);
  }
  return written;
}

std::vector<fs::path> export_attention_maps(const model::ModelParams& params,
                                            const model::ModelConfig& config, const Tensor& input,
                                            const fs::path& prefix) {
  return write_attention_maps(mean_attention_maps(params, config, input), prefix);
}

TrialResult run_trial(const ExperimentConfig& config, const data::RawDataset& dataset,
                      std::uint64_t seed, const model::StepObserver& observer) {
  PreparedTrial p = prepare_trial(config, dataset, seed);
  TrialResult t;
  t.seed = seed;
  t.model = p.model;
  t.fit = model::fit(p.model, p.train_input, observer);
  std::vector<double> scores = model::anomaly_scores(t.fit.params, p.model, p.test_input);
  t.report = metrics::make_report(std::move(scores), p.split.test_labels, seed);
  t.test_rows = p.split.test_rows;

  // Mean maps over the normal training samples only.
  std::vector<bool> normals(p.split.train_contaminant.size());
  for (std::size_t i = 0; i < normals.size(); ++i) normals[i] = !p.split.train_contaminant[i];
  t.mean_attention = mean_attention_maps(t.fit.params, p.model, p.train_input, normals);
  t.normalization = p.split.normalization;
  return t;
}

model::Checkpoint make_checkpoint(const ExperimentConfig& config, const TrialResult& trial) {
  model::Checkpoint ck;
  ck.config = trial.model;
  ck.params = trial.fit.params;
  ck.metadata["dataset"] = config.dataset;
  ck.metadata["label_column"] = effective_label_column(config);
  ck.metadata["preprocessing"] = std::string(data::to_string(config.preprocessing));
  ck.metadata["normalization"] = config.scaling == data::Scaling::kZScore ? "zscore" : "minmax";
  ck.metadata["config_hash"] = config_hash(config);
  const auto& norm = trial.normalization;
  ck.extra_tensors.emplace("norm.location", Tensor(Shape{norm.location.size()}, norm.location));
  ck.extra_tensors.emplace("norm.scale", Tensor(Shape{norm.scale.size()}, norm.scale));
  return ck;
}

Tensor checkpoint_inputs(const model::Checkpoint& ck, const Tensor& features) {
  auto loc = ck.extra_tensors.find("norm.location");
  auto scale = ck.extra_tensors.find("norm.scale");
  auto prep = ck.metadata.find("preprocessing");
  auto method = ck.metadata.find("normalization");
  if (loc == ck.extra_tensors.end() || scale == ck.extra_tensors.end() ||
      prep == ck.metadata.end() || method == ck.metadata.end()) {
    throw ContractError("checkpoint lacks normalization or preprocessing metadata");
  }
  const auto kind = data::parse_preprocessing(prep->second);
  if (!kind) throw ParseError("checkpoint: unknown preprocessing '" + prep->second + "'");
  data::NormalizationStats stats;
  stats.method = method->second == "minmax" ? data::Scaling::kMinMax : data::Scaling::kZScore;
  stats.location.assign(loc->second.values().begin(), loc->second.values().end());
  stats.scale.assign(scale->second.values().begin(), scale->second.values().end());
  Tensor input = data::to_model_input(stats.apply(features), *kind);
  if (input.dim(1) != ck.config.num_attributes || input.dim(2) != ck.config.channels_in) {
    throw DimensionError("checkpoint expects " + std::to_string(ck.config.num_attributes) + " x " +
                         std::to_string(ck.config.channels_in) + " inputs, data gives " +
                         input.shape().str());
  }
  return input;
}

std::string metrics_json(const ExperimentConfig& config, const RunResult& result) {
  nlohmann::ordered_json j;
  j["dataset"] = config.dataset;
  j["config_hash"] = config_hash(config);
  j["ablation"] = std::string(model::to_string(config.model.ablation));
  j["contamination_ratio"] = config.contamination_ratio;
  j["per_trial"] = nlohmann::json::array();
  for (const TrialResult& t : result.trials) {
    nlohmann::ordered_json row;
    row["seed"] = t.seed;
    row["auc_pr"] = t.report.auc_pr;
    row["auc_roc"] = t.report.auc_roc;
    j["per_trial"].push_back(row);
  }
  j["auc_pr"] = {{"mean", result.summary.auc_pr.mean}, {"std", result.summary.auc_pr.std}};
  j["auc_roc"] = {{"mean", result.summary.auc_roc.mean}, {"std", result.summary.auc_roc.std}};
  return j.dump(2) + "\n";
}

RunResult run_experiment(const ExperimentConfig& config, std::ostream* log) {
  const fs::path dir = config.output_dir;
  fs::create_directories(dir);
  RunResult result;
  try {
    {
      const fs::path path = dir / "config.ini";
      std::ofstream out = open_output(path);
      out << serialize_config(config);
      finish(out, path);
      result.files.emplace_back("config.ini");
    }
    const data::RawDataset dataset = load_dataset(config);
    if (auto e = config.dataset_path ? std::nullopt : find_registry_entry(config.dataset);
        e && log != nullptr &&
        ((e->rows && dataset.num_rows() != e->rows) ||
         (e->features && dataset.num_features() != e->features) ||
         (e->anomalies && dataset.num_anomalies() != e->anomalies))) {
      *log << "warning: " << config.dataset << " has " << dataset.num_rows() << " rows, "
           << dataset.num_features() << " features, " << dataset.num_anomalies()
           << " anomalies; the registry lists " << e->rows << ", " << e->features << ", "
           << e->anomalies << "\n";
    }

    for (std::uint64_t seed : config.trial_seeds) {
      if (log != nullptr) *log << "trial seed " << seed << ": training\n" << std::flush;
      TrialResult t = run_trial(config, dataset, seed);
      const std::string prefix = trial_prefix(seed);

      const fs::path scores_name = prefix + "_scores.csv";
      {
        std::ofstream out = open_output(dir / scores_name);
        out << "row,label,score\n";
        for (std::size_t i = 0; i < t.report.scores.size(); ++i) {
          out << t.test_rows[i] << ',' << t.report.labels[i] << ',' << number(t.report.scores[i]) << '\n';
        }
        finish(out, dir / scores_name);
        result.files.push_back(scores_name);
      }
      const fs::path loss_name = prefix + "_loss.csv";
      {
        std::ofstream out = open_output(dir / loss_name);
        out << "epoch,loss_d,loss_r,loss_overall\n";
        for (const model::EpochLosses& e : t.fit.trace.epochs) {
          out << e.epoch << ',' << number(e.loss_d) << ',' << number(e.loss_r) << ','
              << number(e.loss_overall) << '\n';
        }
        finish(out, dir / loss_name);
        result.files.push_back(loss_name);
      }
      for (const fs::path& p : write_attention_maps(t.mean_attention, dir / (prefix + "_attention"))) {
        result.files.push_back(p.filename());
      }
      if (config.save_checkpoints) {
        const fs::path ck_name = prefix + ".ckpt";
        model::save_checkpoint(dir / ck_name, make_checkpoint(config, t));
        result.files.push_back(ck_name);
      }
      if (log != nullptr) {
        *log << "trial seed " << seed << ": auc_pr " << t.report.auc_pr << ", auc_roc "
             << t.report.auc_roc << "\n";
      }
      result.trials.push_back(std::move(t));
    }

    std::vector<metrics::ScoreReport> reports;
    for (const TrialResult& t : result.trials) reports.push_back(t.report);
    result.summary = metrics::aggregate_trials(reports);
    {
      const fs::path path = dir / "metrics.json";
      std::ofstream out = open_output(path);
      out << metrics_json(config, result);
      finish(out, path);
      result.files.emplace_back("metrics.json");
    }
    write_manifest(dir, result.files, true, "");
  } catch (const std::exception& e) {
    try {
      write_manifest(dir, result.files, false, e.what());
    } catch (const std::exception&) {
      // The original error is the one worth reporting.
    }
    throw;
  }
  return result;
}

}  // namespace disent::experiment
