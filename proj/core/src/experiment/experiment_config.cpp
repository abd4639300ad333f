#include "disent/experiment/experiment_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "disent/experiment/registry.hpp"
#include "disent/numerics/errors.hpp"

namespace disent::experiment {
namespace {

const std::set<std::string> kKnownKeys{
    "dataset",           "dataset_path",         "label_column",
    "model.latent_channels", "model.num_heads",  "model.leaky_slope",
    "model.ablation",    "train.epochs",         "train.batch_size",
    "train.learning_rate", "data.preprocessing", "data.normalization",
    "data.contamination_ratio", "run.trials",    "run.seed",
    "run.trial_seeds",   "run.output_dir",       "run.save_checkpoints",
};

class Reader {
 public:
  Reader(const KeyValues& values, std::vector<std::string>& errors)
      : values_(values), errors_(errors) {}

  const KeyValueEntry* find(const std::string& key) const {
    const auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
  }

  void error(const std::string& key, const std::string& message) {
    const KeyValueEntry* e = find(key);
    std::string where = key;
    if (e != nullptr && e->line > 0) where += " (line " + std::to_string(e->line) + ")";
    errors_.push_back(where + ": " + message);
  }

  // Integer fields are parsed signed so that "-3" is reported as negative
  // rather than as a parse failure.
  std::optional<long long> integer(const std::string& key) {
    const KeyValueEntry* e = find(key);
    if (e == nullptr) return std::nullopt;
    long long v = 0;
    const char* end = e->value.data() + e->value.size();
    const auto [ptr, ec] = std::from_chars(e->value.data(), end, v);
    if (ec != std::errc() || ptr != end) {
      error(key, "expected an integer, got '" + e->value + "'");
      return std::nullopt;
    }
    return v;
  }

  std::optional<double> real(const std::string& key) {
    const KeyValueEntry* e = find(key);
    if (e == nullptr) return std::nullopt;
    double v = 0.0;
    const char* end = e->value.data() + e->value.size();
    const auto [ptr, ec] = std::from_chars(e->value.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
      error(key, "expected a finite number, got '" + e->value + "'");
      return std::nullopt;
    }
    return v;
  }

  std::optional<bool> boolean(const std::string& key) {
    const KeyValueEntry* e = find(key);
    if (e == nullptr) return std::nullopt;
    if (e->value == "true" || e->value == "1") return true;
    if (e->value == "false" || e->value == "0") return false;
    error(key, "expected true or false, got '" + e->value + "'");
    return std::nullopt;
  }

  // Positive count; reports and returns nullopt otherwise.
  std::optional<std::size_t> positive(const std::string& key) {
    const auto v = integer(key);
    if (!v) return std::nullopt;
    if (*v <= 0) {
      error(key, "must be positive, got " + std::to_string(*v));
      return std::nullopt;
    }
    return static_cast<std::size_t>(*v);
  }

 private:
  const KeyValues& values_;
  std::vector<std::string>& errors_;
};

std::string format_double(double v) {
  // Shortest round-trip representation.
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

ValidationResult validate_config(const KeyValues& values) {
  ValidationResult result;
  std::vector<std::string>& errors = result.errors;
  Reader r(values, errors);

  for (const auto& [key, entry] : values) {
    if (!kKnownKeys.contains(key)) r.error(key, "unknown key");
  }

  ExperimentConfig cfg;
  const KeyValueEntry* dataset = r.find("dataset");
  if (dataset == nullptr || dataset->value.empty()) {
    errors.push_back("dataset: required");
  } else {
    cfg.dataset = dataset->value;
  }
  if (const KeyValueEntry* e = r.find("dataset_path")) cfg.dataset_path = e->value;
  if (const KeyValueEntry* e = r.find("label_column")) cfg.label_column = e->value;

  // Registry defaults; unknown datasets need an explicit path.
  const auto defaults = cfg.dataset.empty() ? std::nullopt : find_dataset(cfg.dataset);
  if (defaults) {
    cfg.dataset = std::string(defaults->name);
    cfg.model.learning_rate = defaults->learning_rate;
    cfg.model.epochs = defaults->epochs;
    cfg.model.batch_size = defaults->batch_size;
    cfg.model.latent_channels = defaults->latent_channels;
    cfg.preprocessing = defaults->preprocessing;
  } else if (!cfg.dataset.empty() && !cfg.dataset_path) {
    r.error("dataset", "unknown dataset '" + cfg.dataset + "' (set dataset_path for custom data)");
  }

  if (const KeyValueEntry* e = r.find("model.ablation")) {
    if (auto a = model::parse_ablation(e->value)) {
      cfg.model.ablation = *a;
    } else {
      r.error("model.ablation", "unknown ablation '" + e->value +
                                    "' (full, one_head_one_subset, complement_mask, no_disentangle)");
    }
  }
  const bool single_head = cfg.model.ablation == model::Ablation::kOneHeadOneSubset ||
                           cfg.model.ablation == model::Ablation::kComplementMask;
  cfg.model.num_heads = single_head ? 1 : 2;
  if (auto v = r.positive("model.num_heads")) cfg.model.num_heads = *v;
  if (auto v = r.positive("model.latent_channels")) cfg.model.latent_channels = *v;
  if (auto v = r.real("model.leaky_slope")) {
    if (*v > 0.0 && *v < 1.0) {
      cfg.model.leaky_slope = *v;
    } else {
      r.error("model.leaky_slope", "must lie in (0, 1)");
    }
  }
  if (single_head && cfg.model.num_heads != 1) {
    r.error("model.num_heads", "ablation " + std::string(model::to_string(cfg.model.ablation)) +
                                   " requires num_heads = 1, got " +
                                   std::to_string(cfg.model.num_heads));
  }
  if (cfg.model.num_heads > 2 && cfg.model.ablation != model::Ablation::kFull) {
    r.error("model.ablation", "more than two heads are only supported with ablation full");
  }

  if (auto v = r.positive("train.epochs")) cfg.model.epochs = *v;
  if (auto v = r.positive("train.batch_size")) cfg.model.batch_size = *v;
  if (auto v = r.real("train.learning_rate")) {
    if (*v > 0.0) {
      cfg.model.learning_rate = *v;
    } else {
      r.error("train.learning_rate", "must be positive, got " + format_double(*v));
    }
  }

  if (const KeyValueEntry* e = r.find("data.preprocessing")) {
    if (auto p = data::parse_preprocessing(e->value)) {
      cfg.preprocessing = *p;
    } else {
      r.error("data.preprocessing", "unknown preprocessing '" + e->value + "'");
    }
  }
  if (const KeyValueEntry* e = r.find("data.normalization")) {
    if (e->value == "zscore") {
      cfg.scaling = data::Scaling::kZScore;
    } else if (e->value == "minmax") {
      cfg.scaling = data::Scaling::kMinMax;
    } else {
      r.error("data.normalization", "expected zscore or minmax, got '" + e->value + "'");
    }
  }
  if (auto v = r.real("data.contamination_ratio")) {
    if (*v >= 0.0 && *v <= 0.05) {
      cfg.contamination_ratio = *v;
    } else {
      r.error("data.contamination_ratio", "must lie in [0, 0.05], got " + format_double(*v));
    }
  }

  if (auto v = r.positive("run.trials")) cfg.trials = *v;
  if (auto v = r.integer("run.seed")) {
    if (*v >= 0) {
      cfg.base_seed = static_cast<std::uint64_t>(*v);
    } else {
      r.error("run.seed", "must be non-negative");
    }
  }
  if (const KeyValueEntry* e = r.find("run.trial_seeds")) {
    std::stringstream ss(e->value);
    std::string item;
    bool bad = false;
    while (std::getline(ss, item, ',')) {
      const auto first = item.find_first_not_of(' ');
      const auto last = item.find_last_not_of(' ');
      std::uint64_t seed = 0;
      const char* begin = first == std::string::npos ? item.data() : item.data() + first;
      const char* end = last == std::string::npos ? item.data() : item.data() + last + 1;
      const auto [ptr, ec] = std::from_chars(begin, end, seed);
      if (begin == end || ec != std::errc() || ptr != end) {
        bad = true;
        break;
      }
      cfg.trial_seeds.push_back(seed);
    }
    if (bad || cfg.trial_seeds.empty()) {
      r.error("run.trial_seeds", "expected a comma-separated list of non-negative integers");
    } else if (r.find("run.trials") == nullptr) {
      cfg.trials = cfg.trial_seeds.size();
    } else if (cfg.trial_seeds.size() != cfg.trials) {
      r.error("run.trial_seeds", "has " + std::to_string(cfg.trial_seeds.size()) +
                                     " seeds but run.trials = " + std::to_string(cfg.trials));
    }
  }
  if (cfg.trial_seeds.empty()) {
    for (std::size_t i = 0; i < cfg.trials; ++i) cfg.trial_seeds.push_back(cfg.base_seed + i);
  }
  if (const KeyValueEntry* e = r.find("run.output_dir")) {
    if (e->value.empty()) {
      r.error("run.output_dir", "must not be empty");
    } else {
      cfg.output_dir = e->value;
    }
  }
  if (auto v = r.boolean("run.save_checkpoints")) cfg.save_checkpoints = *v;

  cfg.model.seed = cfg.trial_seeds.empty() ? cfg.base_seed : cfg.trial_seeds.front();
  if (errors.empty()) result.config = std::move(cfg);
  return result;
}

ExperimentConfig require_config(const KeyValues& values) {
  ValidationResult r = validate_config(values);
  if (!r.ok()) {
    std::string message = "invalid experiment config:";
    for (const std::string& e : r.errors) message += "\n  " + e;
    throw ContractError(message);
  }
  return std::move(*r.config);
}

namespace {

void write_config(std::ostream& out, const ExperimentConfig& c, bool with_io) {
  out << "dataset = " << c.dataset << '\n';
  if (c.dataset_path) out << "dataset_path = " << c.dataset_path->string() << '\n';
  if (c.label_column) out << "label_column = " << *c.label_column << '\n';
  out << "model.latent_channels = " << c.model.latent_channels << '\n'
      << "model.num_heads = " << c.model.num_heads << '\n'
      << "model.leaky_slope = " << format_double(c.model.leaky_slope) << '\n'
      << "model.ablation = " << model::to_string(c.model.ablation) << '\n'
      << "train.epochs = " << c.model.epochs << '\n'
      << "train.batch_size = " << c.model.batch_size << '\n'
      << "train.learning_rate = " << format_double(c.model.learning_rate) << '\n'
      << "data.preprocessing = " << data::to_string(c.preprocessing) << '\n'
      << "data.normalization = " << (c.scaling == data::Scaling::kZScore ? "zscore" : "minmax") << '\n'
      << "data.contamination_ratio = " << format_double(c.contamination_ratio) << '\n'
      << "run.trials = " << c.trials << '\n'
      << "run.seed = " << c.base_seed << '\n'
      << "run.trial_seeds = ";
  for (std::size_t i = 0; i < c.trial_seeds.size(); ++i) out << (i ? "," : "") << c.trial_seeds[i];
  out << '\n';
  if (with_io) {
    out << "run.output_dir = " << c.output_dir.string() << '\n'
        << "run.save_checkpoints = " << (c.save_checkpoints ? "true" : "false") << '\n';
  }
}

}  // namespace

std::string serialize_config(const ExperimentConfig& config) {
  std::ostringstream out;
  write_config(out, config, true);
  return out.str();
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::ostringstream text;
  write_config(text, config, false);
  for (unsigned char ch : text.str()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace disent::experiment
