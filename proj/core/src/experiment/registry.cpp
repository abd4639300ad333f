#include "disent/experiment/registry.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <charconv>
#include <cstdlib>

#include "disent/experiment/key_value.hpp"
#include "disent/numerics/errors.hpp"

#ifndef DISENT_DEFAULT_DATA_DIR
#define DISENT_DEFAULT_DATA_DIR "data"
#endif

namespace disent::experiment {
namespace {

using data::Preprocessing;
constexpr Preprocessing kNone = Preprocessing::kNone;
constexpr Preprocessing kPatch = Preprocessing::kPatch3xM2;

// name, rows, features, anomalies, lr, epochs, batch, latent channels, preprocessing
constexpr std::array kRegistry{
    DatasetDefaults{"arrhythmia", 452, 274, 66, 1e-4, 100, 64, 128, kNone},
    DatasetDefaults{"breastw", 683, 9, 239, 1e-4, 100, 64, 128, kNone},
    DatasetDefaults{"cardio", 1831, 21, 176, 1e-4, 100, 128, 128, kNone},
    DatasetDefaults{"census", 299285, 500, 18568, 1e-4, 100, 2048, 128, kNone},
    DatasetDefaults{"campaign", 41188, 62, 4640, 1e-4, 100, 2048, 128, kNone},
    DatasetDefaults{"cardiotocography", 2114, 21, 466, 1e-4, 100, 128, 128, kNone},
    DatasetDefaults{"fraud", 284807, 29, 492, 1e-4, 200, 2048, 512, kPatch},
    DatasetDefaults{"glass", 214, 9, 9, 1e-4, 100, 64, 128, kNone},
    DatasetDefaults{"ionosphere", 351, 33, 126, 1e-4, 200, 64, 512, kPatch},
    DatasetDefaults{"mammography", 11183, 6, 260, 1e-4, 100, 2048, 128, kNone},
    DatasetDefaults{"nsl-kdd", 148517, 122, 77054, 1e-4, 100, 2048, 128, kNone},
    DatasetDefaults{"optdigits", 5216, 64, 150, 1e-4, 200, 128, 512, kPatch},
    DatasetDefaults{"pima", 768, 8, 268, 1e-4, 100, 128, 128, kNone},
    DatasetDefaults{"pendigits", 6870, 16, 156, 1e-4, 200, 128, 512, kPatch},
    DatasetDefaults{"satellite", 6435, 36, 2036, 1e-4, 200, 512, 512, kPatch},
    DatasetDefaults{"satimage-2", 5803, 36, 71, 1e-4, 200, 512, 512, kPatch},
    DatasetDefaults{"shuttle", 49097, 9, 3511, 1e-4, 200, 2048, 512, kPatch},
    DatasetDefaults{"thyroid", 3772, 6, 93, 1e-4, 100, 512, 128, kNone},
    DatasetDefaults{"wbc", 278, 30, 21, 1e-4, 100, 64, 128, kNone},
    DatasetDefaults{"wine", 129, 13, 10, 1e-4, 100, 64, 128, kNone},
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::span<const DatasetDefaults> dataset_registry() { return kRegistry; }

std::optional<DatasetDefaults> find_dataset(std::string_view name) {
  std::string key = lower(name);
  if (key == "satimage") key = "satimage-2";
  for (const DatasetDefaults& d : kRegistry) {
    if (d.name == key) return d;
  }
  return std::nullopt;
}

std::vector<RegistryEntry> load_registry(const std::filesystem::path& registry_file) {
  const KeyValues values = load_key_values(registry_file);
  std::map<std::string, RegistryEntry> entries;
  for (const auto& [key, entry] : values) {
    const auto dot = key.rfind('.');
    if (dot == std::string::npos) {
      throw ParseError(registry_file.string() + " line " + std::to_string(entry.line) + ": key '" +
                       key + "' outside a [dataset] section");
    }
    const std::string name = lower(key.substr(0, dot));
    const std::string field = key.substr(dot + 1);
    RegistryEntry& e = entries[name];
    e.name = name;
    auto count = [&]() {
      std::size_t v = 0;
      const char* end = entry.value.data() + entry.value.size();
      const auto [ptr, ec] = std::from_chars(entry.value.data(), end, v);
      if (ec != std::errc() || ptr != end) {
        throw ParseError(registry_file.string() + " line " + std::to_string(entry.line) + ": " +
                         field + " must be a non-negative integer");
      }
      return v;
    };
    if (field == "path") {
      e.path = registry_file.parent_path() / entry.value;
    } else if (field == "label_column") {
      e.label_column = entry.value;
    } else if (field == "rows") {
      e.rows = count();
    } else if (field == "features") {
      e.features = count();
    } else if (field == "anomalies") {
      e.anomalies = count();
    } else {
      throw ParseError(registry_file.string() + " line " + std::to_string(entry.line) +
                       ": unknown registry field '" + field + "'");
    }
  }
  std::vector<RegistryEntry> out;
  for (auto& [name, e] : entries) {
    if (e.path.empty()) e.path = registry_file.parent_path() / (name + ".csv");
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<std::filesystem::path> registry_files() {
  std::vector<std::filesystem::path> dirs;
  if (const char* root = std::getenv(kDataRootEnv); root != nullptr && *root != '\0') {
    dirs.emplace_back(root);
  }
  dirs.emplace_back(DISENT_DEFAULT_DATA_DIR);
  std::vector<std::filesystem::path> out;
  for (const auto& d : dirs) {
    std::error_code ec;
    if (std::filesystem::is_regular_file(d / "registry.ini", ec)) out.push_back(d / "registry.ini");
  }
  return out;
}

std::optional<RegistryEntry> find_registry_entry(std::string_view name) {
  const std::string key = lower(name);
  for (const auto& file : registry_files()) {
    for (RegistryEntry& e : load_registry(file)) {
      if (e.name == key) return std::move(e);
    }
  }
  return std::nullopt;
}

std::vector<std::filesystem::path> dataset_candidates(std::string_view name) {
  const std::string file = lower(name) + ".csv";
  std::vector<std::filesystem::path> out;
  if (auto entry = find_registry_entry(name)) out.push_back(entry->path);
  if (const char* root = std::getenv(kDataRootEnv); root != nullptr && *root != '\0') {
    out.push_back(std::filesystem::path(root) / file);
  }
  out.push_back(std::filesystem::path(DISENT_DEFAULT_DATA_DIR) / file);
  std::vector<std::filesystem::path> unique;
  for (auto& p : out) {
    p = p.lexically_normal();
    if (std::find(unique.begin(), unique.end(), p) == unique.end()) unique.push_back(p);
  }
  return unique;
}

std::optional<std::filesystem::path> resolve_dataset(std::string_view name) {
  for (const auto& p : dataset_candidates(name)) {
    std::error_code ec;
    if (std::filesystem::is_regular_file(p, ec)) return p;
  }
  return std::nullopt;
}

}  // namespace disent::experiment
