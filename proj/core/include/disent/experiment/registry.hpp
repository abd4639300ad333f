#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "disent/data/preprocess.hpp"

namespace disent::experiment {

// Per-dataset training defaults and the published size of each benchmark.
struct DatasetDefaults {
  std::string_view name;  // canonical lower-case name, also the CSV stem
  std::size_t expected_rows = 0;
  std::size_t expected_features = 0;
  std::size_t expected_anomalies = 0;
  double learning_rate = 1e-4;
  std::size_t epochs = 100;
  std::size_t batch_size = 512;
  std::size_t latent_channels = 128;
  data::Preprocessing preprocessing = data::Preprocessing::kNone;
};

std::span<const DatasetDefaults> dataset_registry();

// Case-insensitive lookup; nullopt for unknown names.
std::optional<DatasetDefaults> find_dataset(std::string_view name);

// Environment variable naming the directory that holds dataset CSVs and,
// optionally, a registry.ini.
inline constexpr const char* kDataRootEnv = "DISENT_DATA_ROOT";

// One `[name]` section of a registry.ini file:
//   path = thyroid.csv        (relative to the registry file)
//   label_column = label
//   rows = 3772
//   features = 6
//   anomalies = 93
struct RegistryEntry {
  std::string name;
  std::filesystem::path path;
  std::string label_column = "label";
  std::size_t rows = 0;  // 0 = not stated
  std::size_t features = 0;
  std::size_t anomalies = 0;
};

// Parses a registry file; throws ParseError on malformed entries.
std::vector<RegistryEntry> load_registry(const std::filesystem::path& registry_file);

// Registry files consulted, in order: $DISENT_DATA_ROOT/registry.ini, then the
// data directory the library was built with. Only existing files are returned.
std::vector<std::filesystem::path> registry_files();

// The first registry entry for `name` (case-insensitive) across registry_files().
std::optional<RegistryEntry> find_registry_entry(std::string_view name);

// Candidate CSV locations, in lookup order: the registry entry's path, then
// `<name>.csv` under $DISENT_DATA_ROOT and the built-in data directory.
std::vector<std::filesystem::path> dataset_candidates(std::string_view name);

// First existing candidate, or nullopt.
std::optional<std::filesystem::path> resolve_dataset(std::string_view name);

}  // namespace disent::experiment
