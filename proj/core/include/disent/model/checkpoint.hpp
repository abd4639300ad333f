#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "disent/model/config.hpp"
#include "disent/model/params.hpp"

namespace disent::model {

// A trained model plus whatever the caller needs to reproduce its inputs
// (e.g. normalization statistics). Tensors round-trip bit-exactly.
//
// Text format, version 1:
//   disent-checkpoint 1
//   config <key> <value>            one line per ModelConfig field
//   meta <key> <value...>           free-form string metadata
//   tensor <name> <rank> <extents>  followed by one line of hexfloat values
//   end
struct Checkpoint {
  ModelConfig config;
  ModelParams params;
  std::map<std::string, std::string> metadata;
  std::map<std::string, Tensor> extra_tensors;
};

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace disent::model
