#include "disent/model/checkpoint.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "disent/numerics/errors.hpp"

namespace disent::model {
namespace {

constexpr const char* kMagic = "disent-checkpoint";
constexpr int kVersion = 1;

void write_tensor(std::ostream& out, const std::string& name, const Tensor& t) {
  out << "tensor " << name << ' ' << t.rank();
  for (std::size_t i = 0; i < t.rank(); ++i) out << ' ' << t.dim(i);
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto r = std::to_chars(buf, buf + sizeof(buf), t[i], std::chars_format::hex);
    if (i) out << ' ';
    out.write(buf, r.ptr - buf);
  }
  out << '\n';
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw ParseError("checkpoint line " + std::to_string(line) + ": " + what);
}

double parse_hex(std::string_view token, std::size_t line) {
  bool negative = false;
  if (!token.empty() && token.front() == '-') {
    negative = true;
    token.remove_prefix(1);
  }
  double value = 0.0;
  const auto r = std::from_chars(token.data(), token.data() + token.size(), value,
                                 std::chars_format::hex);
  if (r.ec != std::errc() || r.ptr != token.data() + token.size()) {
    fail(line, "bad tensor value '" + std::string(token) + "'");
  }
  return negative ? -value : value;
}

std::size_t to_size(const std::string& text, std::size_t line) {
  std::size_t value = 0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), value);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size()) {
    fail(line, "expected a non-negative integer, got '" + text + "'");
  }
  return value;
}

void set_config_field(ModelConfig& c, const std::string& key, const std::string& value,
                      std::size_t line) {
  if (key == "num_attributes") c.num_attributes = to_size(value, line);
  else if (key == "channels_in") c.channels_in = to_size(value, line);
  else if (key == "latent_channels") c.latent_channels = to_size(value, line);
  else if (key == "num_heads") c.num_heads = to_size(value, line);
  else if (key == "leaky_slope") c.leaky_slope = parse_hex(value, line);
  else if (key == "epochs") c.epochs = to_size(value, line);
  else if (key == "batch_size") c.batch_size = to_size(value, line);
  else if (key == "learning_rate") c.learning_rate = parse_hex(value, line);
  else if (key == "seed") c.seed = to_size(value, line);
  else if (key == "ablation") {
    const auto a = parse_ablation(value);
    if (!a) fail(line, "unknown ablation '" + value + "'");
    c.ablation = *a;
  } else {
    fail(line, "unknown config key '" + key + "'");
  }
}

std::string hex(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
  return std::string(buf, r.ptr);
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& cp) {
  const ModelConfig& c = cp.config;
  out << kMagic << ' ' << kVersion << '\n';
  out << "config num_attributes " << c.num_attributes << '\n'
      << "config channels_in " << c.channels_in << '\n'
      << "config latent_channels " << c.latent_channels << '\n'
      << "config num_heads " << c.num_heads << '\n'
      << "config leaky_slope " << hex(c.leaky_slope) << '\n'
      << "config epochs " << c.epochs << '\n'
      << "config batch_size " << c.batch_size << '\n'
      << "config learning_rate " << hex(c.learning_rate) << '\n'
      << "config seed " << c.seed << '\n'
      << "config ablation " << to_string(c.ablation) << '\n';
  for (const auto& [key, value] : cp.metadata) {
    if (key.find_first_of(" \n") != std::string::npos || value.find('\n') != std::string::npos) {
      throw ContractError("checkpoint metadata must be single-line with a space-free key");
    }
    out << "meta " << key << ' ' << value << '\n';
  }
  const auto names = cp.params.tensor_names();
  const auto tensors = cp.params.tensors();
  for (std::size_t i = 0; i < tensors.size(); ++i) write_tensor(out, names[i], *tensors[i]);
  for (const auto& [name, t] : cp.extra_tensors) write_tensor(out, "extra." + name, t);
  out << "end\n";
  if (!out) throw Error("failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string text;
  std::size_t line_no = 1;
  if (!std::getline(in, text)) fail(line_no, "empty checkpoint");
  {
    std::istringstream header(text);
    std::string magic;
    int version = 0;
    header >> magic >> version;
    if (magic != kMagic) fail(line_no, "not a checkpoint file");
    if (version != kVersion) fail(line_no, "unsupported checkpoint version " + std::to_string(version));
  }

  Checkpoint cp;
  std::map<std::string, Tensor> tensors;
  bool ended = false;
  while (std::getline(in, text)) {
    ++line_no;
    std::istringstream row(text);
    std::string kind;
    row >> kind;
    if (kind == "config") {
      std::string key, value;
      row >> key >> value;
      set_config_field(cp.config, key, value, line_no);
    } else if (kind == "meta") {
      std::string key;
      row >> key;
      std::string value;
      std::getline(row >> std::ws, value);
      cp.metadata[key] = value;
    } else if (kind == "tensor") {
      std::string name, rank_text;
      row >> name >> rank_text;
      const std::size_t rank = to_size(rank_text, line_no);
      std::vector<std::size_t> extents(rank);
      for (auto& e : extents) {
        std::string dim;
        row >> dim;
        e = to_size(dim, line_no);
      }
      Tensor t{Shape(std::span<const std::size_t>(extents))};
      if (!std::getline(in, text)) fail(line_no, "missing values for tensor " + name);
      ++line_no;
      std::istringstream values(text);
      std::string token;
      std::size_t i = 0;
      while (values >> token) {
        if (i >= t.size()) fail(line_no, "too many values for tensor " + name);
        t[i++] = parse_hex(token, line_no);
      }
      if (i != t.size()) fail(line_no, "too few values for tensor " + name);
      tensors.emplace(name, std::move(t));
    } else if (kind == "end") {
      ended = true;
      break;
    } else if (!kind.empty()) {
      fail(line_no, "unknown record '" + kind + "'");
    }
  }
  if (!ended) fail(line_no, "truncated checkpoint (no end marker)");

  cp.config.require_valid();
  cp.params = zero_params(cp.config);
  const auto names = cp.params.tensor_names();
  const auto slots = cp.params.tensors();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    auto it = tensors.find(names[i]);
    if (it == tensors.end()) throw ParseError("checkpoint is missing tensor " + names[i]);
    if (!(it->second.shape() == slots[i]->shape())) {
      throw ParseError("checkpoint tensor " + names[i] + " has shape " + it->second.shape().str() +
                       ", expected " + slots[i]->shape().str());
    }
    *slots[i] = std::move(it->second);
    tensors.erase(it);
  }
  for (auto& [name, t] : tensors) {
    if (name.rfind("extra.", 0) != 0) throw ParseError("unexpected checkpoint tensor " + name);
    cp.extra_tensors.emplace(name.substr(6), std::move(t));
  }
  return cp;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_checkpoint(out, checkpoint);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace disent::model
