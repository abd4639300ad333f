#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>

#include "disent/data/dataset.hpp"
#include "disent/numerics/errors.hpp"

namespace disent::data {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t row, std::string_view column,
                       const std::string& what) {
  throw ParseError(path.string() + ": row " + std::to_string(row) + ", column '" +
                   std::string(column) + "': " + what);
}

}  // namespace

std::size_t RawDataset::num_anomalies() const {
  std::size_t n = 0;
  for (int l : labels) n += (l == 1);
  return n;
}

RawDataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                    LabelMode mode) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset file " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  // Own the names: `line` is reused for every data row.
  std::vector<std::string> header;
  for (std::string_view f : split_fields(line)) header.emplace_back(f);

  std::size_t label_index = header.size();
  RawDataset ds;
  ds.name = path.stem().string();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == label_column) {
      label_index = i;
    } else {
      ds.feature_names.push_back(header[i]);
    }
  }
  if (label_index == header.size() && mode == LabelMode::kRequired) {
    throw ParseError(path.string() + ": no label column named '" + label_column + "'");
  }
  const std::size_t width = ds.feature_names.size();
  if (width == 0) throw ParseError(path.string() + ": no feature columns");

  ds.has_labels = label_index != header.size();
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t row = 1;  // header is row 1
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ParseError(path.string() + ": row " + std::to_string(row) + " has " +
                       std::to_string(fields.size()) + " fields, header has " +
                       std::to_string(header.size()));
    }
    ++rows;
    if (!ds.has_labels) ds.labels.push_back(0);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const std::string_view cell = fields[i];
      double v = 0.0;
      const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || r.ec != std::errc() || r.ptr != cell.data() + cell.size()) {
        fail(path, row, header[i], "non-numeric cell '" + std::string(cell) + "'");
      }
      if (!std::isfinite(v)) fail(path, row, header[i], "non-finite cell '" + std::string(cell) + "'");
      if (i == label_index) {
        if (v != 0.0 && v != 1.0) {
          fail(path, row, header[i], "label must be 0 or 1, got '" + std::string(cell) + "'");
        }
        ds.labels.push_back(static_cast<int>(v));
      } else {
        values.push_back(v);
      }
    }
  }
  if (rows == 0) throw ParseError(path.string() + ": no data rows");
  ds.features = Tensor(Shape{rows, width}, std::move(values));
  return ds;
}

}  // namespace disent::data
