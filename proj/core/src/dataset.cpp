#include "trajgeom/dataset.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "trajgeom/errors.hpp"
#include "trajgeom/records_io.hpp"

namespace trajgeom {

void Dataset::validate() const {
  if (n < 1) throw Error("dataset is empty");
  if (features.size() != n * p) throw Error("feature matrix is not n x p");
  if (targets.size() != n) throw Error("target count differs from n");
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (!std::isfinite(features[i])) {
      throw Error("non-finite feature in sample " + std::to_string(i / p));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double y = targets[i];
    if (!std::isfinite(y)) throw Error("non-finite target in sample " + std::to_string(i));
    if (is_classification() &&
        (y < 0 || y != std::floor(y) || y >= static_cast<double>(num_classes))) {
      throw Error("label of sample " + std::to_string(i) + " outside [0, " +
                  std::to_string(num_classes) + ")");
    }
  }
}

Dataset gen_blobs(RandomStream& stream, std::size_t n, std::size_t p,
                  std::size_t k, double spread) {
  if (k < 2) throw Error("gen_blobs: need at least 2 classes");
  if (n == 0 || n % k != 0) throw Error("gen_blobs: n must be a positive multiple of k");
  if (p == 0) throw Error("gen_blobs: p must be positive");
  if (!(spread >= 0)) throw Error("gen_blobs: spread must be >= 0");

  std::vector<double> centers(k * p);
  for (double& c : centers) c = stream.gauss();

  Dataset d;
  d.n = n;
  d.p = p;
  d.num_classes = k;
  d.features.resize(n * p);
  d.targets.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cls = i % k;
    d.targets[i] = static_cast<double>(cls);
    for (std::size_t j = 0; j < p; ++j) {
      d.features[i * p + j] = centers[cls * p + j] + spread * stream.gauss();
    }
  }
  return d;
}

Dataset gen_regression(RandomStream& stream, std::size_t n, std::size_t p) {
  if (n == 0 || p == 0) throw Error("gen_regression: n and p must be positive");
  Dataset d;
  d.n = n;
  d.p = p;
  d.features.resize(n * p);
  d.targets.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) d.features[i * p + j] = stream.gauss();
    d.targets[i] = stream.gauss();
  }
  return d;
}

// ---------------------------------------------------------------------------
// IDX

namespace {

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const unsigned char* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
         (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

std::uint64_t be_word(const unsigned char* p, std::size_t width) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width; ++i) v = (v << 8) | p[i];
  return v;
}

std::size_t idx_type_width(unsigned char code) {
  switch (code) {
    case 0x08: case 0x09: return 1;
    case 0x0B: return 2;
    case 0x0C: case 0x0D: return 4;
    case 0x0E: return 8;
    default: return 0;
  }
}

double idx_value(const unsigned char* p, unsigned char code) {
  switch (code) {
    case 0x08: return p[0];
    case 0x09: return static_cast<std::int8_t>(p[0]);
    case 0x0B: return static_cast<std::int16_t>(be_word(p, 2));
    case 0x0C: return static_cast<std::int32_t>(be_word(p, 4));
    case 0x0D: return std::bit_cast<float>(static_cast<std::uint32_t>(be_word(p, 4)));
    default: return std::bit_cast<double>(be_word(p, 8));
  }
}

struct IdxTensor {
  std::vector<std::size_t> dims;
  std::vector<double> values;
};

IdxTensor parse_idx(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  const std::string where = path.string();
  if (bytes.size() < 4) {
    throw ParseError(where + ": truncated header: expected at least 4 bytes, got " +
                         std::to_string(bytes.size()),
                     bytes.size());
  }
  if (bytes[0] != 0 || bytes[1] != 0) {
    throw ParseError(where + ": bad IDX magic at byte 0 (first two bytes must be zero)", 0);
  }
  const unsigned char code = bytes[2];
  const std::size_t width = idx_type_width(code);
  if (width == 0) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "0x%02X", code);
    throw ParseError(where + ": unknown IDX type code " + buf + " at byte 2", 2);
  }
  const std::size_t ndims = bytes[3];
  if (ndims == 0) throw ParseError(where + ": IDX file declares zero dimensions at byte 3", 3);
  const std::size_t header = 4 + 4 * ndims;
  if (bytes.size() < header) {
    throw ParseError(where + ": truncated header: expected " + std::to_string(header) +
                         " bytes, got " + std::to_string(bytes.size()),
                     bytes.size());
  }
  IdxTensor t;
  std::size_t count = 1;
  for (std::size_t i = 0; i < ndims; ++i) {
    t.dims.push_back(be32(bytes.data() + 4 + 4 * i));
    count *= t.dims.back();
  }
  const std::size_t expected = header + count * width;
  if (bytes.size() != expected) {
    throw ParseError(where + ": expected " + std::to_string(expected) +
                         " bytes for the declared shape, got " +
                         std::to_string(bytes.size()),
                     std::min(bytes.size(), expected));
  }
  t.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    t.values[i] = idx_value(bytes.data() + header + i * width, code);
  }
  return t;
}

void put_be32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b, 4);
}

}  // namespace

Dataset load_idx(const std::filesystem::path& features_path,
                 const std::optional<std::filesystem::path>& labels_path) {
  IdxTensor feats = parse_idx(features_path);
  Dataset d;
  d.n = feats.dims[0];
  d.p = 1;
  for (std::size_t i = 1; i < feats.dims.size(); ++i) d.p *= feats.dims[i];
  d.features = std::move(feats.values);
  if (labels_path) {
    IdxTensor labels = parse_idx(*labels_path);
    if (labels.dims.size() != 1 || labels.dims[0] != d.n) {
      throw ParseError(labels_path->string() + ": expected " + std::to_string(d.n) +
                           " labels in a 1-d IDX file",
                       4);
    }
    double max_label = 0;
    for (std::size_t i = 0; i < d.n; ++i) {
      const double y = labels.values[i];
      if (y < 0 || y != std::floor(y)) {
        throw ParseError(labels_path->string() + ": label " + std::to_string(i) +
                             " is not a non-negative integer",
                         4 + 4 + i);
      }
      max_label = std::max(max_label, y);
    }
    d.targets = std::move(labels.values);
    d.num_classes = static_cast<std::size_t>(max_label) + 1;
  } else {
    d.targets.assign(d.n, 0.0);
    d.num_classes = 1;
  }
  d.validate();
  return d;
}

void write_idx_features(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  const char magic[4] = {0, 0, 0x0E, 2};
  out.write(magic, 4);
  put_be32(out, static_cast<std::uint32_t>(data.n));
  put_be32(out, static_cast<std::uint32_t>(data.p));
  for (double v : data.features) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 7; i >= 0; --i) out.put(static_cast<char>(bits >> (8 * i)));
  }
}

void write_idx_labels(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  const char magic[4] = {0, 0, 0x08, 1};
  out.write(magic, 4);
  put_be32(out, static_cast<std::uint32_t>(data.n));
  for (double y : data.targets) {
    if (y < 0 || y > 255 || y != std::floor(y)) {
      throw Error("write_idx_labels: label does not fit an unsigned byte");
    }
    out.put(static_cast<char>(static_cast<unsigned char>(y)));
  }
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path,
                 const std::string& label_column, LabelKind kind) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  const std::string where = path.string();

  std::string line;
  if (!std::getline(in, line)) throw ParseError(where + ":1: missing header row", 1);
  auto header = split_csv_line(line);
  for (auto& h : header) h = trim(h);
  std::size_t label_idx = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == label_column) label_idx = i;
  }
  if (label_idx == header.size()) {
    throw ParseError(where + ":1: no column named '" + label_column + "'", 1);
  }

  Dataset d;
  d.p = header.size() - 1;
  double max_label = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError(where + ":" + std::to_string(lineno) + ": expected " +
                           std::to_string(header.size()) + " cells, got " +
                           std::to_string(cells.size()),
                       lineno);
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string cell = trim(cells[c]);
      double v = 0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw ParseError(where + ":" + std::to_string(lineno) + ": column '" +
                             header[c] + "' is not a finite number: '" + cell + "'",
                         lineno);
      }
      if (c == label_idx) {
        if (kind == LabelKind::classification && (v < 0 || v != std::floor(v))) {
          throw ParseError(where + ":" + std::to_string(lineno) + ": label '" + cell +
                               "' is not a non-negative integer",
                           lineno);
        }
        max_label = std::max(max_label, v);
        d.targets.push_back(v);
      } else {
        d.features.push_back(v);
      }
    }
    ++d.n;
  }
  if (d.n == 0) throw ParseError(where + ": no data rows", lineno);
  if (kind == LabelKind::classification) {
    d.num_classes = static_cast<std::size_t>(max_label) + 1;
  }
  d.validate();
  return d;
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (std::size_t j = 0; j < data.p; ++j) out << 'x' << j << ',';
  out << "label\n";
  for (std::size_t i = 0; i < data.n; ++i) {
    for (std::size_t j = 0; j < data.p; ++j) {
      out << format_double(data.features[i * data.p + j]) << ',';
    }
    out << format_double(data.targets[i]) << '\n';
  }
}

}  // namespace trajgeom
