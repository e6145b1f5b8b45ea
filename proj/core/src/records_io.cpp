#include "trajgeom/records_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "trajgeom/errors.hpp"

namespace trajgeom {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

const char* const kStepsHeader =
    "run_id,t,epoch,loss,lr,rsi,eb,gamma,lo_lr,dist,degenerate";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& cell, const std::string& file,
                    const std::string& column, std::size_t line) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ParseError(file + ":" + std::to_string(line) + ": column '" + column +
                         "': not a number: '" + cell + "'",
                     line);
  }
  return v;
}

std::size_t parse_size(const std::string& cell, const std::string& file,
                       const std::string& column, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ParseError(file + ":" + std::to_string(line) + ": column '" + column +
                         "': not a non-negative integer: '" + cell + "'",
                     line);
  }
  return v;
}

std::vector<std::string> epochs_header() {
  std::vector<std::string> h{"epoch"};
  for (Metric m : kAllMetrics) {
    const std::string name(to_string(m));
    h.push_back(name + "_mean");
    h.push_back(name + "_min");
    h.push_back(name + "_max");
  }
  h.push_back("count");
  return h;
}

void expect_header(const std::vector<std::string>& got,
                   const std::vector<std::string>& want, const std::string& file) {
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (i >= got.size()) {
      throw ParseError(file + ":1: missing column '" + want[i] + "'", 1);
    }
    if (got[i] != want[i]) {
      throw ParseError(file + ":1: expected column '" + want[i] + "', found '" +
                           got[i] + "'",
                       1);
    }
  }
  if (got.size() > want.size()) {
    throw ParseError(file + ":1: unexpected column '" + got[want.size()] + "'", 1);
  }
}

}  // namespace

void write_steps_csv(const std::filesystem::path& path,
                     std::span<const StepRecord> records) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << kStepsHeader << '\n';
  for (const auto& r : records) {
    out << r.run_id << ',' << r.t << ',' << r.epoch << ',' << format_double(r.loss)
        << ',' << format_double(r.lr) << ',' << format_double(r.rsi) << ','
        << format_double(r.eb) << ',' << format_double(r.gamma) << ','
        << format_double(r.lo_lr) << ',' << format_double(r.dist) << ','
        << (r.degenerate ? 1 : 0) << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<StepRecord> read_steps_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  const std::string file = path.string();
  std::string line;
  if (!std::getline(in, line)) throw ParseError(file + ": empty file", 1);
  const auto header = split(line);
  expect_header(header, split(kStepsHeader), file);

  std::vector<StepRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != header.size()) {
      throw ParseError(file + ":" + std::to_string(lineno) + ": expected " +
                           std::to_string(header.size()) + " cells",
                       lineno);
    }
    StepRecord r;
    r.run_id = c[0];
    r.t = parse_size(c[1], file, header[1], lineno);
    r.epoch = parse_size(c[2], file, header[2], lineno);
    r.loss = parse_double(c[3], file, header[3], lineno);
    r.lr = parse_double(c[4], file, header[4], lineno);
    r.rsi = parse_double(c[5], file, header[5], lineno);
    r.eb = parse_double(c[6], file, header[6], lineno);
    r.gamma = parse_double(c[7], file, header[7], lineno);
    r.lo_lr = parse_double(c[8], file, header[8], lineno);
    r.dist = parse_double(c[9], file, header[9], lineno);
    r.degenerate = parse_size(c[10], file, header[10], lineno) != 0;
    records.push_back(std::move(r));
  }
  return records;
}

void write_epochs_csv(const std::filesystem::path& path,
                      std::span<const EpochAggregate> epochs) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  const auto header = epochs_header();
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << (i ? "," : "") << header[i];
  }
  out << '\n';
  for (const auto& e : epochs) {
    out << e.epoch;
    for (const auto& s : e.stats) {
      if (s) {
        out << ',' << format_double(s->mean) << ',' << format_double(s->min) << ','
            << format_double(s->max);
      } else {
        out << ",,,";
      }
    }
    out << ',' << e.count << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<EpochAggregate> read_epochs_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  const std::string file = path.string();
  std::string line;
  if (!std::getline(in, line)) throw ParseError(file + ": empty file", 1);
  const auto header = split(line);
  expect_header(header, epochs_header(), file);

  std::vector<EpochAggregate> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != header.size()) {
      throw ParseError(file + ":" + std::to_string(lineno) + ": expected " +
                           std::to_string(header.size()) + " cells",
                       lineno);
    }
    EpochAggregate e;
    e.epoch = parse_size(c[0], file, header[0], lineno);
    e.count = parse_size(c.back(), file, header.back(), lineno);
    for (std::size_t m = 0; m < kMetricCount; ++m) {
      const std::size_t col = 1 + 3 * m;
      if (c[col].empty() && c[col + 1].empty() && c[col + 2].empty()) continue;
      Stats s;
      s.mean = parse_double(c[col], file, header[col], lineno);
      s.min = parse_double(c[col + 1], file, header[col + 1], lineno);
      s.max = parse_double(c[col + 2], file, header[col + 2], lineno);
      e.stats[m] = s;
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace trajgeom
