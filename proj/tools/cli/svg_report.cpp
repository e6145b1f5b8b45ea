#include "cli/svg_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "trajgeom/baselines.hpp"
#include "trajgeom/errors.hpp"
#include "trajgeom/protocol.hpp"
#include "trajgeom/records_io.hpp"

namespace trajgeom::cli {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 180.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 52.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string px(double v) { return fmt("%.6f", v); }

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Point {
  double epoch;
  double mean;
  double lo;
  double hi;
};

double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  double m = 10.0;
  if (r <= 1.0) m = 1.0;
  else if (r <= 2.0) m = 2.0;
  else if (r <= 5.0) m = 5.0;
  return m * mag;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  double step = 0.2;
};

// Widens [lo, hi] to multiples of a 1-2-5 step.
Axis nice_axis(double lo, double hi, int target) {
  if (!(hi > lo)) {
    const double pad = lo == 0.0 ? 0.5 : std::abs(lo) * 0.05;
    lo -= pad;
    hi += pad;
  }
  Axis a;
  a.step = nice_step(hi - lo, target);
  a.lo = std::floor(lo / a.step) * a.step;
  a.hi = std::ceil(hi / a.step) * a.step;
  return a;
}

}  // namespace

FigureSpec make_figure_spec(const std::string& metric, bool band, bool log_scale) {
  const Metric m = parse_metric(metric);
  if (m == Metric::loss || m == Metric::lr) {
    throw Error("figure metric must be one of rsi, eb, gamma, lo_lr, dist (got '" +
                metric + "')");
  }
  return FigureSpec{m, band, log_scale};
}

RunSeries load_run_series(const std::filesystem::path& run_dir) {
  RunSeries s;
  s.epochs = read_epochs_csv(run_dir / kEpochsFile);
  s.run_id = run_dir.filename().string();
  if (s.run_id.empty()) s.run_id = run_dir.parent_path().filename().string();
  std::ifstream in(run_dir / "manifest.json");
  if (in) {
    try {
      const auto manifest = nlohmann::json::parse(in);
      if (manifest.contains("plan") && manifest["plan"].contains("run_id")) {
        s.run_id = manifest["plan"]["run_id"].get<std::string>();
      }
    } catch (const nlohmann::json::exception&) {
      // epochs.csv alone is enough to plot
    }
  }
  return s;
}

std::string figure_file_name(const FigureSpec& spec) {
  std::string name(to_string(spec.metric));
  if (spec.log_scale) name += "_log";
  return name + ".svg";
}

namespace {

struct Curve {
  std::string label;
  std::vector<Point> points;  // already transformed to plot space
  bool dashed = false;
};

struct Canvas {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log = false;
  bool band = false;
  bool integer_x = true;
};

std::string render_curves(const Canvas& c, const std::vector<Curve>& curves) {
  std::optional<double> xmin, xmax, ymin, ymax;
  for (const auto& curve : curves) {
    for (const auto& p : curve.points) {
      const double lo = c.band ? p.lo : p.mean;
      const double hi = c.band ? p.hi : p.mean;
      xmin = xmin ? std::min(*xmin, p.epoch) : p.epoch;
      xmax = xmax ? std::max(*xmax, p.epoch) : p.epoch;
      ymin = ymin ? std::min(*ymin, lo) : lo;
      ymax = ymax ? std::max(*ymax, hi) : hi;
    }
  }

  Axis xa = nice_axis(xmin.value_or(0.0), xmax.value_or(1.0), 8);
  if (c.integer_x && xa.step < 1.0) {
    xa.step = 1.0;
    xa.lo = std::floor(xa.lo);
    xa.hi = std::ceil(xa.hi);
  }
  const Axis ya = nice_axis(ymin.value_or(0.0), ymax.value_or(1.0), 5);

  const double x0 = kLeft;
  const double x1 = kWidth - kRight;
  const double y0 = kTop;
  const double y1 = kHeight - kBottom;
  auto X = [&](double e) { return x0 + (e - xa.lo) / (xa.hi - xa.lo) * (x1 - x0); };
  auto Y = [&](double v) { return y1 - (v - ya.lo) / (ya.hi - ya.lo) * (y1 - y0); };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
    << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << px((x0 + x1) / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(c.title) << (c.log ? " (log scale)" : "") << "</text>\n";
  o << "<rect class=\"plot-area\" x=\"" << px(x0) << "\" y=\"" << px(y0) << "\" width=\""
    << px(x1 - x0) << "\" height=\"" << px(y1 - y0) << "\" fill=\"none\" stroke=\"#444\""
    << " data-x-lo=\"" << format_double(xa.lo) << "\" data-x-hi=\"" << format_double(xa.hi)
    << "\" data-y-lo=\"" << format_double(ya.lo) << "\" data-y-hi=\"" << format_double(ya.hi)
    << "\" data-log=\"" << (c.log ? 1 : 0) << "\"/>\n";

  // ticks
  o << "<g class=\"x-axis\" stroke=\"#444\">\n";
  const int nx = static_cast<int>(std::llround((xa.hi - xa.lo) / xa.step));
  for (int i = 0; i <= nx; ++i) {
    const double e = xa.lo + i * xa.step;
    o << "<line x1=\"" << px(X(e)) << "\" y1=\"" << px(y1) << "\" x2=\"" << px(X(e))
      << "\" y2=\"" << px(y1 + 5) << "\"/>"
      << "<text x=\"" << px(X(e)) << "\" y=\"" << px(y1 + 18)
      << "\" text-anchor=\"middle\" stroke=\"none\">" << fmt("%g", e) << "</text>\n";
  }
  o << "<text x=\"" << px((x0 + x1) / 2) << "\" y=\"" << px(kHeight - 12)
    << "\" text-anchor=\"middle\" stroke=\"none\">" << escape(c.x_label) << "</text>\n</g>\n";
  o << "<g class=\"y-axis\" stroke=\"#444\">\n";
  const int ny = static_cast<int>(std::llround((ya.hi - ya.lo) / ya.step));
  for (int i = 0; i <= ny; ++i) {
    const double v = ya.lo + i * ya.step;
    const double label = c.log ? std::pow(10.0, v) : (std::abs(v) < 1e-12 * ya.step ? 0.0 : v);
    o << "<line x1=\"" << px(x0 - 5) << "\" y1=\"" << px(Y(v)) << "\" x2=\"" << px(x0)
      << "\" y2=\"" << px(Y(v)) << "\"/>"
      << "<text x=\"" << px(x0 - 8) << "\" y=\"" << px(Y(v) + 4)
      << "\" text-anchor=\"end\" stroke=\"none\">" << fmt("%.4g", label) << "</text>\n";
  }
  o << "<text x=\"16\" y=\"" << px((y0 + y1) / 2) << "\" text-anchor=\"middle\" stroke=\"none\""
    << " transform=\"rotate(-90 16 " << px((y0 + y1) / 2) << ")\">" << escape(c.y_label)
    << "</text>\n</g>\n";

  if (c.band) {
    for (std::size_t r = 0; r < curves.size(); ++r) {
      if (curves[r].points.empty()) continue;
      const char* color = kPalette[r % std::size(kPalette)];
      o << "<polygon class=\"band\" data-run=\"" << escape(curves[r].label) << "\" points=\"";
      bool first = true;
      for (const auto& p : curves[r].points) {
        o << (first ? "" : " ") << px(X(p.epoch)) << ',' << px(Y(p.hi));
        first = false;
      }
      for (auto it = curves[r].points.rbegin(); it != curves[r].points.rend(); ++it) {
        o << ' ' << px(X(it->epoch)) << ',' << px(Y(it->lo));
      }
      o << "\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    }
  }
  for (std::size_t r = 0; r < curves.size(); ++r) {
    if (curves[r].points.empty()) continue;
    const char* color = kPalette[r % std::size(kPalette)];
    o << "<polyline class=\"mean\" data-run=\"" << escape(curves[r].label) << "\" points=\"";
    bool first = true;
    for (const auto& p : curves[r].points) {
      o << (first ? "" : " ") << px(X(p.epoch)) << ',' << px(Y(p.mean));
      first = false;
    }
    o << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
      << (curves[r].dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
  }

  o << "<g class=\"legend\">\n";
  for (std::size_t r = 0; r < curves.size(); ++r) {
    const char* color = kPalette[r % std::size(kPalette)];
    const double ly = y0 + 8 + 18.0 * static_cast<double>(r);
    o << "<rect x=\"" << px(x1 + 14) << "\" y=\"" << px(ly - 6) << "\" width=\"14\" height=\"10\" fill=\""
      << color << "\"/><text x=\"" << px(x1 + 34) << "\" y=\"" << px(ly + 3) << "\">"
      << escape(curves[r].label) << "</text>\n";
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  return out;
}

// Rows of a baseline CSV after checking the header.
std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path,
                                                 const std::string& header) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw Error(path.string() + ": expected header '" + header + "'");
  }
  const std::size_t width = split_csv(header).size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != width) throw Error(path.string() + ": malformed row '" + line + "'");
    rows.push_back(std::move(cells));
  }
  return rows;
}

void add_point(Curve& curve, double x, double v, bool log) {
  if (log && !(v > 0.0)) return;
  const double y = log ? std::log10(v) : v;
  curve.points.push_back({x, y, y, y});
}

}  // namespace

std::string render_svg(const FigureSpec& spec, std::span<const RunSeries> runs) {
  const bool log = spec.log_scale;
  auto tf = [log](double v) { return log ? std::log10(v) : v; };

  std::vector<Curve> curves(runs.size());
  for (std::size_t r = 0; r < runs.size(); ++r) {
    curves[r].label = runs[r].run_id;
    for (const auto& agg : runs[r].epochs) {
      const auto& st = agg[spec.metric];
      if (!st) continue;
      if (log && (st->mean <= 0.0 || (spec.band && st->min <= 0.0))) continue;
      curves[r].points.push_back({static_cast<double>(agg.epoch), tf(st->mean),
                                  spec.band ? tf(st->min) : 0.0, spec.band ? tf(st->max) : 0.0});
    }
  }
  const std::string metric(to_string(spec.metric));
  return render_curves({metric, "epoch", metric, log, spec.band, true}, curves);
}

std::vector<std::pair<std::string, std::string>> render_baseline(
    const std::filesystem::path& dir, bool log_scale) {
  std::vector<std::pair<std::string, std::string>> figures;
  const std::string suffix = log_scale ? "_log.svg" : ".svg";
  if (std::filesystem::exists(dir / kWalkFile)) {
    const auto rows = read_table(dir / kWalkFile, "metric,t,remaining,predicted,observed");
    for (const char* metric : {"ratio", "cosine"}) {
      Curve predicted{"predicted", {}, true}, observed{"observed", {}, false};
      for (const auto& row : rows) {
        if (row[0] != metric) continue;
        const double t = std::stod(row[1]);
        add_point(predicted, t, std::stod(row[3]), log_scale);
        add_point(observed, t, std::stod(row[4]), log_scale);
      }
      const std::string title = std::string("random walk ") + metric;
      figures.emplace_back(std::string("walk_") + metric + suffix,
                           render_curves({title, "t", metric, log_scale, false, true},
                                         {predicted, observed}));
    }
  }
  if (std::filesystem::exists(dir / kConvergenceFile)) {
    const auto rows = read_table(dir / kConvergenceFile, "t,predicted,observed");
    Curve predicted{"bound", {}, true}, observed{"observed", {}, false};
    for (const auto& row : rows) {
      const double t = std::stod(row[0]);
      add_point(predicted, t, std::stod(row[1]), log_scale);
      add_point(observed, t, std::stod(row[2]), log_scale);
    }
    figures.emplace_back("convergence" + suffix,
                         render_curves({"squared distance to w*", "t", "dist^2", log_scale, false, true},
                                       {predicted, observed}));
  }
  return figures;
}

std::vector<std::filesystem::path> write_report(
    std::span<const std::filesystem::path> run_dirs,
    std::span<const FigureSpec> figures, const std::filesystem::path& out_dir) {
  std::vector<RunSeries> runs;
  std::vector<std::pair<std::string, std::string>> rendered;
  bool log_scale = false;
  for (const auto& spec : figures) log_scale = log_scale || spec.log_scale;
  for (const auto& dir : run_dirs) {
    if (std::filesystem::exists(dir / kEpochsFile)) {
      runs.push_back(load_run_series(dir));
      continue;
    }
    auto baseline = render_baseline(dir, log_scale);
    if (baseline.empty()) {
      throw Error(dir.string() + ": no epochs.csv, walk.csv or convergence.csv");
    }
    for (auto& fig : baseline) {
      for (const auto& prev : rendered) {
        if (prev.first == fig.first) throw Error("two report inputs both produce " + fig.first);
      }
      rendered.push_back(std::move(fig));
    }
  }
  if (!runs.empty()) {
    for (const auto& spec : figures) rendered.emplace_back(figure_file_name(spec), render_svg(spec, runs));
  }

  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const auto& [name, svg] : rendered) {
    const auto path = out_dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << svg;
    if (!out) throw Error("write failed: " + path.string());
    written.push_back(path);
  }
  return written;
}

}  // namespace trajgeom::cli
