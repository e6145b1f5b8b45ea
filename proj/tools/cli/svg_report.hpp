#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trajgeom/geometry.hpp"

namespace trajgeom::cli {

struct FigureSpec {
  Metric metric = Metric::gamma;  // rsi, eb, gamma, lo_lr or dist
  bool band = true;
  bool log_scale = false;
};

FigureSpec make_figure_spec(const std::string& metric, bool band, bool log_scale);

struct RunSeries {
  std::string run_id;
  std::vector<EpochAggregate> epochs;
};

// epochs.csv of a run directory; the run id comes from manifest.json when
// present, otherwise from the directory name. Read-only.
RunSeries load_run_series(const std::filesystem::path& run_dir);

// The plot area carries its data-to-pixel mapping as attributes:
//   <rect class="plot-area" x y width height data-x-lo data-x-hi
//         data-y-lo data-y-hi data-log>
// In log mode data-y-lo/hi are log10 values. Each run gets a polyline of
// class "mean" and, with bands on, a polygon of class "band" tracing the
// max column left to right and the min column right to left.
std::string render_svg(const FigureSpec& spec, std::span<const RunSeries> runs);

// File name for a figure, e.g. "gamma.svg" or "eb_log.svg".
std::string figure_file_name(const FigureSpec& spec);

// Figures for a walk or converge output directory as (file name, svg) pairs:
// walk_ratio, walk_cosine and convergence, each predicted against observed.
std::vector<std::pair<std::string, std::string>> render_baseline(
    const std::filesystem::path& dir, bool log_scale);

// Directories holding epochs.csv are drawn together, one figure per spec.
// Directories holding walk.csv or convergence.csv get their baseline figures.
std::vector<std::filesystem::path> write_report(
    std::span<const std::filesystem::path> run_dirs,
    std::span<const FigureSpec> figures, const std::filesystem::path& out_dir);

}  // namespace trajgeom::cli
