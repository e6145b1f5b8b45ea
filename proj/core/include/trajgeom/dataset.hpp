#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trajgeom/random.hpp"

namespace trajgeom {

// n samples of p features, row-major. `num_classes > 0` marks a
// classification set whose targets are integers in [0, num_classes);
// `num_classes == 0` marks regression targets.
struct Dataset {
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t num_classes = 0;
  std::vector<double> features;
  std::vector<double> targets;

  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * p, p};
  }
  std::size_t label(std::size_t i) const {
    return static_cast<std::size_t>(targets[i]);
  }
  bool is_classification() const { return num_classes > 0; }

  // Throws Error when an invariant is violated.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// k gaussian clusters: centers ~ N(0, I_p), samples = center + spread * N(0, I_p),
// n / k samples per class, interleaved by class. Draws from `stream` only.
Dataset gen_blobs(RandomStream& stream, std::size_t n, std::size_t p,
                  std::size_t k, double spread);

// x ~ N(0, I_p), y ~ N(0, 1), independently.
Dataset gen_regression(RandomStream& stream, std::size_t n, std::size_t p);

// IDX container (big-endian). The feature file must have >= 1 dimension; the
// first is the sample count and the rest are flattened into features. An
// optional label file holds n integer labels; without it every label is 0 and
// num_classes is 1.
Dataset load_idx(const std::filesystem::path& features_path,
                 const std::optional<std::filesystem::path>& labels_path = {});

// Writes an IDX file of doubles (type code 0x0E) with dims (n, p). Used to
// produce fixtures; labels are written separately as unsigned bytes.
void write_idx_features(const std::filesystem::path& path, const Dataset& data);
void write_idx_labels(const std::filesystem::path& path, const Dataset& data);

enum class LabelKind { classification, regression };

// CSV with a header row. `label_column` names the target column; every other
// column is a feature. Classification labels must be integers >= 0 and
// num_classes becomes max label + 1.
Dataset load_csv(const std::filesystem::path& path,
                 const std::string& label_column,
                 LabelKind kind = LabelKind::classification);

// Header is x0..x{p-1},label. Values are printed with 17 significant digits,
// so load_csv(write_csv(d)) reproduces d exactly.
void write_csv(const std::filesystem::path& path, const Dataset& data);

}  // namespace trajgeom
