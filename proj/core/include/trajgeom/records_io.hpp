#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "trajgeom/geometry.hpp"

namespace trajgeom {

// steps.csv: run_id,t,epoch,loss,lr,rsi,eb,gamma,lo_lr,dist,degenerate
void write_steps_csv(const std::filesystem::path& path,
                     std::span<const StepRecord> records);
std::vector<StepRecord> read_steps_csv(const std::filesystem::path& path);

// epochs.csv: epoch, then <metric>_mean,<metric>_min,<metric>_max for each
// metric in kAllMetrics order, then count. Empty cells when count is 0.
void write_epochs_csv(const std::filesystem::path& path,
                      std::span<const EpochAggregate> epochs);
std::vector<EpochAggregate> read_epochs_csv(const std::filesystem::path& path);

// Shortest text that parses back to the same double ("nan" for NaN).
std::string format_double(double v);

}  // namespace trajgeom
