#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "exq/experiment.hpp"

namespace exq {

struct AblationRow {
  std::string value;
  bool ok = false;
  std::string error;
  RunReport report;
};

struct AblationResult {
  std::string axis;
  std::vector<AblationRow> rows;
};

/// Axes: fusion_variant, sigma, output_mode, loss.
std::vector<std::string> ablation_axes();

/// Copy of `base` with one axis set to `value`.
ExperimentManifest apply_axis(const ExperimentManifest& base, const std::string& axis, const std::string& value);

/// Parses "axis=v1,v2,...".
std::pair<std::string, std::vector<std::string>> parse_axis_spec(const std::string& spec);

/// One train + evaluate per value, all with the base seed. Sub-run outputs
/// go to `out_dir`/<axis>_<value>/; a failing value is recorded and the
/// sweep moves on. Writes `out_dir`/ablation_<axis>.csv.
AblationResult ablate(const ExperimentManifest& base, const std::string& axis, const std::vector<std::string>& values,
                      const std::filesystem::path& out_dir, const LogFn& log = {});

/// CSV with one row per value: per-action rho, average rho, MAE, RMSE, status.
std::string ablation_table(const AblationResult& r, const std::vector<std::string>& actions);

}  // namespace exq
