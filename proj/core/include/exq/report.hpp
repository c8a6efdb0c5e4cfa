#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace exq {

struct ActionResult {
  std::string action;
  std::optional<double> rho_percent;  ///< empty when Spearman is undefined
  std::string error;                  ///< why rho is missing
  double mae = 0.0;
  double rmse = 0.0;
  std::size_t count = 0;
  bool operator==(const ActionResult&) const = default;
};

struct LossCurve {
  std::string model;
  std::vector<double> epoch_loss;  ///< mean training loss per epoch
  bool operator==(const LossCurve&) const = default;
};

struct ClipPrediction {
  std::string id;
  std::string action;
  double label = 0.0;
  double prediction = 0.0;
  bool operator==(const ClipPrediction&) const = default;
};

struct RunReport {
  std::vector<ActionResult> actions;
  std::optional<double> average_rho_percent;  ///< unweighted mean of defined per-action values
  double mae = 0.0;
  double rmse = 0.0;
  std::vector<LossCurve> loss_curves;
  std::string config;  ///< canonical manifest JSON
  std::uint64_t seed = 0;
  std::optional<double> wall_clock_seconds;
  std::vector<ClipPrediction> predictions;
  bool operator==(const RunReport&) const = default;
};

/// Fills per-action and overall metrics from `predictions`, in `actions` order.
RunReport summarize(const std::vector<ClipPrediction>& predictions, const std::vector<std::string>& actions);

enum class ReportFormat { structured_text, delimited_table };
ReportFormat parse_report_format(const std::string& s);

/// Lossless JSON form.
std::string report_to_text(const RunReport& r);
RunReport report_from_text(const std::string& text, const std::string& source = "<memory>");

/// CSV: one row per action and a final average row; rho in percent with two
/// decimals.
std::string report_to_table(const RunReport& r);

std::string format_report(const RunReport& r, ReportFormat f);
void emit_report(const std::filesystem::path& path, const RunReport& r, ReportFormat f);
RunReport load_report(const std::filesystem::path& path);

std::string percent2(double v);

}  // namespace exq
