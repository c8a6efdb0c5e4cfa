#include "exq/ablate.hpp"

#include <sstream>

#include "exq/error.hpp"
#include "exq/feature_io.hpp"

namespace exq {

std::vector<std::string> ablation_axes() { return {"fusion_variant", "sigma", "output_mode", "loss"}; }

ExperimentManifest apply_axis(const ExperimentManifest& base, const std::string& axis, const std::string& value) {
  ExperimentManifest m = base;
  if (axis == "fusion_variant") {
    m.model.fusion.variant = parse_fusion_variant(value);
  } else if (axis == "sigma") {
    std::size_t used = 0;
    double sigma = 0.0;
    try {
      sigma = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || !(sigma > 0)) throw ConfigError("sigma value '" + value + "' is not a positive number");
    m.model.heatmap_volume.sigma = sigma;
  } else if (axis == "output_mode") {
    m.model.fusion.output_mode = parse_output_mode(value);
  } else if (axis == "loss") {
    m.loss.kind = parse_loss_kind(value);
  } else {
    throw ConfigError("unknown ablation axis '" + axis + "' (expected fusion_variant, sigma, output_mode or loss)");
  }
  return m;
}

std::pair<std::string, std::vector<std::string>> parse_axis_spec(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw ConfigError("axis must look like NAME=V1,V2,... (got '" + spec + "')");
  }
  std::vector<std::string> values;
  std::stringstream ss(spec.substr(eq + 1));
  std::string v;
  while (std::getline(ss, v, ',')) {
    if (v.empty()) throw ConfigError("empty value in axis '" + spec + "'");
    values.push_back(v);
  }
  return {spec.substr(0, eq), values};
}

AblationResult ablate(const ExperimentManifest& base, const std::string& axis, const std::vector<std::string>& values,
                      const std::filesystem::path& out_dir, const LogFn& log) {
  if (values.empty()) throw ConfigError("ablation axis '" + axis + "' has no values");
  AblationResult result{axis, {}};
  for (const auto& v : values) {
    AblationRow row;
    row.value = v;
    try {
      const ExperimentManifest m = apply_axis(base, axis, v);
      if (log) log("ablation " + axis + "=" + v);
      row.report = run_training(m, out_dir / (axis + "_" + v), log).report;
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
      if (log) log("ablation " + axis + "=" + v + " failed: " + row.error);
    }
    result.rows.push_back(std::move(row));
  }
  write_file(out_dir / ("ablation_" + axis + ".csv"), ablation_table(result, base.actions));
  return result;
}

namespace {

std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

std::string ablation_table(const AblationResult& r, const std::vector<std::string>& actions) {
  std::string out = r.axis;
  for (const auto& a : actions) out += "," + a;
  out += ",average,mae,rmse,status\n";
  for (const auto& row : r.rows) {
    out += csv_field(row.value);
    for (const auto& a : actions) {
      std::string cell;
      for (const auto& ar : row.report.actions)
        if (ar.action == a && ar.rho_percent) cell = percent2(*ar.rho_percent);
      out += "," + cell;
    }
    const auto& rep = row.report;
    if (row.ok) {
      out += "," + (rep.average_rho_percent ? percent2(*rep.average_rho_percent) : std::string()) + "," +
             percent2(rep.mae) + "," + percent2(rep.rmse) + ",ok\n";
    } else {
      out += ",,,," + csv_field("failed: " + row.error) + "\n";
    }
  }
  return out;
}

}  // namespace exq
