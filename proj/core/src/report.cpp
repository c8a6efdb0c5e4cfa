#include "exq/report.hpp"

#include <cstdio>

#include "config_json.hpp"
#include "exq/error.hpp"
#include "exq/feature_io.hpp"
#include "exq/metrics.hpp"

namespace exq {

RunReport summarize(const std::vector<ClipPrediction>& predictions, const std::vector<std::string>& actions) {
  RunReport r;
  r.predictions = predictions;
  std::vector<double> all_p, all_y;
  double rho_sum = 0.0;
  std::size_t rho_n = 0;
  for (const auto& action : actions) {
    ActionResult a;
    a.action = action;
    std::vector<double> p, y;
    for (const auto& c : predictions) {
      if (c.action != action) continue;
      p.push_back(c.prediction);
      y.push_back(c.label);
    }
    a.count = p.size();
    if (p.empty()) {
      a.error = "no test clips";
    } else {
      a.mae = mae(p, y);
      a.rmse = rmse(p, y);
      try {
        a.rho_percent = 100.0 * spearman_rho(p, y);
        rho_sum += *a.rho_percent;
        ++rho_n;
      } catch (const UndefinedCorrelation& e) {
        a.error = e.what();
      }
    }
    all_p.insert(all_p.end(), p.begin(), p.end());
    all_y.insert(all_y.end(), y.begin(), y.end());
    r.actions.push_back(std::move(a));
  }
  if (rho_n > 0) r.average_rho_percent = rho_sum / static_cast<double>(rho_n);
  if (!all_p.empty()) {
    r.mae = mae(all_p, all_y);
    r.rmse = rmse(all_p, all_y);
  }
  return r;
}

ReportFormat parse_report_format(const std::string& s) {
  if (s == "structured-text" || s == "json") return ReportFormat::structured_text;
  if (s == "delimited-table" || s == "csv") return ReportFormat::delimited_table;
  throw ConfigError("unknown report format '" + s + "' (expected structured-text or delimited-table)");
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

std::string report_to_text(const RunReport& r) {
  json actions = json::array();
  for (const auto& a : r.actions) {
    actions.push_back({{"action", a.action},
                       {"rho_percent", opt(a.rho_percent)},
                       {"error", a.error},
                       {"mae", a.mae},
                       {"rmse", a.rmse},
                       {"count", a.count}});
  }
  json curves = json::array();
  for (const auto& c : r.loss_curves) curves.push_back({{"model", c.model}, {"epoch_loss", c.epoch_loss}});
  json preds = json::array();
  for (const auto& p : r.predictions) {
    preds.push_back({{"id", p.id}, {"action", p.action}, {"label", p.label}, {"prediction", p.prediction}});
  }
  json doc{{"actions", std::move(actions)},
           {"average_rho_percent", opt(r.average_rho_percent)},
           {"mae", r.mae},
           {"rmse", r.rmse},
           {"loss_curves", std::move(curves)},
           {"config", r.config.empty() ? json(nullptr) : parse_json(r.config, "report config")},
           {"seed", r.seed},
           {"predictions", std::move(preds)}};
  if (r.wall_clock_seconds) doc["wall_clock_seconds"] = *r.wall_clock_seconds;
  return doc.dump(2) + "\n";
}

RunReport report_from_text(const std::string& text, const std::string& source) {
  const json j = parse_json(text, source);
  RunReport r;
  try {
    for (const auto& a : j.at("actions")) {
      ActionResult ar;
      ar.action = a.at("action").get<std::string>();
      ar.rho_percent = read_opt(a, "rho_percent");
      ar.error = a.value("error", std::string());
      ar.mae = a.at("mae").get<double>();
      ar.rmse = a.at("rmse").get<double>();
      ar.count = a.at("count").get<std::size_t>();
      r.actions.push_back(std::move(ar));
    }
    r.average_rho_percent = read_opt(j, "average_rho_percent");
    r.mae = j.at("mae").get<double>();
    r.rmse = j.at("rmse").get<double>();
    for (const auto& c : j.at("loss_curves")) {
      r.loss_curves.push_back({c.at("model").get<std::string>(), c.at("epoch_loss").get<std::vector<double>>()});
    }
    if (!j.at("config").is_null()) r.config = j.at("config").dump();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.wall_clock_seconds = read_opt(j, "wall_clock_seconds");
    for (const auto& p : j.at("predictions")) {
      r.predictions.push_back({p.at("id").get<std::string>(), p.at("action").get<std::string>(),
                               p.at("label").get<double>(), p.at("prediction").get<double>()});
    }
  } catch (const json::exception& e) {
    throw FormatError(source + ": " + e.what());
  }
  return r;
}

std::string percent2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string report_to_table(const RunReport& r) {
  std::string out = "action,rho_percent,mae,rmse,count\n";
  std::size_t total = 0;
  for (const auto& a : r.actions) {
    out += a.action + "," + (a.rho_percent ? percent2(*a.rho_percent) : std::string("undefined")) + "," +
           percent2(a.mae) + "," + percent2(a.rmse) + "," + std::to_string(a.count) + "\n";
    total += a.count;
  }
  out += "average," + (r.average_rho_percent ? percent2(*r.average_rho_percent) : std::string("undefined")) + "," +
         percent2(r.mae) + "," + percent2(r.rmse) + "," + std::to_string(total) + "\n";
  return out;
}

std::string format_report(const RunReport& r, ReportFormat f) {
  return f == ReportFormat::structured_text ? report_to_text(r) : report_to_table(r);
}

void emit_report(const std::filesystem::path& path, const RunReport& r, ReportFormat f) {
  write_file(path, format_report(r, f));
}

RunReport load_report(const std::filesystem::path& path) { return report_from_text(read_file(path), path.string()); }

}  // namespace exq
