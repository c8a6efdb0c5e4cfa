#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "exq/ablate.hpp"
#include "exq/error.hpp"
#include "exq/experiment.hpp"
#include "exq/feature_io.hpp"
#include "exq/gradcheck.hpp"
#include "exq/manifest.hpp"
#include "exq/report.hpp"
#include "exq/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

fs::path output_dir(const std::string& flag, const std::string& verb) {
  if (!flag.empty()) return flag;
  const char* root = std::getenv("EXQ_OUT_ROOT");
  return fs::path(root && *root ? root : "runs") / verb;
}

exq::ExperimentManifest manifest_with_seed(const std::string& path, const std::optional<std::uint64_t>& seed) {
  exq::ExperimentManifest m = exq::load_manifest(path);
  if (seed) m.seed = *seed;
  return m;
}

void log_line(const std::string& s) { std::cerr << s << '\n'; }

void print_summary(const exq::RunReport& r) { std::cout << exq::report_to_table(r); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exq: landmark-heatmap fusion for expression quality assessment"};
  app.require_subcommand(1);

  std::string manifest_path, out_flag, checkpoint_path, axis_spec, format = "structured-text", spec_path, in_path;
  std::optional<std::uint64_t> seed;
  bool quiet = false;

  auto* generate = app.add_subcommand("generate", "Render a synthetic dataset");
  generate->add_option("--spec", spec_path, "Synthetic spec JSON (defaults when omitted)");
  generate->add_option("--seed", seed, "Override the dataset seed");
  generate->add_option("--out", out_flag, "Output directory");

  auto* train = app.add_subcommand("train", "Train per the manifest, then evaluate on its test split");
  train->add_option("--manifest", manifest_path, "Experiment manifest")->required();
  train->add_option("--seed", seed, "Override the manifest seed");
  train->add_option("--out", out_flag, "Output directory");
  train->add_flag("--quiet", quiet, "No per-epoch progress");

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint on the manifest's test split");
  evaluate->add_option("--manifest", manifest_path, "Experiment manifest")->required();
  evaluate->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  evaluate->add_option("--seed", seed, "Override the manifest seed");
  evaluate->add_option("--out", out_flag, "Output directory");
  evaluate->add_option("--format", format, "structured-text or delimited-table");

  auto* ablate = app.add_subcommand("ablate", "Sweep one axis and tabulate the runs");
  ablate->add_option("--manifest", manifest_path, "Base experiment manifest")->required();
  ablate->add_option("--axis", axis_spec, "NAME=V1,V2,... with NAME in fusion_variant, sigma, output_mode, loss")
      ->required();
  ablate->add_option("--seed", seed, "Override the manifest seed");
  ablate->add_option("--out", out_flag, "Output directory");
  ablate->add_flag("--quiet", quiet, "No per-epoch progress");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every backward pass");
  gradcheck->add_option("--seed", seed, "Random seed for the probe tensors");

  auto* report = app.add_subcommand("report", "Re-emit a stored report");
  report->add_option("--in", in_path, "report.json")->required();
  report->add_option("--format", format, "structured-text or delimited-table");
  report->add_option("--out", out_flag, "Output file (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  const exq::LogFn log = quiet ? exq::LogFn{} : exq::LogFn{log_line};
  try {
    if (*generate) {
      exq::SyntheticSpec spec = spec_path.empty() ? exq::SyntheticSpec{} : exq::synthetic_from_json(exq::read_file(spec_path));
      if (seed) spec.seed = *seed;
      const fs::path out = output_dir(out_flag, "dataset");
      const exq::DatasetIndex index = exq::generate_synthetic(spec, out);
      std::cout << "wrote " << index.clips.size() << " clips to " << out.string() << '\n';
    } else if (*train) {
      const exq::ExperimentManifest m = manifest_with_seed(manifest_path, seed);
      const fs::path out = output_dir(out_flag, "train");
      const exq::TrainResult r = exq::run_training(m, out, log);
      print_summary(r.report);
      std::cout << "outputs in " << out.string() << '\n';
    } else if (*evaluate) {
      const exq::ExperimentManifest m = manifest_with_seed(manifest_path, seed);
      const exq::ReportFormat fmt = exq::parse_report_format(format);
      const fs::path out = output_dir(out_flag, "evaluate");
      fs::create_directories(out);
      const exq::ExperimentData data = exq::prepare_data(m, out);
      const exq::RunReport r = exq::evaluate(exq::load_checkpoint(checkpoint_path), m, data, log);
      const fs::path file =
          out / (fmt == exq::ReportFormat::structured_text ? exq::kReportJsonFile : exq::kReportCsvFile);
      exq::emit_report(file, r, fmt);
      print_summary(r);
      std::cout << "report in " << file.string() << '\n';
    } else if (*ablate) {
      const exq::ExperimentManifest m = manifest_with_seed(manifest_path, seed);
      const auto [axis, values] = exq::parse_axis_spec(axis_spec);
      exq::apply_axis(m, axis, values.front());
      const fs::path out = output_dir(out_flag, "ablate");
      fs::create_directories(out);
      const exq::AblationResult r = exq::ablate(m, axis, values, out, log);
      std::cout << exq::ablation_table(r, m.actions);
      std::cout << "table in " << (out / ("ablation_" + axis + ".csv")).string() << '\n';
    } else if (*gradcheck) {
      bool ok = true;
      for (const auto& r : exq::run_gradcheck_suite(seed.value_or(7))) {
        std::printf("%-4s %-28s rel_err %.3e  (tol %.0e)\n", r.pass() ? "ok" : "FAIL", r.name.c_str(), r.error,
                    r.tolerance);
        ok = ok && r.pass();
      }
      return ok ? 0 : 1;
    } else if (*report) {
      const exq::RunReport r = exq::load_report(in_path);
      const std::string text = exq::format_report(r, exq::parse_report_format(format));
      if (out_flag.empty()) {
        std::cout << text;
      } else {
        exq::write_file(out_flag, text);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
