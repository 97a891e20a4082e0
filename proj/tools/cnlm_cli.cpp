// Command-line front end: single runs, penalty-weight sweeps, side-by-side
// method comparisons, and level-set inspection, all driven by scenario JSON
// files. Artifacts are written under --out-dir and named by the scenario's
// `name` (default: the file stem). Exit codes: 0 success, 2 configuration
// error (bad flags, unreadable/invalid scenario), 1 runtime error.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <cnlm/cnlm.hpp>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  cnlm::Scenario scenario;
  cnlm::DistortionReport distortion;
  cnlm::SwitchingStats stats;
};

RunResult simulate(const cnlm::Scenario& scenario, int fine_samples_per_step) {
  const cnlm::SimulationTrace trace = cnlm::run_simulation(scenario, fine_samples_per_step);
  RunResult r{scenario, cnlm::total_distortion(trace.waveform),
              cnlm::switching_stats(trace.decisions, scenario.converter)};
  return r;
}

void cmd_run(const std::string& path, const fs::path& out_dir, int fine_samples_per_step) {
  const cnlm::Scenario scenario = cnlm::load_scenario(path);
  const cnlm::SimulationTrace trace = cnlm::run_simulation(scenario, fine_samples_per_step);
  const cnlm::SwitchingStats stats = cnlm::switching_stats(trace.decisions, scenario.converter);
  const cnlm::DistortionReport distortion = cnlm::total_distortion(trace.waveform);

  const fs::path waveform_path = out_dir / (scenario.name + "_waveform.csv");
  const fs::path scatter_path = out_dir / (scenario.name + "_scatter.csv");
  const fs::path metrics_path = out_dir / (scenario.name + "_metrics.json");
  cnlm::write_waveform_csv(waveform_path, trace.waveform);
  cnlm::write_scatter_csv(scatter_path, stats, scenario.converter);
  cnlm::write_metrics_json(metrics_path, scenario.name, distortion, stats);

  std::cout << cnlm::metrics_json(scenario.name, distortion, stats).dump(2) << '\n'
            << "wrote " << waveform_path.string() << '\n'
            << "wrote " << scatter_path.string() << '\n'
            << "wrote " << metrics_path.string() << '\n';
}

void cmd_sweep(const std::string& path, const fs::path& out_dir, int fine_samples_per_step,
               const std::vector<double>& alphas, const std::vector<double>& betas, int workers) {
  cnlm::SweepSpec spec;
  spec.base = cnlm::load_scenario(path);
  spec.fine_samples_per_step = fine_samples_per_step;
  if (!alphas.empty()) spec.alpha_values = alphas;
  if (!betas.empty()) spec.beta_values = betas;
  const std::vector<cnlm::SweepCell> cells = cnlm::run_sweep(spec, workers);

  const fs::path sweep_path = out_dir / (spec.base.name + "_sweep.csv");
  cnlm::write_sweep_csv(sweep_path, cells);
  std::cout << "wrote " << sweep_path.string() << " (" << cells.size() << " cells)\n";
}

void cmd_compare(const std::vector<std::string>& paths, const fs::path& out_dir,
                 int fine_samples_per_step) {
  std::vector<cnlm::Scenario> scenarios;
  scenarios.reserve(paths.size());
  for (const std::string& p : paths) scenarios.push_back(cnlm::load_scenario(p));

  // Rows are only comparable against one converter + one reference.
  const cnlm::ConverterConfig& c0 = scenarios.front().converter;
  const cnlm::ReferenceSpec& r0 = scenarios.front().reference;
  for (std::size_t i = 1; i < scenarios.size(); ++i) {
    const cnlm::ConverterConfig& c = scenarios[i].converter;
    const cnlm::ReferenceSpec& r = scenarios[i].reference;
    const bool same_converter = c.voltages == c0.voltages && c.dead_time_s == c0.dead_time_s &&
                                c.control_step_s == c0.control_step_s;
    const bool same_reference = r.kind == r0.kind && r.amplitude_v == r0.amplitude_v &&
                                r.fundamental_hz == r0.fundamental_hz && r.sigma_s == r0.sigma_s &&
                                r.center_s == r0.center_s && r.duration_s == r0.duration_s &&
                                r.file_samples == r0.file_samples;
    if (!same_converter || !same_reference)
      throw cnlm::ConfigError("compare: '" + paths[i] + "' uses a different " +
                              (same_converter ? "reference" : "converter") + " than '" +
                              paths.front() + "'; rows would not be comparable");
  }

  std::vector<cnlm::CompareRow> rows;
  rows.reserve(scenarios.size());
  for (const cnlm::Scenario& sc : scenarios) {
    const RunResult res = simulate(sc, fine_samples_per_step);
    cnlm::CompareRow row;
    row.method = sc.name;
    if (res.stats.min_interval_s) row.min_interval_ns = *res.stats.min_interval_s * 1e9;
    row.avg_rate_khz = res.stats.avg_rate_hz * 1e-3;
    row.total_distortion_pct = res.distortion.total_distortion_pct;
    rows.push_back(row);
  }

  const fs::path json_path = out_dir / "compare.json";
  if (json_path.has_parent_path()) fs::create_directories(json_path.parent_path());
  std::ofstream out(json_path);
  if (!out) throw std::runtime_error("cannot write '" + json_path.string() + "'");
  out << cnlm::compare_json(rows).dump(2) << '\n';

  std::cout << cnlm::compare_table_text(rows) << "wrote " << json_path.string() << '\n';
}

void cmd_levels(const std::string& path) {
  const cnlm::Scenario scenario = cnlm::load_scenario(path);
  const std::vector<double> levels = cnlm::distinct_levels(scenario.converter);
  std::cout << levels.size() << " distinct output levels\n";
  for (double v : levels) std::cout << cnlm::format_double(v) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nearest-level modulation simulator for asymmetric multilevel converters"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_dir = "out";
  int fine_samples_per_step = 10;
  app.add_option("--out-dir", out_dir, "Directory for CSV/JSON artifacts")
      ->capture_default_str();
  app.add_option("--fine-samples-per-step", fine_samples_per_step,
                 "Waveform samples per control step (dead time is resolved on this grid)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::string run_path;
  CLI::App* run = app.add_subcommand(
      "run", "Simulate one scenario; write waveform, switching-scatter, and metrics artifacts");
  run->add_option("scenario", run_path, "Scenario JSON file")->required();

  std::string sweep_path;
  std::vector<double> alphas;
  std::vector<double> betas;
  int workers = 0;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Run a full simulation per (alpha, beta) grid cell; write a long-format CSV");
  sweep->add_option("scenario", sweep_path, "Base scenario JSON file")->required();
  sweep->add_option("--alpha", alphas, "Comma-separated alpha values (default 0,0.01,0.03,0.1,0.3,1)")
      ->delimiter(',');
  sweep->add_option("--beta", betas, "Comma-separated beta values (default 0,0.01,0.02,0.1,0.3,1)")
      ->delimiter(',');
  sweep->add_option("--workers", workers, "Worker threads (default: hardware concurrency)");

  std::vector<std::string> compare_paths;
  CLI::App* compare = app.add_subcommand(
      "compare", "Simulate two or more scenarios sharing a converter and reference; tabulate them");
  compare->add_option("scenarios", compare_paths, "Scenario JSON files")
      ->required()
      ->expected(2, -1);

  std::string levels_path;
  CLI::App* levels = app.add_subcommand(
      "levels", "Print the distinct output voltage levels a scenario's converter can reach");
  levels->add_option("scenario", levels_path, "Scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
        e.get_name() == "CallForVersion")
      return app.exit(e);
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (run->parsed()) cmd_run(run_path, out_dir, fine_samples_per_step);
    if (sweep->parsed()) cmd_sweep(sweep_path, out_dir, fine_samples_per_step, alphas, betas, workers);
    if (compare->parsed()) cmd_compare(compare_paths, out_dir, fine_samples_per_step);
    if (levels->parsed()) cmd_levels(levels_path);
  } catch (const cnlm::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
