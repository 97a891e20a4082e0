#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "cnlm/errors.hpp"
#include "cnlm/metrics.hpp"
#include "cnlm/scenario.hpp"
#include "cnlm/simulation.hpp"

namespace cnlm {

/// Grid exploration over the two penalty weights on a fixed base scenario.
struct SweepSpec {
  std::vector<double> alpha_values{0.0, 0.01, 0.03, 0.1, 0.3, 1.0};
  std::vector<double> beta_values{0.0, 0.01, 0.02, 0.1, 0.3, 1.0};
  Scenario base;
  int fine_samples_per_step = 10;
};

/// Metrics of one grid cell.
struct SweepCell {
  double alpha = 0.0;
  double beta = 0.0;
  DistortionReport distortion;
  SwitchingStats stats;
};

/// Runs one full simulation per (alpha, beta) pair. Results come back in
/// alpha-major order — cell index = alpha_index * n_beta + beta_index — and
/// are identical for every worker count: cells are pure and write only their
/// own slot, so scheduling cannot reorder arithmetic. workers <= 0 uses the
/// hardware concurrency. Per-cell failures are reported with the cell's
/// coordinates attached.
[[nodiscard]] inline std::vector<SweepCell> run_sweep(const SweepSpec& spec, int workers = 0) {
  if (spec.alpha_values.empty() || spec.beta_values.empty())
    throw ConfigError("sweep: alpha and beta grids must be non-empty");
  spec.base.validate();
  const std::size_t n_alpha = spec.alpha_values.size();
  const std::size_t n_beta = spec.beta_values.size();
  const std::size_t n_cells = n_alpha * n_beta;
  std::vector<SweepCell> cells(n_cells);
  std::vector<std::string> errors(n_cells);

  int n_workers = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  if (n_workers < 1) n_workers = 1;
  if (static_cast<std::size_t>(n_workers) > n_cells) n_workers = static_cast<int>(n_cells);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t c = next.fetch_add(1); c < n_cells; c = next.fetch_add(1)) {
      const std::size_t ia = c / n_beta;
      const std::size_t ib = c % n_beta;
      SweepCell& cell = cells[c];
      cell.alpha = spec.alpha_values[ia];
      cell.beta = spec.beta_values[ib];
      try {
        Scenario scenario = spec.base;
        scenario.penalty.alpha = {cell.alpha};
        scenario.penalty.beta = cell.beta;
        const SimulationTrace trace = run_simulation(scenario, spec.fine_samples_per_step);
        cell.stats = switching_stats(trace.decisions, scenario.converter);
        cell.distortion = total_distortion(trace.waveform);
      } catch (const std::exception& e) {
        errors[c] = e.what();
      }
    }
  };

  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  for (std::size_t c = 0; c < n_cells; ++c) {
    if (!errors[c].empty())
      throw std::runtime_error("sweep cell (alpha=" + std::to_string(cells[c].alpha) +
                               ", beta=" + std::to_string(cells[c].beta) + "): " + errors[c]);
  }
  return cells;
}

}  // namespace cnlm
