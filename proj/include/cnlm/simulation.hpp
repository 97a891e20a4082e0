#pragma once

#include <cstdint>
#include <vector>

#include "cnlm/deadtime.hpp"
#include "cnlm/metrics.hpp"
#include "cnlm/modulation.hpp"
#include "cnlm/scenario.hpp"
#include "cnlm/signals.hpp"

namespace cnlm {

/// Full result of one scenario run: the per-step decisions, the zero-order-
/// hold reference sequence they tracked, and the dead-time-resolved fine
/// waveform with its load-current trace.
struct SimulationTrace {
  std::vector<StepDecision> decisions;
  std::vector<double> reference_steps;
  FineWaveform waveform;
};

/// Runs a scenario end to end. Each control step samples the reference,
/// freezes the load-current sign at the step boundary (it selects the
/// freewheeling path and feeds the precise spike mode), takes one
/// conditional-NLM decision, and renders the step's fine samples while
/// integrating the load current through them. Fully deterministic: identical
/// inputs produce byte-identical traces.
[[nodiscard]] inline SimulationTrace run_simulation(const Scenario& scenario,
                                                    int fine_samples_per_step = 10) {
  scenario.validate();
  const ConverterConfig& cfg = scenario.converter;
  SimulationTrace trace;
  trace.reference_steps = reference_steps(scenario.reference, cfg.control_step_s);
  const std::size_t n_steps = trace.reference_steps.size();
  trace.decisions.reserve(n_steps);

  const detail::FineGrid grid = detail::make_fine_grid(cfg, fine_samples_per_step);
  trace.waveform.sample_period_s = grid.sample_period_s;
  trace.waveform.samples.reserve(n_steps * static_cast<std::size_t>(fine_samples_per_step));

  ModulatorState state = ModulatorState::fresh(cfg.n_modules());
  double i_a = scenario.load.initial_current_a;
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double ref = trace.reference_steps[k];
    StepDecision decision =
        cnlm_step(state, ref, cfg, scenario.penalty, current_sign(i_a));
    detail::append_step(trace.waveform, grid, static_cast<std::int64_t>(k), decision.chosen,
                        decision.switched_mask, decision.switch_count() > 0, cfg, scenario.load,
                        ref, i_a);
    state = advance(state, decision);
    trace.decisions.push_back(std::move(decision));
  }
  return trace;
}

}  // namespace cnlm
