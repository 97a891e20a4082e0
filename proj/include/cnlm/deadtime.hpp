#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cnlm/converter.hpp"
#include "cnlm/errors.hpp"
#include "cnlm/modulation.hpp"

namespace cnlm {

/// Series R-L load hanging off the converter output; the inductor current's
/// sign selects the freewheeling path during dead time.
struct LoadModel {
  double inductance_h = 14e-6;
  double series_resistance_ohm = 0.0;
  double initial_current_a = 0.0;

  void validate() const {
    if (!(inductance_h > 0.0)) throw ConfigError("load: inductance must be > 0");
    if (series_resistance_ohm < 0.0) throw ConfigError("load: series_resistance must be >= 0");
  }
};

/// One fine-grained sample of the synthesized run. `i_a` is the load current
/// at the sample instant, before the sample's voltage acts on it.
struct WaveformSample {
  double t_s = 0.0;
  double v_out_v = 0.0;
  double v_ref_v = 0.0;
  double i_a = 0.0;
};

/// Uniformly sampled output waveform with dead-time segments resolved.
struct FineWaveform {
  double sample_period_s = 0.0;  ///< control_step / samples_per_step
  std::vector<WaveformSample> samples;
};

/// Sign of the load current with the open-circuit convention: exactly zero
/// current means no diode conducts and a switching module floats at 0 V.
[[nodiscard]] inline int current_sign(double i_a) { return (i_a > 0.0) - (i_a < 0.0); }

namespace detail {

/// Converter output while the dead-time window is active: modules flagged in
/// `switched` freewheel at -V_n * sign(i); the rest emit their commanded
/// level. With no switching modules this degenerates to the commanded sum.
[[nodiscard]] inline double deadtime_sum(const SwitchVector& chosen,
                                         const std::vector<bool>& switched,
                                         const ConverterConfig& cfg, int sign) {
  double sum = 0.0;
  for (int m = 0; m < cfg.n_modules(); ++m) {
    const auto mu = static_cast<std::size_t>(m);
    sum += switched[mu] ? -cfg.voltages[mu] * sign
                        : cfg.voltages[mu] * chosen.states[mu];
  }
  return sum;
}

[[nodiscard]] inline std::vector<bool> switch_mask(const SwitchVector& prev,
                                                   const SwitchVector& chosen) {
  if (prev.size() != chosen.size())
    throw DimensionError("dead time: previous and chosen states differ in length");
  std::vector<bool> mask(prev.states.size());
  for (std::size_t m = 0; m < mask.size(); ++m) mask[m] = prev.states[m] != chosen.states[m];
  return mask;
}

}  // namespace detail

/// Total converter output during the dead-time window of one transition.
[[nodiscard]] inline double deadtime_voltage(const SwitchVector& prev, const SwitchVector& chosen,
                                             const ConverterConfig& cfg, int sign_of_current) {
  if (chosen.size() != cfg.n_modules())
    throw DimensionError("deadtime_voltage: state length does not match converter");
  const int sign = (sign_of_current > 0) - (sign_of_current < 0);
  return detail::deadtime_sum(chosen, detail::switch_mask(prev, chosen), cfg, sign);
}

/// Voltage deviation caused by the dead-time window: the commanded output
/// minus the freewheeling output. Only switching modules deviate; each
/// contributes V_n * (commanded state + current sign). This equals
/// output_voltage(chosen) - deadtime_voltage(prev, chosen) for all inputs —
/// an identity the test suite checks exhaustively.
[[nodiscard]] inline double deadtime_deviation(const SwitchVector& prev,
                                               const SwitchVector& chosen,
                                               const ConverterConfig& cfg, int sign_of_current) {
  if (chosen.size() != cfg.n_modules())
    throw DimensionError("deadtime_deviation: state length does not match converter");
  if (prev.size() != chosen.size())
    throw DimensionError("deadtime_deviation: previous and chosen states differ in length");
  const int sign = (sign_of_current > 0) - (sign_of_current < 0);
  double deviation = 0.0;
  for (int m = 0; m < cfg.n_modules(); ++m) {
    const auto mu = static_cast<std::size_t>(m);
    if (prev.states[mu] == chosen.states[mu]) continue;
    deviation += cfg.voltages[mu] * (chosen.states[mu] + sign);
  }
  return deviation;
}

/// Explicit-Euler load-current update over one sample period. Fixed and
/// documented so traces are bit-reproducible: i' = i + dt * (v - R*i) / L.
[[nodiscard]] inline double integrate_current(const LoadModel& load, double v_applied_v,
                                              double dt_s, double i_a) {
  if (!(dt_s > 0.0)) throw ConfigError("integrate_current: dt must be > 0");
  return i_a + dt_s * (v_applied_v - load.series_resistance_ohm * i_a) / load.inductance_h;
}

namespace detail {

/// Timing grid shared by the one-shot synthesizer and the interleaved
/// simulation loop.
struct FineGrid {
  double sample_period_s = 0.0;
  int samples_per_step = 0;
  int dead_samples = 0;  ///< dead_time snapped to whole fine samples
};

[[nodiscard]] inline FineGrid make_fine_grid(const ConverterConfig& cfg, int samples_per_step) {
  if (samples_per_step < 1)
    throw ConfigError("waveform synthesis: samples_per_step must be >= 1");
  FineGrid grid;
  grid.samples_per_step = samples_per_step;
  grid.sample_period_s = cfg.control_step_s / samples_per_step;
  grid.dead_samples =
      static_cast<int>(std::llround(cfg.dead_time_s / grid.sample_period_s));
  return grid;
}

/// Appends the fine samples of one control step and integrates the load
/// current through them. `i_a` carries the running current; its value on
/// entry is the step-boundary current whose sign froze the freewheel path.
inline void append_step(FineWaveform& w, const FineGrid& grid, std::int64_t step,
                        const SwitchVector& chosen, const std::vector<bool>& switched,
                        bool any_switch, const ConverterConfig& cfg, const LoadModel& load,
                        double v_ref_v, double& i_a) {
  const double commanded = output_voltage(chosen, cfg);
  const int sign = current_sign(i_a);
  const double dead_v =
      any_switch ? deadtime_sum(chosen, switched, cfg, sign) : commanded;
  for (int j = 0; j < grid.samples_per_step; ++j) {
    const double v = (any_switch && j < grid.dead_samples) ? dead_v : commanded;
    const double t = (static_cast<double>(step) * grid.samples_per_step + j) *
                     grid.sample_period_s;
    w.samples.push_back({t, v, v_ref_v, i_a});
    i_a = integrate_current(load, v, grid.sample_period_s, i_a);
  }
}

}  // namespace detail

/// Renders a decision sequence into the fine-grained output waveform. Each
/// control step holds the commanded level except that, when any module
/// switches, the leading dead-time window (snapped to whole fine samples)
/// emits the freewheeling voltage with the current sign frozen at the step
/// boundary. The current is integrated at sample resolution from the voltage
/// actually applied. `refs` supplies the per-step reference, held constant
/// across the step's samples.
[[nodiscard]] inline FineWaveform synthesize_waveform(const std::vector<StepDecision>& decisions,
                                                      const ConverterConfig& cfg,
                                                      const LoadModel& load,
                                                      const std::vector<double>& refs,
                                                      int samples_per_step = 10) {
  cfg.validate();
  load.validate();
  if (refs.size() != decisions.size())
    throw DimensionError("synthesize_waveform: one reference value per decision is required");
  const detail::FineGrid grid = detail::make_fine_grid(cfg, samples_per_step);
  FineWaveform w;
  w.sample_period_s = grid.sample_period_s;
  w.samples.reserve(decisions.size() * static_cast<std::size_t>(samples_per_step));
  double i_a = load.initial_current_a;
  for (std::size_t k = 0; k < decisions.size(); ++k) {
    const StepDecision& d = decisions[k];
    if (d.chosen.size() != cfg.n_modules())
      throw DimensionError("synthesize_waveform: decision " + std::to_string(k) +
                           " does not match the converter");
    detail::append_step(w, grid, static_cast<std::int64_t>(k), d.chosen, d.switched_mask,
                        d.switch_count() > 0, cfg, load, refs[k], i_a);
  }
  return w;
}

}  // namespace cnlm
