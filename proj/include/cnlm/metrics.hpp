#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "cnlm/converter.hpp"
#include "cnlm/deadtime.hpp"
#include "cnlm/errors.hpp"
#include "cnlm/modulation.hpp"

namespace cnlm {

/// One switching event: module `module` changed state at control step
/// `step`. The interval since that module's previous event is empty for its
/// first event (there is no previous event to measure from).
struct SwitchingEvent {
  std::int64_t step = 0;
  int module = 0;
  std::optional<std::int64_t> interval_steps;
};

/// Aggregate switching behavior of a decision sequence.
struct SwitchingStats {
  std::vector<SwitchingEvent> events;  ///< chronological; module-ascending within a step
  std::vector<std::int64_t> per_module_events;
  std::vector<double> per_module_rate_hz;
  std::int64_t total_events = 0;
  double duration_s = 0.0;
  double avg_rate_hz = 0.0;  ///< total events across all modules / duration
  std::optional<double> min_interval_s;   ///< none when no module switched twice
  std::optional<double> mean_interval_s;  ///< mean over realized intervals
};

/// Extracts per-module switching events and interval statistics from a
/// decision sequence. The average switching rate is the aggregate event
/// count over all modules divided by the trace duration.
[[nodiscard]] inline SwitchingStats switching_stats(const std::vector<StepDecision>& decisions,
                                                    const ConverterConfig& cfg) {
  const int n = cfg.n_modules();
  SwitchingStats st;
  st.per_module_events.assign(static_cast<std::size_t>(n), 0);
  st.per_module_rate_hz.assign(static_cast<std::size_t>(n), 0.0);
  st.duration_s = static_cast<double>(decisions.size()) * cfg.control_step_s;

  std::vector<std::optional<std::int64_t>> last(static_cast<std::size_t>(n));
  std::int64_t interval_count = 0;
  double interval_sum_steps = 0.0;
  std::optional<std::int64_t> min_steps;
  for (std::size_t k = 0; k < decisions.size(); ++k) {
    const StepDecision& d = decisions[k];
    if (d.chosen.size() != n)
      throw DimensionError("switching_stats: decision " + std::to_string(k) +
                           " does not match the converter");
    for (int m = 0; m < n; ++m) {
      const auto mu = static_cast<std::size_t>(m);
      if (!d.switched_mask[mu]) continue;
      SwitchingEvent ev;
      ev.step = static_cast<std::int64_t>(k);
      ev.module = m;
      if (last[mu]) {
        ev.interval_steps = ev.step - *last[mu];
        ++interval_count;
        interval_sum_steps += static_cast<double>(*ev.interval_steps);
        if (!min_steps || *ev.interval_steps < *min_steps) min_steps = *ev.interval_steps;
      }
      last[mu] = ev.step;
      ++st.per_module_events[mu];
      ++st.total_events;
      st.events.push_back(ev);
    }
  }
  if (st.duration_s > 0.0) {
    st.avg_rate_hz = static_cast<double>(st.total_events) / st.duration_s;
    for (int m = 0; m < n; ++m)
      st.per_module_rate_hz[static_cast<std::size_t>(m)] =
          static_cast<double>(st.per_module_events[static_cast<std::size_t>(m)]) / st.duration_s;
  }
  if (min_steps) st.min_interval_s = static_cast<double>(*min_steps) * cfg.control_step_s;
  if (interval_count > 0)
    st.mean_interval_s = interval_sum_steps / static_cast<double>(interval_count) *
                         cfg.control_step_s;
  return st;
}

/// Relative RMS tracking error of the synthesized waveform.
struct DistortionReport {
  double total_distortion_pct = 0.0;  ///< 100 * rms_error / rms_ref
  double rms_error_v = 0.0;
  double rms_ref_v = 0.0;
};

/// Total distortion over all fine samples, dead-time segments included:
/// 100 * RMS(v_out - v_ref) / RMS(v_ref). The reference must carry energy.
[[nodiscard]] inline DistortionReport total_distortion(const FineWaveform& w) {
  if (w.samples.empty()) throw ConfigError("total_distortion: empty waveform");
  double error_sq = 0.0;
  double ref_sq = 0.0;
  for (const WaveformSample& s : w.samples) {
    const double e = s.v_out_v - s.v_ref_v;
    error_sq += e * e;
    ref_sq += s.v_ref_v * s.v_ref_v;
  }
  const auto count = static_cast<double>(w.samples.size());
  DistortionReport r;
  r.rms_error_v = std::sqrt(error_sq / count);
  r.rms_ref_v = std::sqrt(ref_sq / count);
  if (!(r.rms_ref_v > 0.0))
    throw ConfigError("total_distortion: reference has zero RMS, the ratio is undefined");
  r.total_distortion_pct = 100.0 * r.rms_error_v / r.rms_ref_v;
  return r;
}

/// One spectral line shared by the output and reference spectra.
struct SpectrumBin {
  double frequency_hz = 0.0;
  double output_magnitude = 0.0;
  double reference_magnitude = 0.0;
};

namespace detail {

/// Iterative radix-2 FFT, decimation in time. Length must be a power of two;
/// callers zero-pad. Small and dependency-free — the spectra here are
/// diagnostics, not a performance path.
inline void fft_radix2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> root(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= root;
      }
    }
  }
}

[[nodiscard]] inline std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace detail

/// Hann-windowed amplitude spectra of the output and reference columns, up
/// to the Nyquist frequency of the fine sample rate. Magnitudes are
/// normalized by the window sum (doubled off DC/Nyquist) so a bin-centered
/// sine of amplitude A reads approximately A.
[[nodiscard]] inline std::vector<SpectrumBin> spectrum(const FineWaveform& w) {
  if (w.samples.size() < 2) throw ConfigError("spectrum: need at least two samples");
  if (!(w.sample_period_s > 0.0)) throw ConfigError("spectrum: sample period must be > 0");
  const std::size_t n = w.samples.size();
  const std::size_t padded = detail::next_power_of_two(n);
  std::vector<std::complex<double>> out(padded), ref(padded);
  double window_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double window =
        0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                              static_cast<double>(n - 1)));
    window_sum += window;
    out[i] = w.samples[i].v_out_v * window;
    ref[i] = w.samples[i].v_ref_v * window;
  }
  detail::fft_radix2(out);
  detail::fft_radix2(ref);
  const double fs = 1.0 / w.sample_period_s;
  const std::size_t bins = padded / 2 + 1;
  std::vector<SpectrumBin> spec(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double scale = (b == 0 || b == padded / 2) ? 1.0 / window_sum : 2.0 / window_sum;
    spec[b].frequency_hz = static_cast<double>(b) * fs / static_cast<double>(padded);
    spec[b].output_magnitude = std::abs(out[b]) * scale;
    spec[b].reference_magnitude = std::abs(ref[b]) * scale;
  }
  return spec;
}

}  // namespace cnlm
