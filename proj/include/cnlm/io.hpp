#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "cnlm/deadtime.hpp"
#include "cnlm/errors.hpp"
#include "cnlm/metrics.hpp"
#include "cnlm/sweep.hpp"

namespace cnlm {

/// Shortest round-trip decimal rendering of a double. Deterministic across
/// runs, which keeps every artifact byte-stable.
[[nodiscard]] inline std::string format_double(double v) {
  char buf[32];
  const std::to_chars_result res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

namespace detail {

[[nodiscard]] inline std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace detail

/// Fine waveform as CSV: `t_s,v_out_V,v_ref_V,i_A`, one row per sample.
inline void write_waveform_csv(const std::filesystem::path& path, const FineWaveform& w) {
  std::ofstream out = detail::open_for_write(path);
  out << "t_s,v_out_V,v_ref_V,i_A\n";
  for (const WaveformSample& s : w.samples) {
    out << format_double(s.t_s) << ',' << format_double(s.v_out_v) << ','
        << format_double(s.v_ref_v) << ',' << format_double(s.i_a) << '\n';
  }
}

/// Switching scatter as CSV: `t_s,interval_s,module`, one row per switching
/// event that has an interval (a module's first event has no previous event
/// to measure from and is omitted; it still counts toward rates). Module
/// indices are 0-based.
inline void write_scatter_csv(const std::filesystem::path& path, const SwitchingStats& stats,
                              const ConverterConfig& cfg) {
  std::ofstream out = detail::open_for_write(path);
  out << "t_s,interval_s,module\n";
  for (const SwitchingEvent& ev : stats.events) {
    if (!ev.interval_steps) continue;
    out << format_double(static_cast<double>(ev.step) * cfg.control_step_s) << ','
        << format_double(static_cast<double>(*ev.interval_steps) * cfg.control_step_s) << ','
        << ev.module << '\n';
  }
}

/// Metrics summary as ordered JSON. Interval keys are null when no module
/// switched twice (no realized interval exists).
[[nodiscard]] inline nlohmann::ordered_json metrics_json(const std::string& name,
                                                         const DistortionReport& distortion,
                                                         const SwitchingStats& stats) {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["total_distortion_pct"] = distortion.total_distortion_pct;
  j["avg_switching_rate_hz"] = stats.avg_rate_hz;
  if (stats.min_interval_s) j["min_switching_interval_ns"] = *stats.min_interval_s * 1e9;
  else j["min_switching_interval_ns"] = nullptr;
  if (stats.mean_interval_s) j["mean_switching_interval_ns"] = *stats.mean_interval_s * 1e9;
  else j["mean_switching_interval_ns"] = nullptr;
  j["per_module_events"] = stats.per_module_events;
  j["total_events"] = stats.total_events;
  j["rms_error_V"] = distortion.rms_error_v;
  j["rms_ref_V"] = distortion.rms_ref_v;
  j["duration_s"] = stats.duration_s;
  return j;
}

inline void write_metrics_json(const std::filesystem::path& path, const std::string& name,
                               const DistortionReport& distortion, const SwitchingStats& stats) {
  std::ofstream out = detail::open_for_write(path);
  out << metrics_json(name, distortion, stats).dump(2) << '\n';
}

/// Sweep grid as long-format CSV with the pinned header. Cells where no
/// module switched twice leave the interval fields empty.
inline void write_sweep_csv(const std::filesystem::path& path,
                            const std::vector<SweepCell>& cells) {
  std::ofstream out = detail::open_for_write(path);
  out << "alpha,beta,total_distortion_pct,avg_rate_hz,min_interval_ns,mean_interval_ns\n";
  for (const SweepCell& c : cells) {
    out << format_double(c.alpha) << ',' << format_double(c.beta) << ','
        << format_double(c.distortion.total_distortion_pct) << ','
        << format_double(c.stats.avg_rate_hz) << ',';
    if (c.stats.min_interval_s) out << format_double(*c.stats.min_interval_s * 1e9);
    out << ',';
    if (c.stats.mean_interval_s) out << format_double(*c.stats.mean_interval_s * 1e9);
    out << '\n';
  }
}

/// One row of the modulation-method comparison.
struct CompareRow {
  std::string method;
  std::optional<double> min_interval_ns;
  double avg_rate_khz = 0.0;
  double total_distortion_pct = 0.0;
};

/// Fixed-width text rendering of the comparison table. Numbers are shown at
/// presentation precision; compare_json carries the full-precision values.
[[nodiscard]] inline std::string compare_table_text(const std::vector<CompareRow>& rows) {
  const auto fixed = [](double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return std::string(buf);
  };
  const auto pad_left = [](const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
  };
  std::size_t method_width = std::string("Method").size();
  for (const CompareRow& r : rows) method_width = std::max(method_width, r.method.size());
  std::string text = "Method";
  text.append(method_width - 6, ' ');
  text += "  Min interval (ns)  Avg rate (kHz)  Total distortion (%)\n";
  for (const CompareRow& r : rows) {
    std::string line = r.method;
    line.append(method_width - r.method.size(), ' ');
    line += "  " + pad_left(r.min_interval_ns ? fixed(*r.min_interval_ns, 1) : "none", 17);
    line += "  " + pad_left(fixed(r.avg_rate_khz, 1), 14);
    line += "  " + pad_left(fixed(r.total_distortion_pct, 2), 20);
    line += '\n';
    text += line;
  }
  return text;
}

[[nodiscard]] inline nlohmann::ordered_json compare_json(const std::vector<CompareRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const CompareRow& r : rows) {
    nlohmann::ordered_json j;
    j["method"] = r.method;
    if (r.min_interval_ns) j["min_interval_ns"] = *r.min_interval_ns;
    else j["min_interval_ns"] = nullptr;
    j["avg_rate_khz"] = r.avg_rate_khz;
    j["total_distortion_pct"] = r.total_distortion_pct;
    arr.push_back(j);
  }
  return arr;
}

/// Spectrum as CSV: `frequency_hz,output_magnitude,reference_magnitude`.
inline void write_spectrum_csv(const std::filesystem::path& path,
                               const std::vector<SpectrumBin>& bins) {
  std::ofstream out = detail::open_for_write(path);
  out << "frequency_hz,output_magnitude,reference_magnitude\n";
  for (const SpectrumBin& b : bins) {
    out << format_double(b.frequency_hz) << ',' << format_double(b.output_magnitude) << ','
        << format_double(b.reference_magnitude) << '\n';
  }
}

}  // namespace cnlm
