#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cnlm/errors.hpp"

namespace cnlm {

/// Supported reference shapes. The Gaussian polyphasic pulse — a sinusoid
/// under a Gaussian envelope — sweeps the full modulation-index range in one
/// shot and is the benchmark signal for every bundled scenario.
enum class ReferenceKind { gaussian_polyphasic, sine, constant, file };

/// Reference-signal description. For the Gaussian kind the duration must
/// cover at least six standard deviations so the pulse is fully contained
/// (envelope tails below 1.2% of peak at the edges).
struct ReferenceSpec {
  ReferenceKind kind = ReferenceKind::gaussian_polyphasic;
  double amplitude_v = 300.0;
  double fundamental_hz = 10e3;
  double sigma_s = 80e-6;
  double center_s = 300e-6;
  double duration_s = 600e-6;
  std::vector<std::pair<double, double>> file_samples;  ///< (t_s, v_V), kind=file only
  std::string file_path;                                ///< provenance for error messages

  void validate() const {
    if (!(duration_s > 0.0)) throw ConfigError("reference: duration must be > 0");
    switch (kind) {
      case ReferenceKind::gaussian_polyphasic:
        if (!(fundamental_hz > 0.0)) throw ConfigError("reference: fundamental_hz must be > 0");
        if (!(sigma_s > 0.0)) throw ConfigError("reference: sigma_s must be > 0");
        if (duration_s < 6.0 * sigma_s)
          throw ConfigError("reference: duration must span at least 6 sigma "
                            "so the Gaussian pulse is fully contained");
        break;
      case ReferenceKind::sine:
        if (!(fundamental_hz > 0.0)) throw ConfigError("reference: fundamental_hz must be > 0");
        break;
      case ReferenceKind::constant:
        break;
      case ReferenceKind::file:
        if (file_samples.empty())
          throw ConfigError("reference: file kind has no samples loaded (" + file_path + ")");
        if (!std::is_sorted(file_samples.begin(), file_samples.end(),
                            [](const auto& a, const auto& b) { return a.first < b.first; }))
          throw ConfigError("reference: file samples must be sorted by time (" + file_path + ")");
        break;
    }
  }
};

/// Reference voltage at time t within [0, duration].
[[nodiscard]] inline double sample_reference(const ReferenceSpec& spec, double t_s) {
  if (t_s < 0.0 || t_s > spec.duration_s)
    throw ConfigError("reference: t = " + std::to_string(t_s) +
                      " s is outside [0, " + std::to_string(spec.duration_s) + "]");
  switch (spec.kind) {
    case ReferenceKind::gaussian_polyphasic: {
      const double tau = t_s - spec.center_s;
      const double envelope = std::exp(-(tau * tau) / (2.0 * spec.sigma_s * spec.sigma_s));
      return spec.amplitude_v *
             std::sin(2.0 * std::numbers::pi * spec.fundamental_hz * tau) * envelope;
    }
    case ReferenceKind::sine:
      return spec.amplitude_v * std::sin(2.0 * std::numbers::pi * spec.fundamental_hz * t_s);
    case ReferenceKind::constant:
      return spec.amplitude_v;
    case ReferenceKind::file: {
      // Nearest-sample lookup on the sorted (t, v) table.
      const auto it = std::lower_bound(
          spec.file_samples.begin(), spec.file_samples.end(), t_s,
          [](const auto& sample, double t) { return sample.first < t; });
      if (it == spec.file_samples.begin()) return it->second;
      if (it == spec.file_samples.end()) return std::prev(it)->second;
      return (it->first - t_s < t_s - std::prev(it)->first) ? it->second : std::prev(it)->second;
    }
  }
  throw ConfigError("reference: unknown kind");
}

/// Number of whole control steps that fit into the reference duration. The
/// tiny slack absorbs the floating-point error of the quotient when the
/// duration is an exact multiple of the step.
[[nodiscard]] inline std::int64_t step_count(double duration_s, double control_step_s) {
  if (!(control_step_s > 0.0)) throw ConfigError("step_count: control_step must be > 0");
  return static_cast<std::int64_t>(std::floor(duration_s / control_step_s + 1e-9));
}

/// Reference sampled once per control step (at each step's start instant),
/// the zero-order-hold sequence the modulator tracks.
[[nodiscard]] inline std::vector<double> reference_steps(const ReferenceSpec& spec,
                                                         double control_step_s) {
  spec.validate();
  const std::int64_t n = step_count(spec.duration_s, control_step_s);
  std::vector<double> refs;
  refs.reserve(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k < n; ++k)
    refs.push_back(sample_reference(spec, static_cast<double>(k) * control_step_s));
  return refs;
}

/// Reads a two-column `t_s,v_V` CSV (header optional) for the file kind.
[[nodiscard]] inline std::vector<std::pair<double, double>> load_reference_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("reference: cannot open file '" + path + "'");
  std::vector<std::pair<double, double>> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string t_text, v_text;
    if (!std::getline(fields, t_text, ',') || !std::getline(fields, v_text)) {
      throw ConfigError("reference: '" + path + "' line " + std::to_string(line_no) +
                        ": expected two comma-separated columns");
    }
    try {
      samples.emplace_back(std::stod(t_text), std::stod(v_text));
    } catch (const std::exception&) {
      if (line_no == 1) continue;  // header row
      throw ConfigError("reference: '" + path + "' line " + std::to_string(line_no) +
                        ": not numeric");
    }
  }
  if (samples.empty()) throw ConfigError("reference: '" + path + "' contains no samples");
  std::sort(samples.begin(), samples.end());
  return samples;
}

}  // namespace cnlm
