#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cnlm/errors.hpp"

namespace cnlm {

/// Hard cap on the module count for exhaustive 3^N state enumeration.
/// 3^12 = 531 441 candidates keeps a single modulation step well under a
/// millisecond on desk hardware; raise only with a matching budget review.
inline constexpr int kMaxEnumerationModules = 12;

/// Per-module drive command: each element commands one bridge cell to emit
/// -V_n, 0, or +V_n volts.
struct SwitchVector {
  std::vector<std::int8_t> states;

  SwitchVector() = default;
  explicit SwitchVector(std::vector<std::int8_t> s) : states(std::move(s)) {}

  [[nodiscard]] int size() const { return static_cast<int>(states.size()); }
  [[nodiscard]] bool operator==(const SwitchVector&) const = default;
};

/// True when every element is a legal drive command in {-1, 0, +1}.
[[nodiscard]] inline bool is_valid(const SwitchVector& s) {
  return std::all_of(s.states.begin(), s.states.end(),
                     [](std::int8_t v) { return v >= -1 && v <= 1; });
}

/// Static description of a series-stacked multilevel converter: one voltage
/// per module plus the two switching time constants.
struct ConverterConfig {
  std::vector<double> voltages;      ///< module voltages V_n > 0, volts
  double dead_time_s = 100e-9;       ///< both-switches-off window per transition
  double control_step_s = 200e-9;    ///< length of one discrete control step

  [[nodiscard]] int n_modules() const { return static_cast<int>(voltages.size()); }

  /// Sum of all module voltages: the converter's peak output magnitude.
  [[nodiscard]] double voltage_span() const {
    double sum = 0.0;
    for (double v : voltages) sum += v;
    return sum;
  }

  /// True when at least two module voltages differ; all-equal converters are
  /// symmetric and reach only 2N+1 distinct levels.
  [[nodiscard]] bool is_asymmetric() const {
    return std::any_of(voltages.begin(), voltages.end(),
                       [&](double v) { return v != voltages.front(); });
  }

  /// Throws ConfigError on any violated invariant. A dead time of exactly 0
  /// is allowed as the degenerate "ideal switches" case.
  void validate() const {
    if (voltages.empty()) throw ConfigError("converter: at least one module voltage is required");
    for (std::size_t n = 0; n < voltages.size(); ++n) {
      if (!(voltages[n] > 0.0))
        throw ConfigError("converter: voltages[" + std::to_string(n) + "] must be > 0");
    }
    if (!(control_step_s > 0.0)) throw ConfigError("converter: control_step must be > 0");
    if (dead_time_s < 0.0) throw ConfigError("converter: dead_time must be >= 0");
    if (!(dead_time_s < control_step_s))
      throw ConfigError("converter: dead_time must be shorter than one control step");
    if (n_modules() > kMaxEnumerationModules)
      throw ConfigError("converter: module count " + std::to_string(n_modules()) +
                        " exceeds the enumeration cap of " +
                        std::to_string(kMaxEnumerationModules));
  }
};

/// Number of switch states for n modules: 3^n.
[[nodiscard]] constexpr std::int64_t state_count(int n) {
  std::int64_t c = 1;
  for (int i = 0; i < n; ++i) c *= 3;
  return c;
}

namespace detail {

inline void check_enumeration_cap(int n) {
  if (n < 1) throw CapacityError("state enumeration requires at least 1 module");
  if (n > kMaxEnumerationModules)
    throw CapacityError("state enumeration for " + std::to_string(n) +
                        " modules exceeds the cap of " +
                        std::to_string(kMaxEnumerationModules) + " (3^n states)");
}

}  // namespace detail

/// Drive command of one module within canonical state `index`.
///
/// Canonical order is ternary counting with module 0 as the least-significant
/// digit and digit values -1, 0, +1: index 0 is all-(-1), the last index is
/// all-(+1), and the all-zero state sits exactly in the middle. Deterministic
/// tie-breaking elsewhere depends on this order.
[[nodiscard]] constexpr int state_digit(std::int64_t index, int module) {
  std::int64_t q = index;
  for (int m = 0; m < module; ++m) q /= 3;
  return static_cast<int>(q % 3) - 1;
}

/// Canonical state number `index` materialized as a SwitchVector.
[[nodiscard]] inline SwitchVector state_at(std::int64_t index, int n) {
  SwitchVector s;
  s.states.resize(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) s.states[static_cast<std::size_t>(m)] =
      static_cast<std::int8_t>(state_digit(index, m));
  return s;
}

/// All 3^n switch states exactly once, in canonical order.
[[nodiscard]] inline std::vector<SwitchVector> enumerate_states(int n) {
  detail::check_enumeration_cap(n);
  const std::int64_t count = state_count(n);
  std::vector<SwitchVector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t c = 0; c < count; ++c) out.push_back(state_at(c, n));
  return out;
}

/// Converter output for one switch state: the dot product of module voltages
/// and drive commands. Always within [-voltage_span, +voltage_span].
[[nodiscard]] inline double output_voltage(const SwitchVector& s, const ConverterConfig& cfg) {
  if (s.size() != cfg.n_modules())
    throw DimensionError("output_voltage: switch vector has " + std::to_string(s.size()) +
                         " entries for a " + std::to_string(cfg.n_modules()) +
                         "-module converter");
  double sum = 0.0;
  for (int n = 0; n < cfg.n_modules(); ++n)
    sum += cfg.voltages[static_cast<std::size_t>(n)] * s.states[static_cast<std::size_t>(n)];
  return sum;
}

/// Sorted, deduplicated list of output voltages reachable by some switch
/// state. Sums closer than 1e-9 relative to the voltage span merge into one
/// level: level identity is a set property, not a physics property.
[[nodiscard]] inline std::vector<double> distinct_levels(const ConverterConfig& cfg) {
  detail::check_enumeration_cap(cfg.n_modules());
  const int n = cfg.n_modules();
  const std::int64_t count = state_count(n);
  std::vector<double> sums;
  sums.reserve(static_cast<std::size_t>(count));
  for (std::int64_t c = 0; c < count; ++c) {
    double sum = 0.0;
    for (int m = 0; m < n; ++m)
      sum += cfg.voltages[static_cast<std::size_t>(m)] * state_digit(c, m);
    sums.push_back(sum);
  }
  std::sort(sums.begin(), sums.end());
  const double merge_below = 1e-9 * cfg.voltage_span();
  std::vector<double> levels;
  for (double v : sums) {
    if (levels.empty() || std::abs(v - levels.back()) > merge_below) levels.push_back(v);
  }
  return levels;
}

/// Geometric voltage ladder [base, base*ratio, ..., base*ratio^(n-1)].
/// With round_to_volt set, each rung is rounded to the nearest whole volt,
/// which is how integer-valued hardware ladders are usually specified.
[[nodiscard]] inline std::vector<double> geometric_profile(double base, double ratio, int n,
                                                           bool round_to_volt = false) {
  if (!(base > 0.0)) throw ConfigError("geometric_profile: base voltage must be > 0");
  if (!(ratio > 1.0)) throw ConfigError("geometric_profile: ratio must be > 1");
  if (n < 1) throw ConfigError("geometric_profile: module count must be >= 1");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  double v = base;
  for (int i = 0; i < n; ++i) {
    out.push_back(round_to_volt ? std::round(v) : v);
    v *= ratio;
  }
  return out;
}

}  // namespace cnlm
