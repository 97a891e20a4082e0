#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cnlm/converter.hpp"
#include "cnlm/errors.hpp"

namespace cnlm {

/// How the dead-time spike term is evaluated inside the modulation objective.
enum class QMode {
  simplified,  ///< sum of switching-module voltages (current-sign agnostic)
  precise,     ///< |predicted dead-time deviation| using the live current sign
};

/// Weights and shape parameters of the conditional-NLM objective
///   objective = error_term + alpha * stress_term + beta * spike_term.
///
/// Field names mirror the scenario-file schema one-to-one (see README).
/// `alpha` holds one entry for a uniform weight or n_modules entries for
/// per-module weights. Units are deliberately exposed: the error term is in
/// volts^o_norm, the stress term in steps^-p, the spike term in volts, so
/// alpha and beta carry the conversion into a common score.
struct PenaltyConfig {
  std::vector<double> alpha{0.0};  ///< switching-stress weight(s); size 1 or N
  double beta = 0.0;               ///< dead-time spike weight
  int o_norm = 1;                  ///< error norm order: 1 = |e|, 2 = e^2, ...
  double p_exponent = 1.0;         ///< stress curve (1/interval)^p; floor variant ignores it
  QMode q_mode = QMode::simplified;
  std::optional<std::int64_t> min_interval_steps;  ///< hard interval floor, control steps

  [[nodiscard]] bool uniform_alpha() const { return alpha.size() == 1; }

  void validate(int n_modules) const {
    if (alpha.empty() ||
        (alpha.size() != 1 && alpha.size() != static_cast<std::size_t>(n_modules)))
      throw ConfigError("penalty: alpha must be a single weight or one weight per module (" +
                        std::to_string(n_modules) + ")");
    for (double a : alpha)
      if (!(a >= 0.0)) throw ConfigError("penalty: alpha weights must be >= 0");
    if (!(beta >= 0.0)) throw ConfigError("penalty: beta must be >= 0");
    if (o_norm < 1) throw ConfigError("penalty: o_norm must be >= 1");
    if (!(p_exponent > 0.0)) throw ConfigError("penalty: p_exponent must be > 0");
    if (min_interval_steps && *min_interval_steps < 0)
      throw ConfigError("penalty: min_interval_steps must be >= 0");
  }
};

/// Register file the modulator carries between control steps: the previously
/// commanded state plus, per module, the step index of its last switching
/// event (empty optional = has never switched).
struct ModulatorState {
  std::int64_t step = 0;  ///< index k of the decision about to be made
  SwitchVector prev;      ///< state commanded at step k-1
  std::vector<std::optional<std::int64_t>> last_switch;

  /// All-zero previous state, no switching history, step 0.
  [[nodiscard]] static ModulatorState fresh(int n_modules) {
    ModulatorState st;
    st.prev.states.assign(static_cast<std::size_t>(n_modules), 0);
    st.last_switch.assign(static_cast<std::size_t>(n_modules), std::nullopt);
    return st;
  }

  [[nodiscard]] int n_modules() const { return prev.size(); }
};

/// Everything decided at one control step, with the objective decomposition
/// kept for observability. stress_term stores the *unweighted* aggregate so
/// traces can be inspected independently of the configured weights; the
/// weighted recombination rule is documented at cnlm_step.
struct StepDecision {
  SwitchVector chosen;
  std::vector<bool> switched_mask;  ///< per module: chosen differs from prev
  double error_term = 0.0;          ///< |v_ref - output|^o_norm, volts^o_norm
  double stress_term = 0.0;         ///< unweighted switching-interval stress, steps^-p
  double spike_term = 0.0;          ///< dead-time spike magnitude term, volts
  double objective = 0.0;           ///< weighted total exactly as minimized

  [[nodiscard]] int switch_count() const {
    int c = 0;
    for (bool b : switched_mask) c += b ? 1 : 0;
    return c;
  }

  [[nodiscard]] bool operator==(const StepDecision&) const = default;
};

/// Steps elapsed since module n last switched, as of the decision at
/// state.step. Returns +infinity while the module has never switched, which
/// makes every 1/interval stress contribution vanish; integer values are
/// exact in the double return type.
[[nodiscard]] inline double switching_interval(const ModulatorState& state, int n) {
  if (n < 0 || n >= state.n_modules())
    throw DimensionError("switching_interval: module index " + std::to_string(n) +
                         " out of range for " + std::to_string(state.n_modules()) + " modules");
  const auto& last = state.last_switch[static_cast<std::size_t>(n)];
  if (!last) return std::numeric_limits<double>::infinity();
  return static_cast<double>(state.step - *last);
}

namespace detail {

/// |error|^o_norm computed by repeated multiplication so results are
/// bit-reproducible across platforms (std::pow is not pinned for integer
/// exponents).
[[nodiscard]] inline double integer_norm(double error, int o_norm) {
  const double magnitude = std::abs(error);
  if (o_norm == 1) return magnitude;
  double acc = magnitude;
  for (int i = 1; i < o_norm; ++i) acc *= magnitude;
  return acc;
}

/// Stress contribution of ONE module that switches this step, given its
/// interval in steps. Basic form: (1/interval)^p. Floor form: 1/(interval - M)
/// with +infinity at or below the floor — the infinity survives any weight
/// (see apply_weight) so floored candidates are rejected outright.
/// A never-switched module (interval = +inf) contributes 0 in both forms.
[[nodiscard]] inline double stress_kernel(double interval_steps, const PenaltyConfig& penalty) {
  if (penalty.min_interval_steps) {
    const double margin = interval_steps - static_cast<double>(*penalty.min_interval_steps);
    if (!(margin > 0.0)) return std::numeric_limits<double>::infinity();
    return 1.0 / margin;  // interval = +inf gives margin = +inf gives 0
  }
  if (std::isinf(interval_steps)) return 0.0;
  const double inv = 1.0 / interval_steps;
  return penalty.p_exponent == 1.0 ? inv : std::pow(inv, penalty.p_exponent);
}

/// Weighted penalty with two deliberate conventions: an infinite penalty is
/// a hard constraint and stays infinite under ANY weight (including 0), and
/// a zero weight contributes exactly 0 for finite values so that disabled
/// terms cannot perturb the objective.
[[nodiscard]] inline double apply_weight(double weight, double value) {
  if (std::isinf(value)) return value;
  return weight > 0.0 ? weight * value : 0.0;
}

/// Full objective decomposition of one candidate state against the current
/// register file. Shared by the optimizer, the decision describer, and the
/// test oracles so all of them evaluate the identical arithmetic.
struct CandidateScore {
  double error = 0.0;       ///< |v_ref - output|^o_norm
  double stress = 0.0;      ///< unweighted aggregate stress (may be +inf)
  double spike = 0.0;       ///< spike term per configured q_mode
  double spike_simplified = 0.0;  ///< always the simplified form, for tie-breaking
  double objective = 0.0;   ///< error + weighted stress + weighted spike
  int switch_count = 0;
};

[[nodiscard]] inline CandidateScore score_candidate(const SwitchVector& candidate,
                                                    const ModulatorState& state, double v_ref_v,
                                                    const ConverterConfig& cfg,
                                                    const PenaltyConfig& penalty,
                                                    int current_sign) {
  const int n = cfg.n_modules();
  CandidateScore sc;
  double output = 0.0;
  double stress_weighted = 0.0;  // per-module alpha only
  double deviation = 0.0;        // predicted dead-time deviation, precise mode
  for (int m = 0; m < n; ++m) {
    const auto mu = static_cast<std::size_t>(m);
    const double v = cfg.voltages[mu];
    const int digit = candidate.states[mu];
    output += v * digit;
    if (digit == state.prev.states[mu]) continue;
    ++sc.switch_count;
    const double kernel = stress_kernel(switching_interval(state, m), penalty);
    sc.stress += kernel;
    if (!penalty.uniform_alpha()) stress_weighted += apply_weight(penalty.alpha[mu], kernel);
    sc.spike_simplified += v;
    deviation += v * (digit + current_sign);
  }
  sc.error = integer_norm(v_ref_v - output, penalty.o_norm);
  sc.spike = penalty.q_mode == QMode::simplified ? sc.spike_simplified : std::abs(deviation);
  // Uniform alpha is applied once to the aggregated stress so that the
  // objective arithmetic is reproducible term by term; the per-module path
  // already folded each weight in, and apply_weight keeps any infinite
  // kernel infinite there.
  if (penalty.uniform_alpha()) stress_weighted = apply_weight(penalty.alpha.front(), sc.stress);
  sc.objective = sc.error + stress_weighted + apply_weight(penalty.beta, sc.spike);
  return sc;
}

/// Strict-improvement candidate ordering, evaluated in canonical state order:
/// lower objective, then fewer switching modules, then smaller simplified
/// spike term; equal on all three keeps the earlier canonical index.
[[nodiscard]] inline bool improves(const CandidateScore& challenger,
                                   const CandidateScore& incumbent) {
  if (challenger.objective != incumbent.objective)
    return challenger.objective < incumbent.objective;
  if (challenger.switch_count != incumbent.switch_count)
    return challenger.switch_count < incumbent.switch_count;
  return challenger.spike_simplified < incumbent.spike_simplified;
}

inline void check_step_inputs(const ModulatorState& state, const ConverterConfig& cfg,
                              const PenaltyConfig& penalty) {
  cfg.validate();
  penalty.validate(cfg.n_modules());
  if (state.prev.size() != cfg.n_modules() ||
      static_cast<int>(state.last_switch.size()) != cfg.n_modules())
    throw DimensionError("modulation step: state dimensions do not match the converter");
}

[[nodiscard]] inline StepDecision describe(const SwitchVector& chosen, const CandidateScore& sc,
                                           const ModulatorState& state) {
  StepDecision d;
  d.chosen = chosen;
  d.switched_mask.resize(chosen.states.size());
  for (std::size_t m = 0; m < chosen.states.size(); ++m)
    d.switched_mask[m] = chosen.states[m] != state.prev.states[m];
  d.error_term = sc.error;
  d.stress_term = sc.stress;
  d.spike_term = sc.spike;
  d.objective = sc.objective;
  return d;
}

}  // namespace detail

/// Error term of one candidate: |v_ref - output_voltage|^o_norm.
[[nodiscard]] inline double tracking_error(const SwitchVector& candidate, double v_ref_v,
                                           const ConverterConfig& cfg,
                                           const PenaltyConfig& penalty) {
  return detail::integer_norm(v_ref_v - output_voltage(candidate, cfg), penalty.o_norm);
}

/// Unweighted switching-interval stress of one candidate: the sum of
/// stress_kernel over modules that would switch. Non-switching modules
/// contribute 0 in every variant; +infinity marks a floor rejection.
[[nodiscard]] inline double switching_stress(const SwitchVector& candidate,
                                             const ModulatorState& state,
                                             const PenaltyConfig& penalty) {
  if (candidate.size() != state.n_modules())
    throw DimensionError("switching_stress: candidate length does not match state");
  double total = 0.0;
  for (int m = 0; m < state.n_modules(); ++m) {
    const auto mu = static_cast<std::size_t>(m);
    if (candidate.states[mu] == state.prev.states[mu]) continue;
    total += detail::stress_kernel(switching_interval(state, m), penalty);
  }
  return total;
}

/// Dead-time spike term of one candidate. Simplified mode sums the voltages
/// of switching modules; precise mode evaluates |predicted dead-time
/// deviation| for the given current sign (see deadtime.hpp for the waveform
/// counterpart this predicts).
[[nodiscard]] inline double spike_penalty(const SwitchVector& candidate,
                                          const ModulatorState& state,
                                          const ConverterConfig& cfg,
                                          const PenaltyConfig& penalty, int current_sign = 0) {
  if (candidate.size() != state.n_modules() || candidate.size() != cfg.n_modules())
    throw DimensionError("spike_penalty: dimension mismatch");
  double simplified = 0.0;
  double deviation = 0.0;
  for (int m = 0; m < state.n_modules(); ++m) {
    const auto mu = static_cast<std::size_t>(m);
    if (candidate.states[mu] == state.prev.states[mu]) continue;
    simplified += cfg.voltages[mu];
    deviation += cfg.voltages[mu] * (candidate.states[mu] + current_sign);
  }
  return penalty.q_mode == QMode::simplified ? simplified : std::abs(deviation);
}

/// One conditional-NLM control step: evaluates the penalized objective over
/// all 3^N candidate states and returns the minimizer.
///
/// Objective arithmetic, exactly as evaluated (and recomputable from the
/// returned terms plus the configuration):
///   uniform alpha:    objective = error + alpha * stress_term + beta * spike_term
///   per-module alpha: objective = error + sum_n alpha_n * stress_n + beta * spike_term
/// where a zero weight contributes exactly 0 and an infinite stress (hard
/// interval floor) rejects the candidate regardless of weights. Holding the
/// previous state has zero stress and zero spike, so a finite-objective
/// candidate always exists and the result is never infinite.
///
/// Ties break toward fewer switching modules, then a smaller simplified
/// spike term, then the earlier canonical state index. current_sign is the
/// sign of the load current at the step boundary; it only matters in
/// precise spike mode.
[[nodiscard]] inline StepDecision cnlm_step(const ModulatorState& state, double v_ref_v,
                                            const ConverterConfig& cfg,
                                            const PenaltyConfig& penalty, int current_sign = 0) {
  detail::check_step_inputs(state, cfg, penalty);
  const int n = cfg.n_modules();
  const std::int64_t count = state_count(n);
  const int sign = (current_sign > 0) - (current_sign < 0);

  SwitchVector scratch;
  scratch.states.resize(static_cast<std::size_t>(n));
  std::int64_t best_index = -1;
  detail::CandidateScore best;
  for (std::int64_t c = 0; c < count; ++c) {
    std::int64_t q = c;
    for (int m = 0; m < n; ++m) {
      scratch.states[static_cast<std::size_t>(m)] = static_cast<std::int8_t>(q % 3 - 1);
      q /= 3;
    }
    const detail::CandidateScore sc =
        detail::score_candidate(scratch, state, v_ref_v, cfg, penalty, sign);
    if (best_index < 0 || detail::improves(sc, best)) {
      best_index = c;
      best = sc;
    }
  }
  return detail::describe(state_at(best_index, n), best, state);
}

/// One plain nearest-level step: the switch state whose output voltage is
/// closest to the reference, with the same tie-breaking as cnlm_step. This
/// is implemented as an independent scan (not a cnlm_step call) so the
/// zero-weight reduction identity is a genuine cross-check between the two
/// code paths; the returned decision carries the default penalty
/// decomposition (o_norm 1, unit stress exponent, simplified spike).
[[nodiscard]] inline StepDecision nlm_step(const ModulatorState& state, double v_ref_v,
                                           const ConverterConfig& cfg) {
  static const PenaltyConfig kPlain{};
  detail::check_step_inputs(state, cfg, kPlain);
  const int n = cfg.n_modules();
  const std::int64_t count = state_count(n);

  std::int64_t best_index = -1;
  double best_error = 0.0;
  int best_switches = 0;
  double best_spike = 0.0;
  for (std::int64_t c = 0; c < count; ++c) {
    double output = 0.0;
    int switches = 0;
    double spike = 0.0;
    std::int64_t q = c;
    for (int m = 0; m < n; ++m) {
      const auto mu = static_cast<std::size_t>(m);
      const int digit = static_cast<int>(q % 3) - 1;
      q /= 3;
      output += cfg.voltages[mu] * digit;
      if (digit != state.prev.states[mu]) {
        ++switches;
        spike += cfg.voltages[mu];
      }
    }
    const double error = std::abs(v_ref_v - output);
    const bool better = best_index < 0 || error < best_error ||
                        (error == best_error &&
                         (switches < best_switches ||
                          (switches == best_switches && spike < best_spike)));
    if (better) {
      best_index = c;
      best_error = error;
      best_switches = switches;
      best_spike = spike;
    }
  }
  const SwitchVector chosen = state_at(best_index, n);
  return detail::describe(chosen,
                          detail::score_candidate(chosen, state, v_ref_v, cfg, kPlain, 0), state);
}

/// Register-file update after a decision: the step counter advances, the
/// chosen state becomes the new previous state, and every module that
/// switched records the old step index as its last switching event.
[[nodiscard]] inline ModulatorState advance(const ModulatorState& state,
                                            const StepDecision& decision) {
  if (decision.chosen.size() != state.n_modules())
    throw DimensionError("advance: decision does not match state dimensions");
  ModulatorState next = state;
  next.step = state.step + 1;
  next.prev = decision.chosen;
  for (int m = 0; m < state.n_modules(); ++m) {
    if (decision.switched_mask[static_cast<std::size_t>(m)])
      next.last_switch[static_cast<std::size_t>(m)] = state.step;
  }
  return next;
}

}  // namespace cnlm
