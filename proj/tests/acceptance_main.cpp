// Acceptance gate: one binary, one line per criterion, exit code = number of
// failed criteria. Each check is self-contained and states its evidence on
// failure; tolerances are part of the printed label where they matter.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <cnlm/cnlm.hpp>

namespace {

using namespace cnlm;
namespace fs = std::filesystem;

const fs::path kScenarioDir = CNLM_SCENARIO_DIR;

struct Gate {
  int failures = 0;

  void run(int number, const std::string& label,
           const std::function<bool(std::vector<std::string>&)>& body) {
    std::vector<std::string> details;
    bool pass = false;
    const auto start = std::chrono::steady_clock::now();
    try {
      pass = body(details);
    } catch (const std::exception& e) {
      details.push_back(std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char timing[32];
    std::snprintf(timing, sizeof(timing), "%.2f s", seconds);
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << number << ": " << label
              << " (" << timing << ")\n";
    for (const std::string& d : details) std::cout << "         " << d << '\n';
    if (!pass) ++failures;
  }
};

ConverterConfig default_converter() {
  ConverterConfig cfg;
  cfg.voltages = {37.0, 55.0, 83.0, 125.0};
  cfg.dead_time_s = 100e-9;
  cfg.control_step_s = 200e-9;
  return cfg;
}

// Mirrors the objective's published weighting rule for the oracle: a zero
// weight contributes exactly zero, an infinite term survives any weight.
double weigh(double weight, double value) {
  if (std::isinf(value)) return value;
  return weight > 0.0 ? weight * value : 0.0;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Criterion 1: exhaustive-scan oracle equivalence on randomized instances.
// ---------------------------------------------------------------------------
bool criterion_oracle(std::vector<std::string>& details) {
  const ConverterConfig cfg = default_converter();
  std::mt19937_64 rng(0x5eed0001);
  std::uniform_int_distribution<int> state_index(0, 80);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> age(1, 60);
  std::uniform_int_distribution<int> sign_pick(-1, 1);
  std::uniform_int_distribution<int> percent(0, 99);
  std::uniform_int_distribution<std::int64_t> floor_steps(1, 50);
  std::uniform_real_distribution<double> v_ref_dist(-320.0, 320.0);
  std::uniform_real_distribution<double> weight_dist(0.0, 1.0);

  const auto start = std::chrono::steady_clock::now();
  constexpr int kInstances = 10000;
  for (int i = 0; i < kInstances; ++i) {
    ModulatorState st = ModulatorState::fresh(4);
    st.step = 1000;
    st.prev = state_at(state_index(rng), 4);
    for (int m = 0; m < 4; ++m)
      if (coin(rng)) st.last_switch[static_cast<std::size_t>(m)] = st.step - age(rng);

    PenaltyConfig penalty;
    penalty.alpha = {weight_dist(rng)};
    penalty.beta = weight_dist(rng);
    penalty.q_mode = coin(rng) ? QMode::precise : QMode::simplified;
    if (percent(rng) < 25) penalty.o_norm = 2;
    if (percent(rng) < 25) penalty.min_interval_steps = floor_steps(rng);
    const int sign = sign_pick(rng);
    const double v_ref = v_ref_dist(rng);

    const StepDecision decision = cnlm_step(st, v_ref, cfg, penalty, sign);

    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t c = 0; c < 81; ++c) {
      const SwitchVector candidate = state_at(c, 4);
      const double objective = tracking_error(candidate, v_ref, cfg, penalty) +
                               weigh(penalty.alpha.front(),
                                     switching_stress(candidate, st, penalty)) +
                               weigh(penalty.beta,
                                     spike_penalty(candidate, st, cfg, penalty, sign));
      best = std::min(best, objective);
    }
    if (decision.objective != best) {
      details.push_back("instance " + std::to_string(i) + ": cnlm_step objective " +
                        fmt(decision.objective) + " != oracle minimum " + fmt(best));
      return false;
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (seconds >= 10.0) {
    details.push_back("runtime " + fmt(seconds) + " s exceeds the 10 s budget");
    return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 2: reduction identities.
// ---------------------------------------------------------------------------
bool criterion_reductions(std::vector<std::string>& details) {
  // (a) With both weights at zero the conditional path must reproduce the
  // plain nearest-level path bitwise on the full default scenario.
  const Scenario sc = load_scenario(kScenarioDir / "nlm_default.json");
  const SimulationTrace trace = run_simulation(sc);
  ModulatorState st = ModulatorState::fresh(sc.converter.n_modules());
  for (std::size_t k = 0; k < trace.decisions.size(); ++k) {
    const StepDecision plain = nlm_step(st, trace.reference_steps[k], sc.converter);
    if (!(plain == trace.decisions[k])) {
      details.push_back("zero-weight trace diverges from nearest-level at step " +
                        std::to_string(k));
      return false;
    }
    st = advance(st, plain);
  }

  // (b) A symmetric ladder must quantize to scaled round-and-clamp.
  ConverterConfig sym;
  sym.voltages = {75.0, 75.0, 75.0, 75.0};
  const std::vector<double> refs = reference_steps(sc.reference, sym.control_step_s);
  ModulatorState st2 = ModulatorState::fresh(4);
  for (std::size_t k = 0; k < refs.size(); ++k) {
    const StepDecision d = nlm_step(st2, refs[k], sym);
    const double expected = 75.0 * std::round(std::clamp(refs[k] / 75.0, -4.0, 4.0));
    if (output_voltage(d.chosen, sym) != expected) {
      details.push_back("symmetric ladder step " + std::to_string(k) + ": output " +
                        fmt(output_voltage(d.chosen, sym)) + " != " + fmt(expected) +
                        " for reference " + fmt(refs[k]));
      return false;
    }
    st2 = advance(st2, d);
  }
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 3: dead-time deviation identity over every transition.
// ---------------------------------------------------------------------------
bool criterion_deadtime_identity(std::vector<std::string>& details) {
  const ConverterConfig cfg = default_converter();
  for (std::int64_t p = 0; p < 81; ++p) {
    const SwitchVector prev = state_at(p, 4);
    for (std::int64_t c = 0; c < 81; ++c) {
      const SwitchVector chosen = state_at(c, 4);
      const double commanded = output_voltage(chosen, cfg);
      for (int sign : {-1, 0, 1}) {
        const double lhs = commanded - deadtime_voltage(prev, chosen, cfg, sign);
        const double rhs = deadtime_deviation(prev, chosen, cfg, sign);
        if (lhs != rhs) {
          details.push_back("prev index " + std::to_string(p) + ", chosen index " +
                            std::to_string(c) + ", sign " + std::to_string(sign) + ": " +
                            fmt(lhs) + " != " + fmt(rhs));
          return false;
        }
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 4: the 20 us hard floor, verified from the scatter CSV itself.
// ---------------------------------------------------------------------------
bool criterion_hard_floor(std::vector<std::string>& details) {
  Scenario sc = load_scenario(kScenarioDir / "nlm_default.json");
  sc.penalty.min_interval_steps =
      static_cast<std::int64_t>(std::ceil(20e-6 / sc.converter.control_step_s - 1e-9));
  const SimulationTrace trace = run_simulation(sc);
  const SwitchingStats stats = switching_stats(trace.decisions, sc.converter);

  const fs::path csv = fs::temp_directory_path() / "cnlm_acceptance_scatter.csv";
  write_scatter_csv(csv, stats, sc.converter);
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  std::size_t rows = 0;
  bool ok = true;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string t_field, interval_field;
    std::getline(ss, t_field, ',');
    std::getline(ss, interval_field, ',');
    const double interval_s = std::stod(interval_field);
    ++rows;
    if (!(interval_s > 20000e-9)) {
      details.push_back("interval " + fmt(interval_s * 1e9) + " ns at t=" + t_field +
                        " violates the 20000 ns floor");
      ok = false;
    }
  }
  fs::remove(csv);
  if (rows == 0) {
    details.push_back("scatter CSV contains no realized intervals to check");
    return false;
  }
  details.push_back(std::to_string(rows) + " realized intervals, minimum " +
                    fmt(*stats.min_interval_s * 1e9) + " ns");
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 5: comparison trends between the bundled policies.
// ---------------------------------------------------------------------------
bool criterion_comparison(std::vector<std::string>& details) {
  const auto start = std::chrono::steady_clock::now();
  struct Row {
    std::string name;
    double control_step_s = 0.0;
    DistortionReport distortion;
    SwitchingStats stats;
  };
  std::vector<Row> rows;
  for (const char* file :
       {"nlm_default.json", "cnlm_rate_weighted.json", "cnlm_spike_weighted.json"}) {
    const Scenario sc = load_scenario(kScenarioDir / file);
    const SimulationTrace trace = run_simulation(sc);
    rows.push_back({sc.name, sc.converter.control_step_s, total_distortion(trace.waveform),
                    switching_stats(trace.decisions, sc.converter)});
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const Row& nlm = rows[0];
  const Row& rate_weighted = rows[1];
  const Row& spike_weighted = rows[2];
  for (const Row& row : rows)
    details.push_back(row.name + ": distortion " + fmt(row.distortion.total_distortion_pct) +
                      " %, avg rate " + fmt(row.stats.avg_rate_hz / 1e3) + " kHz");

  bool ok = true;
  if (!(nlm.distortion.total_distortion_pct > rate_weighted.distortion.total_distortion_pct)) {
    details.push_back("distortion ordering violated against the rate-weighted policy");
    ok = false;
  }
  if (!(nlm.distortion.total_distortion_pct > spike_weighted.distortion.total_distortion_pct)) {
    details.push_back("distortion ordering violated against the spike-weighted policy");
    ok = false;
  }
  const double ratio = spike_weighted.stats.avg_rate_hz / nlm.stats.avg_rate_hz;
  details.push_back("rate ratio spike-weighted/plain = " + fmt(ratio) + " (must be < 0.25)");
  if (!(ratio < 0.25)) ok = false;
  if (!nlm.stats.min_interval_s || *nlm.stats.min_interval_s != nlm.control_step_s) {
    details.push_back("plain policy minimum interval is not exactly one control step");
    ok = false;
  }
  if (seconds >= 30.0) {
    details.push_back("runtime " + fmt(seconds) + " s exceeds the 30 s budget");
    ok = false;
  }
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 6: sweep trends on the default six-by-six grid.
// ---------------------------------------------------------------------------
std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

bool criterion_sweep_trends(std::vector<std::string>& details) {
  SweepSpec spec;
  spec.base = load_scenario(kScenarioDir / "nlm_default.json");
  const auto start = std::chrono::steady_clock::now();
  const std::vector<SweepCell> cells = run_sweep(spec, 4);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::size_t na = spec.alpha_values.size();
  const std::size_t nb = spec.beta_values.size();
  bool monotone_ok = true;
  for (std::size_t bi = 0; bi < nb; ++bi) {
    std::vector<double> means;
    for (std::size_t ai = 0; ai < na; ++ai) {
      const SweepCell& cell = cells[ai * nb + bi];
      if (cell.stats.mean_interval_s) means.push_back(*cell.stats.mean_interval_s);
    }
    const std::string col = "beta=" + fmt(spec.beta_values[bi]);
    if (means.size() != na) {
      details.push_back(col + ": only " + std::to_string(means.size()) + " of " +
                        std::to_string(na) + " cells realize a mean interval; no ranking");
      monotone_ok = false;
      continue;
    }
    const std::size_t distinct = std::set<double>(means.begin(), means.end()).size();
    const std::optional<double> rho = spearman(spec.alpha_values, means);
    if (!rho) {
      details.push_back(col + ": Spearman undefined (all " + std::to_string(na) +
                        " mean intervals equal)");
      monotone_ok = false;
    } else {
      details.push_back(col + ": Spearman rho=" + fmt(*rho) + " (" + std::to_string(distinct) +
                        " distinct mean intervals)" + (*rho >= 0.9 ? "" : " < 0.9"));
      if (!(*rho >= 0.9)) monotone_ok = false;
    }
  }

  bool interior_ok = false;
  for (std::size_t ai = 0; ai < na; ++ai) {
    std::size_t best = 0;
    for (std::size_t bi = 1; bi < nb; ++bi)
      if (cells[ai * nb + bi].distortion.total_distortion_pct <
          cells[ai * nb + best].distortion.total_distortion_pct)
        best = bi;
    if (best != 0 && best != nb - 1) {
      details.push_back("alpha=" + fmt(spec.alpha_values[ai]) + ": distortion minimum at beta=" +
                        fmt(spec.beta_values[best]) + " (interior)");
      interior_ok = true;
    }
  }
  if (!interior_ok)
    details.push_back("no alpha row has an interior distortion minimum over beta");

  bool ok = monotone_ok && interior_ok;
  if (seconds >= 60.0) {
    details.push_back("runtime " + fmt(seconds) + " s exceeds the 60 s budget");
    ok = false;
  }
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 7: module invariants as compact property suites.
// ---------------------------------------------------------------------------
Scenario short_scenario() {
  Scenario sc;
  sc.name = "short";
  sc.converter = default_converter();
  sc.reference.kind = ReferenceKind::gaussian_polyphasic;
  sc.reference.amplitude_v = 300.0;
  sc.reference.fundamental_hz = 10e3;
  sc.reference.sigma_s = 10e-6;
  sc.reference.center_s = 40e-6;
  sc.reference.duration_s = 80e-6;
  return sc;
}

bool criterion_properties(std::vector<std::string>& details) {
  bool all_ok = true;
  const auto prop = [&](const std::string& name, const std::function<bool()>& fn) {
    bool ok = false;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      details.push_back(name + ": exception: " + e.what());
      all_ok = false;
      return;
    }
    if (!ok) {
      details.push_back(name + ": violated");
      all_ok = false;
    }
  };

  const ConverterConfig cfg = default_converter();
  std::mt19937_64 rng(0x5eed0007);
  std::uniform_int_distribution<int> state_index(0, 80);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> age(1, 60);
  std::uniform_int_distribution<int> percent(0, 99);
  std::uniform_int_distribution<std::int64_t> floor_steps(1, 50);
  std::uniform_real_distribution<double> v_ref_dist(-320.0, 320.0);
  std::uniform_real_distribution<double> weight_dist(0.0, 1.0);

  const auto random_state = [&] {
    ModulatorState st = ModulatorState::fresh(4);
    st.step = 1000;
    st.prev = state_at(state_index(rng), 4);
    for (int m = 0; m < 4; ++m)
      if (coin(rng)) st.last_switch[static_cast<std::size_t>(m)] = st.step - age(rng);
    return st;
  };
  const auto random_penalty = [&] {
    PenaltyConfig penalty;
    penalty.alpha = {weight_dist(rng)};
    penalty.beta = weight_dist(rng);
    penalty.q_mode = coin(rng) ? QMode::precise : QMode::simplified;
    if (percent(rng) < 30) penalty.min_interval_steps = floor_steps(rng);
    return penalty;
  };

  prop("state-space bounds: every enumerated state is valid and within the span", [&] {
    const double span = cfg.voltage_span();
    for (const SwitchVector& s : enumerate_states(4)) {
      if (!is_valid(s)) return false;
      if (std::abs(output_voltage(s, cfg)) > span) return false;
    }
    return true;
  });

  prop("hold feasibility: the objective is finite under any weights or floor", [&] {
    for (int i = 0; i < 300; ++i) {
      const ModulatorState st = random_state();
      const PenaltyConfig penalty = random_penalty();
      const StepDecision d =
          cnlm_step(st, v_ref_dist(rng), cfg, penalty, coin(rng) ? 1 : -1);
      if (!std::isfinite(d.objective) || !is_valid(d.chosen)) return false;
    }
    return true;
  });

  prop("scale invariance: power-of-two voltage scaling preserves decisions at alpha=0", [&] {
    for (int i = 0; i < 300; ++i) {
      const ModulatorState st = random_state();
      PenaltyConfig penalty = random_penalty();
      penalty.alpha = {0.0};
      const double v_ref = v_ref_dist(rng);
      const StepDecision base = cnlm_step(st, v_ref, cfg, penalty, 1);
      for (const double c : {0.5, 2.0, 8.0}) {
        ConverterConfig scaled = cfg;
        for (double& v : scaled.voltages) v *= c;
        const StepDecision d = cnlm_step(st, v_ref * c, scaled, penalty, 1);
        if (!(d.chosen == base.chosen)) return false;
      }
    }
    return true;
  });

  prop("sweep determinism: any worker count yields identical cells", [&] {
    SweepSpec spec;
    spec.alpha_values = {0.0, 0.3};
    spec.beta_values = {0.0, 0.1};
    spec.base = short_scenario();
    const std::vector<SweepCell> ref = run_sweep(spec, 1);
    for (const int workers : {2, 5}) {
      const std::vector<SweepCell> got = run_sweep(spec, workers);
      if (got.size() != ref.size()) return false;
      for (std::size_t i = 0; i < ref.size(); ++i) {
        if (got[i].distortion.total_distortion_pct != ref[i].distortion.total_distortion_pct)
          return false;
        if (got[i].stats.total_events != ref[i].stats.total_events) return false;
        if (got[i].stats.min_interval_s != ref[i].stats.min_interval_s) return false;
      }
    }
    return true;
  });

  prop("floor strictness: a 50-step floor keeps every realized interval above it", [&] {
    Scenario sc = short_scenario();
    sc.penalty.min_interval_steps = 50;
    const SimulationTrace trace = run_simulation(sc);
    const SwitchingStats stats = switching_stats(trace.decisions, sc.converter);
    for (const SwitchingEvent& e : stats.events)
      if (e.interval_steps && *e.interval_steps <= 50) return false;
    return true;
  });

  prop("waveform bounds: synthesized output never exceeds the converter span", [&] {
    Scenario sc = short_scenario();
    sc.penalty.alpha = {0.01};
    sc.penalty.beta = 0.3;
    const SimulationTrace trace = run_simulation(sc);
    const double span = sc.converter.voltage_span();
    for (const WaveformSample& s : trace.waveform.samples)
      if (std::abs(s.v_out_v) > span) return false;
    return true;
  });

  return all_ok;
}

}  // namespace

int main() {
  std::cout << "acceptance gate: conditional nearest-level modulation library\n";
  Gate gate;
  gate.run(1, "objective equals the exhaustive oracle on 10000 random instances", criterion_oracle);
  gate.run(2, "zero-weight and symmetric-ladder reduction identities", criterion_reductions);
  gate.run(3, "dead-time deviation identity over all 81x81x3 transitions", criterion_deadtime_identity);
  gate.run(4, "20 us interval floor holds in the switching scatter", criterion_hard_floor);
  gate.run(5, "policy comparison trends (distortion, rate ratio, min interval)", criterion_comparison);
  gate.run(6, "sweep trends (interval rank-monotone in alpha; interior distortion minimum)", criterion_sweep_trends);
  gate.run(7, "module invariant property suites", criterion_properties);
  std::cout << (7 - gate.failures) << " of 7 criteria passed\n";
  return gate.failures;
}
