#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cnlm/converter.hpp"
#include "cnlm/deadtime.hpp"
#include "cnlm/errors.hpp"
#include "cnlm/modulation.hpp"
#include "cnlm/signals.hpp"

namespace cnlm {

/// Scenario schema revision accepted by this build. Bump on any breaking
/// key change; the loader rejects every other value.
inline constexpr int kSchemaVersion = 1;

/// A complete, validated experiment description: converter + penalty +
/// reference + load. `name` labels comparison rows and metrics output.
struct Scenario {
  std::string name;
  ConverterConfig converter;
  PenaltyConfig penalty;
  ReferenceSpec reference;
  LoadModel load;

  void validate() const {
    converter.validate();
    penalty.validate(converter.n_modules());
    reference.validate();
    load.validate();
  }
};

namespace detail {

using json = nlohmann::json;

[[nodiscard]] inline std::string json_type_name(const json& j) {
  return std::string(j.type_name());
}

inline void require_keys(const json& j, const std::string& context,
                         std::initializer_list<const char*> known) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(context + ": unknown key '" + key + "'");
  }
}

[[nodiscard]] inline double get_number(const json& j, const std::string& context,
                                       const char* key, std::optional<double> fallback = {}) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(context + ": missing required key '" + key + "'");
  }
  const json& v = j.at(key);
  if (!v.is_number())
    throw ConfigError(context + "." + key + ": expected a number, got " + json_type_name(v));
  return v.get<double>();
}

/// Converts a byte offset reported by the JSON parser into line:column.
[[nodiscard]] inline std::string locate_byte(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace detail

/// Builds a Scenario from parsed JSON. Unknown keys are rejected so typos
/// cannot silently fall back to defaults. `default_name` is used when the
/// file carries no "name" (callers pass the file stem).
[[nodiscard]] inline Scenario scenario_from_json(const nlohmann::json& root,
                                                 const std::string& default_name,
                                                 const std::filesystem::path& base_dir = {}) {
  using detail::get_number;
  using detail::require_keys;
  if (!root.is_object()) throw ConfigError("scenario: top level must be a JSON object");
  require_keys(root, "scenario",
               {"schema_version", "name", "converter", "penalty", "reference", "load"});
  if (!root.contains("schema_version"))
    throw ConfigError("scenario: missing required key 'schema_version'");
  if (!root.at("schema_version").is_number_integer() ||
      root.at("schema_version").get<int>() != kSchemaVersion)
    throw ConfigError("scenario: schema_version must be the integer " +
                      std::to_string(kSchemaVersion));

  Scenario sc;
  sc.name = default_name;
  if (root.contains("name")) {
    if (!root.at("name").is_string()) throw ConfigError("scenario.name: expected a string");
    sc.name = root.at("name").get<std::string>();
  }

  // --- converter -----------------------------------------------------------
  if (!root.contains("converter") || !root.at("converter").is_object())
    throw ConfigError("scenario: 'converter' object is required");
  const auto& conv = root.at("converter");
  require_keys(conv, "converter", {"voltages", "dead_time_ns", "control_step_ns"});
  if (!conv.contains("voltages") || !conv.at("voltages").is_array())
    throw ConfigError("converter.voltages: expected an array of volts");
  sc.converter.voltages.clear();
  for (const auto& v : conv.at("voltages")) {
    if (!v.is_number()) throw ConfigError("converter.voltages: entries must be numbers");
    sc.converter.voltages.push_back(v.get<double>());
  }
  sc.converter.dead_time_s = get_number(conv, "converter", "dead_time_ns", 100.0) * 1e-9;
  sc.converter.control_step_s = get_number(conv, "converter", "control_step_ns", 200.0) * 1e-9;

  // --- penalty --------------------------------------------------------------
  sc.penalty = PenaltyConfig{};
  if (root.contains("penalty")) {
    if (!root.at("penalty").is_object()) throw ConfigError("scenario.penalty: expected an object");
    const auto& pen = root.at("penalty");
    require_keys(pen, "penalty",
                 {"alpha", "beta", "o_norm", "p_exponent", "q_mode", "min_interval_us"});
    if (pen.contains("alpha")) {
      const auto& a = pen.at("alpha");
      if (a.is_number()) {
        sc.penalty.alpha = {a.get<double>()};
      } else if (a.is_array()) {
        sc.penalty.alpha.clear();
        for (const auto& w : a) {
          if (!w.is_number()) throw ConfigError("penalty.alpha: entries must be numbers");
          sc.penalty.alpha.push_back(w.get<double>());
        }
      } else {
        throw ConfigError("penalty.alpha: expected a number or an array of numbers");
      }
    }
    sc.penalty.beta = get_number(pen, "penalty", "beta", 0.0);
    if (pen.contains("o_norm")) {
      if (!pen.at("o_norm").is_number_integer())
        throw ConfigError("penalty.o_norm: expected an integer");
      sc.penalty.o_norm = pen.at("o_norm").get<int>();
    }
    sc.penalty.p_exponent = get_number(pen, "penalty", "p_exponent", 1.0);
    if (pen.contains("q_mode")) {
      if (!pen.at("q_mode").is_string())
        throw ConfigError("penalty.q_mode: expected \"simplified\" or \"precise\"");
      const std::string mode = pen.at("q_mode").get<std::string>();
      if (mode == "simplified") sc.penalty.q_mode = QMode::simplified;
      else if (mode == "precise") sc.penalty.q_mode = QMode::precise;
      else throw ConfigError("penalty.q_mode: unknown mode '" + mode + "'");
    }
    if (pen.contains("min_interval_us")) {
      const double us = get_number(pen, "penalty", "min_interval_us");
      if (!(us > 0.0)) throw ConfigError("penalty.min_interval_us: must be > 0");
      // Round up to whole control steps; the slack keeps exact multiples
      // from spilling into the next step through floating-point noise.
      const double ratio = us * 1e-6 / sc.converter.control_step_s;
      sc.penalty.min_interval_steps = static_cast<std::int64_t>(std::ceil(ratio - 1e-9));
    }
  }

  // --- reference -------------------------------------------------------------
  sc.reference = ReferenceSpec{};
  const double span = sc.converter.voltage_span();
  if (root.contains("reference")) {
    if (!root.at("reference").is_object())
      throw ConfigError("scenario.reference: expected an object");
    const auto& ref = root.at("reference");
    require_keys(ref, "reference",
                 {"kind", "amplitude_V", "fundamental_hz", "sigma_s", "center_s", "duration_s",
                  "file"});
    std::string kind = "gaussian_polyphasic";
    if (ref.contains("kind")) {
      if (!ref.at("kind").is_string()) throw ConfigError("reference.kind: expected a string");
      kind = ref.at("kind").get<std::string>();
    }
    if (kind == "gaussian_polyphasic") sc.reference.kind = ReferenceKind::gaussian_polyphasic;
    else if (kind == "sine") sc.reference.kind = ReferenceKind::sine;
    else if (kind == "constant") sc.reference.kind = ReferenceKind::constant;
    else if (kind == "file") sc.reference.kind = ReferenceKind::file;
    else throw ConfigError("reference.kind: unknown kind '" + kind + "'");

    sc.reference.amplitude_v = get_number(ref, "reference", "amplitude_V", span);
    sc.reference.fundamental_hz = get_number(ref, "reference", "fundamental_hz", 10e3);
    sc.reference.sigma_s = get_number(ref, "reference", "sigma_s", 80e-6);
    sc.reference.duration_s = get_number(ref, "reference", "duration_s", 600e-6);
    sc.reference.center_s =
        get_number(ref, "reference", "center_s", sc.reference.duration_s / 2.0);
    if (sc.reference.kind == ReferenceKind::file) {
      if (!ref.contains("file") || !ref.at("file").is_string())
        throw ConfigError("reference.file: a CSV path is required for kind \"file\"");
      std::filesystem::path p = ref.at("file").get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      sc.reference.file_path = p.string();
      sc.reference.file_samples = load_reference_csv(p.string());
    }
  } else {
    sc.reference.amplitude_v = span;  // full modulation-index range by default
  }

  // --- load -------------------------------------------------------------------
  sc.load = LoadModel{};
  if (root.contains("load")) {
    if (!root.at("load").is_object()) throw ConfigError("scenario.load: expected an object");
    const auto& load = root.at("load");
    require_keys(load, "load", {"inductance_H", "series_resistance_ohm", "initial_current_A"});
    sc.load.inductance_h = get_number(load, "load", "inductance_H", 14e-6);
    sc.load.series_resistance_ohm = get_number(load, "load", "series_resistance_ohm", 0.0);
    sc.load.initial_current_a = get_number(load, "load", "initial_current_A", 0.0);
  }

  sc.validate();
  return sc;
}

/// Loads and validates a scenario file. JSON syntax errors are reported with
/// line and column; semantic errors name the offending key path. Both are
/// ConfigError, which the CLI maps to exit code 2.
[[nodiscard]] inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("scenario: cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("scenario: '" + path.string() + "' is not valid JSON (" +
                      detail::locate_byte(text, e.byte > 0 ? e.byte - 1 : 0) + "): " + e.what());
  }
  try {
    return scenario_from_json(root, path.stem().string(), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError("scenario '" + path.string() + "': " + e.what());
  }
}

}  // namespace cnlm
