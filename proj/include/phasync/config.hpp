#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "json.hpp"
#include "phasync/errors.hpp"
#include "phasync/integrator.hpp"
#include "phasync/phase.hpp"
#include "phasync/saliency.hpp"
#include "phasync/scene.hpp"

namespace phasync {

enum class Mode { chain, select, shift };

inline std::string_view to_string(Mode m) noexcept {
  switch (m) {
    case Mode::chain: return "chain";
    case Mode::select: return "select";
    case Mode::shift: return "shift";
  }
  return "?";
}

inline Mode parse_mode(std::string_view s) {
  if (s == "chain") return Mode::chain;
  if (s == "select") return Mode::select;
  if (s == "shift") return Mode::shift;
  throw ConfigError("unknown mode '" + std::string(s) + "' (expected chain, select or shift)");
}

struct ChainSettings {
  std::size_t n = 50;
  std::vector<double> k_values{0.01, 0.03, 0.05};
  double omega_min = 0.98;
  double omega_max = 1.02;
};

struct ExperimentConfig {
  Mode mode = Mode::select;
  std::string image;   // PNG or PPM path; empty when a preset scene is used
  std::string labels;  // optional label map path
  std::string preset;  // scene preset name
  SaliencyConfig saliency;
  IntegrationConfig integration;
  SyncCriteria criteria;
  ChainSettings chain;
  std::size_t raster_per_group = 20;
  std::string output_dir = "out";

  static ExperimentConfig defaults(Mode mode) {
    ExperimentConfig c;
    c.mode = mode;
    if (mode == Mode::shift) {
      c.saliency.sigma = 0.3;
      // Groups lock late under a moving focus, so the spread they accumulate
      // beforehand is not bounded; only the plateau slope is tested.
      c.criteria.level_bound = std::numeric_limits<double>::infinity();
    }
    return c;
  }

  // Fills the default scene for image modes when neither image nor preset is given.
  void resolve() {
    if (mode == Mode::chain || !image.empty() || !preset.empty()) return;
    preset = mode == Mode::shift ? "spirals" : "high-contrast";
  }

  void validate() const {
    integration.validate();
    criteria.validate();
    detail::require(!output_dir.empty(), "output directory must be set");
    if (mode == Mode::chain) {
      detail::require(chain.n >= 2, "a chain needs at least 2 oscillators");
      detail::require(!chain.k_values.empty(), "chain needs at least one coupling value");
      for (double k : chain.k_values)
        detail::require(std::isfinite(k) && k >= 0.0, "chain coupling values must be >= 0");
      detail::require(chain.omega_min <= chain.omega_max && chain.omega_min >= 0.9 &&
                          chain.omega_max <= 1.1,
                      "chain frequency range must lie within [0.9, 1.1]");
      return;
    }
    saliency.validate();
    detail::require(image.empty() != preset.empty(), "give exactly one of image or preset");
    if (!preset.empty()) {
      bool known = false;
      for (auto p : kScenePresets) known = known || p == preset;
      detail::require(known, "unknown scene preset '" + preset + "'");
      detail::require(labels.empty(), "presets carry their own labels; drop --labels");
    }
    for (const auto& path : {image, labels})
      if (!path.empty() && !std::filesystem::exists(path))
        throw IoError("input file '" + path + "' does not exist");
    detail::require(integration.t_end - integration.burn_in >= criteria.window,
                    "analysis span t_end - burn_in is shorter than the window");
    detail::require(raster_per_group >= 1, "raster_per_group must be at least 1");
  }
};

// Flat JSON form. An infinite level bound is written as null.
inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["mode"] = std::string(to_string(c.mode));
  j["image"] = c.image;
  j["labels"] = c.labels;
  j["preset"] = c.preset;
  j["sigma"] = c.saliency.sigma;
  j["delta_omega"] = c.saliency.delta_omega;
  j["k_plus_max"] = c.saliency.k_plus_max;
  j["k_minus_max"] = c.saliency.k_minus_max;
  j["gate_threshold"] = c.saliency.color_gate_threshold;
  j["feature_weights"] = c.saliency.weights;
  j["dt"] = c.integration.dt;
  j["t_end"] = c.integration.t_end;
  j["sample_stride"] = c.integration.sample_stride;
  j["seed"] = c.integration.seed;
  j["burn_in"] = c.integration.burn_in;
  j["window"] = c.criteria.window;
  j["slope_tolerance"] = c.criteria.slope_tolerance;
  j["level_bound"] = std::isinf(c.criteria.level_bound) ? nlohmann::json(nullptr)
                                                         : nlohmann::json(c.criteria.level_bound);
  j["phase_bound"] = c.criteria.phase_bound;
  j["chain_n"] = c.chain.n;
  j["chain_k"] = c.chain.k_values;
  j["omega_min"] = c.chain.omega_min;
  j["omega_max"] = c.chain.omega_max;
  j["raster_per_group"] = c.raster_per_group;
  j["out"] = c.output_dir;
  return j;
}

namespace detail {

template <typename T>
T json_get(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace detail

// Applies a flat JSON object on top of the defaults for its mode. A run
// manifest is accepted too: its "config" member is used.
inline ExperimentConfig config_from_json(const nlohmann::json& doc,
                                         std::optional<Mode> mode_hint = std::nullopt) {
  const nlohmann::json& j = doc.contains("config") && doc["config"].is_object() ? doc["config"] : doc;
  detail::require(j.is_object(), "config must be a JSON object");
  Mode mode = mode_hint.value_or(Mode::select);
  if (j.contains("mode")) {
    const Mode m = parse_mode(detail::json_get<std::string>(j, "mode"));
    if (mode_hint && *mode_hint != m)
      throw ConfigError("config is for mode '" + std::string(to_string(m)) + "', not '" +
                        std::string(to_string(*mode_hint)) + "'");
    mode = m;
  }
  ExperimentConfig c = ExperimentConfig::defaults(mode);
  static const std::set<std::string> known = {
      "mode", "image", "labels", "preset", "sigma", "delta_omega", "k_plus_max", "k_minus_max",
      "gate_threshold", "feature_weights", "dt", "t_end", "sample_stride", "seed", "burn_in",
      "window", "slope_tolerance", "level_bound", "phase_bound", "chain_n", "chain_k",
      "omega_min", "omega_max", "raster_per_group", "out"};
  for (const auto& item : j.items())
    if (!known.count(item.key())) throw ConfigError("unknown config key '" + item.key() + "'");

  const auto set = [&](const char* key, auto& field) {
    if (j.contains(key)) field = detail::json_get<std::decay_t<decltype(field)>>(j, key);
  };
  set("image", c.image);
  set("labels", c.labels);
  set("preset", c.preset);
  set("sigma", c.saliency.sigma);
  set("delta_omega", c.saliency.delta_omega);
  set("k_plus_max", c.saliency.k_plus_max);
  set("k_minus_max", c.saliency.k_minus_max);
  set("gate_threshold", c.saliency.color_gate_threshold);
  set("feature_weights", c.saliency.weights);
  set("dt", c.integration.dt);
  set("t_end", c.integration.t_end);
  set("sample_stride", c.integration.sample_stride);
  set("seed", c.integration.seed);
  set("burn_in", c.integration.burn_in);
  set("window", c.criteria.window);
  set("slope_tolerance", c.criteria.slope_tolerance);
  if (j.contains("level_bound"))
    c.criteria.level_bound = j["level_bound"].is_null()
                                 ? std::numeric_limits<double>::infinity()
                                 : detail::json_get<double>(j, "level_bound");
  set("phase_bound", c.criteria.phase_bound);
  set("chain_n", c.chain.n);
  set("chain_k", c.chain.k_values);
  set("omega_min", c.chain.omega_min);
  set("omega_max", c.chain.omega_max);
  set("raster_per_group", c.raster_per_group);
  set("out", c.output_dir);
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path,
                                    std::optional<Mode> mode_hint = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return config_from_json(doc, mode_hint);
}

}  // namespace phasync
