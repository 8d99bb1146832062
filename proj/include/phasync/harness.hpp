#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "phasync/chain.hpp"
#include "phasync/config.hpp"
#include "phasync/csv.hpp"
#include "phasync/errors.hpp"
#include "phasync/image_io.hpp"
#include "phasync/integrator.hpp"
#include "phasync/lattice.hpp"
#include "phasync/phase.hpp"
#include "phasync/saliency.hpp"
#include "phasync/scene.hpp"
#include "phasync/version.hpp"

namespace phasync {

// ---------------------------------------------------------------- chain

struct ChainRealization {
  std::vector<double> omegas;
  std::vector<OscillatorState> initial;
};

// One generator seeded with `seed`: n frequencies first, then x, y, z of
// each oscillator in order.
inline ChainRealization chain_realization(std::size_t n, double omega_min, double omega_max,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> w(omega_min, omega_max);
  std::uniform_real_distribution<double> xy(-5.0, 5.0);
  std::uniform_real_distribution<double> zd(0.0, 0.5);
  ChainRealization r;
  r.omegas.resize(n);
  for (auto& v : r.omegas) v = w(rng);
  r.initial.resize(n);
  for (auto& s : r.initial) {
    s.x = xy(rng);
    s.y = xy(rng);
    s.z = zd(rng);
  }
  return r;
}

struct ChainRun {
  double k = 0.0;
  bool diverged = false;
  std::string error;
  GroupStats stats;
  SyncVerdict verdict;
};

inline ChainRun simulate_chain(const ExperimentConfig& cfg, double k,
                               const ChainRealization& realization) {
  ChainRun run;
  run.k = k;
  ChainConfig cc;
  cc.n = cfg.chain.n;
  cc.k = k;
  cc.omegas = realization.omegas;
  try {
    const auto traj = integrate_chain(cc, cfg.integration, realization.initial);
    const auto tr = phase_trace(traj);
    std::vector<std::size_t> all(cc.n);
    for (std::size_t i = 0; i < cc.n; ++i) all[i] = i;
    run.stats = group_phase_std(tr, {Group{1, all}}, cfg.integration.burn_in);
    run.verdict = classify_sync(run.stats, cfg.criteria).front();
  } catch (const DivergenceError& e) {
    run.diverged = true;
    run.error = e.what();
  }
  return run;
}

// ------------------------------------------------------------ image runs

struct SceneInput {
  RgbImage image;
  LabelMap labels;
  bool has_labels = false;
  int target = 0;  // designated salient label when known
};

inline SceneInput load_scene_input(const ExperimentConfig& cfg) {
  SceneInput in;
  if (!cfg.preset.empty()) {
    const SceneSpec spec = scene_preset(cfg.preset);
    auto scene = generate_scene(spec);
    in.image = std::move(scene.image);
    in.labels = std::move(scene.labels);
    in.has_labels = true;
    in.target = spec.target;
    if (spec.kind == SceneKind::object_grid && spec.target > 0) {
      const auto best = strictly_max_contrast_label(in.image, in.labels, cfg.saliency.weights);
      if (!best || *best != spec.target)
        throw ConfigError("preset '" + cfg.preset +
                          "': designated target does not have strictly maximal contrast");
    }
    return in;
  }
  in.image = load_image(cfg.image);
  if (!cfg.labels.empty()) {
    in.labels = load_labels(cfg.labels, in.image.shape());
    in.has_labels = true;
  } else {
    in.labels = LabelMap(in.image.shape(), 0);
  }
  return in;
}

struct SelectionRun {
  SceneInput input;
  SaliencyMaps maps;
  Trajectory trajectory;
  PhaseTrace trace;
  std::vector<Group> groups;
  GroupStats stats;
  std::vector<SyncVerdict> verdicts;
  AttentionSequence attention;
  SalientMask mask;
  std::map<int, double> mean_contrast;
};

// Full pipeline: features, maps, gates, integration, analysis. Shift mode
// recomputes the coupling maps every step from the moving attention level.
inline SelectionRun simulate_selection(const ExperimentConfig& cfg) {
  SelectionRun run;
  run.input = load_scene_input(cfg);
  const auto& image = run.input.image;
  const auto features = extract_features(image, cfg.saliency.weights);
  run.maps = fixed_saliency(features, cfg.saliency);
  auto params =
      lattice_params_from(run.maps, similarity_gates(features, cfg.saliency.color_gate_threshold));
  CouplingRefresh refresh;
  if (cfg.mode == Mode::shift)
    refresh = moving_contrast_refresh(run.maps.contrast, cfg.saliency, cfg.integration.t_end);

  run.trajectory = integrate_lattice(random_lattice(image.shape(), cfg.integration.seed),
                                     std::move(params), cfg.integration, refresh);
  run.trace = phase_trace(run.trajectory);
  run.mask = salient_mask(run.trace, cfg.criteria.window, cfg.criteria.phase_bound);

  LabelMap analysis = run.input.labels;
  if (!run.input.has_labels)
    for (std::size_t i = 0; i < analysis.size(); ++i) analysis[i] = run.mask.mask[i] ? 1 : 0;
  run.groups = groups_from_labels(analysis);
  run.mean_contrast.clear();
  for (const auto& g : run.groups) {
    double sum = 0.0;
    for (auto c : g.cells) sum += run.maps.contrast[c];
    run.mean_contrast[g.id] = sum / static_cast<double>(g.cells.size());
  }
  if (!run.groups.empty()) {
    run.stats = group_phase_std(run.trace, run.groups, cfg.integration.burn_in);
    run.verdicts = classify_sync(run.stats, cfg.criteria);
  } else {
    run.stats.times.clear();
    run.stats.warnings.push_back("no groups to analyze: no labels and no salient cluster");
  }
  run.attention = sync_intervals(run.verdicts);
  return run;
}

// ---------------------------------------------------------------- outputs

namespace detail {

inline std::string column_suffix(const Shape& shape, std::size_t cell) {
  return "_r" + std::to_string(cell / shape.cols) + "_c" + std::to_string(cell % shape.cols);
}

inline nlohmann::json thresholds_json(const SyncCriteria& c) {
  nlohmann::json j;
  j["window"] = c.window;
  j["slope_tolerance"] = c.slope_tolerance;
  j["level_bound"] = std::isinf(c.level_bound) ? nlohmann::json(nullptr) : nlohmann::json(c.level_bound);
  j["phase_bound"] = c.phase_bound;
  return j;
}

inline nlohmann::json verdict_json(const SyncVerdict& v) {
  nlohmann::json j;
  j["id"] = v.id;
  j["synchronized"] = v.synchronized;
  j["final_slope"] = v.final_slope;
  j["final_level"] = v.final_level;
  j["intervals"] = nlohmann::json::array();
  for (const auto& iv : v.intervals) j["intervals"].push_back({iv.start, iv.stop});
  return j;
}

inline nlohmann::json base_manifest(const ExperimentConfig& cfg) {
  nlohmann::json m;
  m["software"] = {{"name", "phasync"}, {"version", kVersion}};
  m["csv_layout_version"] = kCsvLayoutVersion;
  m["mode"] = std::string(to_string(cfg.mode));
  m["seed"] = cfg.integration.seed;
  m["config"] = to_json(cfg);
  m["thresholds"] = thresholds_json(cfg.criteria);
  return m;
}

inline std::filesystem::path prepare_output_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

struct FileInventory {
  std::filesystem::path dir;
  nlohmann::json files = nlohmann::json::array();

  void add(const std::string& name, const std::string& kind) {
    const auto size = std::filesystem::file_size(dir / name);
    files.push_back({{"name", name}, {"kind", kind}, {"bytes", size}});
  }
};

inline void write_manifest(const std::filesystem::path& dir, const nlohmann::json& manifest) {
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw IoError("cannot write '" + (dir / "manifest.json").string() + "'");
  out << manifest.dump(2) << '\n';
  if (!out) throw IoError("error writing manifest");
}

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Up to `per_group` cells from each group, chosen with one seeded generator
// and kept in cell order within a group.
inline std::vector<std::size_t> sample_cells(const std::vector<Group>& groups,
                                             std::size_t per_group, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> out;
  for (const auto& g : groups) {
    std::vector<std::size_t> picked;
    std::sample(g.cells.begin(), g.cells.end(), std::back_inserter(picked), per_group, rng);
    out.insert(out.end(), picked.begin(), picked.end());
  }
  return out;
}

// Salient group: the designated target, else the synchronized group of
// highest mean contrast, else the group of highest mean contrast.
inline std::optional<int> salient_group(const SelectionRun& run) {
  if (run.input.target > 0) return run.input.target;
  std::optional<int> best;
  bool best_sync = false;
  double best_c = -1.0;
  for (const auto& v : run.verdicts) {
    const double c = run.mean_contrast.at(v.id);
    if (!best || (v.synchronized && !best_sync) || (v.synchronized == best_sync && c > best_c)) {
      best = v.id;
      best_sync = v.synchronized;
      best_c = c;
    }
  }
  return best;
}

inline CsvTable portrait_table(const Trajectory& traj, std::size_t cell) {
  CsvTable t;
  t.add_column("t", traj.times);
  t.add_column("x", traj.x_series(cell));
  t.add_column("y", traj.y_series(cell));
  return t;
}

}  // namespace detail

struct RunReport {
  nlohmann::json manifest;
  int exit_code = static_cast<int>(ExitCode::ok);
};

inline RunReport run_chain(const ExperimentConfig& cfg) {
  detail::require(cfg.mode == Mode::chain, "run_chain needs a chain config");
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto dir = detail::prepare_output_dir(cfg.output_dir);
  const auto realization =
      chain_realization(cfg.chain.n, cfg.chain.omega_min, cfg.chain.omega_max, cfg.integration.seed);

  RunReport report;
  report.manifest = detail::base_manifest(cfg);
  detail::FileInventory inv{dir};
  nlohmann::json runs = nlohmann::json::array();
  CsvTable combined;
  for (std::size_t i = 0; i < cfg.chain.k_values.size(); ++i) {
    const double k = cfg.chain.k_values[i];
    const auto run = simulate_chain(cfg, k, realization);
    nlohmann::json r{{"index", i + 1}, {"k", k}};
    if (run.diverged) {
      r["status"] = "diverged";
      r["error"] = run.error;
      report.exit_code = static_cast<int>(ExitCode::divergence);
      runs.push_back(r);
      continue;
    }
    const std::string name = "chain_k" + format_double(k) + ".csv";
    CsvTable t;
    t.add_column("t", run.stats.times);
    t.add_column("s_g1", run.stats.groups.front().s);
    write_csv(dir / name, t);
    inv.add(name, "std-series");
    if (combined.header.empty()) combined.add_column("t", run.stats.times);
    combined.add_column("s_g" + std::to_string(i + 1), run.stats.groups.front().s);
    r["status"] = "ok";
    r["file"] = name;
    r["verdict"] = detail::verdict_json(run.verdict);
    runs.push_back(r);
  }
  if (!combined.header.empty()) {
    write_csv(dir / "chain_std.csv", combined);
    inv.add("chain_std.csv", "std-series");
  }
  report.manifest["runs"] = runs;
  report.manifest["files"] = inv.files;
  report.manifest["duration_seconds"] = detail::seconds_since(start);
  detail::write_manifest(dir, report.manifest);
  return report;
}

inline void write_selection_outputs(const ExperimentConfig& cfg, const SelectionRun& run,
                                    nlohmann::json& manifest) {
  const auto dir = detail::prepare_output_dir(cfg.output_dir);
  detail::FileInventory inv{dir};
  const Shape shape = run.trace.shape;

  if (!run.stats.groups.empty()) {
    CsvTable s;
    s.add_column("t", run.stats.times);
    for (const auto& g : run.stats.groups) s.add_column("s_g" + std::to_string(g.id), g.s);
    write_csv(dir / "std.csv", s);
    inv.add("std.csv", "std-series");
  }

  const auto cells = detail::sample_cells(run.groups, cfg.raster_per_group, cfg.integration.seed);
  if (!cells.empty()) {
    CsvTable raster, growth;
    raster.add_column("t", run.trajectory.times);
    growth.add_column("t", run.trace.times);
    for (auto c : cells) {
      raster.add_column("x" + detail::column_suffix(shape, c), run.trajectory.x_series(c));
      growth.add_column("phi" + detail::column_suffix(shape, c), run.trace.phi_series(c));
    }
    write_csv(dir / "raster.csv", raster);
    inv.add("raster.csv", "raster");
    write_csv(dir / "phase_growth.csv", growth);
    inv.add("phase_growth.csv", "phase-growth");
  }

  nlohmann::json portraits = nlohmann::json::object();
  const auto salient = detail::salient_group(run);
  std::optional<std::size_t> salient_cell, background_cell;
  for (const auto& g : run.groups)
    if (salient && g.id == *salient) salient_cell = g.cells[g.cells.size() / 2];
  std::vector<std::size_t> background;
  for (std::size_t i = 0; i < run.input.labels.size(); ++i)
    if ((run.input.has_labels ? run.input.labels[i] : (run.mask.mask[i] ? 1 : 0)) == 0)
      background.push_back(i);
  if (!background.empty()) {
    background_cell = background[background.size() / 2];
  } else {
    for (const auto& g : run.groups)
      if (!salient || g.id != *salient) {
        background_cell = g.cells[g.cells.size() / 2];
        break;
      }
  }
  if (salient_cell) {
    write_csv(dir / "portrait_salient.csv", detail::portrait_table(run.trajectory, *salient_cell));
    inv.add("portrait_salient.csv", "portrait");
    portraits["salient"] = {{"row", *salient_cell / shape.cols}, {"col", *salient_cell % shape.cols}};
  }
  if (background_cell) {
    write_csv(dir / "portrait_background.csv",
              detail::portrait_table(run.trajectory, *background_cell));
    inv.add("portrait_background.csv", "portrait");
    portraits["background"] = {{"row", *background_cell / shape.cols},
                               {"col", *background_cell % shape.cols}};
  }

  save_mask_png(dir / "mask.png", run.mask.mask);
  inv.add("mask.png", "mask");

  if (cfg.mode == Mode::shift) {
    std::ofstream out(dir / "attention.csv", std::ios::binary);
    if (!out) throw IoError("cannot write attention sequence");
    out << "group,t_start,t_stop\n";
    for (const auto& e : run.attention.events)
      out << e.id << ',' << format_double(e.interval.start) << ','
          << format_double(e.interval.stop) << '\n';
    out.close();
    inv.add("attention.csv", "attention");
  }

  nlohmann::json groups = nlohmann::json::array();
  for (const auto& v : run.verdicts) {
    auto j = detail::verdict_json(v);
    j["mean_contrast"] = run.mean_contrast.at(v.id);
    for (const auto& g : run.groups)
      if (g.id == v.id) j["members"] = g.cells.size();
    groups.push_back(j);
  }
  manifest["image_shape"] = {shape.rows, shape.cols};
  manifest["labels_given"] = run.input.has_labels;
  manifest["target"] = run.input.target;
  manifest["salient_group"] = salient ? nlohmann::json(*salient) : nlohmann::json(nullptr);
  manifest["verdicts"] = groups;
  manifest["warnings"] = run.stats.warnings;
  manifest["salient_mask"] = {{"found", run.mask.found}, {"count", run.mask.count}};
  if (run.input.target > 0)
    manifest["salient_mask"]["iou_target"] = mask_iou(run.mask.mask, run.input.labels, run.input.target);
  manifest["portraits"] = portraits;
  if (cfg.mode == Mode::shift) {
    nlohmann::json seq = nlohmann::json::array();
    for (const auto& e : run.attention.events)
      seq.push_back({{"group", e.id}, {"t_start", e.interval.start}, {"t_stop", e.interval.stop}});
    manifest["attention_sequence"] = seq;
  }
  manifest["files"] = inv.files;
}

// Shared body of the select and shift commands.
inline RunReport run_image(const ExperimentConfig& cfg) {
  detail::require(cfg.mode != Mode::chain, "run_image needs a select or shift config");
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto run = simulate_selection(cfg);
  RunReport report;
  report.manifest = detail::base_manifest(cfg);
  write_selection_outputs(cfg, run, report.manifest);
  report.manifest["duration_seconds"] = detail::seconds_since(start);
  detail::write_manifest(cfg.output_dir, report.manifest);
  return report;
}

inline RunReport run_select(ExperimentConfig cfg) {
  detail::require(cfg.mode == Mode::select, "run_select needs a select config");
  cfg.resolve();
  return run_image(cfg);
}

inline RunReport run_shift(ExperimentConfig cfg) {
  detail::require(cfg.mode == Mode::shift, "run_shift needs a shift config");
  cfg.resolve();
  return run_image(cfg);
}

}  // namespace phasync
