// phasync command-line driver: chain | select | shift | analyze.

#include <bit>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "phasync.hpp"

namespace {

using phasync::ExperimentConfig;
using phasync::Mode;

struct Overrides {
  std::string config;
  std::optional<std::string> image, labels, preset, out;
  std::optional<double> sigma, delta_omega, kplus_max, kminus_max, gate_threshold;
  std::optional<double> dt, t_end, burn_in;
  std::optional<std::size_t> stride, n, raster;
  std::optional<std::uint64_t> seed;
  std::optional<double> window, slope_tol, level_bound, phase_bound;
  std::vector<double> k_values;
};

void add_integration_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON config or run manifest");
  cmd->add_option("--dt", o.dt, "Integration step");
  cmd->add_option("--t-end", o.t_end, "Final time");
  cmd->add_option("--burn-in", o.burn_in, "Transient excluded from statistics");
  cmd->add_option("--stride", o.stride, "Steps between recorded samples");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--window", o.window, "Classifier window W");
  cmd->add_option("--slope-tol", o.slope_tol, "Slope tolerance");
  cmd->add_option("--level-bound", o.level_bound, "Spread level bound (inf disables)");
  cmd->add_option("--phase-bound", o.phase_bound, "Phase bound M for the salient mask");
}

void add_image_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--image", o.image, "Input image (PNG or binary PPM)");
  cmd->add_option("--labels", o.labels, "Label map (8-bit grayscale PNG or PGM)");
  cmd->add_option("--preset", o.preset, "Scene preset: high-contrast, medium-contrast, low-contrast, spirals");
  cmd->add_option("--sigma", o.sigma, "Saliency width sigma");
  cmd->add_option("--delta-omega", o.delta_omega, "Frequency spread");
  cmd->add_option("--kplus-max", o.kplus_max, "Maximum positive coupling");
  cmd->add_option("--kminus-max", o.kminus_max, "Maximum negative coupling");
  cmd->add_option("--gate-threshold", o.gate_threshold, "RGB distance closing a positive link");
  cmd->add_option("--raster-per-group", o.raster, "Sampled oscillators per group in raster.csv");
}

ExperimentConfig resolve_config(Mode mode, const Overrides& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig::defaults(mode)
                                        : phasync::load_config(o.config, mode);
  if (o.image) {
    c.image = *o.image;
    if (!o.preset) c.preset.clear();
  }
  if (o.preset) {
    c.preset = *o.preset;
    if (!o.image) c.image.clear();
  }
  if (o.labels) c.labels = *o.labels;
  if (o.out) c.output_dir = *o.out;
  if (o.sigma) c.saliency.sigma = *o.sigma;
  if (o.delta_omega) c.saliency.delta_omega = *o.delta_omega;
  if (o.kplus_max) c.saliency.k_plus_max = *o.kplus_max;
  if (o.kminus_max) c.saliency.k_minus_max = *o.kminus_max;
  if (o.gate_threshold) c.saliency.color_gate_threshold = *o.gate_threshold;
  if (o.raster) c.raster_per_group = *o.raster;
  if (o.dt) c.integration.dt = *o.dt;
  if (o.t_end) c.integration.t_end = *o.t_end;
  if (o.burn_in) c.integration.burn_in = *o.burn_in;
  if (o.stride) c.integration.sample_stride = *o.stride;
  if (o.seed) c.integration.seed = *o.seed;
  if (o.window) c.criteria.window = *o.window;
  if (o.slope_tol) c.criteria.slope_tolerance = *o.slope_tol;
  if (o.level_bound) c.criteria.level_bound = *o.level_bound;
  if (o.phase_bound) c.criteria.phase_bound = *o.phase_bound;
  if (o.n) c.chain.n = *o.n;
  if (!o.k_values.empty()) c.chain.k_values = o.k_values;
  return c;
}

void print_verdicts(const nlohmann::json& verdicts) {
  for (const auto& v : verdicts) {
    std::cout << "group " << v["id"] << ": " << (v["synchronized"].get<bool>() ? "synchronized" : "not synchronized")
              << " (final slope " << v["final_slope"] << ")";
    for (const auto& iv : v["intervals"]) std::cout << " [" << iv[0] << ", " << iv[1] << "]";
    std::cout << '\n';
  }
}

int run_analyze_std(const std::string& path, const ExperimentConfig& cfg, std::optional<std::string> out) {
  const auto table = phasync::read_csv(path);
  if (table.header.empty() || table.header.front() != "t")
    throw phasync::IoError("'" + path + "': first column must be t");
  phasync::GroupStats stats;
  stats.times = table.columns.front();
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    const auto& name = table.header[c];
    if (name.rfind("s_g", 0) != 0)
      throw phasync::IoError("'" + path + "': column '" + name + "' is not an s_g<k> column");
    int id = 0;
    try {
      id = std::stoi(name.substr(3));
    } catch (const std::exception&) {
      throw phasync::IoError("'" + path + "': bad group column '" + name + "'");
    }
    stats.groups.push_back({id, 0, table.columns[c]});
  }
  const auto verdicts = phasync::classify_sync(stats, cfg.criteria);
  nlohmann::json j;
  j["thresholds"] = phasync::detail::thresholds_json(cfg.criteria);
  j["verdicts"] = nlohmann::json::array();
  for (const auto& v : verdicts) j["verdicts"].push_back(phasync::detail::verdict_json(v));
  std::cout << j.dump(2) << '\n';
  if (out) {
    const auto dir = phasync::detail::prepare_output_dir(*out);
    std::ofstream f(dir / "analysis.json");
    if (!f) throw phasync::IoError("cannot write analysis.json");
    f << j.dump(2) << '\n';
  }
  return 0;
}

// Per-pixel maps as a long-format CSV (one row per pixel).
int run_analyze_maps(ExperimentConfig cfg) {
  cfg.resolve();
  cfg.saliency.validate();
  const auto input = phasync::load_scene_input(cfg);
  const auto features = phasync::extract_features(input.image, cfg.saliency.weights);
  const auto maps = phasync::fixed_saliency(features, cfg.saliency);
  const auto gates = phasync::similarity_gates(features, cfg.saliency.color_gate_threshold);
  const auto shape = input.image.shape();

  phasync::CsvTable t;
  std::vector<double> rows(shape.size()), cols(shape.size()), open(shape.size());
  for (std::size_t i = 0; i < shape.size(); ++i) {
    rows[i] = static_cast<double>(i / shape.cols);
    cols[i] = static_cast<double>(i % shape.cols);
    open[i] = static_cast<double>(std::popcount(gates.mask(i)));
  }
  t.add_column("r", rows);
  t.add_column("c", cols);
  t.add_column("C", std::vector<double>(maps.contrast.begin(), maps.contrast.end()));
  t.add_column("R", std::vector<double>(maps.relative_contrast.begin(), maps.relative_contrast.end()));
  t.add_column("k_plus", std::vector<double>(maps.k_plus.begin(), maps.k_plus.end()));
  t.add_column("k_minus", std::vector<double>(maps.k_minus.begin(), maps.k_minus.end()));
  t.add_column("omega", std::vector<double>(maps.omega.begin(), maps.omega.end()));
  t.add_column("gates_open", open);
  const auto dir = phasync::detail::prepare_output_dir(cfg.output_dir);
  phasync::write_csv(dir / "maps.csv", t);

  nlohmann::json j;
  j["image_shape"] = {shape.rows, shape.cols};
  j["open_gate_pairs"] = gates.open_pair_count();
  j["adjacent_pairs"] = phasync::adjacent_pair_count(shape);
  if (input.has_labels) {
    nlohmann::json groups = nlohmann::json::object();
    for (const auto& [id, c] : phasync::mean_contrast_by_label(input.image, input.labels, cfg.saliency.weights))
      groups[std::to_string(id)] = c;
    j["mean_contrast_by_label"] = groups;
    const auto best = phasync::strictly_max_contrast_label(input.image, input.labels, cfg.saliency.weights);
    j["strictly_max_label"] = best ? nlohmann::json(*best) : nlohmann::json(nullptr);
  }
  j["maps"] = (dir / "maps.csv").string();
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Salient object selection by chaotic phase synchronization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(phasync::kVersion));

  Overrides o;
  auto* chain = app.add_subcommand("chain", "Run the 1-D chain for each coupling value");
  add_integration_flags(chain, o);
  chain->add_option("--k", o.k_values, "Coupling values (repeat or comma-separate)")->delimiter(',');
  chain->add_option("--n", o.n, "Chain length");

  auto* select = app.add_subcommand("select", "Fixed-contrast salient object selection");
  add_integration_flags(select, o);
  add_image_flags(select, o);

  auto* shift = app.add_subcommand("shift", "Moving-contrast run with attention shifts");
  add_integration_flags(shift, o);
  add_image_flags(shift, o);

  auto* analyze = app.add_subcommand("analyze", "Dump saliency maps, or classify a phase-spread CSV");
  add_integration_flags(analyze, o);
  add_image_flags(analyze, o);
  std::string std_csv;
  analyze->add_option("--std", std_csv, "Phase-spread CSV (t,s_g<k>...) to classify");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(phasync::ExitCode::usage);
  }

  try {
    if (chain->parsed()) {
      const auto cfg = resolve_config(Mode::chain, o);
      const auto report = phasync::run_chain(cfg);
      for (const auto& r : report.manifest["runs"]) {
        std::cout << "k=" << r["k"] << ": ";
        if (r["status"] == "ok") {
          const auto& v = r["verdict"];
          std::cout << (v["synchronized"].get<bool>() ? "synchronized" : "not synchronized")
                    << " (final slope " << v["final_slope"] << ", s(t_end) " << v["final_level"]
                    << ")\n";
        } else {
          std::cout << "diverged: " << r["error"].get<std::string>() << '\n';
        }
      }
      std::cout << "outputs in " << cfg.output_dir << '\n';
      return report.exit_code;
    }
    if (select->parsed() || shift->parsed()) {
      const Mode mode = select->parsed() ? Mode::select : Mode::shift;
      const auto cfg = resolve_config(mode, o);
      const auto report = mode == Mode::select ? phasync::run_select(cfg) : phasync::run_shift(cfg);
      print_verdicts(report.manifest["verdicts"]);
      const auto& m = report.manifest["salient_mask"];
      std::cout << "salient mask: " << (m["found"].get<bool>() ? std::to_string(m["count"].get<std::size_t>()) + " cells" : "none");
      if (m.contains("iou_target")) std::cout << ", IoU vs target " << m["iou_target"];
      std::cout << "\noutputs in " << cfg.output_dir << '\n';
      return report.exit_code;
    }
    auto cfg = resolve_config(Mode::select, o);
    if (!std_csv.empty()) return run_analyze_std(std_csv, cfg, o.out);
    return run_analyze_maps(cfg);
  } catch (const phasync::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(phasync::ExitCode::io);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(phasync::ExitCode::usage);
  }
}
