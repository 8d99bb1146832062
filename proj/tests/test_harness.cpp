#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "json.hpp"
#include "phasync.hpp"

using namespace phasync;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("phasync_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(PHASYNC_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// A 12 x 16 two-object scene written as PNG plus labels.
void write_small_scene(const fs::path& dir) {
  SceneSpec spec;
  spec.canvas = {12, 16};
  spec.objects = {{Rgb{255, 255, 0}, 2, 2, 5, 5}, {Rgb{0, 0, 255}, 3, 9, 5, 5}};
  const auto s = generate_object_grid(spec);
  save_png(dir / "scene.png", s.image);
  save_labels_png(dir / "scene_labels.png", s.labels);
}

ExperimentConfig small_select(const fs::path& dir) {
  auto c = ExperimentConfig::defaults(Mode::select);
  c.image = (dir / "scene.png").string();
  c.labels = (dir / "scene_labels.png").string();
  c.integration.t_end = 130.0;
  c.integration.burn_in = 20.0;
  c.raster_per_group = 5;
  c.output_dir = (dir / "run1").string();
  return c;
}

}  // namespace

TEST(Csv, FormatRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 500.0, 6.283185307179586})
    EXPECT_EQ(std::stod(format_double(v)), v);
  EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Csv, WriteReadRoundTrip) {
  const auto dir = scratch_dir("csv");
  CsvTable t;
  t.add_column("t", {0.0, 0.5, 1.0});
  t.add_column("s_g1", {0.0, 0.125, 1.0 / 3.0});
  write_csv(dir / "a.csv", t);
  EXPECT_EQ(slurp(dir / "a.csv").substr(0, 7), "t,s_g1\n");
  const auto back = read_csv(dir / "a.csv");
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.columns, t.columns);
  EXPECT_THROW(t.add_column("bad", {1.0}), ConfigError);
}

TEST(Csv, MalformedRowsRejected) {
  const auto dir = scratch_dir("csvbad");
  std::ofstream(dir / "a.csv") << "t,s_g1\n0,1\n0.5\n";
  EXPECT_THROW(read_csv(dir / "a.csv"), IoError);
  std::ofstream(dir / "b.csv") << "t,s_g1\n0,abc\n";
  EXPECT_THROW(read_csv(dir / "b.csv"), IoError);
  EXPECT_THROW(read_csv(dir / "missing.csv"), IoError);
}

TEST(Config, Defaults) {
  const auto c = ExperimentConfig::defaults(Mode::select);
  EXPECT_EQ(c.integration.dt, 0.01);
  EXPECT_EQ(c.integration.t_end, 500.0);
  EXPECT_EQ(c.integration.burn_in, 50.0);
  EXPECT_EQ(c.integration.seed, 42u);
  EXPECT_EQ(c.saliency.k_plus_max, 0.05);
  EXPECT_EQ(c.saliency.k_minus_max, 0.02);
  EXPECT_TRUE(std::isinf(ExperimentConfig::defaults(Mode::shift).criteria.level_bound));
}

TEST(Config, JsonRoundTrip) {
  auto c = ExperimentConfig::defaults(Mode::shift);
  c.preset = "spirals";
  c.saliency.sigma = 0.27;
  c.integration.seed = 9;
  c.chain.k_values = {0.02};
  const auto j = to_json(c);
  EXPECT_TRUE(j["level_bound"].is_null());
  const auto back = config_from_json(j);
  EXPECT_EQ(to_json(back), j);
  EXPECT_EQ(back.mode, Mode::shift);
}

TEST(Config, RejectsUnknownKeysAndModeClash) {
  EXPECT_THROW(config_from_json(nlohmann::json{{"sigmaa", 0.3}}), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"mode", "chain"}}, Mode::select), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"sigma", "wide"}}), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"mode", "dance"}}), ConfigError);
}

TEST(Config, ValidationRules) {
  auto c = ExperimentConfig::defaults(Mode::chain);
  c.chain.n = 1;
  EXPECT_THROW(c.validate(), ConfigError);

  auto s = ExperimentConfig::defaults(Mode::shift);
  s.resolve();
  EXPECT_EQ(s.preset, "spirals");
  EXPECT_NO_THROW(s.validate());
  s.integration.burn_in = s.integration.t_end;
  EXPECT_THROW(s.validate(), ConfigError);

  auto i = ExperimentConfig::defaults(Mode::select);
  i.image = "/nonexistent/image.png";
  EXPECT_THROW(i.validate(), IoError);
  i.preset = "high-contrast";
  EXPECT_THROW(i.validate(), ConfigError);
}

TEST(Config, LoadsFileAndManifest) {
  const auto dir = scratch_dir("config");
  std::ofstream(dir / "c.json") << R"({"mode": "select", "preset": "low-contrast", "sigma": 0.1})";
  const auto c = load_config(dir / "c.json");
  EXPECT_EQ(c.preset, "low-contrast");
  EXPECT_EQ(c.saliency.sigma, 0.1);
  std::ofstream(dir / "m.json") << nlohmann::json{{"config", to_json(c)}, {"seed", 42}}.dump();
  EXPECT_EQ(to_json(load_config(dir / "m.json")), to_json(c));
  std::ofstream(dir / "bad.json") << "{ not json";
  EXPECT_THROW(load_config(dir / "bad.json"), ConfigError);
  EXPECT_THROW(load_config(dir / "missing.json"), IoError);
}

TEST(ChainRealization, Seeded) {
  const auto a = chain_realization(50, 0.98, 1.02, 42);
  const auto b = chain_realization(50, 0.98, 1.02, 42);
  EXPECT_EQ(a.omegas, b.omegas);
  EXPECT_EQ(a.initial, b.initial);
  for (double w : a.omegas) {
    EXPECT_GE(w, 0.98);
    EXPECT_LE(w, 1.02);
  }
}

TEST(RunChain, UncoupledChainIsNotSynchronized) {
  const auto dir = scratch_dir("chain0");
  auto c = ExperimentConfig::defaults(Mode::chain);
  c.chain.k_values = {0.0};
  c.integration.t_end = 300.0;
  c.output_dir = dir.string();
  const auto r = run_chain(c);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_FALSE(r.manifest["runs"][0]["verdict"]["synchronized"].get<bool>());
  const auto t = read_csv(dir / "chain_k0.csv");
  EXPECT_EQ(t.header, (std::vector<std::string>{"t", "s_g1"}));
  EXPECT_EQ(t.columns[0].front(), 50.0);
  EXPECT_EQ(t.columns[0].back(), 300.0);
}

TEST(RunChain, DivergenceReportedPerK) {
  const auto dir = scratch_dir("chaindiv");
  auto c = ExperimentConfig::defaults(Mode::chain);
  c.chain.k_values = {100.0, 0.05};
  c.integration.t_end = 200.0;
  c.output_dir = dir.string();
  const auto r = run_chain(c);
  EXPECT_EQ(r.exit_code, static_cast<int>(ExitCode::divergence));
  EXPECT_EQ(r.manifest["runs"][0]["status"], "diverged");
  EXPECT_EQ(r.manifest["runs"][1]["status"], "ok");
  EXPECT_TRUE(fs::exists(dir / "chain_k0.05.csv"));
}

TEST(RunSelect, OutputsMatchManifestAndReproduceByteForByte) {
  const auto dir = scratch_dir("select");
  write_small_scene(dir);
  const auto first = run_select(small_select(dir));
  const auto m = read_json(dir / "run1" / "manifest.json");
  EXPECT_EQ(m["mode"], "select");
  EXPECT_EQ(m["csv_layout_version"], kCsvLayoutVersion);
  EXPECT_EQ(m["software"]["version"], kVersion);
  EXPECT_EQ(m["verdicts"].size(), 2u);
  for (const auto& f : m["files"]) {
    const auto p = dir / "run1" / f["name"].get<std::string>();
    ASSERT_TRUE(fs::exists(p)) << p;
    EXPECT_GT(fs::file_size(p), 0u);
    EXPECT_EQ(fs::file_size(p), f["bytes"].get<std::uintmax_t>());
  }
  for (auto name : {"std.csv", "raster.csv", "phase_growth.csv", "portrait_salient.csv",
                    "portrait_background.csv", "mask.png"})
    EXPECT_TRUE(fs::exists(dir / "run1" / name)) << name;

  const auto std_csv = read_csv(dir / "run1" / "std.csv");
  EXPECT_EQ(std_csv.header, (std::vector<std::string>{"t", "s_g1", "s_g2"}));
  const auto raster = read_csv(dir / "run1" / "raster.csv");
  EXPECT_EQ(raster.header.size(), 11u);
  EXPECT_EQ(raster.header[1].substr(0, 3), "x_r");
  EXPECT_EQ(read_csv(dir / "run1" / "portrait_salient.csv").header,
            (std::vector<std::string>{"t", "x", "y"}));

  auto again = load_config(dir / "run1" / "manifest.json", Mode::select);
  again.output_dir = (dir / "run2").string();
  run_select(again);
  for (const auto& f : m["files"]) {
    const auto name = f["name"].get<std::string>();
    EXPECT_EQ(slurp(dir / "run1" / name), slurp(dir / "run2" / name)) << name;
  }
  EXPECT_EQ(first.manifest["verdicts"], read_json(dir / "run2" / "manifest.json")["verdicts"]);
}

TEST(RunSelect, WithoutLabelsUsesMask) {
  const auto dir = scratch_dir("nolabels");
  write_small_scene(dir);
  auto c = small_select(dir);
  c.labels.clear();
  const auto r = run_select(c);
  EXPECT_FALSE(r.manifest["labels_given"].get<bool>());
  EXPECT_EQ(r.manifest["verdicts"].size(), r.manifest["salient_mask"]["found"].get<bool>() ? 1u : 0u);
}

TEST(RunShift, WritesAttentionSequence) {
  const auto dir = scratch_dir("shift");
  write_small_scene(dir);
  auto c = small_select(dir);
  c.mode = Mode::shift;
  c.criteria.level_bound = std::numeric_limits<double>::infinity();
  const auto r = run_shift(c);
  EXPECT_TRUE(r.manifest.contains("attention_sequence"));
  EXPECT_EQ(slurp(dir / "run1" / "attention.csv").substr(0, 21), "group,t_start,t_stop\n");
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch_dir("cli");
  const auto log = dir / "log.txt";
  write_small_scene(dir);
  const std::string img = "--image " + (dir / "scene.png").string();
  EXPECT_EQ(cli("", log), 1);
  EXPECT_EQ(cli("select --no-such-flag", log), 1);
  EXPECT_EQ(cli("--version", log), 0);
  EXPECT_EQ(cli("chain --n 1 --out " + (dir / "c").string(), log), 1);
  EXPECT_EQ(cli("shift --preset spirals --t-end 50 --burn-in 50 --out " + (dir / "s").string(), log), 1);
  EXPECT_EQ(cli("select --image " + (dir / "missing.png").string(), log), 2);
  EXPECT_EQ(cli("select --preset nope", log), 1);
  save_labels_png(dir / "wrong.png", LabelMap(Shape{3, 3}, 1));
  EXPECT_EQ(cli("select " + img + " --labels " + (dir / "wrong.png").string(), log), 1);
  EXPECT_EQ(cli("chain --k 100 --t-end 120 --out " + (dir / "div").string(), log), 3);
  EXPECT_EQ(cli("chain --k 0,0.05 --t-end 160 --out " + (dir / "ok").string(), log), 0);
  EXPECT_TRUE(fs::exists(dir / "ok" / "chain_std.csv"));
}

TEST(Cli, ConfigFileAndOverrides) {
  const auto dir = scratch_dir("cliconfig");
  const auto log = dir / "log.txt";
  write_small_scene(dir);
  auto c = small_select(dir);
  c.output_dir = (dir / "from_file").string();
  std::ofstream(dir / "c.json") << to_json(c).dump();
  ASSERT_EQ(cli("select --config " + (dir / "c.json").string() + " --seed 7", log), 0) << slurp(log);
  const auto m = read_json(dir / "from_file" / "manifest.json");
  EXPECT_EQ(m["seed"], 7);
  EXPECT_EQ(m["config"]["t_end"], 130.0);
}

TEST(Cli, AnalyzeClassifiesSpreadCsv) {
  const auto dir = scratch_dir("analyze");
  const auto log = dir / "log.txt";
  CsvTable t;
  std::vector<double> times, flat, grow;
  for (int i = 0; i <= 600; ++i) {
    times.push_back(50.0 + 0.5 * i);
    flat.push_back(0.4);
    grow.push_back(0.05 * 0.5 * i);
  }
  t.add_column("t", times);
  t.add_column("s_g1", flat);
  t.add_column("s_g2", grow);
  write_csv(dir / "std.csv", t);
  ASSERT_EQ(cli("analyze --std " + (dir / "std.csv").string() + " --out " + (dir / "a").string(), log), 0);
  const auto j = read_json(dir / "a" / "analysis.json");
  EXPECT_TRUE(j["verdicts"][0]["synchronized"].get<bool>());
  EXPECT_FALSE(j["verdicts"][1]["synchronized"].get<bool>());
  std::ofstream(dir / "bad.csv") << "time,s_g1\n0,1\n";
  EXPECT_EQ(cli("analyze --std " + (dir / "bad.csv").string(), log), 2);
}

TEST(Cli, AnalyzeDumpsMaps) {
  const auto dir = scratch_dir("maps");
  const auto log = dir / "log.txt";
  ASSERT_EQ(cli("analyze --preset high-contrast --out " + (dir / "m").string(), log), 0);
  const auto t = read_csv(dir / "m" / "maps.csv");
  EXPECT_EQ(t.header, (std::vector<std::string>{"r", "c", "C", "R", "k_plus", "k_minus", "omega", "gates_open"}));
  EXPECT_EQ(t.rows(), 6000u);
}

TEST(RunShift, VeryWideSigmaSynchronizesBothArms) {
  const auto dir = scratch_dir("wide");
  auto c = ExperimentConfig::defaults(Mode::shift);
  c.preset = "spirals";
  c.saliency.sigma = 5.0;
  c.output_dir = dir.string();
  const auto run = simulate_selection(c);
  ASSERT_EQ(run.verdicts.size(), 2u);
  for (const auto& v : run.verdicts) {
    EXPECT_TRUE(v.synchronized) << v.id;
    ASSERT_FALSE(v.intervals.empty());
  }
  const auto& a = run.verdicts[0].intervals.back();
  const auto& b = run.verdicts[1].intervals.back();
  EXPECT_LT(std::max(a.start, b.start), std::min(a.stop, b.stop));
}
