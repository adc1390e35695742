#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <string>
#include <vector>

#include <unistd.h>

#include "selnoise/cli.hpp"
#include "selnoise/core/csv.hpp"
#include "selnoise/core/hash.hpp"
#include "selnoise/experiment/config.hpp"
#include "selnoise/experiment/outputs.hpp"
#include "selnoise/experiment/runner.hpp"
#include "selnoise/experiment/svg.hpp"
#include "support/paths.hpp"

using namespace selnoise;
using namespace selnoise::experiment;
namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

std::string config_path(const std::string& name) { return std::string(SELNOISE_SOURCE_DIR) + "/configs/" + name; }

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            ("selnoise_" + std::string(info->test_suite_name()) + "_" + info->name() + "_" + std::to_string(::getpid()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) { return csv::read_file(p.string()); }

ExperimentConfig small_polyreg(std::uint64_t seed = 1) {
  ExperimentConfig cfg = parse_config(std::string(R"({"experiment": "polyreg", "trials": 20})"));
  cfg.seed = seed;
  return cfg;
}

// Few molecules, few epochs: exercises the gcn pipeline shape, not its accuracy.
ExperimentConfig tiny_gcn() {
  Json j = Json::parse(csv::read_file(config_path("gcn.json")));
  j["data"]["path"] = test_support::data_path("lipophilicity.csv");
  j["data"]["subset"] = 60;
  j["train"]["epochs"] = 3;
  j["noise"]["sampler"] = {{"n_candidates", 30}, {"max_edits", 2}};
  return parse_config(j);
}

std::vector<std::string> files_under(const fs::path& root) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root).generic_string());
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "selnoise");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

// ---- config

TEST(Config, ShippedConfigsParse) {
  for (const char* name : {"polyreg.json", "mlp.json", "gcn.json"}) {
    SCOPED_TRACE(name);
    EXPECT_NO_THROW(parse_config(csv::read_file(config_path(name))));
  }
}

TEST(Config, ResolvedRoundTrips) {
  for (const char* name : {"polyreg.json", "mlp.json", "gcn.json"}) {
    SCOPED_TRACE(name);
    const ExperimentConfig a = parse_config(csv::read_file(config_path(name)));
    const ExperimentConfig b = parse_config(a.resolved());
    EXPECT_EQ(a.resolved(), b.resolved());
    EXPECT_EQ(a.hash(), b.hash());
  }
}

TEST(Config, MinimalConfigsFillDefaults) {
  const auto p = parse_config(std::string(R"({"experiment": "polyreg"})"));
  EXPECT_EQ(p.trials, 100u);
  EXPECT_EQ(p.conditions.size(), 5u);
  EXPECT_EQ(p.data.n, 200u);
  EXPECT_EQ(p.data.subsample, 25u);
  const auto m = parse_config(std::string(R"({"experiment": "mlp"})"));
  EXPECT_EQ(m.data.n, 500u);
  EXPECT_EQ(m.train.epochs, 60u);
  EXPECT_DOUBLE_EQ(m.train.learning_rate, 0.01);
  const auto g = parse_config(std::string(R"({"experiment": "gcn"})"));
  EXPECT_EQ(g.conditions.size(), 6u);
  EXPECT_EQ(g.predicate.percentiles.size(), 4u);
  EXPECT_EQ(g.train.epochs, 150u);
  EXPECT_DOUBLE_EQ(g.train.learning_rate, 0.005);
}

TEST(Config, UnknownKeysRejectedAtEveryLevel) {
  const char* bad[] = {
      R"({"experiment": "polyreg", "seeds": 1})",
      R"({"experiment": "polyreg", "data": {"n": 200, "noise": 0.5}})",
      R"({"experiment": "polyreg", "predicate": {"treshold": 0}})",
      R"({"experiment": "polyreg", "noise": {"conditions": [{"name": "a", "mode": "label", "labelsd": 1}]}})",
      R"({"experiment": "polyreg", "model": {"degre": 3}})",
      R"({"experiment": "polyreg", "train": {"epochs": 3}})",
      R"({"experiment": "mlp", "train": {"lr": 0.1}})",
      R"({"experiment": "gcn", "data": {"split": {"train": 0.8, "valid": 0.2}}})",
      R"({"experiment": "gcn", "noise": {"sampler": {"candidates": 5}}})",
      R"({"experiment": "polyreg", "eval": {"plot": true}})",
  };
  for (const char* text : bad) {
    SCOPED_TRACE(text);
    EXPECT_THROW(parse_config(std::string(text)), ValidationError);
  }
}

TEST(Config, InvalidValuesRejected) {
  const char* bad[] = {
      R"({"experiment": "regression"})",
      R"({})",
      R"({"experiment": "polyreg", "trials": 0})",
      R"({"experiment": "polyreg", "predicate": {"direction": "sideways"}})",
      R"({"experiment": "polyreg", "predicate": {"percentiles": [50]}})",
      R"({"experiment": "polyreg", "noise": {"conditions": [{"name": "f", "mode": "feature", "feature_sd": 0}]}})",
      R"({"experiment": "polyreg", "noise": {"conditions": [{"name": "l", "mode": "label", "label_sd": -1}]}})",
      R"({"experiment": "polyreg", "noise": {"conditions": [{"name": "o", "mode": "omit", "label_sd": 1}]}})",
      R"({"experiment": "polyreg", "noise": {"conditions": [{"name": "a b", "mode": "none"}]}})",
      R"({"experiment": "gcn", "noise": {"conditions": [{"name": "x", "mode": "feature"}]}})",
      R"({"experiment": "gcn", "noise": {"conditions": [{"name": "x", "mode": "feature", "similarity": [0.8, 0.6]}]}})",
      R"({"experiment": "mlp", "noise": {"conditions": [{"name": "x", "mode": "feature", "feature_sd": [1, 2]}]}})",
      R"({"experiment": "gcn", "data": {"split": {"train": 0.5, "val": 0.1, "test": 0.1}}})",
      R"({"experiment": "mlp", "train": {"learning_rate": -1}})",
      R"({"experiment": "polyreg", "seed": -4})",
  };
  for (const char* text : bad) {
    SCOPED_TRACE(text);
    EXPECT_THROW(parse_config(std::string(text)), ValidationError);
  }
}

TEST(Config, HashTracksContent) {
  const auto a = parse_config(std::string(R"({"experiment": "polyreg"})"));
  const auto b = parse_config(std::string(R"({"experiment": "polyreg", "seed": 2})"));
  const auto c = parse_config(std::string(R"({"experiment": "polyreg", "seed": 1, "trials": 100})"));
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_EQ(a.hash(), c.hash());
}

// ---- runner

TEST(Runner, PolyregZeroNoiseRatioNearOne) {
  const ExperimentConfig base = parse_config(csv::read_file(config_path("polyreg.json")));
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    ExperimentConfig cfg = base;
    cfg.seed = seed;
    cfg.predicate.directions = {Direction::above};
    const RunResult r = run_experiment(cfg);
    const auto ratio = r.cell("above_t0", "baseline").ratio();
    ASSERT_TRUE(ratio);
    EXPECT_GE(*ratio, 0.5) << "seed " << seed;
    EXPECT_LE(*ratio, 2.0) << "seed " << seed;
  }
}

TEST(Runner, PolyregCellsAndMetrics) {
  const RunResult r = run_experiment(small_polyreg());
  ASSERT_EQ(r.cells.size(), 5u);
  for (const auto& c : r.cells) {
    EXPECT_EQ(c.trials, 20u);
    EXPECT_EQ(c.n_s0 + c.n_s1, 200u);
    ASSERT_TRUE(c.identity_error);
    EXPECT_LT(*c.identity_error, 1e-9);
    EXPECT_EQ(c.parity.size(), 200u);
  }
  const auto& label = r.cell("above_t0", "label");
  const auto& base = r.cell("above_t0", "baseline");
  EXPECT_GT(*label.var_s1, *base.var_s1);
}

TEST(Runner, GcnEnumeratesTwentyFourCells) {
  const RunResult r = run_experiment(tiny_gcn());
  ASSERT_EQ(r.splits.size(), 4u);
  ASSERT_EQ(r.cells.size(), 24u);
  const Json m = Json::parse(r.metrics_json());
  EXPECT_EQ(m["cells"].size(), 24u);
  std::set<std::string> seen;
  for (const auto& c : m["cells"]) seen.insert(c["split"].get<std::string>() + "/" + c["condition"].get<std::string>());
  EXPECT_EQ(seen.size(), 24u);
  for (const char* s : {"above_p20", "above_p40", "above_p60", "above_p80"})
    for (const char* c : {"baseline", "omission", "x-low", "x-high", "y-low", "y-high"})
      EXPECT_TRUE(seen.count(std::string(s) + "/" + c)) << s << "/" << c;
  // Thresholds increase with the percentile.
  for (std::size_t i = 1; i < r.splits.size(); ++i)
    EXPECT_LE(r.splits[i - 1].predicate.threshold, r.splits[i].predicate.threshold);
}

TEST(Runner, GcnMissingDataFailsInLoadStage) {
  ExperimentConfig cfg = tiny_gcn();
  cfg.data.path = "/nonexistent/lipo.csv";
  try {
    run_experiment(cfg);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "load");
  }
}

TEST(Runner, ThreadCountDoesNotChangeResults) {
  const ExperimentConfig cfg = small_polyreg(4);
  EXPECT_EQ(run_experiment(cfg, 1).metrics_json(), run_experiment(cfg, 3).metrics_json());
}

TEST(Runner, ConditionsArePaired) {
  // Trial seeds do not depend on which conditions are configured.
  ExperimentConfig a = small_polyreg(5);
  ExperimentConfig b = a;
  b.conditions = {a.conditions[0]};
  const RunResult ra = run_experiment(a), rb = run_experiment(b);
  ASSERT_EQ(ra.trial_seeds.size(), rb.trial_seeds.size());
  for (std::size_t t = 0; t < ra.trial_seeds.size(); ++t) EXPECT_EQ(ra.trial_seeds[t].noise, rb.trial_seeds[t].noise);
  EXPECT_EQ(ra.cell("above_t0", "baseline").predictions, rb.cell("above_t0", "baseline").predictions);
}

// ---- outputs

TEST(Outputs, IdenticalRunsAreByteIdentical) {
  TempDir a, b;
  const ExperimentConfig cfg = small_polyreg(2);
  write_outputs(run_experiment(cfg), a.path());
  write_outputs(run_experiment(cfg), b.path());
  const auto fa = files_under(a.path()), fb = files_under(b.path());
  ASSERT_EQ(fa, fb);
  for (const auto& f : fa) {
    if (f == "manifest.json") continue;  // carries wall-clock timings
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Outputs, GcnRunsAreByteIdentical) {
  TempDir a, b;
  ExperimentConfig cfg = tiny_gcn();
  cfg.predicate.percentiles = {50};
  write_outputs(run_experiment(cfg, 2), a.path());
  write_outputs(run_experiment(cfg, 1), b.path());
  for (const auto& f : files_under(a.path())) {
    if (f == "manifest.json") continue;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Outputs, ManifestListsEveryFile) {
  TempDir d;
  const RunResult r = run_experiment(small_polyreg());
  const auto written = write_outputs(r, d.path());
  const Json m = Json::parse(slurp(d / "manifest.json"));
  EXPECT_EQ(m["format"], "selnoise-manifest");
  EXPECT_EQ(m["config_hash"], r.config.hash());
  std::vector<std::string> listed;
  for (const auto& o : m["outputs"]) {
    const std::string path = o["path"];
    listed.push_back(path);
    const std::string content = slurp(d / path);
    EXPECT_EQ(o["bytes"].get<std::size_t>(), content.size()) << path;
    EXPECT_EQ(o["fnv1a"], ExperimentConfig::hex64(fnv1a(content))) << path;
  }
  listed.push_back("manifest.json");
  std::sort(listed.begin(), listed.end());
  EXPECT_EQ(listed, files_under(d.path()));
  EXPECT_EQ(m["seeds"]["trials"].size(), 20u);
  EXPECT_EQ(m["splits"][0]["threshold"], 0.0);
  EXPECT_FALSE(fs::exists(d / kLockName));
}

TEST(Outputs, ManifestReplayReproducesMetrics) {
  TempDir a, b;
  write_outputs(run_experiment(small_polyreg(7)), a.path());
  const ExperimentConfig replay = config_from_document(slurp(a / "manifest.json"));
  write_outputs(run_experiment(replay), b.path());
  EXPECT_EQ(slurp(a / "metrics.json"), slurp(b / "metrics.json"));
}

TEST(Outputs, LockedDirectoryIsRefused) {
  TempDir d;
  std::ofstream(d / kLockName) << "123\n";
  EXPECT_THROW(write_outputs(run_experiment(small_polyreg()), d.path()), IoError);
  EXPECT_FALSE(fs::exists(d / "metrics.json"));
  EXPECT_TRUE(fs::exists(d / kLockName));
}

TEST(Outputs, FailedWriteRemovesPartialOutputs) {
  TempDir d;
  std::ofstream(d / "plots") << "not a directory";
  EXPECT_THROW(write_outputs(run_experiment(small_polyreg()), d.path()), StageError);
  EXPECT_FALSE(fs::exists(d / "metrics.json"));
  EXPECT_FALSE(fs::exists(d / "parity"));
  EXPECT_FALSE(fs::exists(d / kLockName));
  EXPECT_TRUE(fs::is_regular_file(d / "plots"));
}

TEST(Outputs, ParityCsvRoundTrips) {
  const std::vector<ParityRecord> recs{{3, -1.25, 0.1, false}, {9, 2.0000000000000004, 1.0 / 3.0, true}};
  const auto back = read_parity_csv(parity_csv(recs), "mem");
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(back[i].id, recs[i].id);
    EXPECT_EQ(back[i].y, recs[i].y);
    EXPECT_EQ(back[i].yhat, recs[i].yhat);
    EXPECT_EQ(back[i].s, recs[i].s);
  }
  EXPECT_THROW(read_parity_csv("id,y,yhat\n1,2,3\n", "mem"), ValidationError);
  EXPECT_THROW(read_parity_csv("id,y,yhat,s\n1,2,3,2\n", "mem"), ValidationError);
}

// ---- svg

TEST(Svg, SingleRecordSitsOnIdentityLine) {
  const std::string s = svg::parity({{0, 0.0, 0.0, false}}, "one");
  EXPECT_EQ(count(s, "r=\"2.5\""), 1u);
  std::smatch m;
  ASSERT_TRUE(std::regex_search(s, m, std::regex(R"re(<circle cx="([-0-9.]+)" cy="([-0-9.]+)" r="2.5")re")));
  const double cx = std::stod(m[1]), cy = std::stod(m[2]);
  ASSERT_TRUE(std::regex_search(
      s, m, std::regex(R"re(<line x1="([-0-9.]+)" y1="([-0-9.]+)" x2="([-0-9.]+)" y2="([-0-9.]+)" stroke="gray")re")));
  const double x1 = std::stod(m[1]), y1 = std::stod(m[2]), x2 = std::stod(m[3]), y2 = std::stod(m[4]);
  // Cross product of (p - p1) and (p2 - p1); coordinates are printed to 0.01.
  const double cross = (cx - x1) * (y2 - y1) - (cy - y1) * (x2 - x1);
  EXPECT_LT(std::abs(cross) / std::hypot(x2 - x1, y2 - y1), 0.02);
}

TEST(Svg, ColorsFollowRegionBit) {
  const std::string s = svg::parity({{0, -1.0, -0.5, false}, {1, 1.0, 0.5, true}, {2, 2.0, 2.5, true}}, "t");
  EXPECT_EQ(count(s, std::string("fill=\"") + svg::kColorS1 + "\" fill-opacity"), 2u);
  EXPECT_EQ(count(s, std::string("fill=\"") + svg::kColorS0 + "\" fill-opacity"), 1u);
}

TEST(Svg, TwoConditionsGiveTwoGroups) {
  const std::string s = svg::region_bars({{"baseline", 1.0, 2.0}, {"omission", 0.5, 4.0}}, "bars");
  EXPECT_EQ(count(s, "width=\"24.00\""), 4u);
  EXPECT_EQ(count(s, ">baseline<"), 1u);
  EXPECT_EQ(count(s, ">omission<"), 1u);
}

TEST(Svg, MissingRegionDrawsNoBar) {
  const std::string s = svg::region_bars({{"a", 1.0, std::nullopt}}, "bars");
  EXPECT_EQ(count(s, "width=\"24.00\""), 1u);
}

TEST(Svg, DeterministicAndEscaped) {
  const std::vector<ParityRecord> recs{{0, 0.5, 0.25, true}, {1, -3.0, 1.0, false}};
  EXPECT_EQ(svg::parity(recs, "a<b & c"), svg::parity(recs, "a<b & c"));
  EXPECT_NE(svg::parity(recs, "a<b & c").find("a&lt;b &amp; c"), std::string::npos);
  const std::vector<svg::BarGroup> g{{"x", 1.0, 2.0}};
  EXPECT_EQ(svg::region_bars(g, "t"), svg::region_bars(g, "t"));
}

TEST(Svg, EmptyInputThrows) {
  EXPECT_THROW(svg::parity({}, "t"), ArgumentError);
  EXPECT_THROW(svg::region_bars({}, "t"), ArgumentError);
}

// ---- cli

TEST(Cli, ExitCodes) {
  TempDir d;
  EXPECT_EQ(run_cli({}), cli::kUsage);
  EXPECT_EQ(run_cli({"frobnicate"}), cli::kUsage);
  EXPECT_EQ(run_cli({"experiment", "--out", d.path().string()}), cli::kUsage);

  const fs::path bad = d / "bad.json";
  std::ofstream(bad) << R"({"experiment": "polyreg", "trails": 3})";
  EXPECT_EQ(run_cli({"experiment", "--config", bad.string(), "--out", (d / "o1").string()}), cli::kValidation);
  EXPECT_FALSE(fs::exists(d / "o1" / "metrics.json"));

  const fs::path missing = d / "gcn.json";
  std::ofstream(missing) << R"({"experiment": "gcn", "data": {"path": "/nonexistent.csv"}})";
  EXPECT_EQ(run_cli({"experiment", "--config", missing.string(), "--out", (d / "o2").string()}), cli::kRuntime);
}

TEST(Cli, ExperimentWritesOutputsAndHonoursSeed) {
  TempDir d;
  const fs::path cfg = d / "p.json";
  std::ofstream(cfg) << R"({"experiment": "polyreg", "trials": 5, "eval": {"plots": false}})";
  ASSERT_EQ(run_cli({"experiment", "-q", "--config", cfg.string(), "--out", (d / "a").string(), "--seed", "9",
                     "--threads", "2"}),
            cli::kOk);
  const Json m = Json::parse(slurp(d / "a" / "metrics.json"));
  EXPECT_EQ(m["seed"], 9);
  EXPECT_FALSE(fs::exists(d / "a" / "plots"));
  // Replay from the manifest.
  ASSERT_EQ(run_cli({"experiment", "-q", "--config", (d / "a" / "manifest.json").string(), "--out",
                     (d / "b").string()}),
            cli::kOk);
  EXPECT_EQ(slurp(d / "a" / "metrics.json"), slurp(d / "b" / "metrics.json"));
}

TEST(Cli, ThreadsEnvironmentFallback) {
  TempDir d;
  const fs::path cfg = d / "p.json";
  std::ofstream(cfg) << R"({"experiment": "polyreg", "trials": 3})";
  ::setenv("SELNOISE_THREADS", "zero", 1);
  EXPECT_EQ(run_cli({"experiment", "-q", "--config", cfg.string(), "--out", (d / "a").string()}), cli::kValidation);
  ::setenv("SELNOISE_THREADS", "2", 1);
  EXPECT_EQ(run_cli({"experiment", "-q", "--config", cfg.string(), "--out", (d / "b").string()}), cli::kOk);
  ::unsetenv("SELNOISE_THREADS");
  const Json m = Json::parse(slurp(d / "b" / "manifest.json"));
  EXPECT_EQ(m["threads"], 2);
}

TEST(Cli, NoiseCommandWritesCsvAndReport) {
  TempDir d;
  const LabeledDataset ds = gen_cubic(80, 0.5, {-1.5, 2.0}, 3);
  std::ofstream(d / "in.csv") << to_csv(ds);
  std::ofstream(d / "plan.json") << R"({"predicate": {"threshold": 0}, "mode": "label", "label_sd": 5, "seed": 11})";
  ASSERT_EQ(run_cli({"noise", "-i", (d / "in.csv").string(), "-c", (d / "plan.json").string(), "-o",
                     (d / "out.csv").string()}),
            cli::kOk);
  const auto out = std::get<LabeledDataset>(read_dataset_csv(slurp(d / "out.csv"), "out"));
  ASSERT_EQ(out.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(out.clean_labels[i], ds.clean_labels[i]);
    if (ds.clean_labels[i] <= 0.0) {
      EXPECT_EQ(out.labels[i], ds.labels[i]);
    }
  }
  const Json report = Json::parse(slurp(d / "out.csv.report.json"));
  EXPECT_EQ(report["rows"], 80);
  EXPECT_GT(report["label_noised"].get<int>(), 0);

  std::ofstream(d / "bad_plan.json") << R"({"predicate": {"threshold": 0}, "mode": "label", "sd": 5})";
  EXPECT_EQ(run_cli({"noise", "-i", (d / "in.csv").string(), "-c", (d / "bad_plan.json").string(), "-o",
                     (d / "out2.csv").string()}),
            cli::kValidation);
}

TEST(Cli, PlotCommands) {
  TempDir d;
  std::ofstream(d / "p.csv") << "id,y,yhat,s\n0,0,0,0\n1,1.5,1.25,1\n";
  ASSERT_EQ(run_cli({"plot", "--kind", "parity", "-i", (d / "p.csv").string(), "-o", (d / "p.svg").string()}),
            cli::kOk);
  EXPECT_EQ(count(slurp(d / "p.svg"), "r=\"2.5\""), 2u);

  std::ofstream(d / "empty.csv") << "id,y,yhat,s\n";
  EXPECT_NE(run_cli({"plot", "--kind", "parity", "-i", (d / "empty.csv").string(), "-o", (d / "e.svg").string()}),
            cli::kOk);
  EXPECT_FALSE(fs::exists(d / "e.svg"));

  write_outputs(run_experiment(small_polyreg()), d / "run");
  ASSERT_EQ(run_cli({"plot", "--kind", "region-bars", "-i", (d / "run" / "metrics.json").string(), "-o",
                     (d / "b.svg").string()}),
            cli::kOk);
  EXPECT_EQ(count(slurp(d / "b.svg"), ">baseline<"), 1u);
  std::ofstream(d / "nocells.json") << R"({"cells": []})";
  EXPECT_NE(run_cli({"plot", "--kind", "region-bars", "-i", (d / "nocells.json").string(), "-o",
                     (d / "n.svg").string()}),
            cli::kOk);
}

TEST(Cli, ParsePlan) {
  const NoisePlan p = cli::parse_plan(Json::parse(
      R"({"predicate": {"threshold": 1.5, "direction": "below"}, "mode": "both", "label_sd": 1, "feature_sd": [0.5], "seed": 3})"));
  EXPECT_EQ(p.mode, NoiseMode::both);
  EXPECT_EQ(p.predicate.direction, Direction::below);
  EXPECT_EQ(p.feature_sd, std::vector<double>{0.5});
  EXPECT_EQ(p.seed, 3u);
  EXPECT_THROW(cli::parse_plan(Json::parse(R"({"predicate": {"threshold": 0}, "mode": "loud"})")), ValidationError);
  EXPECT_THROW(cli::parse_plan(Json::parse(R"({"mode": "none"})")), ValidationError);
  EXPECT_THROW(cli::parse_plan(Json::parse(R"({"predicate": {"threshold": 0}, "mode": "none", "x": 1})")),
               ValidationError);
}
