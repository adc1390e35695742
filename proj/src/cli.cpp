#include "selnoise/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "selnoise/core/csv.hpp"
#include "selnoise/core/error.hpp"
#include "selnoise/core/numfmt.hpp"
#include "selnoise/core/parallel.hpp"
#include "selnoise/dataset.hpp"
#include "selnoise/experiment/config.hpp"
#include "selnoise/experiment/outputs.hpp"
#include "selnoise/experiment/runner.hpp"
#include "selnoise/experiment/svg.hpp"
#include "selnoise/noising.hpp"

namespace selnoise::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

std::size_t resolve_threads(std::optional<std::size_t> flag) {
  if (flag) {
    if (*flag == 0) throw ValidationError("--threads must be at least 1");
    return *flag;
  }
  if (const char* env = std::getenv("SELNOISE_THREADS")) {
    const auto v = parse_int<std::size_t>(env);
    if (!v || *v == 0) throw ValidationError(std::string("SELNOISE_THREADS must be a positive integer, got '") + env + "'");
    return *v;
  }
  return default_threads();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

NoisePlan parse_plan(const Json& j) {
  using experiment::detail::check_keys;
  using experiment::detail::get;
  using experiment::detail::get_count;
  using experiment::detail::get_real;
  check_keys(j, {"predicate", "mode", "label_sd", "feature_sd", "similarity", "sampler", "seed"}, "plan");
  NoisePlan p;
  const Json pred = j.value("predicate", Json::object());
  check_keys(pred, {"threshold", "direction"}, "plan.predicate");
  if (!pred.contains("threshold")) throw ValidationError("plan.predicate.threshold is required");
  p.predicate.threshold = get_real(pred, "threshold", 0.0, "plan.predicate");
  if (pred.contains("direction"))
    p.predicate.direction = experiment::detail::parse_direction(pred.at("direction"), "plan.predicate.direction");
  const auto mode = parse_noise_mode(get<std::string>(j, "mode", "", "plan"));
  if (!mode) throw ValidationError("plan.mode must be one of none, label, feature, both, omit");
  p.mode = *mode;
  p.label_sd = get_real(j, "label_sd", 0.0, "plan");
  if (j.contains("feature_sd"))
    p.feature_sd = j.at("feature_sd").is_number() ? std::vector<double>{j.at("feature_sd").get<double>()}
                                                  : get<std::vector<double>>(j, "feature_sd", {}, "plan");
  if (j.contains("similarity")) {
    const auto r = get<std::vector<double>>(j, "similarity", {}, "plan");
    if (r.size() != 2) throw ValidationError("plan.similarity must be [lo, hi]");
    try {
      p.molecular_range = chem::SimilarityRange(r[0], r[1]);
    } catch (const ArgumentError& e) {
      throw ValidationError(std::string("plan.similarity: ") + e.what());
    }
  }
  if (j.contains("sampler")) {
    const Json& s = j.at("sampler");
    check_keys(s, {"n_candidates", "max_edits"}, "plan.sampler");
    chem::SampleConfig sc = p.molecular_range ? chem::SampleConfig::defaults_for(*p.molecular_range) : chem::SampleConfig{};
    sc.n_candidates = get_count(s, "n_candidates", sc.n_candidates, "plan.sampler");
    sc.max_edits = get_count(s, "max_edits", sc.max_edits, "plan.sampler");
    if (sc.n_candidates < 1 || sc.max_edits < 1) throw ValidationError("plan.sampler values must be at least 1");
    p.sampler = sc;
  }
  p.seed = experiment::detail::get_seed(j, "seed", 0, "plan");
  return p;
}

namespace {

Json read_json(const std::string& path) {
  try {
    return Json::parse(csv::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": not valid JSON: " + e.what());
  }
}

struct NoiseArgs {
  std::string input, config, output, smiles_column, label_column;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
};

int cmd_noise(const NoiseArgs& a) {
  NoisePlan plan = parse_plan(read_json(a.config));
  if (a.seed) plan.seed = *a.seed;
  const std::size_t threads = resolve_threads(a.threads);
  AnyDataset ds;
  std::size_t dropped = 0;
  if (!a.smiles_column.empty() || !a.label_column.empty()) {
    if (a.smiles_column.empty() || a.label_column.empty())
      throw ValidationError("--smiles-column and --label-column go together");
    SmilesLoad load = load_smiles_csv(a.input, a.smiles_column, a.label_column);
    dropped = load.dropped;
    ds = std::move(load.dataset);
  } else {
    ds = read_dataset_csv(csv::read_file(a.input), a.input);
  }
  NoiseReport report;
  const std::string out = std::visit(
      [&](const auto& d) {
        try {
          return to_csv(apply_plan(d, plan, &report, threads));
        } catch (const ArgumentError& e) {
          throw ValidationError(e.what());
        }
      },
      ds);
  write_text(a.output, out);
  write_text(a.output + ".report.json", report.to_json());
  std::cerr << "noise: " << report.masked << " masked, " << report.replaced << " replaced, " << report.label_noised
            << " label-noised, " << report.omitted << " omitted, " << report.fallbacks << " fallbacks";
  if (dropped) std::cerr << ", " << dropped << " unparseable input rows dropped";
  std::cerr << "\n";
  return kOk;
}

struct ExperimentArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool quiet = false;
};

int cmd_experiment(const ExperimentArgs& a) {
  experiment::ExperimentConfig cfg = experiment::config_from_document(csv::read_file(a.config));
  if (a.seed) cfg.seed = *a.seed;
  const std::size_t threads = resolve_threads(a.threads);
  experiment::Logger logger;
  if (!a.quiet) logger = [](const std::string& m) { std::cerr << m << "\n"; };
  const experiment::RunResult r = experiment::run_experiment(cfg, threads, logger);
  const auto files = experiment::write_outputs(r, a.out, threads);
  std::cerr << "experiment: wrote " << files.size() << " files to " << a.out << "\n";
  return kOk;
}

struct PlotArgs {
  std::string kind, input, output, split, title;
};

int cmd_plot(const PlotArgs& a) {
  const std::string text = csv::read_file(a.input);
  std::string svg_text;
  if (a.kind == "parity") {
    const auto records = experiment::read_parity_csv(text, a.input);
    if (records.empty()) throw ValidationError(a.input + ": no parity records");
    svg_text = svg::parity(records, a.title.empty() ? fs::path(a.input).stem().string() : a.title);
  } else {
    const auto groups = experiment::bar_groups_from_metrics(text, a.split, a.input);
    svg_text = svg::region_bars(groups, a.title.empty() ? (a.split.empty() ? "region MSE" : a.split) : a.title);
  }
  write_text(a.output, svg_text);
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Selective noising of sensitive label regions, with experiment runner and plots", "selnoise"};
  app.set_version_flag("--version", std::string(SELNOISE_VERSION));
  app.require_subcommand(1);

  NoiseArgs na;
  auto* noise = app.add_subcommand("noise", "Apply a noise plan to a dataset CSV");
  noise->add_option("--input,-i", na.input, "Dataset CSV (id, x_*/smiles, label, clean_label)")->required()->check(CLI::ExistingFile);
  noise->add_option("--config,-c", na.config, "Noise plan JSON")->required()->check(CLI::ExistingFile);
  noise->add_option("--output,-o", na.output, "Noised CSV; the report goes to <output>.report.json")->required();
  noise->add_option("--seed", na.seed, "Override the plan seed");
  noise->add_option("--threads", na.threads, "Worker threads (default: SELNOISE_THREADS or hardware)");
  noise->add_option("--smiles-column", na.smiles_column, "Import a raw SMILES CSV using this column");
  noise->add_option("--label-column", na.label_column, "Label column of a raw SMILES CSV");

  ExperimentArgs ea;
  auto* exp = app.add_subcommand("experiment", "Run an experiment config (or replay a manifest)");
  exp->add_option("--config,-c", ea.config, "Experiment config or manifest JSON")->required()->check(CLI::ExistingFile);
  exp->add_option("--out,-o", ea.out, "Output directory")->required();
  exp->add_option("--seed", ea.seed, "Override the master seed");
  exp->add_option("--threads", ea.threads, "Worker threads (default: SELNOISE_THREADS or hardware)");
  exp->add_flag("--quiet,-q", ea.quiet, "No progress messages");

  PlotArgs pa;
  auto* plot = app.add_subcommand("plot", "Render a parity CSV or metrics JSON as SVG");
  plot->add_option("--kind,-k", pa.kind, "parity or region-bars")->required()->check(CLI::IsMember({"parity", "region-bars"}));
  plot->add_option("--input,-i", pa.input, "Parity CSV or metrics JSON")->required()->check(CLI::ExistingFile);
  plot->add_option("--output,-o", pa.output, "SVG path")->required();
  plot->add_option("--split", pa.split, "region-bars: restrict to one split label");
  plot->add_option("--title", pa.title, "Plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*noise) return cmd_noise(na);
    if (*exp) return cmd_experiment(ea);
    if (*plot) return cmd_plot(pa);
  } catch (const ValidationError& e) {
    std::cerr << "selnoise: invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "selnoise: error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}

}  // namespace selnoise::cli
