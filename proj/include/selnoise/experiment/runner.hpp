#pragma once

// Experiment runner: generate -> noise -> train (x T) -> eval, per split and
// noise condition. Every random draw comes from a seed derived from the master
// seed and a stage name, so a config and seed determine all outputs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "selnoise/core/error.hpp"
#include "selnoise/core/numfmt.hpp"
#include "selnoise/core/parallel.hpp"
#include "selnoise/core/rng.hpp"
#include "selnoise/dataset.hpp"
#include "selnoise/eval.hpp"
#include "selnoise/experiment/config.hpp"
#include "selnoise/models/gcn.hpp"
#include "selnoise/models/mlp.hpp"
#include "selnoise/models/poly.hpp"
#include "selnoise/models/serialize.hpp"
#include "selnoise/noising.hpp"

namespace selnoise::experiment {

using OrderedJson = nlohmann::ordered_json;

struct Split {
  std::string label;
  SensitivityPredicate predicate;
  std::optional<double> percentile;
};

struct TrialSeeds {
  std::uint64_t subsample = 0;
  std::uint64_t noise = 0;
  std::uint64_t train = 0;
};

struct CellResult {
  Split split;
  Condition condition;
  std::size_t trials = 0;   // models that entered the ensemble
  std::size_t skipped = 0;  // trials whose fit was singular
  Eigen::MatrixXd predictions;  // trials x test rows
  std::vector<double> ensemble_mean;
  std::size_t n_s0 = 0, n_s1 = 0;
  std::optional<double> mse_s0, mse_s1;
  std::optional<double> bias2_s0, bias2_s1, var_s0, var_s1;
  std::optional<double> slope_s0, slope_s1;
  std::optional<double> identity_error;
  std::vector<ParityRecord> parity;
  std::optional<std::string> model_blob;   // first trial
  std::optional<NoiseReport> noise_report;  // first trial, training partition

  std::optional<double> ratio() const {
    if (!mse_s0 || !mse_s1 || *mse_s0 == 0.0) return std::nullopt;
    return *mse_s1 / *mse_s0;
  }

  std::string file_stem() const { return split.label + "__" + condition.name; }
};

struct RunResult {
  ExperimentConfig config;
  std::vector<Split> splits;
  std::vector<CellResult> cells;
  std::vector<TrialSeeds> trial_seeds;
  std::uint64_t data_seed = 0;
  std::uint64_t split_seed = 0;
  std::size_t data_rows = 0;  // examples entering the experiment (after any subset)
  std::size_t test_rows = 0;
  std::size_t dropped_rows = 0;
  std::vector<std::pair<std::string, double>> timings_ms;

  const CellResult& cell(std::string_view split_label, std::string_view condition) const {
    for (const auto& c : cells)
      if (c.split.label == split_label && c.condition.name == condition) return c;
    throw ArgumentError("no cell " + std::string(split_label) + "/" + std::string(condition));
  }

  std::string metrics_json() const;
};

using Logger = std::function<void(const std::string&)>;

namespace detail {

inline OrderedJson opt(const std::optional<double>& v) {
  if (v && std::isfinite(*v)) return *v;
  return nullptr;
}

// Linear interpolation between order statistics.
inline double percentile(std::vector<double> v, double p) {
  if (v.empty()) throw ArgumentError("percentile of an empty set");
  std::sort(v.begin(), v.end());
  const double pos = p / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline std::string split_label(Direction d, double threshold, std::optional<double> pct) {
  std::string s = to_string(d) + "_";
  if (pct) return s + "p" + format_real(*pct, 6);
  std::string t = format_real(threshold, 6);
  for (char& c : t)
    if (c == '-') c = 'm';
  return s + "t" + t;
}

inline std::vector<Split> make_splits(const ExperimentConfig& cfg, const std::vector<double>& train_labels) {
  std::vector<Split> out;
  for (Direction d : cfg.predicate.directions) {
    if (!cfg.predicate.percentiles.empty()) {
      for (double p : cfg.predicate.percentiles) {
        const double t = percentile(train_labels, p);
        out.push_back({split_label(d, t, p), {t, d}, p});
      }
    } else {
      for (double t : cfg.predicate.thresholds) out.push_back({split_label(d, t, std::nullopt), {t, d}, std::nullopt});
    }
  }
  return out;
}

inline NoisePlan plan_for(const Condition& c, const SensitivityPredicate& s, std::uint64_t seed,
                          const std::optional<chem::SampleConfig>& sampler) {
  NoisePlan p;
  p.predicate = s;
  p.mode = c.mode;
  p.label_sd = c.label_sd;
  p.feature_sd = c.feature_sd;
  p.molecular_range = c.similarity;
  p.sampler = sampler;
  p.seed = seed;
  return p;
}

// Fills metrics from the prediction matrix of the trials that produced a model.
template <typename Dataset>
void summarize(CellResult& cell, const Dataset& test) {
  const SensitivityPredicate& s = cell.split.predicate;
  if (cell.trials == 0) throw StageError("eval", "no trial of " + cell.file_stem() + " produced a model");
  if (cell.trials >= 2) {
    const BiasVarianceReport r = bias_variance(cell.predictions, test, s);
    cell.ensemble_mean = r.mean_prediction;
    cell.mse_s0 = r.mse_region.s0;
    cell.mse_s1 = r.mse_region.s1;
    cell.bias2_s0 = r.bias2_region.s0;
    cell.bias2_s1 = r.bias2_region.s1;
    cell.var_s0 = r.variance_region.s0;
    cell.var_s1 = r.variance_region.s1;
    cell.identity_error = r.identity_error();
    cell.n_s0 = r.n_s0;
    cell.n_s1 = r.n_s1;
  } else {
    const Eigen::VectorXd row = cell.predictions.row(0).transpose();
    cell.ensemble_mean.assign(row.data(), row.data() + row.size());
    const RegionMetrics m = region_mse(std::span<const double>(cell.ensemble_mean), test, s);
    cell.mse_s0 = m.mse_s0;
    cell.mse_s1 = m.mse_s1;
    cell.n_s0 = m.n_s0;
    cell.n_s1 = m.n_s1;
  }
  cell.parity = parity_records(std::span<const double>(cell.ensemble_mean), test, s);
  auto slope = [&](bool region) -> std::optional<double> {
    try {
      return attenuation_slope(cell.parity, region);
    } catch (const UndefinedSlopeError&) {
      return std::nullopt;
    }
  };
  cell.slope_s0 = slope(false);
  cell.slope_s1 = slope(true);
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

class Timer {
 public:
  explicit Timer(RunResult& r) : r_(r), t0_(std::chrono::steady_clock::now()) {}
  void lap(const char* name) {
    const auto t = std::chrono::steady_clock::now();
    r_.timings_ms.emplace_back(name, std::chrono::duration<double, std::milli>(t - t0_).count());
    t0_ = t;
  }

 private:
  RunResult& r_;
  std::chrono::steady_clock::time_point t0_;
};

inline void log(const Logger& logger, const std::string& msg) {
  if (logger) logger(msg);
}

inline std::vector<TrialSeeds> trial_seeds(std::uint64_t master, std::size_t trials) {
  std::vector<TrialSeeds> out(trials);
  const std::uint64_t root = derive_seed(master, "trial");
  for (std::size_t t = 0; t < trials; ++t) {
    const std::uint64_t ts = derive_seed(root, static_cast<std::uint64_t>(t));
    out[t] = {derive_seed(ts, "subsample"), derive_seed(ts, "noise"), derive_seed(ts, "train")};
  }
  return out;
}

inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  RngStream rng(seed);
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline std::vector<CellResult> make_cells(const std::vector<Split>& splits, const ExperimentConfig& cfg,
                                          std::size_t test_rows) {
  std::vector<CellResult> cells;
  for (const auto& sp : splits)
    for (const auto& c : cfg.conditions) {
      CellResult cell;
      cell.split = sp;
      cell.condition = c;
      cell.predictions = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cfg.trials), static_cast<Eigen::Index>(test_rows));
      cells.push_back(std::move(cell));
    }
  return cells;
}

// Drops rows of trials that produced no model (singular fits) and fills the trial counts.
inline void compact(CellResult& cell, const std::vector<char>& ok) {
  std::vector<Eigen::Index> keep;
  for (std::size_t t = 0; t < ok.size(); ++t)
    if (ok[t]) keep.push_back(static_cast<Eigen::Index>(t));
  cell.trials = keep.size();
  cell.skipped = ok.size() - keep.size();
  if (keep.size() == ok.size()) return;
  Eigen::MatrixXd p(static_cast<Eigen::Index>(keep.size()), cell.predictions.cols());
  for (std::size_t k = 0; k < keep.size(); ++k) p.row(static_cast<Eigen::Index>(k)) = cell.predictions.row(keep[k]);
  cell.predictions = std::move(p);
}

inline RunResult run_polyreg(const ExperimentConfig& cfg, std::size_t threads, const Logger& logger) {
  RunResult r;
  r.config = cfg;
  Timer timer(r);
  r.data_seed = derive_seed(cfg.seed, "data");
  const LabeledDataset data =
      stage("generate", [&] { return gen_cubic(cfg.data.n, cfg.data.noise_sd, {cfg.data.x_lo, cfg.data.x_hi}, r.data_seed); });
  r.data_rows = data.size();
  r.test_rows = data.size();
  r.splits = make_splits(cfg, data.clean_labels);
  r.trial_seeds = trial_seeds(cfg.seed, cfg.trials);
  std::vector<std::vector<std::size_t>> subsamples(cfg.trials);
  for (std::size_t t = 0; t < cfg.trials; ++t)
    subsamples[t] = sample_without_replacement(data.size(), cfg.data.subsample, r.trial_seeds[t].subsample);
  timer.lap("generate");

  r.cells = make_cells(r.splits, cfg, data.size());
  const std::size_t T = cfg.trials;
  std::vector<std::vector<char>> ok(r.cells.size(), std::vector<char>(T, 0));
  log(logger, "polyreg: " + std::to_string(r.cells.size()) + " cells x " + std::to_string(T) + " trials");
  stage("train", [&] {
    parallel_for(r.cells.size() * T, threads, [&](std::size_t job) {
      CellResult& cell = r.cells[job / T];
      const std::size_t t = job % T;
      const LabeledDataset sub = select_rows(data, subsamples[t]);
      NoiseReport report;
      const NoisePlan plan = plan_for(cell.condition, cell.split.predicate, r.trial_seeds[t].noise, cfg.sampler);
      const LabeledDataset noised = apply_plan(sub, plan, t == 0 ? &report : nullptr);
      if (t == 0) cell.noise_report = report;
      models::PolyModel model;
      try {
        model = models::fit_polynomial(noised, cfg.model.degree);
      } catch (const SingularFitError&) {
        return;
      }
      cell.predictions.row(static_cast<Eigen::Index>(t)) = model.predict(data.features).transpose();
      ok[job / T][t] = 1;
      if (t == 0 && cfg.eval.save_models) cell.model_blob = models::to_json(model);
    });
    return 0;
  });
  timer.lap("train");
  stage("eval", [&] {
    for (std::size_t c = 0; c < r.cells.size(); ++c) {
      compact(r.cells[c], ok[c]);
      summarize(r.cells[c], data);
    }
    return 0;
  });
  timer.lap("eval");
  return r;
}

inline RunResult run_mlp(const ExperimentConfig& cfg, std::size_t threads, const Logger& logger) {
  RunResult r;
  r.config = cfg;
  Timer timer(r);
  r.data_seed = derive_seed(cfg.seed, "data");
  // Rows n.. of the same generator call form the holdout set when test_n > 0.
  const LabeledDataset all = stage("generate", [&] {
    return gen_teacher_mlp(cfg.data.n + cfg.data.test_n, cfg.data.input_dim, cfg.data.teacher_hidden, r.data_seed);
  });
  std::vector<std::size_t> train_rows(cfg.data.n), test_rows(cfg.data.test_n);
  std::iota(train_rows.begin(), train_rows.end(), 0);
  std::iota(test_rows.begin(), test_rows.end(), cfg.data.n);
  const LabeledDataset train = select_rows(all, train_rows);
  const LabeledDataset test = cfg.data.test_n ? select_rows(all, test_rows) : train;
  r.data_rows = all.size();
  r.test_rows = test.size();
  r.splits = make_splits(cfg, train.clean_labels);
  r.trial_seeds = trial_seeds(cfg.seed, cfg.trials);
  timer.lap("generate");

  r.cells = make_cells(r.splits, cfg, test.size());
  const std::size_t T = cfg.trials;
  log(logger, "mlp: " + std::to_string(r.cells.size()) + " cells x " + std::to_string(T) + " trials");
  stage("train", [&] {
    parallel_for(r.cells.size() * T, threads, [&](std::size_t job) {
      CellResult& cell = r.cells[job / T];
      const std::size_t t = job % T;
      NoiseReport report;
      const NoisePlan plan = plan_for(cell.condition, cell.split.predicate, r.trial_seeds[t].noise, cfg.sampler);
      const LabeledDataset noised = apply_plan(train, plan, t == 0 ? &report : nullptr);
      if (t == 0) cell.noise_report = report;
      models::TrainConfig tc = cfg.train;
      tc.seed = r.trial_seeds[t].train;
      const models::MlpModel model = models::mlp_train(noised, tc, cfg.model.hidden);
      cell.predictions.row(static_cast<Eigen::Index>(t)) = model.predict(test.features).transpose();
      if (t == 0 && cfg.eval.save_models) cell.model_blob = models::to_json(model);
    });
    return 0;
  });
  timer.lap("train");
  stage("eval", [&] {
    for (auto& cell : r.cells) {
      compact(cell, std::vector<char>(T, 1));
      summarize(cell, test);
    }
    return 0;
  });
  timer.lap("eval");
  return r;
}

inline RunResult run_gcn(const ExperimentConfig& cfg, std::size_t threads, const Logger& logger) {
  RunResult r;
  r.config = cfg;
  Timer timer(r);
  r.data_seed = derive_seed(cfg.seed, "subset");
  r.split_seed = derive_seed(cfg.seed, "split");
  const SmilesLoad load = stage("load", [&] {
    return load_smiles_csv(cfg.data.path, cfg.data.smiles_column, cfg.data.label_column);
  });
  r.dropped_rows = load.dropped;
  MolecularDataset data = load.dataset;
  if (cfg.data.subset && cfg.data.subset < data.size())
    data = select_rows(data, sample_without_replacement(data.size(), cfg.data.subset, r.data_seed));
  r.data_rows = data.size();
  auto [train, val, test] = split(data, SplitSpec{cfg.data.split.train, cfg.data.split.val, cfg.data.split.test, r.split_seed});
  if (train.size() == 0 || test.size() == 0) throw StageError("load", "train or test partition is empty");
  r.test_rows = test.size();
  r.splits = make_splits(cfg, train.clean_labels);
  r.trial_seeds = trial_seeds(cfg.seed, cfg.trials);
  const std::vector<models::GraphSample> test_graphs = models::featurize_all(test);
  timer.lap("load");

  r.cells = make_cells(r.splits, cfg, test.size());
  const std::size_t T = cfg.trials;
  log(logger, "gcn: " + std::to_string(train.size()) + "/" + std::to_string(val.size()) + "/" +
                  std::to_string(test.size()) + " molecules, " + std::to_string(r.cells.size()) + " cells x " +
                  std::to_string(T) + " trials");
  stage("train", [&] {
    parallel_for(r.cells.size() * T, threads, [&](std::size_t job) {
      CellResult& cell = r.cells[job / T];
      const std::size_t t = job % T;
      const NoisePlan plan = plan_for(cell.condition, cell.split.predicate, r.trial_seeds[t].noise, cfg.sampler);
      NoisePlan val_plan = plan;
      val_plan.seed = derive_seed(plan.seed, "val");
      NoiseReport report;
      const MolecularDataset ntrain = apply_plan(train, plan, t == 0 ? &report : nullptr);
      const MolecularDataset nval = apply_plan(val, val_plan);
      if (t == 0) cell.noise_report = report;
      models::TrainConfig tc = cfg.train;
      tc.seed = r.trial_seeds[t].train;
      const models::GcnModel model = models::gcn_train(ntrain, nval, tc, cfg.model.gcn_hidden);
      for (std::size_t i = 0; i < test_graphs.size(); ++i)
        cell.predictions(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = model.predict(test_graphs[i]);
      if (t == 0 && cfg.eval.save_models) cell.model_blob = models::to_json(model);
      if (logger && t == 0) logger("gcn: finished " + cell.file_stem());
    });
    return 0;
  });
  timer.lap("train");
  stage("eval", [&] {
    for (auto& cell : r.cells) {
      compact(cell, std::vector<char>(T, 1));
      summarize(cell, test);
    }
    return 0;
  });
  timer.lap("eval");
  return r;
}

}  // namespace detail

inline RunResult run_experiment(const ExperimentConfig& cfg, std::size_t threads = 1, const Logger& logger = {}) {
  switch (cfg.kind) {
    case Kind::polyreg: return detail::run_polyreg(cfg, threads, logger);
    case Kind::mlp: return detail::run_mlp(cfg, threads, logger);
    case Kind::gcn: return detail::run_gcn(cfg, threads, logger);
  }
  throw ArgumentError("unknown experiment kind");
}

inline std::string RunResult::metrics_json() const {
  using detail::opt;
  OrderedJson j;
  j["experiment"] = to_string(config.kind);
  j["seed"] = config.seed;
  j["config_hash"] = config.hash();
  j["test_rows"] = test_rows;
  OrderedJson cs = OrderedJson::array();
  for (const auto& c : cells) {
    OrderedJson cj;
    cj["split"] = c.split.label;
    cj["threshold"] = c.split.predicate.threshold;
    cj["percentile"] = opt(c.split.percentile);
    cj["direction"] = to_string(c.split.predicate.direction);
    cj["condition"] = c.condition.name;
    cj["mode"] = to_string(c.condition.mode);
    cj["mse_s0"] = opt(c.mse_s0);
    cj["mse_s1"] = opt(c.mse_s1);
    cj["ratio"] = opt(c.ratio());
    cj["bias2_s0"] = opt(c.bias2_s0);
    cj["bias2_s1"] = opt(c.bias2_s1);
    cj["var_s0"] = opt(c.var_s0);
    cj["var_s1"] = opt(c.var_s1);
    cj["T"] = c.trials;
    cj["n_s0"] = c.n_s0;
    cj["n_s1"] = c.n_s1;
    cj["skipped_trials"] = c.skipped;
    cj["slope_s0"] = opt(c.slope_s0);
    cj["slope_s1"] = opt(c.slope_s1);
    if (c.noise_report) {
      cj["noise_masked"] = c.noise_report->masked;
      cj["noise_replaced"] = c.noise_report->replaced;
      cj["noise_fallbacks"] = c.noise_report->fallbacks;
    }
    cs.push_back(cj);
  }
  j["cells"] = cs;
  return j.dump(2) + "\n";
}

}  // namespace selnoise::experiment
