#pragma once

// Experiment configuration. Parsing rejects unknown keys at every level and
// fills kind-specific defaults; `resolved` is the fully expanded config that
// gets hashed and embedded in the manifest.

#include <cctype>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "selnoise/chem/mutate.hpp"
#include "selnoise/core/error.hpp"
#include "selnoise/core/hash.hpp"
#include "selnoise/dataset_types.hpp"
#include "selnoise/models/optimizer.hpp"
#include "selnoise/noising.hpp"

namespace selnoise::experiment {

using Json = nlohmann::json;

enum class Kind { polyreg, mlp, gcn };

inline std::string to_string(Kind k) {
  switch (k) {
    case Kind::polyreg: return "polyreg";
    case Kind::mlp: return "mlp";
    case Kind::gcn: return "gcn";
  }
  return "?";
}

inline std::string to_string(Direction d) { return d == Direction::above ? "above" : "below"; }

struct Condition {
  std::string name;
  NoiseMode mode = NoiseMode::none;
  double label_sd = 0.0;
  std::vector<double> feature_sd;
  std::optional<chem::SimilarityRange> similarity;
};

struct DataConfig {
  // polyreg
  std::size_t n = 200;
  std::size_t subsample = 25;
  double noise_sd = 0.5;
  double x_lo = -1.5;
  double x_hi = 2.0;
  // mlp
  int input_dim = 50;
  std::vector<int> teacher_hidden{128, 128};
  std::size_t test_n = 0;  // 0: evaluate on the training rows
  // gcn
  std::string path;
  std::string smiles_column = "smiles";
  std::string label_column = "exp";
  std::size_t subset = 0;  // 0: all parseable rows
  SplitSpec split;
};

// Splits are the cartesian product of thresholds (or training-label
// percentiles) and directions.
struct PredicateConfig {
  std::vector<double> thresholds;
  std::vector<double> percentiles;
  std::vector<Direction> directions{Direction::above};
};

struct ModelConfig {
  int degree = 3;
  std::vector<int> hidden{128, 128};
  int gcn_hidden = 16;
};

struct EvalConfig {
  bool parity = true;
  bool plots = true;
  bool save_models = true;
};

struct ExperimentConfig {
  Kind kind = Kind::polyreg;
  std::uint64_t seed = 1;
  std::size_t trials = 100;
  DataConfig data;
  PredicateConfig predicate;
  std::vector<Condition> conditions;
  std::optional<chem::SampleConfig> sampler;
  ModelConfig model;
  models::TrainConfig train;
  EvalConfig eval;

  Json resolved() const;
  std::string hash() const { return hex64(fnv1a(resolved().dump())); }

  static std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 15];
    return s;
  }
};

namespace detail {

inline void check_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.count(key)) throw ValidationError("unknown key '" + key + "' in " + where);
}

template <typename T>
T get(const Json& obj, const char* key, const T& fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(where + "." + key + " has the wrong type");
  }
}

inline double get_real(const Json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number()) throw ValidationError(where + "." + key + " must be a number");
  return obj.at(key).get<double>();
}

inline std::size_t get_count(const Json& obj, const char* key, std::size_t fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw ValidationError(where + "." + key + " must be a non-negative integer");
  return v.get<std::size_t>();
}

inline std::uint64_t get_seed(const Json& obj, const char* key, std::uint64_t fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number_unsigned()) throw ValidationError(where + "." + key + " must be a non-negative integer");
  return obj.at(key).get<std::uint64_t>();
}

inline Direction parse_direction(const Json& v, const std::string& where) {
  if (v == "above") return Direction::above;
  if (v == "below") return Direction::below;
  throw ValidationError(where + " must be \"above\" or \"below\"");
}

inline std::vector<Condition> default_conditions(Kind k) {
  switch (k) {
    case Kind::polyreg:
      return {{"baseline", NoiseMode::none, 0.0, {}, {}},
              {"label", NoiseMode::label, 5.0, {}, {}},
              {"feature", NoiseMode::feature, 0.0, {0.5}, {}},
              {"both", NoiseMode::both, 2.5, {0.25}, {}},
              {"omission", NoiseMode::omit, 0.0, {}, {}}};
    case Kind::mlp:
      return {{"baseline", NoiseMode::none, 0.0, {}, {}},
              {"feature", NoiseMode::feature, 0.0, {1.5}, {}},
              {"label", NoiseMode::label, 1.0, {}, {}},
              {"omission", NoiseMode::omit, 0.0, {}, {}}};
    case Kind::gcn:
      return {{"baseline", NoiseMode::none, 0.0, {}, {}},
              {"omission", NoiseMode::omit, 0.0, {}, {}},
              {"x-low", NoiseMode::feature, 0.0, {}, chem::SimilarityRange(0.6, 0.8)},
              {"x-high", NoiseMode::feature, 0.0, {}, chem::SimilarityRange(0.1, 0.2)},
              {"y-low", NoiseMode::label, 0.4, {}, {}},
              {"y-high", NoiseMode::label, 1.5, {}, {}}};
  }
  return {};
}

inline Condition parse_condition(const Json& c, const std::string& where, Kind kind) {
  check_keys(c, {"name", "mode", "label_sd", "feature_sd", "similarity"}, where);
  Condition out;
  out.name = get<std::string>(c, "name", "", where);
  if (out.name.empty()) throw ValidationError(where + ".name is required");
  for (char ch : out.name)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_'))
      throw ValidationError(where + ".name may only contain letters, digits, '-' and '_'");
  const auto mode = parse_noise_mode(get<std::string>(c, "mode", "", where));
  if (!mode) throw ValidationError(where + ".mode must be one of none, label, feature, both, omit");
  out.mode = *mode;
  out.label_sd = get_real(c, "label_sd", 0.0, where);
  if (c.contains("feature_sd")) {
    const Json& f = c.at("feature_sd");
    if (f.is_number()) out.feature_sd = {f.get<double>()};
    else out.feature_sd = get<std::vector<double>>(c, "feature_sd", {}, where);
  }
  if (c.contains("similarity")) {
    const auto r = get<std::vector<double>>(c, "similarity", {}, where);
    if (r.size() != 2) throw ValidationError(where + ".similarity must be [lo, hi]");
    try {
      out.similarity = chem::SimilarityRange(r[0], r[1]);
    } catch (const ArgumentError& e) {
      throw ValidationError(where + ".similarity: " + e.what());
    }
  }
  NoisePlan probe;
  probe.mode = out.mode;
  probe.label_sd = out.label_sd;
  probe.feature_sd = out.feature_sd;
  probe.molecular_range = out.similarity;
  try {
    probe.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  if (kind == Kind::gcn) {
    if (!out.feature_sd.empty()) throw ValidationError(where + ": feature_sd applies to vector data; use similarity");
    if (probe.uses_features() && !out.similarity) throw ValidationError(where + ": molecular feature noise needs similarity");
  } else {
    if (out.similarity) throw ValidationError(where + ": similarity applies to gcn experiments only");
    if (probe.uses_features() && !probe.any_feature_sd()) throw ValidationError(where + ": feature noise needs feature_sd > 0");
  }
  return out;
}

}  // namespace detail

inline ExperimentConfig parse_config(const Json& j) {
  using namespace detail;
  check_keys(j, {"experiment", "data", "predicate", "noise", "model", "train", "eval", "trials", "seed"}, "config");
  ExperimentConfig cfg;
  const std::string kind = get<std::string>(j, "experiment", "", "config");
  if (kind == "polyreg") cfg.kind = Kind::polyreg;
  else if (kind == "mlp") cfg.kind = Kind::mlp;
  else if (kind == "gcn") cfg.kind = Kind::gcn;
  else throw ValidationError("config.experiment must be one of polyreg, mlp, gcn");

  cfg.seed = get_seed(j, "seed", 1, "config");
  cfg.trials = get_count(j, "trials", cfg.kind == Kind::polyreg ? 100 : cfg.kind == Kind::mlp ? 5 : 1, "config");
  if (cfg.trials < 1) throw ValidationError("config.trials must be at least 1");

  // Kind defaults before reading overrides.
  if (cfg.kind == Kind::mlp) {
    cfg.data.n = 500;
    cfg.train.epochs = 60;
    cfg.train.learning_rate = 0.01;
  } else if (cfg.kind == Kind::gcn) {
    cfg.data.path = "data/lipophilicity.csv";
    cfg.data.subset = 1000;
    cfg.train.epochs = 150;
    cfg.train.learning_rate = 0.005;
    cfg.predicate.percentiles = {20, 40, 60, 80};
  }
  if (cfg.kind != Kind::gcn) cfg.predicate.thresholds = {0.0};

  const Json data = j.value("data", Json::object());
  switch (cfg.kind) {
    case Kind::polyreg: {
      check_keys(data, {"n", "subsample", "noise_sd", "x_range"}, "data");
      cfg.data.n = get_count(data, "n", cfg.data.n, "data");
      cfg.data.subsample = get_count(data, "subsample", cfg.data.subsample, "data");
      cfg.data.noise_sd = get_real(data, "noise_sd", cfg.data.noise_sd, "data");
      if (data.contains("x_range")) {
        const auto r = get<std::vector<double>>(data, "x_range", {}, "data");
        if (r.size() != 2 || !(r[0] < r[1])) throw ValidationError("data.x_range must be [lo, hi] with lo < hi");
        cfg.data.x_lo = r[0];
        cfg.data.x_hi = r[1];
      }
      if (cfg.data.subsample < 1 || cfg.data.subsample > cfg.data.n)
        throw ValidationError("data.subsample must be in [1, data.n]");
      if (!(cfg.data.noise_sd >= 0.0)) throw ValidationError("data.noise_sd must be >= 0");
      break;
    }
    case Kind::mlp: {
      check_keys(data, {"n", "input_dim", "teacher_hidden", "test_n"}, "data");
      cfg.data.n = get_count(data, "n", cfg.data.n, "data");
      cfg.data.input_dim = static_cast<int>(get_count(data, "input_dim", 50, "data"));
      cfg.data.teacher_hidden = get<std::vector<int>>(data, "teacher_hidden", cfg.data.teacher_hidden, "data");
      cfg.data.test_n = get_count(data, "test_n", 0, "data");
      if (cfg.data.n < 2 || cfg.data.input_dim < 1 || cfg.data.teacher_hidden.empty())
        throw ValidationError("data: need n >= 2, input_dim >= 1 and a non-empty teacher_hidden");
      for (int h : cfg.data.teacher_hidden)
        if (h < 1) throw ValidationError("data.teacher_hidden sizes must be positive");
      break;
    }
    case Kind::gcn: {
      check_keys(data, {"path", "smiles_column", "label_column", "subset", "split"}, "data");
      cfg.data.path = get<std::string>(data, "path", cfg.data.path, "data");
      cfg.data.smiles_column = get<std::string>(data, "smiles_column", cfg.data.smiles_column, "data");
      cfg.data.label_column = get<std::string>(data, "label_column", cfg.data.label_column, "data");
      cfg.data.subset = get_count(data, "subset", cfg.data.subset, "data");
      if (data.contains("split")) {
        const Json& s = data.at("split");
        check_keys(s, {"train", "val", "test"}, "data.split");
        cfg.data.split.train = get_real(s, "train", 0.8, "data.split");
        cfg.data.split.val = get_real(s, "val", 0.1, "data.split");
        cfg.data.split.test = get_real(s, "test", 0.1, "data.split");
      }
      try {
        cfg.data.split.validate();
      } catch (const ArgumentError& e) {
        throw ValidationError(std::string("data.split: ") + e.what());
      }
      break;
    }
  }

  const Json pred = j.value("predicate", Json::object());
  check_keys(pred, {"threshold", "thresholds", "percentiles", "direction", "directions"}, "predicate");
  if (pred.contains("threshold") + pred.contains("thresholds") + pred.contains("percentiles") > 1)
    throw ValidationError("predicate: give only one of threshold, thresholds, percentiles");
  if (pred.contains("threshold")) {
    cfg.predicate.thresholds = {get_real(pred, "threshold", 0.0, "predicate")};
    cfg.predicate.percentiles.clear();
  } else if (pred.contains("thresholds")) {
    cfg.predicate.thresholds = get<std::vector<double>>(pred, "thresholds", {}, "predicate");
    cfg.predicate.percentiles.clear();
  } else if (pred.contains("percentiles")) {
    if (cfg.kind != Kind::gcn) throw ValidationError("predicate.percentiles applies to gcn experiments only");
    cfg.predicate.percentiles = get<std::vector<double>>(pred, "percentiles", {}, "predicate");
    cfg.predicate.thresholds.clear();
  }
  for (double p : cfg.predicate.percentiles)
    if (!(p >= 0.0 && p <= 100.0)) throw ValidationError("predicate.percentiles must lie in [0, 100]");
  if (cfg.predicate.thresholds.empty() && cfg.predicate.percentiles.empty())
    throw ValidationError("predicate needs at least one threshold");
  if (pred.contains("direction") && pred.contains("directions"))
    throw ValidationError("predicate: give only one of direction, directions");
  if (pred.contains("direction")) cfg.predicate.directions = {parse_direction(pred.at("direction"), "predicate.direction")};
  if (pred.contains("directions")) {
    const Json& d = pred.at("directions");
    if (!d.is_array() || d.empty()) throw ValidationError("predicate.directions must be a non-empty array");
    cfg.predicate.directions.clear();
    for (const Json& v : d) cfg.predicate.directions.push_back(parse_direction(v, "predicate.directions"));
  }

  const Json noise = j.value("noise", Json::object());
  check_keys(noise, {"conditions", "sampler"}, "noise");
  if (noise.contains("conditions")) {
    const Json& cs = noise.at("conditions");
    if (!cs.is_array() || cs.empty()) throw ValidationError("noise.conditions must be a non-empty array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      cfg.conditions.push_back(parse_condition(cs[i], "noise.conditions[" + std::to_string(i) + "]", cfg.kind));
      const auto& fsd = cfg.conditions.back().feature_sd;
      const auto dim = cfg.kind == Kind::mlp ? static_cast<std::size_t>(cfg.data.input_dim) : 1;
      if (fsd.size() > 1 && fsd.size() != dim)
        throw ValidationError("noise.conditions[" + std::to_string(i) + "].feature_sd length must be 1 or " +
                              std::to_string(dim));
      if (!names.insert(cfg.conditions.back().name).second)
        throw ValidationError("duplicate condition name '" + cfg.conditions.back().name + "'");
    }
  } else {
    cfg.conditions = default_conditions(cfg.kind);
  }
  if (noise.contains("sampler")) {
    const Json& s = noise.at("sampler");
    check_keys(s, {"n_candidates", "max_edits"}, "noise.sampler");
    chem::SampleConfig sc;
    sc.n_candidates = get_count(s, "n_candidates", sc.n_candidates, "noise.sampler");
    sc.max_edits = get_count(s, "max_edits", sc.max_edits, "noise.sampler");
    if (sc.n_candidates < 1 || sc.max_edits < 1) throw ValidationError("noise.sampler values must be at least 1");
    cfg.sampler = sc;
  }

  const Json model = j.value("model", Json::object());
  switch (cfg.kind) {
    case Kind::polyreg:
      check_keys(model, {"degree"}, "model");
      cfg.model.degree = static_cast<int>(get_count(model, "degree", 3, "model"));
      break;
    case Kind::mlp:
      check_keys(model, {"hidden"}, "model");
      cfg.model.hidden = get<std::vector<int>>(model, "hidden", cfg.model.hidden, "model");
      for (int h : cfg.model.hidden)
        if (h < 1) throw ValidationError("model.hidden sizes must be positive");
      break;
    case Kind::gcn:
      check_keys(model, {"hidden"}, "model");
      cfg.model.gcn_hidden = static_cast<int>(get_count(model, "hidden", 16, "model"));
      if (cfg.model.gcn_hidden < 1) throw ValidationError("model.hidden must be positive");
      break;
  }

  const Json train = j.value("train", Json::object());
  if (cfg.kind == Kind::polyreg) {
    check_keys(train, {}, "train");
  } else {
    check_keys(train, {"epochs", "learning_rate", "optimizer", "beta1", "beta2", "epsilon", "retain_best_validation"},
               "train");
    cfg.train.epochs = get_count(train, "epochs", cfg.train.epochs, "train");
    cfg.train.learning_rate = get_real(train, "learning_rate", cfg.train.learning_rate, "train");
    const std::string opt = get<std::string>(train, "optimizer", "adam", "train");
    if (opt == "adam") cfg.train.optimizer = models::OptimizerKind::adam;
    else if (opt == "gd") cfg.train.optimizer = models::OptimizerKind::gradient_descent;
    else throw ValidationError("train.optimizer must be \"adam\" or \"gd\"");
    cfg.train.beta1 = get_real(train, "beta1", cfg.train.beta1, "train");
    cfg.train.beta2 = get_real(train, "beta2", cfg.train.beta2, "train");
    cfg.train.epsilon = get_real(train, "epsilon", cfg.train.epsilon, "train");
    cfg.train.retain_best_validation =
        get<bool>(train, "retain_best_validation", cfg.train.retain_best_validation, "train");
    try {
      cfg.train.validate();
    } catch (const ArgumentError& e) {
      throw ValidationError(std::string("train: ") + e.what());
    }
  }

  const Json eval = j.value("eval", Json::object());
  check_keys(eval, {"parity", "plots", "save_models"}, "eval");
  cfg.eval.parity = get<bool>(eval, "parity", true, "eval");
  cfg.eval.plots = get<bool>(eval, "plots", true, "eval");
  cfg.eval.save_models = get<bool>(eval, "save_models", true, "eval");
  if (cfg.eval.plots && !cfg.eval.parity) throw ValidationError("eval.plots needs eval.parity");
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

inline Json ExperimentConfig::resolved() const {
  Json j;
  j["experiment"] = to_string(kind);
  j["seed"] = seed;
  j["trials"] = trials;
  Json d;
  switch (kind) {
    case Kind::polyreg:
      d = {{"n", data.n}, {"subsample", data.subsample}, {"noise_sd", data.noise_sd}, {"x_range", {data.x_lo, data.x_hi}}};
      break;
    case Kind::mlp:
      d = {{"n", data.n}, {"input_dim", data.input_dim}, {"teacher_hidden", data.teacher_hidden}, {"test_n", data.test_n}};
      break;
    case Kind::gcn:
      d = {{"path", data.path},
           {"smiles_column", data.smiles_column},
           {"label_column", data.label_column},
           {"subset", data.subset},
           {"split", {{"train", data.split.train}, {"val", data.split.val}, {"test", data.split.test}}}};
      break;
  }
  j["data"] = d;
  Json p;
  if (!predicate.percentiles.empty()) p["percentiles"] = predicate.percentiles;
  else p["thresholds"] = predicate.thresholds;
  p["directions"] = Json::array();
  for (Direction dir : predicate.directions) p["directions"].push_back(to_string(dir));
  j["predicate"] = p;
  Json cs = Json::array();
  for (const auto& c : conditions) {
    Json cj{{"name", c.name}, {"mode", to_string(c.mode)}};
    if (c.label_sd != 0.0) cj["label_sd"] = c.label_sd;
    if (!c.feature_sd.empty()) cj["feature_sd"] = c.feature_sd;
    if (c.similarity) cj["similarity"] = {c.similarity->lo, c.similarity->hi};
    cs.push_back(cj);
  }
  j["noise"] = {{"conditions", cs}};
  if (sampler) j["noise"]["sampler"] = {{"n_candidates", sampler->n_candidates}, {"max_edits", sampler->max_edits}};
  switch (kind) {
    case Kind::polyreg: j["model"] = {{"degree", model.degree}}; break;
    case Kind::mlp: j["model"] = {{"hidden", model.hidden}}; break;
    case Kind::gcn: j["model"] = {{"hidden", model.gcn_hidden}}; break;
  }
  if (kind == Kind::polyreg) {
    j["train"] = Json::object();
  } else {
    j["train"] = {{"epochs", train.epochs},
                  {"learning_rate", train.learning_rate},
                  {"optimizer", models::to_string(train.optimizer)},
                  {"beta1", train.beta1},
                  {"beta2", train.beta2},
                  {"epsilon", train.epsilon},
                  {"retain_best_validation", train.retain_best_validation}};
  }
  j["eval"] = {{"parity", eval.parity}, {"plots", eval.plots}, {"save_models", eval.save_models}};
  return j;
}

}  // namespace selnoise::experiment
