#pragma once

// Model blobs: {"format":"selnoise-model","version":1,"kind":...,<architecture>,
// "parameters":[...]} with reals written to 17 significant digits.

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "selnoise/core/error.hpp"
#include "selnoise/core/numfmt.hpp"
#include "selnoise/models/gcn.hpp"
#include "selnoise/models/mlp.hpp"
#include "selnoise/models/poly.hpp"

namespace selnoise::models {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline std::string real_array(const Eigen::VectorXd& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_real(v[i]);
  }
  return out + "]";
}

inline std::string int_array(const std::vector<int>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out + "]";
}

inline std::string header(const char* kind) {
  return std::string("{\"format\":\"selnoise-model\",\"version\":") + std::to_string(kModelFormatVersion) +
         ",\"kind\":\"" + kind + "\",";
}

inline Eigen::VectorXd read_params(const nlohmann::json& j, Eigen::Index expected) {
  const auto& arr = j.at("parameters");
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != expected)
    throw ValidationError("model parameter count does not match architecture");
  Eigen::VectorXd p(expected);
  for (Eigen::Index i = 0; i < expected; ++i) p[i] = arr[static_cast<std::size_t>(i)].get<double>();
  return p;
}

}  // namespace detail

inline std::string to_json(const PolyModel& m) {
  return detail::header("poly") + "\"degree\":" + std::to_string(m.degree) +
         ",\"parameters\":" + detail::real_array(m.coefficients) + "}";
}

inline std::string to_json(const MlpModel& m) {
  return detail::header("mlp") + "\"layer_dims\":" + detail::int_array(m.dims()) +
         ",\"activation\":\"relu\",\"parameters\":" + detail::real_array(m.parameters()) + "}";
}

inline std::string to_json(const GcnModel& m) {
  return detail::header("gcn") + "\"features\":" + std::to_string(m.features()) +
         ",\"hidden\":" + std::to_string(m.hidden()) + ",\"readout\":\"mean\",\"parameters\":" +
         detail::real_array(m.parameters()) + "}";
}

using AnyModel = std::variant<PolyModel, MlpModel, GcnModel>;

inline AnyModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model blob is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format") != "selnoise-model") throw ValidationError("not a selnoise model blob");
    if (j.at("version").get<int>() != kModelFormatVersion) throw ValidationError("unsupported model format version");
    const std::string kind = j.at("kind");
    if (kind == "poly") {
      PolyModel m;
      m.degree = j.at("degree").get<int>();
      m.coefficients = detail::read_params(j, m.degree + 1);
      return m;
    }
    if (kind == "mlp") {
      MlpModel m(j.at("layer_dims").get<std::vector<int>>());
      m.parameters() = detail::read_params(j, m.parameters().size());
      return m;
    }
    if (kind == "gcn") {
      GcnModel m(j.at("features").get<int>(), j.at("hidden").get<int>());
      m.parameters() = detail::read_params(j, m.parameters().size());
      return m;
    }
    throw ValidationError("unknown model kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed model blob: ") + e.what());
  }
}

}  // namespace selnoise::models
