#pragma once

// Selective noise operators. Rows are masked by s(clean_label); only masked
// rows are ever written. Every masked row draws from its own substream keyed
// by (plan seed, operator, row id), so results do not depend on row order or
// thread count.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "selnoise/chem/mutate.hpp"
#include "selnoise/chem/smiles.hpp"
#include "selnoise/core/error.hpp"
#include "selnoise/core/numfmt.hpp"
#include "selnoise/core/parallel.hpp"
#include "selnoise/core/rng.hpp"
#include "selnoise/dataset_types.hpp"

namespace selnoise {

enum class NoiseMode { none, label, feature, both, omit };

inline std::string to_string(NoiseMode m) {
  switch (m) {
    case NoiseMode::none: return "none";
    case NoiseMode::label: return "label";
    case NoiseMode::feature: return "feature";
    case NoiseMode::both: return "both";
    case NoiseMode::omit: return "omit";
  }
  return "?";
}

inline std::optional<NoiseMode> parse_noise_mode(std::string_view s) {
  for (NoiseMode m : {NoiseMode::none, NoiseMode::label, NoiseMode::feature, NoiseMode::both, NoiseMode::omit})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

struct NoisePlan {
  SensitivityPredicate predicate;
  NoiseMode mode = NoiseMode::none;
  double label_sd = 0.0;
  std::vector<double> feature_sd;  // length 1 (broadcast) or d; empty means 0
  std::optional<chem::SimilarityRange> molecular_range;
  std::optional<chem::SampleConfig> sampler;  // defaults_for(range) when absent
  std::uint64_t seed = 0;

  bool uses_labels() const { return mode == NoiseMode::label || mode == NoiseMode::both; }
  bool uses_features() const { return mode == NoiseMode::feature || mode == NoiseMode::both; }

  bool any_feature_sd() const {
    for (double s : feature_sd)
      if (s > 0.0) return true;
    return false;
  }

  chem::SampleConfig sample_config() const {
    if (sampler) return *sampler;
    return molecular_range ? chem::SampleConfig::defaults_for(*molecular_range) : chem::SampleConfig{};
  }

  void validate() const {
    if (!(label_sd >= 0.0) || !std::isfinite(label_sd)) throw ValidationError("label_sd must be finite and >= 0");
    for (double s : feature_sd)
      if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("feature_sd entries must be finite and >= 0");
    if (mode == NoiseMode::omit && (label_sd != 0.0 || any_feature_sd() || molecular_range))
      throw ValidationError("omit plans carry no noise parameters");
  }

  void validate_for(const LabeledDataset& ds) const {
    validate();
    if (molecular_range) throw ValidationError("molecular_range applies to molecular datasets only");
    if (uses_features()) {
      if (!any_feature_sd()) throw ValidationError("feature noise on vector data needs feature_sd > 0");
      if (feature_sd.size() != 1 && static_cast<Eigen::Index>(feature_sd.size()) != ds.dim())
        throw ValidationError("feature_sd length must be 1 or the feature dimension");
    }
  }

  void validate_for(const MolecularDataset&) const {
    validate();
    if (uses_features() && !molecular_range) throw ValidationError("feature noise on molecules needs molecular_range");
    if (!feature_sd.empty()) throw ValidationError("feature_sd applies to vector datasets only");
  }
};

inline constexpr std::size_t kSimilarityBins = 10;

struct NoiseReport {
  std::size_t rows = 0;
  std::size_t masked = 0;
  std::size_t replaced = 0;  // masked rows whose features or SMILES changed
  std::size_t label_noised = 0;
  std::size_t omitted = 0;
  std::size_t fallbacks = 0;
  std::vector<std::int64_t> fallback_ids;
  std::vector<std::int64_t> similarity_ids;
  std::vector<double> similarities;  // achieved similarity per replaced molecule
  std::vector<std::size_t> histogram = std::vector<std::size_t>(kSimilarityBins, 0);  // over [0, 1]

  void record_similarity(std::int64_t id, double s) {
    similarity_ids.push_back(id);
    similarities.push_back(s);
    const auto bin = std::min<std::size_t>(kSimilarityBins - 1, static_cast<std::size_t>(s * kSimilarityBins));
    ++histogram[bin];
  }

  std::string to_json() const {
    auto ints = [](const auto& v) {
      std::string s = "[";
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
      return s + "]";
    };
    std::string sims = "[";
    for (std::size_t i = 0; i < similarities.size(); ++i)
      sims += std::string(i ? "," : "") + "{\"id\":" + std::to_string(similarity_ids[i]) +
              ",\"similarity\":" + format_real(similarities[i]) + "}";
    sims += "]";
    return "{\"rows\":" + std::to_string(rows) + ",\"masked\":" + std::to_string(masked) +
           ",\"replaced\":" + std::to_string(replaced) + ",\"label_noised\":" + std::to_string(label_noised) +
           ",\"omitted\":" + std::to_string(omitted) + ",\"fallbacks\":" + std::to_string(fallbacks) +
           ",\"fallback_ids\":" + ints(fallback_ids) + ",\"similarity_histogram\":" + ints(histogram) +
           ",\"similarities\":" + sims + "}\n";
  }
};

namespace detail {

inline RngStream row_stream(const NoisePlan& plan, std::string_view op, std::int64_t id) {
  return RngStream(plan.seed).substream(op).substream(static_cast<std::uint64_t>(id));
}

template <typename Dataset>
void label_pass(Dataset& ds, const NoisePlan& plan, NoiseReport* report) {
  const auto mask = sensitivity_mask(ds, plan.predicate);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!mask[i]) continue;
    if (plan.label_sd > 0.0) ds.labels[i] += plan.label_sd * row_stream(plan, "label", ds.ids[i]).normal();
    if (report) ++report->label_noised;
  }
}

template <typename Dataset>
std::size_t count_masked(const Dataset& ds, const SensitivityPredicate& s) {
  std::size_t n = 0;
  for (double y : ds.clean_labels) n += s(y) ? 1 : 0;
  return n;
}

}  // namespace detail

template <typename Dataset>
Dataset noise_labels(Dataset ds, const NoisePlan& plan, NoiseReport* report = nullptr) {
  if (!plan.uses_labels()) throw ArgumentError("noise_labels needs mode label or both");
  plan.validate_for(ds);
  detail::label_pass(ds, plan, report);
  return ds;
}

inline LabeledDataset noise_features_vector(LabeledDataset ds, const NoisePlan& plan, NoiseReport* report = nullptr) {
  if (!plan.uses_features()) throw ArgumentError("feature noise needs mode feature or both");
  plan.validate();
  if (!plan.feature_sd.empty() && plan.feature_sd.size() != 1 &&
      static_cast<Eigen::Index>(plan.feature_sd.size()) != ds.dim())
    throw ArgumentError("feature_sd length must be 1 or the feature dimension");
  const auto mask = sensitivity_mask(ds, plan.predicate);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!mask[i]) continue;
    RngStream rng = detail::row_stream(plan, "feature", ds.ids[i]);
    bool changed = false;
    for (Eigen::Index j = 0; j < ds.dim(); ++j) {
      const double sd = plan.feature_sd.empty() ? 0.0
                        : plan.feature_sd.size() == 1 ? plan.feature_sd[0]
                                                      : plan.feature_sd[static_cast<std::size_t>(j)];
      const double z = rng.normal();
      if (sd > 0.0) {
        ds.features(static_cast<Eigen::Index>(i), j) += sd * z;
        changed = true;
      }
    }
    if (report && changed) ++report->replaced;
  }
  return ds;
}

inline MolecularDataset noise_features_molecular(MolecularDataset ds, const NoisePlan& plan,
                                                 NoiseReport* report = nullptr, std::size_t threads = 1) {
  if (!plan.molecular_range) throw ArgumentError("molecular feature noise needs molecular_range");
  plan.validate();
  const auto mask = sensitivity_mask(ds, plan.predicate);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (mask[i]) rows.push_back(i);
  const chem::SampleConfig cfg = plan.sample_config();
  std::vector<chem::SampleResult> results(rows.size());
  parallel_for(rows.size(), threads, [&](std::size_t k) {
    const std::size_t i = rows[k];
    results[k] = chem::sample_similar(chem::parse_smiles(ds.smiles[i]), *plan.molecular_range, cfg,
                                      detail::row_stream(plan, "molecule", ds.ids[i]));
  });
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t i = rows[k];
    if (results[k].fallback()) {
      if (report) {
        ++report->fallbacks;
        report->fallback_ids.push_back(ds.ids[i]);
      }
      continue;
    }
    ds.smiles[i] = chem::write_smiles(*results[k].molecule);
    if (report) {
      ++report->replaced;
      report->record_similarity(ds.ids[i], results[k].similarity);
    }
  }
  return ds;
}

// Keeps rows with s(clean_label) = 0 in their original order.
template <typename Dataset>
Dataset omit(const Dataset& ds, const SensitivityPredicate& s) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (!s(ds.clean_labels[i])) keep.push_back(i);
  return select_rows(ds, keep);
}

namespace detail {

inline LabeledDataset feature_pass(const LabeledDataset& ds, const NoisePlan& plan, NoiseReport* report, std::size_t) {
  return noise_features_vector(ds, plan, report);
}

inline MolecularDataset feature_pass(const MolecularDataset& ds, const NoisePlan& plan, NoiseReport* report,
                                     std::size_t threads) {
  return noise_features_molecular(ds, plan, report, threads);
}

}  // namespace detail

template <typename Dataset>
Dataset apply_plan(const Dataset& ds, const NoisePlan& plan, NoiseReport* report = nullptr, std::size_t threads = 1) {
  plan.validate_for(ds);
  if (report) {
    *report = NoiseReport{};
    report->rows = ds.size();
    report->masked = detail::count_masked(ds, plan.predicate);
  }
  switch (plan.mode) {
    case NoiseMode::none: return ds;
    case NoiseMode::omit: {
      Dataset out = omit(ds, plan.predicate);
      if (report) report->omitted = ds.size() - out.size();
      return out;
    }
    case NoiseMode::label: return noise_labels(ds, plan, report);
    case NoiseMode::feature: return detail::feature_pass(ds, plan, report, threads);
    case NoiseMode::both: return noise_labels(detail::feature_pass(ds, plan, report, threads), plan, report);
  }
  return ds;
}

}  // namespace selnoise
