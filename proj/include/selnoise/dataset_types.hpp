#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "selnoise/core/error.hpp"

namespace selnoise {

// Vector-feature regression data. `labels` may be noised; `clean_labels`
// always hold the pre-noise ground truth used for masking and evaluation.
struct LabeledDataset {
  Eigen::MatrixXd features;  // n x d, one row per sample
  std::vector<double> labels;
  std::vector<double> clean_labels;
  std::vector<std::int64_t> ids;

  std::size_t size() const noexcept { return labels.size(); }
  Eigen::Index dim() const noexcept { return features.cols(); }

  void validate() const {
    const auto n = labels.size();
    if (clean_labels.size() != n || ids.size() != n || static_cast<std::size_t>(features.rows()) != n)
      throw ArgumentError("dataset columns have unequal lengths");
    if (features.cols() < 1) throw ArgumentError("feature dimension must be at least 1");
    std::set<std::int64_t> seen(ids.begin(), ids.end());
    if (seen.size() != n) throw ArgumentError("dataset ids are not unique");
  }

  friend bool operator==(const LabeledDataset& a, const LabeledDataset& b) {
    return a.features.rows() == b.features.rows() && a.features.cols() == b.features.cols() &&
           a.features == b.features && a.labels == b.labels && a.clean_labels == b.clean_labels && a.ids == b.ids;
  }
};

struct MolecularDataset {
  std::vector<std::string> smiles;
  std::vector<double> labels;
  std::vector<double> clean_labels;
  std::vector<std::int64_t> ids;

  std::size_t size() const noexcept { return labels.size(); }

  void validate() const {
    const auto n = labels.size();
    if (smiles.size() != n || clean_labels.size() != n || ids.size() != n)
      throw ArgumentError("dataset columns have unequal lengths");
    std::set<std::int64_t> seen(ids.begin(), ids.end());
    if (seen.size() != n) throw ArgumentError("dataset ids are not unique");
  }

  friend bool operator==(const MolecularDataset&, const MolecularDataset&) = default;
};

enum class Direction { above, below };

// s(y) = 1 iff y is strictly beyond the threshold in the given direction.
struct SensitivityPredicate {
  double threshold = 0.0;
  Direction direction = Direction::above;

  bool operator()(double y) const { return direction == Direction::above ? y > threshold : y < threshold; }
};

struct SplitSpec {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
  std::uint64_t seed = 0;

  void validate() const {
    if (train < 0 || val < 0 || test < 0) throw ArgumentError("split fractions must be non-negative");
    if (std::abs(train + val + test - 1.0) > 1e-9) throw ArgumentError("split fractions must sum to 1");
  }
};

// Bit i = s(clean_labels[i]).
template <typename Dataset>
std::vector<bool> sensitivity_mask(const Dataset& ds, const SensitivityPredicate& s) {
  std::vector<bool> mask(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) mask[i] = s(ds.clean_labels[i]);
  return mask;
}

inline LabeledDataset select_rows(const LabeledDataset& ds, std::span<const std::size_t> rows) {
  LabeledDataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), ds.features.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.features.row(static_cast<Eigen::Index>(k)) = ds.features.row(static_cast<Eigen::Index>(rows[k]));
    out.labels.push_back(ds.labels[rows[k]]);
    out.clean_labels.push_back(ds.clean_labels[rows[k]]);
    out.ids.push_back(ds.ids[rows[k]]);
  }
  return out;
}

inline MolecularDataset select_rows(const MolecularDataset& ds, std::span<const std::size_t> rows) {
  MolecularDataset out;
  for (std::size_t r : rows) {
    out.smiles.push_back(ds.smiles[r]);
    out.labels.push_back(ds.labels[r]);
    out.clean_labels.push_back(ds.clean_labels[r]);
    out.ids.push_back(ds.ids[r]);
  }
  return out;
}

}  // namespace selnoise
