#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "selnoise/chem/smiles.hpp"
#include "selnoise/core/csv.hpp"
#include "selnoise/core/error.hpp"
#include "selnoise/core/numfmt.hpp"
#include "selnoise/core/rng.hpp"
#include "selnoise/dataset_types.hpp"
#include "selnoise/models/mlp.hpp"

namespace selnoise {

inline double cubic(double x) { return x * x * x - x * x; }

// y = x^3 - x^2 + N(0, noise_sd^2), x ~ U[lo, hi]. Feature and noise draws
// come from separate substreams, so changing noise_sd keeps the same x.
inline LabeledDataset gen_cubic(std::size_t n, double noise_sd, std::pair<double, double> x_range,
                                std::uint64_t seed) {
  if (n == 0) throw ArgumentError("gen_cubic needs n >= 1");
  if (!(x_range.first < x_range.second)) throw ArgumentError("x_range must satisfy lo < hi");
  if (!(noise_sd >= 0.0)) throw ArgumentError("noise_sd must be non-negative");
  RngStream root(seed);
  RngStream xs = root.substream("cubic-features");
  RngStream noise = root.substream("cubic-noise");
  LabeledDataset ds;
  ds.features.resize(static_cast<Eigen::Index>(n), 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = xs.uniform(x_range.first, x_range.second);
    const double clean = cubic(x);
    ds.features(static_cast<Eigen::Index>(i), 0) = x;
    ds.clean_labels.push_back(clean);
    ds.labels.push_back(clean + noise_sd * noise.normal());
    ds.ids.push_back(static_cast<std::int64_t>(i));
  }
  return ds;
}

inline models::MlpModel make_teacher(int input_dim, const std::vector<int>& hidden, std::uint64_t seed) {
  if (input_dim < 1) throw ArgumentError("input_dim must be at least 1");
  if (hidden.empty()) throw ArgumentError("teacher architecture must have at least one hidden layer");
  std::vector<int> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  return models::MlpModel::initialized(dims, RngStream(seed).substream("teacher-init"));
}

// Features i.i.d. standard normal, labels from a randomly initialized teacher network.
inline LabeledDataset gen_teacher_mlp(std::size_t n, int input_dim, const std::vector<int>& hidden,
                                      std::uint64_t seed) {
  const models::MlpModel teacher = make_teacher(input_dim, hidden, seed);
  RngStream xs = RngStream(seed).substream("teacher-features");
  LabeledDataset ds;
  ds.features.resize(static_cast<Eigen::Index>(n), input_dim);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i)
    for (Eigen::Index j = 0; j < input_dim; ++j) ds.features(i, j) = xs.normal();
  const Eigen::VectorXd y = n ? teacher.predict(ds.features) : Eigen::VectorXd();
  for (std::size_t i = 0; i < n; ++i) {
    ds.labels.push_back(y[static_cast<Eigen::Index>(i)]);
    ds.clean_labels.push_back(y[static_cast<Eigen::Index>(i)]);
    ds.ids.push_back(static_cast<std::int64_t>(i));
  }
  return ds;
}

struct SmilesLoad {
  MolecularDataset dataset;
  std::size_t dropped = 0;
  std::vector<std::size_t> dropped_lines;
};

inline constexpr double kMaxDroppedFraction = 0.2;

// Rows whose SMILES fail to parse are dropped and counted. ids are the
// 0-based data-row index in the file.
inline SmilesLoad load_smiles_csv(const std::string& path, const std::string& smiles_column,
                                  const std::string& label_column) {
  const csv::Table table = csv::read(path);
  const auto sc = table.column(smiles_column);
  const auto lc = table.column(label_column);
  if (sc == csv::Table::npos) throw IoError(path + ": missing column '" + smiles_column + "'");
  if (lc == csv::Table::npos) throw IoError(path + ": missing column '" + label_column + "'");
  SmilesLoad out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() <= std::max(sc, lc))
      throw IoError(path + ":" + std::to_string(table.lines[r]) + ": row has " + std::to_string(row.size()) +
                    " fields, expected " + std::to_string(table.header.size()));
    const auto label = parse_real(row[lc]);
    if (!label)
      throw IoError(path + ":" + std::to_string(table.lines[r]) + ": column '" + label_column +
                    "' is not a number: '" + row[lc] + "'");
    try {
      chem::parse_smiles(row[sc]);
    } catch (const ParseError&) {
      ++out.dropped;
      out.dropped_lines.push_back(table.lines[r]);
      continue;
    }
    out.dataset.smiles.push_back(row[sc]);
    out.dataset.labels.push_back(*label);
    out.dataset.clean_labels.push_back(*label);
    out.dataset.ids.push_back(static_cast<std::int64_t>(r));
  }
  if (!table.rows.empty() &&
      static_cast<double>(out.dropped) > kMaxDroppedFraction * static_cast<double>(table.rows.size()))
    throw DataQualityError(path + ": " + std::to_string(out.dropped) + " of " + std::to_string(table.rows.size()) +
                           " rows have unparseable SMILES");
  return out;
}

// Shuffled-id partition. val and test get floor(n * fraction) rows, train the
// remainder. Each part keeps the input row order.
template <typename Dataset>
std::tuple<Dataset, Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = ds.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  RngStream rng = RngStream(spec.seed).substream("split");
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.val));
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.test));
  const std::size_t n_train = n - n_val - n_test;
  auto part = [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> rows(perm.begin() + static_cast<std::ptrdiff_t>(begin),
                                  perm.begin() + static_cast<std::ptrdiff_t>(end));
    std::sort(rows.begin(), rows.end());
    return select_rows(ds, rows);
  };
  return {part(0, n_train), part(n_train, n_train + n_val), part(n_train + n_val, n)};
}

// Serialization: id, x_0..x_{d-1} | smiles, label, clean_label.
inline void write_csv(std::ostream& out, const LabeledDataset& ds) {
  csv::Row header{"id"};
  for (Eigen::Index j = 0; j < ds.dim(); ++j) header.push_back("x_" + std::to_string(j));
  header.push_back("label");
  header.push_back("clean_label");
  csv::write_row(out, header);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    csv::Row row{std::to_string(ds.ids[i])};
    for (Eigen::Index j = 0; j < ds.dim(); ++j) row.push_back(format_real(ds.features(static_cast<Eigen::Index>(i), j)));
    row.push_back(format_real(ds.labels[i]));
    row.push_back(format_real(ds.clean_labels[i]));
    csv::write_row(out, row);
  }
}

inline void write_csv(std::ostream& out, const MolecularDataset& ds) {
  csv::write_row(out, {"id", "smiles", "label", "clean_label"});
  for (std::size_t i = 0; i < ds.size(); ++i)
    csv::write_row(out, {std::to_string(ds.ids[i]), ds.smiles[i], format_real(ds.labels[i]),
                         format_real(ds.clean_labels[i])});
}

template <typename Dataset>
std::string to_csv(const Dataset& ds) {
  std::ostringstream ss;
  write_csv(ss, ds);
  return ss.str();
}

using AnyDataset = std::variant<LabeledDataset, MolecularDataset>;

// Reads the serialization written by write_csv. A "smiles" column selects
// the molecular kind.
inline AnyDataset read_dataset_csv(const std::string& text, const std::string& source = "<input>") {
  const csv::Table t = csv::parse(text);
  auto need = [&](const char* name) {
    const auto c = t.column(name);
    if (c == csv::Table::npos) throw IoError(source + ": missing column '" + name + "'");
    return c;
  };
  const auto ic = need("id"), lc = need("label"), cc = need("clean_label");
  auto real_at = [&](std::size_t r, std::size_t c) {
    if (c >= t.rows[r].size()) throw IoError(source + ":" + std::to_string(t.lines[r]) + ": short row");
    const auto v = parse_real(t.rows[r][c]);
    if (!v) throw IoError(source + ":" + std::to_string(t.lines[r]) + ": column '" + t.header[c] + "' is not a number");
    return *v;
  };
  auto id_at = [&](std::size_t r) {
    const auto v = ic < t.rows[r].size() ? parse_int<std::int64_t>(t.rows[r][ic]) : std::nullopt;
    if (!v) throw IoError(source + ":" + std::to_string(t.lines[r]) + ": bad id");
    return *v;
  };
  if (const auto sc = t.column("smiles"); sc != csv::Table::npos) {
    MolecularDataset ds;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      ds.ids.push_back(id_at(r));
      if (sc >= t.rows[r].size()) throw IoError(source + ":" + std::to_string(t.lines[r]) + ": short row");
      ds.smiles.push_back(t.rows[r][sc]);
      ds.labels.push_back(real_at(r, lc));
      ds.clean_labels.push_back(real_at(r, cc));
    }
    ds.validate();
    return ds;
  }
  std::vector<std::size_t> xcols;
  for (int j = 0;; ++j) {
    const auto c = t.column("x_" + std::to_string(j));
    if (c == csv::Table::npos) break;
    xcols.push_back(c);
  }
  if (xcols.empty()) throw IoError(source + ": no feature columns x_0.. or smiles column");
  LabeledDataset ds;
  ds.features.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(xcols.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    ds.ids.push_back(id_at(r));
    for (std::size_t j = 0; j < xcols.size(); ++j)
      ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = real_at(r, xcols[j]);
    ds.labels.push_back(real_at(r, lc));
    ds.clean_labels.push_back(real_at(r, cc));
  }
  ds.validate();
  return ds;
}

}  // namespace selnoise
