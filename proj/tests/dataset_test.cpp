#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <string>

#include "selnoise/dataset.hpp"
#include "support/paths.hpp"

using namespace selnoise;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("selnoise_dataset_test_" + name);
  std::ofstream(path) << text;
  return path.string();
}

}  // namespace

TEST(GenCubic, LabelsFollowGenerator) {
  const LabeledDataset ds = gen_cubic(200, 0.0, {-1.5, 2.0}, 1);
  ASSERT_EQ(ds.size(), 200u);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double x = ds.features(static_cast<Eigen::Index>(i), 0);
    EXPECT_GE(x, -1.5);
    EXPECT_LT(x, 2.0);
    EXPECT_EQ(ds.labels[i], x * x * x - x * x);
    EXPECT_EQ(ds.clean_labels[i], ds.labels[i]);
    EXPECT_EQ(ds.ids[i], static_cast<std::int64_t>(i));
  }
}

TEST(GenCubic, NoiseLeavesFeaturesAndCleanLabels) {
  const LabeledDataset a = gen_cubic(500, 0.0, {-1.5, 2.0}, 4);
  const LabeledDataset b = gen_cubic(500, 1.0, {-1.5, 2.0}, 4);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.clean_labels, b.clean_labels);
  double s = 0.0, ss = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double d = b.labels[i] - b.clean_labels[i];
    s += d;
    ss += d * d;
  }
  const double mean = s / 500.0;
  EXPECT_NEAR(std::sqrt(ss / 500.0 - mean * mean), 1.0, 0.15);
}

TEST(GenCubic, Deterministic) {
  EXPECT_EQ(gen_cubic(50, 0.3, {-1.5, 2.0}, 9), gen_cubic(50, 0.3, {-1.5, 2.0}, 9));
  EXPECT_FALSE(gen_cubic(50, 0.3, {-1.5, 2.0}, 9) == gen_cubic(50, 0.3, {-1.5, 2.0}, 10));
}

TEST(GenCubic, RejectsBadArguments) {
  EXPECT_THROW(gen_cubic(0, 0.0, {-1.5, 2.0}, 1), ArgumentError);
  EXPECT_THROW(gen_cubic(5, 0.0, {2.0, 2.0}, 1), ArgumentError);
  EXPECT_THROW(gen_cubic(5, -1.0, {-1.5, 2.0}, 1), ArgumentError);
}

TEST(GenTeacher, LabelsMatchTeacherForward) {
  const LabeledDataset ds = gen_teacher_mlp(30, 7, {5, 5}, 3);
  const models::MlpModel teacher = make_teacher(7, {5, 5}, 3);
  ASSERT_EQ(ds.dim(), 7);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Eigen::VectorXd x = ds.features.row(static_cast<Eigen::Index>(i)).transpose();
    EXPECT_EQ(ds.labels[i], teacher.predict_one(x));
  }
  EXPECT_EQ(ds.labels, ds.clean_labels);
}

TEST(GenTeacher, FeaturesAreStandardNormal) {
  const LabeledDataset ds = gen_teacher_mlp(400, 50, {16}, 8);
  const double mean = ds.features.mean();
  const double var = (ds.features.array() - mean).square().mean();
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(var, 1.0, 0.03);
}

TEST(LoadSmiles, LipophilicityCorpus) {
  const SmilesLoad load = load_smiles_csv(test_support::data_path("lipophilicity.csv"), "smiles", "exp");
  EXPECT_EQ(load.dataset.size() + load.dropped, 4200u);
  EXPECT_EQ(load.dropped, 1u);
  EXPECT_NO_THROW(load.dataset.validate());
}

TEST(LoadSmiles, CountsDropsAndKeepsIds) {
  const auto path = write_temp("drops.csv", "smiles,y\nCCO,1.0\nC1CC,2.0\nc1ccccc1,3.0\nCC,4\nCN,5\n");
  const SmilesLoad load = load_smiles_csv(path, "smiles", "y");
  EXPECT_EQ(load.dropped, 1u);
  EXPECT_EQ(load.dataset.ids, (std::vector<std::int64_t>{0, 2, 3, 4}));
  EXPECT_EQ(load.dataset.labels, (std::vector<double>{1, 3, 4, 5}));
}

TEST(LoadSmiles, TooManyDropsIsDataQualityError) {
  const auto path = write_temp("bad.csv", "smiles,y\nCCO,1\nC1CC,2\nC(,3\nCC,4\n");
  EXPECT_THROW(load_smiles_csv(path, "smiles", "y"), DataQualityError);
}

TEST(LoadSmiles, MissingColumnIsIoError) {
  const auto path = write_temp("cols.csv", "smiles,y\nCCO,1\n");
  EXPECT_THROW(load_smiles_csv(path, "smiles", "logd"), IoError);
  EXPECT_THROW(load_smiles_csv(path, "mol", "y"), IoError);
  EXPECT_THROW(load_smiles_csv(path + ".missing", "smiles", "y"), IoError);
}

TEST(Split, PartitionsIds) {
  const LabeledDataset ds = gen_cubic(103, 0.0, {-1.5, 2.0}, 2);
  const auto [train, val, test] = split(ds, SplitSpec{.seed = 5});
  EXPECT_EQ(val.size(), 10u);
  EXPECT_EQ(test.size(), 10u);
  EXPECT_EQ(train.size(), 83u);
  std::set<std::int64_t> all;
  for (const auto* part : {&train, &val, &test}) {
    EXPECT_TRUE(std::is_sorted(part->ids.begin(), part->ids.end()));
    all.insert(part->ids.begin(), part->ids.end());
  }
  EXPECT_EQ(all.size(), 103u);
}

TEST(Split, DeterministicAndSeedDependent) {
  const LabeledDataset ds = gen_cubic(60, 0.0, {-1.5, 2.0}, 2);
  EXPECT_EQ(std::get<1>(split(ds, SplitSpec{.seed = 1})).ids, std::get<1>(split(ds, SplitSpec{.seed = 1})).ids);
  EXPECT_NE(std::get<1>(split(ds, SplitSpec{.seed = 1})).ids, std::get<1>(split(ds, SplitSpec{.seed = 2})).ids);
}

TEST(Split, RejectsBadFractions) {
  const LabeledDataset ds = gen_cubic(10, 0.0, {-1.5, 2.0}, 2);
  EXPECT_THROW(split(ds, SplitSpec{.train = 0.5, .val = 0.1, .test = 0.1}), ArgumentError);
  EXPECT_THROW(split(ds, SplitSpec{.train = 1.2, .val = -0.2, .test = 0.0}), ArgumentError);
}

TEST(Sensitivity, StrictInequality) {
  const SensitivityPredicate above{0.0, Direction::above};
  const SensitivityPredicate below{0.0, Direction::below};
  EXPECT_FALSE(above(0.0));
  EXPECT_FALSE(below(0.0));
  EXPECT_TRUE(above(1e-300));
  EXPECT_TRUE(below(-1e-300));
}

TEST(DatasetCsv, VectorRoundTripIsExact) {
  const LabeledDataset ds = gen_teacher_mlp(20, 3, {4}, 6);
  const auto back = std::get<LabeledDataset>(read_dataset_csv(to_csv(ds)));
  EXPECT_EQ(back, ds);
}

TEST(DatasetCsv, MolecularRoundTripIsExact) {
  MolecularDataset ds;
  ds.smiles = {"CCO", "c1ccccc1", "C(=O)\"O"};
  ds.labels = {0.1, -2.0 / 3.0, 1e-17};
  ds.clean_labels = {0.1, 0.5, 3.0};
  ds.ids = {4, 7, 9};
  const auto back = std::get<MolecularDataset>(read_dataset_csv(to_csv(ds)));
  EXPECT_EQ(back, ds);
}

TEST(DatasetCsv, EmptyDatasetKeepsHeader) {
  LabeledDataset ds;
  ds.features.resize(0, 2);
  EXPECT_EQ(to_csv(ds), "id,x_0,x_1,label,clean_label\n");
}

TEST(DatasetCsv, MalformedInputIsIoError) {
  EXPECT_THROW(read_dataset_csv("id,label\n1,2\n"), IoError);
  EXPECT_THROW(read_dataset_csv("id,x_0,label,clean_label\n1,abc,2,3\n"), IoError);
  EXPECT_THROW(read_dataset_csv("id,x_0,label,clean_label\nq,1,2,3\n"), IoError);
}
