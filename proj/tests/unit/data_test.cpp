#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "disent/data/dataset.hpp"
#include "disent/data/preprocess.hpp"
#include "disent/numerics/errors.hpp"

using namespace disent;
using namespace disent::data;
namespace fs = std::filesystem;

namespace {

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path path = fs::path(::testing::TempDir()) / name;
  std::ofstream(path) << text;
  return path;
}

RawDataset synthetic(std::size_t normals, std::size_t anomalies, std::size_t width = 3) {
  RawDataset ds;
  ds.name = "synthetic";
  const std::size_t n = normals + anomalies;
  ds.features = Tensor(Shape{n, width});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < width; ++c) ds.features.at(r, c) = static_cast<double>(r * width + c);
    ds.labels.push_back(r >= normals ? 1 : 0);
  }
  return ds;
}

}  // namespace

TEST(LoadCsv, ParsesLabelsAndFeatures) {
  const auto path = write_file("three.csv", "a,b,label\n1,2,0\n3.5,-4,0\n5,6e2,1\n");
  const RawDataset ds = load_csv(path);
  EXPECT_EQ(ds.num_rows(), 3u);
  EXPECT_EQ(ds.num_features(), 2u);
  EXPECT_EQ(ds.num_anomalies(), 1u);
  EXPECT_EQ(ds.features.at(2, 1), 600.0);
  EXPECT_EQ(ds.feature_names, (std::vector<std::string>{"a", "b"}));
}

TEST(LoadCsv, NanCellIsReportedWithLocation) {
  const auto path = write_file("nan.csv", "a,b,label\n1,2,0\n3,NaN,1\n");
  try {
    load_csv(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("row 3"), std::string::npos) << what;
    EXPECT_NE(what.find("'b'"), std::string::npos) << what;
  }
}

TEST(LoadCsv, Errors) {
  EXPECT_THROW(load_csv(write_file("bad_label.csv", "a,label\n1,2\n")), ParseError);
  EXPECT_THROW(load_csv(write_file("text.csv", "a,label\nx,0\n")), ParseError);
  EXPECT_THROW(load_csv(write_file("ragged.csv", "a,b,label\n1,0\n")), ParseError);
  EXPECT_THROW(load_csv(write_file("nolabel.csv", "a,b\n1,0\n")), ParseError);
  EXPECT_THROW(load_csv(fs::path(::testing::TempDir()) / "missing.csv"), Error);
}

TEST(LoadCsv, OptionalLabels) {
  const RawDataset ds =
      load_csv(write_file("unlabeled.csv", "a,b\n1,0\n2,3\n"), "label", LabelMode::kOptional);
  EXPECT_FALSE(ds.has_labels);
  EXPECT_EQ(ds.num_rows(), 2u);
  EXPECT_EQ(ds.num_features(), 2u);
}

TEST(LoadCsv, BundledDatasetsMatchPublishedSizes) {
  const RawDataset breastw = load_csv(fs::path(DISENT_TEST_DATA_DIR) / "breastw.csv");
  EXPECT_EQ(breastw.num_rows(), 683u);
  EXPECT_EQ(breastw.num_features(), 9u);
  EXPECT_EQ(breastw.num_anomalies(), 239u);
  const RawDataset wine = load_csv(fs::path(DISENT_TEST_DATA_DIR) / "wine.csv");
  EXPECT_EQ(wine.num_rows(), 129u);
  EXPECT_EQ(wine.num_features(), 13u);
  EXPECT_EQ(wine.num_anomalies(), 10u);
}

TEST(Split, SmallExample) {
  const DatasetSplit s = split_train_test(synthetic(4, 1), 3);
  EXPECT_EQ(s.train.dim(0), 2u);
  EXPECT_EQ(s.test.dim(0), 3u);
  EXPECT_EQ(std::count(s.test_labels.begin(), s.test_labels.end(), 1), 1);
  EXPECT_THROW(split_train_test(synthetic(1, 3), 0), ContractError);
}

TEST(Split, ThyroidSizedProtocol) {
  const RawDataset ds = synthetic(3772 - 93, 93);
  const DatasetSplit s = split_train_test(ds, 0);
  EXPECT_EQ(s.train_rows.size(), 1839u);
  EXPECT_EQ(s.test_rows.size(), 3772u - 1839u);
  EXPECT_EQ(std::count(s.test_labels.begin(), s.test_labels.end(), 1), 93);

  std::set<std::size_t> all(s.train_rows.begin(), s.train_rows.end());
  all.insert(s.test_rows.begin(), s.test_rows.end());
  EXPECT_EQ(all.size(), 3772u);  // disjoint and covering
  for (std::size_t r : s.train_rows) EXPECT_EQ(ds.labels[r], 0);
}

TEST(Split, DeterministicPerSeedAndSeedsDiffer) {
  const RawDataset ds = synthetic(1000, 10);
  EXPECT_EQ(split_train_test(ds, 5).train_rows, split_train_test(ds, 5).train_rows);
  EXPECT_NE(split_train_test(ds, 5).train_rows, split_train_test(ds, 6).train_rows);
}

TEST(Normalize, Examples) {
  const Tensor train = Tensor::matrix({{0, 7}, {2, 7}});
  const NormalizationStats z = fit_normalization(train);
  const Tensor out = z.apply(train);
  EXPECT_EQ(out.at(0, 0), -1.0);
  EXPECT_EQ(out.at(1, 0), 1.0);
  EXPECT_EQ(out.at(0, 1), 0.0);  // constant attribute
  const Tensor test = z.apply(Tensor::matrix({{5, 100}}));
  EXPECT_EQ(test.at(0, 0), (5.0 - 1.0) / 1.0);
  EXPECT_EQ(test.at(0, 1), 0.0);

  const NormalizationStats mm = fit_normalization(Tensor::matrix({{1, 3}, {3, 3}, {2, 3}}), Scaling::kMinMax);
  const Tensor scaled = mm.apply(Tensor::matrix({{2, 9}}));
  EXPECT_EQ(scaled.at(0, 0), 0.5);
  EXPECT_EQ(scaled.at(0, 1), 0.0);
}

TEST(Normalize, UsesTrainRowsOnly) {
  DatasetSplit s = split_train_test(synthetic(20, 5), 1);
  const DatasetSplit a = normalize(s);
  for (double& v : s.test.values()) v = v * 3.0 - 1000.0;
  const DatasetSplit b = normalize(s);
  EXPECT_EQ(a.normalization.location, b.normalization.location);
  EXPECT_EQ(a.normalization.scale, b.normalization.scale);

  // Test rows recomputed directly from the train statistics.
  for (std::size_t r = 0; r < s.test.dim(0); ++r) {
    for (std::size_t c = 0; c < s.test.dim(1); ++c) {
      const double want = (s.test.at(r, c) - b.normalization.location[c]) / b.normalization.scale[c];
      EXPECT_DOUBLE_EQ(b.test.at(r, c), want);
    }
  }
}

TEST(PatchSplit, ThirtySixAttributes) {
  const PatchLayout layout = patch_layout(36, Preprocessing::kPatch3xM2);
  EXPECT_EQ(layout.length, 18u);
  EXPECT_EQ(layout.offsets, (std::vector<std::size_t>{0, 9, 18}));

  Tensor x(Shape{2, 36});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  const Tensor p = patch_split(x);
  EXPECT_EQ(p.shape(), (Shape{2, 3, 18}));
  EXPECT_EQ(p.at(1, 1, 0), 36.0 + 9.0);
  EXPECT_EQ(p.at(1, 2, 17), 36.0 + 35.0);
}

TEST(PatchSplit, FourAttributes) {
  const PatchLayout layout = patch_layout(4, Preprocessing::kPatch3xM2);
  EXPECT_EQ(layout.length, 2u);
  EXPECT_EQ(layout.offsets, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_THROW(patch_layout(1, Preprocessing::kPatch3xM2), ContractError);
}

TEST(PatchSplit, EveryLayoutCoversAllAttributes) {
  for (Preprocessing kind : {Preprocessing::kPatch3xM2, Preprocessing::kPatch2xM2,
                             Preprocessing::kPatch2x3M4, Preprocessing::kPatch3xM3}) {
    for (std::size_t m = 2; m <= 64; ++m) {
      const PatchLayout layout = patch_layout(m, kind);
      std::vector<bool> covered(m, false);
      for (std::size_t off : layout.offsets) {
        ASSERT_LE(off + layout.length, m);
        for (std::size_t i = off; i < off + layout.length; ++i) covered[i] = true;
      }
      EXPECT_TRUE(std::all_of(covered.begin(), covered.end(), [](bool b) { return b; }))
          << to_string(kind) << " M=" << m;
    }
  }
}

TEST(PatchSplit, ModelInputWithoutPreprocessing) {
  const Tensor x = Tensor::matrix({{1, 2, 3}});
  EXPECT_EQ(to_model_input(x, Preprocessing::kNone).shape(), (Shape{1, 3, 1}));
  EXPECT_EQ(parse_preprocessing("patch_2x3M4"), Preprocessing::kPatch2x3M4);
}

TEST(Contaminate, InjectsExpectedCount) {
  const RawDataset ds = synthetic(200, 30);
  const DatasetSplit s = split_train_test(ds, 4);
  ASSERT_EQ(s.train_rows.size(), 100u);
  EXPECT_EQ(contaminant_count(100, 0.05), 5u);

  const DatasetSplit c = contaminate(s, 0.05, 4);
  EXPECT_EQ(c.train.dim(0), 105u);
  EXPECT_EQ(c.test.dim(0), s.test.dim(0) - 5);
  EXPECT_EQ(std::count(c.train_contaminant.begin(), c.train_contaminant.end(), true), 5);
  EXPECT_EQ(std::count(c.test_labels.begin(), c.test_labels.end(), 1), 25);

  std::set<std::size_t> seen(c.train_rows.begin(), c.train_rows.end());
  for (std::size_t r : c.test_rows) EXPECT_TRUE(seen.insert(r).second) << "row " << r << " duplicated";
  EXPECT_EQ(seen.size(), 230u);
  for (std::size_t i = 0; i < c.train_rows.size(); ++i) {
    EXPECT_EQ(ds.labels[c.train_rows[i]] == 1, c.train_contaminant[i]);
    for (std::size_t col = 0; col < 3; ++col) {
      EXPECT_EQ(c.train.at(i, col), ds.features.at(c.train_rows[i], col));
    }
  }
}

TEST(Contaminate, ZeroRatioAndErrors) {
  const DatasetSplit s = split_train_test(synthetic(200, 2), 4);
  const DatasetSplit same = contaminate(s, 0.0, 1);
  EXPECT_EQ(same.train_rows, s.train_rows);
  EXPECT_EQ(same.test_rows, s.test_rows);
  EXPECT_THROW(contaminate(s, 0.05, 1), ContractError);  // needs 5, has 2
  EXPECT_THROW(contaminate(s, 0.2, 1), ContractError);
}
