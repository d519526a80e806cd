// Copyright 2026 The lambdaq Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lambdaq/evaluation.h"

#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "lambdaq/corpus.h"
#include "lambdaq/error.h"
#include "test_util.h"

namespace lambdaq {
namespace {

const double kPeakDb = 10.0 * std::log10(65025.0);

PsnrLeModelSet ReferenceModel() {
  PsnrLeModelSet s;
  s.encoder_id = "reference";
  s.qp_range = kReferenceQpRange;
  s.entries = {{8, 22, {-10.0, kPeakDb, 1.0}},
               {16, 28, {-10.0, kPeakDb, 1.0}},
               {32, 34, {-10.0, kPeakDb, 1.0}}};
  return s;
}

using V = std::vector<double>;

TEST(DiffPercentTest, Examples) {
  EXPECT_EQ(DiffPercent(V{40, 40}, 40), 0.0);
  EXPECT_EQ(DiffPercent(V{39, 41}, 40), 0.0);
  EXPECT_DOUBLE_EQ(DiffPercent(V{41}, 40), 2.5);
  EXPECT_THROW(DiffPercent(V{}, 40), Error);
  EXPECT_THROW(DiffPercent(V{40}, 0), Error);
}

TEST(QualityVarianceTest, Examples) {
  EXPECT_EQ(QualityVariance(V{40, 40}, 40), 0.0);
  EXPECT_EQ(QualityVariance(V{39, 41}, 40), 2.0);
  EXPECT_EQ(QualityVariance(V{42, 42}, 40), 8.0);
  EXPECT_THROW(QualityVariance(V{40}, 40), Error);
}

TEST(BadCaseRatioTest, Examples) {
  EXPECT_EQ(BadCaseRatio(V{38.5, 39.5, 40}, 39), 1.0 / 3.0);
  EXPECT_EQ(BadCaseRatio(V{39, 39}, 39), 0.0);
  EXPECT_EQ(BadCaseRatio(V{30, 31}, 39), 1.0);
  EXPECT_THROW(BadCaseRatio(V{}, 39), Error);
}

TEST(MetricPropertyTest, VarianceBoundsSquaredBias) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(40.0, 1.5);
  for (int t = 0; t < 200; ++t) {
    V v(2 + t % 9);
    for (double& x : v) x = n(rng);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    const double bias = mean - 40.0;
    const double nn = static_cast<double>(v.size());
    EXPECT_GE(QualityVariance(v, 40.0) + 1e-12, nn / (nn - 1) * bias * bias);
    EXPECT_GE(DiffPercent(v, 40.0), 0.0);
    const double ratio = BadCaseRatio(v, 39.0);
    EXPECT_GE(ratio, 0.0);
    EXPECT_LE(ratio, 1.0);
  }
}

TEST(MetricPropertyTest, AllOnTargetIsZero) {
  EXPECT_EQ(QualityVariance(V(17, 37.5), 37.5), 0.0);
}

TEST(HistogramTest, BinsAndOverflow) {
  const V values{34.0, 35.0, 35.49, 35.5, 44.99, 45.0, 50.0};
  const auto bins = Histogram(values, HistogramSpec::AroundTarget(40.0));
  ASSERT_EQ(bins.size(), 22u);
  EXPECT_TRUE(std::isinf(bins.front().low));
  EXPECT_EQ(bins.front().count, 1u);
  EXPECT_EQ(bins[1].low, 35.0);
  EXPECT_EQ(bins[1].count, 2u);
  EXPECT_EQ(bins[2].count, 1u);
  EXPECT_EQ(bins[20].count, 1u);
  EXPECT_EQ(bins.back().count, 2u);
  size_t total = 0;
  for (const auto& b : bins) total += b.count;
  EXPECT_EQ(total, values.size());
}

TEST(HistogramTest, InvalidSpec) {
  EXPECT_THROW(Histogram(V{1}, {1.0, 1.0, 0.5}), Error);
  EXPECT_THROW(Histogram(V{1}, {0.0, 1.0, 0.0}), Error);
}

TEST(EvaluateTest, SingleFlatImage) {
  const std::vector<EvalInput> corpus{{"flat", LumaPlane::Filled(32, 32, 128)}};
  const EvalReport r = Evaluate(corpus, 40.0, ReferenceModel(), ReferenceEncoder());
  ASSERT_EQ(r.per_image.size(), 1u);
  EXPECT_EQ(r.per_image[0].achieved_psnr, 10.0 * std::log10(65025.0 / 1e-4));
  EXPECT_TRUE(r.per_image[0].clamped);
  EXPECT_EQ(r.clamped_count, 1u);
  EXPECT_FALSE(r.variance.has_value());
  EXPECT_FALSE(r.mean_bitrate_bpp.has_value());
}

TEST(EvaluateTest, FailuresAreReported) {
  test::TempDir dir;
  const std::vector<EvalInput> corpus{
      {"ok", MakeBandLimitedNoise(32, 32, 20, 1, 1)},
      {"missing", dir / "missing.pgm"}};
  const EvalReport r = Evaluate(corpus, 40.0, ReferenceModel(), ReferenceEncoder());
  EXPECT_EQ(r.per_image.size(), 1u);
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].image_id, "missing");
  EXPECT_THROW(Evaluate({}, 40.0, ReferenceModel(), ReferenceEncoder()), Error);
}

TEST(EvaluateTest, DefaultThresholdAndHistogramTotal) {
  std::vector<EvalInput> corpus;
  for (uint64_t i = 0; i < 8; ++i) {
    corpus.push_back({std::to_string(i), MakeBandLimitedNoise(48, 48, 16 + 4 * i, 1, i)});
  }
  const EvalReport r = Evaluate(corpus, 38.0, ReferenceModel(), ReferenceEncoder());
  EXPECT_EQ(r.bad_case_threshold, 37.0);
  size_t total = 0;
  for (const auto& b : r.histogram) total += b.count;
  EXPECT_EQ(total, r.per_image.size());
}

TEST(EvaluateTest, SyntheticCorpusAccuracy) {
  std::vector<EvalInput> corpus;
  for (const NamedPlane& p : GenerateCorpus(21, 20, 64, 64, CorpusMix::kTextured)) {
    corpus.push_back({p.name, p.plane});
  }
  std::vector<double> targets;
  for (int t = 35; t <= 45; ++t) targets.push_back(t);
  const TargetSweep sweep =
      EvaluateTargets(corpus, targets, ReferenceModel(), ReferenceEncoder());
  EXPECT_LE(sweep.mean_diff_percent, 0.5);
  ASSERT_EQ(sweep.reports.size(), targets.size());
}

TEST(CombineSetsTest, ImageAndSetWeighting) {
  auto report = [](double target, V psnrs) {
    EvalReport r;
    r.target_psnr = target;
    for (double p : psnrs) r.per_image.push_back({"", 0, p, false, {}, 0});
    r.diff_percent = DiffPercent(psnrs, target);
    if (psnrs.size() > 1) r.variance = QualityVariance(psnrs, target);
    return r;
  };
  TargetSweep a{{report(40, {41, 41, 41})}, DiffPercent(V{41, 41, 41}, 40), 1.5};
  TargetSweep b{{report(40, {40})}, 0.0, std::nullopt};
  const TargetSweep sets[] = {a, b};
  const SetAverages avg = CombineSets(sets);
  EXPECT_DOUBLE_EQ(avg.image_weighted_diff_percent, DiffPercent(V{41, 41, 41, 40}, 40));
  EXPECT_DOUBLE_EQ(avg.set_weighted_diff_percent, 2.5 / 2);
  EXPECT_DOUBLE_EQ(*avg.image_weighted_variance, QualityVariance(V{41, 41, 41, 40}, 40));
  EXPECT_DOUBLE_EQ(*avg.set_weighted_variance, 1.5);
}

TEST(ReportFilesTest, CsvHeaders) {
  test::TempDir dir;
  const std::vector<EvalInput> corpus{{"n", MakeBandLimitedNoise(32, 32, 20, 1, 2)}};
  const EvalReport r = Evaluate(corpus, 40.0, ReferenceModel(), ReferenceEncoder());
  WriteEvalCsv(dir / "e.csv", std::vector<EvalReport>{r});
  WriteHistogramCsv(dir / "h.csv", r);
  EXPECT_EQ(test::ReadFile(dir / "e.csv").rfind(
                "target_psnr,image_id,qp,achieved_psnr,clamped,bytes\n40,n,", 0),
            0u);
  EXPECT_EQ(test::ReadFile(dir / "h.csv").rfind("bin_low,bin_high,count\n-inf,35,", 0), 0u);
  const nlohmann::json j = ReportToJson(r);
  EXPECT_EQ(j["images"], 1);
  EXPECT_TRUE(j["variance"].is_null());
}

}  // namespace
}  // namespace lambdaq
