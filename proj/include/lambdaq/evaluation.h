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

#ifndef LAMBDAQ_EVALUATION_H_
#define LAMBDAQ_EVALUATION_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lambdaq/control.h"
#include "lambdaq/encoders.h"
#include "lambdaq/models.h"

namespace lambdaq {

// |mean - target| / target * 100. Measures mean bias, not spread.
double DiffPercent(std::span<const double> psnrs, double target);

// sum (target - psnr_i)^2 / (N - 1): centered on the target, not the
// sample mean. Requires N >= 2.
double QualityVariance(std::span<const double> psnrs, double target);

// Fraction of values strictly below `threshold`.
double BadCaseRatio(std::span<const double> psnrs, double threshold);

struct HistogramSpec {
  double low = 0.0;
  double high = 0.0;
  double width = 0.5;

  // [target - 5, target + 5] in 0.5 dB bins.
  static HistogramSpec AroundTarget(double target);
};

struct HistogramBin {
  double low = 0.0;   // -inf for the underflow bin
  double high = 0.0;  // +inf for the overflow bin
  size_t count = 0;
};

// Bins are [low, high); the first and last rows collect values outside
// the given range so that counts always sum to the input size.
std::vector<HistogramBin> Histogram(std::span<const double> values,
                                    const HistogramSpec& spec);

struct EvalInput {
  std::string image_id;
  std::variant<std::filesystem::path, LumaPlane> source;
};

struct EvalImage {
  std::string image_id;
  int qp = 0;
  double achieved_psnr = 0.0;
  bool clamped = false;
  std::optional<uint64_t> bytes;
  size_t pixels = 0;
};

struct EvalFailure {
  std::string image_id;
  std::string message;
};

struct EvalReport {
  double target_psnr = 0.0;
  double bad_case_threshold = 0.0;
  std::vector<EvalImage> per_image;  // successful images, input order
  std::vector<EvalFailure> failures;
  double mean_psnr = 0.0;
  double diff_percent = 0.0;
  std::optional<double> variance;  // needs >= 2 images
  double bad_case_ratio = 0.0;
  size_t clamped_count = 0;
  // total bytes * 8 / total pixels, only when every image reports bytes.
  std::optional<double> mean_bitrate_bpp;
  std::vector<HistogramBin> histogram;
};

struct EvalOptions {
  // Defaults to target - 1 dB.
  std::optional<double> bad_case_threshold;
  // Defaults to HistogramSpec::AroundTarget.
  std::optional<HistogramSpec> histogram;
  size_t parallelism = 1;
  std::filesystem::path workdir;
};

// Predicts a QP per image, encodes with it and measures the result.
// Throws Error if the corpus is empty or every image fails.
EvalReport Evaluate(std::span<const EvalInput> corpus, double target_psnr,
                    const PsnrLeModelSet& model_set, const Encoder& encoder,
                    const EvalOptions& options = {});

struct TargetSweep {
  std::vector<EvalReport> reports;  // one per target
  double mean_diff_percent = 0.0;
  std::optional<double> mean_variance;
};

TargetSweep EvaluateTargets(std::span<const EvalInput> corpus,
                            std::span<const double> targets,
                            const PsnrLeModelSet& model_set,
                            const Encoder& encoder,
                            const EvalOptions& options = {});

// Averages across several image sets: per target, once with every image
// weighted equally (pooled) and once with every set weighted equally.
struct SetAverages {
  double image_weighted_diff_percent = 0.0;
  std::optional<double> image_weighted_variance;
  double set_weighted_diff_percent = 0.0;
  std::optional<double> set_weighted_variance;
};

SetAverages CombineSets(std::span<const TargetSweep> sets);

void WriteEvalCsv(const std::filesystem::path& path,
                  std::span<const EvalReport> reports);
// bin_low,bin_high,count for one target.
void WriteHistogramCsv(const std::filesystem::path& path,
                       const EvalReport& report);
nlohmann::json ReportToJson(const EvalReport& report);

}  // namespace lambdaq

#endif  // LAMBDAQ_EVALUATION_H_
