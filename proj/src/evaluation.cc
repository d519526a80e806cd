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
#include <fstream>
#include <limits>

#include "lambdaq/error.h"
#include "lambdaq/text.h"
#include "parallel.h"

namespace lambdaq {
namespace fs = std::filesystem;

namespace {

double Mean(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

}  // namespace

double DiffPercent(std::span<const double> psnrs, double target) {
  if (psnrs.empty()) throw Error("diff_percent of an empty list");
  if (!(target > 0.0)) throw Error("target PSNR must be positive");
  return std::abs(Mean(psnrs) - target) / target * 100.0;
}

double QualityVariance(std::span<const double> psnrs, double target) {
  if (psnrs.size() < 2) throw Error("quality variance needs at least 2 values");
  double sum = 0.0;
  for (double p : psnrs) sum += (target - p) * (target - p);
  return sum / static_cast<double>(psnrs.size() - 1);
}

double BadCaseRatio(std::span<const double> psnrs, double threshold) {
  if (psnrs.empty()) throw Error("bad_case_ratio of an empty list");
  size_t bad = 0;
  for (double p : psnrs) bad += p < threshold ? 1 : 0;
  return static_cast<double>(bad) / static_cast<double>(psnrs.size());
}

HistogramSpec HistogramSpec::AroundTarget(double target) {
  return {target - 5.0, target + 5.0, 0.5};
}

std::vector<HistogramBin> Histogram(std::span<const double> values,
                                    const HistogramSpec& spec) {
  if (!(spec.width > 0.0) || !(spec.high > spec.low)) {
    throw Error("histogram needs high > low and width > 0");
  }
  const auto bins =
      static_cast<size_t>(std::ceil((spec.high - spec.low) / spec.width - 1e-9));
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<HistogramBin> out;
  out.push_back({-kInf, spec.low, 0});
  for (size_t i = 0; i < bins; ++i) {
    out.push_back({spec.low + i * spec.width,
                   std::min(spec.low + (i + 1) * spec.width, spec.high), 0});
  }
  out.push_back({spec.high, kInf, 0});
  for (double v : values) {
    if (v < spec.low) {
      ++out.front().count;
    } else if (v >= spec.high) {
      ++out.back().count;
    } else {
      size_t idx = static_cast<size_t>((v - spec.low) / spec.width);
      idx = std::min(idx, bins - 1);
      // Guard floating edges so bins stay half-open.
      while (idx > 0 && v < out[idx + 1].low) --idx;
      while (idx + 1 < bins && v >= out[idx + 1].high) ++idx;
      ++out[idx + 1].count;
    }
  }
  return out;
}

EvalReport Evaluate(std::span<const EvalInput> corpus, double target_psnr,
                    const PsnrLeModelSet& model_set, const Encoder& encoder,
                    const EvalOptions& options) {
  if (corpus.empty()) throw Error("evaluation corpus is empty");
  struct Slot {
    std::optional<EvalImage> image;
    std::string error;
  };
  std::vector<Slot> slots(corpus.size());
  internal::ParallelFor(corpus.size(), options.parallelism, [&](size_t i) {
    const EvalInput& in = corpus[i];
    try {
      LumaPlane loaded;
      const LumaPlane* plane = std::get_if<LumaPlane>(&in.source);
      if (plane == nullptr) {
        loaded = LoadLuma(std::get<fs::path>(in.source));
        plane = &loaded;
      }
      const ControlDecision d = PredictQp(*plane, target_psnr, model_set);
      const EncodeResult enc = encoder.Encode(*plane, d.qp, options.workdir);
      slots[i].image =
          EvalImage{in.image_id, d.qp, enc.psnr, d.clamped, enc.bytes,
                    plane->size()};
    } catch (const std::exception& ex) {
      slots[i].error = ex.what();
    }
  });

  EvalReport report;
  report.target_psnr = target_psnr;
  report.bad_case_threshold =
      options.bad_case_threshold.value_or(target_psnr - 1.0);
  for (size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].image) {
      report.per_image.push_back(*slots[i].image);
    } else {
      report.failures.push_back({corpus[i].image_id, slots[i].error});
    }
  }
  if (report.per_image.empty()) {
    throw Error("every image failed evaluation; first error: " +
                report.failures.front().message);
  }
  std::vector<double> psnrs;
  bool all_bytes = true;
  uint64_t total_bytes = 0;
  uint64_t total_pixels = 0;
  for (const EvalImage& img : report.per_image) {
    psnrs.push_back(img.achieved_psnr);
    report.clamped_count += img.clamped ? 1 : 0;
    all_bytes = all_bytes && img.bytes.has_value();
    total_bytes += img.bytes.value_or(0);
    total_pixels += img.pixels;
  }
  report.mean_psnr = Mean(psnrs);
  report.diff_percent = DiffPercent(psnrs, target_psnr);
  if (psnrs.size() >= 2) report.variance = QualityVariance(psnrs, target_psnr);
  report.bad_case_ratio = BadCaseRatio(psnrs, report.bad_case_threshold);
  if (all_bytes && total_pixels > 0) {
    report.mean_bitrate_bpp = static_cast<double>(total_bytes) * 8.0 /
                              static_cast<double>(total_pixels);
  }
  report.histogram = Histogram(
      psnrs, options.histogram.value_or(HistogramSpec::AroundTarget(target_psnr)));
  return report;
}

TargetSweep EvaluateTargets(std::span<const EvalInput> corpus,
                            std::span<const double> targets,
                            const PsnrLeModelSet& model_set,
                            const Encoder& encoder,
                            const EvalOptions& options) {
  if (targets.empty()) throw Error("no target PSNRs given");
  // Decode files once for the whole sweep.
  std::vector<EvalInput> planes;
  planes.reserve(corpus.size());
  std::vector<EvalFailure> load_failures;
  for (const EvalInput& in : corpus) {
    if (const auto* path = std::get_if<fs::path>(&in.source)) {
      try {
        planes.push_back({in.image_id, LoadLuma(*path)});
      } catch (const std::exception& ex) {
        load_failures.push_back({in.image_id, ex.what()});
      }
    } else {
      planes.push_back(in);
    }
  }
  if (planes.empty()) {
    throw Error("no readable images in the corpus; first error: " +
                load_failures.front().message);
  }
  TargetSweep sweep;
  double diff_sum = 0.0;
  double var_sum = 0.0;
  size_t var_count = 0;
  for (double target : targets) {
    EvalReport r = Evaluate(planes, target, model_set, encoder, options);
    r.failures.insert(r.failures.begin(), load_failures.begin(),
                      load_failures.end());
    diff_sum += r.diff_percent;
    if (r.variance) {
      var_sum += *r.variance;
      ++var_count;
    }
    sweep.reports.push_back(std::move(r));
  }
  sweep.mean_diff_percent = diff_sum / static_cast<double>(targets.size());
  if (var_count > 0) sweep.mean_variance = var_sum / static_cast<double>(var_count);
  return sweep;
}

SetAverages CombineSets(std::span<const TargetSweep> sets) {
  if (sets.empty()) throw Error("no evaluation sets to combine");
  const size_t targets = sets.front().reports.size();
  for (const TargetSweep& s : sets) {
    if (s.reports.size() != targets) {
      throw Error("evaluation sets use different target lists");
    }
  }
  SetAverages avg;
  double pooled_diff = 0.0;
  double pooled_var = 0.0;
  size_t pooled_var_n = 0;
  for (size_t t = 0; t < targets; ++t) {
    std::vector<double> psnrs;
    const double target = sets.front().reports[t].target_psnr;
    for (const TargetSweep& s : sets) {
      for (const EvalImage& img : s.reports[t].per_image) {
        psnrs.push_back(img.achieved_psnr);
      }
    }
    pooled_diff += DiffPercent(psnrs, target);
    if (psnrs.size() >= 2) {
      pooled_var += QualityVariance(psnrs, target);
      ++pooled_var_n;
    }
  }
  avg.image_weighted_diff_percent = pooled_diff / static_cast<double>(targets);
  if (pooled_var_n > 0) {
    avg.image_weighted_variance = pooled_var / static_cast<double>(pooled_var_n);
  }
  double set_diff = 0.0;
  double set_var = 0.0;
  size_t set_var_n = 0;
  for (const TargetSweep& s : sets) {
    set_diff += s.mean_diff_percent;
    if (s.mean_variance) {
      set_var += *s.mean_variance;
      ++set_var_n;
    }
  }
  avg.set_weighted_diff_percent = set_diff / static_cast<double>(sets.size());
  if (set_var_n > 0) avg.set_weighted_variance = set_var / static_cast<double>(set_var_n);
  return avg;
}

void WriteEvalCsv(const fs::path& path, std::span<const EvalReport> reports) {
  std::ofstream out(path);
  if (!out) throw Error("cannot create " + path.string());
  out << "target_psnr,image_id,qp,achieved_psnr,clamped,bytes\n";
  for (const EvalReport& r : reports) {
    for (const EvalImage& img : r.per_image) {
      out << FormatDouble(r.target_psnr) << ',' << img.image_id << ','
          << img.qp << ',' << FormatDouble(img.achieved_psnr) << ','
          << (img.clamped ? 1 : 0) << ',';
      if (img.bytes) out << *img.bytes;
      out << '\n';
    }
  }
  if (!out) throw Error("write failed: " + path.string());
}

void WriteHistogramCsv(const fs::path& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw Error("cannot create " + path.string());
  out << "bin_low,bin_high,count\n";
  for (const HistogramBin& b : report.histogram) {
    out << FormatDouble(b.low) << ',' << FormatDouble(b.high) << ','
        << b.count << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

nlohmann::json ReportToJson(const EvalReport& r) {
  nlohmann::json doc;
  doc["target_psnr"] = r.target_psnr;
  doc["bad_case_threshold"] = r.bad_case_threshold;
  doc["images"] = r.per_image.size();
  doc["mean_psnr"] = r.mean_psnr;
  doc["diff_percent"] = r.diff_percent;
  doc["variance"] = r.variance ? nlohmann::json(*r.variance) : nlohmann::json();
  doc["bad_case_ratio"] = r.bad_case_ratio;
  doc["clamped"] = r.clamped_count;
  doc["mean_bitrate_bpp"] = r.mean_bitrate_bpp
                                ? nlohmann::json(*r.mean_bitrate_bpp)
                                : nlohmann::json();
  nlohmann::json failures = nlohmann::json::array();
  for (const EvalFailure& f : r.failures) {
    failures.push_back({{"image_id", f.image_id}, {"error", f.message}});
  }
  doc["failures"] = failures;
  return doc;
}

}  // namespace lambdaq
