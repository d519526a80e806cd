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

#include "lambdaq/control.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lambdaq/error.h"
#include "lambdaq/transform.h"
#include "parallel.h"

namespace lambdaq {
namespace {

std::string DescribePoints(const std::vector<AnchorPoint>& points) {
  std::ostringstream out;
  for (size_t i = 0; i < points.size(); ++i) {
    if (i > 0) out << ", ";
    out << "(qp " << points[i].qp << ", lambda " << points[i].lambda
        << ", psnr " << points[i].predicted_psnr << ")";
  }
  return out.str();
}

}  // namespace

ControlDecision PredictQp(const LumaPlane& plane, double target_psnr,
                          const PsnrLeModelSet& model_set) {
  if (!(target_psnr > 0.0 && target_psnr < 100.0)) {
    throw Error("target PSNR must lie in (0, 100) dB");
  }
  model_set.Validate();
  const QpLambdaMap& map = model_set.qp_lambda;
  const QpRange range = model_set.qp_range;

  ControlDecision decision;
  decision.target_psnr = target_psnr;

  const std::vector<int> steps = model_set.QSteps();
  const LeVector le = ComputeLe(plane, steps);
  const std::vector<QpPsnr> predicted = PredictPsnrFromLe(model_set, le);

  std::vector<Point> points;
  double lo_psnr = std::numeric_limits<double>::infinity();
  double hi_psnr = -lo_psnr;
  for (size_t i = 0; i < predicted.size(); ++i) {
    AnchorPoint p;
    p.q_step = steps[i];
    p.qp = predicted[i].qp;
    p.le = le.At(steps[i]);
    p.predicted_psnr = predicted[i].psnr;
    p.lambda = map.LambdaFromQp(p.qp);
    decision.predicted_points.push_back(p);
    points.push_back({std::log10(p.lambda), p.predicted_psnr});
    lo_psnr = std::min(lo_psnr, p.predicted_psnr);
    hi_psnr = std::max(hi_psnr, p.predicted_psnr);
  }

  decision.dlambda.source_points = points;
  decision.dlambda.line = FitLine(points);

  if (!(decision.dlambda.a() < 0.0)) {
    // Every anchor already meets the target: the image is easy enough that
    // the coarsest allowed QP is the answer.
    if (lo_psnr >= target_psnr) {
      decision.qp = range.max;
      decision.raw_qp = range.max;
      decision.lambda = map.LambdaFromQp(range.max);
      decision.clamped = true;
      decision.warnings.push_back(
          "non-decreasing quality model; all anchors meet the target, qp set "
          "to qp_max " + std::to_string(range.max));
      return decision;
    }
    throw Error("non-decreasing quality model (a >= 0) from predicted points " +
                DescribePoints(decision.predicted_points));
  }

  if (target_psnr < lo_psnr || target_psnr > hi_psnr) {
    std::ostringstream w;
    w << "target " << target_psnr << " dB outside anchor span [" << lo_psnr
      << ", " << hi_psnr << "] dB; extrapolating";
    decision.warnings.push_back(w.str());
  }

  const double lambda = LambdaForTarget(decision.dlambda, target_psnr);
  QpChoice choice;
  if (lambda > 0.0 && std::isfinite(lambda)) {
    decision.lambda = lambda;
    choice = map.QpFromLambda(lambda, range);
  } else {
    // Exponent over/underflow: clamp straight to the end of the range.
    const bool high = lambda > 0.0;
    choice.qp = high ? range.max : range.min;
    choice.raw_qp = high ? std::numeric_limits<double>::infinity()
                         : -std::numeric_limits<double>::infinity();
    choice.clamped = true;
    decision.lambda = map.LambdaFromQp(choice.qp);
    decision.warnings.push_back("lambda for target is not representable");
  }
  decision.qp = choice.qp;
  decision.raw_qp = choice.raw_qp;
  decision.clamped = choice.clamped;
  if (choice.clamped) {
    std::ostringstream w;
    w << "qp " << choice.raw_qp << " clamped to " << choice.qp << " (range ["
      << range.min << ", " << range.max << "])";
    decision.warnings.push_back(w.str());
  }
  return decision;
}

nlohmann::json DecisionToJson(const ControlDecision& d) {
  nlohmann::json doc;
  doc["qp"] = d.qp;
  doc["raw_qp"] = std::isfinite(d.raw_qp) ? nlohmann::json(d.raw_qp)
                                          : nlohmann::json();
  doc["lambda"] = d.lambda;
  doc["target_psnr"] = d.target_psnr;
  doc["a"] = d.dlambda.a();
  doc["b"] = d.dlambda.b();
  doc["r2"] = d.dlambda.line.r2 ? nlohmann::json(*d.dlambda.line.r2)
                                : nlohmann::json();
  nlohmann::json pts = nlohmann::json::array();
  for (const AnchorPoint& p : d.predicted_points) {
    pts.push_back({{"q_step", p.q_step},
                   {"qp", p.qp},
                   {"le", p.le},
                   {"predicted_psnr", p.predicted_psnr},
                   {"lambda", p.lambda}});
  }
  doc["predicted_points"] = pts;
  doc["clamped"] = d.clamped;
  doc["warnings"] = d.warnings;
  return doc;
}

std::vector<BatchItem> PredictQpBatch(const std::vector<ControlInput>& inputs,
                                      double target_psnr,
                                      const PsnrLeModelSet& model_set,
                                      size_t parallelism) {
  if (inputs.empty()) throw Error("batch input list is empty");
  std::vector<BatchItem> out(inputs.size());
  internal::ParallelFor(inputs.size(), parallelism, [&](size_t i) {
    try {
      if (const auto* path = std::get_if<std::filesystem::path>(&inputs[i])) {
        out[i].decision = PredictQp(LoadLuma(*path), target_psnr, model_set);
      } else {
        out[i].decision =
            PredictQp(std::get<LumaPlane>(inputs[i]), target_psnr, model_set);
      }
    } catch (const std::exception& ex) {
      out[i].error = ex.what();
    }
  });
  return out;
}

}  // namespace lambdaq
