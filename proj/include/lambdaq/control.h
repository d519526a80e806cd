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

// Encoder-free QP selection for a target PSNR.
//
// Pipeline for one image:
//   1. LE at every anchor q_step of the model set (one DCT pass);
//   2. predicted PSNR at each anchor QP from the pooled PSNR-LE lines;
//   3. lambda of each anchor QP from the encoder's QP-lambda map;
//   4. least-squares PSNR = a log10(lambda) + b over the anchors;
//   5. lambda for the target PSNR;
//   6. QP from that lambda, rounded toward higher quality on ties.

#ifndef LAMBDAQ_CONTROL_H_
#define LAMBDAQ_CONTROL_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lambdaq/models.h"
#include "lambdaq/pixels.h"

namespace lambdaq {

struct AnchorPoint {
  int q_step = 0;
  int qp = 0;
  double le = 0.0;
  double predicted_psnr = 0.0;
  double lambda = 0.0;
};

struct ControlDecision {
  int qp = 0;
  double raw_qp = 0.0;
  double lambda = 0.0;
  double target_psnr = 0.0;
  DLambdaModel dlambda;
  std::vector<AnchorPoint> predicted_points;
  bool clamped = false;
  std::vector<std::string> warnings;
};

// Throws Error for a target outside (0, 100) or when the anchors yield a
// non-decreasing quality model that does not already meet the target.
ControlDecision PredictQp(const LumaPlane& plane, double target_psnr,
                          const PsnrLeModelSet& model_set);

nlohmann::json DecisionToJson(const ControlDecision& decision);

using ControlInput = std::variant<std::filesystem::path, LumaPlane>;

struct BatchItem {
  std::optional<ControlDecision> decision;
  std::string error;  // empty on success

  bool ok() const { return decision.has_value(); }
};

// Same results as calling PredictQp per input; output order follows input
// order for any parallelism. Failures are reported per item.
std::vector<BatchItem> PredictQpBatch(const std::vector<ControlInput>& inputs,
                                      double target_psnr,
                                      const PsnrLeModelSet& model_set,
                                      size_t parallelism = 1);

}  // namespace lambdaq

#endif  // LAMBDAQ_CONTROL_H_
