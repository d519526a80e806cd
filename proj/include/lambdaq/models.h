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

// Linear model machinery: least-squares lines, the content-independent
// PSNR-LE anchor set of an encoder, the per-image PSNR-log10(lambda) model
// and the QP <-> lambda mappings that connect them.

#ifndef LAMBDAQ_MODELS_H_
#define LAMBDAQ_MODELS_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lambdaq/transform.h"

namespace lambdaq {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// y = a x + b.
struct Line {
  double a = 0.0;
  double b = 0.0;
  // Absent for two-point fits and when y has no variance.
  std::optional<double> r2;

  double At(double x) const { return a * x + b; }
};

// Ordinary least squares. Throws Error("vertical fit") when all x are
// equal and Error when fewer than two points are given. The result does
// not depend on point order.
Line FitLine(std::span<const Point> points);

struct QpRange {
  int min = 0;
  int max = 0;
  bool Contains(int qp) const { return qp >= min && qp <= max; }
  bool operator==(const QpRange&) const = default;
};

enum class QpRounding {
  kNearest,  // ties go to the lower QP (higher quality)
  kFloor,
  kCeil,
};

struct QpChoice {
  int qp = 0;
  double raw_qp = 0.0;  // before rounding and clamping
  bool clamped = false;
};

class QpLambdaMap {
 public:
  enum class Kind { kLogLinear, kTable };

  struct Knot {
    double qp = 0.0;
    double lambda = 0.0;
  };

  // QP = c1 ln(lambda) + c2. Requires c1 > 0.
  static QpLambdaMap LogLinear(double c1, double c2);
  // Knots with strictly increasing qp and lambda; log-lambda is linear
  // between knots.
  static QpLambdaMap Table(std::vector<Knot> knots);
  // The HEVC recommended relation, c1 = 4.2005, c2 = 13.7122.
  static QpLambdaMap HevcDefault();

  Kind kind() const { return kind_; }
  double c1() const { return c1_; }
  double c2() const { return c2_; }
  const std::vector<Knot>& knots() const { return knots_; }

  // Throws Error for table maps when qp lies outside the knots.
  double LambdaFromQp(double qp) const;
  // Real-valued inverse. Table maps extrapolate along the end segments.
  double RawQpFromLambda(double lambda) const;
  // Rounded inverse, clamped to `range` (and to the table domain).
  QpChoice QpFromLambda(double lambda, QpRange range,
                        QpRounding rounding = QpRounding::kNearest) const;

 private:
  Kind kind_ = Kind::kLogLinear;
  double c1_ = 0.0;
  double c2_ = 0.0;
  std::vector<Knot> knots_;
};

// {"kind": "log-linear", "c1", "c2"} or {"kind": "table", "table": [[qp, lambda], ...]}.
QpLambdaMap QpLambdaMapFromJson(const nlohmann::json& doc);
nlohmann::json QpLambdaMapToJson(const QpLambdaMap& map);

struct PsnrLeEntry {
  int q_step = 0;
  int qp = 0;
  Line line;  // PSNR as a function of LE at (q_step, qp)
};

struct PsnrLeModelSet {
  std::string encoder_id;
  QpRange qp_range;
  QpLambdaMap qp_lambda = QpLambdaMap::HevcDefault();
  std::vector<PsnrLeEntry> entries;

  std::vector<int> QSteps() const;
  // Throws ConfigError on any broken invariant.
  void Validate() const;
};

PsnrLeModelSet ModelSetFromJson(const nlohmann::json& doc);
nlohmann::json ModelSetToJson(const PsnrLeModelSet& set);
PsnrLeModelSet LoadModelSet(const std::filesystem::path& path);
void SaveModelSet(const std::filesystem::path& path, const PsnrLeModelSet& set);

struct QpPsnr {
  int qp = 0;
  double psnr = 0.0;
};

// One predicted (qp, PSNR) pair per entry, PSNR = a LE(q_step) + b.
std::vector<QpPsnr> PredictPsnrFromLe(const PsnrLeModelSet& set,
                                      const LeVector& le);

struct LambdaPsnr {
  double lambda = 0.0;
  double psnr = 0.0;
};

// PSNR = a log10(lambda) + b for one image.
struct DLambdaModel {
  Line line;
  std::vector<Point> source_points;  // (log10 lambda, PSNR)

  double a() const { return line.a; }
  double b() const { return line.b; }
};

// Throws Error("non-decreasing quality model") if the fitted a >= 0.
DLambdaModel FitDLambda(std::span<const LambdaPsnr> pairs);

// lambda = 10^((target - b) / a). Requires a < 0.
double LambdaForTarget(const DLambdaModel& model, double target_psnr);

// D = alpha * lambda^beta, D in MSE.
struct MseModel {
  double alpha = 0.0;
  double beta = 0.0;
};

MseModel MseModelFromPsnrModel(double a, double b);
std::pair<double, double> PsnrModelFromMseModel(const MseModel& model);

}  // namespace lambdaq

#endif  // LAMBDAQ_MODELS_H_
