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

#include "lambdaq/models.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lambdaq/error.h"

namespace lambdaq {

Line FitLine(std::span<const Point> points) {
  if (points.size() < 2) throw Error("line fit needs at least two points");
  // Sorting fixes the summation order, making the result order-independent.
  std::vector<Point> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Point& l, const Point& r) {
    return l.x != r.x ? l.x < r.x : l.y < r.y;
  });
  const double n = static_cast<double>(pts.size());
  double sx = 0.0, sy = 0.0;
  for (const Point& p : pts) {
    sx += p.x;
    sy += p.y;
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const Point& p : pts) {
    const double dx = p.x - mx;
    const double dy = p.y - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw Error("vertical fit: all x values are equal");
  Line line;
  line.a = sxy / sxx;
  line.b = my - line.a * mx;
  if (pts.size() > 2 && syy > 0.0) {
    double ss_res = 0.0;
    for (const Point& p : pts) {
      const double r = p.y - line.At(p.x);
      ss_res += r * r;
    }
    line.r2 = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return line;
}

// --- QP <-> lambda ----------------------------------------------------------

QpLambdaMap QpLambdaMap::LogLinear(double c1, double c2) {
  if (!(c1 > 0.0) || !std::isfinite(c1) || !std::isfinite(c2)) {
    throw ConfigError("log-linear QP-lambda map requires finite c1 > 0");
  }
  QpLambdaMap map;
  map.kind_ = Kind::kLogLinear;
  map.c1_ = c1;
  map.c2_ = c2;
  return map;
}

QpLambdaMap QpLambdaMap::Table(std::vector<Knot> knots) {
  if (knots.size() < 2) {
    throw ConfigError("table QP-lambda map needs at least two knots");
  }
  for (size_t i = 0; i < knots.size(); ++i) {
    if (!(knots[i].lambda > 0.0) || !std::isfinite(knots[i].qp)) {
      throw ConfigError("table QP-lambda map needs positive lambdas");
    }
    if (i > 0 && (knots[i].qp <= knots[i - 1].qp ||
                  knots[i].lambda <= knots[i - 1].lambda)) {
      throw ConfigError("table QP-lambda map must be strictly increasing");
    }
  }
  QpLambdaMap map;
  map.kind_ = Kind::kTable;
  map.knots_ = std::move(knots);
  return map;
}

QpLambdaMap QpLambdaMap::HevcDefault() { return LogLinear(4.2005, 13.7122); }

double QpLambdaMap::LambdaFromQp(double qp) const {
  if (kind_ == Kind::kLogLinear) return std::exp((qp - c2_) / c1_);
  if (qp < knots_.front().qp || qp > knots_.back().qp) {
    std::ostringstream msg;
    msg << "qp " << qp << " outside QP-lambda table domain ["
        << knots_.front().qp << ", " << knots_.back().qp << "]";
    throw Error(msg.str());
  }
  const auto hi = std::lower_bound(
      knots_.begin(), knots_.end(), qp,
      [](const Knot& k, double v) { return k.qp < v; });
  if (hi->qp == qp) return hi->lambda;
  const auto lo = hi - 1;
  const double t = (qp - lo->qp) / (hi->qp - lo->qp);
  return std::exp(std::log(lo->lambda) +
                  t * (std::log(hi->lambda) - std::log(lo->lambda)));
}

double QpLambdaMap::RawQpFromLambda(double lambda) const {
  if (!(lambda > 0.0)) throw Error("lambda must be positive");
  if (kind_ == Kind::kLogLinear) return c1_ * std::log(lambda) + c2_;
  auto hi = std::lower_bound(
      knots_.begin(), knots_.end(), lambda,
      [](const Knot& k, double v) { return k.lambda < v; });
  if (hi != knots_.end() && hi->lambda == lambda) return hi->qp;
  if (hi == knots_.begin()) ++hi;
  if (hi == knots_.end()) --hi;
  const auto lo = hi - 1;
  const double t = (std::log(lambda) - std::log(lo->lambda)) /
                   (std::log(hi->lambda) - std::log(lo->lambda));
  return lo->qp + t * (hi->qp - lo->qp);
}

QpChoice QpLambdaMap::QpFromLambda(double lambda, QpRange range,
                                   QpRounding rounding) const {
  QpChoice choice;
  choice.raw_qp = RawQpFromLambda(lambda);
  double raw = choice.raw_qp;
  // Snap values that are integers up to round-off so floor/ceil agree with
  // the exact inverse on knots.
  if (std::abs(raw - std::round(raw)) < 1e-9) raw = std::round(raw);
  double rounded = 0.0;
  switch (rounding) {
    case QpRounding::kNearest:
      rounded = std::ceil(raw - 0.5);
      break;
    case QpRounding::kFloor:
      rounded = std::floor(raw);
      break;
    case QpRounding::kCeil:
      rounded = std::ceil(raw);
      break;
  }
  double lo = range.min;
  double hi = range.max;
  if (kind_ == Kind::kTable) {
    lo = std::max(lo, std::ceil(knots_.front().qp));
    hi = std::min(hi, std::floor(knots_.back().qp));
  }
  if (rounded < lo || rounded > hi) {
    choice.clamped = true;
    rounded = std::clamp(rounded, lo, hi);
  }
  choice.qp = static_cast<int>(rounded);
  return choice;
}

QpLambdaMap QpLambdaMapFromJson(const nlohmann::json& ql) {
  try {
    const std::string kind = ql.at("kind").get<std::string>();
    if (kind == "log-linear") {
      return QpLambdaMap::LogLinear(ql.at("c1").get<double>(),
                                    ql.at("c2").get<double>());
    }
    if (kind == "table") {
      std::vector<QpLambdaMap::Knot> knots;
      for (const auto& k : ql.at("table")) {
        if (!k.is_array() || k.size() != 2) {
          throw ConfigError("table rows must be [qp, lambda]");
        }
        knots.push_back({k[0].get<double>(), k[1].get<double>()});
      }
      return QpLambdaMap::Table(std::move(knots));
    }
    throw ConfigError("unknown qp_lambda kind: " + kind);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("malformed qp_lambda: ") + ex.what());
  }
}

nlohmann::json QpLambdaMapToJson(const QpLambdaMap& map) {
  nlohmann::json ql;
  if (map.kind() == QpLambdaMap::Kind::kLogLinear) {
    ql["kind"] = "log-linear";
    ql["c1"] = map.c1();
    ql["c2"] = map.c2();
  } else {
    ql["kind"] = "table";
    nlohmann::json table = nlohmann::json::array();
    for (const auto& k : map.knots()) table.push_back({k.qp, k.lambda});
    ql["table"] = table;
  }
  return ql;
}

// --- Model sets -------------------------------------------------------------

std::vector<int> PsnrLeModelSet::QSteps() const {
  std::vector<int> steps;
  steps.reserve(entries.size());
  for (const PsnrLeEntry& e : entries) steps.push_back(e.q_step);
  return steps;
}

void PsnrLeModelSet::Validate() const {
  if (qp_range.min > qp_range.max) throw ConfigError("empty qp_range");
  if (entries.size() < 2) {
    throw ConfigError("model set needs at least two entries");
  }
  for (size_t i = 0; i < entries.size(); ++i) {
    const PsnrLeEntry& e = entries[i];
    if (e.q_step < 1) throw ConfigError("entry q_step must be >= 1");
    if (i > 0 && e.q_step <= entries[i - 1].q_step) {
      throw ConfigError("entry q_steps must be distinct and increasing");
    }
    if (!qp_range.Contains(e.qp)) {
      throw ConfigError("entry qp " + std::to_string(e.qp) +
                        " outside qp_range");
    }
    if (!std::isfinite(e.line.a) || !std::isfinite(e.line.b)) {
      throw ConfigError("entry line coefficients must be finite");
    }
    if (!(e.line.a < 0.0)) {
      throw ConfigError("entry slope must be negative (PSNR falls with LE)");
    }
  }
}

PsnrLeModelSet ModelSetFromJson(const nlohmann::json& doc) {
  try {
    PsnrLeModelSet set;
    set.encoder_id = doc.at("encoder_id").get<std::string>();
    const auto& range = doc.at("qp_range");
    if (!range.is_array() || range.size() != 2) {
      throw ConfigError("qp_range must be [min, max]");
    }
    set.qp_range = {range[0].get<int>(), range[1].get<int>()};
    set.qp_lambda = QpLambdaMapFromJson(doc.at("qp_lambda"));
    for (const auto& e : doc.at("entries")) {
      PsnrLeEntry entry;
      entry.q_step = e.at("q_step").get<int>();
      entry.qp = e.at("qp").get<int>();
      entry.line.a = e.at("a").get<double>();
      entry.line.b = e.at("b").get<double>();
      if (e.contains("r2") && !e.at("r2").is_null()) {
        entry.line.r2 = e.at("r2").get<double>();
      }
      set.entries.push_back(entry);
    }
    set.Validate();
    return set;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("malformed model set: ") + ex.what());
  }
}

nlohmann::json ModelSetToJson(const PsnrLeModelSet& set) {
  nlohmann::json doc;
  doc["encoder_id"] = set.encoder_id;
  doc["qp_range"] = {set.qp_range.min, set.qp_range.max};
  doc["qp_lambda"] = QpLambdaMapToJson(set.qp_lambda);
  nlohmann::json entries = nlohmann::json::array();
  for (const PsnrLeEntry& e : set.entries) {
    nlohmann::json je;
    je["q_step"] = e.q_step;
    je["qp"] = e.qp;
    je["a"] = e.line.a;
    je["b"] = e.line.b;
    je["r2"] = e.line.r2 ? nlohmann::json(*e.line.r2) : nlohmann::json();
    entries.push_back(je);
  }
  doc["entries"] = entries;
  return doc;
}

PsnrLeModelSet LoadModelSet(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model set " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError("malformed model set " + path.string() + ": " +
                      ex.what());
  }
  return ModelSetFromJson(doc);
}

void SaveModelSet(const std::filesystem::path& path,
                  const PsnrLeModelSet& set) {
  set.Validate();
  std::ofstream out(path);
  if (!out) throw Error("cannot create " + path.string());
  out << ModelSetToJson(set).dump(2) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<QpPsnr> PredictPsnrFromLe(const PsnrLeModelSet& set,
                                      const LeVector& le) {
  std::vector<QpPsnr> out;
  out.reserve(set.entries.size());
  for (const PsnrLeEntry& e : set.entries) {
    out.push_back({e.qp, e.line.At(le.At(e.q_step))});
  }
  return out;
}

// --- D-lambda model ---------------------------------------------------------

DLambdaModel FitDLambda(std::span<const LambdaPsnr> pairs) {
  if (pairs.size() < 2) throw Error("D-lambda fit needs at least two pairs");
  DLambdaModel model;
  for (const LambdaPsnr& p : pairs) {
    if (!(p.lambda > 0.0)) throw Error("lambda must be positive");
    model.source_points.push_back({std::log10(p.lambda), p.psnr});
  }
  model.line = FitLine(model.source_points);
  if (!(model.line.a < 0.0)) {
    throw Error("non-decreasing quality model (a >= 0)");
  }
  return model;
}

double LambdaForTarget(const DLambdaModel& model, double target_psnr) {
  if (!(model.a() < 0.0)) throw Error("D-lambda model requires a < 0");
  return std::pow(10.0, (target_psnr - model.b()) / model.a());
}

MseModel MseModelFromPsnrModel(double a, double b) {
  if (a == 0.0) throw Error("PSNR model slope must be non-zero");
  const double peak_db = 10.0 * std::log10(kPeak * kPeak);
  return {std::pow(10.0, (peak_db - b) / 10.0), -a / 10.0};
}

std::pair<double, double> PsnrModelFromMseModel(const MseModel& model) {
  if (!(model.alpha > 0.0)) throw Error("alpha must be positive");
  const double peak_db = 10.0 * std::log10(kPeak * kPeak);
  return {-10.0 * model.beta, peak_db - 10.0 * std::log10(model.alpha)};
}

}  // namespace lambdaq
