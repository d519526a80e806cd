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

#ifndef LAMBDAQ_ENCODERS_H_
#define LAMBDAQ_ENCODERS_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lambdaq/error.h"
#include "lambdaq/models.h"
#include "lambdaq/pixels.h"
#include "lambdaq/transform.h"

namespace lambdaq {

struct EncodeResult {
  int qp = 0;
  double psnr = 0.0;  // luma, recomputed from decoded pixels
  std::optional<double> lambda;
  std::optional<uint64_t> bytes;
};

// A fixed-QP still-image encoder.
class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual const std::string& id() const = 0;
  virtual QpRange qp_range() const = 0;
  // QP-lambda relation to record in trained model sets.
  virtual QpLambdaMap qp_lambda() const = 0;
  // `workdir` is a scratch directory; implementations create a private
  // subdirectory in it, so concurrent calls may share the same root.
  virtual EncodeResult Encode(const LumaPlane& plane, int qp,
                              const std::filesystem::path& workdir) const = 0;
};

// --- Built-in reference encoder ---------------------------------------------
//
// Quantizes every 8x8 DCT coefficient to the nearest multiple of
// q_step = 2^((qp - 4) / 6) and reconstructs without clamping. Its MSE is by
// construction the centered LE statistic at that step.

inline constexpr QpRange kReferenceQpRange{4, 40};

double ReferenceQStep(int qp);

// Reconstruction of each block after uniform quantization.
std::vector<SampleBlock> QuantizeReconstruct(std::span<const CoeffBlock> coeffs,
                                             double q_step);

// MSE over the padded block canvas (every pixel of every 8x8 block).
double ReconstructionMse(std::span<const PixelBlock> blocks,
                         std::span<const SampleBlock> recon);

// Throws Error if qp is outside [4, 40].
EncodeResult ReferenceEncode(const LumaPlane& plane, int qp);

class ReferenceEncoder final : public Encoder {
 public:
  const std::string& id() const override { return id_; }
  QpRange qp_range() const override { return kReferenceQpRange; }
  QpLambdaMap qp_lambda() const override { return QpLambdaMap::HevcDefault(); }
  EncodeResult Encode(const LumaPlane& plane, int qp,
                      const std::filesystem::path& workdir) const override;

 private:
  std::string id_ = "reference";
};

// --- External process adapters ----------------------------------------------

struct AdapterConfig {
  std::string encoder_id;
  QpRange qp_range;
  // Placeholders: {input} {output} {qp} {width} {height}.
  std::string encode_cmd;
  // When set, {input} is the encoder's output and {output} the decoded image.
  std::optional<std::string> decode_cmd;
  double timeout_s = 120.0;
  // Image formats exchanged with the commands: "pgm", "png" or "y8".
  std::string input_format = "pgm";
  std::string decoded_format = "pgm";
  std::optional<QpLambdaMap> qp_lambda;
};

AdapterConfig AdapterConfigFromJson(const nlohmann::json& doc);
AdapterConfig LoadAdapterConfig(const std::filesystem::path& path);

class ProcessError : public Error {
 public:
  ProcessError(const std::string& what, int exit_code, std::string output_tail)
      : Error(what), exit_code_(exit_code), output_tail_(std::move(output_tail)) {}

  // -1 on timeout or abnormal termination.
  int exit_code() const { return exit_code_; }
  const std::string& output_tail() const { return output_tail_; }

 private:
  int exit_code_;
  std::string output_tail_;
};

struct ProcessResult {
  int exit_code = 0;
  bool timed_out = false;
  std::string output;  // combined stdout and stderr
};

// Runs `command` through /bin/sh in `cwd`; kills the process group on
// timeout.
ProcessResult RunShell(const std::string& command,
                       const std::filesystem::path& cwd,
                       std::chrono::milliseconds timeout);

std::string ShellQuote(const std::string& s);

// Replaces {name} placeholders. Unknown placeholders throw ConfigError.
std::string ExpandTemplate(const std::string& tmpl,
                           const std::map<std::string, std::string>& values);

// Crops or edge-pads a decoded plane to the source dimensions.
LumaPlane FitToDimensions(const LumaPlane& plane, size_t width, size_t height);

class ExternalEncoder final : public Encoder {
 public:
  explicit ExternalEncoder(AdapterConfig config);

  const std::string& id() const override { return config_.encoder_id; }
  QpRange qp_range() const override { return config_.qp_range; }
  QpLambdaMap qp_lambda() const override;
  EncodeResult Encode(const LumaPlane& plane, int qp,
                      const std::filesystem::path& workdir) const override;
  // Passes `source` to the encoder unchanged.
  EncodeResult EncodeFile(const std::filesystem::path& source, int qp,
                          const std::filesystem::path& workdir) const;

  const AdapterConfig& config() const { return config_; }

 private:
  EncodeResult Run(const std::filesystem::path& input, const LumaPlane& source,
                   int qp, const std::filesystem::path& dir) const;

  AdapterConfig config_;
};

// "reference" or a path to an adapter JSON file.
std::unique_ptr<Encoder> MakeEncoder(const std::string& spec);

// --- QP axis alignment ------------------------------------------------------

enum class QpDirection {
  kQualityIncreasing,  // e.g. JPEG quality factor
  kQualityDecreasing,  // e.g. HEVC/AV1 QP
};

// Maps a QP list onto an axis starting at 0 where quality decreases with
// the aligned value.
std::vector<int> AlignQpAxis(std::span<const int> qps, QpDirection direction);

std::pair<std::vector<int>, std::vector<int>> AlignQpAxes(
    std::span<const int> qps_a, std::span<const int> qps_b,
    QpDirection direction_a, QpDirection direction_b);

}  // namespace lambdaq

#endif  // LAMBDAQ_ENCODERS_H_
