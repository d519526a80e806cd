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

// Training harness: encode a corpus at every QP, pool (LE, PSNR) samples
// per (q_step, QP) cell across images, and keep the best-fitting cell per
// q_step as the encoder's anchor.

#ifndef LAMBDAQ_TRAINING_H_
#define LAMBDAQ_TRAINING_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lambdaq/encoders.h"
#include "lambdaq/models.h"
#include "lambdaq/transform.h"

namespace lambdaq {

inline constexpr int kDefaultQSteps[] = {8, 16, 32};

struct SweepRecord {
  std::string image_id;
  int qp = 0;
  double psnr = 0.0;
  LeVector le_by_qstep;
  // Kept when the adapter reports it; never persisted and never fitted.
  std::optional<double> lambda;
};

struct SweepFailure {
  std::string image_id;
  std::string message;
};

struct SweepOptions {
  std::vector<int> qps;
  std::vector<int> q_steps{std::begin(kDefaultQSteps), std::end(kDefaultQSteps)};
  // Append-only CSV of finished (image, qp) cells.
  std::optional<std::filesystem::path> records_path;
  // Keep existing records and skip their cells.
  bool resume = false;
  size_t parallelism = 1;
  std::filesystem::path workdir;
};

struct SweepResult {
  std::vector<SweepRecord> records;  // corpus order, then ascending qp
  std::vector<SweepFailure> failures;
  size_t le_computations = 0;
  size_t encodes = 0;
  size_t resumed_cells = 0;
};

// Throws Error if the corpus or qps are empty or every image fails.
SweepResult SweepCorpus(std::span<const std::filesystem::path> corpus,
                        const Encoder& encoder, const SweepOptions& options);

// image_id,qp,psnr,le_q8,le_q16,le_q32 for the default steps.
std::string RecordsCsvHeader(std::span<const int> q_steps);
std::string RecordCsvRow(const SweepRecord& record);

struct RecordFile {
  std::vector<int> q_steps;
  std::vector<SweepRecord> records;
};

// Reads a record CSV. A truncated final line (interrupted write) is
// ignored; any other malformed line throws Error.
RecordFile ReadRecordsCsv(const std::filesystem::path& path);

struct FitCell {
  int q_step = 0;
  int qp = 0;
  size_t image_count = 0;
  std::optional<Line> line;  // absent when degenerate
  bool degenerate = false;
  std::string reason;
};

struct FitGrid {
  std::vector<FitCell> cells;  // ascending (q_step, qp)

  const FitCell* Find(int q_step, int qp) const;
};

inline constexpr size_t kMinImagesPerCell = 3;

// Pooled least squares of PSNR(qp) against LE(q_step) for every cell.
FitGrid BuildFitGrid(std::span<const SweepRecord> records,
                     std::span<const int> q_steps);

// q_step,qp,a,b,r2,images,degenerate
void WriteFitGridCsv(const std::filesystem::path& path, const FitGrid& grid);

// Per q_step, the cell with the highest r2 (ties to the lower qp).
// Throws Error if a q_step has no usable cell.
PsnrLeModelSet SelectAnchors(const FitGrid& grid, std::span<const int> q_steps,
                             const std::string& encoder_id, QpRange qp_range,
                             const QpLambdaMap& qp_lambda);

}  // namespace lambdaq

#endif  // LAMBDAQ_TRAINING_H_
