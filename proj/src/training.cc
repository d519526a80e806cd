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

#include "lambdaq/training.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iterator>
#include <map>
#include <mutex>
#include <set>
#include <utility>

#include "lambdaq/error.h"
#include "lambdaq/text.h"
#include "parallel.h"

namespace lambdaq {
namespace fs = std::filesystem;

std::string RecordsCsvHeader(std::span<const int> q_steps) {
  std::string header = "image_id,qp,psnr";
  for (int s : q_steps) header += ",le_q" + std::to_string(s);
  return header;
}

std::string RecordCsvRow(const SweepRecord& r) {
  std::string row = r.image_id + "," + std::to_string(r.qp) + "," +
                    FormatDouble(r.psnr);
  for (const LeEntry& e : r.le_by_qstep.entries) row += "," + FormatDouble(e.le);
  return row;
}

namespace {

std::vector<int> ParseHeader(const std::string& line) {
  const auto fields = SplitCsvLine(line);
  if (fields.size() < 4 || fields[0] != "image_id" || fields[1] != "qp" ||
      fields[2] != "psnr") {
    throw Error("record file header must start with image_id,qp,psnr,le_q*");
  }
  std::vector<int> steps;
  for (size_t i = 3; i < fields.size(); ++i) {
    if (fields[i].substr(0, 4) != "le_q") {
      throw Error("bad record column: " + std::string(fields[i]));
    }
    steps.push_back(ParseInt(fields[i].substr(4)));
  }
  return steps;
}

}  // namespace

RecordFile ReadRecordsCsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open record file " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  RecordFile file;
  size_t pos = 0;
  bool header_done = false;
  while (pos < content.size()) {
    const size_t nl = content.find('\n', pos);
    const bool complete = nl != std::string::npos;
    const std::string line =
        content.substr(pos, complete ? nl - pos : std::string::npos);
    pos = complete ? nl + 1 : content.size();
    if (line.empty()) continue;
    if (!header_done) {
      if (!complete) break;
      file.q_steps = ParseHeader(line);
      header_done = true;
      continue;
    }
    const auto fields = SplitCsvLine(line);
    try {
      if (fields.size() != 3 + file.q_steps.size()) {
        throw Error("wrong field count");
      }
      SweepRecord r;
      r.image_id = std::string(fields[0]);
      r.qp = ParseInt(fields[1]);
      r.psnr = ParseDouble(fields[2]);
      for (size_t i = 0; i < file.q_steps.size(); ++i) {
        r.le_by_qstep.entries.push_back(
            {file.q_steps[i], ParseDouble(fields[3 + i])});
      }
      file.records.push_back(std::move(r));
    } catch (const Error& ex) {
      // Only the last line of an interrupted sweep may be torn.
      if (!complete) break;
      throw Error("malformed record line in " + path.string() + ": " +
                  ex.what());
    }
  }
  if (!header_done) throw Error("record file has no header: " + path.string());
  return file;
}

SweepResult SweepCorpus(std::span<const fs::path> corpus,
                        const Encoder& encoder, const SweepOptions& options) {
  if (corpus.empty()) throw Error("training corpus is empty");
  if (options.qps.empty()) throw Error("no QPs to sweep");
  for (int qp : options.qps) {
    if (!encoder.qp_range().Contains(qp)) {
      throw Error("qp " + std::to_string(qp) + " outside the range of " +
                  encoder.id());
    }
  }
  std::vector<int> qps = options.qps;
  std::sort(qps.begin(), qps.end());
  qps.erase(std::unique(qps.begin(), qps.end()), qps.end());

  std::vector<std::string> ids;
  for (const fs::path& p : corpus) {
    ids.push_back(p.filename().string());
    if (ids.back().find_first_of(",\n") != std::string::npos) {
      throw Error("image id may not contain ',' or newlines: " + ids.back());
    }
  }

  // (image_id, qp) -> record from an earlier run.
  std::map<std::pair<std::string, int>, SweepRecord> done;
  std::ofstream sink;
  std::mutex sink_mutex;
  if (options.records_path) {
    const bool append = options.resume && fs::exists(*options.records_path);
    if (append) {
      RecordFile previous = ReadRecordsCsv(*options.records_path);
      if (previous.q_steps != options.q_steps) {
        throw Error("record file q_steps differ from the configured q_steps");
      }
      for (SweepRecord& r : previous.records) {
        done[{r.image_id, r.qp}] = std::move(r);
      }
      // Rewrite without a possibly torn tail before appending.
      std::ofstream rewrite(*options.records_path, std::ios::trunc);
      rewrite << RecordsCsvHeader(options.q_steps) << '\n';
      for (const auto& [key, r] : done) rewrite << RecordCsvRow(r) << '\n';
    } else {
      std::ofstream fresh(*options.records_path, std::ios::trunc);
      if (!fresh) {
        throw Error("cannot create record file " +
                    options.records_path->string());
      }
      fresh << RecordsCsvHeader(options.q_steps) << '\n';
    }
    sink.open(*options.records_path, std::ios::app);
    if (!sink) {
      throw Error("cannot append to " + options.records_path->string());
    }
  }

  std::vector<std::vector<SweepRecord>> per_image(corpus.size());
  std::vector<std::optional<SweepFailure>> failures(corpus.size());
  std::atomic<size_t> le_count{0};
  std::atomic<size_t> encode_count{0};
  std::atomic<size_t> resumed{0};

  internal::ParallelFor(corpus.size(), options.parallelism, [&](size_t i) {
    std::vector<int> todo;
    for (int qp : qps) {
      const auto it = done.find({ids[i], qp});
      if (it != done.end()) {
        per_image[i].push_back(it->second);
        resumed.fetch_add(1);
      } else {
        todo.push_back(qp);
      }
    }
    if (todo.empty()) return;
    try {
      const LumaPlane plane = LoadLuma(corpus[i]);
      const LeVector le = ComputeLe(plane, options.q_steps);
      le_count.fetch_add(1);
      for (int qp : todo) {
        const EncodeResult enc = encoder.Encode(plane, qp, options.workdir);
        encode_count.fetch_add(1);
        SweepRecord r{ids[i], qp, enc.psnr, le, enc.lambda};
        if (sink.is_open()) {
          std::lock_guard<std::mutex> lock(sink_mutex);
          sink << RecordCsvRow(r) << '\n';
          sink.flush();
        }
        per_image[i].push_back(std::move(r));
      }
    } catch (const std::exception& ex) {
      failures[i] = SweepFailure{ids[i], ex.what()};
    }
  });

  SweepResult result;
  result.le_computations = le_count.load();
  result.encodes = encode_count.load();
  result.resumed_cells = resumed.load();
  size_t failed = 0;
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (failures[i]) {
      result.failures.push_back(*failures[i]);
      ++failed;
    }
    std::sort(per_image[i].begin(), per_image[i].end(),
              [](const SweepRecord& l, const SweepRecord& r) {
                return l.qp < r.qp;
              });
    for (SweepRecord& r : per_image[i]) result.records.push_back(std::move(r));
  }
  if (failed == corpus.size()) {
    throw Error("every image in the sweep failed; first error: " +
                result.failures.front().message);
  }
  return result;
}

const FitCell* FitGrid::Find(int q_step, int qp) const {
  for (const FitCell& c : cells) {
    if (c.q_step == q_step && c.qp == qp) return &c;
  }
  return nullptr;
}

FitGrid BuildFitGrid(std::span<const SweepRecord> records,
                     std::span<const int> q_steps) {
  std::map<int, std::vector<const SweepRecord*>> by_qp;
  for (const SweepRecord& r : records) by_qp[r.qp].push_back(&r);

  FitGrid grid;
  for (int step : q_steps) {
    for (const auto& [qp, rows] : by_qp) {
      FitCell cell;
      cell.q_step = step;
      cell.qp = qp;
      std::set<std::string> images;
      std::vector<Point> points;
      for (const SweepRecord* r : rows) {
        images.insert(r->image_id);
        points.push_back({r->le_by_qstep.At(step), r->psnr});
      }
      cell.image_count = images.size();
      const bool constant_le =
          std::all_of(points.begin(), points.end(),
                      [&](const Point& p) { return p.x == points.front().x; });
      if (cell.image_count < kMinImagesPerCell) {
        cell.degenerate = true;
        cell.reason = "fewer than 3 images";
      } else if (constant_le) {
        cell.degenerate = true;
        cell.reason = "all LE values equal";
      } else {
        Line line = FitLine(points);
        if (!line.r2) {
          cell.degenerate = true;
          cell.reason = "PSNR has no variance";
        } else {
          cell.line = line;
        }
      }
      grid.cells.push_back(std::move(cell));
    }
  }
  return grid;
}

void WriteFitGridCsv(const fs::path& path, const FitGrid& grid) {
  std::ofstream out(path);
  if (!out) throw Error("cannot create " + path.string());
  out << "q_step,qp,a,b,r2,images,degenerate\n";
  for (const FitCell& c : grid.cells) {
    out << c.q_step << ',' << c.qp << ',';
    if (c.line) {
      out << FormatDouble(c.line->a) << ',' << FormatDouble(c.line->b) << ','
          << FormatDouble(c.line->r2.value_or(0.0));
    } else {
      out << ",,";
    }
    out << ',' << c.image_count << ',' << (c.degenerate ? 1 : 0) << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

PsnrLeModelSet SelectAnchors(const FitGrid& grid, std::span<const int> q_steps,
                             const std::string& encoder_id, QpRange qp_range,
                             const QpLambdaMap& qp_lambda) {
  PsnrLeModelSet set;
  set.encoder_id = encoder_id;
  set.qp_range = qp_range;
  set.qp_lambda = qp_lambda;
  for (int step : q_steps) {
    const FitCell* best = nullptr;
    for (const FitCell& c : grid.cells) {
      if (c.q_step != step || c.degenerate || !c.line || !c.line->r2) continue;
      if (!(c.line->a < 0.0) || !qp_range.Contains(c.qp)) continue;
      const bool better =
          best == nullptr || *c.line->r2 > *best->line->r2 ||
          (*c.line->r2 == *best->line->r2 && c.qp < best->qp);
      if (better) best = &c;
    }
    if (best == nullptr) {
      throw Error("no usable fit cell for q_step " + std::to_string(step));
    }
    set.entries.push_back({step, best->qp, *best->line});
  }
  set.Validate();
  return set;
}

}  // namespace lambdaq
