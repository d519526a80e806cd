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

#include "lambdaq/transform.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <string>

#include "lambdaq/error.h"

namespace lambdaq {
namespace {

std::atomic<uint64_t> g_plane_passes{0};
std::atomic<uint64_t> g_blocks{0};

using Basis = std::array<std::array<double, kBlockDim>, kBlockDim>;

// basis[k][n] = c(k) cos((2n + 1) k pi / 16), orthonormal rows.
const Basis& DctBasis() {
  static const Basis basis = [] {
    Basis b{};
    for (size_t k = 0; k < kBlockDim; ++k) {
      const double scale = k == 0 ? std::sqrt(1.0 / kBlockDim)
                                  : std::sqrt(2.0 / kBlockDim);
      for (size_t n = 0; n < kBlockDim; ++n) {
        b[k][n] = scale * std::cos((2.0 * n + 1.0) * k * std::numbers::pi /
                                   (2.0 * kBlockDim));
      }
    }
    return b;
  }();
  return basis;
}

// Neumaier-compensated running sum. Fixed input order gives identical
// results run to run.
class CompensatedSum {
 public:
  void Add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double Total() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void ValidateSteps(std::span<const int> q_steps) {
  if (q_steps.empty()) throw Error("q_steps must be non-empty");
  for (size_t i = 0; i < q_steps.size(); ++i) {
    if (q_steps[i] < 1) throw Error("q_step must be >= 1");
    if (i > 0 && q_steps[i] <= q_steps[i - 1]) {
      throw Error("q_steps must be strictly increasing");
    }
  }
}

}  // namespace

size_t BlockCount(const LumaPlane& plane) {
  return ((plane.width() + kBlockDim - 1) / kBlockDim) *
         ((plane.height() + kBlockDim - 1) / kBlockDim);
}

std::vector<PixelBlock> PartitionBlocks(const LumaPlane& plane) {
  const size_t bw = (plane.width() + kBlockDim - 1) / kBlockDim;
  const size_t bh = (plane.height() + kBlockDim - 1) / kBlockDim;
  std::vector<PixelBlock> blocks(bw * bh);
  for (size_t by = 0; by < bh; ++by) {
    for (size_t bx = 0; bx < bw; ++bx) {
      PixelBlock& block = blocks[by * bw + bx];
      for (size_t y = 0; y < kBlockDim; ++y) {
        const size_t sy = std::min(by * kBlockDim + y, plane.height() - 1);
        const auto row = plane.row(sy);
        for (size_t x = 0; x < kBlockDim; ++x) {
          const size_t sx = std::min(bx * kBlockDim + x, plane.width() - 1);
          block[y * kBlockDim + x] = row[sx];
        }
      }
    }
  }
  return blocks;
}

CoeffBlock ForwardDct8x8(const PixelBlock& block) {
  const Basis& basis = DctBasis();
  // Rows first: tmp[y][u] = sum_x basis[u][x] * (p[y][x] - 128).
  std::array<double, kBlockSize> tmp{};
  for (size_t y = 0; y < kBlockDim; ++y) {
    for (size_t u = 0; u < kBlockDim; ++u) {
      double acc = 0.0;
      for (size_t x = 0; x < kBlockDim; ++x) {
        acc += basis[u][x] * (static_cast<double>(block[y * kBlockDim + x]) - 128.0);
      }
      tmp[y * kBlockDim + u] = acc;
    }
  }
  CoeffBlock out{};
  for (size_t v = 0; v < kBlockDim; ++v) {
    for (size_t u = 0; u < kBlockDim; ++u) {
      double acc = 0.0;
      for (size_t y = 0; y < kBlockDim; ++y) {
        acc += basis[v][y] * tmp[y * kBlockDim + u];
      }
      out[v * kBlockDim + u] = acc;
    }
  }
  return out;
}

SampleBlock InverseDct8x8(const CoeffBlock& coeffs) {
  const Basis& basis = DctBasis();
  std::array<double, kBlockSize> tmp{};
  for (size_t y = 0; y < kBlockDim; ++y) {
    for (size_t u = 0; u < kBlockDim; ++u) {
      double acc = 0.0;
      for (size_t v = 0; v < kBlockDim; ++v) {
        acc += basis[v][y] * coeffs[v * kBlockDim + u];
      }
      tmp[y * kBlockDim + u] = acc;
    }
  }
  SampleBlock out{};
  for (size_t y = 0; y < kBlockDim; ++y) {
    for (size_t x = 0; x < kBlockDim; ++x) {
      double acc = 0.0;
      for (size_t u = 0; u < kBlockDim; ++u) {
        acc += basis[u][x] * tmp[y * kBlockDim + u];
      }
      out[y * kBlockDim + x] = acc + 128.0;
    }
  }
  return out;
}

std::vector<CoeffBlock> TransformPlane(const LumaPlane& plane) {
  const std::vector<PixelBlock> blocks = PartitionBlocks(plane);
  std::vector<CoeffBlock> coeffs;
  coeffs.reserve(blocks.size());
  for (const PixelBlock& block : blocks) coeffs.push_back(ForwardDct8x8(block));
  g_plane_passes.fetch_add(1, std::memory_order_relaxed);
  g_blocks.fetch_add(blocks.size(), std::memory_order_relaxed);
  return coeffs;
}

DctCounters GetDctCounters() {
  return {g_plane_passes.load(std::memory_order_relaxed),
          g_blocks.load(std::memory_order_relaxed)};
}

void ResetDctCounters() {
  g_plane_passes.store(0, std::memory_order_relaxed);
  g_blocks.store(0, std::memory_order_relaxed);
}

double QuantizationError(double coeff, double q_step, QuantErrorMode mode) {
  if (mode == QuantErrorMode::kCentered) {
    // std::round breaks ties away from zero.
    return coeff - q_step * std::round(coeff / q_step);
  }
  double r = std::fmod(coeff + q_step / 2.0, q_step);
  if (r < 0.0) r += q_step;
  return r;
}

double QuantErrorMse(std::span<const CoeffBlock> blocks, double q_step,
                     QuantErrorMode mode) {
  if (!(q_step >= 1.0)) throw Error("q_step must be >= 1");
  if (blocks.empty()) throw Error("at least one block is required");
  CompensatedSum total;
  for (const CoeffBlock& block : blocks) {
    double block_sse = 0.0;
    for (double c : block) {
      const double e = QuantizationError(c, q_step, mode);
      block_sse += e * e;
    }
    total.Add(block_sse);
  }
  return total.Total() / static_cast<double>(blocks.size()) /
         static_cast<double>(kBlockSize);
}

const LeEntry* LeVector::Find(int q_step) const {
  for (const LeEntry& e : entries) {
    if (e.q_step == q_step) return &e;
  }
  return nullptr;
}

double LeVector::At(int q_step) const {
  const LeEntry* e = Find(q_step);
  if (e == nullptr) {
    throw Error("LE vector has no entry for q_step " + std::to_string(q_step));
  }
  return e->le;
}

LeVector ComputeLe(std::span<const CoeffBlock> blocks,
                   std::span<const int> q_steps, QuantErrorMode mode) {
  ValidateSteps(q_steps);
  LeVector out;
  out.block_count = blocks.size();
  for (int step : q_steps) {
    const double mse = QuantErrorMse(blocks, step, mode);
    out.entries.push_back({step, std::log10(std::max(mse, kMseFloor))});
  }
  return out;
}

LeVector ComputeLe(const LumaPlane& plane, std::span<const int> q_steps,
                   QuantErrorMode mode) {
  ValidateSteps(q_steps);
  const std::vector<CoeffBlock> coeffs = TransformPlane(plane);
  return ComputeLe(coeffs, q_steps, mode);
}

}  // namespace lambdaq
