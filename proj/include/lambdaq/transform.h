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

// 8x8 block DCT statistics of original pixels.
//
// The LE statistic is log10 of the mean squared error obtained by
// quantizing every 8x8 DCT coefficient of the source image with a uniform
// step. Because the DCT is orthonormal, the centered-mode error equals the
// pixel-domain error of a quantize/reconstruct round trip exactly.

#ifndef LAMBDAQ_TRANSFORM_H_
#define LAMBDAQ_TRANSFORM_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lambdaq/pixels.h"

namespace lambdaq {

inline constexpr size_t kBlockDim = 8;
inline constexpr size_t kBlockSize = kBlockDim * kBlockDim;

using PixelBlock = std::array<uint8_t, kBlockSize>;
// Row-major: index = v * 8 + u, with v the vertical frequency.
using CoeffBlock = std::array<double, kBlockSize>;
using SampleBlock = std::array<double, kBlockSize>;

// Blocks in raster order over a ceil(w/8) x ceil(h/8) grid. Partial border
// blocks repeat the last row/column of the plane.
std::vector<PixelBlock> PartitionBlocks(const LumaPlane& plane);
size_t BlockCount(const LumaPlane& plane);

// Orthonormal 2D DCT-II of (pixel - 128).
CoeffBlock ForwardDct8x8(const PixelBlock& block);
// Inverse of ForwardDct8x8 including the +128 shift; no rounding, no clamp.
SampleBlock InverseDct8x8(const CoeffBlock& coeffs);

// One forward DCT pass over the whole plane. Increments the pass counter
// once and the block counter once per block.
std::vector<CoeffBlock> TransformPlane(const LumaPlane& plane);

// Instrumentation for the one-DCT-per-image cost contract.
struct DctCounters {
  uint64_t plane_passes = 0;
  uint64_t blocks = 0;
};
DctCounters GetDctCounters();
void ResetDctCounters();

enum class QuantErrorMode {
  // e = c - s * round(c / s), ties away from zero.
  kCentered,
  // e = (c + s/2) mod s with a non-negative remainder.
  kLiteral,
};

double QuantizationError(double coeff, double q_step, QuantErrorMode mode);

// Mean over all blocks and all 64 frequencies of the squared quantization
// error. Throws Error if q_step < 1 or blocks is empty.
double QuantErrorMse(std::span<const CoeffBlock> blocks, double q_step,
                     QuantErrorMode mode = QuantErrorMode::kCentered);

struct LeEntry {
  int q_step = 0;
  double le = 0.0;
  bool operator==(const LeEntry&) const = default;
};

struct LeVector {
  std::vector<LeEntry> entries;
  size_t block_count = 0;

  // Throws Error if q_step is not present.
  double At(int q_step) const;
  const LeEntry* Find(int q_step) const;
  bool operator==(const LeVector&) const = default;
};

// LE = log10(max(MSE, kMseFloor)) per step. q_steps must be non-empty,
// strictly increasing and >= 1.
LeVector ComputeLe(std::span<const CoeffBlock> blocks,
                   std::span<const int> q_steps,
                   QuantErrorMode mode = QuantErrorMode::kCentered);
// Runs exactly one TransformPlane.
LeVector ComputeLe(const LumaPlane& plane, std::span<const int> q_steps,
                   QuantErrorMode mode = QuantErrorMode::kCentered);

}  // namespace lambdaq

#endif  // LAMBDAQ_TRANSFORM_H_
