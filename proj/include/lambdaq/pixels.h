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

#ifndef LAMBDAQ_PIXELS_H_
#define LAMBDAQ_PIXELS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace lambdaq {

// Squared-error floor applied before every log10 of an MSE.
inline constexpr double kMseFloor = 1e-4;
inline constexpr double kPeak = 255.0;

// 8-bit luma samples, row-major. Immutable once constructed.
class LumaPlane {
 public:
  LumaPlane() = default;
  // Throws Error if either dimension is zero or samples.size() != w*h.
  LumaPlane(size_t width, size_t height, std::vector<uint8_t> samples);
  // Plane filled with a single value.
  static LumaPlane Filled(size_t width, size_t height, uint8_t value);

  size_t width() const { return width_; }
  size_t height() const { return height_; }
  size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  uint8_t at(size_t x, size_t y) const { return samples_[y * width_ + x]; }
  std::span<const uint8_t> row(size_t y) const {
    return {samples_.data() + y * width_, width_};
  }
  std::span<const uint8_t> samples() const { return samples_; }

  bool operator==(const LumaPlane&) const = default;

 private:
  size_t width_ = 0;
  size_t height_ = 0;
  std::vector<uint8_t> samples_;
};

enum class ImageFormat { kAuto, kPgm, kPng, kRawY8 };

struct RawDims {
  size_t width = 0;
  size_t height = 0;
};

// Picks the format from the file extension: .pgm, .png, .y/.raw/.y8.
ImageFormat FormatFromExtension(const std::filesystem::path& path);

// Reads a luma plane. Color PNGs are converted with BT.601 full-range
// weights, Y = round(0.299 R + 0.587 G + 0.114 B). Alpha is ignored.
// raw-y8 requires `dims`. Throws Error on unreadable or malformed input.
LumaPlane LoadLuma(const std::filesystem::path& path,
                   ImageFormat format = ImageFormat::kAuto,
                   std::optional<RawDims> dims = std::nullopt);

uint8_t LumaFromRgb(uint8_t r, uint8_t g, uint8_t b);

void WritePgm(const std::filesystem::path& path, const LumaPlane& plane);
void WritePng(const std::filesystem::path& path, const LumaPlane& plane);

double MseToPsnr(double mse);

// Pixel-domain MSE. Throws Error on a dimension mismatch.
double Mse(const LumaPlane& reference, const LumaPlane& test);

// 10 log10(255^2 / max(MSE, kMseFloor)).
double Psnr(const LumaPlane& reference, const LumaPlane& test);

}  // namespace lambdaq

#endif  // LAMBDAQ_PIXELS_H_
