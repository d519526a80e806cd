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

// Seeded synthetic test images, so that training and evaluation runs need
// no external assets.

#ifndef LAMBDAQ_CORPUS_H_
#define LAMBDAQ_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lambdaq/pixels.h"

namespace lambdaq {

enum class ImageKind { kFlat, kGradient, kNoise, kTexture };

struct NamedPlane {
  std::string name;
  ImageKind kind = ImageKind::kNoise;
  LumaPlane plane;
};

enum class CorpusMix {
  // Cycles flat, gradient, band-limited noise and textured images.
  kMixed,
  // Only noise and textured images with enough detail to be controllable
  // over a 35-45 dB target range.
  kTextured,
};

LumaPlane MakeFlat(size_t width, size_t height, uint8_t value);
// Linear ramp in a random direction.
LumaPlane MakeGradient(size_t width, size_t height, uint64_t seed);
// Gaussian noise low-passed by a box filter of `radius`, rescaled to
// standard deviation `sigma` around a random mean.
LumaPlane MakeBandLimitedNoise(size_t width, size_t height, double sigma,
                               int radius, uint64_t seed);
// Gradient plus band-limited noise.
LumaPlane MakeTexture(size_t width, size_t height, double sigma, int radius,
                      uint64_t seed);

// Image i of a corpus; deterministic in (seed, i, mix).
NamedPlane GenerateImage(uint64_t seed, size_t index, size_t width,
                         size_t height, CorpusMix mix);
std::vector<NamedPlane> GenerateCorpus(uint64_t seed, size_t count,
                                       size_t width, size_t height,
                                       CorpusMix mix);

// Writes <dir>/<name>.pgm per image and returns the paths.
std::vector<std::filesystem::path> WriteCorpus(
    const std::filesystem::path& dir, const std::vector<NamedPlane>& images);

// Sorted .pgm/.png files of a directory.
std::vector<std::filesystem::path> ListImages(const std::filesystem::path& dir);

}  // namespace lambdaq

#endif  // LAMBDAQ_CORPUS_H_
