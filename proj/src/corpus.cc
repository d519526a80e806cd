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

#include "lambdaq/corpus.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "lambdaq/error.h"

namespace lambdaq {
namespace {

uint64_t SplitMix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::vector<uint8_t> Quantize(const std::vector<double>& v) {
  std::vector<uint8_t> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<uint8_t>(std::clamp(std::round(v[i]), 0.0, 255.0));
  }
  return out;
}

std::vector<double> GradientField(size_t width, size_t height,
                                  std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> span(40.0, 200.0);
  const double theta = angle(rng);
  const double range = span(rng);
  const double dx = std::cos(theta), dy = std::sin(theta);
  const double diag = std::abs(dx) * width + std::abs(dy) * height;
  std::vector<double> v(width * height);
  for (size_t y = 0; y < height; ++y) {
    for (size_t x = 0; x < width; ++x) {
      const double t = (dx * (x - width / 2.0) + dy * (y - height / 2.0)) /
                       std::max(diag, 1.0);
      v[y * width + x] = 128.0 + range * t;
    }
  }
  return v;
}

std::vector<double> NoiseField(size_t width, size_t height, double sigma,
                               int radius, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(width * height);
  for (double& s : v) s = gauss(rng);
  if (radius > 0) {
    // Separable box blur with edge clamping.
    std::vector<double> tmp(v.size());
    const int r = radius;
    for (size_t y = 0; y < height; ++y) {
      for (size_t x = 0; x < width; ++x) {
        double acc = 0.0;
        for (int k = -r; k <= r; ++k) {
          const auto sx = static_cast<size_t>(
              std::clamp<long>(static_cast<long>(x) + k, 0, width - 1));
          acc += v[y * width + sx];
        }
        tmp[y * width + x] = acc;
      }
    }
    for (size_t y = 0; y < height; ++y) {
      for (size_t x = 0; x < width; ++x) {
        double acc = 0.0;
        for (int k = -r; k <= r; ++k) {
          const auto sy = static_cast<size_t>(
              std::clamp<long>(static_cast<long>(y) + k, 0, height - 1));
          acc += tmp[sy * width + x];
        }
        v[y * width + x] = acc;
      }
    }
  }
  double mean = 0.0;
  for (double s : v) mean += s;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double s : v) var += (s - mean) * (s - mean);
  const double sd = std::sqrt(var / static_cast<double>(v.size()));
  for (double& s : v) s = sd > 0.0 ? (s - mean) / sd * sigma : 0.0;
  return v;
}

}  // namespace

LumaPlane MakeFlat(size_t width, size_t height, uint8_t value) {
  return LumaPlane::Filled(width, height, value);
}

LumaPlane MakeGradient(size_t width, size_t height, uint64_t seed) {
  std::mt19937_64 rng(seed);
  return LumaPlane(width, height, Quantize(GradientField(width, height, rng)));
}

LumaPlane MakeBandLimitedNoise(size_t width, size_t height, double sigma,
                               int radius, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mean(96.0, 160.0);
  const double m = mean(rng);
  std::vector<double> v = NoiseField(width, height, sigma, radius, rng);
  for (double& s : v) s += m;
  return LumaPlane(width, height, Quantize(v));
}

LumaPlane MakeTexture(size_t width, size_t height, double sigma, int radius,
                      uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> g = GradientField(width, height, rng);
  const std::vector<double> n = NoiseField(width, height, sigma, radius, rng);
  for (size_t i = 0; i < g.size(); ++i) g[i] += n[i];
  return LumaPlane(width, height, Quantize(g));
}

NamedPlane GenerateImage(uint64_t seed, size_t index, size_t width,
                         size_t height, CorpusMix mix) {
  const uint64_t s = SplitMix(seed * 0x100000001b3ull + index);
  std::mt19937_64 rng(s);
  static constexpr std::array<double, 6> kSigmas = {12, 16, 20, 28, 36, 48};
  const double sigma = kSigmas[rng() % kSigmas.size()];
  const int radius = static_cast<int>(rng() % 3);

  ImageKind kind;
  if (mix == CorpusMix::kMixed) {
    static constexpr std::array<ImageKind, 5> kCycle = {
        ImageKind::kFlat, ImageKind::kGradient, ImageKind::kNoise,
        ImageKind::kTexture, ImageKind::kNoise};
    kind = kCycle[index % kCycle.size()];
  } else {
    kind = index % 2 == 0 ? ImageKind::kNoise : ImageKind::kTexture;
  }

  NamedPlane out;
  out.kind = kind;
  char name[64];
  switch (kind) {
    case ImageKind::kFlat: {
      const auto value = static_cast<uint8_t>(64 + rng() % 128);
      out.plane = MakeFlat(width, height, value);
      std::snprintf(name, sizeof(name), "img%03zu_flat", index);
      break;
    }
    case ImageKind::kGradient:
      out.plane = MakeGradient(width, height, rng());
      std::snprintf(name, sizeof(name), "img%03zu_gradient", index);
      break;
    case ImageKind::kNoise:
      out.plane = MakeBandLimitedNoise(width, height, sigma, radius, rng());
      std::snprintf(name, sizeof(name), "img%03zu_noise_s%d_r%d", index,
                    static_cast<int>(sigma), radius);
      break;
    case ImageKind::kTexture:
      out.plane = MakeTexture(width, height, sigma, radius, rng());
      std::snprintf(name, sizeof(name), "img%03zu_texture_s%d_r%d", index,
                    static_cast<int>(sigma), radius);
      break;
  }
  out.name = name;
  return out;
}

std::vector<NamedPlane> GenerateCorpus(uint64_t seed, size_t count,
                                       size_t width, size_t height,
                                       CorpusMix mix) {
  std::vector<NamedPlane> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    out.push_back(GenerateImage(seed, i, width, height, mix));
  }
  return out;
}

std::vector<std::filesystem::path> WriteCorpus(
    const std::filesystem::path& dir, const std::vector<NamedPlane>& images) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (const NamedPlane& img : images) {
    paths.push_back(dir / (img.name + ".pgm"));
    WritePgm(paths.back(), img.plane);
  }
  return paths;
}

std::vector<std::filesystem::path> ListImages(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error("not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".pgm" || ext == ".png") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace lambdaq
