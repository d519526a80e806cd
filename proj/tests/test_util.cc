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

#include "test_util.h"

#include <stdlib.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace lambdaq::test {
namespace fs = std::filesystem;

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "lambdaq-test-XXXXXX").string();
  if (mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

LumaPlane RandomPlane(size_t width, size_t height, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(0, 255);
  std::vector<uint8_t> samples(width * height);
  for (uint8_t& s : samples) s = static_cast<uint8_t>(dist(rng));
  return LumaPlane(width, height, std::move(samples));
}

namespace {

double Basis(int k, int n) {
  const double scale = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
  return scale * std::cos((2 * n + 1) * k * std::numbers::pi / 16.0);
}

}  // namespace

CoeffBlock NaiveDct(const PixelBlock& block) {
  CoeffBlock out{};
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      double sum = 0.0;
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
          sum += (block[y * 8 + x] - 128.0) * Basis(u, y) * Basis(v, x);
        }
      }
      out[u * 8 + v] = sum;
    }
  }
  return out;
}

SampleBlock NaiveIdct(const CoeffBlock& coeffs) {
  SampleBlock out{};
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      double sum = 0.0;
      for (int u = 0; u < 8; ++u) {
        for (int v = 0; v < 8; ++v) {
          sum += coeffs[u * 8 + v] * Basis(u, y) * Basis(v, x);
        }
      }
      out[y * 8 + x] = sum + 128.0;
    }
  }
  return out;
}

fs::path WriteScript(const fs::path& path, const std::string& body) {
  std::ofstream out(path);
  out << "#!/bin/sh\n" << body << '\n';
  out.close();
  fs::permissions(path, fs::perms::owner_all | fs::perms::group_read |
                            fs::perms::group_exec);
  return path;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path ModelDir() { return LAMBDAQ_MODEL_DIR; }

}  // namespace lambdaq::test
