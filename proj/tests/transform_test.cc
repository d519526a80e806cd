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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lambdaq/encoders.h"
#include "lambdaq/error.h"
#include "test_util.h"

namespace lambdaq {
namespace {

const int kSteps[] = {8, 16, 32};

PixelBlock Constant(uint8_t v) {
  PixelBlock b;
  b.fill(v);
  return b;
}

TEST(PartitionTest, SingleBlock) {
  const LumaPlane p = test::RandomPlane(8, 8, 1);
  const auto blocks = PartitionBlocks(p);
  ASSERT_EQ(blocks.size(), 1u);
  for (size_t i = 0; i < 64; ++i) EXPECT_EQ(blocks[0][i], p.samples()[i]);
}

TEST(PartitionTest, LeftThenRight) {
  const LumaPlane p = test::RandomPlane(16, 8, 2);
  const auto blocks = PartitionBlocks(p);
  ASSERT_EQ(blocks.size(), 2u);
  for (size_t y = 0; y < 8; ++y) {
    for (size_t x = 0; x < 8; ++x) {
      EXPECT_EQ(blocks[0][y * 8 + x], p.at(x, y));
      EXPECT_EQ(blocks[1][y * 8 + x], p.at(x + 8, y));
    }
  }
}

TEST(PartitionTest, EdgeReplication) {
  const LumaPlane p = test::RandomPlane(9, 9, 3);
  const auto blocks = PartitionBlocks(p);
  ASSERT_EQ(blocks.size(), 4u);
  EXPECT_EQ(BlockCount(p), 4u);
  // Block at block-row 0, block-column 1 holds plane columns 8..15.
  for (size_t y = 0; y < 8; ++y) {
    for (size_t x = 0; x < 8; ++x) EXPECT_EQ(blocks[1][y * 8 + x], p.at(8, y));
  }
  // Bottom-right block is the corner pixel everywhere.
  for (uint8_t v : blocks[3]) EXPECT_EQ(v, p.at(8, 8));
}

TEST(PartitionTest, CountFormula) {
  for (size_t w : {1u, 7u, 8u, 9u, 23u}) {
    for (size_t h : {1u, 8u, 17u}) {
      const LumaPlane p = LumaPlane::Filled(w, h, 5);
      EXPECT_EQ(PartitionBlocks(p).size(), ((w + 7) / 8) * ((h + 7) / 8));
    }
  }
}

TEST(DctTest, MidGrayIsZero) {
  for (double c : ForwardDct8x8(Constant(128))) EXPECT_NEAR(c, 0.0, 1e-12);
}

TEST(DctTest, ConstantBlockDc) {
  const CoeffBlock c = ForwardDct8x8(Constant(136));
  EXPECT_NEAR(c[0], 64.0, 1e-12);
  for (size_t i = 1; i < 64; ++i) EXPECT_NEAR(c[i], 0.0, 1e-12);
}

TEST(DctTest, MatchesNaiveOracle) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    PixelBlock b;
    for (uint8_t& v : b) v = static_cast<uint8_t>(rng() & 0xff);
    const CoeffBlock fast = ForwardDct8x8(b);
    const CoeffBlock slow = test::NaiveDct(b);
    for (size_t i = 0; i < 64; ++i) EXPECT_NEAR(fast[i], slow[i], 1e-9);
  }
}

TEST(DctTest, InverseRoundTrip) {
  std::mt19937 rng(12);
  PixelBlock b;
  for (uint8_t& v : b) v = static_cast<uint8_t>(rng() & 0xff);
  const SampleBlock back = InverseDct8x8(ForwardDct8x8(b));
  for (size_t i = 0; i < 64; ++i) EXPECT_NEAR(back[i], b[i], 1e-9);
}

TEST(DctTest, EnergyPreserved) {
  std::mt19937 rng(13);
  PixelBlock b;
  for (uint8_t& v : b) v = static_cast<uint8_t>(rng() & 0xff);
  double pixel = 0.0, coeff = 0.0;
  for (uint8_t v : b) pixel += (v - 128.0) * (v - 128.0);
  for (double c : ForwardDct8x8(b)) coeff += c * c;
  EXPECT_NEAR(pixel, coeff, 1e-7 * pixel);
}

CoeffBlock OneCoefficient(double value) {
  CoeffBlock c{};
  c[5] = value;
  return c;
}

TEST(QuantErrorTest, ExactMultiplesHaveNoError) {
  CoeffBlock c{};
  for (size_t i = 0; i < 64; ++i) c[i] = 8.0 * (static_cast<int>(i) - 32);
  const CoeffBlock blocks[] = {c};
  EXPECT_EQ(QuantErrorMse(blocks, 8), 0.0);
}

TEST(QuantErrorTest, SingleResidue) {
  const CoeffBlock blocks[] = {OneCoefficient(3.0)};
  EXPECT_DOUBLE_EQ(QuantErrorMse(blocks, 8), 9.0 / 64.0);
}

TEST(QuantErrorTest, TieRoundsAwayFromZero) {
  EXPECT_DOUBLE_EQ(QuantizationError(4.0, 8.0, QuantErrorMode::kCentered), -4.0);
  EXPECT_DOUBLE_EQ(QuantizationError(-4.0, 8.0, QuantErrorMode::kCentered), 4.0);
  const CoeffBlock blocks[] = {OneCoefficient(4.0)};
  EXPECT_DOUBLE_EQ(QuantErrorMse(blocks, 8), 0.25);
}

TEST(QuantErrorTest, LiteralModeIsShiftedRemainder) {
  EXPECT_DOUBLE_EQ(QuantizationError(3.0, 8.0, QuantErrorMode::kLiteral), 7.0);
  EXPECT_DOUBLE_EQ(QuantizationError(-3.0, 8.0, QuantErrorMode::kLiteral), 1.0);
  EXPECT_DOUBLE_EQ(QuantizationError(0.0, 8.0, QuantErrorMode::kLiteral), 4.0);
  for (double c = -50.0; c < 50.0; c += 0.37) {
    const double e = QuantizationError(c, 16.0, QuantErrorMode::kLiteral);
    EXPECT_GE(e, 0.0);
    EXPECT_LT(e, 16.0);
  }
}

TEST(QuantErrorTest, RejectsBadInput) {
  const CoeffBlock blocks[] = {OneCoefficient(1.0)};
  EXPECT_THROW(QuantErrorMse(blocks, 0), Error);
  EXPECT_THROW(QuantErrorMse({}, 8), Error);
}

TEST(QuantErrorPropertyTest, UnitStepBound) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const auto coeffs = TransformPlane(test::RandomPlane(24, 16, seed));
    EXPECT_LE(QuantErrorMse(coeffs, 1), 0.25);
  }
}

TEST(ComputeLeTest, FlatMidGray) {
  const LeVector le = ComputeLe(LumaPlane::Filled(64, 64, 128), kSteps);
  ASSERT_EQ(le.entries.size(), 3u);
  for (const LeEntry& e : le.entries) EXPECT_DOUBLE_EQ(e.le, -4.0);
  EXPECT_EQ(le.block_count, 64u);
}

// Re-derives LE straight from the definition: naive DCT, nearest-multiple
// error per coefficient, mean of squares, floor, log10.
double BruteForceLe(const LumaPlane& plane, int q_step) {
  double sum = 0.0;
  size_t n = 0;
  for (const PixelBlock& b : PartitionBlocks(plane)) {
    for (double c : test::NaiveDct(b)) {
      const double e = c - q_step * std::round(c / q_step);
      sum += e * e;
      ++n;
    }
  }
  return std::log10(std::max(sum / n, 1e-4));
}

TEST(ComputeLeTest, MatchesBruteForce) {
  const LumaPlane p = test::RandomPlane(64, 64, 42);
  const LeVector le = ComputeLe(p, kSteps);
  for (int s : kSteps) EXPECT_NEAR(le.At(s), BruteForceLe(p, s), 1e-9);
}

TEST(ComputeLeTest, ValidatesSteps) {
  const LumaPlane p = LumaPlane::Filled(8, 8, 1);
  EXPECT_THROW(ComputeLe(p, std::vector<int>{}), Error);
  EXPECT_THROW(ComputeLe(p, std::vector<int>{16, 8}), Error);
  EXPECT_THROW(ComputeLe(p, std::vector<int>{0, 8}), Error);
  EXPECT_THROW(ComputeLe(p, std::vector<int>{8, 8}), Error);
}

TEST(ComputeLeTest, OneForwardPassPerPlane) {
  const LumaPlane p = test::RandomPlane(40, 24, 5);
  ResetDctCounters();
  ComputeLe(p, kSteps);
  const DctCounters c = GetDctCounters();
  EXPECT_EQ(c.plane_passes, 1u);
  EXPECT_EQ(c.blocks, BlockCount(p));
}

TEST(ComputeLePropertyTest, FloorBound) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const LeVector le = ComputeLe(test::RandomPlane(16, 16, seed), kSteps);
    for (const LeEntry& e : le.entries) EXPECT_GE(e.le, -4.0);
  }
}

TEST(ParsevalPropertyTest, CoefficientMseEqualsPixelMse) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const LumaPlane p = test::RandomPlane(24 + seed, 16 + 2 * seed, seed);
    const auto blocks = PartitionBlocks(p);
    const auto coeffs = TransformPlane(p);
    for (int s : kSteps) {
      const double coeff_mse = QuantErrorMse(coeffs, s);
      // Pixel-domain reconstruction through the naive inverse.
      double sse = 0.0;
      for (size_t b = 0; b < blocks.size(); ++b) {
        CoeffBlock q = coeffs[b];
        for (double& c : q) c = s * std::round(c / s);
        const SampleBlock r = test::NaiveIdct(q);
        for (size_t i = 0; i < 64; ++i) sse += (blocks[b][i] - r[i]) * (blocks[b][i] - r[i]);
      }
      const double pixel_mse = sse / (blocks.size() * 64.0);
      EXPECT_NEAR(coeff_mse, pixel_mse, 1e-6 * pixel_mse);
      EXPECT_NEAR(ReconstructionMse(blocks, QuantizeReconstruct(coeffs, s)),
                  pixel_mse, 1e-6 * pixel_mse);
    }
  }
}

}  // namespace
}  // namespace lambdaq
