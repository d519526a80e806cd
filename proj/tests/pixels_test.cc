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

#include "lambdaq/pixels.h"

#include <png.h>

#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

#include "lambdaq/error.h"
#include "test_util.h"

namespace lambdaq {
namespace {

const double kIdenticalPsnr = 10.0 * std::log10(255.0 * 255.0 / 1e-4);

void WriteBytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

TEST(LoadLumaTest, ReadsBinaryPgm) {
  test::TempDir dir;
  WriteBytes(dir / "a.pgm", std::string("P5 2 2 255\n") + '\x00' + '\xff' +
                                '\x80' + '\x40');
  const LumaPlane p = LoadLuma(dir / "a.pgm");
  ASSERT_EQ(p.width(), 2u);
  ASSERT_EQ(p.height(), 2u);
  EXPECT_EQ(p.at(0, 0), 0);
  EXPECT_EQ(p.at(1, 0), 255);
  EXPECT_EQ(p.at(0, 1), 128);
  EXPECT_EQ(p.at(1, 1), 64);
}

TEST(LoadLumaTest, PgmHeaderComments) {
  test::TempDir dir;
  WriteBytes(dir / "c.pgm", std::string("P5\n# made by hand\n1 1\n255\n") + '\x07');
  EXPECT_EQ(LoadLuma(dir / "c.pgm").at(0, 0), 7);
}

TEST(LoadLumaTest, RejectsMalformedPgm) {
  test::TempDir dir;
  WriteBytes(dir / "p2.pgm", "P2 1 1 255\n7\n");
  EXPECT_THROW(LoadLuma(dir / "p2.pgm"), Error);
  WriteBytes(dir / "short.pgm", "P5 4 4 255\nab");
  EXPECT_THROW(LoadLuma(dir / "short.pgm"), Error);
  WriteBytes(dir / "deep.pgm", "P5 1 1 65535\nab");
  EXPECT_THROW(LoadLuma(dir / "deep.pgm"), Error);
}

TEST(LoadLumaTest, MissingFile) {
  EXPECT_THROW(LoadLuma("/nonexistent/image.pgm"), Error);
}

TEST(LoadLumaTest, PngRedBecomesBt601Luma) {
  test::TempDir dir;
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = 2;
  image.height = 1;
  image.format = PNG_FORMAT_RGB;
  const unsigned char rgb[] = {255, 0, 0, 0, 0, 255};
  const std::string path = (dir / "red.png").string();
  ASSERT_TRUE(png_image_write_to_file(&image, path.c_str(), 0, rgb, 0, nullptr));
  const LumaPlane p = LoadLuma(path);
  EXPECT_EQ(p.at(0, 0), 76);  // round(0.299 * 255)
  EXPECT_EQ(p.at(1, 0), 29);  // round(0.114 * 255)
}

TEST(LoadLumaTest, GrayPngRoundTrip) {
  test::TempDir dir;
  const LumaPlane src = test::RandomPlane(13, 7, 3);
  WritePng(dir / "g.png", src);
  EXPECT_EQ(LoadLuma(dir / "g.png"), src);
}

TEST(LoadLumaTest, PgmRoundTrip) {
  test::TempDir dir;
  const LumaPlane src = test::RandomPlane(9, 5, 4);
  WritePgm(dir / "r.pgm", src);
  EXPECT_EQ(LoadLuma(dir / "r.pgm"), src);
}

TEST(LoadLumaTest, RawDimensionMismatch) {
  test::TempDir dir;
  WriteBytes(dir / "x.y", std::string(10, '\x01'));
  try {
    LoadLuma(dir / "x.y", ImageFormat::kRawY8, RawDims{3, 3});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("dimension mismatch"), std::string::npos);
  }
  const LumaPlane ok = LoadLuma(dir / "x.y", ImageFormat::kRawY8, RawDims{5, 2});
  EXPECT_EQ(ok.size(), 10u);
}

TEST(LumaFromRgbTest, Extremes) {
  EXPECT_EQ(LumaFromRgb(0, 0, 0), 0);
  EXPECT_EQ(LumaFromRgb(255, 255, 255), 255);
  EXPECT_EQ(LumaFromRgb(0, 255, 0), 150);
}

TEST(LumaPlaneTest, RejectsWrongSampleCount) {
  EXPECT_THROW(LumaPlane(2, 2, std::vector<uint8_t>(3)), Error);
}

TEST(PsnrTest, IdenticalPlanesHitTheFloor) {
  const LumaPlane a = test::RandomPlane(16, 16, 1);
  EXPECT_DOUBLE_EQ(Psnr(a, a), kIdenticalPsnr);
  EXPECT_NEAR(Psnr(a, a), 88.1308, 1e-4);
}

TEST(PsnrTest, OffByOneEverywhere) {
  const LumaPlane a = LumaPlane::Filled(8, 8, 100);
  const LumaPlane b = LumaPlane::Filled(8, 8, 101);
  EXPECT_DOUBLE_EQ(Mse(a, b), 1.0);
  EXPECT_NEAR(Psnr(a, b), 48.1308, 1e-4);
}

TEST(PsnrTest, MaximalError) {
  const LumaPlane a = LumaPlane::Filled(4, 4, 0);
  const LumaPlane b = LumaPlane::Filled(4, 4, 255);
  EXPECT_DOUBLE_EQ(Mse(a, b), 65025.0);
  EXPECT_DOUBLE_EQ(Psnr(a, b), 0.0);
}

TEST(PsnrTest, DimensionMismatch) {
  EXPECT_THROW(Psnr(LumaPlane::Filled(2, 2, 0), LumaPlane::Filled(2, 3, 0)), Error);
}

TEST(PsnrPropertyTest, SelfPsnrIsConstant) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const LumaPlane a = test::RandomPlane(1 + seed % 9, 1 + seed % 5, seed);
    EXPECT_EQ(Psnr(a, a), kIdenticalPsnr);
  }
}

TEST(PsnrPropertyTest, Symmetric) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const LumaPlane a = test::RandomPlane(12, 10, seed);
    const LumaPlane b = test::RandomPlane(12, 10, seed + 100);
    EXPECT_EQ(Psnr(a, b), Psnr(b, a));
  }
}

TEST(PsnrPropertyTest, ConstantOffset) {
  for (int e = 1; e <= 20; ++e) {
    std::vector<uint8_t> base(64), shifted(64);
    for (size_t i = 0; i < 64; ++i) {
      base[i] = static_cast<uint8_t>(40 + 2 * i);
      shifted[i] = static_cast<uint8_t>(base[i] + e);
    }
    const double expected = 10.0 * std::log10(65025.0 / (e * e));
    EXPECT_NEAR(Psnr(LumaPlane(8, 8, base), LumaPlane(8, 8, shifted)), expected,
                1e-12);
  }
}

}  // namespace
}  // namespace lambdaq
