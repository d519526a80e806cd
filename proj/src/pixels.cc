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

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "lambdaq/error.h"

namespace lambdaq {
namespace {

std::vector<uint8_t> ReadAll(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (in.bad()) throw Error("read failed: " + path.string());
  return bytes;
}

// Netpbm header token reader; skips whitespace and '#' comments.
class PnmHeader {
 public:
  explicit PnmHeader(const std::vector<uint8_t>& bytes) : bytes_(bytes) {}

  std::string Token() {
    SkipSpaceAndComments();
    std::string tok;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) {
      tok.push_back(static_cast<char>(bytes_[pos_++]));
    }
    return tok;
  }

  size_t Number(const char* what) {
    const std::string tok = Token();
    if (tok.empty() || !std::all_of(tok.begin(), tok.end(), ::isdigit) ||
        tok.size() > 9) {
      throw Error(std::string("malformed header: bad ") + what);
    }
    return std::stoul(tok);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  size_t RasterOffset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error("malformed header: missing raster separator");
    }
    return pos_ + 1;
  }

 private:
  void SkipSpaceAndComments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<uint8_t>& bytes_;
  size_t pos_ = 0;
};

LumaPlane LoadPgm(const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = ReadAll(path);
  PnmHeader header(bytes);
  if (header.Token() != "P5") {
    throw Error("malformed header: not a binary PGM (P5): " + path.string());
  }
  const size_t width = header.Number("width");
  const size_t height = header.Number("height");
  const size_t maxval = header.Number("maxval");
  if (width == 0 || height == 0) throw Error("malformed header: zero size");
  if (maxval != 255) {
    throw Error("malformed header: only maxval 255 is supported");
  }
  const size_t offset = header.RasterOffset();
  if (bytes.size() - offset < width * height) {
    throw Error("truncated PGM raster: " + path.string());
  }
  std::vector<uint8_t> samples(bytes.begin() + offset,
                               bytes.begin() + offset + width * height);
  return LumaPlane(width, height, std::move(samples));
}

LumaPlane LoadRaw(const std::filesystem::path& path,
                  const std::optional<RawDims>& dims) {
  if (!dims || dims->width == 0 || dims->height == 0) {
    throw Error("raw-y8 input requires width and height");
  }
  std::vector<uint8_t> bytes = ReadAll(path);
  if (bytes.size() != dims->width * dims->height) {
    throw Error("dimension mismatch: " + path.string() + " has " +
                std::to_string(bytes.size()) + " bytes, expected " +
                std::to_string(dims->width * dims->height));
  }
  return LumaPlane(dims->width, dims->height, std::move(bytes));
}

LumaPlane LoadPng(const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = ReadAll(path);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error("malformed PNG " + path.string() + ": " + image.message);
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw Error("only 8-bit PNG is supported: " + path.string());
  }
  // Read with alpha kept so that it can be dropped rather than composited.
  const bool color = image.format & PNG_FORMAT_FLAG_COLOR;
  image.format = color ? PNG_FORMAT_RGBA : PNG_FORMAT_GA;
  const size_t channels = color ? 4 : 2;
  const size_t width = image.width;
  const size_t height = image.height;
  std::vector<uint8_t> buffer(width * height * channels);
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error("PNG decode failed " + path.string() + ": " + msg);
  }
  std::vector<uint8_t> samples(width * height);
  for (size_t i = 0; i < samples.size(); ++i) {
    const uint8_t* px = &buffer[i * channels];
    samples[i] = color ? LumaFromRgb(px[0], px[1], px[2]) : px[0];
  }
  return LumaPlane(width, height, std::move(samples));
}

}  // namespace

LumaPlane::LumaPlane(size_t width, size_t height, std::vector<uint8_t> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
  if (width_ == 0 || height_ == 0) throw Error("plane dimensions must be >= 1");
  if (samples_.size() != width_ * height_) {
    throw Error("dimension mismatch: sample count != width*height");
  }
}

LumaPlane LumaPlane::Filled(size_t width, size_t height, uint8_t value) {
  return LumaPlane(width, height, std::vector<uint8_t>(width * height, value));
}

ImageFormat FormatFromExtension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pgm") return ImageFormat::kPgm;
  if (ext == ".png") return ImageFormat::kPng;
  if (ext == ".y" || ext == ".y8" || ext == ".raw") return ImageFormat::kRawY8;
  throw Error("unknown image extension: " + path.string());
}

LumaPlane LoadLuma(const std::filesystem::path& path, ImageFormat format,
                   std::optional<RawDims> dims) {
  if (format == ImageFormat::kAuto) format = FormatFromExtension(path);
  switch (format) {
    case ImageFormat::kPgm:
      return LoadPgm(path);
    case ImageFormat::kPng:
      return LoadPng(path);
    case ImageFormat::kRawY8:
      return LoadRaw(path, dims);
    case ImageFormat::kAuto:
      break;
  }
  throw Error("unsupported format");
}

uint8_t LumaFromRgb(uint8_t r, uint8_t g, uint8_t b) {
  const double y = 0.299 * r + 0.587 * g + 0.114 * b;
  return static_cast<uint8_t>(std::clamp(std::round(y), 0.0, 255.0));
}

void WritePgm(const std::filesystem::path& path, const LumaPlane& plane) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot create " + path.string());
  out << "P5\n" << plane.width() << ' ' << plane.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(plane.samples().data()),
            static_cast<std::streamsize>(plane.size()));
  if (!out) throw Error("write failed: " + path.string());
}

void WritePng(const std::filesystem::path& path, const LumaPlane& plane) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(plane.width());
  image.height = static_cast<png_uint_32>(plane.height());
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0,
                               plane.samples().data(), 0, nullptr)) {
    throw Error("PNG write failed " + path.string() + ": " + image.message);
  }
}

double MseToPsnr(double mse) {
  return 10.0 * std::log10(kPeak * kPeak / std::max(mse, kMseFloor));
}

double Mse(const LumaPlane& reference, const LumaPlane& test) {
  if (reference.width() != test.width() ||
      reference.height() != test.height()) {
    throw Error("dimension mismatch between planes");
  }
  const auto a = reference.samples();
  const auto b = test.samples();
  // Integer accumulation is exact and order-independent.
  uint64_t sse = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    const int d = int{a[i]} - int{b[i]};
    sse += static_cast<uint64_t>(d * d);
  }
  return static_cast<double>(sse) / static_cast<double>(a.size());
}

double Psnr(const LumaPlane& reference, const LumaPlane& test) {
  return MseToPsnr(Mse(reference, test));
}

}  // namespace lambdaq
