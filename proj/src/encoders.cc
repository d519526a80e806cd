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

#include "lambdaq/encoders.h"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <system_error>
#include <thread>

namespace lambdaq {
namespace fs = std::filesystem;

// --- Reference encoder ------------------------------------------------------

double ReferenceQStep(int qp) { return std::exp2((qp - 4) / 6.0); }

std::vector<SampleBlock> QuantizeReconstruct(std::span<const CoeffBlock> coeffs,
                                             double q_step) {
  std::vector<SampleBlock> out;
  out.reserve(coeffs.size());
  for (const CoeffBlock& block : coeffs) {
    CoeffBlock q{};
    for (size_t i = 0; i < kBlockSize; ++i) {
      q[i] = q_step * std::round(block[i] / q_step);
    }
    out.push_back(InverseDct8x8(q));
  }
  return out;
}

double ReconstructionMse(std::span<const PixelBlock> blocks,
                         std::span<const SampleBlock> recon) {
  if (blocks.size() != recon.size() || blocks.empty()) {
    throw Error("block count mismatch");
  }
  double total = 0.0;
  for (size_t n = 0; n < blocks.size(); ++n) {
    double sse = 0.0;
    for (size_t i = 0; i < kBlockSize; ++i) {
      const double d = static_cast<double>(blocks[n][i]) - recon[n][i];
      sse += d * d;
    }
    total += sse;
  }
  return total / static_cast<double>(blocks.size() * kBlockSize);
}

EncodeResult ReferenceEncode(const LumaPlane& plane, int qp) {
  if (!kReferenceQpRange.Contains(qp)) {
    throw Error("reference encoder qp " + std::to_string(qp) +
                " outside [4, 40]");
  }
  const std::vector<PixelBlock> blocks = PartitionBlocks(plane);
  std::vector<CoeffBlock> coeffs;
  coeffs.reserve(blocks.size());
  for (const PixelBlock& b : blocks) coeffs.push_back(ForwardDct8x8(b));
  const std::vector<SampleBlock> recon =
      QuantizeReconstruct(coeffs, ReferenceQStep(qp));
  EncodeResult result;
  result.qp = qp;
  result.psnr = MseToPsnr(ReconstructionMse(blocks, recon));
  result.lambda = QpLambdaMap::HevcDefault().LambdaFromQp(qp);
  return result;
}

EncodeResult ReferenceEncoder::Encode(const LumaPlane& plane, int qp,
                                      const fs::path&) const {
  return ReferenceEncode(plane, qp);
}

// --- Adapter config ---------------------------------------------------------

AdapterConfig AdapterConfigFromJson(const nlohmann::json& doc) {
  try {
    AdapterConfig cfg;
    cfg.encoder_id = doc.at("encoder_id").get<std::string>();
    const auto& range = doc.at("qp_range");
    if (!range.is_array() || range.size() != 2) {
      throw ConfigError("qp_range must be [min, max]");
    }
    cfg.qp_range = {range[0].get<int>(), range[1].get<int>()};
    if (cfg.qp_range.min > cfg.qp_range.max) {
      throw ConfigError("adapter qp_range is empty");
    }
    cfg.encode_cmd = doc.at("encode_cmd").get<std::string>();
    if (doc.contains("decode_cmd") && !doc["decode_cmd"].is_null()) {
      cfg.decode_cmd = doc["decode_cmd"].get<std::string>();
    }
    cfg.timeout_s = doc.value("timeout_s", 120.0);
    if (!(cfg.timeout_s > 0.0)) throw ConfigError("timeout_s must be > 0");
    cfg.input_format = doc.value("input_format", std::string("pgm"));
    cfg.decoded_format = doc.value("decoded_format", std::string("pgm"));
    for (const std::string& f : {cfg.input_format, cfg.decoded_format}) {
      if (f != "pgm" && f != "png" && f != "y8") {
        throw ConfigError("unsupported adapter image format: " + f);
      }
    }
    if (doc.contains("qp_lambda")) {
      cfg.qp_lambda = QpLambdaMapFromJson(doc.at("qp_lambda"));
    }
    return cfg;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("malformed adapter config: ") + ex.what());
  }
}

AdapterConfig LoadAdapterConfig(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open adapter config " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError("malformed adapter config " + path.string() + ": " +
                      ex.what());
  }
  return AdapterConfigFromJson(doc);
}

// --- Subprocess plumbing ----------------------------------------------------

ProcessResult RunShell(const std::string& command, const fs::path& cwd,
                       std::chrono::milliseconds timeout) {
  const fs::path log_path = cwd / ".lambdaq-cmd.log";
  const std::string log_str = log_path.string();
  const std::string cwd_str = cwd.string();

  const pid_t pid = fork();
  if (pid < 0) throw Error(std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    setpgid(0, 0);
    if (chdir(cwd_str.c_str()) != 0) _exit(126);
    const int fd = open(log_str.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd >= 0) {
      dup2(fd, STDOUT_FILENO);
      dup2(fd, STDERR_FILENO);
      close(fd);
    }
    const int devnull = open("/dev/null", O_RDONLY);
    if (devnull >= 0) dup2(devnull, STDIN_FILENO);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);

  ProcessResult result;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  int status = 0;
  for (;;) {
    const pid_t r = waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR) {
      throw Error(std::string("waitpid failed: ") + std::strerror(errno));
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      kill(-pid, SIGKILL);
      kill(pid, SIGKILL);
      waitpid(pid, &status, 0);
      result.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (!result.timed_out) {
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  } else {
    result.exit_code = -1;
  }
  std::ifstream log(log_path, std::ios::binary);
  result.output.assign(std::istreambuf_iterator<char>(log),
                       std::istreambuf_iterator<char>());
  return result;
}

std::string ShellQuote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += '\'';
  return out;
}

std::string ExpandTemplate(const std::string& tmpl,
                           const std::map<std::string, std::string>& values) {
  std::string out;
  size_t pos = 0;
  while (pos < tmpl.size()) {
    const size_t open = tmpl.find('{', pos);
    if (open == std::string::npos) {
      out.append(tmpl, pos, std::string::npos);
      break;
    }
    const size_t close = tmpl.find('}', open);
    if (close == std::string::npos) {
      throw ConfigError("unterminated placeholder in: " + tmpl);
    }
    out.append(tmpl, pos, open - pos);
    const std::string name = tmpl.substr(open + 1, close - open - 1);
    const auto it = values.find(name);
    if (it == values.end()) {
      throw ConfigError("unknown placeholder {" + name + "} in: " + tmpl);
    }
    out += it->second;
    pos = close + 1;
  }
  return out;
}

LumaPlane FitToDimensions(const LumaPlane& plane, size_t width, size_t height) {
  if (plane.width() == width && plane.height() == height) return plane;
  std::vector<uint8_t> samples(width * height);
  for (size_t y = 0; y < height; ++y) {
    const auto row = plane.row(std::min(y, plane.height() - 1));
    for (size_t x = 0; x < width; ++x) {
      samples[y * width + x] = row[std::min(x, plane.width() - 1)];
    }
  }
  return LumaPlane(width, height, std::move(samples));
}

namespace {

std::string Tail(const std::string& s, size_t n = 2048) {
  return s.size() <= n ? s : s.substr(s.size() - n);
}

fs::path MakePrivateDir(const fs::path& root) {
  const fs::path base = root.empty() ? fs::temp_directory_path() : root;
  fs::create_directories(base);
  std::string tmpl = (base / "lambdaq-XXXXXX").string();
  if (mkdtemp(tmpl.data()) == nullptr) {
    throw Error("cannot create work directory under " + base.string());
  }
  return tmpl;
}

class ScopedDir {
 public:
  explicit ScopedDir(fs::path p) : path_(std::move(p)) {}
  ~ScopedDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScopedDir(const ScopedDir&) = delete;
  ScopedDir& operator=(const ScopedDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

ImageFormat ParseFormat(const std::string& f) {
  if (f == "pgm") return ImageFormat::kPgm;
  if (f == "png") return ImageFormat::kPng;
  return ImageFormat::kRawY8;
}

void WriteImage(const fs::path& path, const LumaPlane& plane,
                const std::string& format) {
  if (format == "pgm") {
    WritePgm(path, plane);
  } else if (format == "png") {
    WritePng(path, plane);
  } else {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(plane.samples().data()),
              static_cast<std::streamsize>(plane.size()));
    if (!out) throw Error("write failed: " + path.string());
  }
}

}  // namespace

ExternalEncoder::ExternalEncoder(AdapterConfig config)
    : config_(std::move(config)) {
  if (config_.encode_cmd.empty()) throw ConfigError("encode_cmd is empty");
}

QpLambdaMap ExternalEncoder::qp_lambda() const {
  return config_.qp_lambda.value_or(QpLambdaMap::HevcDefault());
}

EncodeResult ExternalEncoder::Encode(const LumaPlane& plane, int qp,
                                     const fs::path& workdir) const {
  ScopedDir dir(MakePrivateDir(workdir));
  const fs::path input = dir.path() / ("input." + config_.input_format);
  WriteImage(input, plane, config_.input_format);
  return Run(input, plane, qp, dir.path());
}

EncodeResult ExternalEncoder::EncodeFile(const fs::path& source, int qp,
                                         const fs::path& workdir) const {
  const LumaPlane plane = LoadLuma(source);
  ScopedDir dir(MakePrivateDir(workdir));
  return Run(fs::absolute(source), plane, qp, dir.path());
}

EncodeResult ExternalEncoder::Run(const fs::path& input,
                                  const LumaPlane& source, int qp,
                                  const fs::path& dir) const {
  if (!config_.qp_range.Contains(qp)) {
    throw Error(config_.encoder_id + ": qp " + std::to_string(qp) +
                " outside adapter qp_range");
  }
  const fs::path decoded = dir / ("decoded." + config_.decoded_format);
  const fs::path bitstream = config_.decode_cmd ? dir / "bitstream.bin" : decoded;
  const auto timeout = std::chrono::milliseconds(
      static_cast<int64_t>(config_.timeout_s * 1000.0));
  auto values = [&](const fs::path& in, const fs::path& out) {
    return std::map<std::string, std::string>{
        {"input", ShellQuote(in.string())},
        {"output", ShellQuote(out.string())},
        {"qp", std::to_string(qp)},
        {"width", std::to_string(source.width())},
        {"height", std::to_string(source.height())}};
  };
  auto run_step = [&](const std::string& what, const std::string& cmd) {
    const ProcessResult r = RunShell(cmd, dir, timeout);
    if (r.timed_out) {
      throw ProcessError(config_.encoder_id + " " + what + " timed out after " +
                             std::to_string(config_.timeout_s) + " s",
                         -1, Tail(r.output));
    }
    if (r.exit_code != 0) {
      throw ProcessError(config_.encoder_id + " " + what + " exited with code " +
                             std::to_string(r.exit_code) + ": " + Tail(r.output),
                         r.exit_code, Tail(r.output));
    }
  };

  run_step("encode", ExpandTemplate(config_.encode_cmd, values(input, bitstream)));
  if (!fs::exists(bitstream)) {
    throw Error(config_.encoder_id + ": encoder produced no output file");
  }
  EncodeResult result;
  result.qp = qp;
  result.bytes = fs::file_size(bitstream);
  if (config_.decode_cmd) {
    run_step("decode", ExpandTemplate(*config_.decode_cmd,
                                      values(bitstream, decoded)));
  }
  LumaPlane out;
  try {
    out = LoadLuma(decoded, ParseFormat(config_.decoded_format),
                   RawDims{source.width(), source.height()});
  } catch (const Error& ex) {
    throw Error(config_.encoder_id + ": unparsable decoded output: " +
                ex.what());
  }
  result.psnr = Psnr(source, FitToDimensions(out, source.width(),
                                             source.height()));
  return result;
}

std::unique_ptr<Encoder> MakeEncoder(const std::string& spec) {
  if (spec == "reference") return std::make_unique<ReferenceEncoder>();
  return std::make_unique<ExternalEncoder>(LoadAdapterConfig(spec));
}

// --- QP axis alignment ------------------------------------------------------

std::vector<int> AlignQpAxis(std::span<const int> qps, QpDirection direction) {
  if (qps.empty()) throw Error("QP list must be non-empty");
  const auto [lo, hi] = std::minmax_element(qps.begin(), qps.end());
  std::vector<int> out;
  out.reserve(qps.size());
  for (int qp : qps) {
    out.push_back(direction == QpDirection::kQualityIncreasing ? *hi - qp
                                                               : qp - *lo);
  }
  return out;
}

std::pair<std::vector<int>, std::vector<int>> AlignQpAxes(
    std::span<const int> qps_a, std::span<const int> qps_b,
    QpDirection direction_a, QpDirection direction_b) {
  return {AlignQpAxis(qps_a, direction_a), AlignQpAxis(qps_b, direction_b)};
}

}  // namespace lambdaq
