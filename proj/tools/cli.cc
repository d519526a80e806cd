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

#include "cli.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lambdaq/control.h"
#include "lambdaq/corpus.h"
#include "lambdaq/encoders.h"
#include "lambdaq/error.h"
#include "lambdaq/evaluation.h"
#include "lambdaq/models.h"
#include "lambdaq/text.h"
#include "lambdaq/training.h"
#include "lambdaq/transform.h"

#ifndef LAMBDAQ_BUNDLED_MODEL_DIR
#define LAMBDAQ_BUNDLED_MODEL_DIR "models"
#endif

namespace lambdaq::cli {
namespace fs = std::filesystem;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

fs::path ModelDir() {
  if (const char* env = std::getenv(kModelDirEnv); env != nullptr && *env) {
    return env;
  }
  return LAMBDAQ_BUNDLED_MODEL_DIR;
}

// Collects every missing input so they are reported together.
class Preflight {
 public:
  void File(const fs::path& p, const std::string& what) {
    if (!fs::is_regular_file(p)) problems_.push_back(what + " not found: " + p.string());
  }
  void Dir(const fs::path& p, const std::string& what) {
    if (!fs::is_directory(p)) problems_.push_back(what + " not found: " + p.string());
  }
  void Model(const std::string& spec) {
    try {
      ResolveModel(spec);
    } catch (const Error& ex) {
      problems_.push_back(ex.what());
    }
  }
  void Adapter(const std::string& spec) {
    if (spec != "reference") File(spec, "adapter config");
  }
  void Check() const {
    if (problems_.empty()) return;
    std::string msg;
    for (const std::string& p : problems_) msg += (msg.empty() ? "" : "\n") + p;
    throw UsageError(msg);
  }

 private:
  std::vector<std::string> problems_;
};

std::optional<RawDims> Dims(size_t width, size_t height) {
  if (width == 0 && height == 0) return std::nullopt;
  return RawDims{width, height};
}

LumaPlane LoadInput(const std::string& path, size_t width, size_t height) {
  return LoadLuma(path, ImageFormat::kAuto, Dims(width, height));
}

struct Common {
  uint64_t seed = 1;
  int verbosity = 0;
  size_t jobs = 1;
};

void AddCommon(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Seed for any randomized generation");
  cmd->add_flag("-v,--verbose", c.verbosity, "More log output on stderr");
}

// --- le ---------------------------------------------------------------------

struct LeArgs {
  std::vector<std::string> images;
  std::string qsteps = "8,16,32";
  std::string mode = "centered";
  size_t width = 0, height = 0;
};

int CmdLe(const LeArgs& a, std::ostream& out) {
  Preflight pre;
  for (const auto& img : a.images) pre.File(img, "image");
  pre.Check();
  const std::vector<int> steps = ParseIntList(a.qsteps);
  const QuantErrorMode mode =
      a.mode == "literal" ? QuantErrorMode::kLiteral : QuantErrorMode::kCentered;
  out << "image";
  for (int s : steps) out << ",le_q" << s;
  out << '\n';
  for (const auto& img : a.images) {
    const LeVector le = ComputeLe(LoadInput(img, a.width, a.height), steps, mode);
    out << img;
    for (const LeEntry& e : le.entries) out << ',' << FormatDouble(e.le);
    out << '\n';
  }
  return kExitOk;
}

// --- predict ----------------------------------------------------------------

struct PredictArgs {
  std::vector<std::string> images;
  double target = 0.0;
  std::string model = "hm";
  bool audit = false;
  size_t width = 0, height = 0;
};

int CmdPredict(const PredictArgs& a, const Common& c, std::ostream& out,
               std::ostream& err) {
  if (!(a.target > 0.0 && a.target < 100.0)) {
    throw UsageError("--target-psnr must lie in (0, 100) dB");
  }
  Preflight pre;
  for (const auto& img : a.images) pre.File(img, "image");
  pre.Model(a.model);
  pre.Check();
  const PsnrLeModelSet set = LoadModelSet(ResolveModel(a.model));

  std::vector<ControlInput> inputs;
  std::vector<std::string> load_errors(a.images.size());
  for (size_t i = 0; i < a.images.size(); ++i) {
    try {
      inputs.emplace_back(LoadInput(a.images[i], a.width, a.height));
    } catch (const std::exception& ex) {
      load_errors[i] = ex.what();
      inputs.emplace_back(fs::path(a.images[i]));  // fails again, per item
    }
  }
  const std::vector<BatchItem> items = PredictQpBatch(inputs, a.target, set, c.jobs);

  bool failed = false;
  nlohmann::json audit = nlohmann::json::array();
  if (!a.audit) out << "image,qp,lambda,a,b,clamped\n";
  for (size_t i = 0; i < items.size(); ++i) {
    if (!items[i].ok()) {
      failed = true;
      err << a.images[i] << ": "
          << (load_errors[i].empty() ? items[i].error : load_errors[i]) << '\n';
      continue;
    }
    const ControlDecision& d = *items[i].decision;
    if (c.verbosity > 0) {
      for (const auto& w : d.warnings) err << a.images[i] << ": warning: " << w << '\n';
    }
    if (a.audit) {
      nlohmann::json j = DecisionToJson(d);
      j["image"] = a.images[i];
      audit.push_back(j);
    } else {
      out << a.images[i] << ',' << d.qp << ',' << FormatDouble(d.lambda) << ','
          << FormatDouble(d.dlambda.a()) << ',' << FormatDouble(d.dlambda.b())
          << ',' << (d.clamped ? 1 : 0) << '\n';
    }
  }
  if (a.audit) out << audit.dump(2) << '\n';
  return failed ? kExitRuntime : kExitOk;
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
  std::string corpus;
  std::string adapter = "reference";
  std::string qps = "4..40";
  std::string qsteps = "8,16,32";
  std::string out_model;
  std::string records;
  std::string grid;
  std::string encoder_id;
  bool resume = false;
};

int CmdTrain(const TrainArgs& a, const Common& c, std::ostream& out,
             std::ostream& err) {
  Preflight pre;
  pre.Dir(a.corpus, "corpus directory");
  pre.Adapter(a.adapter);
  pre.Check();
  const std::vector<fs::path> corpus = ListImages(a.corpus);
  if (corpus.empty()) throw UsageError("corpus directory has no .pgm/.png images");
  const std::unique_ptr<Encoder> encoder = MakeEncoder(a.adapter);

  SweepOptions opt;
  opt.qps = ParseIntList(a.qps);
  opt.q_steps = ParseIntList(a.qsteps);
  opt.records_path = a.records.empty() ? fs::path(a.out_model + ".records.csv")
                                       : fs::path(a.records);
  opt.resume = a.resume;
  opt.parallelism = c.jobs;
  const SweepResult sweep = SweepCorpus(corpus, *encoder, opt);
  for (const SweepFailure& f : sweep.failures) {
    err << "sweep: " << f.image_id << ": " << f.message << '\n';
  }
  const FitGrid grid = BuildFitGrid(sweep.records, opt.q_steps);
  WriteFitGridCsv(a.grid.empty() ? a.out_model + ".grid.csv" : a.grid, grid);
  const std::string id = a.encoder_id.empty() ? encoder->id() : a.encoder_id;
  const PsnrLeModelSet set = SelectAnchors(grid, opt.q_steps, id,
                                           encoder->qp_range(), encoder->qp_lambda());
  SaveModelSet(a.out_model, set);
  out << "encodes " << sweep.encodes << ", resumed " << sweep.resumed_cells
      << ", failures " << sweep.failures.size() << '\n';
  out << "q_step,qp,a,b,r2\n";
  for (const PsnrLeEntry& e : set.entries) {
    out << e.q_step << ',' << e.qp << ',' << FormatDouble(e.line.a) << ','
        << FormatDouble(e.line.b) << ',' << FormatDouble(e.line.r2.value_or(0.0))
        << '\n';
  }
  return kExitOk;
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  std::vector<std::string> corpora;
  std::string targets = "35..45";
  std::string model = "hm";
  std::string adapter = "reference";
  std::optional<double> bad_case_threshold;
  std::string out_dir = "eval";
};

int CmdEvaluate(const EvaluateArgs& a, const Common& c, std::ostream& out) {
  Preflight pre;
  for (const auto& dir : a.corpora) pre.Dir(dir, "corpus directory");
  pre.Model(a.model);
  pre.Adapter(a.adapter);
  pre.Check();
  const std::vector<double> targets = ParseTargets(a.targets);
  const PsnrLeModelSet set = LoadModelSet(ResolveModel(a.model));
  const std::unique_ptr<Encoder> encoder = MakeEncoder(a.adapter);
  EvalOptions opt;
  opt.bad_case_threshold = a.bad_case_threshold;
  opt.parallelism = c.jobs;

  fs::create_directories(a.out_dir);
  std::vector<TargetSweep> sweeps;
  nlohmann::json summary;
  summary["model"] = set.encoder_id;
  summary["adapter"] = encoder->id();
  summary["sets"] = nlohmann::json::array();
  for (size_t s = 0; s < a.corpora.size(); ++s) {
    std::vector<EvalInput> inputs;
    for (const fs::path& p : ListImages(a.corpora[s])) {
      inputs.push_back({p.filename().string(), p});
    }
    if (inputs.empty()) {
      throw UsageError("corpus directory has no images: " + a.corpora[s]);
    }
    TargetSweep sweep = EvaluateTargets(inputs, targets, set, *encoder, opt);
    const std::string tag = a.corpora.size() > 1 ? "set" + std::to_string(s) + "_" : "";
    WriteEvalCsv(fs::path(a.out_dir) / (tag + "per_image.csv"), sweep.reports);
    nlohmann::json js;
    js["corpus"] = a.corpora[s];
    js["mean_diff_percent"] = sweep.mean_diff_percent;
    js["mean_variance"] = sweep.mean_variance ? nlohmann::json(*sweep.mean_variance)
                                              : nlohmann::json();
    js["targets"] = nlohmann::json::array();
    for (const EvalReport& r : sweep.reports) {
      WriteHistogramCsv(fs::path(a.out_dir) /
                            (tag + "histogram_t" + FormatDouble(r.target_psnr) + ".csv"),
                        r);
      js["targets"].push_back(ReportToJson(r));
      out << a.corpora[s] << " target " << FormatDouble(r.target_psnr)
          << ": diff% " << FormatDouble(r.diff_percent) << ", variance "
          << (r.variance ? FormatDouble(*r.variance) : std::string("n/a"))
          << ", bad-case " << FormatDouble(r.bad_case_ratio) << '\n';
    }
    out << a.corpora[s] << " average: diff% " << FormatDouble(sweep.mean_diff_percent)
        << ", variance "
        << (sweep.mean_variance ? FormatDouble(*sweep.mean_variance) : std::string("n/a"))
        << '\n';
    summary["sets"].push_back(js);
    sweeps.push_back(std::move(sweep));
  }
  const SetAverages avg = CombineSets(sweeps);
  auto opt_json = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json();
  };
  summary["image_weighted"] = {{"diff_percent", avg.image_weighted_diff_percent},
                               {"variance", opt_json(avg.image_weighted_variance)}};
  summary["set_weighted"] = {{"diff_percent", avg.set_weighted_diff_percent},
                             {"variance", opt_json(avg.set_weighted_variance)}};
  std::ofstream js(fs::path(a.out_dir) / "summary.json");
  js << summary.dump(2) << '\n';
  if (!js) throw Error("cannot write summary.json");
  return kExitOk;
}

// --- gen-corpus ---------------------------------------------------------

struct GenArgs {
  std::string out_dir;
  size_t count = 20;
  size_t width = 64, height = 64;
  size_t offset = 0;
  std::string mix = "mixed";
};

int CmdGenCorpus(const GenArgs& a, const Common& c, std::ostream& out) {
  if (a.count == 0) throw UsageError("--count must be >= 1");
  const CorpusMix mix = a.mix == "textured" ? CorpusMix::kTextured : CorpusMix::kMixed;
  std::vector<NamedPlane> images;
  for (size_t i = 0; i < a.count; ++i) {
    images.push_back(GenerateImage(c.seed, a.offset + i, a.width, a.height, mix));
  }
  for (const fs::path& p : WriteCorpus(a.out_dir, images)) out << p.string() << '\n';
  return kExitOk;
}

// --- model ------------------------------------------------------------------

int CmdModelShow(const std::string& spec, std::ostream& out) {
  Preflight pre;
  pre.Model(spec);
  pre.Check();
  out << ModelSetToJson(LoadModelSet(ResolveModel(spec))).dump(2) << '\n';
  return kExitOk;
}

int CmdModelList(std::ostream& out) {
  const fs::path dir = ModelDir();
  if (!fs::is_directory(dir)) throw UsageError("model directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& f : files) {
    try {
      const PsnrLeModelSet set = LoadModelSet(f);
      out << f.stem().string() << ": encoder " << set.encoder_id << ", anchors";
      for (const PsnrLeEntry& e : set.entries) out << " (" << e.q_step << "," << e.qp << ")";
      out << '\n';
    } catch (const Error&) {
      // Not a model set (e.g. a bare QP-lambda map).
    }
  }
  return kExitOk;
}

}  // namespace

fs::path ResolveModel(const std::string& spec) {
  if (fs::is_regular_file(spec)) return spec;
  const fs::path candidate = ModelDir() / (spec + ".json");
  if (fs::is_regular_file(candidate)) return candidate;
  throw ConfigError("model not found: " + spec + " (looked in " +
                    ModelDir().string() + ")");
}

std::vector<int> ParseIntList(const std::string& text) {
  std::vector<int> out;
  try {
    if (const size_t dots = text.find(".."); dots != std::string::npos) {
      const int lo = ParseInt(text.substr(0, dots));
      const int hi = ParseInt(text.substr(dots + 2));
      if (lo > hi) throw UsageError("empty range: " + text);
      for (int v = lo; v <= hi; ++v) out.push_back(v);
      return out;
    }
    for (std::string_view f : SplitCsvLine(text)) out.push_back(ParseInt(f));
  } catch (const UsageError&) {
    throw;
  } catch (const Error& ex) {
    throw UsageError("bad integer list '" + text + "': " + ex.what());
  }
  return out;
}

std::vector<double> ParseTargets(const std::string& text) {
  std::vector<double> out;
  try {
    if (const size_t dots = text.find(".."); dots != std::string::npos) {
      const double lo = ParseDouble(text.substr(0, dots));
      const double hi = ParseDouble(text.substr(dots + 2));
      if (lo > hi) throw UsageError("empty range: " + text);
      for (double v = lo; v <= hi + 1e-9; v += 1.0) out.push_back(v);
    } else {
      for (std::string_view f : SplitCsvLine(text)) out.push_back(ParseDouble(f));
    }
  } catch (const UsageError&) {
    throw;
  } catch (const Error& ex) {
    throw UsageError("bad target list '" + text + "': " + ex.what());
  }
  for (double t : out) {
    if (!(t > 0.0 && t < 100.0)) throw UsageError("targets must lie in (0, 100) dB");
  }
  return out;
}

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Predicts the QP that encodes an image to a target PSNR", "lambdaq"};
  app.require_subcommand(1);
  Common common;

  LeArgs le;
  auto* le_cmd = app.add_subcommand("le", "Print LE statistics per image (CSV)");
  le_cmd->add_option("images", le.images, "PGM/PNG/raw-y8 images")->required();
  le_cmd->add_option("--qsteps", le.qsteps, "Quantization steps");
  le_cmd->add_option("--mode", le.mode, "centered | literal")
      ->check(CLI::IsMember({"centered", "literal"}));
  le_cmd->add_option("--width", le.width, "Width for raw-y8 input");
  le_cmd->add_option("--height", le.height, "Height for raw-y8 input");
  AddCommon(le_cmd, common);

  PredictArgs pr;
  auto* pr_cmd = app.add_subcommand("predict", "Choose a QP per image for a target PSNR");
  pr_cmd->add_option("images", pr.images, "Images")->required();
  pr_cmd->add_option("--target-psnr", pr.target, "Target PSNR in dB")->required();
  pr_cmd->add_option("--model", pr.model, "Model set file or bundled name");
  pr_cmd->add_flag("--audit", pr.audit, "Emit JSON decisions with intermediates");
  pr_cmd->add_option("--width", pr.width, "Width for raw-y8 input");
  pr_cmd->add_option("--height", pr.height, "Height for raw-y8 input");
  pr_cmd->add_option("-j,--jobs", common.jobs, "Worker threads");
  AddCommon(pr_cmd, common);

  TrainArgs tr;
  auto* tr_cmd = app.add_subcommand("train", "Fit a model set from a QP sweep");
  tr_cmd->add_option("--corpus", tr.corpus, "Directory of training images")->required();
  tr_cmd->add_option("--adapter", tr.adapter, "Adapter JSON or 'reference'");
  tr_cmd->add_option("--qps", tr.qps, "QPs to sweep, e.g. 4..40");
  tr_cmd->add_option("--qsteps", tr.qsteps, "LE quantization steps");
  tr_cmd->add_option("--out", tr.out_model, "Output model set JSON")->required();
  tr_cmd->add_option("--records", tr.records, "Sweep record CSV (default <out>.records.csv)");
  tr_cmd->add_option("--grid", tr.grid, "Fit grid CSV (default <out>.grid.csv)");
  tr_cmd->add_option("--encoder-id", tr.encoder_id, "encoder_id written to the model");
  tr_cmd->add_flag("--resume", tr.resume, "Reuse finished cells of the record file");
  tr_cmd->add_option("-j,--jobs", common.jobs, "Worker threads");
  AddCommon(tr_cmd, common);

  EvaluateArgs ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "Measure control accuracy on corpora");
  ev_cmd->add_option("--corpus", ev.corpora, "Image directory (repeatable)")->required();
  ev_cmd->add_option("--targets", ev.targets, "Targets, e.g. 35..45 or 38,40");
  ev_cmd->add_option("--model", ev.model, "Model set file or bundled name");
  ev_cmd->add_option("--adapter", ev.adapter, "Adapter JSON or 'reference'");
  ev_cmd->add_option("--bad-case-threshold", ev.bad_case_threshold,
                     "PSNR below which an image is a bad case (default target-1)");
  ev_cmd->add_option("--out-dir", ev.out_dir, "Report directory");
  ev_cmd->add_option("-j,--jobs", common.jobs, "Worker threads");
  AddCommon(ev_cmd, common);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-corpus", "Write seeded synthetic PGM images");
  gen_cmd->add_option("--out", gen.out_dir, "Output directory")->required();
  gen_cmd->add_option("--count", gen.count, "Number of images");
  gen_cmd->add_option("--width", gen.width, "Image width");
  gen_cmd->add_option("--height", gen.height, "Image height");
  gen_cmd->add_option("--offset", gen.offset, "Index of the first image");
  gen_cmd->add_option("--mix", gen.mix, "mixed | textured")
      ->check(CLI::IsMember({"mixed", "textured"}));
  AddCommon(gen_cmd, common);

  std::string model_spec;
  auto* model_cmd = app.add_subcommand("model", "Inspect model sets");
  model_cmd->require_subcommand(1);
  auto* show_cmd = model_cmd->add_subcommand("show", "Print a model set");
  show_cmd->add_option("model", model_spec, "Model file or bundled name")->required();
  auto* list_cmd = model_cmd->add_subcommand("list", "List bundled model sets");
  AddCommon(show_cmd, common);
  AddCommon(list_cmd, common);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (common.jobs == 0) throw UsageError("--jobs must be >= 1");
    if (*le_cmd) return CmdLe(le, out);
    if (*pr_cmd) return CmdPredict(pr, common, out, err);
    if (*tr_cmd) return CmdTrain(tr, common, out, err);
    if (*ev_cmd) return CmdEvaluate(ev, common, out);
    if (*gen_cmd) return CmdGenCorpus(gen, common, out);
    if (*show_cmd) return CmdModelShow(model_spec, out);
    if (*list_cmd) return CmdModelList(out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace lambdaq::cli
