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

#ifndef LAMBDAQ_TOOLS_CLI_H_
#define LAMBDAQ_TOOLS_CLI_H_

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace lambdaq::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Overrides the bundled model directory.
inline constexpr const char* kModelDirEnv = "LAMBDAQ_MODEL_DIR";

// Runs the lambdaq command line; args excludes the program name.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

// Resolves --model: an existing file, else <name>.json in the model
// directory ($LAMBDAQ_MODEL_DIR, then the bundled directory).
std::filesystem::path ResolveModel(const std::string& spec);

// "4..40" or "8,16,32".
std::vector<int> ParseIntList(const std::string& text);
std::vector<double> ParseTargets(const std::string& text);

}  // namespace lambdaq::cli

#endif  // LAMBDAQ_TOOLS_CLI_H_
