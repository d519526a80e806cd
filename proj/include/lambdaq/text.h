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

// Number formatting and CSV field helpers shared by the file writers.

#ifndef LAMBDAQ_TEXT_H_
#define LAMBDAQ_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace lambdaq {

// Shortest representation that parses back to the same double; "inf",
// "-inf" and "nan" for non-finite values.
std::string FormatDouble(double v);

// Throws Error unless the whole field is a number.
double ParseDouble(std::string_view field);
int ParseInt(std::string_view field);

std::vector<std::string_view> SplitCsvLine(std::string_view line);

}  // namespace lambdaq

#endif  // LAMBDAQ_TEXT_H_
