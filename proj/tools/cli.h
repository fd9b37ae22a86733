// Copyright 2026 The segkit Authors. All Rights Reserved.
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

#ifndef SEGKIT_TOOLS_CLI_H_
#define SEGKIT_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace segkit::cli {

inline constexpr char kVersion[] = "segkit 1.0.0";

// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kDataError = 1;
inline constexpr int kUsageError = 2;

// `args` excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);
int dispatch(int argc, char** argv);

}  // namespace segkit::cli

#endif  // SEGKIT_TOOLS_CLI_H_
