/*
 * Copyright 2026 The ANRS Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ANRS_CLI_HPP_
#define ANRS_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace anrs {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitCompatibility = 3;
inline constexpr int kExitNumerical = 4;

// Entry point of the `anrs` tool: preprocess, train, eval and
// inspect-aspects. Returns the process exit code.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace anrs

#endif  // ANRS_CLI_HPP_
