// Copyright 2026 The DMR Authors.
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


#ifndef DMR_TOOLS_CLI_HPP_
#define DMR_TOOLS_CLI_HPP_

#include <iosfwd>

namespace dmr::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Entry point of the `dmr` tool. Returns 0 on success, 2 on usage errors
// and 1 on pipeline failures.
int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dmr::cli

#endif  // DMR_TOOLS_CLI_HPP_
