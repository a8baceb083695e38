// Copyright 2026 The dpsurv Authors
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

#ifndef DPSURV_CLI_HPP_
#define DPSURV_CLI_HPP_

#include <iosfwd>

namespace dpsurv {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

// Entry point of the `dpsurv` tool (subcommands fit, synth, eval,
// sensitivity). Output written to "-" goes to `out`; diagnostics go to
// `err`. Returns 0 on success, 2 for usage or configuration problems and 3
// for numeric or runtime failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dpsurv

#endif  // DPSURV_CLI_HPP_
