// Copyright 2026 The realsr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef REALSR_CLI_HPP_
#define REALSR_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace realsr {

// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,     // unexpected error
  kExitUsage = 2,       // bad or missing arguments
  kExitIo = 3,          // file or codec failure
  kExitValidation = 4,  // invalid data or precondition
  kExitDiverged = 5,    // training produced non-finite values
};

// Entry point of the `realsr` tool. args excludes the program name.
// Results go to `out`, progress and diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace realsr

#endif  // REALSR_CLI_HPP_
