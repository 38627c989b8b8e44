// Copyright 2026 The vpcr Authors.
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

// Command-line front end: ingest, adjudicate, stats, train, eval, sweep
// and predict. Every command writes a run manifest next to its output.

#ifndef VPCR_CLI_H_
#define VPCR_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace vpcr {

// Runs one command; args[0] is the program name. Returns the process exit status: 0 on success, 1 on a
// data or runtime error, 2 on a usage error. Diagnostics go to `err`.
int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace vpcr

#endif  // VPCR_CLI_H_
