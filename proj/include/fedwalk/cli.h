//
// Copyright 2026 The FedWalk Simulator Authors
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
//

#ifndef FEDWALK_CLI_H_
#define FEDWALK_CLI_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "fedwalk/federation.h"

namespace fedwalk::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kData = 2,
  kInternal = 3,
};

// Environment variable naming the config file used when --config is absent.
inline constexpr const char* kConfigEnv = "FEDWALK_CONFIG";

// Flat `key = value` lines; `#` starts a comment. Values are applied on top
// of `config` in file order.
void ApplyConfigFile(const std::string& path, RunConfig& config);

struct TheoryRow {
  std::size_t l = 0;
  double p = 0.0;
  double expected = 0.0;        // published closed form
  double expected_exact = 0.0;  // recurrence solution
  double savings = 0.0;         // (l - 1) - expected
  std::optional<double> total_savings;  // |V| gamma savings
};

std::vector<TheoryRow> TheoryTable(std::span<const std::size_t> lengths,
                                   std::span<const double> ps,
                                   std::optional<std::uint64_t> num_vertices = std::nullopt,
                                   std::size_t gamma = 80);
void PrintTheoryTable(std::span<const TheoryRow> rows, int precision, std::ostream& out);

// Runs one subcommand. Never throws; errors are reported on `err` and mapped
// to an ExitCode.
int ParseAndDispatch(int argc, const char* const* argv, std::ostream& out,
                     std::ostream& err);

}  // namespace fedwalk::cli

#endif  // FEDWALK_CLI_H_
