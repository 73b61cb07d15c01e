// include/emoeval/cli.h

// Copyright 2026 The emoeval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef EMOEVAL_CLI_H_
#define EMOEVAL_CLI_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emoeval/nn.h"
#include "json.hpp"

namespace emoeval {
namespace cli {

extern const char* const kToolName;
extern const char* const kVersion;
extern const char* const kSeedEnvVar;  // EMOEVAL_SEED

const std::vector<std::string>& Commands();

struct Invocation {
  std::string command;
  std::string config_path;
  std::optional<uint64_t> seed;  // --seed, overrides config and environment
};

// Seed precedence: flag, then the config's "seed", then EMOEVAL_SEED, then 0.
uint64_t ResolveSeed(const std::optional<uint64_t>& flag, const nlohmann::json& config);

// Runs one command and returns its report: tool, version, command,
// config_hash, seed, config, results. When the config names an output_dir
// the report is also written there as report.json.
nlohmann::ordered_json Run(const Invocation& inv);

std::string RenderReport(const nlohmann::ordered_json& report);

// Structured error document and process exit code for an exception.
struct ErrorInfo {
  int exit_code = 1;
  nlohmann::ordered_json body;
};
ErrorInfo DescribeError(const std::exception& e);

// Line-delimited training data: {"id", "x": [...], "label", and optional
// "adversary", "speaker", "gender"}.
struct DataFile {
  std::vector<std::string> ids;
  nn::Dataset data;
  std::vector<int> speakers;  // empty when absent
  std::vector<int> genders;   // empty when absent
};
DataFile ReadDataFile(const std::string& path);
void WriteDataFile(const std::string& path, const DataFile& d);

}  // namespace cli
}  // namespace emoeval

#endif  // EMOEVAL_CLI_H_
