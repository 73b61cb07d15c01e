// tools/emoeval.cpp

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

// emoeval command-line front end.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "emoeval/cli.h"

int main(int argc, char** argv) {
  CLI::App app{"Emotion recognition robustness, privacy and generalizability toolkit"};
  app.set_version_flag("--version", std::string(emoeval::cli::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::optional<uint64_t> seed;
  for (const auto& name : emoeval::cli::Commands()) {
    CLI::App* sub = app.add_subcommand(name, "Run the " + name + " command");
    sub->add_option("-c,--config", config_path, "JSON config for this run")
        ->required();
    sub->add_option("-s,--seed", seed,
                    std::string("Global seed; overrides the config and ") +
                        emoeval::cli::kSeedEnvVar);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  emoeval::cli::Invocation inv;
  inv.command = app.get_subcommands().front()->get_name();
  inv.config_path = config_path;
  inv.seed = seed;
  try {
    std::cout << emoeval::cli::RenderReport(emoeval::cli::Run(inv));
  } catch (const std::exception& e) {
    const auto info = emoeval::cli::DescribeError(e);
    std::cerr << info.body.dump(2) << std::endl;
    return info.exit_code;
  }
  return 0;
}
