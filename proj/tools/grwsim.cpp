// Copyright 2026 The grwsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// grwsim: runs one experiment described by a JSON config file.
//
//   grwsim --config run.json [--output-dir DIR] [--seed N] [--jobs N]

#include <iostream>

#include <CLI11.hpp>

#include "grwsim/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"GRW collapse, Wigner's friend and CBH protocol experiments"};
  std::string config;
  std::string output_dir;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  app.add_option("--config", config, "experiment config (JSON)")->required();
  auto* dir_opt = app.add_option("--output-dir", output_dir, "override output_dir");
  auto* seed_opt = app.add_option("--seed", seed, "override master_seed");
  app.add_option("--jobs", jobs, "parallel trial workers (results do not depend on it)")->check(CLI::PositiveNumber);
  app.set_version_flag("--version", GRWSIM_VERSION);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return grwsim::cli::kExitConfig;
  }

  grwsim::cli::Overrides ov;
  if (*dir_opt) ov.output_dir = output_dir;
  if (*seed_opt) ov.seed = seed;
  ov.jobs = jobs;
  const auto outcome = grwsim::cli::run_file(config, ov);
  (outcome.exit_code == 0 ? std::cout : std::cerr) << outcome.message << "\n";
  return outcome.exit_code;
}
