// Copyright 2026 The topdp Authors.
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

// Command line front end: `topdp run` executes one experiment, `topdp sweep`
// repeats it along one config axis, `topdp calibrate` prints the noise scale
// a given privacy budget implies.

#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "topdp/config.hpp"
#include "topdp/experiment.hpp"
#include "topdp/privacy.hpp"

namespace {

// Every config key doubles as a --key CLI flag; flags win over file values.
void add_override_flags(CLI::App& app, std::map<std::string, std::string>& overrides) {
  for (const std::string& key : topdp::config_keys()) {
    app.add_option_function<std::string>(
        "--" + key, [&overrides, key](const std::string& v) { overrides[key] = v; },
        "override config key '" + key + "'");
  }
}

topdp::ExperimentConfig resolve_config(
    const std::string& config_path,
    const std::map<std::string, std::string>& overrides) {
  std::vector<std::pair<std::string, std::string>> ordered(overrides.begin(),
                                                           overrides.end());
  return topdp::parse_config(config_path, ordered);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized differentially private SGD simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::map<std::string, std::string> overrides;

  CLI::App* run = app.add_subcommand("run", "run one experiment and write its outputs");
  run->add_option("--config", config_path, "key=value config file");
  add_override_flags(*run, overrides);

  CLI::App* sw = app.add_subcommand("sweep", "run an experiment per value of one axis");
  std::string axis;
  std::vector<std::string> values;
  sw->add_option("--config", config_path, "key=value config file");
  sw->add_option("--axis", axis, "config key to vary")->required();
  sw->add_option("--values", values, "comma separated values for the axis")
      ->required()
      ->delimiter(',');
  add_override_flags(*sw, overrides);

  CLI::App* cal = app.add_subcommand("calibrate", "print the calibrated noise scale");
  double epsilon = 1.0, delta = 1e-5;
  int iterations = 1000;
  std::size_t dataset_size = 2000;
  cal->add_option("--epsilon", epsilon, "privacy budget epsilon");
  cal->add_option("--delta", delta, "privacy budget delta");
  cal->add_option("--iterations", iterations, "number of training iterations");
  cal->add_option("--dataset-size", dataset_size, "samples held by the agent");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const topdp::ExperimentConfig cfg = resolve_config(config_path, overrides);
      const topdp::ExperimentResult result = topdp::run_experiment(cfg);
      std::printf("final_mean_accuracy=%.6f\n", result.final_mean_accuracy);
      if (!result.summary.empty()) {
        std::printf("max_spent_epsilon=%.6f\n", result.summary.back().max_spent_epsilon);
      }
      if (!cfg.out_dir.empty()) std::printf("out_dir=%s\n", cfg.out_dir.c_str());
    } else if (sw->parsed()) {
      const topdp::ExperimentConfig cfg = resolve_config(config_path, overrides);
      topdp::sweep(cfg, axis, values);
      std::printf("sweep_csv=%s/sweep.csv\n", cfg.out_dir.c_str());
    } else if (cal->parsed()) {
      const double sigma0 =
          topdp::calibrate_sigma0({epsilon, delta}, iterations, dataset_size);
      std::printf("sigma0=%.17g\n", sigma0);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
