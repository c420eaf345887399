// Copyright 2026 The pdflow Authors
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

// pdflow command line. Talks to the library only through pdflow.h.
//
//   pdflow run <config> [--out DIR] [--horizon T] [--dump-state] [--threads N]
//   pdflow preset <name> [same options] [--print-config]
//   pdflow check <config|preset>
//
// Output directory precedence: --out, then $PDFLOW_OUTPUT_DIR, then the
// config. Exit status: 0 success, 1 some run diverged or failed, 2 bad
// input or configuration.

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pdflow/pdflow.h"

namespace {

constexpr int kExitRunFailed = 1;
constexpr int kExitBadInput = 2;

struct RunOptions {
  std::string out;
  std::optional<double> horizon;
  bool dump_state = false;
  int threads = -1;
  bool print_config = false;
};

int Report(int status, const char* what) {
  std::fprintf(stderr, "pdflow: %s: %s error: %s\n", what, pdflow_status_name(status),
               pdflow_last_error());
  return kExitBadInput;
}

std::string Text(int (*fn)(const pdflow_results*, char*, size_t, size_t*),
                 const pdflow_results* res) {
  size_t needed = 0;
  if (fn(res, nullptr, 0, &needed) != PDFLOW_OK) return {};
  std::string buf(needed + 1, '\0');
  fn(res, buf.data(), buf.size(), &needed);
  buf.resize(needed);
  return buf;
}

// Applies the command-line overrides. Returns a PDFLOW_* status.
int ApplyOptions(pdflow_experiment* exp, const RunOptions& opt) {
  std::string dir = opt.out;
  if (dir.empty()) {
    if (const char* env = std::getenv("PDFLOW_OUTPUT_DIR"); env && *env) dir = env;
  }
  if (!dir.empty()) {
    if (int st = pdflow_experiment_set_output_dir(exp, dir.c_str())) return st;
  }
  if (opt.horizon) {
    if (int st = pdflow_experiment_set_horizon(exp, *opt.horizon)) return st;
  }
  if (opt.dump_state) {
    if (int st = pdflow_experiment_set_dump_state(exp, 1)) return st;
  }
  if (opt.threads >= 0) {
    if (int st = pdflow_experiment_set_threads(exp, opt.threads)) return st;
  }
  return PDFLOW_OK;
}

int RunLoaded(pdflow_experiment* exp, const RunOptions& opt) {
  if (int st = ApplyOptions(exp, opt)) return Report(st, "options");
  if (opt.print_config) {
    size_t needed = 0;
    pdflow_experiment_format(exp, nullptr, 0, &needed);
    std::string buf(needed + 1, '\0');
    pdflow_experiment_format(exp, buf.data(), buf.size(), &needed);
    buf.resize(needed);
    std::fputs(buf.c_str(), stdout);
    return 0;
  }
  pdflow_results* res = nullptr;
  if (int st = pdflow_run(exp, &res)) return Report(st, "run");
  std::fputs(Text(pdflow_results_text, res).c_str(), stdout);
  int failed = 0;
  pdflow_results_any_failed(res, &failed);
  pdflow_results_free(res);
  return failed ? kExitRunFailed : 0;
}

void AddRunOptions(CLI::App* cmd, RunOptions& opt) {
  cmd->add_option("--out", opt.out, "Output directory (overrides config and $PDFLOW_OUTPUT_DIR)");
  cmd->add_option("--horizon", opt.horizon, "Final time T");
  cmd->add_flag("--dump-state", opt.dump_state, "Append x, v and lambda columns to each CSV");
  cmd->add_option("--threads", opt.threads, "Worker threads for sweeps (0 = one per core)")
      ->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Primal-dual flow experiment runner"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pdflow_version()));

  RunOptions run_opt;
  std::string run_config;
  CLI::App* run = app.add_subcommand("run", "Run every member of a config's sweep");
  run->add_option("config", run_config, "Config file")->required();
  AddRunOptions(run, run_opt);

  RunOptions preset_opt;
  std::string preset_name;
  CLI::App* preset = app.add_subcommand("preset", "Run a built-in experiment");
  preset->add_option("name", preset_name, "example51, example52 or example52_hessian")
      ->required();
  AddRunOptions(preset, preset_opt);
  preset->add_flag("--print-config", preset_opt.print_config,
                   "Print the preset as a config file instead of running it");

  std::string check_target;
  CLI::App* check = app.add_subcommand("check", "Regime and assumption report, no integration");
  check->add_option("config", check_target, "Config file or preset name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version come through here with exit code 0.
    return app.exit(e) == 0 ? 0 : kExitBadInput;
  }

  pdflow_experiment* exp = nullptr;
  int exit_code = 0;
  if (*run) {
    if (int st = pdflow_experiment_load(run_config.c_str(), &exp)) return Report(st, "config");
    exit_code = RunLoaded(exp, run_opt);
  } else if (*preset) {
    if (int st = pdflow_experiment_preset(preset_name.c_str(), &exp)) return Report(st, "preset");
    exit_code = RunLoaded(exp, preset_opt);
  } else if (*check) {
    int st = pdflow_experiment_load(check_target.c_str(), &exp);
    const std::string load_error = pdflow_last_error();
    if (st == PDFLOW_E_IO && pdflow_experiment_preset(check_target.c_str(), &exp) == PDFLOW_OK) {
      st = PDFLOW_OK;
    }
    if (st) {
      std::fprintf(stderr, "pdflow: config: %s error: %s (and no preset of that name)\n",
                   pdflow_status_name(st), load_error.c_str());
      return kExitBadInput;
    }
    pdflow_results* res = nullptr;
    if (int cst = pdflow_check(exp, &res)) {
      exit_code = Report(cst, "check");
    } else {
      std::fputs(Text(pdflow_results_text, res).c_str(), stdout);
      pdflow_results_free(res);
    }
  }
  pdflow_experiment_free(exp);
  return exit_code;
}
