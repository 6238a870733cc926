#pragma once

#include <string>

#include "csp/io.hpp"

namespace csp {

// Thin command layer shared by the CLI and tests. Every command writes its
// artifacts under out_dir and returns a one-line summary; config problems are
// the only nonzero exits.
struct CommandResult {
  int exit_code = 0;
  std::string summary;
};

struct SimulateOptions {
  std::string split = "train";  // train | eval | all
  int samples = 0;              // 0 = config value
};

struct ReplayOptions {
  std::string run_dir;
  std::string query_id;
  int sample_index = 0;
};

struct GameOptions {
  std::vector<double> alphas{0.7, 0.4};
  double beta = 0.2;
  double delta = 0.1;
};

struct SweepOptions {
  double beta = 0.2;
  double delta = 0.12;
  int grid = 99;
  double step = 0.01;
  double offset = 0.005;
};

CommandResult cmd_gen_world(const RunConfig&, const std::string& out_dir);
CommandResult cmd_simulate(const RunConfig&, const std::string& out_dir,
                           const SimulateOptions&);
CommandResult cmd_train_rest(const RunConfig&, const std::string& out_dir);
CommandResult cmd_train_action_sup(const RunConfig&, const std::string& out_dir);
CommandResult cmd_eval_task(const RunConfig&, const std::string& out_dir,
                            const std::string& policy_path);
CommandResult cmd_eval_calibration(const RunConfig&, const std::string& out_dir,
                                   const std::string& policy_path);
CommandResult cmd_analyze_game(const GameOptions&, const std::string& out_dir);
CommandResult cmd_sweep_equilibria(const SweepOptions&, const std::string& out_dir,
                                   int threads);
CommandResult cmd_replay(const ReplayOptions&);

// run id: derived from the config hash and command, never from wall clock,
// so identical configs produce identical artifacts
std::string make_run_id(const RunConfig&, const std::string& command);

}  // namespace csp
