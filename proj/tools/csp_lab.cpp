// csp_lab: run the collaborative QA society, train it, and analyze the
// information-provision game from one config file.

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "csp/run.hpp"

namespace {

std::string default_out(const std::string& command) {
  const char* base = std::getenv("CSP_LAB_OUT");
  return (base != nullptr ? std::string(base) : "runs") + "/" + command;
}

csp::RunConfig load_config_or_exit(const std::string& path) {
  std::vector<std::string> errors;
  csp::RunConfig cfg =
      path.empty() ? csp::default_run_config() : csp::load_run_config(path, errors);
  if (!errors.empty()) {
    std::cerr << "invalid config:\n";
    for (const auto& e : errors) std::cerr << "  - " << e << "\n";
    std::exit(1);
  }
  return cfg;
}

int finish(const csp::CommandResult& result) {
  (result.exit_code == 0 ? std::cout : std::cerr) << result.summary << "\n";
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"collaborative self-play QA laboratory"};
  app.require_subcommand(1);
  app.fallthrough();  // global --config/--out may follow the subcommand

  std::string config_path;
  app.add_option("-c,--config", config_path, "config file (INI sections)");

  std::string out_dir;
  app.add_option("-o,--out", out_dir, "output directory (default runs/<command>)");

  auto* gen = app.add_subcommand("gen-world", "generate the synthetic QA world");

  auto* sim = app.add_subcommand("simulate", "run society rollouts and log them");
  csp::SimulateOptions sim_options;
  sim->add_option("--split", sim_options.split, "train | eval | all")
      ->check(CLI::IsMember({"train", "eval", "all"}));
  sim->add_option("--samples", sim_options.samples, "rollouts per query");

  auto* rest = app.add_subcommand("train-rest", "reinforced self-training loop");
  auto* act = app.add_subcommand("train-action-sup", "action supervision baseline");

  std::string policy_path;
  auto* task = app.add_subcommand("eval-task", "task F1 / search rate per agent");
  task->add_option("--policy", policy_path, "policy checkpoint (.tsv)");
  auto* calib = app.add_subcommand("eval-calibration", "search / answer calibration curves");
  calib->add_option("--policy", policy_path, "policy checkpoint (.tsv)");

  auto* game = app.add_subcommand("analyze-game", "payoffs, equilibria, theorem checks");
  csp::GameOptions game_options;
  game->add_option("--alphas", game_options.alphas, "per-player search accuracies");
  game->add_option("--beta", game_options.beta, "guess accuracy");
  game->add_option("--delta", game_options.delta, "search cost");

  auto* sweep = app.add_subcommand("sweep-equilibria", "equilibrium classes over an alpha grid");
  csp::SweepOptions sweep_options;
  sweep->add_option("--beta", sweep_options.beta, "guess accuracy");
  sweep->add_option("--delta", sweep_options.delta, "search cost");
  sweep->add_option("--grid", sweep_options.grid, "points per axis");
  sweep->add_option("--step", sweep_options.step, "grid step");
  sweep->add_option("--offset", sweep_options.offset, "grid offset from 0");

  auto* replay = app.add_subcommand("replay", "re-run a logged rollout and compare bytes");
  csp::ReplayOptions replay_options;
  replay->add_option("--run", replay_options.run_dir, "simulate output directory")
      ->required();
  replay->add_option("--query", replay_options.query_id, "query id")->required();
  replay->add_option("--sample", replay_options.sample_index, "sample index");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed())
    return finish(csp::cmd_gen_world(load_config_or_exit(config_path),
                                     out_dir.empty() ? default_out("gen-world") : out_dir));
  if (sim->parsed())
    return finish(csp::cmd_simulate(load_config_or_exit(config_path),
                                    out_dir.empty() ? default_out("simulate") : out_dir,
                                    sim_options));
  if (rest->parsed())
    return finish(csp::cmd_train_rest(load_config_or_exit(config_path),
                                      out_dir.empty() ? default_out("train-rest") : out_dir));
  if (act->parsed())
    return finish(csp::cmd_train_action_sup(
        load_config_or_exit(config_path),
        out_dir.empty() ? default_out("train-action-sup") : out_dir));
  if (task->parsed())
    return finish(csp::cmd_eval_task(load_config_or_exit(config_path),
                                     out_dir.empty() ? default_out("eval-task") : out_dir,
                                     policy_path));
  if (calib->parsed())
    return finish(csp::cmd_eval_calibration(
        load_config_or_exit(config_path),
        out_dir.empty() ? default_out("eval-calibration") : out_dir, policy_path));
  if (game->parsed())
    return finish(csp::cmd_analyze_game(
        game_options, out_dir.empty() ? default_out("analyze-game") : out_dir));
  if (sweep->parsed()) {
    const csp::RunConfig cfg = load_config_or_exit(config_path);
    return finish(csp::cmd_sweep_equilibria(
        sweep_options, out_dir.empty() ? default_out("sweep-equilibria") : out_dir,
        cfg.threads));
  }
  if (replay->parsed()) return finish(csp::cmd_replay(replay_options));
  return 1;
}
