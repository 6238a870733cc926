#include "csp/run.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "csp/parallel.hpp"

namespace csp {

namespace {

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

World build_world(const RunConfig& cfg) {
  return generate_world(cfg.world, derive_seed(cfg.seed, "world"));
}

SoftmaxPolicy load_or_init_policy(const RunConfig& cfg, const std::string& policy_path) {
  if (!policy_path.empty()) return policy_from_table(read_file(policy_path));
  return SoftmaxPolicy(cfg.policy);
}

std::vector<const Question*> split_of(const World& world, const std::string& split) {
  if (split == "all") {
    std::vector<const Question*> out;
    for (const auto& q : world.questions) out.push_back(&q);
    return out;
  }
  return world.split_questions(split == "eval" ? Split::Eval : Split::Train);
}

void write_config_echo(const RunConfig& cfg, const std::string& out_dir) {
  write_file(out_dir + "/config.ini", canonical_config_text(cfg));
  write_file(out_dir + "/config.hash", config_hash(cfg) + "\n");
}

}  // namespace

std::string make_run_id(const RunConfig& cfg, const std::string& command) {
  return command + "-" + config_hash(cfg).substr(0, 8);
}

CommandResult cmd_gen_world(const RunConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  const World world = build_world(cfg);
  write_file(out_dir + "/world.json", world_to_json(world));
  write_config_echo(cfg, out_dir);
  size_t train = 0, eval = 0;
  for (const auto& q : world.questions) (q.split == Split::Train ? train : eval) += 1;
  std::ostringstream summary;
  summary << "gen-world: " << world.questions.size() << " questions ("
          << train << " train / " << eval << " eval), " << world.corpora.size()
          << " corpora -> " << out_dir << "/world.json";
  return {0, summary.str()};
}

CommandResult cmd_simulate(const RunConfig& cfg, const std::string& out_dir,
                           const SimulateOptions& options) {
  ensure_dir(out_dir);
  const World world = build_world(cfg);
  const SoftmaxPolicy policy(cfg.policy);
  const auto questions = split_of(world, options.split);
  const int samples = options.samples > 0 ? options.samples : cfg.simulate_samples;
  const std::string run_id = make_run_id(cfg, "simulate");
  const std::string hash = config_hash(cfg);

  std::vector<std::string> lines(questions.size() * static_cast<size_t>(samples));
  parallel_for(lines.size(), cfg.threads, [&](size_t idx) {
    const Question& q = *questions[idx / samples];
    const int sample = static_cast<int>(idx % samples);
    const uint64_t seed =
        derive_seed(cfg.seed, "simulate", hash_str(q.id), static_cast<uint64_t>(sample));
    RolloutLogRecord record;
    record.run_id = run_id;
    record.config_hash = hash;
    record.query_id = q.id;
    record.sample_index = sample;
    record.seed = seed;
    record.rollout =
        run_rollout(cfg.society, policy, world, q, cfg.orch, cfg.reward, seed);
    lines[idx] = rollout_record_to_json(record);
  });

  std::string log;
  std::vector<Rollout> rollouts;
  for (const auto& line : lines) {
    log += line + "\n";
    rollouts.push_back(rollout_record_from_json(line).rollout);
  }
  write_file(out_dir + "/world.json", world_to_json(world));
  write_file(out_dir + "/policy.tsv", policy_to_table(policy));
  write_file(out_dir + "/rollouts.jsonl", log);
  write_config_echo(cfg, out_dir);

  const TaskReport report = task_metrics(rollouts);
  std::ostringstream summary;
  summary << "simulate: " << rollouts.size() << " rollouts, mean reward "
          << fmt3(report.mean_reward) << ", search rate " << fmt3(report.search_rate)
          << " -> " << out_dir << "/rollouts.jsonl";
  return {0, summary.str()};
}

namespace {

CommandResult run_training(const RunConfig& cfg, const std::string& out_dir,
                           bool action_supervision) {
  ensure_dir(out_dir);
  const World world = build_world(cfg);
  const SoftmaxPolicy initial(cfg.policy);
  const std::string command = action_supervision ? "train-action-sup" : "train-rest";
  const std::string run_id = make_run_id(cfg, command);
  const std::string hash = config_hash(cfg);

  const RestResult result =
      action_supervision
          ? action_supervision_train(world, cfg.society, initial, cfg.rest, cfg.orch,
                                     cfg.reward)
          : rest_train(world, cfg.society, initial, cfg.rest, cfg.orch, cfg.reward);

  std::string metrics;
  for (const auto& epoch : result.epochs)
    metrics += epoch_report_to_json(epoch, run_id, hash) + "\n";
  write_file(out_dir + "/world.json", world_to_json(world));
  write_file(out_dir + "/policy_init.tsv", policy_to_table(initial));
  write_file(out_dir + "/policy_final.tsv", policy_to_table(result.policy));
  write_file(out_dir + "/epochs.jsonl", metrics);
  write_config_echo(cfg, out_dir);

  const EpochReport& first = result.epochs.front();
  const EpochReport& last = result.epochs.back();
  std::ostringstream summary;
  summary << command << ": " << cfg.rest.epochs << " epochs, search rate "
          << fmt3(first.search_rate) << " -> " << fmt3(last.search_rate)
          << ", mean reward " << fmt3(first.mean_reward) << " -> "
          << fmt3(last.mean_reward) << " -> " << out_dir << "/policy_final.tsv";
  return {0, summary.str()};
}

}  // namespace

CommandResult cmd_train_rest(const RunConfig& cfg, const std::string& out_dir) {
  return run_training(cfg, out_dir, false);
}

CommandResult cmd_train_action_sup(const RunConfig& cfg, const std::string& out_dir) {
  return run_training(cfg, out_dir, true);
}

CommandResult cmd_eval_task(const RunConfig& cfg, const std::string& out_dir,
                            const std::string& policy_path) {
  ensure_dir(out_dir);
  const World world = build_world(cfg);
  const SoftmaxPolicy policy = with_temperature(load_or_init_policy(cfg, policy_path),
                                                cfg.rest.eval_temperature);
  const auto questions = world.split_questions(Split::Eval);

  std::vector<std::pair<std::string, TaskReport>> rows;
  for (const auto& agent : cfg.society.agents) {
    if (agent.tools.empty()) continue;
    const Society solo = single_agent_society(agent);
    OrchestratorConfig solo_cfg = cfg.orch;
    solo_cfg.initial_agent = agent.agent_id;
    std::vector<Rollout> rollouts(questions.size() *
                                  static_cast<size_t>(cfg.rest.eval_samples));
    parallel_for(rollouts.size(), cfg.threads, [&](size_t idx) {
      const Question& q = *questions[idx / cfg.rest.eval_samples];
      const int s = static_cast<int>(idx % cfg.rest.eval_samples);
      rollouts[idx] = run_rollout(
          solo, policy, world, q, solo_cfg, cfg.reward,
          derive_seed(cfg.seed, "eval-task", hash_str(agent.agent_id + "/" + q.id),
                      static_cast<uint64_t>(s)));
    });
    rows.emplace_back(agent.agent_id, task_metrics(rollouts));
  }

  // the society itself, in its trained configuration
  {
    std::vector<Rollout> rollouts(questions.size() *
                                  static_cast<size_t>(cfg.rest.eval_samples));
    parallel_for(rollouts.size(), cfg.threads, [&](size_t idx) {
      const Question& q = *questions[idx / cfg.rest.eval_samples];
      const int s = static_cast<int>(idx % cfg.rest.eval_samples);
      rollouts[idx] = run_rollout(
          cfg.society, policy, world, q, cfg.orch, cfg.reward,
          derive_seed(cfg.seed, "eval-task", hash_str("society/" + q.id),
                      static_cast<uint64_t>(s)));
    });
    rows.emplace_back("society", task_metrics(rollouts));
  }

  write_file(out_dir + "/task_report.csv", task_reports_to_csv(rows));
  write_config_echo(cfg, out_dir);
  std::ostringstream summary;
  summary << "eval-task: " << rows.size() << " rows over " << questions.size()
          << " eval questions -> " << out_dir << "/task_report.csv";
  return {0, summary.str()};
}

CommandResult cmd_eval_calibration(const RunConfig& cfg, const std::string& out_dir,
                                   const std::string& policy_path) {
  ensure_dir(out_dir);
  const World world = build_world(cfg);
  const SoftmaxPolicy policy = load_or_init_policy(cfg, policy_path);
  const auto questions = world.split_questions(Split::Eval);
  const uint64_t seed = derive_seed(cfg.seed, "calibration");

  std::vector<std::pair<std::string, CalibrationCurve>> series;
  for (const auto& agent : cfg.society.agents) {
    if (agent.tools.empty()) continue;
    const std::string corpus = agent.tools.front().corpus_id;
    series.emplace_back(agent.agent_id + "/search",
                        search_calibration_curve(policy, agent, questions, world,
                                                 cfg.eval.fractions, seed,
                                                 cfg.eval.n_draws));
    series.emplace_back(agent.agent_id + "/shuffled",
                        shuffled_baseline(agent, questions, world, cfg.eval.fractions,
                                          seed, cfg.eval.n_draws));
    series.emplace_back(agent.agent_id + "/answer",
                        answer_calibration_curve(policy, agent, questions, world,
                                                 cfg.eval.fractions, seed,
                                                 cfg.eval.n_draws));
    const auto modes =
        forced_mode_scores(world, questions, corpus, seed, cfg.eval.n_draws, cfg.threads);
    series.emplace_back(
        agent.agent_id + "/search-oracle",
        search_curve_from_scores(oracle_search_scores(world, questions, corpus), modes,
                                 questions, cfg.eval.fractions));
    series.emplace_back(agent.agent_id + "/answer-oracle",
                        answer_curve_from_scores(oracle_answer_scores(questions),
                                                 modes.parametric, questions,
                                                 cfg.eval.fractions));
  }

  write_file(out_dir + "/curves.csv", curves_to_csv(series));
  write_config_echo(cfg, out_dir);
  std::ostringstream summary;
  summary << "eval-calibration: " << series.size() << " curves over "
          << questions.size() << " eval questions -> " << out_dir << "/curves.csv";
  return {0, summary.str()};
}

CommandResult cmd_analyze_game(const GameOptions& options, const std::string& out_dir) {
  ensure_dir(out_dir);
  const NPlayerGame game{options.alphas, options.beta, options.delta};
  const auto violations = validate_game(game);
  if (!violations.empty()) {
    std::string msg = "analyze-game: invalid game:";
    for (const auto& v : violations) msg += " " + v + ";";
    return {1, msg};
  }

  std::ostringstream out;
  out << "alphas =";
  for (double a : game.alphas) out << " " << a;
  out << ", beta = " << game.beta << ", delta = " << game.delta << "\n\n";

  if (game.alphas.size() == 2) {
    const TwoPlayerGame g2{game.alphas[0], game.alphas[1], game.beta, game.delta};
    out << "payoff matrix (rows: player 1, cols: player 2)\n";
    const auto cell = [&](Strategy z1, Strategy z2) {
      const auto r = payoffs(g2, z1, z2);
      std::ostringstream c;
      c << "(" << fmt3(r[0]) << ", " << fmt3(r[1]) << ")";
      return c.str();
    };
    out << "        S                 G\n";
    out << "  S  " << cell(Strategy::Search, Strategy::Search) << "  "
        << cell(Strategy::Search, Strategy::Guess) << "\n";
    out << "  G  " << cell(Strategy::Guess, Strategy::Search) << "  "
        << cell(Strategy::Guess, Strategy::Guess) << "\n\n";
    out << "theorem 1 class: " << equilibrium_class_label(theorem1_predict(g2)) << "\n";
  }

  const auto eqs = pure_equilibria(game);
  out << "pure equilibria:";
  for (const auto& e : eqs) {
    out << " " << profile_label(e.profile);
    if (e.weak_tie) out << "(weak)";
  }
  out << "\n";
  const auto predicted = theorem2_predict(game);
  out << "theorem 2: "
      << (predicted ? profile_label(*predicted) : std::string("no prediction")) << "\n";

  write_file(out_dir + "/analysis.txt", out.str());
  std::ostringstream summary;
  summary << "analyze-game: " << eqs.size() << " pure equilibria -> " << out_dir
          << "/analysis.txt";
  return {0, summary.str()};
}

CommandResult cmd_sweep_equilibria(const SweepOptions& options, const std::string& out_dir,
                                   int threads) {
  if (options.grid < 1 || options.step <= 0 || options.delta <= 0)
    return {1, "sweep-equilibria: grid, step, and delta must be positive"};
  ensure_dir(out_dir);
  const auto grid = offset_grid(options.grid, options.step, options.offset);
  const auto points = region_sweep(grid, grid, options.beta, options.delta, threads);
  write_file(out_dir + "/sweep.csv", sweep_to_csv(points));

  std::map<std::string, size_t> counts;
  for (const auto& p : points) counts[equilibrium_class_label(p.cls)] += 1;
  std::ostringstream summary;
  summary << "sweep-equilibria: " << points.size() << " points";
  for (const auto& [label, n] : counts) summary << ", " << label << "=" << n;
  summary << " -> " << out_dir << "/sweep.csv";
  return {0, summary.str()};
}

CommandResult cmd_replay(const ReplayOptions& options) {
  std::vector<std::string> errors;
  const RunConfig cfg = parse_run_config(read_file(options.run_dir + "/config.ini"), errors);
  if (!errors.empty()) {
    std::string msg = "replay: recorded config invalid:";
    for (const auto& e : errors) msg += " " + e + ";";
    return {1, msg};
  }
  std::string recorded_hash = read_file(options.run_dir + "/config.hash");
  if (!recorded_hash.empty() && recorded_hash.back() == '\n') recorded_hash.pop_back();
  if (recorded_hash != config_hash(cfg))
    return {1, "replay: config hash mismatch between log and request"};

  const World world = world_from_json(read_file(options.run_dir + "/world.json"));
  const SoftmaxPolicy policy = policy_from_table(read_file(options.run_dir + "/policy.tsv"));

  std::istringstream log(read_file(options.run_dir + "/rollouts.jsonl"));
  std::string line;
  while (std::getline(log, line)) {
    if (line.empty()) continue;
    const RolloutLogRecord record = rollout_record_from_json(line);
    if (record.query_id != options.query_id || record.sample_index != options.sample_index)
      continue;
    const Question* q = world.find_question(record.query_id);
    if (q == nullptr) return {1, "replay: query not in world: " + record.query_id};
    RolloutLogRecord fresh = record;
    fresh.rollout =
        run_rollout(cfg.society, policy, world, *q, cfg.orch, cfg.reward, record.seed);
    const std::string replayed = rollout_record_to_json(fresh);
    if (replayed == line)
      return {0, "replay: byte-identical (" + record.query_id + " sample " +
                     std::to_string(record.sample_index) + ")"};
    return {0, "replay: MISMATCH for " + record.query_id + " sample " +
                   std::to_string(record.sample_index)};
  }
  return {1, "replay: no logged rollout for " + options.query_id + " sample " +
                 std::to_string(options.sample_index)};
}

}  // namespace csp
