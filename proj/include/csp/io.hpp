#pragma once

#include <optional>
#include <string>
#include <vector>

#include "csp/config.hpp"
#include "csp/game.hpp"

namespace csp {

// file helpers (binary-exact)
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
void ensure_dir(const std::string& path);

// world file: one self-describing versioned JSON document with the config
// echo, questions, and corpora
std::string world_to_json(const World&);
World world_from_json(const std::string& text);

// policy checkpoint: versioned flat table, one (head, key, label, weight)
// row per line, sorted, weights at full round-trip precision
std::string policy_to_table(const SoftmaxPolicy&);
SoftmaxPolicy policy_from_table(const std::string& text);

// rollout log: one JSON object per line
struct RolloutLogRecord {
  std::string run_id;
  std::string config_hash;
  std::string query_id;
  int sample_index = 0;
  uint64_t seed = 0;
  Rollout rollout;
};

std::string rollout_record_to_json(const RolloutLogRecord&);
RolloutLogRecord rollout_record_from_json(const std::string& line);

// per-epoch metrics record for the metrics JSONL file
std::string epoch_report_to_json(const EpochReport&, const std::string& run_id,
                                 const std::string& config_hash);

// plot data: header "x,y,series", one row per point
std::string curves_to_csv(
    const std::vector<std::pair<std::string, CalibrationCurve>>& series);

std::string sweep_to_csv(const std::vector<SweepPoint>&);

std::string task_reports_to_csv(
    const std::vector<std::pair<std::string, TaskReport>>& rows);

}  // namespace csp
