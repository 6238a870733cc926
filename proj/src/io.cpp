#include "csp/io.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace csp {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

void ensure_dir(const std::string& path) {
  std::filesystem::create_directories(path);
}

// ---------------------------------------------------------------------------
// world

std::string world_to_json(const World& world) {
  json doc;
  doc["schema"] = "csp.world.v1";
  json cfg;
  cfg["a_hit"] = world.config.a_hit;
  cfg["a_miss"] = world.config.a_miss;
  cfg["eval_fraction"] = world.config.eval_fraction;
  cfg["seed"] = world.config.seed;
  json topics;
  for (const auto& [name, topic] : world.config.topics) {
    json t;
    t["questions"] = topic.n_questions;
    t["beta"] = {topic.beta_lo, topic.beta_hi};
    json hits;
    for (const auto& [corpus, range] : topic.hit_range)
      hits[corpus] = {range.first, range.second};
    t["hit"] = hits;
    topics[name] = t;
  }
  cfg["topics"] = topics;
  doc["config"] = cfg;

  json questions = json::array();
  for (const auto& q : world.questions) {
    json jq;
    jq["id"] = q.id;
    jq["text"] = q.text;
    jq["gold_answer"] = q.gold_answer;
    jq["topic"] = q.topic;
    jq["beta"] = q.beta;
    jq["split"] = q.split == Split::Eval ? "eval" : "train";
    json hits;
    for (const auto& [corpus, h] : q.hit_rate) hits[corpus] = h;
    jq["hit_rate"] = hits;
    questions.push_back(jq);
  }
  doc["questions"] = questions;

  json corpora;
  for (const auto& [id, corpus] : world.corpora) {
    json jc;
    jc["gold_snippets"] = corpus.gold_snippets;
    jc["distractors"] = corpus.distractors;
    corpora[id] = jc;
  }
  doc["corpora"] = corpora;
  return doc.dump();
}

World world_from_json(const std::string& text) {
  const json doc = json::parse(text);
  if (doc.value("schema", "") != "csp.world.v1")
    throw std::runtime_error("unsupported world schema");
  World world;
  const json& cfg = doc.at("config");
  world.config.a_hit = cfg.at("a_hit").get<double>();
  world.config.a_miss = cfg.at("a_miss").get<double>();
  world.config.eval_fraction = cfg.at("eval_fraction").get<double>();
  world.config.seed = cfg.at("seed").get<uint64_t>();
  for (const auto& [name, t] : cfg.at("topics").items()) {
    TopicConfig topic;
    topic.n_questions = t.at("questions").get<int>();
    topic.beta_lo = t.at("beta")[0].get<double>();
    topic.beta_hi = t.at("beta")[1].get<double>();
    for (const auto& [corpus, range] : t.at("hit").items())
      topic.hit_range[corpus] = {range[0].get<double>(), range[1].get<double>()};
    world.config.topics[name] = topic;
  }
  for (const auto& jq : doc.at("questions")) {
    Question q;
    q.id = jq.at("id").get<std::string>();
    q.text = jq.at("text").get<std::string>();
    q.gold_answer = jq.at("gold_answer").get<std::string>();
    q.topic = jq.at("topic").get<std::string>();
    q.beta = jq.at("beta").get<double>();
    q.split = jq.at("split").get<std::string>() == "eval" ? Split::Eval : Split::Train;
    for (const auto& [corpus, h] : jq.at("hit_rate").items())
      q.hit_rate[corpus] = h.get<double>();
    world.questions.push_back(std::move(q));
  }
  for (const auto& [id, jc] : doc.at("corpora").items()) {
    Corpus corpus;
    corpus.corpus_id = id;
    corpus.gold_snippets =
        jc.at("gold_snippets").get<std::map<std::string, std::string>>();
    corpus.distractors = jc.at("distractors").get<std::vector<std::string>>();
    world.corpora[id] = std::move(corpus);
  }
  return world;
}

// ---------------------------------------------------------------------------
// policy checkpoint

std::string policy_to_table(const SoftmaxPolicy& policy) {
  std::ostringstream out;
  const PolicyConfig& cfg = policy.config();
  out << "# csp-policy v1\n";
  out << "# temperature " << fmt17(cfg.temperature) << "\n";
  out << "# beta_buckets " << cfg.beta_buckets << "\n";
  out << "# ask_bias " << fmt17(cfg.ask_bias) << "\n";
  out << "# search_bias " << fmt17(cfg.search_bias) << "\n";
  out << "# relinquish_bias " << fmt17(cfg.relinquish_bias) << "\n";
  out << "# friend_answer_bias " << fmt17(cfg.friend_answer_bias) << "\n";
  out << "# retrieval_bias " << fmt17(cfg.retrieval_bias) << "\n";
  out << "# deanon " << (cfg.deanon_features ? 1 : 0) << "\n";
  for (const auto& [key, row] : policy.action_table())
    for (const auto& [label, w] : row)
      out << "action\t" << key << "\t" << label << "\t" << fmt17(w) << "\n";
  for (const auto& [key, row] : policy.source_table())
    for (const auto& [label, w] : row)
      out << "source\t" << key << "\t" << label << "\t" << fmt17(w) << "\n";
  return out.str();
}

SoftmaxPolicy policy_from_table(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "# csp-policy v1")
    throw std::runtime_error("unsupported policy checkpoint header");
  PolicyConfig cfg;
  std::vector<std::array<std::string, 4>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string key, value;
      meta >> key >> value;
      if (key == "temperature") cfg.temperature = std::stod(value);
      if (key == "beta_buckets") cfg.beta_buckets = std::stoi(value);
      if (key == "ask_bias") cfg.ask_bias = std::stod(value);
      if (key == "search_bias") cfg.search_bias = std::stod(value);
      if (key == "relinquish_bias") cfg.relinquish_bias = std::stod(value);
      if (key == "friend_answer_bias") cfg.friend_answer_bias = std::stod(value);
      if (key == "retrieval_bias") cfg.retrieval_bias = std::stod(value);
      if (key == "deanon") cfg.deanon_features = value == "1";
      continue;
    }
    std::array<std::string, 4> cells;
    size_t start = 0;
    for (int c = 0; c < 4; ++c) {
      const size_t tab = line.find('\t', start);
      if (tab == std::string::npos && c < 3)
        throw std::runtime_error("malformed policy row: " + line);
      cells[c] = line.substr(start, tab == std::string::npos ? std::string::npos
                                                             : tab - start);
      start = tab + 1;
    }
    rows.push_back(std::move(cells));
  }
  SoftmaxPolicy policy(cfg);
  for (const auto& [head, key, label, weight] : rows) {
    const double w = std::stod(weight);
    if (head == "action")
      policy.set_action_weight(key, label, w);
    else if (head == "source")
      policy.set_source_weight(key, label, w);
    else
      throw std::runtime_error("unknown policy head: " + head);
  }
  return policy;
}

// ---------------------------------------------------------------------------
// rollout log records

namespace {

json evidence_to_json(const EvidenceItem& item) {
  json j;
  j["tag"] = evidence_tag_label(item.tag);
  j["text"] = item.text;
  if (!item.source_id.empty()) j["source_id"] = item.source_id;
  if (item.is_gold) j["gold"] = true;
  return j;
}

EvidenceItem evidence_from_json(const json& j) {
  EvidenceItem item;
  const std::string tag = j.at("tag").get<std::string>();
  item.tag = tag == "RETRIEVAL"     ? EvidenceTag::Retrieval
             : tag == "FRIEND_ANSWER" ? EvidenceTag::FriendAnswer
                                      : EvidenceTag::FriendHedge;
  item.text = j.at("text").get<std::string>();
  item.source_id = j.value("source_id", "");
  item.is_gold = j.value("gold", false);
  return item;
}

ArgSource arg_source_from_label(const std::string& label) {
  if (label == "PARAMETRIC") return ArgSource::Parametric;
  if (label == "RETRIEVAL") return ArgSource::Retrieval;
  if (label == "FRIEND_ANSWER") return ArgSource::FriendAnswer;
  if (label == "FRIEND_HEDGE") return ArgSource::FriendHedge;
  return ArgSource::Verbatim;
}

}  // namespace

std::string rollout_record_to_json(const RolloutLogRecord& record) {
  json doc;
  doc["schema"] = "csp.rollout.v1";
  doc["run_id"] = record.run_id;
  doc["config_hash"] = record.config_hash;
  doc["query_id"] = record.query_id;
  doc["sample_index"] = record.sample_index;
  doc["seed"] = record.seed;
  const Rollout& r = record.rollout;
  doc["terminal"] = r.terminal;
  doc["final_answer"] = r.final_answer;
  doc["score"] = r.score;
  doc["effort"] = r.effort;
  doc["reward"] = r.reward;
  json turns = json::array();
  for (const auto& t : r.turns) {
    json jt;
    jt["agent"] = t.agent_id;
    jt["action"] = t.action.label();
    jt["argument"] = t.argument;
    jt["line"] = render_action_line(t.action, t.argument);
    jt["source"] = arg_source_label(t.source);
    if (!t.source_id.empty()) jt["source_id"] = t.source_id;
    if (t.violation) jt["violation"] = true;
    jt["query"] = t.context.query;
    json evidence = json::array();
    for (const auto& e : t.context.evidence) evidence.push_back(evidence_to_json(e));
    jt["evidence"] = evidence;
    json avail = json::array();
    for (const auto& a : t.context.available_actions) avail.push_back(a.label());
    jt["available"] = avail;
    turns.push_back(jt);
  }
  doc["turns"] = turns;
  return doc.dump();
}

RolloutLogRecord rollout_record_from_json(const std::string& line) {
  const json doc = json::parse(line);
  if (doc.value("schema", "") != "csp.rollout.v1")
    throw std::runtime_error("unsupported rollout schema");
  RolloutLogRecord record;
  record.run_id = doc.at("run_id").get<std::string>();
  record.config_hash = doc.at("config_hash").get<std::string>();
  record.query_id = doc.at("query_id").get<std::string>();
  record.sample_index = doc.at("sample_index").get<int>();
  record.seed = doc.at("seed").get<uint64_t>();
  Rollout& r = record.rollout;
  r.query_id = record.query_id;
  r.terminal = doc.at("terminal").get<bool>();
  r.final_answer = doc.at("final_answer").get<std::string>();
  r.score = doc.at("score").get<double>();
  r.effort = doc.at("effort").get<int>();
  r.reward = doc.at("reward").get<double>();
  for (const auto& jt : doc.at("turns")) {
    Turn t;
    t.agent_id = jt.at("agent").get<std::string>();
    t.action = ActionKind::from_label(jt.at("action").get<std::string>());
    t.argument = jt.at("argument").get<std::string>();
    t.source = arg_source_from_label(jt.at("source").get<std::string>());
    t.source_id = jt.value("source_id", "");
    t.violation = jt.value("violation", false);
    t.context.query = jt.at("query").get<std::string>();
    for (const auto& je : jt.at("evidence"))
      t.context.evidence.push_back(evidence_from_json(je));
    for (const auto& ja : jt.at("available"))
      t.context.available_actions.push_back(
          ActionKind::from_label(ja.get<std::string>()));
    r.turns.push_back(std::move(t));
  }
  return record;
}

std::string epoch_report_to_json(const EpochReport& report, const std::string& run_id,
                                 const std::string& config_hash) {
  json doc;
  doc["schema"] = "csp.metrics.v1";
  doc["run_id"] = run_id;
  doc["config_hash"] = config_hash;
  doc["epoch"] = report.epoch;
  doc["dataset_size"] = report.dataset_size;
  doc["skipped"] = report.skipped;
  doc["task_f1"] = report.task_f1;
  doc["search_rate"] = report.search_rate;
  doc["hedge_rate"] = report.hedge_rate;
  doc["mean_reward"] = report.mean_reward;
  return doc.dump();
}

// ---------------------------------------------------------------------------
// CSV

std::string curves_to_csv(
    const std::vector<std::pair<std::string, CalibrationCurve>>& series) {
  std::ostringstream out;
  out << "x,y,series\n";
  for (const auto& [name, curve] : series)
    for (size_t i = 0; i < curve.fractions.size(); ++i)
      out << fmt9(curve.fractions[i]) << "," << fmt9(curve.mean_f1[i]) << "," << name
          << "\n";
  return out.str();
}

std::string sweep_to_csv(const std::vector<SweepPoint>& points) {
  std::ostringstream out;
  out << "alpha1,alpha2,class\n";
  for (const auto& p : points)
    out << fmt9(p.alpha1) << "," << fmt9(p.alpha2) << ","
        << equilibrium_class_label(p.cls) << "\n";
  return out.str();
}

std::string task_reports_to_csv(
    const std::vector<std::pair<std::string, TaskReport>>& rows) {
  std::ostringstream out;
  out << "agent,task_f1,search_rate,hedge_rate,mean_reward,count\n";
  for (const auto& [name, r] : rows)
    out << name << "," << fmt9(r.task_f1) << "," << fmt9(r.search_rate) << ","
        << fmt9(r.hedge_rate) << "," << fmt9(r.mean_reward) << "," << r.count << "\n";
  return out.str();
}

}  // namespace csp
