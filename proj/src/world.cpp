#include "csp/world.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace csp {

namespace {

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string pad4(int n) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d", n);
  return buf;
}

}  // namespace

double Question::hit(const std::string& corpus_id) const {
  auto it = hit_rate.find(corpus_id);
  return it == hit_rate.end() ? 0.0 : it->second;
}

WorldConfig default_world_config() {
  // complementary tools; beta reaches past the matched tool's accuracy so a
  // confident parametric answer sometimes beats a searched one
  WorldConfig cfg;
  TopicConfig bio;
  bio.n_questions = 240;
  bio.beta_lo = 0.1;
  bio.beta_hi = 0.95;
  bio.hit_range["pubmed"] = {0.55, 0.8};
  bio.hit_range["wiki"] = {0.05, 0.2};
  TopicConfig pop;
  pop.n_questions = 240;
  pop.beta_lo = 0.1;
  pop.beta_hi = 0.95;
  pop.hit_range["wiki"] = {0.55, 0.8};
  pop.hit_range["pubmed"] = {0.05, 0.2};
  cfg.topics["bio"] = bio;
  cfg.topics["pop"] = pop;
  cfg.a_hit = 0.95;
  cfg.a_miss = 0.10;
  cfg.eval_fraction = 1.0 / 3.0;
  return cfg;
}

const Question* World::find_question(std::string_view id) const {
  for (const auto& q : questions)
    if (q.id == id) return &q;
  return nullptr;
}

const Corpus* World::find_corpus(std::string_view id) const {
  auto it = corpora.find(std::string(id));
  return it == corpora.end() ? nullptr : &it->second;
}

std::vector<const Question*> World::split_questions(Split split) const {
  std::vector<const Question*> out;
  for (const auto& q : questions)
    if (q.split == split) out.push_back(&q);
  return out;
}

std::vector<std::string> validate_world_config(const WorldConfig& cfg) {
  std::vector<std::string> violations;
  if (cfg.topics.empty()) violations.push_back("no topics configured");
  const auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in01(cfg.a_hit)) violations.push_back("a_hit outside [0, 1]");
  if (!in01(cfg.a_miss)) violations.push_back("a_miss outside [0, 1]");
  if (cfg.a_miss > cfg.a_hit) violations.push_back("a_miss > a_hit");
  if (!(cfg.eval_fraction >= 0.0 && cfg.eval_fraction < 1.0))
    violations.push_back("eval_fraction outside [0, 1)");
  for (const auto& [name, topic] : cfg.topics) {
    if (topic.n_questions < 1)
      violations.push_back("topic " + name + ": n_questions < 1");
    if (!in01(topic.beta_lo) || !in01(topic.beta_hi) || topic.beta_lo > topic.beta_hi)
      violations.push_back("topic " + name + ": bad beta range");
    const double beta_mean = 0.5 * (topic.beta_lo + topic.beta_hi);
    if (beta_mean < cfg.a_miss || beta_mean > cfg.a_hit)
      violations.push_back("topic " + name +
                           ": beta mean outside [a_miss, a_hit]; search would not "
                           "separate matched from unmatched tools");
    for (const auto& [corpus, range] : topic.hit_range) {
      if (!in01(range.first) || !in01(range.second) || range.first > range.second)
        violations.push_back("topic " + name + ": bad hit range for corpus " + corpus);
    }
  }
  return violations;
}

World generate_world(const WorldConfig& cfg, uint64_t seed) {
  const auto violations = validate_world_config(cfg);
  if (!violations.empty())
    throw std::invalid_argument("invalid world config: " + join(violations, "; "));

  World world;
  world.config = cfg;
  world.config.seed = seed;

  std::set<std::string> corpus_ids;
  for (const auto& [name, topic] : cfg.topics)
    for (const auto& [corpus, range] : topic.hit_range) corpus_ids.insert(corpus);

  int serial = 0;
  for (const auto& [name, topic] : cfg.topics) {
    Rng rng = make_rng(seed, "questions", hash_str(name));
    for (int i = 0; i < topic.n_questions; ++i, ++serial) {
      Question q;
      q.id = name + "-" + pad4(i);
      q.topic = name;
      q.gold_answer = "entity" + pad4(serial);
      q.text = "which entity is recorded in " + name + " case file " + pad4(i) + "?";
      q.beta = topic.beta_lo + uniform01(rng) * (topic.beta_hi - topic.beta_lo);
      for (const auto& [corpus, range] : topic.hit_range)
        q.hit_rate[corpus] = range.first + uniform01(rng) * (range.second - range.first);
      world.questions.push_back(std::move(q));
    }
  }

  // stratified split: exact eval count per topic, seeded shuffle
  size_t offset = 0;
  for (const auto& [name, topic] : cfg.topics) {
    const size_t n = static_cast<size_t>(topic.n_questions);
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), offset);
    Rng rng = make_rng(seed, "split", hash_str(name));
    for (size_t i = n; i > 1; --i)
      std::swap(order[i - 1], order[uniform_index(rng, i)]);
    const size_t n_eval = static_cast<size_t>(cfg.eval_fraction * n + 0.5);
    for (size_t i = 0; i < n; ++i)
      world.questions[order[i]].split = i < n_eval ? Split::Eval : Split::Train;
    offset += n;
  }

  for (const auto& corpus_id : corpus_ids) {
    Corpus corpus;
    corpus.corpus_id = corpus_id;
    for (const auto& q : world.questions)
      corpus.gold_snippets[q.id] =
          "case file " + q.id + ": the verified record names " + q.gold_answer + ".";
    for (int j = 0; j < 64; ++j)
      corpus.distractors.push_back("digest " + corpus_id + "-" + pad4(j) +
                                   ": archived clipping with no verified record.");
    world.corpora[corpus_id] = std::move(corpus);
  }
  return world;
}

std::vector<EvidenceItem> retrieve(const Corpus& corpus, const Question& question, int k,
                                   Rng& rng) {
  std::vector<EvidenceItem> items;
  if (k < 1) return items;
  const auto gold_it = corpus.gold_snippets.find(question.id);
  const bool known = gold_it != corpus.gold_snippets.end();
  const bool hit = bernoulli(rng, question.hit(corpus.corpus_id)) && known;
  const size_t gold_pos = hit ? uniform_index(rng, static_cast<size_t>(k)) : k;

  std::set<size_t> used;
  for (int i = 0; i < k; ++i) {
    if (static_cast<size_t>(i) == gold_pos) {
      items.push_back({EvidenceTag::Retrieval, gold_it->second, "", true});
      continue;
    }
    size_t pick = uniform_index(rng, corpus.distractors.size());
    while (used.count(pick) && used.size() < corpus.distractors.size())
      pick = (pick + 1) % corpus.distractors.size();
    used.insert(pick);
    items.push_back({EvidenceTag::Retrieval, corpus.distractors[pick], "", false});
  }
  return items;
}

std::vector<std::string> normalize_tokens(std::string_view text) {
  std::string scratch;
  scratch.reserve(text.size());
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    scratch += std::isalnum(uc) ? static_cast<char>(std::tolower(uc)) : ' ';
  }
  std::vector<std::string> tokens;
  std::istringstream in(scratch);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

double token_f1(std::string_view prediction, std::string_view gold) {
  std::vector<std::string> p = normalize_tokens(prediction);
  std::vector<std::string> g = normalize_tokens(gold);
  std::set<std::string> pset(p.begin(), p.end());
  std::set<std::string> gset(g.begin(), g.end());
  if (pset.empty() && gset.empty()) return 1.0;
  if (pset.empty() || gset.empty()) return 0.0;
  size_t overlap = 0;
  for (const auto& t : pset) overlap += gset.count(t);
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / pset.size();
  const double recall = static_cast<double>(overlap) / gset.size();
  return 2.0 * precision * recall / (precision + recall);
}

double reward(const Rollout& rollout, const std::string& gold_answer,
              const RewardConfig& cfg) {
  if (!rollout.terminal)
    throw std::invalid_argument("reward requires a terminal rollout");
  return token_f1(rollout.final_answer, gold_answer) - cfg.delta * rollout.effort;
}

std::string answer_draw(const World& world, const Question& question, AnswerMode mode,
                        Rng& rng) {
  double p = question.beta;
  if (mode == AnswerMode::EvidenceHit) p = world.config.a_hit;
  if (mode == AnswerMode::EvidenceMiss) p = world.config.a_miss;
  if (bernoulli(rng, p)) return question.gold_answer;
  if (world.questions.size() < 2) return "unverified";
  // wrong answers are whole swaps with another question's gold answer, so
  // beta and alpha stay exactly interpretable as expected F1
  size_t pick = uniform_index(rng, world.questions.size() - 1);
  if (world.questions[pick].id == question.id) pick = world.questions.size() - 1;
  return world.questions[pick].gold_answer;
}

double implied_alpha(const World& world, const Question& question,
                     const std::string& corpus_id) {
  const double h = question.hit(corpus_id);
  return h * world.config.a_hit + (1.0 - h) * world.config.a_miss;
}

double oracle_expected_reward(const World& world, const Question& question,
                              const AgentSpec& agent, double delta) {
  double best = question.beta;  // parametric answer; hedge has the same value
  for (const auto& tool : agent.tools)
    best = std::max(best, implied_alpha(world, question, tool.corpus_id) - delta);
  return best;
}

}  // namespace csp
