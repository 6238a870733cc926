#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "csp/core.hpp"
#include "csp/rng.hpp"

namespace csp {

enum class Split { Train, Eval };

struct Question {
  std::string id;
  std::string text;
  std::string gold_answer;
  std::string topic;
  double beta = 0.0;                       // parametric correctness probability
  std::map<std::string, double> hit_rate;  // corpus id -> retrieval hit probability
  Split split = Split::Train;

  double hit(const std::string& corpus_id) const;  // 0 for unlisted corpora
};

struct Corpus {
  std::string corpus_id;
  std::map<std::string, std::string> gold_snippets;  // question id -> snippet with the gold answer
  std::vector<std::string> distractors;
};

struct RewardConfig {
  double delta = 0.01;  // per-search penalty; kept small so it acts as a tie-breaker
};

struct TopicConfig {
  int n_questions = 0;
  double beta_lo = 0.0;
  double beta_hi = 1.0;
  std::map<std::string, std::pair<double, double>> hit_range;  // corpus -> [lo, hi]
};

struct WorldConfig {
  std::map<std::string, TopicConfig> topics;
  double a_hit = 0.95;   // P(correct answer | gold snippet in evidence)
  double a_miss = 0.10;  // P(correct answer | retrieval missed)
  double eval_fraction = 1.0 / 3.0;
  uint64_t seed = 0;
};

// Two complementary-tool topics (wiki strong on pop, pubmed strong on bio).
WorldConfig default_world_config();

struct World {
  WorldConfig config;
  std::vector<Question> questions;
  std::map<std::string, Corpus> corpora;

  const Question* find_question(std::string_view id) const;
  const Corpus* find_corpus(std::string_view id) const;
  std::vector<const Question*> split_questions(Split split) const;
};

std::vector<std::string> validate_world_config(const WorldConfig&);

// Deterministic in seed. Throws std::invalid_argument on config violations.
World generate_world(const WorldConfig&, uint64_t seed);

// With probability hit_rate the gold snippet lands at a random position among
// k results padded with distractors; misses and question ids absent from the
// corpus return distractors only.
std::vector<EvidenceItem> retrieve(const Corpus&, const Question&, int k, Rng&);

// Lowercase, strip punctuation, collapse whitespace, then unique-token sets.
std::vector<std::string> normalize_tokens(std::string_view text);
double token_f1(std::string_view prediction, std::string_view gold);

// Effort-penalized score of a terminal rollout. Throws std::invalid_argument
// on a non-terminal rollout.
double reward(const Rollout&, const std::string& gold_answer, const RewardConfig&);

enum class AnswerMode { Parametric, EvidenceHit, EvidenceMiss };

// Gold answer with the mode's probability (beta / a_hit / a_miss), otherwise
// another question's gold answer, which scores ~0 F1 by construction.
std::string answer_draw(const World&, const Question&, AnswerMode, Rng&);

// P(search-then-answer is correct) = h * a_hit + (1 - h) * a_miss
double implied_alpha(const World&, const Question&, const std::string& corpus_id);

// Closed-form per-question optimum over {parametric answer, search-then-answer
// with any of the agent's tools, hedge}; hedge and parametric answer both have
// expected score beta.
double oracle_expected_reward(const World&, const Question&, const AgentSpec&, double delta);

}  // namespace csp
