#pragma once

#include <deque>
#include <map>
#include <string>
#include <vector>

#include "csp/orchestrator.hpp"

namespace csp::testing {

// Replays a fixed per-agent script of outputs; used to drive hand-traced
// rollouts through the orchestrator.
class ScriptedPolicy final : public AgentPolicy {
 public:
  ScriptedPolicy& on(const std::string& agent_id, ActionKind kind, std::string argument,
                     ArgSource source = ArgSource::Verbatim) {
    scripts_[agent_id].push_back(ActionChoice{kind, std::move(argument), source});
    return *this;
  }

  ActionChoice choose(const World&, const AgentSpec& agent, const AgentContext& ctx,
                      Rng&) const override {
    auto& queue = scripts_[agent.agent_id];
    if (queue.empty()) return {ActionKind::hedge(), "out of script", ArgSource::Verbatim};
    ActionChoice next = queue.front();
    queue.pop_front();
    (void)ctx;
    return next;
  }

 private:
  mutable std::map<std::string, std::deque<ActionChoice>> scripts_;
};

// Uniformly random available action each turn; arguments stay legal. Used by
// the stack-discipline and budget property tests.
class RandomPolicy final : public AgentPolicy {
 public:
  ActionChoice choose(const World& world, const AgentSpec&, const AgentContext& ctx,
                      Rng& rng) const override {
    const ActionKind kind =
        ctx.available_actions[uniform_index(rng, ctx.available_actions.size())];
    if (kind.is_tool() || kind.type == ActionType::Ask)
      return {kind, ctx.query, ArgSource::Verbatim};
    return {kind, answer_draw(world, *ctx.question, AnswerMode::Parametric, rng),
            ArgSource::Parametric};
  }
};

inline Society star_society() {
  Society society;
  society.agents = {
      AgentSpec{"asker", {}, true},
      AgentSpec{"pubmed", {ToolSpec{"SEARCH", "pubmed", 5}}, false},
      AgentSpec{"wiki", {ToolSpec{"SEARCH", "wiki", 5}}, false},
  };
  society.edges = {{"asker", "wiki"}, {"asker", "pubmed"}};
  return society;
}

// One-question world with controllable beta and hit rate; gold answer
// "Forges de Pompey" to match the worked trace.
inline World tiny_world(double beta = 0.5, double wiki_hit = 1.0, double pubmed_hit = 1.0) {
  World world;
  world.config.a_hit = 1.0;
  world.config.a_miss = 0.0;
  Question q;
  q.id = "q-0";
  q.text = "what was the primary source of iron for the tower?";
  q.gold_answer = "Forges de Pompey";
  q.topic = "pop";
  q.beta = beta;
  q.hit_rate = {{"wiki", wiki_hit}, {"pubmed", pubmed_hit}};
  world.questions.push_back(q);
  for (const std::string corpus_id : {"wiki", "pubmed"}) {
    Corpus corpus;
    corpus.corpus_id = corpus_id;
    corpus.gold_snippets["q-0"] = "The Forges de Pompey near Nancy supplied iron.";
    for (int i = 0; i < 8; ++i)
      corpus.distractors.push_back("unrelated clipping " + std::to_string(i));
    world.corpora[corpus_id] = corpus;
  }
  return world;
}

inline OrchestratorConfig star_orch_config() {
  OrchestratorConfig cfg;
  cfg.initial_agent = "asker";
  return cfg;
}

}  // namespace csp::testing
