#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "csp/io.hpp"
#include "csp/orchestrator.hpp"
#include "helpers.hpp"

using namespace csp;
using csp::testing::RandomPolicy;
using csp::testing::ScriptedPolicy;
using csp::testing::star_orch_config;
using csp::testing::star_society;
using csp::testing::tiny_world;

namespace {

std::string record_bytes(const Rollout& rollout) {
  RolloutLogRecord record;
  record.rollout = rollout;
  record.query_id = rollout.query_id;
  return rollout_record_to_json(record);
}

}  // namespace

TEST_CASE("worked trace: ask, search, answer, hedge, final answer") {
  const Society society = star_society();
  const World world = tiny_world(0.5, /*wiki*/ 0.0, /*pubmed*/ 1.0);
  const Question& q = world.questions[0];

  ScriptedPolicy script;
  script.on("asker", ActionKind::ask(), q.text)
      .on("pubmed", search_action(), q.text)
      .on("pubmed", ActionKind::answer(), "Forges de Pompey", ArgSource::Retrieval)
      .on("wiki", ActionKind::hedge(), "imported from Australia", ArgSource::Parametric)
      .on("asker", ActionKind::answer(), "Forges de Pompey", ArgSource::FriendAnswer);

  const Rollout rollout =
      run_rollout(society, script, world, q, star_orch_config(), RewardConfig{0.05}, 7);

  REQUIRE(rollout.terminal);
  REQUIRE(rollout.turns.size() == 5);
  CHECK(rollout.turns[0].agent_id == "asker");
  CHECK(rollout.turns[1].agent_id == "pubmed");  // helpers visited in id order
  CHECK(rollout.turns[2].agent_id == "pubmed");
  CHECK(rollout.turns[3].agent_id == "wiki");
  CHECK(rollout.turns[4].agent_id == "asker");

  // the searching helper saw its retrievals
  CHECK(rollout.turns[2].context.has_retrieval());
  CHECK(rollout.turns[2].context.retrieval_hit());

  // the asker's final context has one FRIEND_ANSWER then one FRIEND_HEDGE
  const auto& evidence = rollout.turns[4].context.evidence;
  REQUIRE(evidence.size() == 2);
  CHECK(evidence[0].tag == EvidenceTag::FriendAnswer);
  CHECK(evidence[0].text == "Forges de Pompey");
  CHECK(evidence[1].tag == EvidenceTag::FriendHedge);
  CHECK(evidence[1].text == "imported from Australia");
  CHECK(evidence[0].source_id.empty());  // deanon off

  CHECK(rollout.effort == 1);
  CHECK(rollout.score == doctest::Approx(1.0));
  CHECK(rollout.reward == doctest::Approx(0.95));
  CHECK(rollout.reward == rollout.score - 0.05 * rollout.effort);  // exact identity
}

TEST_CASE("immediate answer by the initial agent terminates at length 1") {
  const Society society = star_society();
  const World world = tiny_world();
  ScriptedPolicy script;
  script.on("asker", ActionKind::answer(), "Forges de Pompey", ArgSource::Parametric);
  const Rollout rollout = run_rollout(society, script, world, world.questions[0],
                                      star_orch_config(), RewardConfig{}, 1);
  CHECK(rollout.terminal);
  CHECK(rollout.turns.size() == 1);
  CHECK(rollout.effort == 0);
  CHECK(rollout.score == doctest::Approx(1.0));
}

TEST_CASE("a wrong parametric hedge scores zero with zero effort") {
  const Society society = star_society();
  const World world = tiny_world();
  ScriptedPolicy script;
  script.on("asker", ActionKind::hedge(), "maybe the Ruhr valley", ArgSource::Parametric);
  const Rollout rollout = run_rollout(society, script, world, world.questions[0],
                                      star_orch_config(), RewardConfig{0.05}, 2);
  CHECK(rollout.terminal);
  CHECK(rollout.effort == 0);
  CHECK(rollout.score == 0.0);
  CHECK(rollout.reward == 0.0);
}

TEST_CASE("helper searching twice contributes effort 2 and one reply") {
  const Society society = star_society();
  const World world = tiny_world(0.5, 1.0, 1.0);
  const Question& q = world.questions[0];
  ScriptedPolicy script;
  script.on("asker", ActionKind::ask(), q.text)
      .on("pubmed", search_action(), q.text)
      .on("pubmed", search_action(), q.text)
      .on("pubmed", ActionKind::answer(), "Forges de Pompey", ArgSource::Retrieval)
      .on("wiki", ActionKind::hedge(), "guess", ArgSource::Parametric)
      .on("asker", ActionKind::answer(), "Forges de Pompey", ArgSource::FriendAnswer);
  const Rollout rollout =
      run_rollout(society, script, world, q, star_orch_config(), RewardConfig{0.01}, 7);
  CHECK(rollout.effort == 2);
  const auto& final_evidence = rollout.turns.back().context.evidence;
  int friend_answers = 0;
  for (const auto& e : final_evidence) friend_answers += e.tag == EvidenceTag::FriendAnswer;
  CHECK(friend_answers == 1);
  // the double-searcher accumulated both result sets
  CHECK(rollout.turns[3].agent_id == "pubmed");
  CHECK(rollout.turns[3].context.evidence.size() == 10);
}

TEST_CASE("deanon annotates friend tags with corpus ids, retrievals untouched") {
  const Society society = star_society();
  const World world = tiny_world(0.5, 1.0, 1.0);
  const Question& q = world.questions[0];
  OrchestratorConfig cfg = star_orch_config();
  cfg.deanon = true;

  ScriptedPolicy script;
  script.on("asker", ActionKind::ask(), q.text)
      .on("pubmed", search_action(), q.text)
      .on("pubmed", ActionKind::answer(), "Forges de Pompey", ArgSource::Retrieval)
      .on("wiki", ActionKind::hedge(), "guess", ArgSource::Parametric)
      .on("asker", ActionKind::answer(), "Forges de Pompey", ArgSource::FriendAnswer);
  const Rollout rollout = run_rollout(society, script, world, q, cfg, RewardConfig{}, 7);

  const auto& evidence = rollout.turns.back().context.evidence;
  REQUIRE(evidence.size() == 2);
  CHECK(evidence[0].source_id == "pubmed");
  CHECK(evidence[1].source_id == "wiki");
  for (const auto& e : rollout.turns[2].context.evidence) CHECK(e.source_id.empty());
}

TEST_CASE("availability respects can_ask and the search budget") {
  const Society society = star_society();
  const World world = tiny_world();
  const Question& q = world.questions[0];
  OrchestratorConfig cfg = star_orch_config();

  OrchestratorState state = initial_state(q, cfg);
  auto actions = available_actions(state, society, cfg);
  REQUIRE(actions.size() == 3);  // ANSWER, HEDGE, ASK; no tools on the asker
  CHECK(actions[2] == ActionKind::ask());

  state.current_agent = "wiki";
  actions = available_actions(state, society, cfg);
  REQUIRE(actions.size() == 3);  // ANSWER, HEDGE, SEARCH; helpers cannot ask
  CHECK(actions[2] == search_action());

  state.search_count = cfg.max_searches;
  actions = available_actions(state, society, cfg);
  CHECK(actions.size() == 2);  // budget spent: relinquish only
}

TEST_CASE("ask depth cap removes ASK") {
  Society society = star_society();
  society.agents[1].can_ask = true;  // pubmed could ask wiki
  society.edges.push_back({"pubmed", "wiki"});
  const World world = tiny_world();
  OrchestratorConfig cfg = star_orch_config();
  cfg.max_ask_depth = 1;

  OrchestratorState state = initial_state(world.questions[0], cfg);
  state.current_agent = "pubmed";
  state.ask_stack.push_back(AskFrame{"asker", "q", {"wiki"}});
  const auto actions = available_actions(state, society, cfg);
  for (const auto& a : actions) CHECK(a != ActionKind::ask());
}

TEST_CASE("an unavailable action falls back to a flagged HEDGE") {
  Society society = star_society();
  const World world = tiny_world();
  const Question& q = world.questions[0];
  ScriptedPolicy script;
  script.on("asker", search_action(), q.text);  // the asker has no tools
  const Rollout rollout =
      run_rollout(society, script, world, q, star_orch_config(), RewardConfig{}, 3);
  REQUIRE(rollout.turns.size() == 1);
  CHECK(rollout.turns[0].action == ActionKind::hedge());
  CHECK(rollout.turns[0].violation);
  CHECK(rollout.turns[0].argument.find("**SEARCH**") != std::string::npos);
  CHECK(rollout.terminal);
}

TEST_CASE("budget exhaustion forces termination for any policy") {
  const Society society = star_society();
  const World world = tiny_world(0.5, 0.5, 0.5);
  const Question& q = world.questions[0];

  struct GreedyPolicy final : AgentPolicy {
    // always the most expansive action available
    ActionChoice choose(const World&, const AgentSpec&, const AgentContext& ctx,
                        Rng&) const override {
      for (auto it = ctx.available_actions.rbegin(); it != ctx.available_actions.rend();
           ++it)
        if (it->is_tool() || it->type == ActionType::Ask)
          return {*it, ctx.query, ArgSource::Verbatim};
      return {ActionKind::hedge(), "forced", ArgSource::Verbatim};
    }
  };

  for (int max_turns = 1; max_turns <= 12; ++max_turns) {
    OrchestratorConfig cfg = star_orch_config();
    cfg.max_turns = max_turns;
    const Rollout rollout =
        run_rollout(society, GreedyPolicy{}, world, q, cfg, RewardConfig{}, 11);
    CHECK(rollout.terminal);
    CHECK(int(rollout.turns.size()) <= max_turns);
  }
}

TEST_CASE("stack discipline and effort accounting under random policies") {
  const Society society = star_society();
  const World world = tiny_world(0.4, 0.6, 0.6);
  const Question& q = world.questions[0];
  const RandomPolicy policy;
  for (uint64_t seed = 0; seed < 300; ++seed) {
    const Rollout r =
        run_rollout(society, policy, world, q, star_orch_config(), RewardConfig{0.01}, seed);
    REQUIRE(r.terminal);
    CHECK(int(r.turns.size()) <= star_orch_config().max_turns);
    // terminal turn is a relinquish by the initial agent
    CHECK(r.turns.back().agent_id == "asker");
    CHECK(r.turns.back().action.relinquishes());
    // effort equals the number of tool turns in the serialized rollout
    int searches = 0;
    for (const auto& t : r.turns) searches += t.action.is_tool();
    CHECK(r.effort == searches);
    CHECK(searches <= star_orch_config().max_searches);
    CHECK(r.reward == r.score - 0.01 * r.effort);
  }
}

TEST_CASE("same seed gives byte-identical rollouts") {
  const Society society = star_society();
  const World world = tiny_world(0.4, 0.6, 0.6);
  const Question& q = world.questions[0];
  const RandomPolicy policy;
  for (uint64_t seed : {3ull, 17ull, 202ull}) {
    const Rollout a =
        run_rollout(society, policy, world, q, star_orch_config(), RewardConfig{}, seed);
    const Rollout b =
        run_rollout(society, policy, world, q, star_orch_config(), RewardConfig{}, seed);
    CHECK(record_bytes(a) == record_bytes(b));
  }
}

TEST_CASE("broadcast isolation: edge order changes nothing") {
  Society forward = star_society();
  Society reversed = star_society();
  std::reverse(reversed.edges.begin(), reversed.edges.end());
  const World world = tiny_world(0.4, 0.6, 0.6);
  const Question& q = world.questions[0];
  const RandomPolicy policy;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const Rollout a =
        run_rollout(forward, policy, world, q, star_orch_config(), RewardConfig{}, seed);
    const Rollout b =
        run_rollout(reversed, policy, world, q, star_orch_config(), RewardConfig{}, seed);
    CHECK(record_bytes(a) == record_bytes(b));
  }
}

TEST_CASE("rollouts for missing initial agents are rejected") {
  Society society = star_society();
  const World world = tiny_world();
  OrchestratorConfig cfg;
  cfg.initial_agent = "ghost";
  CHECK_THROWS_AS(run_rollout(society, RandomPolicy{}, world, world.questions[0], cfg,
                              RewardConfig{}, 1),
                  std::invalid_argument);
}
