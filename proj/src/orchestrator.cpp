#include "csp/orchestrator.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace csp {

namespace {

// helper identity revealed under deanonymization: the corpus it searches,
// falling back to the agent id for tool-less agents
std::string deanon_label(const AgentSpec& agent) {
  return agent.tools.empty() ? agent.agent_id : agent.tools.front().corpus_id;
}

}  // namespace

OrchestratorState initial_state(const Question& question, const OrchestratorConfig& cfg) {
  OrchestratorState state;
  state.question = &question;
  state.current_agent = cfg.initial_agent;
  state.incoming_query[cfg.initial_agent] = question.text;
  state.history.query_id = question.id;
  return state;
}

int min_turns_to_terminal(const OrchestratorState& state) {
  int turns = 1;  // the current agent's relinquish
  for (const auto& frame : state.ask_stack)
    turns += static_cast<int>(frame.remaining.size()) + 1;
  return turns;
}

std::vector<ActionKind> available_actions(const OrchestratorState& state,
                                          const Society& society,
                                          const OrchestratorConfig& cfg) {
  std::vector<ActionKind> actions{ActionKind::answer(), ActionKind::hedge()};
  const AgentSpec* agent = society.find_agent(state.current_agent);
  if (agent == nullptr) return actions;

  const int unwind = min_turns_to_terminal(state);
  const auto neighbors = society.out_neighbors(agent->agent_id);
  if (agent->can_ask && !neighbors.empty() &&
      static_cast<int>(state.ask_stack.size()) < cfg.max_ask_depth &&
      state.turn_count + 1 + static_cast<int>(neighbors.size()) + unwind <= cfg.max_turns)
    actions.push_back(ActionKind::ask());

  if (state.search_count < cfg.max_searches &&
      state.turn_count + 1 + unwind <= cfg.max_turns) {
    std::vector<ActionKind> tools;
    for (const auto& tool : agent->tools) tools.push_back(ActionKind::tool_action(tool.keyword));
    std::sort(tools.begin(), tools.end());
    actions.insert(actions.end(), tools.begin(), tools.end());
  }
  return actions;
}

AgentContext build_context(const OrchestratorState& state, const std::string& for_agent,
                           const Society& society, const OrchestratorConfig& cfg) {
  AgentContext ctx;
  ctx.question = state.question;
  const auto query_it = state.incoming_query.find(for_agent);
  ctx.query = query_it == state.incoming_query.end() ? std::string{} : query_it->second;
  const auto evidence_it = state.evidence.find(for_agent);
  if (evidence_it != state.evidence.end()) ctx.evidence = evidence_it->second;
  if (for_agent == state.current_agent)
    ctx.available_actions = available_actions(state, society, cfg);
  return ctx;
}

OrchestratorState step(OrchestratorState state, const ActionChoice& output,
                       const Society& society, const World& world,
                       const OrchestratorConfig& cfg, Rng& rng) {
  if (state.terminal) throw std::logic_error("step on a terminal rollout");

  AgentContext ctx = build_context(state, state.current_agent, society, cfg);
  ActionChoice choice = output;
  if (!ctx.has(choice.kind)) {
    choice.argument = render_action_line(choice.kind, choice.argument);
    choice.kind = ActionKind::hedge();
    choice.source = ArgSource::Verbatim;
    choice.source_id.clear();
    choice.violation = true;
  }

  const AgentSpec* agent = society.find_agent(state.current_agent);
  assert(agent != nullptr);

  state.history.turns.push_back(Turn{state.current_agent, std::move(ctx), choice.kind,
                                     choice.argument, choice.source, choice.source_id,
                                     choice.violation});
  ++state.turn_count;

  if (choice.kind.is_tool()) {
    const ToolSpec* tool = agent->find_tool(choice.kind.tool);
    assert(tool != nullptr);
    const Corpus* corpus = world.find_corpus(tool->corpus_id);
    if (corpus != nullptr) {
      auto items = retrieve(*corpus, *state.question, tool->k_results, rng);
      auto& buffer = state.evidence[state.current_agent];
      buffer.insert(buffer.end(), items.begin(), items.end());
    }
    ++state.search_count;
    return state;  // control retained
  }

  if (choice.kind.type == ActionType::Ask) {
    AskFrame frame;
    frame.asker = state.current_agent;
    frame.query = choice.argument;
    frame.remaining = society.out_neighbors(state.current_agent);
    state.current_agent = frame.remaining.front();
    state.incoming_query[state.current_agent] = frame.query;
    frame.remaining.erase(frame.remaining.begin());
    state.ask_stack.push_back(std::move(frame));
    return state;
  }

  // ANSWER / HEDGE relinquish control
  if (state.ask_stack.empty()) {
    state.terminal = true;
    state.history.terminal = true;
    state.history.final_answer = choice.argument;
    state.history.effort = state.search_count;
    return state;
  }

  AskFrame& top = state.ask_stack.back();
  EvidenceItem reply;
  reply.tag = choice.kind.type == ActionType::Answer ? EvidenceTag::FriendAnswer
                                                     : EvidenceTag::FriendHedge;
  reply.text = choice.argument;
  if (cfg.deanon) reply.source_id = deanon_label(*agent);
  state.evidence[top.asker].push_back(std::move(reply));

  if (!top.remaining.empty()) {
    state.current_agent = top.remaining.front();
    state.incoming_query[state.current_agent] = top.query;
    top.remaining.erase(top.remaining.begin());
  } else {
    state.current_agent = top.asker;
    state.ask_stack.pop_back();
  }
  return state;
}

Rollout run_rollout(const Society& society, const AgentPolicy& policy, const World& world,
                    const Question& question, const OrchestratorConfig& cfg,
                    const RewardConfig& reward_cfg, uint64_t seed) {
  if (society.find_agent(cfg.initial_agent) == nullptr)
    throw std::invalid_argument("initial agent not in society: " + cfg.initial_agent);

  Rng rng(seed);
  OrchestratorState state = initial_state(question, cfg);
  while (!state.terminal) {
    const AgentSpec* agent = society.find_agent(state.current_agent);
    assert(agent != nullptr);
    AgentContext ctx = build_context(state, state.current_agent, society, cfg);
    ActionChoice choice = policy.choose(world, *agent, ctx, rng);
    state = step(std::move(state), choice, society, world, cfg, rng);
  }
  assert(state.turn_count <= cfg.max_turns);

  Rollout rollout = std::move(state.history);
  rollout.score = token_f1(rollout.final_answer, question.gold_answer);
  rollout.reward = reward(rollout, question.gold_answer, reward_cfg);
  return rollout;
}

Society single_agent_society(const AgentSpec& agent) {
  Society society;
  society.agents.push_back(agent);
  return society;
}

}  // namespace csp
