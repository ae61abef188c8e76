#pragma once

#include <chrono>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "triflow/agent.hpp"
#include "triflow/constraints.hpp"
#include "triflow/governance.hpp"
#include "triflow/planner.hpp"
#include "triflow/remote_agent.hpp"
#include "triflow/request.hpp"
#include "triflow/retrieval.hpp"
#include "triflow/sandbox.hpp"

namespace triflow {

enum class AgentBackend { mock, remote };

struct PipelineConfig {
  StageTemperatures temperatures;
  int max_governance_iterations = 8;
  std::vector<std::size_t> candidate_caps{20, 50, 0};  // first pass, then one per recompute; 0 = all
  int recompute_budget = 2;
  AgentBackend agent = AgentBackend::mock;
  std::uint64_t seed = 0;
  bool parallel_retrieval = false;
};

inline nlohmann::json to_json(const PipelineConfig& c) {
  return nlohmann::json{{"temperatures",
                         {{"retrieval", c.temperatures.retrieval},
                          {"planning", c.temperatures.planning},
                          {"governance", c.temperatures.governance}}},
                        {"max_governance_iterations", c.max_governance_iterations},
                        {"candidate_caps", c.candidate_caps},
                        {"recompute_budget", c.recompute_budget},
                        {"agent", c.agent == AgentBackend::mock ? "mock" : "remote"},
                        {"seed", c.seed},
                        {"parallel_retrieval", c.parallel_retrieval}};
}

// Missing keys keep their defaults; wrongly typed or out-of-range values throw.
inline PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig c = {}) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  try {
    if (j.contains("temperatures")) {
      const auto& t = j.at("temperatures");
      if (t.contains("retrieval")) c.temperatures.retrieval = t.at("retrieval").get<double>();
      if (t.contains("planning")) c.temperatures.planning = t.at("planning").get<double>();
      if (t.contains("governance")) c.temperatures.governance = t.at("governance").get<double>();
    }
    if (j.contains("max_governance_iterations"))
      c.max_governance_iterations = j.at("max_governance_iterations").get<int>();
    if (j.contains("candidate_caps")) c.candidate_caps = j.at("candidate_caps").get<std::vector<std::size_t>>();
    if (j.contains("recompute_budget")) c.recompute_budget = j.at("recompute_budget").get<int>();
    if (j.contains("agent")) {
      const auto a = j.at("agent").get<std::string>();
      if (a == "mock")
        c.agent = AgentBackend::mock;
      else if (a == "remote")
        c.agent = AgentBackend::remote;
      else
        throw ValidationError("unknown agent backend '" + a + "'");
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("parallel_retrieval")) c.parallel_retrieval = j.at("parallel_retrieval").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad config: ") + e.what());
  }
  for (double t : {c.temperatures.retrieval, c.temperatures.planning, c.temperatures.governance})
    if (t < 0 || t > 2) throw ValidationError("temperature out of range");
  if (c.max_governance_iterations < 0) throw ValidationError("max_governance_iterations must be >= 0");
  if (c.recompute_budget < 0) throw ValidationError("recompute_budget must be >= 0");
  if (c.candidate_caps.empty()) throw ValidationError("candidate_caps must not be empty");
  return c;
}

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto j = nlohmann::json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) throw ValidationError("config " + path + " is not valid JSON");
  return config_from_json(j);
}

inline std::unique_ptr<Agent> make_agent(AgentBackend backend) {
  if (backend == AgentBackend::remote) return std::make_unique<RemoteAgent>(RemoteEndpoint::from_environment());
  return std::make_unique<MockAgent>();
}

// ---------------------------------------------------------------------------
// State machine

enum class PipelineState { Init, Retrieval, Planning, Governance, Delivered, Failed };

inline std::string_view to_string(PipelineState s) {
  switch (s) {
    case PipelineState::Init: return "Init";
    case PipelineState::Retrieval: return "Retrieval";
    case PipelineState::Planning: return "Planning";
    case PipelineState::Governance: return "Governance";
    case PipelineState::Delivered: return "Delivered";
    case PipelineState::Failed: return "Failed";
  }
  return "?";
}

class PipelineStateMachine {
 public:
  static bool legal(PipelineState from, PipelineState to) {
    using S = PipelineState;
    if (to == S::Failed) return from != S::Delivered && from != S::Failed;
    return (from == S::Init && to == S::Retrieval) || (from == S::Retrieval && to == S::Planning) ||
           (from == S::Planning && to == S::Governance) || (from == S::Governance && to == S::Delivered) ||
           (from == S::Governance && to == S::Planning);
  }

  PipelineState state() const { return state_; }
  const std::vector<PipelineState>& history() const { return history_; }

  void transition(PipelineState to) {
    if (!legal(state_, to))
      throw ContractViolation("illegal pipeline transition " + std::string(to_string(state_)) + " -> " +
                              std::string(to_string(to)));
    state_ = to;
    history_.push_back(to);
  }

 private:
  PipelineState state_ = PipelineState::Init;
  std::vector<PipelineState> history_{PipelineState::Init};
};

// ---------------------------------------------------------------------------
// Pipeline

struct StageTimings {
  double retrieval_ms = 0;
  double planning_ms = 0;
  double governance_ms = 0;
  double total_ms = 0;
};

struct PlanOutcome {
  StructuredQuery query;
  Itinerary itinerary;
  Skeleton skeleton;
  GovernanceTrace trace;
  ConstraintReport final_report;
  CostBreakdown cost;
  StageTimings timings;
  int agent_calls = 0;
  std::vector<SlotId> gaps;                   // slots the planner could not fill
  std::vector<std::string> retrieval_misses;  // mandatory records retrieval could not find
  int recomputes = 0;
  PipelineState state = PipelineState::Init;
  std::vector<PipelineState> transitions;

  bool delivered() const { return state == PipelineState::Delivered; }
};

namespace pipeline_detail {

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Pass {
  RetrievedSubset subset;
  std::vector<std::string> misses;
  PlanResult planned;
  Itinerary governed;
  GovernanceTrace trace;
  SystemReport report;
};

}  // namespace pipeline_detail

// decompose -> retrieve -> plan -> govern, then up to `recompute_budget`
// Governance -> Planning round trips with wider candidate caps while slots stay empty.
inline PlanOutcome run_pipeline_with(const StructuredQuery& q, const SandboxDataset& d, const PipelineConfig& cfg,
                                     Agent& agent) {
  using namespace pipeline_detail;
  const auto t_start = Clock::now();
  const int calls_before = agent.calls();
  PipelineStateMachine sm;
  PlanOutcome out;
  out.query = q;

  auto cap_for = [&](int pass) {
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(pass), cfg.candidate_caps.size() - 1);
    return cfg.candidate_caps[k];
  };

  auto run_pass = [&](int pass) {
    Pass p;
    auto t0 = Clock::now();
    try {
      p.subset = retrieve_subset(q, d, RetrievalOptions{cap_for(pass), cfg.parallel_retrieval});
    } catch (const InfeasibleRetrieval& e) {
      p.subset = e.subset();
      p.misses = e.slots();
    }
    out.timings.retrieval_ms += ms_since(t0);
    if (pass == 0) sm.transition(PipelineState::Planning);

    t0 = Clock::now();
    PlannerOptions popts;
    popts.role = cfg.temperatures.role(Stage::planning);
    popts.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(pass));
    std::optional<Skeleton> sk;
    try {
      sk = build_skeleton(q, p.subset, agent, {true, popts.seed});
    } catch (const SkeletonInfeasible&) {
      sk = build_skeleton(q, p.subset, agent, {false, popts.seed});
    }
    p.planned = plan(q, p.subset, agent, popts, sk);
    out.timings.planning_ms += ms_since(t0);
    sm.transition(PipelineState::Governance);

    t0 = Clock::now();
    GovernanceOptions gopts;
    gopts.max_iterations = cfg.max_governance_iterations;
    gopts.role = cfg.temperatures.role(Stage::governance);
    gopts.seed = popts.seed;
    std::tie(p.governed, p.trace) = govern(p.planned.itinerary, q, p.subset, d, agent, gopts);
    p.report = build_system_report(p.governed, q, p.subset, d);
    out.timings.governance_ms += ms_since(t0);
    return p;
  };

  sm.transition(PipelineState::Retrieval);
  Pass best = run_pass(0);
  int pass = 0;
  while (!best.report.constraint_report.passed("complete_information") && pass < cfg.recompute_budget) {
    ++pass;
    sm.transition(PipelineState::Planning);
    Pass next = run_pass(pass);
    ++out.recomputes;
    if (objective(next.report) < objective(best.report)) best = std::move(next);
  }
  sm.transition(PipelineState::Delivered);

  out.itinerary = std::move(best.governed);
  out.skeleton = std::move(best.planned.skeleton);
  out.trace = std::move(best.trace);
  out.final_report = best.report.constraint_report;
  out.cost = best.report.cost;
  out.gaps = std::move(best.planned.gaps);
  out.retrieval_misses = std::move(best.misses);
  out.agent_calls = agent.calls() - calls_before;
  out.state = sm.state();
  out.transitions = sm.history();
  out.timings.total_ms = ms_since(t_start);
  return out;
}

// Throws ValidationError / ResolutionError for malformed requests.
inline PlanOutcome run_pipeline(const UserRequest& r, const SandboxDataset& d, const PipelineConfig& cfg,
                                Agent& agent) {
  const auto q = decompose_query(r, d, agent);
  return run_pipeline_with(q, d, cfg, agent);
}

inline PlanOutcome run_pipeline(const UserRequest& r, const SandboxDataset& d, const PipelineConfig& cfg = {}) {
  auto agent = make_agent(cfg.agent);
  return run_pipeline(r, d, cfg, *agent);
}

inline nlohmann::json to_json(const StageTimings& t) {
  return nlohmann::json{{"retrieval_ms", t.retrieval_ms},
                        {"planning_ms", t.planning_ms},
                        {"governance_ms", t.governance_ms},
                        {"total_ms", t.total_ms}};
}

// Plan file: itinerary plus its constraint report. Timings are left out so the
// file is reproducible.
inline nlohmann::json plan_document(const PlanOutcome& o) {
  nlohmann::json gaps = nlohmann::json::array();
  for (const auto& g : o.gaps) gaps.push_back(g.to_string());
  std::vector<std::string> states;
  for (auto s : o.transitions) states.emplace_back(to_string(s));
  return nlohmann::json{{"query", to_json(o.query)},
                        {"state", std::string(to_string(o.state))},
                        {"skeleton", to_json(o.skeleton)},
                        {"itinerary", to_json(o.itinerary)},
                        {"cost", to_json(o.cost)},
                        {"constraint_report", to_json(o.final_report)},
                        {"gaps", gaps},
                        {"retrieval_misses", o.retrieval_misses},
                        {"recomputes", o.recomputes},
                        {"transitions", states},
                        {"ledger", to_json(o.itinerary.ledger)}};
}

}  // namespace triflow
