#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "triflow/benchmark.hpp"
#include "triflow/generator.hpp"
#include "triflow/metrics.hpp"
#include "triflow/orchestrator.hpp"
#include "triflow/sandbox.hpp"

namespace triflow::cli {

// Exit codes
inline constexpr int exit_ok = 0;
inline constexpr int exit_input = 1;
inline constexpr int exit_io = 2;

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string agent;  // empty keeps the config value
};

struct PlanArgs {
  std::string sandbox;
  std::string request;
  std::string out;
  std::string trace;
  std::string report;
  CommonArgs common;
};

struct EvalArgs {
  std::string sandbox;
  std::string requests;
  std::string out;
  std::string csv;
  unsigned jobs = 1;
  CommonArgs common;
};

struct GenSandboxArgs {
  std::uint64_t seed = 0;
  SyntheticParams params;
  std::string first_date = "2024-03-01";
  std::string out;
};

struct GenRequestsArgs {
  std::string sandbox;
  std::size_t n = 100;
  std::uint64_t seed = 0;
  std::string out;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  f << text;
  if (!f) throw IoError("failed writing " + path);
}

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline PipelineConfig resolve_config(const CommonArgs& a) {
  PipelineConfig c = a.config.empty() ? PipelineConfig{} : load_config(a.config);
  if (a.seed) c.seed = *a.seed;
  if (a.agent == "mock") c.agent = AgentBackend::mock;
  if (a.agent == "remote") c.agent = AgentBackend::remote;
  return c;
}

inline SandboxDataset load_checked(const std::string& path, std::ostream& err) {
  auto d = load_sandbox(path);
  const auto integrity = validate_integrity(d);
  if (!integrity.clean())
    err << "warning: " << integrity.violations.size()
        << " sandbox records fail integrity checks and will be dropped at retrieval\n";
  return d;
}

// Maps library errors onto the exit-code contract.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return exit_io;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_input;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_input;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return exit_io;
  }
}

inline int cmd_plan(const PlanArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = resolve_config(a.common);
    const auto d = load_checked(a.sandbox, err);
    auto j = nlohmann::json::parse(read_text(a.request), nullptr, false);
    if (j.is_discarded()) throw ValidationError("request " + a.request + " is not valid JSON");
    const auto request = request_from_json(j);
    auto agent = make_agent(cfg.agent);
    const auto outcome = run_pipeline(request, d, cfg, *agent);

    write_text(a.out, plan_document(outcome).dump(2) + "\n");
    if (!a.trace.empty()) write_text(a.trace, to_json(outcome.trace).dump(2) + "\n");
    if (!a.report.empty()) write_text(a.report, to_json(outcome.final_report).dump(2) + "\n");
    out << "delivered: " << (outcome.final_report.all_passed() ? "all constraints pass" : "with failing constraints")
        << ", cost " << outcome.cost.total << " of budget " << outcome.query.budget << ", "
        << outcome.trace.iterations.size() << " governance iterations\n";
    return outcome.delivered() ? exit_ok : exit_input;
  });
}

inline int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = resolve_config(a.common);
    const auto d = load_checked(a.sandbox, err);
    const auto requests = read_requests_jsonl(a.requests);
    if (requests.empty()) throw ValidationError("no requests in " + a.requests);
    const auto items = run_batch(requests, d, cfg, a.jobs);
    const auto report = evaluate_batch(items);

    auto doc = to_json(report);
    doc["config"] = to_json(cfg);
    doc["instances"] = batch_instances_json(items);
    write_text(a.out, doc.dump(2) + "\n");
    if (!a.csv.empty()) write_text(a.csv, csv_table(report));
    out << text_table(report);
    return exit_ok;
  });
}

inline int cmd_gen_sandbox(const GenSandboxArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto params = a.params;
    const auto first = Date::parse(a.first_date);
    if (!first) throw ValidationError("bad --start date '" + a.first_date + "'");
    params.first_date = *first;
    const auto d = generate_synthetic(a.seed, params);
    save_sandbox(d, a.out);
    const auto integrity = validate_integrity(d);
    out << "cities " << d.cities().size() << ", flights " << d.flights().size() << ", distances "
        << d.distances().size() << ", accommodations " << d.accommodations().size() << ", restaurants "
        << d.restaurants().size() << ", attractions " << d.attractions().size() << "; integrity "
        << (integrity.clean() ? "clean" : "violations: " + std::to_string(integrity.violations.size())) << "\n";
    return exit_ok;
  });
}

inline int cmd_gen_requests(const GenRequestsArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto d = load_checked(a.sandbox, err);
    const auto requests = generate_requests(d, a.n, a.seed);
    write_requests_jsonl(requests, a.out);
    out << "wrote " << requests.size() << " requests to " << a.out << "\n";
    return exit_ok;
  });
}

inline void add_common(CLI::App* app, CommonArgs& c) {
  app->add_option("--config", c.config, "pipeline config JSON");
  app->add_option("--seed", c.seed, "seed override");
  app->add_option("--agent", c.agent, "agent backend")->check(CLI::IsMember({"mock", "remote"}));
}

// `args` excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Feasibility-first trip itinerary planner", "triflow"};
  app.require_subcommand(1);

  PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan", "plan a single request");
  plan->add_option("--sandbox", plan_args.sandbox, "sandbox directory")->required();
  plan->add_option("--request", plan_args.request, "request JSON file")->required();
  plan->add_option("--out", plan_args.out, "plan output JSON")->required();
  plan->add_option("--trace", plan_args.trace, "governance trace output JSON");
  plan->add_option("--report", plan_args.report, "constraint report output JSON");
  add_common(plan, plan_args.common);

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "run a batch of requests and score it");
  eval->add_option("--sandbox", eval_args.sandbox, "sandbox directory")->required();
  eval->add_option("--requests", eval_args.requests, "requests, one JSON object per line")->required();
  eval->add_option("--out", eval_args.out, "benchmark report JSON")->required();
  eval->add_option("--csv", eval_args.csv, "per-constraint table as CSV");
  eval->add_option("--jobs", eval_args.jobs, "worker threads")->check(CLI::Range(1u, 256u));
  add_common(eval, eval_args.common);

  GenSandboxArgs gs;
  auto* gen = app.add_subcommand("gen-sandbox", "write a synthetic sandbox");
  gen->add_option("--seed", gs.seed);
  gen->add_option("--cities", gs.params.n_cities);
  gen->add_option("--flights-per-pair", gs.params.n_flights_per_pair);
  gen->add_option("--accommodations", gs.params.n_accommodations_per_city);
  gen->add_option("--restaurants", gs.params.n_restaurants_per_city);
  gen->add_option("--attractions", gs.params.n_attractions_per_city);
  gen->add_option("--dates", gs.params.n_dates, "number of calendar dates with flights");
  gen->add_option("--start", gs.first_date, "first flight date, YYYY-MM-DD");
  gen->add_option("--out", gs.out, "output directory")->required();

  GenRequestsArgs gr;
  auto* genr = app.add_subcommand("gen-requests", "write seeded benchmark requests");
  genr->add_option("--sandbox", gr.sandbox, "sandbox directory")->required();
  genr->add_option("--n", gr.n, "number of requests");
  genr->add_option("--seed", gr.seed);
  genr->add_option("--out", gr.out, "requests JSONL output")->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_input;
  }

  if (plan->parsed()) return cmd_plan(plan_args, out, err);
  if (eval->parsed()) return cmd_eval(eval_args, out, err);
  if (gen->parsed()) return cmd_gen_sandbox(gs, out, err);
  return cmd_gen_requests(gr, out, err);
}

}  // namespace triflow::cli
