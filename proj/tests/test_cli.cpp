#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "support.hpp"
#include "triflow/cli.hpp"

using namespace triflow;
using support::TempDir;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

Run cli_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(std::move(args), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

const char* kTables[] = {"cities.csv",      "flights.csv",    "accommodations.csv",
                         "restaurants.csv", "attractions.csv", "distances.csv"};

// Sandbox from seed 2 plus `n` requests, written through the CLI itself.
struct Workspace {
  TempDir dir;
  std::string sandbox = dir.file("sandbox");
  std::string requests = dir.file("requests.jsonl");

  explicit Workspace(std::size_t n) {
    EXPECT_EQ(cli_run({"gen-sandbox", "--seed", "2", "--out", sandbox}).code, 0);
    EXPECT_EQ(cli_run({"gen-requests", "--sandbox", sandbox, "--n", std::to_string(n), "--seed", "2", "--out",
                       requests})
                  .code,
              0);
  }

  std::string first_request() {
    const auto text = support::slurp(requests);
    const auto path = dir.file("request.json");
    support::spit(path, text.substr(0, text.find('\n')));
    return path;
  }
};

}  // namespace

TEST(Cli, GenSandboxWritesCleanTables) {
  TempDir dir;
  const auto r = cli_run({"gen-sandbox", "--seed", "9", "--cities", "4", "--out", dir.file("a")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("integrity clean"), std::string::npos);
  for (const char* f : kTables) EXPECT_TRUE(std::filesystem::exists(dir.path() / "a" / f)) << f;
  EXPECT_EQ(load_sandbox(dir.file("a")).cities().size(), 4u);

  ASSERT_EQ(cli_run({"gen-sandbox", "--seed", "9", "--cities", "4", "--out", dir.file("b")}).code, 0);
  for (const char* f : kTables)
    EXPECT_EQ(support::slurp((dir.path() / "a" / f).string()), support::slurp((dir.path() / "b" / f).string())) << f;
}

TEST(Cli, GenSandboxRejectsZeroCities) {
  TempDir dir;
  const auto r = cli_run({"gen-sandbox", "--cities", "0", "--out", dir.file("x")});
  EXPECT_EQ(r.code, cli::exit_input);
  EXPECT_NE(r.err.find("error"), std::string::npos);
  EXPECT_EQ(cli_run({"gen-sandbox", "--start", "2024-02-30", "--out", dir.file("y")}).code, cli::exit_input);
}

TEST(Cli, PlanWritesPlanTraceAndReport) {
  Workspace ws(3);
  const auto out = ws.dir.file("plan.json");
  const auto trace = ws.dir.file("trace.json");
  const auto report = ws.dir.file("report.json");
  const auto r = cli_run({"plan", "--sandbox", ws.sandbox, "--request", ws.first_request(), "--out", out, "--trace",
                          trace, "--report", report});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("delivered"), std::string::npos);
  const auto plan = nlohmann::json::parse(support::slurp(out));
  EXPECT_EQ(plan.at("state"), "Delivered");
  EXPECT_TRUE(plan.at("itinerary").is_object() || plan.at("itinerary").is_array());
  const auto t = nlohmann::json::parse(support::slurp(trace));
  EXPECT_LE(t.at("iterations").size(), 8u);
  EXPECT_TRUE(nlohmann::json::parse(support::slurp(report)).contains("results"));
}

TEST(Cli, PlanIsReproducible) {
  Workspace ws(1);
  const auto req = ws.first_request();
  ASSERT_EQ(cli_run({"plan", "--sandbox", ws.sandbox, "--request", req, "--out", ws.dir.file("a.json")}).code, 0);
  ASSERT_EQ(cli_run({"plan", "--sandbox", ws.sandbox, "--request", req, "--out", ws.dir.file("b.json")}).code, 0);
  EXPECT_EQ(support::slurp(ws.dir.file("a.json")), support::slurp(ws.dir.file("b.json")));
}

TEST(Cli, MissingSandboxIsAnIoError) {
  TempDir dir;
  support::spit(dir.file("r.json"), "{}");
  const auto r = cli_run({"plan", "--sandbox", dir.file("nowhere"), "--request", dir.file("r.json"), "--out",
                          dir.file("p.json")});
  EXPECT_EQ(r.code, cli::exit_io);
}

TEST(Cli, MalformedRequestIsAnInputError) {
  Workspace ws(1);
  support::spit(ws.dir.file("bad.json"), "{\"origin\": ");
  EXPECT_EQ(cli_run({"plan", "--sandbox", ws.sandbox, "--request", ws.dir.file("bad.json"), "--out",
                     ws.dir.file("p.json")})
                .code,
            cli::exit_input);
}

TEST(Cli, EvalScoresABatchAndJobsDoNotMatter) {
  Workspace ws(50);
  const auto r1 = cli_run({"eval", "--sandbox", ws.sandbox, "--requests", ws.requests, "--out", ws.dir.file("r1.json"),
                           "--csv", ws.dir.file("r1.csv")});
  ASSERT_EQ(r1.code, 0) << r1.err;
  const auto r4 = cli_run({"eval", "--sandbox", ws.sandbox, "--requests", ws.requests, "--out", ws.dir.file("r4.json"),
                           "--csv", ws.dir.file("r4.csv"), "--jobs", "4"});
  ASSERT_EQ(r4.code, 0) << r4.err;

  const auto doc = nlohmann::json::parse(support::slurp(ws.dir.file("r1.json")));
  EXPECT_EQ(doc.at("overall").at("n_instances"), 50);
  EXPECT_EQ(doc.at("instances").size(), 50u);
  EXPECT_EQ(doc.at("per_constraint").size(), 13u);
  EXPECT_EQ(support::slurp(ws.dir.file("r1.json")), support::slurp(ws.dir.file("r4.json")));
  EXPECT_EQ(support::slurp(ws.dir.file("r1.csv")), support::slurp(ws.dir.file("r4.csv")));
  EXPECT_EQ(r1.out, r4.out);
  EXPECT_NE(r1.out.find("all: delivery"), std::string::npos);
}

TEST(Cli, ConfigFileAndOverrides) {
  Workspace ws(5);
  support::spit(ws.dir.file("cfg.json"), R"({"seed": 11, "max_governance_iterations": 2})");
  const auto r = cli_run({"eval", "--sandbox", ws.sandbox, "--requests", ws.requests, "--out", ws.dir.file("r.json"),
                          "--config", ws.dir.file("cfg.json"), "--seed", "12"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(support::slurp(ws.dir.file("r.json")));
  EXPECT_EQ(doc.at("config").at("seed"), 12);
  EXPECT_EQ(doc.at("config").at("max_governance_iterations"), 2);
  for (const auto& inst : doc.at("instances")) EXPECT_LE(inst.at("governance_iterations").get<int>(), 2);

  support::spit(ws.dir.file("bad.json"), R"({"agent": "psychic"})");
  EXPECT_EQ(cli_run({"eval", "--sandbox", ws.sandbox, "--requests", ws.requests, "--out", ws.dir.file("r2.json"),
                     "--config", ws.dir.file("bad.json")})
                .code,
            cli::exit_input);
}

TEST(Cli, BadRequestLineIsAnInputError) {
  Workspace ws(2);
  support::spit(ws.dir.file("broken.jsonl"), support::slurp(ws.requests) + "not json\n");
  const auto r = cli_run({"eval", "--sandbox", ws.sandbox, "--requests", ws.dir.file("broken.jsonl"), "--out",
                          ws.dir.file("r.json")});
  EXPECT_EQ(r.code, cli::exit_input);
  EXPECT_NE(r.err.find(":3"), std::string::npos) << r.err;
}

TEST(Cli, ArgumentErrorsAndHelp) {
  EXPECT_EQ(cli_run({}).code, cli::exit_input);
  EXPECT_EQ(cli_run({"fly"}).code, cli::exit_input);
  EXPECT_EQ(cli_run({"plan", "--sandbox", "x"}).code, cli::exit_input);
  EXPECT_EQ(cli_run({"eval", "--sandbox", "s", "--requests", "r", "--out", "o", "--jobs", "0"}).code, cli::exit_input);
  EXPECT_EQ(cli_run({"plan", "--sandbox", "s", "--request", "r", "--out", "o", "--agent", "oracle"}).code,
            cli::exit_input);
  const auto help = cli_run({"--help"});
  EXPECT_EQ(help.code, cli::exit_ok);
  EXPECT_NE(help.out.find("plan"), std::string::npos);
}
