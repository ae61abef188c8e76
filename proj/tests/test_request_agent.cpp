#include <gtest/gtest.h>

#include <httplib.h>

#include <thread>

#include "support.hpp"

using namespace triflow;

namespace {

UserRequest simple_request() {
  UserRequest r;
  r.origin = "Home";
  r.destination_cities = {"Alpha"};
  r.dates = {support::kDay0, support::kDay0.plus_days(1), support::kDay0.plus_days(2)};
  r.party_size = 2;
  r.budget = 90000;
  return r;
}

std::vector<std::string> labels(std::size_t n) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back("c" + std::to_string(i));
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// agent

TEST(MockAgent, TemperatureZeroAlwaysPicksTheFirstCandidate) {
  MockAgent agent;
  const auto c = labels(6);
  for (std::uint64_t seed = 0; seed < 200; ++seed)
    EXPECT_EQ(agent.suggest({Stage::retrieval, 0.0}, "ctx" + std::to_string(seed), c, seed).choice, 0u);
}

TEST(MockAgent, WindowMatchesTemperature) {
  EXPECT_EQ(window_for_temperature(0.0), 1u);
  EXPECT_EQ(window_for_temperature(0.3), 2u);
  EXPECT_EQ(window_for_temperature(0.6), 3u);
  MockAgent agent;
  const auto c = labels(10);
  std::set<std::size_t> seen;
  for (std::uint64_t seed = 0; seed < 300; ++seed) seen.insert(agent.suggest({Stage::governance, 0.6}, "x", c, seed).choice);
  EXPECT_EQ(seen, (std::set<std::size_t>{0, 1, 2}));
}

TEST(MockAgent, WindowNeverExceedsCandidateCount) {
  MockAgent agent;
  const auto c = labels(2);
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    EXPECT_LT(agent.suggest({Stage::governance, 0.6}, "x", c, seed).choice, 2u);
}

TEST(MockAgent, SamePickForSameInputs) {
  MockAgent a, b;
  const auto c = labels(5);
  for (std::uint64_t seed = 0; seed < 50; ++seed)
    EXPECT_EQ(a.suggest({Stage::governance, 0.6}, "slot", c, seed).choice,
              b.suggest({Stage::governance, 0.6}, "slot", c, seed).choice);
}

TEST(MockAgent, EmptyCandidatesIsAContractViolation) {
  MockAgent agent;
  std::vector<std::string> none;
  EXPECT_THROW(agent.suggest({Stage::planning, 0.3}, "x", none, 1), ContractViolation);
}

TEST(MockAgent, CountsCalls) {
  MockAgent agent;
  const auto c = labels(3);
  agent.suggest({Stage::planning, 0.3}, "x", c, 1);
  agent.extract_tags("thai food");
  EXPECT_EQ(agent.calls(), 2);
}

TEST(StageTemperatures, DefaultSchedule) {
  StageTemperatures t;
  EXPECT_DOUBLE_EQ(t.role(Stage::retrieval).temperature, 0.0);
  EXPECT_DOUBLE_EQ(t.role(Stage::planning).temperature, 0.3);
  EXPECT_DOUBLE_EQ(t.role(Stage::governance).temperature, 0.6);
}

TEST(RuleBasedTags, MapsWordsOntoVocabulary) {
  EXPECT_EQ(rule_based_tags("Sushi and pizza, then museums and a zoo"),
            (std::vector<std::string>{"japanese", "italian", "museum", "zoo"}));
  EXPECT_TRUE(rule_based_tags("nothing relevant here").empty());
}

// ---------------------------------------------------------------------------
// remote agent

TEST(RemoteAgent, ReplyParsing) {
  auto s = parse_agent_reply(R"({"choice_index": 2, "rationale": "cheapest", "confidence": 0.8})");
  ASSERT_TRUE(s);
  EXPECT_EQ(s->choice, 2u);
  EXPECT_EQ(s->rationale, "cheapest");
  EXPECT_DOUBLE_EQ(s->confidence.value(), 0.8);
  EXPECT_FALSE(parse_agent_reply("not json"));
  EXPECT_FALSE(parse_agent_reply(R"({"choice_index": -1})"));
  EXPECT_FALSE(parse_agent_reply(R"({"choice_index": "1"})"));
  EXPECT_FALSE(parse_agent_reply(R"([1])"));
}

TEST(RemoteAgent, UrlSplitting) {
  auto p = split_url("http://127.0.0.1:8080/v1/suggest");
  ASSERT_TRUE(p);
  EXPECT_EQ(p->first, "http://127.0.0.1:8080");
  EXPECT_EQ(p->second, "/v1/suggest");
  EXPECT_EQ(split_url("http://host")->second, "/");
  EXPECT_FALSE(split_url("no-scheme"));
}

TEST(RemoteAgent, TalksToAnEndpoint) {
  httplib::Server server;
  std::string seen_auth;
  nlohmann::json seen_body;
  server.Post("/suggest", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = nlohmann::json::parse(req.body);
    res.set_content(R"({"choice_index": 1, "rationale": "second is better"})", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  RemoteEndpoint ep;
  ep.url = "http://127.0.0.1:" + std::to_string(port) + "/suggest";
  ep.token = "secret";
  ep.timeout = std::chrono::milliseconds(2000);
  RemoteAgent agent(ep);
  const auto c = labels(3);
  const auto s = agent.suggest({Stage::planning, 0.3}, "lunch[day1]", c, 7);
  server.stop();
  t.join();

  EXPECT_EQ(s.choice, 1u);
  EXPECT_EQ(s.rationale, "second is better");
  EXPECT_EQ(agent.fallbacks(), 0);
  EXPECT_EQ(seen_auth, "Bearer secret");
  EXPECT_EQ(seen_body["role"], "planning");
  EXPECT_EQ(seen_body["context"], "lunch[day1]");
  EXPECT_EQ(seen_body["candidates"].size(), 3u);
}

TEST(RemoteAgent, MalformedReplyFallsBackToMock) {
  httplib::Server server;
  server.Post("/s", [](const httplib::Request&, httplib::Response& res) { res.set_content("oops", "text/plain"); });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  RemoteEndpoint ep;
  ep.url = "http://127.0.0.1:" + std::to_string(port) + "/s";
  ep.retries = 1;
  RemoteAgent agent(ep);
  const auto c = labels(4);
  const auto s = agent.suggest({Stage::governance, 0.6}, "ctx", c, 3);
  server.stop();
  t.join();
  EXPECT_EQ(s.choice, mock_suggest({Stage::governance, 0.6}, "ctx", 4, 3).choice);
  EXPECT_EQ(agent.fallbacks(), 1);
}

TEST(RemoteAgent, UnreachableEndpointStillDelivers) {
  // Grab a free port, then close it so nothing listens there.
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  RemoteEndpoint ep;
  ep.url = "http://127.0.0.1:" + std::to_string(port) + "/suggest";
  ep.timeout = std::chrono::milliseconds(200);
  ep.retries = 0;
  RemoteAgent agent(ep);

  const SandboxDataset d(support::micro_tables());
  const auto outcome = run_pipeline(simple_request(), d, PipelineConfig{}, agent);
  EXPECT_TRUE(outcome.delivered());
  EXPECT_GT(agent.fallbacks(), 0);
}

// ---------------------------------------------------------------------------
// request

TEST(Request, StructuredRequestKeepsItsFields) {
  const SandboxDataset d(support::micro_tables());
  MockAgent agent;
  auto r = simple_request();
  r.hard.cuisines = {"Thai "};
  r.preferences = {"Museum", "museum", " art"};
  const auto q = decompose_query(r, d, agent);
  EXPECT_EQ(q.origin, "Home");
  EXPECT_EQ(q.destinations, (std::vector<std::string>{"Alpha"}));
  EXPECT_EQ(q.dates, r.dates);
  EXPECT_EQ(q.party_size, 2);
  EXPECT_EQ(q.budget, 90000);
  EXPECT_EQ(q.hard.cuisines, (std::set<std::string>{"thai"}));
  EXPECT_EQ(q.preferences, (std::vector<std::string>{"museum", "art"}));
  EXPECT_EQ(q.tier(), Tier::easy);
}

TEST(Request, CityNamesAreCanonicalized) {
  auto t = support::micro_tables();
  t.cities.push_back({"NewYork", 41.0, -74.0});
  const SandboxDataset d(t);
  MockAgent agent;
  auto r = simple_request();
  r.destination_cities = {"new york"};
  EXPECT_EQ(decompose_query(r, d, agent).destinations, (std::vector<std::string>{"NewYork"}));
  r.destination_cities = {"newyork"};
  EXPECT_EQ(decompose_query(r, d, agent).destinations, (std::vector<std::string>{"NewYork"}));
}

TEST(Request, UnknownCityListsNearestNames) {
  const SandboxDataset d(support::micro_tables());
  MockAgent agent;
  auto r = simple_request();
  r.destination_cities = {"Alpah"};
  try {
    decompose_query(r, d, agent);
    FAIL() << "expected a resolution error";
  } catch (const ResolutionError& e) {
    EXPECT_EQ(e.name(), "Alpah");
    ASSERT_FALSE(e.candidates().empty());
    EXPECT_EQ(e.candidates().front(), "Alpha");
  }
}

TEST(Request, TripLengthMustBeThreeFiveOrSeven) {
  const SandboxDataset d(support::micro_tables());
  MockAgent agent;
  auto r = simple_request();
  r.dates.push_back(support::kDay0.plus_days(3));
  EXPECT_THROW(decompose_query(r, d, agent), ValidationError);
}

TEST(Request, OtherValidationRules) {
  const SandboxDataset d(support::micro_tables());
  MockAgent agent;
  auto bad = [&](auto mutate) {
    auto r = simple_request();
    mutate(r);
    EXPECT_THROW(decompose_query(r, d, agent), ValidationError);
  };
  bad([](UserRequest& r) { r.dates[2] = support::kDay0.plus_days(5); });
  bad([](UserRequest& r) { r.party_size = 0; });
  bad([](UserRequest& r) { r.budget = -1; });
  bad([](UserRequest& r) { r.destination_cities = {"Home"}; });
  bad([](UserRequest& r) { r.destination_cities.clear(); });
  bad([](UserRequest& r) { r.hard.transport_bans = {TransportMode::taxi}; });
}

TEST(Request, FreeTextOnlyFillsMissingPreferences) {
  const SandboxDataset d(support::micro_tables());
  MockAgent agent;
  auto r = simple_request();
  r.raw_text = "we love sushi and castles... and a castle";
  EXPECT_EQ(decompose_query(r, d, agent).preferences, (std::vector<std::string>{"japanese", "castle"}));
  r.preferences = {"zoo"};
  EXPECT_EQ(decompose_query(r, d, agent).preferences, (std::vector<std::string>{"zoo"}));
}

TEST(Request, DecompositionIsIdempotent) {
  const SandboxDataset d(support::micro_tables());
  MockAgent agent;
  auto r = simple_request();
  r.destination_cities = {" alpha"};
  r.preferences = {"Thai", "MUSEUM"};
  const auto once = decompose_query(r, d, agent);
  EXPECT_EQ(decompose_query(once.to_request(), d, agent), once);
}

TEST(Request, JsonRoundTrip) {
  auto r = simple_request();
  r.hard.room_rule_needs = {RoomNeed::pets, RoomNeed::smoking};
  r.hard.room_type = RoomType::private_room;
  r.hard.cuisines = {"thai"};
  r.hard.transport_bans = {TransportMode::flight};
  r.preferences = {"museum"};
  r.raw_text = "hello";
  EXPECT_EQ(request_from_json(to_json(r)), r);
}

TEST(Request, JsonErrorsAreValidationErrors) {
  EXPECT_THROW(request_from_json(nlohmann::json::array()), ValidationError);
  auto j = to_json(simple_request());
  j.erase("origin");
  EXPECT_THROW(request_from_json(j), ValidationError);
  j = to_json(simple_request());
  j["dates"] = {"2024-02-30"};
  EXPECT_THROW(request_from_json(j), ValidationError);
  j = to_json(simple_request());
  j["hard"]["transport_bans"] = {"rocket"};
  EXPECT_THROW(request_from_json(j), ValidationError);
  j = to_json(simple_request());
  j["party_size"] = "two";
  EXPECT_THROW(request_from_json(j), ValidationError);
}
