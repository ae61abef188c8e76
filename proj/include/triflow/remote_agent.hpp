#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "triflow/agent.hpp"

namespace triflow {

struct RemoteEndpoint {
  std::string url;  // http://host[:port]/path
  std::string token;
  std::chrono::milliseconds timeout{30000};
  int retries = 2;

  static RemoteEndpoint from_environment() {
    RemoteEndpoint e;
    if (const char* u = std::getenv("TRIFLOW_AGENT_URL")) e.url = u;
    if (const char* t = std::getenv("TRIFLOW_AGENT_TOKEN")) e.token = t;
    return e;
  }
};

// Splits "http://host:port/path" into the client base and the request path.
inline std::optional<std::pair<std::string, std::string>> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) return std::nullopt;
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return std::make_pair(url, std::string("/"));
  return std::make_pair(url.substr(0, slash), url.substr(slash));
}

inline nlohmann::json agent_request_body(const StageRole& role, std::string_view context,
                                         std::span<const std::string> candidates) {
  return nlohmann::json{{"role", std::string(to_string(role.stage))},
                        {"temperature", role.temperature},
                        {"context", std::string(context)},
                        {"candidates", std::vector<std::string>(candidates.begin(), candidates.end())}};
}

// Parses {choice_index, rationale}; nullopt on any malformed reply.
inline std::optional<Suggestion> parse_agent_reply(const std::string& body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  auto idx = j.find("choice_index");
  if (idx == j.end() || !idx->is_number_integer() || idx->get<long long>() < 0) return std::nullopt;
  Suggestion s;
  s.choice = static_cast<std::size_t>(idx->get<long long>());
  if (auto r = j.find("rationale"); r != j.end() && r->is_string()) s.rationale = r->get<std::string>();
  if (auto c = j.find("confidence"); c != j.end() && c->is_number()) s.confidence = c->get<double>();
  return s;
}

// HTTP backend. Any transport or parse failure falls back to the mock answer.
class RemoteAgent : public Agent {
 public:
  explicit RemoteAgent(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

  int fallbacks() const { return fallbacks_.load(std::memory_order_relaxed); }

 protected:
  Suggestion do_suggest(const StageRole& role, std::string_view context, std::span<const std::string> candidates,
                        std::uint64_t seed) override {
    if (auto s = ask(role, context, candidates)) return *s;
    fallbacks_.fetch_add(1, std::memory_order_relaxed);
    std::clog << "triflow: remote agent unavailable, using mock answer for '" << context << "'\n";
    return mock_suggest(role, context, candidates.size(), seed);
  }

 private:
  std::optional<Suggestion> ask(const StageRole& role, std::string_view context,
                                std::span<const std::string> candidates) const {
    const auto parts = split_url(endpoint_.url);
    if (!parts) return std::nullopt;
    httplib::Client client(parts->first);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    if (!endpoint_.token.empty()) client.set_bearer_token_auth(endpoint_.token);
    const std::string body = agent_request_body(role, context, candidates).dump();
    for (int attempt = 0; attempt <= endpoint_.retries; ++attempt) {
      auto res = client.Post(parts->second, body, "application/json");
      if (!res || res->status != 200) continue;
      if (auto s = parse_agent_reply(res->body)) return s;
    }
    return std::nullopt;
  }

  RemoteEndpoint endpoint_;
  std::atomic<int> fallbacks_{0};
};

}  // namespace triflow
