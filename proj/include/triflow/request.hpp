#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "triflow/agent.hpp"
#include "triflow/date.hpp"
#include "triflow/error.hpp"
#include "triflow/sandbox.hpp"
#include "triflow/types.hpp"

namespace triflow {

struct HardConstraintSet {
  std::set<RoomNeed> room_rule_needs;
  std::optional<RoomType> room_type;
  std::set<std::string> cuisines;
  std::set<TransportMode> transport_bans;  // flight and/or self_drive

  bool operator==(const HardConstraintSet&) const = default;
};

struct UserRequest {
  std::string origin;
  std::vector<std::string> destination_cities;
  std::vector<Date> dates;
  int party_size = 1;
  Cents budget = 0;
  HardConstraintSet hard;
  std::vector<std::string> preferences;
  std::optional<std::string> raw_text;

  bool operator==(const UserRequest&) const = default;
};

enum class Tier { easy, medium, hard };

inline std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::easy: return "easy";
    case Tier::medium: return "medium";
    case Tier::hard: return "hard";
  }
  return "?";
}

// Normalized request: canonical city names, lowercased deduplicated tags.
struct StructuredQuery {
  std::string origin;
  std::vector<std::string> destinations;
  std::vector<Date> dates;
  int party_size = 1;
  Cents budget = 0;
  HardConstraintSet hard;
  std::vector<std::string> preferences;
  std::optional<std::string> raw_text;

  int days() const { return static_cast<int>(dates.size()); }
  int n_city_transitions() const { return static_cast<int>(destinations.size()) + 1; }
  Tier tier() const { return days() <= 3 ? Tier::easy : (days() <= 5 ? Tier::medium : Tier::hard); }
  bool allows(TransportMode m) const { return !hard.transport_bans.count(m); }

  UserRequest to_request() const {
    return UserRequest{origin, destinations, dates, party_size, budget, hard, preferences, raw_text};
  }

  bool operator==(const StructuredQuery&) const = default;
};

inline std::string city_match_key(std::string_view name) {
  std::string k;
  for (char c : name)
    if (!std::isspace(static_cast<unsigned char>(c))) k.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return k;
}

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// Case- and whitespace-insensitive match against the sandbox city table.
inline std::string canonical_city(std::string_view name, const SandboxDataset& d) {
  const auto key = city_match_key(name);
  for (const auto& c : d.cities())
    if (city_match_key(c.name) == key) return c.name;

  std::vector<std::pair<std::size_t, std::string>> ranked;
  for (const auto& c : d.cities()) ranked.emplace_back(edit_distance(key, city_match_key(c.name)), c.name);
  std::sort(ranked.begin(), ranked.end());
  std::vector<std::string> nearest;
  for (std::size_t i = 0; i < ranked.size() && i < 3; ++i) nearest.push_back(ranked[i].second);
  throw ResolutionError(std::string(name), std::move(nearest));
}

inline std::vector<std::string> normalize_tags(const std::vector<std::string>& tags) {
  std::vector<std::string> out;
  for (const auto& t : tags) {
    auto n = to_lower(trim(t));
    if (!n.empty() && std::find(out.begin(), out.end(), n) == out.end()) out.push_back(std::move(n));
  }
  return out;
}

// Query decomposition: resolve cities, validate dates, normalize tags. Free
// text only ever contributes preference tags, and only when none are given.
inline StructuredQuery decompose_query(const UserRequest& r, const SandboxDataset& d, Agent& agent) {
  StructuredQuery q;
  q.origin = canonical_city(r.origin, d);
  if (r.destination_cities.empty() || r.destination_cities.size() > 3)
    throw ValidationError("a request needs 1 to 3 destination cities");
  for (const auto& name : r.destination_cities) {
    auto c = canonical_city(name, d);
    if (c == q.origin) throw ValidationError("destination '" + c + "' equals the origin");
    if (std::find(q.destinations.begin(), q.destinations.end(), c) != q.destinations.end())
      throw ValidationError("destination '" + c + "' listed twice");
    q.destinations.push_back(std::move(c));
  }

  const auto n = r.dates.size();
  if (n != 3 && n != 5 && n != 7) throw ValidationError("trip length must be 3, 5 or 7 days, got " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!r.dates[i].valid()) throw ValidationError("invalid date in request");
    if (i > 0 && r.dates[i - 1].days_until(r.dates[i]) != 1) throw ValidationError("dates must be consecutive");
  }
  if (q.destinations.size() > n - 1)
    throw ValidationError("every destination needs at least one night: too many cities for " + std::to_string(n) +
                          " days");
  q.dates = r.dates;

  if (r.party_size < 1) throw ValidationError("party_size must be >= 1");
  if (r.budget < 0) throw ValidationError("budget must be >= 0");
  q.party_size = r.party_size;
  q.budget = r.budget;

  if (r.hard.transport_bans.count(TransportMode::taxi)) throw ValidationError("taxi cannot be banned");
  q.hard = r.hard;
  std::set<std::string> cuisines;
  for (const auto& c : r.hard.cuisines) {
    auto n2 = to_lower(trim(c));
    if (!n2.empty()) cuisines.insert(std::move(n2));
  }
  q.hard.cuisines = std::move(cuisines);

  q.preferences = normalize_tags(r.preferences);
  q.raw_text = r.raw_text;
  if (q.preferences.empty() && r.raw_text && !r.raw_text->empty())
    q.preferences = normalize_tags(agent.extract_tags(*r.raw_text));
  return q;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const HardConstraintSet& h) {
  nlohmann::json j;
  j["room_rule_needs"] = nlohmann::json::array();
  for (auto n : h.room_rule_needs) j["room_rule_needs"].push_back(std::string(to_string(n)));
  j["room_type"] = h.room_type ? nlohmann::json(std::string(to_string(*h.room_type))) : nlohmann::json(nullptr);
  j["cuisines"] = h.cuisines;
  j["transport_bans"] = nlohmann::json::array();
  for (auto m : h.transport_bans) j["transport_bans"].push_back(std::string(to_string(m)));
  return j;
}

inline nlohmann::json to_json(const UserRequest& r) {
  nlohmann::json j;
  j["origin"] = r.origin;
  j["destination_cities"] = r.destination_cities;
  j["dates"] = nlohmann::json::array();
  for (const auto& d : r.dates) j["dates"].push_back(d.to_string());
  j["party_size"] = r.party_size;
  j["budget"] = r.budget;
  j["hard"] = to_json(r.hard);
  j["preferences"] = r.preferences;
  j["raw_text"] = r.raw_text ? nlohmann::json(*r.raw_text) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const StructuredQuery& q) { return to_json(q.to_request()); }

namespace request_detail {

template <typename T>
T get(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("request is missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(std::string("request field '") + key + "' has the wrong type");
  }
}

template <typename E, typename Parse>
std::set<E> enum_set(const nlohmann::json& j, const char* key, Parse&& parse) {
  std::set<E> out;
  if (!j.contains(key) || j.at(key).is_null()) return out;
  for (const auto& s : get<std::vector<std::string>>(j, key)) {
    auto v = parse(s);
    if (!v) throw ValidationError(std::string("unknown value '") + s + "' in '" + key + "'");
    out.insert(*v);
  }
  return out;
}

}  // namespace request_detail

inline UserRequest request_from_json(const nlohmann::json& j) {
  using request_detail::get;
  if (!j.is_object()) throw ValidationError("request must be a JSON object");
  UserRequest r;
  r.origin = get<std::string>(j, "origin");
  r.destination_cities = get<std::vector<std::string>>(j, "destination_cities");
  for (const auto& s : get<std::vector<std::string>>(j, "dates")) {
    auto d = Date::parse(s);
    if (!d) throw ValidationError("invalid date '" + s + "'");
    r.dates.push_back(*d);
  }
  r.party_size = get<int>(j, "party_size");
  r.budget = get<Cents>(j, "budget");
  if (j.contains("hard") && !j.at("hard").is_null()) {
    const auto& h = j.at("hard");
    if (!h.is_object()) throw ValidationError("'hard' must be an object");
    r.hard.room_rule_needs = request_detail::enum_set<RoomNeed>(h, "room_rule_needs", parse_room_need);
    if (h.contains("room_type") && !h.at("room_type").is_null()) {
      auto rt = parse_room_type(get<std::string>(h, "room_type"));
      if (!rt) throw ValidationError("unknown room_type");
      r.hard.room_type = *rt;
    }
    if (h.contains("cuisines") && !h.at("cuisines").is_null()) {
      auto cs = get<std::vector<std::string>>(h, "cuisines");
      r.hard.cuisines = std::set<std::string>(cs.begin(), cs.end());
    }
    r.hard.transport_bans = request_detail::enum_set<TransportMode>(h, "transport_bans", parse_transport_mode);
  }
  if (j.contains("preferences") && !j.at("preferences").is_null())
    r.preferences = get<std::vector<std::string>>(j, "preferences");
  if (j.contains("raw_text") && !j.at("raw_text").is_null()) r.raw_text = get<std::string>(j, "raw_text");
  return r;
}

}  // namespace triflow
