#pragma once

#include <algorithm>
#include <compare>
#include <future>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "triflow/error.hpp"
#include "triflow/request.hpp"
#include "triflow/sandbox.hpp"

namespace triflow {

struct LegKey {
  std::string origin;
  std::string destination;
  auto operator<=>(const LegKey&) const = default;
};

struct FlightLegKey {
  std::string origin;
  std::string destination;
  Date date;
  auto operator<=>(const FlightLegKey&) const = default;
};

// Task-specific slice of the sandbox. Every record is a verbatim copy of a
// dataset record; buckets are in ranking order (price ascending, then name).
struct RetrievedSubset {
  std::map<std::string, City> cities;  // origin and destinations
  std::map<FlightLegKey, std::vector<Flight>> flights_by_leg;
  std::map<LegKey, DistanceEntry> ground_by_leg;
  std::map<std::string, std::vector<Accommodation>> accommodations_by_city;
  std::map<std::string, std::vector<Restaurant>> restaurants_by_city;
  std::map<std::string, std::vector<Attraction>> attractions_by_city;
  std::set<TransportMode> allowed_modes{TransportMode::flight, TransportMode::taxi, TransportMode::self_drive};
  std::map<std::string, std::string> provenance;  // record key -> retrieval module

  bool operator==(const RetrievedSubset&) const = default;

  const Flight* find_flight(std::string_view id) const {
    for (const auto& [k, v] : flights_by_leg)
      for (const auto& f : v)
        if (f.id == id) return &f;
    return nullptr;
  }
  const DistanceEntry* find_ground(const std::string& origin, const std::string& destination) const {
    auto it = ground_by_leg.find(LegKey{origin, destination});
    return it == ground_by_leg.end() ? nullptr : &it->second;
  }
  const Accommodation* find_accommodation(std::string_view name, const std::string& city) const {
    return find_in(accommodations_by_city, name, city);
  }
  const Restaurant* find_restaurant(std::string_view name, const std::string& city) const {
    return find_in(restaurants_by_city, name, city);
  }
  const Attraction* find_attraction(std::string_view name, const std::string& city) const {
    return find_in(attractions_by_city, name, city);
  }

  std::size_t record_count() const {
    std::size_t n = cities.size() + ground_by_leg.size();
    for (const auto& [k, v] : flights_by_leg) n += v.size();
    for (const auto& [k, v] : accommodations_by_city) n += v.size();
    for (const auto& [k, v] : restaurants_by_city) n += v.size();
    for (const auto& [k, v] : attractions_by_city) n += v.size();
    return n;
  }

 private:
  template <typename Map>
  static const typename Map::mapped_type::value_type* find_in(const Map& m, std::string_view name,
                                                              const std::string& city) {
    auto it = m.find(city);
    if (it == m.end()) return nullptr;
    for (const auto& r : it->second)
      if (r.name == name) return &r;
    return nullptr;
  }
};

// Raised when a mandatory slot class has no candidates. Carries the partial
// subset so the caller can still plan best-effort.
class InfeasibleRetrieval : public Error {
 public:
  InfeasibleRetrieval(std::vector<std::string> slots, RetrievedSubset subset)
      : Error(make_message(slots)), slots_(std::move(slots)), subset_(std::move(subset)) {}

  const std::vector<std::string>& slots() const { return slots_; }
  const RetrievedSubset& subset() const { return subset_; }

 private:
  static std::string make_message(const std::vector<std::string>& slots) {
    std::string m = "empty candidate pool for:";
    for (const auto& s : slots) m += " " + s;
    return m;
  }
  std::vector<std::string> slots_;
  RetrievedSubset subset_;
};

struct RetrievalOptions {
  std::size_t cap = 20;  // per slot class per city/leg; 0 = unlimited
  bool parallel = false;
};

namespace retrieval {

inline constexpr const char* module_order[] = {"flights", "distances", "accommodations", "restaurants",
                                               "attractions"};

inline std::string flight_key(const Flight& f) { return "flight:" + f.id; }
inline std::string ground_key(const DistanceEntry& e) { return "distance:" + e.origin + "->" + e.destination; }
inline std::string accommodation_key(const Accommodation& a) { return "accommodation:" + a.name + "@" + a.city; }
inline std::string restaurant_key(const Restaurant& r) { return "restaurant:" + r.name + "@" + r.city; }
inline std::string attraction_key(const Attraction& a) { return "attraction:" + a.name + "@" + a.city; }

// Ordered city pairs that some visiting order could use.
inline std::vector<LegKey> candidate_legs(const StructuredQuery& q) {
  std::vector<LegKey> legs;
  for (const auto& x : q.destinations) {
    legs.push_back({q.origin, x});
    legs.push_back({x, q.origin});
    for (const auto& y : q.destinations)
      if (x != y) legs.push_back({x, y});
  }
  std::sort(legs.begin(), legs.end());
  legs.erase(std::unique(legs.begin(), legs.end()), legs.end());
  return legs;
}

template <typename T, typename Price, typename Name>
void rank_and_cap(std::vector<T>& v, std::size_t cap, Price&& price, Name&& name) {
  std::stable_sort(v.begin(), v.end(), [&](const T& a, const T& b) {
    if (price(a) != price(b)) return price(a) < price(b);
    return name(a) < name(b);
  });
  if (cap != 0 && v.size() > cap) v.resize(cap);
}

inline bool accommodation_matches(const Accommodation& a, const StructuredQuery& q) {
  if (q.hard.room_type && a.room_type != *q.hard.room_type) return false;
  for (auto need : q.hard.room_rule_needs)
    if (a.house_rules.count(forbidding_rule(need))) return false;
  return true;
}

inline bool serves(const Restaurant& r, const std::string& cuisine) {
  for (const auto& c : r.cuisines)
    if (to_lower(c) == cuisine) return true;
  return false;
}

inline RetrievedSubset fetch_flights(const StructuredQuery& q, const SandboxDataset& d, std::size_t cap) {
  RetrievedSubset s;
  if (!q.allows(TransportMode::flight)) return s;
  const auto legs = candidate_legs(q);
  const std::set<LegKey> leg_set(legs.begin(), legs.end());
  const std::set<Date> dates(q.dates.begin(), q.dates.end());
  for (const auto& f : d.flights())
    if (leg_set.count(LegKey{f.origin, f.destination}) && dates.count(f.date))
      s.flights_by_leg[FlightLegKey{f.origin, f.destination, f.date}].push_back(f);
  for (auto& [k, v] : s.flights_by_leg) {
    rank_and_cap(v, cap, [](const Flight& f) { return f.price; }, [](const Flight& f) { return f.id; });
    for (const auto& f : v) s.provenance[flight_key(f)] = "flights";
  }
  return s;
}

inline RetrievedSubset fetch_distances(const StructuredQuery& q, const SandboxDataset& d) {
  RetrievedSubset s;
  for (const auto& leg : candidate_legs(q)) {
    if (const auto* e = d.find_distance(leg.origin, leg.destination)) {
      s.ground_by_leg.emplace(leg, *e);
      s.provenance[ground_key(*e)] = "distances";
    }
  }
  return s;
}

inline RetrievedSubset fetch_accommodations(const StructuredQuery& q, const SandboxDataset& d, std::size_t cap) {
  RetrievedSubset s;
  const std::set<std::string> cities(q.destinations.begin(), q.destinations.end());
  for (const auto& a : d.accommodations())
    if (cities.count(a.city) && accommodation_matches(a, q)) s.accommodations_by_city[a.city].push_back(a);
  for (auto& [city, v] : s.accommodations_by_city) {
    rank_and_cap(v, cap, [](const Accommodation& a) { return a.price_per_night; },
                 [](const Accommodation& a) { return a.name; });
    for (const auto& a : v) s.provenance[accommodation_key(a)] = "accommodations";
  }
  return s;
}

// Each requested cuisine keeps at least one candidate per city when the city has one.
inline RetrievedSubset fetch_restaurants(const StructuredQuery& q, const SandboxDataset& d, std::size_t cap) {
  RetrievedSubset s;
  const std::set<std::string> cities(q.destinations.begin(), q.destinations.end());
  std::map<std::string, std::vector<Restaurant>> all;
  for (const auto& r : d.restaurants())
    if (cities.count(r.city)) all[r.city].push_back(r);
  auto price = [](const Restaurant& r) { return r.avg_cost; };
  auto name = [](const Restaurant& r) { return r.name; };
  for (auto& [city, pool] : all) {
    auto kept = pool;
    rank_and_cap(kept, cap, price, name);
    for (const auto& cuisine : q.hard.cuisines) {
      const bool covered = std::any_of(kept.begin(), kept.end(), [&](const Restaurant& r) { return serves(r, cuisine); });
      if (covered) continue;
      const Restaurant* best = nullptr;
      for (const auto& r : pool)
        if (serves(r, cuisine) && (!best || price(r) < price(*best) || (price(r) == price(*best) && r.name < best->name)))
          best = &r;
      if (best) kept.push_back(*best);
    }
    rank_and_cap(kept, 0, price, name);
    for (const auto& r : kept) s.provenance[restaurant_key(r)] = "restaurants";
    s.restaurants_by_city[city] = std::move(kept);
  }
  return s;
}

inline RetrievedSubset fetch_attractions(const StructuredQuery& q, const SandboxDataset& d, std::size_t cap) {
  RetrievedSubset s;
  const std::set<std::string> cities(q.destinations.begin(), q.destinations.end());
  for (const auto& a : d.attractions())
    if (cities.count(a.city)) s.attractions_by_city[a.city].push_back(a);
  for (auto& [city, v] : s.attractions_by_city) {
    rank_and_cap(v, cap, [](const Attraction&) { return 0; }, [](const Attraction& a) { return a.name; });
    for (const auto& a : v) s.provenance[attraction_key(a)] = "attractions";
  }
  return s;
}

template <typename K, typename V>
void append_buckets(std::map<K, std::vector<V>>& into, const std::map<K, std::vector<V>>& from) {
  for (const auto& [k, v] : from) {
    auto& dst = into[k];
    dst.insert(dst.end(), v.begin(), v.end());
  }
}

// Deterministic merge in fixed module order.
inline RetrievedSubset merge(const std::vector<RetrievedSubset>& parts) {
  RetrievedSubset out;
  for (const auto& p : parts) {
    append_buckets(out.flights_by_leg, p.flights_by_leg);
    for (const auto& [k, v] : p.ground_by_leg) out.ground_by_leg.emplace(k, v);
    append_buckets(out.accommodations_by_city, p.accommodations_by_city);
    append_buckets(out.restaurants_by_city, p.restaurants_by_city);
    append_buckets(out.attractions_by_city, p.attractions_by_city);
    for (const auto& [k, v] : p.provenance) out.provenance.emplace(k, v);
  }
  return out;
}

template <typename T, typename KeyFn, typename Verify>
void dedupe_bucket(std::vector<T>& v, KeyFn&& key, Verify&& verify) {
  std::set<std::string> seen;
  std::vector<T> out;
  for (auto& r : v) {
    if (!seen.insert(key(r)).second) continue;
    verify(r);
    if (integrity::record_clean(r)) out.push_back(std::move(r));
  }
  v = std::move(out);
}

}  // namespace retrieval

// Removes duplicate primary keys (first wins), proves every record exists
// verbatim in `d`, and drops records that fail the integrity predicates.
inline RetrievedSubset dedupe_and_validate(RetrievedSubset s, const SandboxDataset& d) {
  using namespace retrieval;
  auto fabricated = [](const std::string& key) {
    return ProvenanceError("retrieved record " + key + " does not exist in the sandbox");
  };

  for (auto& [name, city] : s.cities) {
    const auto* c = d.find_city(name);
    if (!c || !(*c == city) || city.name != name) throw fabricated("city:" + name);
  }
  for (auto& [leg, v] : s.flights_by_leg)
    dedupe_bucket(v, flight_key, [&](const Flight& f) {
      const auto* ref = d.find_flight(f.id);
      if (!ref || !(*ref == f) || f.origin != leg.origin || f.destination != leg.destination || f.date != leg.date)
        throw fabricated(flight_key(f));
    });
  for (auto it = s.ground_by_leg.begin(); it != s.ground_by_leg.end();) {
    const auto* ref = d.find_distance(it->second.origin, it->second.destination);
    if (!ref || !(*ref == it->second) || it->first.origin != ref->origin || it->first.destination != ref->destination)
      throw fabricated(ground_key(it->second));
    it = integrity::record_clean(it->second) ? std::next(it) : s.ground_by_leg.erase(it);
  }
  for (auto& [city, v] : s.accommodations_by_city)
    dedupe_bucket(v, accommodation_key, [&](const Accommodation& a) {
      const auto* ref = d.find_accommodation(a.name, a.city);
      if (!ref || !(*ref == a) || a.city != city) throw fabricated(accommodation_key(a));
    });
  for (auto& [city, v] : s.restaurants_by_city)
    dedupe_bucket(v, restaurant_key, [&](const Restaurant& r) {
      const auto* ref = d.find_restaurant(r.name, r.city);
      if (!ref || !(*ref == r) || r.city != city) throw fabricated(restaurant_key(r));
    });
  for (auto& [city, v] : s.attractions_by_city)
    dedupe_bucket(v, attraction_key, [&](const Attraction& a) {
      const auto* ref = d.find_attraction(a.name, a.city);
      if (!ref || !(*ref == a) || a.city != city) throw fabricated(attraction_key(a));
    });
  std::erase_if(s.flights_by_leg, [](const auto& kv) { return kv.second.empty(); });

  std::set<std::string> live;
  for (const auto& [k, v] : s.flights_by_leg)
    for (const auto& f : v) live.insert(flight_key(f));
  for (const auto& [k, e] : s.ground_by_leg) live.insert(ground_key(e));
  for (const auto& [k, v] : s.accommodations_by_city)
    for (const auto& a : v) live.insert(accommodation_key(a));
  for (const auto& [k, v] : s.restaurants_by_city)
    for (const auto& r : v) live.insert(restaurant_key(r));
  for (const auto& [k, v] : s.attractions_by_city)
    for (const auto& a : v) live.insert(attraction_key(a));
  std::erase_if(s.provenance, [&](const auto& kv) { return !live.count(kv.first); });
  return s;
}

// Mandatory slot classes with no candidates: lodging, meals and attractions in
// every destination, plus an inbound and an outbound leg for every destination.
inline std::vector<std::string> missing_mandatory(const StructuredQuery& q, const RetrievedSubset& s) {
  std::vector<std::string> missing;
  auto empty = [](const auto& m, const std::string& city) {
    auto it = m.find(city);
    return it == m.end() || it->second.empty();
  };
  auto has_leg = [&](const std::string& from, const std::string& to) {
    if (s.find_ground(from, to)) return true;
    for (const auto& [k, v] : s.flights_by_leg)
      if (k.origin == from && k.destination == to && !v.empty()) return true;
    return false;
  };
  for (const auto& city : q.destinations) {
    if (empty(s.accommodations_by_city, city)) missing.push_back("accommodation:" + city);
    if (empty(s.restaurants_by_city, city)) missing.push_back("restaurant:" + city);
    if (empty(s.attractions_by_city, city)) missing.push_back("attraction:" + city);
    bool in = false, out = false;
    for (const auto& other : q.destinations) {
      if (other == city) continue;
      in = in || has_leg(other, city);
      out = out || has_leg(city, other);
    }
    in = in || has_leg(q.origin, city);
    out = out || has_leg(city, q.origin);
    if (!in) missing.push_back("transport:into:" + city);
    if (!out) missing.push_back("transport:out-of:" + city);
  }
  return missing;
}

// Runs the five retrieval modules and merges them. Never throws on infeasibility.
inline RetrievedSubset retrieve_subset_best_effort(const StructuredQuery& q, const SandboxDataset& d,
                                                   const RetrievalOptions& opts = {}) {
  using namespace retrieval;
  std::vector<RetrievedSubset> parts(5);
  if (opts.parallel) {
    auto f0 = std::async(std::launch::async, [&] { return fetch_flights(q, d, opts.cap); });
    auto f1 = std::async(std::launch::async, [&] { return fetch_distances(q, d); });
    auto f2 = std::async(std::launch::async, [&] { return fetch_accommodations(q, d, opts.cap); });
    auto f3 = std::async(std::launch::async, [&] { return fetch_restaurants(q, d, opts.cap); });
    auto f4 = std::async(std::launch::async, [&] { return fetch_attractions(q, d, opts.cap); });
    parts = {f0.get(), f1.get(), f2.get(), f3.get(), f4.get()};
  } else {
    parts = {fetch_flights(q, d, opts.cap), fetch_distances(q, d), fetch_accommodations(q, d, opts.cap),
             fetch_restaurants(q, d, opts.cap), fetch_attractions(q, d, opts.cap)};
  }
  RetrievedSubset merged = merge(parts);
  if (const auto* c = d.find_city(q.origin)) merged.cities.emplace(q.origin, *c);
  for (const auto& name : q.destinations)
    if (const auto* c = d.find_city(name)) merged.cities.emplace(name, *c);
  for (auto m : q.hard.transport_bans) merged.allowed_modes.erase(m);
  return dedupe_and_validate(std::move(merged), d);
}

inline RetrievedSubset retrieve_subset(const StructuredQuery& q, const SandboxDataset& d,
                                       const RetrievalOptions& opts = {}) {
  auto s = retrieve_subset_best_effort(q, d, opts);
  auto missing = missing_mandatory(q, s);
  if (!missing.empty()) throw InfeasibleRetrieval(std::move(missing), std::move(s));
  return s;
}

}  // namespace triflow
