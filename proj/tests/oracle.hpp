#pragma once

// Brute-force restatement of the 13 constraint definitions, written against the
// raw tables with linear scans. Shares no code with the library checkers.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "triflow/triflow.hpp"

namespace oracle {

using namespace triflow;

struct Verdicts {
  std::map<std::string, bool> passed;  // applicable constraints only
};

inline const Accommodation* acc(const SandboxTables& t, const PlaceRef& p) {
  for (const auto& a : t.accommodations)
    if (a.name == p.name && a.city == p.city) return &a;
  return nullptr;
}

inline const Restaurant* rest(const SandboxTables& t, const PlaceRef& p) {
  for (const auto& r : t.restaurants)
    if (r.name == p.name && r.city == p.city) return &r;
  return nullptr;
}

inline bool attraction_exists(const SandboxTables& t, const PlaceRef& p) {
  for (const auto& a : t.attractions)
    if (a.name == p.name && a.city == p.city) return true;
  return false;
}

inline const DistanceEntry* road(const SandboxTables& t, const std::string& a, const std::string& b) {
  for (const auto& e : t.distances)
    if (e.origin == a && e.destination == b) return &e;
  return nullptr;
}

inline std::vector<PlaceRef> meals_of(const DayPlan& d) {
  std::vector<PlaceRef> out;
  if (d.breakfast) out.push_back(*d.breakfast);
  if (d.lunch) out.push_back(*d.lunch);
  if (d.dinner) out.push_back(*d.dinner);
  return out;
}

inline long long total_cost(const Itinerary& it, const StructuredQuery& q, const SandboxTables& t) {
  long long sum = 0;
  const long long party = q.party_size;
  for (const auto& d : it.days) {
    if (d.transport) {
      const auto& leg = *d.transport;
      if (leg.mode == TransportMode::flight) {
        for (const auto& f : t.flights)
          if (f.id == leg.flight_id) {
            sum += f.price * party;
            break;
          }
      } else if (const auto* e = road(t, leg.origin, leg.destination)) {
        if (leg.mode == TransportMode::taxi)
          sum += e->taxi_cost * party;
        else
          sum += e->self_drive_cost * ((party + 4) / 5);
      }
    }
    if (d.accommodation)
      if (const auto* a = acc(t, *d.accommodation)) sum += a->price_per_night * ((party + a->max_occupancy - 1) / a->max_occupancy);
    for (const auto& m : meals_of(d))
      if (const auto* r = rest(t, m)) sum += r->avg_cost * party;
  }
  return sum;
}

inline bool within_sandbox(const Itinerary& it, const SandboxTables& t) {
  for (const auto& d : it.days) {
    if (d.transport) {
      const auto& leg = *d.transport;
      if (leg.mode == TransportMode::flight) {
        bool found = false;
        for (const auto& f : t.flights)
          found = found || (f.id == leg.flight_id && f.origin == leg.origin && f.destination == leg.destination &&
                            f.date == d.date);
        if (!found) return false;
      } else if (!road(t, leg.origin, leg.destination)) {
        return false;
      }
    }
    for (const auto& m : meals_of(d))
      if (!rest(t, m)) return false;
    for (const auto& a : d.attractions)
      if (!attraction_exists(t, a)) return false;
    if (d.accommodation && !acc(t, *d.accommodation)) return false;
  }
  return true;
}

inline bool complete_information(const Itinerary& it, const StructuredQuery& q) {
  if (static_cast<int>(it.days.size()) != q.days()) return false;
  for (std::size_t i = 0; i < it.days.size(); ++i) {
    const auto& d = it.days[i];
    if (d.to_city && !d.transport) return false;
    if (meals_of(d).size() != 3) return false;
    if (d.attractions.empty()) return false;
    if (i + 1 < it.days.size() && !d.accommodation) return false;
  }
  return true;
}

inline bool within_current_city(const Itinerary& it) {
  for (const auto& d : it.days) {
    std::set<std::string> here{d.city};
    if (d.to_city) here.insert(*d.to_city);
    for (const auto& m : meals_of(d))
      if (!here.count(m.city)) return false;
    for (const auto& a : d.attractions)
      if (!here.count(a.city)) return false;
    const std::string sleep = d.to_city ? *d.to_city : d.city;
    if (d.accommodation && d.accommodation->city != sleep) return false;
  }
  return true;
}

inline bool reasonable_city_route(const Itinerary& it, const StructuredQuery& q) {
  const auto& days = it.days;
  if (days.empty()) return false;
  if (!days.front().to_city || days.front().city != q.origin) return false;
  if (!days.back().to_city || *days.back().to_city != q.origin) return false;
  std::vector<std::string> visits;
  for (std::size_t i = 0; i < days.size(); ++i) {
    const auto& d = days[i];
    if (i > 0) {
      const auto& p = days[i - 1];
      if (d.city != (p.to_city ? *p.to_city : p.city)) return false;
    }
    if (d.to_city) {
      if (*d.to_city == d.city) return false;
      if (i + 1 < days.size()) {
        if (*d.to_city == q.origin) return false;
        visits.push_back(*d.to_city);
      }
    }
    if (d.transport) {
      if (!d.to_city) return false;
      if (d.transport->origin != d.city || d.transport->destination != *d.to_city) return false;
    }
  }
  std::set<std::string> distinct(visits.begin(), visits.end());
  if (distinct.size() != visits.size()) return false;
  for (const auto& c : q.destinations)
    if (!distinct.count(c)) return false;
  return true;
}

template <typename Get>
bool no_duplicates(const Itinerary& it, Get get) {
  std::vector<PlaceRef> all;
  for (const auto& d : it.days)
    for (const auto& p : get(d)) all.push_back(p);
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      if (all[i].name == all[j].name && all[i].city == all[j].city) return false;
  return true;
}

inline bool non_conflicting(const Itinerary& it) {
  bool fly = false, drive = false;
  for (const auto& d : it.days)
    if (d.transport) {
      fly |= d.transport->mode == TransportMode::flight;
      drive |= d.transport->mode == TransportMode::self_drive;
    }
  return !(fly && drive);
}

inline bool minimum_nights(const Itinerary& it, const SandboxTables& t) {
  const auto& days = it.days;
  for (std::size_t i = 0; i < days.size(); ++i) {
    if (!days[i].accommodation) continue;
    if (i > 0 && days[i - 1].accommodation == days[i].accommodation) continue;  // not the start of a run
    std::size_t run = 1;
    while (i + run < days.size() && days[i + run].accommodation == days[i].accommodation) ++run;
    const auto* a = acc(t, *days[i].accommodation);
    if (a && static_cast<int>(run) < a->minimum_nights) return false;
  }
  return true;
}

inline bool room_rule(const Itinerary& it, const StructuredQuery& q, const SandboxTables& t) {
  for (const auto& d : it.days) {
    if (!d.accommodation) continue;
    const auto* a = acc(t, *d.accommodation);
    if (!a) continue;
    for (auto need : q.hard.room_rule_needs) {
      const HouseRule rule = need == RoomNeed::smoking      ? HouseRule::no_smoking
                             : need == RoomNeed::parties    ? HouseRule::no_parties
                             : need == RoomNeed::children_under_10 ? HouseRule::no_children_under_10
                             : need == RoomNeed::pets       ? HouseRule::no_pets
                                                            : HouseRule::no_visitors;
      if (a->house_rules.count(rule)) return false;
    }
  }
  return true;
}

inline bool cuisine(const Itinerary& it, const StructuredQuery& q, const SandboxTables& t) {
  std::set<std::string> got;
  for (const auto& d : it.days)
    for (const auto& m : meals_of(d))
      if (const auto* r = rest(t, m))
        for (const auto& c : r->cuisines) got.insert(to_lower(c));
  for (const auto& c : q.hard.cuisines)
    if (!got.count(c)) return false;
  return true;
}

inline bool room_type(const Itinerary& it, const StructuredQuery& q, const SandboxTables& t) {
  for (const auto& d : it.days)
    if (d.accommodation)
      if (const auto* a = acc(t, *d.accommodation); a && a->room_type != *q.hard.room_type) return false;
  return true;
}

inline bool transportation(const Itinerary& it, const StructuredQuery& q) {
  for (const auto& d : it.days)
    if (d.transport && q.hard.transport_bans.count(d.transport->mode)) return false;
  return true;
}

inline Verdicts check_all(const Itinerary& it, const StructuredQuery& q, const SandboxTables& t) {
  Verdicts v;
  auto& p = v.passed;
  p["within_sandbox"] = within_sandbox(it, t);
  p["complete_information"] = complete_information(it, q);
  p["within_current_city"] = within_current_city(it);
  p["reasonable_city_route"] = reasonable_city_route(it, q);
  p["diverse_restaurants"] = no_duplicates(it, [](const DayPlan& d) { return meals_of(d); });
  p["diverse_attractions"] = no_duplicates(it, [](const DayPlan& d) { return d.attractions; });
  p["non_conflicting_transportation"] = non_conflicting(it);
  p["minimum_nights_stay"] = minimum_nights(it, t);
  p["budget"] = total_cost(it, q, t) <= q.budget;
  if (!q.hard.room_rule_needs.empty()) p["room_rule"] = room_rule(it, q, t);
  if (!q.hard.cuisines.empty()) p["cuisine"] = cuisine(it, q, t);
  if (q.hard.room_type) p["room_type"] = room_type(it, q, t);
  if (!q.hard.transport_bans.empty()) p["transportation"] = transportation(it, q);
  return v;
}

struct Agreement {
  std::size_t plans = 0;
  std::size_t checks = 0;
  std::size_t mismatches = 0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> pass_fail;  // name -> (passes, fails) seen
  std::string first_mismatch;
};

// Runs the library checkers and the oracle over the whole micro plan space.
template <typename MakePlan>
Agreement compare_space(const SandboxTables& tables, const std::vector<StructuredQuery>& queries, unsigned n_plans,
                        MakePlan make_plan) {
  Agreement a;
  const SandboxDataset d(tables);
  for (const auto& q : queries) {
    const auto s = [&] {
      RetrievedSubset sub;
      for (const auto& c : d.cities()) sub.cities.emplace(c.name, c);
      for (const auto& f : d.flights()) sub.flights_by_leg[FlightLegKey{f.origin, f.destination, f.date}].push_back(f);
      for (const auto& e : d.distances()) sub.ground_by_leg.emplace(LegKey{e.origin, e.destination}, e);
      for (const auto& x : d.accommodations()) sub.accommodations_by_city[x.city].push_back(x);
      for (const auto& x : d.restaurants()) sub.restaurants_by_city[x.city].push_back(x);
      for (const auto& x : d.attractions()) sub.attractions_by_city[x.city].push_back(x);
      return sub;
    }();
    for (unsigned bits = 0; bits < n_plans; ++bits) {
      const auto it = make_plan(bits);
      const auto lib = triflow::check_all(it, q, s, d);
      const auto ref = check_all(it, q, tables);
      ++a.plans;
      if (lib.results.size() != ref.passed.size()) {
        ++a.mismatches;
        if (a.first_mismatch.empty()) a.first_mismatch = "applicable set differs on plan " + std::to_string(bits);
      }
      for (const auto& r : lib.results) {
        ++a.checks;
        auto f = ref.passed.find(r.id.name);
        const bool agree = f != ref.passed.end() && f->second == r.passed;
        if (!agree) {
          ++a.mismatches;
          if (a.first_mismatch.empty())
            a.first_mismatch = r.id.name + " disagrees on plan " + std::to_string(bits);
        }
        auto& pf = a.pass_fail[r.id.name];
        (r.passed ? pf.first : pf.second)++;
      }
    }
  }
  return a;
}

}  // namespace oracle
