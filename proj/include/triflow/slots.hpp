#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "triflow/arbitration.hpp"
#include "triflow/constraints.hpp"
#include "triflow/itinerary.hpp"
#include "triflow/request.hpp"
#include "triflow/retrieval.hpp"

namespace triflow {

// Consecutive nights spent in one city.
struct Stay {
  int first_day = 0;
  int nights = 0;
  std::string city;
  bool operator==(const Stay&) const = default;
};

inline std::vector<Stay> stays(const Itinerary& it) {
  std::vector<Stay> out;
  const int n = static_cast<int>(it.days.size());
  for (int i = 0; i + 1 < n; ++i) {
    const auto& city = it.days[static_cast<std::size_t>(i)].end_city();
    if (!out.empty() && out.back().city == city && out.back().first_day + out.back().nights == i)
      ++out.back().nights;
    else
      out.push_back(Stay{i, 1, city});
  }
  return out;
}

inline std::optional<Stay> stay_containing(const Itinerary& it, int day) {
  for (const auto& s : stays(it))
    if (day >= s.first_day && day < s.first_day + s.nights) return s;
  return std::nullopt;
}

// City hosting meals and sightseeing: the arrival city on a transition day,
// unless the arrival is the trip origin.
inline const std::string& activity_city(const DayPlan& day, const std::string& origin) {
  if (day.to_city && *day.to_city != origin) return *day.to_city;
  return day.city;
}

// Fixed fill order: transport, lodging, meals (chronological), attractions (chronological).
inline std::vector<SlotId> fill_order(const Itinerary& it) {
  std::vector<SlotId> order;
  for (const auto& d : it.days)
    if (d.is_transition()) order.push_back({SlotKind::transport, d.day_index, 0});
  for (const auto& s : stays(it)) order.push_back({SlotKind::accommodation, s.first_day, 0});
  for (const auto& d : it.days)
    for (int m = 0; m < 3; ++m) order.push_back({meal_kind(m), d.day_index, 0});
  for (const auto& d : it.days) order.push_back({SlotKind::attraction, d.day_index, 0});
  return order;
}

inline std::optional<SlotValue> get_slot(const Itinerary& it, const SlotId& slot) {
  if (slot.day < 0 || slot.day >= static_cast<int>(it.days.size())) return std::nullopt;
  const auto& day = it.days[static_cast<std::size_t>(slot.day)];
  switch (slot.kind) {
    case SlotKind::transport:
      if (day.transport) return SlotValue{*day.transport};
      return std::nullopt;
    case SlotKind::accommodation:
      if (day.accommodation) return SlotValue{*day.accommodation};
      return std::nullopt;
    case SlotKind::attraction:
      if (slot.ordinal >= 0 && slot.ordinal < static_cast<int>(day.attractions.size()))
        return SlotValue{day.attractions[static_cast<std::size_t>(slot.ordinal)]};
      return std::nullopt;
    default: {
      const auto& m = day.meal(meal_index(slot.kind));
      if (m) return SlotValue{*m};
      return std::nullopt;
    }
  }
}

// Accommodation writes cover the whole stay that contains `slot.day`.
inline void set_slot(Itinerary& it, const SlotId& slot, const std::optional<SlotValue>& value) {
  if (slot.day < 0 || slot.day >= static_cast<int>(it.days.size()))
    throw ContractViolation("slot outside itinerary: " + slot.to_string());
  auto& day = it.days[static_cast<std::size_t>(slot.day)];
  auto place = [&]() -> std::optional<PlaceRef> {
    if (!value) return std::nullopt;
    return std::get<PlaceRef>(*value);
  };
  switch (slot.kind) {
    case SlotKind::transport:
      day.transport = value ? std::optional<TransportLeg>(std::get<TransportLeg>(*value)) : std::nullopt;
      break;
    case SlotKind::accommodation: {
      const auto stay = stay_containing(it, slot.day);
      if (!stay) throw ContractViolation("no night on day " + std::to_string(slot.day));
      for (int d = stay->first_day; d < stay->first_day + stay->nights; ++d)
        it.days[static_cast<std::size_t>(d)].accommodation = place();
      break;
    }
    case SlotKind::attraction: {
      auto& v = day.attractions;
      const auto pos = static_cast<std::size_t>(slot.ordinal);
      if (!value) {
        if (pos < v.size()) v.erase(v.begin() + static_cast<std::ptrdiff_t>(pos));
      } else if (pos < v.size()) {
        v[pos] = *place();
      } else if (pos == v.size()) {
        v.push_back(*place());
      } else {
        throw ContractViolation("attraction ordinal out of range: " + slot.to_string());
      }
      break;
    }
    default:
      day.meal(meal_index(slot.kind)) = place();
  }
}

inline std::vector<std::string> accommodation_tags(const Accommodation& a) {
  auto t = words(a.name);
  t.emplace_back(to_string(a.room_type));
  return t;
}

inline std::vector<std::string> restaurant_tags(const Restaurant& r) {
  auto t = words(r.name);
  for (const auto& c : r.cuisines) t.push_back(to_lower(c));
  return t;
}

inline std::vector<std::string> attraction_tags(const Attraction& a) { return words(a.name); }

// Transport candidates for one leg, restricted to the allowed modes.
inline std::vector<Candidate> leg_candidates(const std::string& from, const std::string& to, const Date& date,
                                             const StructuredQuery& q, const RetrievedSubset& s) {
  std::vector<Candidate> out;
  if (s.allowed_modes.count(TransportMode::flight)) {
    auto it = s.flights_by_leg.find(FlightLegKey{from, to, date});
    if (it != s.flights_by_leg.end())
      for (const auto& f : it->second) {
        TransportLeg leg{TransportMode::flight, f.id, from, to, leg_cost(TransportMode::flight, f.price, q.party_size)};
        out.push_back(Candidate{leg, leg.ref(), leg.cost, {"flight"}});
      }
  }
  if (const auto* e = s.find_ground(from, to)) {
    for (auto mode : {TransportMode::taxi, TransportMode::self_drive}) {
      if (!s.allowed_modes.count(mode)) continue;
      const Cents price = mode == TransportMode::taxi ? e->taxi_cost : e->self_drive_cost;
      TransportLeg leg{mode, "", from, to, leg_cost(mode, price, q.party_size)};
      out.push_back(Candidate{leg, leg.ref(), leg.cost, {std::string(to_string(mode))}});
    }
  }
  return out;
}

// Unranked candidate pool for a slot, drawn from the subset only.
inline std::vector<Candidate> slot_candidates(const Itinerary& it, const SlotId& slot, const StructuredQuery& q,
                                              const RetrievedSubset& s) {
  std::vector<Candidate> out;
  if (slot.day < 0 || slot.day >= static_cast<int>(it.days.size())) return out;
  const auto& day = it.days[static_cast<std::size_t>(slot.day)];
  switch (slot.kind) {
    case SlotKind::transport:
      if (day.to_city) out = leg_candidates(day.city, *day.to_city, day.date, q, s);
      break;
    case SlotKind::accommodation: {
      const auto stay = stay_containing(it, slot.day);
      if (!stay) break;
      auto bucket = s.accommodations_by_city.find(stay->city);
      if (bucket == s.accommodations_by_city.end()) break;
      for (const auto& a : bucket->second) {
        if (a.minimum_nights > stay->nights) continue;
        const Cents cost = night_cost(a, q.party_size) * stay->nights;
        out.push_back(Candidate{PlaceRef{a.name, a.city}, a.name, cost, accommodation_tags(a)});
      }
      break;
    }
    case SlotKind::attraction: {
      auto bucket = s.attractions_by_city.find(activity_city(day, q.origin));
      if (bucket == s.attractions_by_city.end()) break;
      for (const auto& a : bucket->second) out.push_back(Candidate{PlaceRef{a.name, a.city}, a.name, 0, attraction_tags(a)});
      break;
    }
    default: {
      auto bucket = s.restaurants_by_city.find(activity_city(day, q.origin));
      if (bucket == s.restaurants_by_city.end()) break;
      for (const auto& r : bucket->second)
        out.push_back(Candidate{PlaceRef{r.name, r.city}, r.name, meal_cost(r, q.party_size), restaurant_tags(r)});
    }
  }
  return out;
}

inline std::vector<Candidate> ranked_candidates(const Itinerary& it, const SlotId& slot, const StructuredQuery& q,
                                                const RetrievedSubset& s) {
  auto pool = slot_candidates(it, slot, q, s);
  rank_candidates(pool, q.preferences);
  return pool;
}

// Cost and preference tags of whatever currently fills a slot.
struct SlotSnapshot {
  SlotId slot;
  SlotValue value;
  Cents cost = 0;
  std::vector<std::string> tags;
};

inline std::optional<SlotSnapshot> inspect_slot(const Itinerary& it, const SlotId& slot, const StructuredQuery& q,
                                                const RetrievedSubset& s) {
  auto v = get_slot(it, slot);
  if (!v) return std::nullopt;
  SlotSnapshot snap{slot, *v, 0, {}};
  if (const auto* leg = std::get_if<TransportLeg>(&*v)) {
    snap.cost = price_leg(*leg, q.party_size, s).value_or(0);
    snap.tags = {std::string(to_string(leg->mode))};
    return snap;
  }
  const auto& ref = std::get<PlaceRef>(*v);
  if (slot.kind == SlotKind::accommodation) {
    if (const auto* a = s.find_accommodation(ref.name, ref.city)) {
      const auto stay = stay_containing(it, slot.day);
      int nights = 0;
      if (stay)
        for (int d = stay->first_day; d < stay->first_day + stay->nights; ++d)
          nights += it.days[static_cast<std::size_t>(d)].accommodation == ref;
      snap.cost = night_cost(*a, q.party_size) * nights;
      snap.tags = accommodation_tags(*a);
    }
  } else if (slot.kind == SlotKind::attraction) {
    if (const auto* a = s.find_attraction(ref.name, ref.city)) snap.tags = attraction_tags(*a);
  } else if (const auto* r = s.find_restaurant(ref.name, ref.city)) {
    snap.cost = meal_cost(*r, q.party_size);
    snap.tags = restaurant_tags(*r);
  }
  return snap;
}

// Every filled slot, one entry per stay for accommodation.
inline std::vector<SlotId> filled_slots(const Itinerary& it) {
  std::vector<SlotId> out;
  for (const auto& d : it.days)
    if (d.transport) out.push_back({SlotKind::transport, d.day_index, 0});
  for (const auto& st : stays(it))
    if (it.days[static_cast<std::size_t>(st.first_day)].accommodation)
      out.push_back({SlotKind::accommodation, st.first_day, 0});
  for (const auto& d : it.days)
    for (int m = 0; m < 3; ++m)
      if (d.meal(m)) out.push_back({meal_kind(m), d.day_index, 0});
  for (const auto& d : it.days)
    for (std::size_t k = 0; k < d.attractions.size(); ++k)
      out.push_back({SlotKind::attraction, d.day_index, static_cast<int>(k)});
  return out;
}

// A view of the subset as a dataset, so checkers can run against the planning domain.
inline SandboxDataset as_dataset(const RetrievedSubset& s) {
  SandboxTables t;
  for (const auto& [name, c] : s.cities) t.cities.push_back(c);
  for (const auto& [k, v] : s.flights_by_leg) t.flights.insert(t.flights.end(), v.begin(), v.end());
  for (const auto& [k, e] : s.ground_by_leg) t.distances.push_back(e);
  for (const auto& [k, v] : s.accommodations_by_city) t.accommodations.insert(t.accommodations.end(), v.begin(), v.end());
  for (const auto& [k, v] : s.restaurants_by_city) t.restaurants.insert(t.restaurants.end(), v.begin(), v.end());
  for (const auto& [k, v] : s.attractions_by_city) t.attractions.insert(t.attractions.end(), v.begin(), v.end());
  return SandboxDataset(std::move(t));
}

}  // namespace triflow
