#pragma once

#include <algorithm>
#include <compare>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "triflow/error.hpp"
#include "triflow/itinerary.hpp"
#include "triflow/request.hpp"
#include "triflow/retrieval.hpp"
#include "triflow/sandbox.hpp"

namespace triflow {

// ---------------------------------------------------------------------------
// Cost model

inline constexpr Cents vehicle_capacity = 5;

struct CostBreakdown {
  Cents transport = 0;
  Cents lodging = 0;
  Cents meals = 0;
  Cents total = 0;
  bool operator==(const CostBreakdown&) const = default;
};

inline Cents leg_cost(TransportMode mode, Cents record_price, int party_size) {
  switch (mode) {
    case TransportMode::flight:
    case TransportMode::taxi: return record_price * party_size;
    case TransportMode::self_drive: return record_price * ceil_div(party_size, vehicle_capacity);
  }
  return 0;
}

inline Cents night_cost(const Accommodation& a, int party_size) {
  return a.price_per_night * ceil_div(party_size, a.max_occupancy);
}

inline Cents meal_cost(const Restaurant& r, int party_size) { return r.avg_cost * party_size; }

// Resolves a leg against the subset and prices it; nullopt when dangling.
inline std::optional<Cents> price_leg(const TransportLeg& leg, int party_size, const RetrievedSubset& s) {
  if (leg.mode == TransportMode::flight) {
    const auto* f = s.find_flight(leg.flight_id);
    if (!f) return std::nullopt;
    return leg_cost(leg.mode, f->price, party_size);
  }
  const auto* e = s.find_ground(leg.origin, leg.destination);
  if (!e) return std::nullopt;
  return leg_cost(leg.mode, leg.mode == TransportMode::taxi ? e->taxi_cost : e->self_drive_cost, party_size);
}

namespace cost_detail {

template <typename OnDangling>
CostBreakdown compute(const Itinerary& it, const StructuredQuery& q, const RetrievedSubset& s, OnDangling&& dangling) {
  CostBreakdown c;
  for (const auto& day : it.days) {
    if (day.transport) {
      if (auto p = price_leg(*day.transport, q.party_size, s))
        c.transport += *p;
      else
        dangling("transport " + day.transport->ref());
    }
    if (day.accommodation) {
      if (const auto* a = s.find_accommodation(day.accommodation->name, day.accommodation->city))
        c.lodging += night_cost(*a, q.party_size);
      else
        dangling("accommodation " + day.accommodation->label());
    }
    for (int m = 0; m < 3; ++m) {
      if (!day.meal(m)) continue;
      if (const auto* r = s.find_restaurant(day.meal(m)->name, day.meal(m)->city))
        c.meals += meal_cost(*r, q.party_size);
      else
        dangling("restaurant " + day.meal(m)->label());
    }
  }
  c.total = c.transport + c.lodging + c.meals;
  return c;
}

}  // namespace cost_detail

// Throws ReferenceError when a slot points outside the subset.
inline CostBreakdown compute_cost(const Itinerary& it, const StructuredQuery& q, const RetrievedSubset& s) {
  return cost_detail::compute(it, q, s, [](const std::string& what) {
    throw ReferenceError("dangling reference: " + what);
  });
}

// Dangling references contribute 0 (the within-sandbox checker reports them).
inline CostBreakdown compute_cost_lenient(const Itinerary& it, const StructuredQuery& q, const RetrievedSubset& s) {
  return cost_detail::compute(it, q, s, [](const std::string&) {});
}

// ---------------------------------------------------------------------------
// Identifiers and results

enum class Family { commonsense, hard };

inline std::string_view to_string(Family f) { return f == Family::commonsense ? "commonsense" : "hard"; }

struct ConstraintId {
  Family family = Family::commonsense;
  std::string name;
  auto operator<=>(const ConstraintId&) const = default;
};

namespace constraint_ids {
inline const ConstraintId within_sandbox{Family::commonsense, "within_sandbox"};
inline const ConstraintId complete_information{Family::commonsense, "complete_information"};
inline const ConstraintId within_current_city{Family::commonsense, "within_current_city"};
inline const ConstraintId reasonable_city_route{Family::commonsense, "reasonable_city_route"};
inline const ConstraintId diverse_restaurants{Family::commonsense, "diverse_restaurants"};
inline const ConstraintId diverse_attractions{Family::commonsense, "diverse_attractions"};
inline const ConstraintId non_conflicting_transportation{Family::commonsense, "non_conflicting_transportation"};
inline const ConstraintId minimum_nights_stay{Family::commonsense, "minimum_nights_stay"};
inline const ConstraintId budget{Family::hard, "budget"};
inline const ConstraintId room_rule{Family::hard, "room_rule"};
inline const ConstraintId cuisine{Family::hard, "cuisine"};
inline const ConstraintId room_type{Family::hard, "room_type"};
inline const ConstraintId transportation{Family::hard, "transportation"};
}  // namespace constraint_ids

struct Violation {
  std::optional<int> day_index;
  std::string slot;
  std::string message;
  std::optional<SlotId> target;  // the offending slot, when the violation is located
  bool operator==(const Violation&) const = default;
};

inline Violation violation_at(const SlotId& slot, std::string message) {
  return Violation{slot.day, slot.to_string(), std::move(message), slot};
}

struct ConstraintResult {
  ConstraintId id;
  bool passed = true;  // always equal to violations.empty()
  std::vector<Violation> violations;
  bool operator==(const ConstraintResult&) const = default;
};

struct ConstraintReport {
  std::vector<ConstraintResult> results;

  bool operator==(const ConstraintReport&) const = default;

  const ConstraintResult* find(std::string_view name) const {
    for (const auto& r : results)
      if (r.id.name == name) return &r;
    return nullptr;
  }
  bool passed(std::string_view name) const {
    const auto* r = find(name);
    return r && r->passed;
  }
  bool all_passed() const {
    return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
  }
  bool family_passed(Family f) const {
    return std::all_of(results.begin(), results.end(), [&](const auto& r) { return r.id.family != f || r.passed; });
  }
  int failing_count() const {
    return static_cast<int>(std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.passed; }));
  }
  std::set<std::string> passing() const {
    std::set<std::string> out;
    for (const auto& r : results)
      if (r.passed) out.insert(r.id.name);
    return out;
  }
};

struct CheckContext {
  const Itinerary& it;
  const StructuredQuery& q;
  const RetrievedSubset& s;
  const SandboxDataset& d;

  const Accommodation* accommodation(const PlaceRef& r) const {
    if (const auto* a = s.find_accommodation(r.name, r.city)) return a;
    return d.find_accommodation(r.name, r.city);
  }
  const Restaurant* restaurant(const PlaceRef& r) const {
    if (const auto* x = s.find_restaurant(r.name, r.city)) return x;
    return d.find_restaurant(r.name, r.city);
  }
};

// ---------------------------------------------------------------------------
// Checkers. Empty slots pass vacuously everywhere except complete_information.

namespace checkers {

using Violations = std::vector<Violation>;

inline Violations within_sandbox(const CheckContext& c) {
  Violations v;
  for (const auto& day : c.it.days) {
    const int i = day.day_index;
    if (day.transport) {
      const auto& leg = *day.transport;
      if (leg.mode == TransportMode::flight) {
        const auto* f = c.d.find_flight(leg.flight_id);
        if (!f || f->origin != leg.origin || f->destination != leg.destination || f->date != day.date)
          v.push_back(violation_at(SlotId{SlotKind::transport, i, 0}, "flight " + leg.flight_id + " not in sandbox"));
      } else if (!c.d.find_distance(leg.origin, leg.destination)) {
        v.push_back(violation_at(SlotId{SlotKind::transport, i, 0}, "no ground route " + leg.origin + "->" + leg.destination));
      }
    }
    for (int m = 0; m < 3; ++m)
      if (day.meal(m) && !c.d.find_restaurant(day.meal(m)->name, day.meal(m)->city))
        v.push_back(violation_at(SlotId{meal_kind(m), i, 0}, "restaurant " + day.meal(m)->label() + " not in sandbox"));
    for (std::size_t k = 0; k < day.attractions.size(); ++k)
      if (!c.d.find_attraction(day.attractions[k].name, day.attractions[k].city))
        v.push_back(violation_at(SlotId{SlotKind::attraction, i, static_cast<int>(k)},
                     "attraction " + day.attractions[k].label() + " not in sandbox"));
    if (day.accommodation && !c.d.find_accommodation(day.accommodation->name, day.accommodation->city))
      v.push_back(violation_at(SlotId{SlotKind::accommodation, i, 0},
                   "accommodation " + day.accommodation->label() + " not in sandbox"));
  }
  return v;
}

inline Violations complete_information(const CheckContext& c) {
  Violations v;
  const auto& days = c.it.days;
  if (static_cast<int>(days.size()) != c.q.days())
    v.push_back({std::nullopt, "days",
                 "expected " + std::to_string(c.q.days()) + " days, got " + std::to_string(days.size())});
  for (std::size_t k = 0; k < days.size(); ++k) {
    const auto& day = days[k];
    const int i = day.day_index;
    if (day.is_transition() && !day.transport) v.push_back(violation_at(SlotId{SlotKind::transport, i, 0}, "missing transport"));
    for (int m = 0; m < 3; ++m)
      if (!day.meal(m)) v.push_back(violation_at(SlotId{meal_kind(m), i, 0}, "missing meal"));
    if (day.attractions.empty()) v.push_back(violation_at(SlotId{SlotKind::attraction, i, 0}, "no attraction"));
    if (k + 1 < days.size() && !day.accommodation)
      v.push_back(violation_at(SlotId{SlotKind::accommodation, i, 0}, "missing accommodation"));
  }
  return v;
}

inline Violations within_current_city(const CheckContext& c) {
  Violations v;
  for (const auto& day : c.it.days) {
    const int i = day.day_index;
    auto here = [&](const std::string& city) { return city == day.city || (day.to_city && city == *day.to_city); };
    for (int m = 0; m < 3; ++m)
      if (day.meal(m) && !here(day.meal(m)->city))
        v.push_back(violation_at(SlotId{meal_kind(m), i, 0}, day.meal(m)->label() + " is not in the day's city"));
    for (std::size_t k = 0; k < day.attractions.size(); ++k)
      if (!here(day.attractions[k].city))
        v.push_back(violation_at(SlotId{SlotKind::attraction, i, static_cast<int>(k)},
                     day.attractions[k].label() + " is not in the day's city"));
    if (day.accommodation && day.accommodation->city != day.end_city())
      v.push_back(violation_at(SlotId{SlotKind::accommodation, i, 0},
                   day.accommodation->label() + " is not where the night is spent"));
  }
  return v;
}

inline Violations reasonable_city_route(const CheckContext& c) {
  Violations v;
  const auto& days = c.it.days;
  if (days.empty()) {
    v.push_back({std::nullopt, "route", "itinerary has no days"});
    return v;
  }
  if (!days.front().is_transition() || days.front().city != c.q.origin)
    v.push_back({days.front().day_index, "route", "trip does not depart from the origin"});
  if (!days.back().is_transition() || days.back().end_city() != c.q.origin)
    v.push_back({days.back().day_index, "route", "trip does not return to the origin"});

  std::vector<std::string> entered;
  for (std::size_t k = 0; k < days.size(); ++k) {
    const auto& day = days[k];
    const int i = day.day_index;
    if (k > 0 && day.city != days[k - 1].end_city())
      v.push_back({i, "route", "day starts in " + day.city + " but previous day ended in " + days[k - 1].end_city()});
    if (day.is_transition()) {
      if (*day.to_city == day.city) v.push_back({i, "route", "transition to the same city"});
      if (k + 1 < days.size()) {
        if (*day.to_city == c.q.origin) v.push_back({i, "route", "returns to the origin before the last day"});
        entered.push_back(*day.to_city);
      }
    }
    if (day.transport) {
      const auto& leg = *day.transport;
      if (!day.is_transition())
        v.push_back(violation_at(SlotId{SlotKind::transport, i, 0}, "transport on a day without a city change"));
      else if (leg.origin != day.city || leg.destination != *day.to_city)
        v.push_back(violation_at(SlotId{SlotKind::transport, i, 0},
                     "leg " + leg.origin + "->" + leg.destination + " does not match the day's transition"));
    }
  }
  std::map<std::string, int> seen;
  for (const auto& city : entered)
    if (++seen[city] == 2) v.push_back({std::nullopt, "route", "revisits " + city});
  for (const auto& dest : c.q.destinations)
    if (!seen.count(dest)) v.push_back({std::nullopt, "route", "never visits " + dest});
  return v;
}

template <typename Collect>
Violations no_repeats(const CheckContext& c, Collect&& collect) {
  std::vector<std::pair<SlotId, PlaceRef>> uses;
  for (const auto& day : c.it.days) collect(day, uses);
  std::map<PlaceRef, int> count;
  for (const auto& [slot, ref] : uses) ++count[ref];
  Violations v;
  for (const auto& [slot, ref] : uses)
    if (count[ref] > 1) v.push_back(violation_at(slot, ref.label() + " is used more than once"));
  return v;
}

inline Violations diverse_restaurants(const CheckContext& c) {
  return no_repeats(c, [](const DayPlan& day, auto& uses) {
    for (int m = 0; m < 3; ++m)
      if (day.meal(m)) uses.emplace_back(SlotId{meal_kind(m), day.day_index, 0}, *day.meal(m));
  });
}

inline Violations diverse_attractions(const CheckContext& c) {
  return no_repeats(c, [](const DayPlan& day, auto& uses) {
    for (std::size_t k = 0; k < day.attractions.size(); ++k)
      uses.emplace_back(SlotId{SlotKind::attraction, day.day_index, static_cast<int>(k)}, day.attractions[k]);
  });
}

// Taxi mixes freely; flight and self-drive in the same trip conflict.
inline Violations non_conflicting_transportation(const CheckContext& c) {
  bool flight = false, drive = false;
  for (const auto& day : c.it.days) {
    if (!day.transport) continue;
    flight = flight || day.transport->mode == TransportMode::flight;
    drive = drive || day.transport->mode == TransportMode::self_drive;
  }
  Violations v;
  if (!(flight && drive)) return v;
  for (const auto& day : c.it.days)
    if (day.transport && day.transport->mode != TransportMode::taxi)
      v.push_back(violation_at(SlotId{SlotKind::transport, day.day_index, 0},
                   std::string(to_string(day.transport->mode)) + " conflicts with another leg's mode"));
  return v;
}

inline Violations minimum_nights_stay(const CheckContext& c) {
  Violations v;
  const auto& days = c.it.days;
  std::size_t k = 0;
  while (k < days.size()) {
    if (!days[k].accommodation) {
      ++k;
      continue;
    }
    std::size_t end = k + 1;
    while (end < days.size() && days[end].accommodation == days[k].accommodation) ++end;
    const int run = static_cast<int>(end - k);
    if (const auto* a = c.accommodation(*days[k].accommodation); a && run < a->minimum_nights)
      v.push_back(violation_at(SlotId{SlotKind::accommodation, days[k].day_index, 0},
                     a->name + " requires " + std::to_string(a->minimum_nights) + " nights, stay is " +
                         std::to_string(run)));
    k = end;
  }
  return v;
}

inline Violations budget(const CheckContext& c) {
  const auto cost = compute_cost_lenient(c.it, c.q, c.s);
  if (cost.total <= c.q.budget) return {};
  return {{std::nullopt, "budget",
           "total " + std::to_string(cost.total) + " exceeds budget " + std::to_string(c.q.budget)}};
}

inline Violations room_rule(const CheckContext& c) {
  Violations v;
  for (const auto& day : c.it.days) {
    if (!day.accommodation) continue;
    const auto* a = c.accommodation(*day.accommodation);
    if (!a) continue;
    for (auto need : c.q.hard.room_rule_needs)
      if (a->house_rules.count(forbidding_rule(need)))
        v.push_back(violation_at(SlotId{SlotKind::accommodation, day.day_index, 0},
                     a->name + " forbids " + std::string(to_string(need))));
  }
  return v;
}

inline Violations cuisine(const CheckContext& c) {
  std::set<std::string> served;
  for (const auto& day : c.it.days)
    for (int m = 0; m < 3; ++m)
      if (day.meal(m))
        if (const auto* r = c.restaurant(*day.meal(m)))
          for (const auto& x : r->cuisines) served.insert(to_lower(x));
  Violations v;
  for (const auto& want : c.q.hard.cuisines)
    if (!served.count(want)) v.push_back({std::nullopt, "meals", "no chosen restaurant serves " + want});
  return v;
}

inline Violations room_type(const CheckContext& c) {
  Violations v;
  for (const auto& day : c.it.days) {
    if (!day.accommodation) continue;
    const auto* a = c.accommodation(*day.accommodation);
    if (a && a->room_type != *c.q.hard.room_type)
      v.push_back(violation_at(SlotId{SlotKind::accommodation, day.day_index, 0},
                   a->name + " is " + std::string(to_string(a->room_type))));
  }
  return v;
}

inline Violations transportation(const CheckContext& c) {
  Violations v;
  for (const auto& day : c.it.days)
    if (day.transport && c.q.hard.transport_bans.count(day.transport->mode))
      v.push_back(violation_at(SlotId{SlotKind::transport, day.day_index, 0},
                   std::string(to_string(day.transport->mode)) + " is banned"));
  return v;
}

}  // namespace checkers

// ---------------------------------------------------------------------------
// Registry

class ConstraintRegistry {
 public:
  using Applicable = std::function<bool(const StructuredQuery&)>;
  using Checker = std::function<std::vector<Violation>(const CheckContext&)>;

  struct Entry {
    ConstraintId id;
    Applicable applicable;
    Checker check;
  };

  void add(ConstraintId id, Applicable applicable, Checker check) {
    if (find(id.name)) throw ContractViolation("constraint registered twice: " + id.name);
    entries_.push_back(Entry{std::move(id), std::move(applicable), std::move(check)});
  }

  const Entry* find(std::string_view name) const {
    for (const auto& e : entries_)
      if (e.id.name == name) return &e;
    return nullptr;
  }

  const std::vector<Entry>& entries() const { return entries_; }

  std::vector<ConstraintId> applicable(const StructuredQuery& q) const {
    std::vector<ConstraintId> out;
    for (const auto& e : entries_)
      if (e.applicable(q)) out.push_back(e.id);
    return out;
  }

  ConstraintResult check(std::string_view name, const CheckContext& ctx) const {
    const auto* e = find(name);
    if (!e) throw ApplicabilityError("unknown constraint " + std::string(name));
    if (!e->applicable(ctx.q)) throw ApplicabilityError(std::string(name) + " does not apply to this query");
    return run(*e, ctx);
  }

  // Every applicable checker, in registration order.
  ConstraintReport check_all(const CheckContext& ctx) const {
    ConstraintReport r;
    for (const auto& e : entries_)
      if (e.applicable(ctx.q)) r.results.push_back(run(e, ctx));
    return r;
  }

  // Rows of the commonsense and hard families in their canonical order.
  static const ConstraintRegistry& standard() {
    static const ConstraintRegistry registry = [] {
      namespace ids = constraint_ids;
      ConstraintRegistry r;
      auto always = [](const StructuredQuery&) { return true; };
      r.add(ids::within_sandbox, always, checkers::within_sandbox);
      r.add(ids::complete_information, always, checkers::complete_information);
      r.add(ids::within_current_city, always, checkers::within_current_city);
      r.add(ids::reasonable_city_route, always, checkers::reasonable_city_route);
      r.add(ids::diverse_restaurants, always, checkers::diverse_restaurants);
      r.add(ids::diverse_attractions, always, checkers::diverse_attractions);
      r.add(ids::non_conflicting_transportation, always, checkers::non_conflicting_transportation);
      r.add(ids::minimum_nights_stay, always, checkers::minimum_nights_stay);
      r.add(ids::budget, always, checkers::budget);
      r.add(ids::room_rule, [](const StructuredQuery& q) { return !q.hard.room_rule_needs.empty(); },
            checkers::room_rule);
      r.add(ids::cuisine, [](const StructuredQuery& q) { return !q.hard.cuisines.empty(); }, checkers::cuisine);
      r.add(ids::room_type, [](const StructuredQuery& q) { return q.hard.room_type.has_value(); },
            checkers::room_type);
      r.add(ids::transportation, [](const StructuredQuery& q) { return !q.hard.transport_bans.empty(); },
            checkers::transportation);
      return r;
    }();
    return registry;
  }

 private:
  static ConstraintResult run(const Entry& e, const CheckContext& ctx) {
    ConstraintResult res{e.id, true, e.check(ctx)};
    res.passed = res.violations.empty();
    return res;
  }

  std::vector<Entry> entries_;
};

inline const std::vector<ConstraintId>& table_order() {
  static const std::vector<ConstraintId> order = [] {
    std::vector<ConstraintId> v;
    for (const auto& e : ConstraintRegistry::standard().entries()) v.push_back(e.id);
    return v;
  }();
  return order;
}

inline std::vector<ConstraintId> applicable_constraints(const StructuredQuery& q) {
  return ConstraintRegistry::standard().applicable(q);
}

inline ConstraintResult check(const ConstraintId& id, const Itinerary& it, const StructuredQuery& q,
                              const RetrievedSubset& s, const SandboxDataset& d) {
  return ConstraintRegistry::standard().check(id.name, CheckContext{it, q, s, d});
}

inline ConstraintReport check_all(const Itinerary& it, const StructuredQuery& q, const RetrievedSubset& s,
                                  const SandboxDataset& d) {
  return ConstraintRegistry::standard().check_all(CheckContext{it, q, s, d});
}

inline nlohmann::json to_json(const ConstraintReport& r) {
  nlohmann::json results = nlohmann::json::array();
  for (const auto& res : r.results) {
    nlohmann::json vs = nlohmann::json::array();
    for (const auto& v : res.violations)
      vs.push_back({{"day_index", v.day_index ? nlohmann::json(*v.day_index) : nlohmann::json(nullptr)},
                    {"slot", v.slot},
                    {"message", v.message}});
    results.push_back({{"family", std::string(to_string(res.id.family))},
                       {"name", res.id.name},
                       {"passed", res.passed},
                       {"violations", std::move(vs)}});
  }
  return nlohmann::json{{"all_passed", r.all_passed()}, {"results", std::move(results)}};
}

inline nlohmann::json to_json(const CostBreakdown& c) {
  return nlohmann::json{{"transport", c.transport}, {"lodging", c.lodging}, {"meals", c.meals}, {"total", c.total}};
}

}  // namespace triflow
