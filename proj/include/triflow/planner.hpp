#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "triflow/agent.hpp"
#include "triflow/arbitration.hpp"
#include "triflow/constraints.hpp"
#include "triflow/generator.hpp"
#include "triflow/itinerary.hpp"
#include "triflow/request.hpp"
#include "triflow/retrieval.hpp"
#include "triflow/slots.hpp"

namespace triflow {

struct DayCity {
  std::string city;
  std::optional<std::string> to_city;
  bool operator==(const DayCity&) const = default;
};

struct Skeleton {
  std::vector<std::string> city_order;  // origin, destinations..., origin
  std::vector<DayCity> day_to_city;
  std::map<std::string, int> nights_per_city;
  double distance_km = 0;

  bool operator==(const Skeleton&) const = default;
};

// Even split; the remainder goes to the later cities.
inline std::vector<int> allocate_nights(int total_nights, int n_cities) {
  if (n_cities <= 0) return {};
  std::vector<int> out(static_cast<std::size_t>(n_cities), total_nights / n_cities);
  const int rem = total_nights % n_cities;
  for (int i = n_cities - rem; i < n_cities; ++i) ++out[static_cast<std::size_t>(i)];
  return out;
}

inline double leg_distance(const std::string& from, const std::string& to, const RetrievedSubset& s) {
  if (const auto* e = s.find_ground(from, to)) return e->distance_km;
  auto a = s.cities.find(from), b = s.cities.find(to);
  if (a == s.cities.end() || b == s.cities.end()) return 0;
  return euclidean_km(a->second.latitude, a->second.longitude, b->second.latitude, b->second.longitude);
}

inline Skeleton make_skeleton(const StructuredQuery& q, const std::vector<std::string>& order,
                              const RetrievedSubset& s) {
  Skeleton sk;
  sk.city_order.push_back(q.origin);
  sk.city_order.insert(sk.city_order.end(), order.begin(), order.end());
  sk.city_order.push_back(q.origin);
  const auto nights = allocate_nights(q.days() - 1, static_cast<int>(order.size()));
  sk.day_to_city.push_back({q.origin, order.empty() ? q.origin : order.front()});
  for (std::size_t i = 0; i < order.size(); ++i) {
    sk.nights_per_city[order[i]] = nights[i];
    for (int j = 1; j < nights[i]; ++j) sk.day_to_city.push_back({order[i], std::nullopt});
    sk.day_to_city.push_back({order[i], i + 1 < order.size() ? order[i + 1] : q.origin});
  }
  for (std::size_t i = 0; i + 1 < sk.city_order.size(); ++i)
    sk.distance_km += leg_distance(sk.city_order[i], sk.city_order[i + 1], s);
  return sk;
}

// Flight and self-drive cannot share a trip, so a set of legs is coverable if
// one of the two compatible mode families serves every leg.
inline bool legs_coverable(const std::vector<std::vector<TransportMode>>& leg_modes,
                           const std::set<TransportMode>& already_used = {}) {
  for (auto excluded : {TransportMode::self_drive, TransportMode::flight}) {
    if (already_used.count(excluded)) continue;
    bool ok = true;
    for (const auto& modes : leg_modes)
      ok = ok && std::any_of(modes.begin(), modes.end(), [&](TransportMode m) { return m != excluded; });
    if (ok) return true;
  }
  return false;
}

inline std::vector<TransportMode> modes_for_leg(const std::string& from, const std::string& to, const Date& date,
                                                const StructuredQuery& q, const RetrievedSubset& s) {
  std::vector<TransportMode> out;
  for (const auto& c : leg_candidates(from, to, date, q, s)) out.push_back(std::get<TransportLeg>(c.value).mode);
  return out;
}

inline bool skeleton_coverable(const Skeleton& sk, const StructuredQuery& q, const RetrievedSubset& s) {
  std::vector<std::vector<TransportMode>> legs;
  for (std::size_t i = 0; i < sk.day_to_city.size(); ++i) {
    const auto& dc = sk.day_to_city[i];
    if (!dc.to_city) continue;
    legs.push_back(modes_for_leg(dc.city, *dc.to_city, q.dates[i], q, s));
  }
  return legs_coverable(legs);
}

struct SkeletonOptions {
  bool require_coverage = true;
  std::uint64_t seed = 0;
};

// Every feasible ordering, by total distance then lexicographically.
inline std::vector<Skeleton> feasible_skeletons(const StructuredQuery& q, const RetrievedSubset& s,
                                                bool require_coverage = true) {
  std::vector<std::string> order = q.destinations;
  std::sort(order.begin(), order.end());
  std::vector<Skeleton> out;
  do {
    auto sk = make_skeleton(q, order, s);
    if (!require_coverage || skeleton_coverable(sk, q, s)) out.push_back(std::move(sk));
  } while (std::next_permutation(order.begin(), order.end()));
  std::stable_sort(out.begin(), out.end(), [](const Skeleton& a, const Skeleton& b) {
    if (a.distance_km != b.distance_km) return a.distance_km < b.distance_km;
    return a.city_order < b.city_order;
  });
  return out;
}

inline std::string order_label(const Skeleton& sk) {
  std::string out;
  for (const auto& c : sk.city_order) out += (out.empty() ? "" : ">") + c;
  return out;
}

// The city order is a rule-based structural decision, so the agent is consulted
// greedily (temperature 0) over the ranked feasible set. A backend that answers
// differently can only pick another feasible ordering.
inline Skeleton build_skeleton(const StructuredQuery& q, const RetrievedSubset& s, Agent& agent,
                               const SkeletonOptions& opts = {}) {
  auto feasible = feasible_skeletons(q, s, opts.require_coverage);
  if (feasible.empty()) throw SkeletonInfeasible("no city ordering has transport for every leg");
  if (feasible.size() == 1) return feasible.front();
  std::vector<std::string> labels;
  for (const auto& sk : feasible) labels.push_back(order_label(sk));
  const auto pick = agent.suggest(StageRole{Stage::planning, 0.0}, "skeleton", labels, opts.seed).choice;
  return pick < feasible.size() ? feasible[pick] : feasible.front();
}

inline Itinerary itinerary_from_skeleton(const StructuredQuery& q, const Skeleton& sk) {
  Itinerary it;
  std::vector<std::string> frozen{"city_order"};
  for (std::size_t i = 0; i < sk.day_to_city.size(); ++i) {
    DayPlan day;
    day.day_index = static_cast<int>(i);
    day.date = i < q.dates.size() ? q.dates[i] : Date{};
    day.city = sk.day_to_city[i].city;
    day.to_city = sk.day_to_city[i].to_city;
    it.days.push_back(std::move(day));
    frozen.push_back("day[" + std::to_string(i) + "].city");
  }
  it.ledger.append(LedgerEntry{CommitmentKind::structure, "skeleton " + order_label(sk), "skeleton", frozen});
  return it;
}

// ---------------------------------------------------------------------------
// Slot filling

struct SlotValidator {
  std::vector<std::string> constraints;              // re-checked on every trial
  std::function<bool(const Itinerary&)> extra;       // slot-local check, optional
};

struct FillContext {
  const StructuredQuery& q;
  const RetrievedSubset& s;
  const SandboxDataset& domain;
  StageRole role{Stage::planning, 0.3};
  std::uint64_t seed = 0;
  int agent_rounds = 3;
};

inline bool passes(const std::string& name, const Itinerary& it, const FillContext& ctx) {
  const auto& reg = ConstraintRegistry::standard();
  const auto* e = reg.find(name);
  if (!e || !e->applicable(ctx.q)) return true;
  return e->check(CheckContext{it, ctx.q, ctx.s, ctx.domain}).empty();
}

inline bool validate(const Itinerary& trial, const SlotValidator& v, const FillContext& ctx) {
  for (const auto& name : v.constraints)
    if (!passes(name, trial, ctx)) return false;
  return !v.extra || v.extra(trial);
}

// Commits every applicable constraint that now passes and is not yet committed.
inline void commit_passing(Itinerary& it, const FillContext& ctx, const std::string& stage,
                           const std::set<std::string>& skip = {}) {
  for (const auto& id : ConstraintRegistry::standard().applicable(ctx.q)) {
    if (skip.count(id.name) || it.ledger.has_constraint(id.name)) continue;
    if (passes(id.name, it, ctx))
      it.ledger.append(LedgerEntry{CommitmentKind::constraint, id.name, stage, {"constraint:" + id.name}});
  }
}

inline std::set<std::string> deferred_constraints() { return {"complete_information", "budget"}; }

inline Itinerary fill_slot(const Itinerary& it, const SlotId& slot, const std::vector<Candidate>& candidates,
                           const SlotValidator& validator, Agent& agent, const FillContext& ctx) {
  if (get_slot(it, slot)) throw ContractViolation("slot already filled: " + slot.to_string());
  auto trial_with = [&](const Candidate& c) {
    Itinerary t = it;
    set_slot(t, slot, c.value);
    return t;
  };

  std::vector<std::size_t> remaining(candidates.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;

  std::optional<Itinerary> accepted;
  std::string how;
  for (int round = 0; round < ctx.agent_rounds && !remaining.empty() && !accepted; ++round) {
    std::vector<std::string> labels;
    for (auto i : remaining) labels.push_back(candidates[i].name);
    const std::string context = slot.to_string() + "|round " + std::to_string(round) + "|" +
                                std::to_string(labels.size()) + " candidates";
    const auto choice = agent.suggest(ctx.role, context, labels, ctx.seed).choice;
    if (choice >= remaining.size()) continue;  // out of range counts as a rejection
    auto t = trial_with(candidates[remaining[choice]]);
    if (validate(t, validator, ctx)) {
      accepted = std::move(t);
      how = "agent round " + std::to_string(round);
    } else {
      remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(choice));
    }
  }
  if (!accepted) {
    for (auto i : remaining) {
      auto t = trial_with(candidates[i]);
      if (validate(t, validator, ctx)) {
        accepted = std::move(t);
        how = "ranked fallback";
        break;
      }
    }
  }
  if (!accepted) throw SlotInfeasible(slot.to_string());

  const auto value = get_slot(*accepted, slot);
  accepted->ledger.append(LedgerEntry{CommitmentKind::slot, slot.to_string() + " = " + label(*value),
                                      "fill " + how, {}});
  commit_passing(*accepted, ctx, "after " + slot.to_string(), deferred_constraints());
  return *accepted;
}

// ---------------------------------------------------------------------------
// plan

struct PlannerOptions {
  StageRole role{Stage::planning, 0.3};
  std::uint64_t seed = 0;
  int agent_rounds = 3;
  std::function<void(const Itinerary&, const SlotId&)> on_fill;  // called after every step
};

struct PlanResult {
  Itinerary itinerary;
  Skeleton skeleton;
  std::vector<SlotId> gaps;  // slots left empty after SlotInfeasible
};

namespace planner_detail {

inline std::set<std::string> missing_cuisines(const Itinerary& it, const StructuredQuery& q,
                                              const RetrievedSubset& s) {
  std::set<std::string> missing = q.hard.cuisines;
  for (const auto& day : it.days)
    for (int m = 0; m < 3; ++m)
      if (day.meal(m))
        if (const auto* r = s.find_restaurant(day.meal(m)->name, day.meal(m)->city))
          for (const auto& c : r->cuisines) missing.erase(to_lower(c));
  return missing;
}

inline bool serves_any(const Candidate& c, const std::set<std::string>& cuisines, const RetrievedSubset& s) {
  const auto& ref = std::get<PlaceRef>(c.value);
  const auto* r = s.find_restaurant(ref.name, ref.city);
  if (!r) return false;
  return std::any_of(r->cuisines.begin(), r->cuisines.end(),
                     [&](const std::string& x) { return cuisines.count(to_lower(x)) > 0; });
}

}  // namespace planner_detail

inline PlanResult plan(const StructuredQuery& q, const RetrievedSubset& s, Agent& agent,
                       const PlannerOptions& opts = {}, std::optional<Skeleton> skeleton = std::nullopt) {
  PlanResult result;
  result.skeleton = skeleton ? *skeleton : build_skeleton(q, s, agent, {true, opts.seed});
  const SandboxDataset domain = as_dataset(s);
  FillContext ctx{q, s, domain, opts.role, opts.seed, opts.agent_rounds};

  Itinerary it = itinerary_from_skeleton(q, result.skeleton);
  commit_passing(it, ctx, "skeleton", deferred_constraints());

  const auto order = fill_order(it);

  // Budget reserve: the cheapest way to fill every slot after position k.
  // Meals in one city need distinct restaurants, so they reserve the r cheapest
  // ones not already on the plan rather than r times the cheapest.
  std::vector<Cents> fixed_suffix(order.size() + 1, 0);
  std::vector<std::string> meal_city(order.size());
  std::map<std::string, std::vector<std::pair<Cents, PlaceRef>>> menus;
  for (std::size_t k = order.size(); k-- > 0;) {
    const auto pool = slot_candidates(it, order[k], q, s);
    Cents lo = 0;
    if (is_meal(order[k].kind)) {
      if (!pool.empty()) {
        const auto& first = std::get<PlaceRef>(pool.front().value);
        meal_city[k] = first.city;
        auto& menu = menus[first.city];
        if (menu.empty()) {
          for (const auto& c : pool) menu.emplace_back(c.cost, std::get<PlaceRef>(c.value));
          std::sort(menu.begin(), menu.end());
        }
      }
    } else if (!pool.empty()) {
      lo = std::min_element(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.cost < b.cost; })
               ->cost;
    }
    fixed_suffix[k] = fixed_suffix[k + 1] + lo;
  }
  auto reserve_after = [&](std::size_t k, const Itinerary& t) {
    std::map<std::string, std::size_t> open;
    for (std::size_t j = k + 1; j < order.size(); ++j)
      if (!meal_city[j].empty()) ++open[meal_city[j]];
    std::set<PlaceRef> used;
    for (const auto& day : t.days)
      for (int m = 0; m < 3; ++m)
        if (day.meal(m)) used.insert(*day.meal(m));
    Cents total = fixed_suffix[k + 1];
    for (const auto& [city, n] : open) {
      std::size_t taken = 0;
      for (const auto& [cost, ref] : menus[city]) {
        if (taken == n) break;
        if (used.count(ref)) continue;
        total += cost;
        ++taken;
      }
    }
    return total;
  };

  std::vector<std::vector<TransportMode>> leg_modes(it.days.size());
  for (const auto& day : it.days)
    if (day.to_city)
      leg_modes[static_cast<std::size_t>(day.day_index)] = modes_for_leg(day.city, *day.to_city, day.date, q, s);

  // Remaining legs must stay coverable given the modes already chosen.
  auto transport_completable = [&](const Itinerary& t) {
    std::set<TransportMode> used;
    std::vector<std::vector<TransportMode>> open;
    for (const auto& day : t.days) {
      if (!day.to_city) continue;
      if (day.transport)
        used.insert(day.transport->mode);
      else if (!leg_modes[static_cast<std::size_t>(day.day_index)].empty())
        open.push_back(leg_modes[static_cast<std::size_t>(day.day_index)]);
    }
    if (used.count(TransportMode::flight) && used.count(TransportMode::self_drive)) return false;
    return legs_coverable(open, used);
  };

  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& slot = order[k];
    auto pool = ranked_candidates(it, slot, q, s);

    if (is_meal(slot.kind)) {
      const auto missing = planner_detail::missing_cuisines(it, q, s);
      if (!missing.empty())
        std::stable_partition(pool.begin(), pool.end(),
                              [&](const Candidate& c) { return planner_detail::serves_any(c, missing, s); });
    }
    const Cents spent = compute_cost_lenient(it, q, s).total;
    auto fits = [&](const Candidate& c) {
      if (!is_meal(slot.kind)) return spent + c.cost + reserve_after(k, it) <= q.budget;
      Itinerary t = it;
      set_slot(t, slot, c.value);
      return spent + c.cost + reserve_after(k, t) <= q.budget;
    };
    const auto split = std::stable_partition(pool.begin(), pool.end(), fits);
    std::vector<Candidate> affordable(pool.begin(), split), over(split, pool.end());

    SlotValidator validator{it.ledger.committed_constraints(), nullptr};
    if (slot.kind == SlotKind::transport) validator.extra = transport_completable;

    // The agent only sees over-budget options when nothing affordable validates.
    bool filled = false;
    for (auto* group : {&affordable, &over}) {
      if (filled || group->empty()) continue;
      try {
        it = fill_slot(it, slot, *group, validator, agent, ctx);
        filled = true;
      } catch (const SlotInfeasible&) {
      }
    }
    if (!filled) result.gaps.push_back(slot);
    if (opts.on_fill) opts.on_fill(it, slot);
  }

  commit_passing(it, ctx, "planning complete");
  result.itinerary = std::move(it);
  return result;
}

inline nlohmann::json to_json(const Skeleton& sk) {
  nlohmann::json days = nlohmann::json::array();
  for (const auto& dc : sk.day_to_city)
    days.push_back(dc.to_city ? nlohmann::json::array({dc.city, *dc.to_city}) : nlohmann::json(dc.city));
  return nlohmann::json{{"city_order", sk.city_order},
                        {"day_to_city", days},
                        {"nights_per_city", sk.nights_per_city},
                        {"distance_km", sk.distance_km}};
}

}  // namespace triflow
