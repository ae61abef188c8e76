#pragma once

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "triflow/agent.hpp"
#include "triflow/arbitration.hpp"
#include "triflow/constraints.hpp"
#include "triflow/itinerary.hpp"
#include "triflow/request.hpp"
#include "triflow/retrieval.hpp"
#include "triflow/slots.hpp"

namespace triflow {

struct SystemReport {
  CostBreakdown cost;
  Cents budget_slack = 0;
  std::vector<std::string> timing;
  double preference_score = 0;
  ConstraintReport constraint_report;
};

// Alignment of every chosen meal, attraction and stay; transport carries no preference tags.
inline std::vector<double> chosen_alignments(const Itinerary& it, const StructuredQuery& q, const RetrievedSubset& s) {
  std::vector<double> out;
  for (const auto& slot : filled_slots(it)) {
    if (slot.kind == SlotKind::transport) continue;
    if (auto snap = inspect_slot(it, slot, q, s)) out.push_back(alignment_score(snap->tags, q.preferences));
  }
  return out;
}

inline std::string clock(int minutes) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d:%02d", (minutes / 60) % 24, minutes % 60);
  return buf;
}

inline std::vector<std::string> timing_notes(const Itinerary& it, const RetrievedSubset& s) {
  std::vector<std::string> out;
  for (const auto& day : it.days) {
    if (!day.transport) continue;
    const auto& leg = *day.transport;
    const std::string head = "day " + std::to_string(day.day_index) + ": ";
    if (leg.mode == TransportMode::flight) {
      const auto* f = s.find_flight(leg.flight_id);
      if (!f) {
        out.push_back(head + "flight " + leg.flight_id + " unresolved");
        continue;
      }
      std::string note = head + "flight " + f->id + " " + f->origin + "->" + f->destination + " departs " +
                         clock(f->depart) + " arrives " + clock(f->arrive);
      if (f->date != day.date) note += " (flight date " + f->date.to_string() + " differs from the day)";
      if (f->overnight) note += " (arrives the next day)";
      out.push_back(note);
    } else if (const auto* e = s.find_ground(leg.origin, leg.destination)) {
      out.push_back(head + std::string(to_string(leg.mode)) + " " + leg.origin + "->" + leg.destination + ", " +
                    format_double(e->duration_min) + " min");
    } else {
      out.push_back(head + "ground route " + leg.origin + "->" + leg.destination + " unresolved");
    }
  }
  return out;
}

inline SystemReport build_system_report(const Itinerary& it, const StructuredQuery& q, const RetrievedSubset& s,
                                        const SandboxDataset& d) {
  SystemReport r;
  r.cost = compute_cost_lenient(it, q, s);
  r.budget_slack = q.budget - r.cost.total;
  r.timing = timing_notes(it, s);
  const auto a = chosen_alignments(it, q, s);
  if (!a.empty()) {
    double sum = 0;
    for (double x : a) sum += x;
    r.preference_score = sum / static_cast<double>(a.size());
  }
  r.constraint_report = check_all(it, q, s, d);
  return r;
}

// Lexicographic, lower is better.
struct Objective {
  int failing = 0;
  double neg_preference = 0;
  Cents total = 0;

  bool operator==(const Objective&) const = default;
  bool operator<(const Objective& o) const {
    return std::tie(failing, neg_preference, total) < std::tie(o.failing, o.neg_preference, o.total);
  }
  bool operator<=(const Objective& o) const { return !(o < *this); }
};

inline Objective objective(const SystemReport& r) {
  return Objective{r.constraint_report.failing_count(), -r.preference_score, r.cost.total};
}

enum class AdjustmentKind { replace_item, swap_days, drop_attraction, change_transport_mode };

inline std::string_view to_string(AdjustmentKind k) {
  switch (k) {
    case AdjustmentKind::replace_item: return "replace_item";
    case AdjustmentKind::swap_days: return "swap_days";
    case AdjustmentKind::drop_attraction: return "drop_attraction";
    case AdjustmentKind::change_transport_mode: return "change_transport_mode";
  }
  return "?";
}

struct Adjustment {
  AdjustmentKind kind = AdjustmentKind::replace_item;
  SlotId target;
  std::optional<SlotValue> replacement;
  int other_day = -1;  // swap_days only
  std::string rationale;

  bool same_action(const Adjustment& o) const {
    return kind == o.kind && target == o.target && replacement == o.replacement && other_day == o.other_day;
  }
};

// Applies to a copy. The skeleton (each day's cities) is never touched.
inline Itinerary apply_adjustment(const Itinerary& it, const Adjustment& a) {
  Itinerary out = it;
  switch (a.kind) {
    case AdjustmentKind::replace_item:
    case AdjustmentKind::change_transport_mode: set_slot(out, a.target, a.replacement); break;
    case AdjustmentKind::drop_attraction: set_slot(out, a.target, std::nullopt); break;
    case AdjustmentKind::swap_days: {
      auto& x = out.days.at(static_cast<std::size_t>(a.target.day));
      auto& y = out.days.at(static_cast<std::size_t>(a.other_day));
      std::swap(x.breakfast, y.breakfast);
      std::swap(x.lunch, y.lunch);
      std::swap(x.dinner, y.dinner);
      std::swap(x.attractions, y.attractions);
      break;
    }
  }
  return out;
}

struct GovernanceOptions {
  int max_iterations = 8;
  StageRole role{Stage::governance, 0.6};
  std::uint64_t seed = 0;
  std::size_t max_proposals = 5;
};

namespace governance_detail {

struct Proposer {
  const SystemReport& report;
  const Itinerary& it;
  const StructuredQuery& q;
  const RetrievedSubset& s;
  std::vector<Adjustment> out;

  std::set<PlaceRef> used_places() const {
    std::set<PlaceRef> used;
    for (const auto& day : it.days) {
      for (int m = 0; m < 3; ++m)
        if (day.meal(m)) used.insert(*day.meal(m));
      for (const auto& a : day.attractions) used.insert(a);
    }
    return used;
  }

  Cents current_cost(const SlotId& slot) const {
    auto snap = inspect_slot(it, slot, q, s);
    return snap ? snap->cost : 0;
  }

  double current_alignment(const SlotId& slot) const {
    auto snap = inspect_slot(it, slot, q, s);
    return snap ? alignment_score(snap->tags, q.preferences) : 0.0;
  }

  // Ranked pool for a slot without the current value or places used elsewhere.
  std::vector<Candidate> alternatives(const SlotId& slot) const {
    auto pool = ranked_candidates(it, slot, q, s);
    const auto current = get_slot(it, slot);
    const bool place = slot.kind != SlotKind::transport && slot.kind != SlotKind::accommodation;
    const auto used = place ? used_places() : std::set<PlaceRef>{};
    std::erase_if(pool, [&](const Candidate& c) {
      if (current && c.value == *current) return true;
      return place && used.count(std::get<PlaceRef>(c.value)) > 0;
    });
    // Alternatives that keep the trip within budget come first.
    const Cents base = report.cost.total - current_cost(slot);
    std::stable_partition(pool.begin(), pool.end(), [&](const Candidate& c) { return base + c.cost <= q.budget; });
    return pool;
  }

  void replace(const SlotId& slot, const Candidate& c, std::string why) {
    auto kind = AdjustmentKind::replace_item;
    if (slot.kind == SlotKind::transport) {
      auto cur = get_slot(it, slot);
      if (!cur || std::get<TransportLeg>(*cur).mode != std::get<TransportLeg>(c.value).mode)
        kind = AdjustmentKind::change_transport_mode;
    }
    out.push_back(Adjustment{kind, slot, c.value, -1, std::move(why) + ": use " + label(c.value)});
  }

  void repair_located(const ConstraintResult& r) {
    std::set<PlaceRef> seen;
    for (const auto& v : r.violations) {
      if (!v.target) continue;
      const SlotId slot = *v.target;
      const auto current = get_slot(it, slot);
      // Keep the first occurrence of a repeated item.
      if (r.id.name == "diverse_restaurants" || r.id.name == "diverse_attractions") {
        if (!current) continue;
        const auto& ref = std::get<PlaceRef>(*current);
        if (seen.insert(ref).second) continue;
        if (slot.kind == SlotKind::attraction && it.days[static_cast<std::size_t>(slot.day)].attractions.size() > 1) {
          out.push_back(Adjustment{AdjustmentKind::drop_attraction, slot, std::nullopt, -1,
                                   "drop repeated " + ref.label()});
          continue;
        }
      }
      auto pool = alternatives(slot);
      if (r.id.name == "non_conflicting_transportation" && current) {
        const auto mode = std::get<TransportLeg>(*current).mode;
        std::erase_if(pool, [&](const Candidate& c) { return std::get<TransportLeg>(c.value).mode == mode; });
      }
      if (pool.empty()) continue;
      replace(slot, pool.front(), r.id.name + " at " + slot.to_string());
    }
  }

  // Most expensive items first. For each, a replacement that closes the gap on
  // its own (best aligned) wins; otherwise the cheapest that keeps alignment.
  void repair_budget(std::size_t max_items = 3) {
    auto slots = filled_slots(it);
    std::vector<std::pair<Cents, SlotId>> by_cost;
    for (const auto& slot : slots) by_cost.emplace_back(current_cost(slot), slot);
    std::stable_sort(by_cost.begin(), by_cost.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    const Cents over = -report.budget_slack;
    std::size_t proposed = 0;
    for (const auto& [cost, slot] : by_cost) {
      if (cost == 0 || proposed == max_items) break;
      auto pool = alternatives(slot);
      std::erase_if(pool, [&](const Candidate& c) { return c.cost >= cost; });
      if (pool.empty()) continue;
      const double keep = current_alignment(slot);
      auto cheapest = [](const std::vector<Candidate>& v) {
        return *std::min_element(v.begin(), v.end(), [](const Candidate& a, const Candidate& b) {
          return a.cost != b.cost ? a.cost < b.cost : a.name < b.name;
        });
      };
      std::vector<Candidate> closing, aligned;
      for (const auto& c : pool) {
        if (cost - c.cost >= over) closing.push_back(c);
        if (c.alignment >= keep) aligned.push_back(c);
      }
      std::optional<Candidate> pick;
      if (!closing.empty())
        pick = *std::min_element(closing.begin(), closing.end(), [](const Candidate& a, const Candidate& b) {
          if (a.alignment != b.alignment) return a.alignment > b.alignment;
          return a.cost != b.cost ? a.cost < b.cost : a.name < b.name;
        });
      else
        pick = cheapest(aligned.empty() ? pool : aligned);
      replace(slot, *pick, "over budget by " + std::to_string(over));
      ++proposed;
    }
  }

  void repair_cuisine() {
    std::set<std::string> missing = q.hard.cuisines;
    std::map<std::string, int> providers;  // cuisine -> number of chosen meals serving it
    std::map<SlotId, std::set<std::string>> meal_cuisines;
    for (const auto& day : it.days)
      for (int m = 0; m < 3; ++m)
        if (day.meal(m))
          if (const auto* r = s.find_restaurant(day.meal(m)->name, day.meal(m)->city)) {
            const SlotId slot{meal_kind(m), day.day_index, 0};
            for (const auto& c : r->cuisines) {
              const auto lc = to_lower(c);
              missing.erase(lc);
              ++providers[lc];
              meal_cuisines[slot].insert(lc);
            }
          }
    for (const auto& want : missing) {
      std::optional<std::pair<SlotId, Candidate>> best;
      double best_alignment = 2;
      for (const auto& day : it.days)
        for (int m = 0; m < 3; ++m) {
          const SlotId slot{meal_kind(m), day.day_index, 0};
          // Do not remove the only meal serving another requested cuisine.
          bool sole = false;
          for (const auto& c : meal_cuisines[slot]) sole = sole || (q.hard.cuisines.count(c) && providers[c] == 1);
          if (sole) continue;
          auto pool = alternatives(slot);
          std::erase_if(pool, [&](const Candidate& c) {
            const auto& ref = std::get<PlaceRef>(c.value);
            const auto* r = s.find_restaurant(ref.name, ref.city);
            return !r || !retrieval::serves(*r, want);
          });
          if (pool.empty()) continue;
          const double a = day.meal(m) ? current_alignment(slot) : -1.0;  // empty meals first
          if (a < best_alignment) {
            best_alignment = a;
            best.emplace(slot, pool.front());
          }
        }
      if (best) replace(best->first, best->second, "no meal serves " + want);
    }
  }

  void repair_swaps(const ConstraintResult& r) {
    std::set<int> days;
    for (const auto& v : r.violations)
      if (v.target && v.target->kind != SlotKind::accommodation) days.insert(v.target->day);
    auto fits = [&](const DayPlan& items, const DayPlan& host) {
      auto ok = [&](const std::string& c) { return c == host.city || (host.to_city && c == *host.to_city); };
      for (int m = 0; m < 3; ++m)
        if (items.meal(m) && !ok(items.meal(m)->city)) return false;
      for (const auto& a : items.attractions)
        if (!ok(a.city)) return false;
      return true;
    };
    for (auto i : days)
      for (auto j : days) {
        if (j <= i) continue;
        const auto& a = it.days[static_cast<std::size_t>(i)];
        const auto& b = it.days[static_cast<std::size_t>(j)];
        if (fits(a, b) && fits(b, a))
          out.push_back(Adjustment{AdjustmentKind::swap_days, SlotId{SlotKind::breakfast, i, 0}, std::nullopt, j,
                                   "items of day " + std::to_string(i) + " and day " + std::to_string(j) +
                                       " belong to each other's city"});
      }
  }

  // The lowest-aligned filled slot that has a better-aligned alternative.
  std::optional<std::pair<SlotId, std::vector<Candidate>>> improvable() const {
    if (q.preferences.empty()) return std::nullopt;
    std::vector<std::pair<double, SlotId>> order;
    for (const auto& slot : filled_slots(it))
      if (slot.kind != SlotKind::transport) order.emplace_back(current_alignment(slot), slot);
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [a, slot] : order) {
      auto pool = alternatives(slot);
      std::erase_if(pool, [&](const Candidate& c) { return c.alignment <= a; });
      if (pool.empty()) continue;
      std::stable_sort(pool.begin(), pool.end(),
                       [](const Candidate& x, const Candidate& y) { return x.alignment > y.alignment; });
      return std::make_pair(slot, pool);
    }
    return std::nullopt;
  }
};

}  // namespace governance_detail

inline std::vector<Adjustment> propose_adjustments(const SystemReport& report, const Itinerary& it,
                                                   const StructuredQuery& q, const RetrievedSubset& s, Agent& agent,
                                                   const GovernanceOptions& opts = {}, int iteration = 0) {
  governance_detail::Proposer p{report, it, q, s, {}};
  for (const auto& r : report.constraint_report.results) {
    if (r.passed) continue;
    if (r.id.name == "budget")
      p.repair_budget();
    else if (r.id.name == "cuisine")
      p.repair_cuisine();
    else {
      if (r.id.name == "within_current_city") p.repair_swaps(r);
      p.repair_located(r);
    }
  }
  if (auto imp = p.improvable()) {
    const auto& [slot, pool] = *imp;
    p.replace(slot, pool.front(), "better matches preferences");
    std::vector<std::string> labels;
    for (const auto& c : pool) labels.push_back(c.name);
    const std::string context = "govern|iteration " + std::to_string(iteration) + "|" + slot.to_string();
    const auto pick = agent.suggest(opts.role, context, labels, opts.seed).choice;
    if (pick < pool.size()) p.replace(slot, pool[pick], "agent suggestion");
  }

  std::vector<Adjustment> unique;
  for (auto& a : p.out) {
    if (std::any_of(unique.begin(), unique.end(), [&](const Adjustment& u) { return u.same_action(a); })) continue;
    unique.push_back(std::move(a));
    if (unique.size() >= opts.max_proposals) break;
  }
  return unique;
}

enum class Termination { converged, no_feasible_improvement, iteration_cap };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::no_feasible_improvement: return "no_feasible_improvement";
    case Termination::iteration_cap: return "iteration_cap";
  }
  return "?";
}

struct GovernanceIteration {
  SystemReport report;
  std::vector<Adjustment> proposals;
  std::vector<std::size_t> accepted;  // indices into proposals
  Objective before;
  Objective after;
};

struct GovernanceTrace {
  std::vector<GovernanceIteration> iterations;
  Termination terminated_by = Termination::converged;
};

// Accept iff strictly better and nothing that passed now fails.
inline bool improves(const SystemReport& before, const SystemReport& after) {
  if (!(objective(after) < objective(before))) return false;
  const auto was = before.constraint_report.passing();
  const auto now = after.constraint_report.passing();
  return std::includes(now.begin(), now.end(), was.begin(), was.end());
}

using Proposer = std::function<std::vector<Adjustment>(const SystemReport&, const Itinerary&, int iteration)>;

inline std::pair<Itinerary, GovernanceTrace> govern_with(const Itinerary& input, const StructuredQuery& q,
                                                         const RetrievedSubset& s, const SandboxDataset& d,
                                                         const Proposer& propose, int max_iterations = 8) {
  Itinerary current = input;
  GovernanceTrace trace;
  trace.terminated_by = Termination::iteration_cap;
  SystemReport report = build_system_report(current, q, s, d);
  for (int iter = 0; iter < max_iterations; ++iter) {
    GovernanceIteration step;
    step.report = report;
    step.before = objective(report);
    step.proposals = propose(report, current, iter);
    for (std::size_t k = 0; k < step.proposals.size(); ++k) {
      Itinerary trial;
      try {
        trial = apply_adjustment(current, step.proposals[k]);
      } catch (const ContractViolation&) {
        continue;
      } catch (const std::out_of_range&) {
        continue;
      }
      auto r = build_system_report(trial, q, s, d);
      if (!improves(report, r)) continue;
      trial.ledger.append(LedgerEntry{CommitmentKind::slot,
                                      std::string(to_string(step.proposals[k].kind)) + " " +
                                          step.proposals[k].target.to_string(),
                                      "governance iteration " + std::to_string(iter), {}});
      current = std::move(trial);
      report = std::move(r);
      step.accepted.push_back(k);
    }
    step.after = objective(report);
    const bool none = step.accepted.empty();
    const bool empty = step.proposals.empty();
    trace.iterations.push_back(std::move(step));
    if (none) {
      trace.terminated_by = empty ? Termination::converged : Termination::no_feasible_improvement;
      break;
    }
  }
  return {current, trace};
}

inline std::pair<Itinerary, GovernanceTrace> govern(const Itinerary& it, const StructuredQuery& q,
                                                    const RetrievedSubset& s, const SandboxDataset& d, Agent& agent,
                                                    const GovernanceOptions& opts = {}) {
  auto propose = [&](const SystemReport& r, const Itinerary& cur, int iter) {
    GovernanceOptions o = opts;
    o.seed = mix_seed(opts.seed, static_cast<std::uint64_t>(iter));
    return propose_adjustments(r, cur, q, s, agent, o, iter);
  };
  return govern_with(it, q, s, d, propose, opts.max_iterations);
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const SystemReport& r) {
  return nlohmann::json{{"cost", to_json(r.cost)},
                        {"budget_slack", r.budget_slack},
                        {"timing", r.timing},
                        {"preference_score", r.preference_score},
                        {"constraint_report", to_json(r.constraint_report)}};
}

inline nlohmann::json to_json(const Objective& o) {
  return nlohmann::json::array({o.failing, o.neg_preference, o.total});
}

inline nlohmann::json to_json(const Adjustment& a) {
  nlohmann::json j{{"kind", std::string(to_string(a.kind))},
                   {"target", a.target.to_string()},
                   {"replacement", a.replacement ? nlohmann::json(label(*a.replacement)) : nlohmann::json(nullptr)},
                   {"rationale", a.rationale}};
  if (a.kind == AdjustmentKind::swap_days) j["other_day"] = a.other_day;
  return j;
}

inline nlohmann::json to_json(const GovernanceTrace& t) {
  nlohmann::json its = nlohmann::json::array();
  for (const auto& step : t.iterations) {
    nlohmann::json props = nlohmann::json::array();
    for (const auto& p : step.proposals) props.push_back(to_json(p));
    its.push_back({{"report", to_json(step.report)},
                   {"proposals", props},
                   {"accepted", step.accepted},
                   {"objective_before", to_json(step.before)},
                   {"objective_after", to_json(step.after)}});
  }
  return nlohmann::json{{"iterations", its}, {"terminated_by", std::string(to_string(t.terminated_by))}};
}

}  // namespace triflow
