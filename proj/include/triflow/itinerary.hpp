#pragma once

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "triflow/date.hpp"
#include "triflow/error.hpp"
#include "triflow/types.hpp"

namespace triflow {

// Reference to a restaurant, attraction or accommodation by primary key.
struct PlaceRef {
  std::string name;
  std::string city;
  auto operator<=>(const PlaceRef&) const = default;
  std::string label() const { return name + ", " + city; }
};

struct TransportLeg {
  TransportMode mode = TransportMode::taxi;
  std::string flight_id;  // empty for ground legs
  std::string origin;
  std::string destination;
  Cents cost = 0;  // for the whole party
  bool operator==(const TransportLeg&) const = default;

  std::string ref() const {
    if (mode == TransportMode::flight) return flight_id;
    return std::string(to_string(mode)) + ":" + origin + "->" + destination;
  }
};

struct DayPlan {
  int day_index = 0;
  Date date;
  std::string city;                    // current city, or departure city on a transition day
  std::optional<std::string> to_city;  // set on transition days
  std::optional<TransportLeg> transport;
  std::optional<PlaceRef> breakfast;
  std::optional<PlaceRef> lunch;
  std::optional<PlaceRef> dinner;
  std::vector<PlaceRef> attractions;
  std::optional<PlaceRef> accommodation;

  bool operator==(const DayPlan&) const = default;

  bool is_transition() const { return to_city.has_value(); }
  // Where the traveller ends the day (and sleeps, unless it is the last day).
  const std::string& end_city() const { return to_city ? *to_city : city; }

  std::optional<PlaceRef>& meal(int i) { return i == 0 ? breakfast : (i == 1 ? lunch : dinner); }
  const std::optional<PlaceRef>& meal(int i) const { return i == 0 ? breakfast : (i == 1 ? lunch : dinner); }
};

enum class CommitmentKind { structure, slot, constraint };

inline std::string_view to_string(CommitmentKind k) {
  switch (k) {
    case CommitmentKind::structure: return "structure";
    case CommitmentKind::slot: return "slot";
    case CommitmentKind::constraint: return "constraint";
  }
  return "?";
}

struct LedgerEntry {
  CommitmentKind kind = CommitmentKind::structure;
  std::string subject;  // constraint name, slot id or structural decision
  std::string stage;    // step that committed it
  std::vector<std::string> frozen_fields;
  bool operator==(const LedgerEntry&) const = default;
};

// Append-only record of commitments. A field frozen once can never be frozen again.
class CommitmentLedger {
 public:
  void append(LedgerEntry e) {
    for (const auto& f : e.frozen_fields)
      if (frozen_.count(f)) throw ContractViolation("ledger field already frozen: " + f);
    for (const auto& f : e.frozen_fields) frozen_.insert(f);
    entries_.push_back(std::move(e));
  }

  const std::vector<LedgerEntry>& entries() const { return entries_; }
  bool is_frozen(const std::string& field) const { return frozen_.count(field) > 0; }

  bool has_constraint(std::string_view name) const { return is_frozen("constraint:" + std::string(name)); }

  std::vector<std::string> committed_constraints() const {
    std::vector<std::string> out;
    for (const auto& e : entries_)
      if (e.kind == CommitmentKind::constraint) out.push_back(e.subject);
    return out;
  }

  bool operator==(const CommitmentLedger& o) const { return entries_ == o.entries_; }

 private:
  std::vector<LedgerEntry> entries_;
  std::set<std::string> frozen_;
};

struct Itinerary {
  std::vector<DayPlan> days;
  CommitmentLedger ledger;
  bool operator==(const Itinerary&) const = default;
};

// Same plan content, ignoring the ledger.
inline bool same_days(const Itinerary& a, const Itinerary& b) { return a.days == b.days; }

enum class SlotKind { transport, accommodation, breakfast, lunch, dinner, attraction };

inline std::string_view to_string(SlotKind k) {
  switch (k) {
    case SlotKind::transport: return "transport";
    case SlotKind::accommodation: return "accommodation";
    case SlotKind::breakfast: return "breakfast";
    case SlotKind::lunch: return "lunch";
    case SlotKind::dinner: return "dinner";
    case SlotKind::attraction: return "attraction";
  }
  return "?";
}

inline bool is_meal(SlotKind k) { return k == SlotKind::breakfast || k == SlotKind::lunch || k == SlotKind::dinner; }
inline int meal_index(SlotKind k) { return k == SlotKind::breakfast ? 0 : (k == SlotKind::lunch ? 1 : 2); }
inline SlotKind meal_kind(int i) { return i == 0 ? SlotKind::breakfast : (i == 1 ? SlotKind::lunch : SlotKind::dinner); }

// Accommodation slots are keyed by the first night of a stay and cover the whole stay.
struct SlotId {
  SlotKind kind = SlotKind::transport;
  int day = 0;
  int ordinal = 0;  // attraction position within the day

  auto operator<=>(const SlotId&) const = default;

  std::string to_string() const {
    std::string s = std::string(triflow::to_string(kind)) + "[day" + std::to_string(day);
    if (kind == SlotKind::attraction) s += "#" + std::to_string(ordinal);
    return s + "]";
  }
};

using SlotValue = std::variant<TransportLeg, PlaceRef>;

inline std::string label(const SlotValue& v) {
  if (const auto* leg = std::get_if<TransportLeg>(&v)) return leg->ref();
  return std::get<PlaceRef>(v).label();
}

// ---------------------------------------------------------------------------
// JSON: one object per day, "-" for empty slots.

inline nlohmann::json to_json(const TransportLeg& leg) {
  return nlohmann::json{{"mode", std::string(to_string(leg.mode))},
                        {"ref", leg.ref()},
                        {"origin", leg.origin},
                        {"destination", leg.destination},
                        {"cost", leg.cost}};
}

inline nlohmann::json to_json(const DayPlan& d) {
  auto place = [](const std::optional<PlaceRef>& p) { return p ? nlohmann::json(p->label()) : nlohmann::json("-"); };
  nlohmann::json j;
  j["day_index"] = d.day_index;
  j["date"] = d.date.to_string();
  j["city_or_transition"] = d.to_city ? "from " + d.city + " to " + *d.to_city : d.city;
  j["transport"] = d.transport ? to_json(*d.transport) : nlohmann::json("-");
  j["breakfast"] = place(d.breakfast);
  j["lunch"] = place(d.lunch);
  j["dinner"] = place(d.dinner);
  if (d.attractions.empty()) {
    j["attractions"] = "-";
  } else {
    j["attractions"] = nlohmann::json::array();
    for (const auto& a : d.attractions) j["attractions"].push_back(a.label());
  }
  j["accommodation"] = place(d.accommodation);
  return j;
}

inline nlohmann::json to_json(const Itinerary& it) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& d : it.days) j.push_back(to_json(d));
  return j;
}

inline nlohmann::json to_json(const CommitmentLedger& l) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : l.entries())
    j.push_back({{"kind", std::string(to_string(e.kind))},
                 {"subject", e.subject},
                 {"stage", e.stage},
                 {"frozen_fields", e.frozen_fields}});
  return j;
}

}  // namespace triflow
