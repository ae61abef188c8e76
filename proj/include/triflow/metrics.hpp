#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "triflow/constraints.hpp"
#include "triflow/error.hpp"
#include "triflow/request.hpp"

namespace triflow {

// One benchmark instance as seen by the scorer.
struct InstanceResult {
  Tier tier = Tier::easy;
  bool delivered = false;
  std::vector<ConstraintId> applicable;  // from the query
  ConstraintReport report;               // ignored when not delivered
};

struct FamilyRates {
  double micro = 0;         // mean over instances of the per-instance pass fraction
  double micro_pooled = 0;  // passed checks / applicable checks over all instances
  double macro = 0;         // instances passing every applicable check / instances
  std::size_t passed_checks = 0;
  std::size_t applicable_checks = 0;
  std::size_t instances_passing = 0;
};

struct RateBlock {
  std::size_t n_instances = 0;
  std::size_t delivered = 0;
  double delivery_rate = 0;
  FamilyRates commonsense;
  FamilyRates hard;
  double fpr = 0;
  std::size_t fpr_count = 0;
};

struct ConstraintRow {
  ConstraintId id;
  std::map<Tier, std::pair<std::size_t, std::size_t>> by_tier;  // tier -> (passed, applicable)
  std::size_t passed = 0;
  std::size_t applicable = 0;

  std::optional<double> rate() const {
    if (applicable == 0) return std::nullopt;
    return static_cast<double>(passed) / static_cast<double>(applicable);
  }
  std::optional<double> rate(Tier t) const {
    auto it = by_tier.find(t);
    if (it == by_tier.end() || it->second.second == 0) return std::nullopt;
    return static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
  }
};

struct BenchmarkReport {
  RateBlock overall;
  std::map<Tier, RateBlock> by_tier;
  std::vector<ConstraintRow> per_constraint;  // canonical table order
};

namespace metrics_detail {

// lcm(1..13): every per-instance fraction is an exact multiple of 1/kScale.
inline constexpr std::uint64_t kScale = 360360;

struct Tally {
  std::size_t n = 0, delivered = 0, fpr = 0;
  struct Fam {
    std::uint64_t scaled_fraction_sum = 0;
    std::size_t passed = 0, applicable = 0, instances_passing = 0;
  } fam[2];
};

inline int family_index(Family f) { return f == Family::commonsense ? 0 : 1; }

inline void add(Tally& t, const InstanceResult& r) {
  ++t.n;
  if (r.delivered) ++t.delivered;
  bool all = true;
  for (Family f : {Family::commonsense, Family::hard}) {
    std::size_t applicable = 0, passed = 0;
    for (const auto& id : r.applicable) {
      if (id.family != f) continue;
      ++applicable;
      if (r.delivered && r.report.passed(id.name)) ++passed;
    }
    auto& fam = t.fam[family_index(f)];
    fam.applicable += applicable;
    fam.passed += passed;
    const bool family_ok = applicable == 0 ? r.delivered : passed == applicable;
    if (family_ok) ++fam.instances_passing;
    // A family with nothing applicable counts as a full pass for delivered plans.
    fam.scaled_fraction_sum += applicable == 0 ? (r.delivered ? kScale : 0) : kScale / applicable * passed;
    all = all && family_ok;
  }
  if (all) ++t.fpr;
}

inline double ratio(std::uint64_t a, std::uint64_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); }

inline RateBlock finish(const Tally& t) {
  RateBlock b;
  b.n_instances = t.n;
  b.delivered = t.delivered;
  b.delivery_rate = ratio(t.delivered, t.n);
  for (Family f : {Family::commonsense, Family::hard}) {
    const auto& fam = t.fam[family_index(f)];
    FamilyRates& out = f == Family::commonsense ? b.commonsense : b.hard;
    out.micro = ratio(fam.scaled_fraction_sum, kScale * t.n);
    out.micro_pooled = ratio(fam.passed, fam.applicable);
    out.macro = ratio(static_cast<std::uint64_t>(fam.instances_passing) * kScale, kScale * t.n);
    out.passed_checks = fam.passed;
    out.applicable_checks = fam.applicable;
    out.instances_passing = fam.instances_passing;
  }
  b.fpr = ratio(static_cast<std::uint64_t>(t.fpr) * kScale, kScale * t.n);
  b.fpr_count = t.fpr;
  return b;
}

}  // namespace metrics_detail

// Undelivered instances fail every applicable check; all rate denominators are
// the instance count. Integer tallies make the result order-independent.
inline BenchmarkReport evaluate(const std::vector<InstanceResult>& results) {
  using namespace metrics_detail;
  if (results.empty()) throw ValidationError("cannot evaluate an empty batch");
  Tally all;
  std::map<Tier, Tally> tiers{{Tier::easy, {}}, {Tier::medium, {}}, {Tier::hard, {}}};
  BenchmarkReport rep;
  for (const auto& id : table_order()) rep.per_constraint.push_back(ConstraintRow{id, {}, 0, 0});
  for (const auto& r : results) {
    add(all, r);
    add(tiers[r.tier], r);
    for (auto& row : rep.per_constraint) {
      if (std::find(r.applicable.begin(), r.applicable.end(), row.id) == r.applicable.end()) continue;
      const bool ok = r.delivered && r.report.passed(row.id.name);
      ++row.applicable;
      row.passed += ok;
      auto& cell = row.by_tier[r.tier];
      ++cell.second;
      cell.first += ok;
    }
  }
  rep.overall = finish(all);
  for (const auto& [tier, t] : tiers) rep.by_tier[tier] = finish(t);
  return rep;
}

inline InstanceResult instance_result(const StructuredQuery& q, bool delivered, const ConstraintReport& report) {
  return InstanceResult{q.tier(), delivered, applicable_constraints(q), report};
}

// ---------------------------------------------------------------------------
// Output

inline std::string percent(double x) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * x);
  return buf;
}

inline std::string percent(const std::optional<double>& x) { return x ? percent(*x) : "--"; }

inline nlohmann::json to_json(const FamilyRates& f) {
  return nlohmann::json{{"micro", f.micro},
                        {"micro_pooled", f.micro_pooled},
                        {"macro", f.macro},
                        {"passed_checks", f.passed_checks},
                        {"applicable_checks", f.applicable_checks},
                        {"instances_passing", f.instances_passing}};
}

inline nlohmann::json to_json(const RateBlock& b) {
  return nlohmann::json{{"n_instances", b.n_instances},     {"delivered", b.delivered},
                        {"delivery_rate", b.delivery_rate}, {"commonsense", to_json(b.commonsense)},
                        {"hard", to_json(b.hard)},          {"fpr", b.fpr},
                        {"fpr_count", b.fpr_count}};
}

inline nlohmann::json to_json(const BenchmarkReport& r) {
  nlohmann::json tiers;
  for (const auto& [t, b] : r.by_tier) tiers[std::string(to_string(t))] = to_json(b);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.per_constraint) {
    nlohmann::json cells;
    for (Tier t : {Tier::easy, Tier::medium, Tier::hard}) {
      auto x = row.rate(t);
      cells[std::string(to_string(t))] = x ? nlohmann::json(*x) : nlohmann::json(nullptr);
    }
    auto x = row.rate();
    rows.push_back({{"family", std::string(to_string(row.id.family))},
                    {"name", row.id.name},
                    {"passed", row.passed},
                    {"applicable", row.applicable},
                    {"rate", x ? nlohmann::json(*x) : nlohmann::json(nullptr)},
                    {"by_tier", cells}});
  }
  return nlohmann::json{
      {"notes",
       "undelivered instances fail every applicable check; every rate is over all instances; micro is the mean "
       "per-instance pass fraction, micro_pooled pools checks across instances; non-applicable constraints are "
       "excluded (shown as null)"},
      {"overall", to_json(r.overall)},
      {"by_tier", tiers},
      {"per_constraint", rows}};
}

inline std::string summary_line(const RateBlock& b) {
  std::ostringstream os;
  os << "delivery " << percent(b.delivery_rate) << " | commonsense micro " << percent(b.commonsense.micro)
     << " macro " << percent(b.commonsense.macro) << " | hard micro " << percent(b.hard.micro) << " macro "
     << percent(b.hard.macro) << " | FPR " << percent(b.fpr) << " (n=" << b.n_instances << ")";
  return os.str();
}

inline std::string text_table(const BenchmarkReport& r) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-32s %8s %8s %8s %8s\n", "constraint", "easy", "medium", "hard", "all");
  os << line;
  std::optional<Family> current;
  for (const auto& row : r.per_constraint) {
    if (current != row.id.family) {
      current = row.id.family;
      os << "-- " << to_string(row.id.family) << "\n";
    }
    std::snprintf(line, sizeof line, "%-32s %8s %8s %8s %8s\n", row.id.name.c_str(),
                  percent(row.rate(Tier::easy)).c_str(), percent(row.rate(Tier::medium)).c_str(),
                  percent(row.rate(Tier::hard)).c_str(), percent(row.rate()).c_str());
    os << line;
  }
  os << "-- summary\n";
  for (const auto& [t, b] : r.by_tier)
    if (b.n_instances > 0) os << to_string(t) << ": " << summary_line(b) << "\n";
  os << "all: " << summary_line(r.overall) << "\n";
  return os.str();
}

inline std::string csv_table(const BenchmarkReport& r) {
  std::ostringstream os;
  os << "family,constraint,easy,medium,hard,all\n";
  auto cell = [](const std::optional<double>& x) { return x ? format_double(*x) : std::string(); };
  for (const auto& row : r.per_constraint)
    os << to_string(row.id.family) << "," << row.id.name << "," << cell(row.rate(Tier::easy)) << ","
       << cell(row.rate(Tier::medium)) << "," << cell(row.rate(Tier::hard)) << "," << cell(row.rate()) << "\n";
  os << "summary,metric,easy,medium,hard,all\n";
  auto metric = [&](const char* name, auto get) {
    os << "summary," << name;
    for (Tier t : {Tier::easy, Tier::medium, Tier::hard}) os << "," << format_double(get(r.by_tier.at(t)));
    os << "," << format_double(get(r.overall)) << "\n";
  };
  metric("delivery_rate", [](const RateBlock& b) { return b.delivery_rate; });
  metric("commonsense_micro", [](const RateBlock& b) { return b.commonsense.micro; });
  metric("commonsense_macro", [](const RateBlock& b) { return b.commonsense.macro; });
  metric("hard_micro", [](const RateBlock& b) { return b.hard.micro; });
  metric("hard_macro", [](const RateBlock& b) { return b.hard.macro; });
  metric("fpr", [](const RateBlock& b) { return b.fpr; });
  return os.str();
}

}  // namespace triflow
