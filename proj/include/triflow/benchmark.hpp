#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "triflow/agent.hpp"
#include "triflow/generator.hpp"
#include "triflow/metrics.hpp"
#include "triflow/orchestrator.hpp"
#include "triflow/planner.hpp"
#include "triflow/request.hpp"
#include "triflow/retrieval.hpp"

namespace triflow {

inline int days_for(Tier t) { return t == Tier::easy ? 3 : (t == Tier::medium ? 5 : 7); }
inline int destinations_for(Tier t) { return t == Tier::easy ? 1 : (t == Tier::medium ? 2 : 3); }

namespace bench_detail {

inline StructuredQuery as_query(const UserRequest& r) {
  return StructuredQuery{r.origin, r.destination_cities, r.dates, r.party_size, r.budget, r.hard, r.preferences,
                         r.raw_text};
}

inline constexpr Cents unlimited_budget = Cents{1} << 50;

// Greedy plan with no budget pressure; nullopt unless everything but the budget passes.
inline std::optional<Cents> reference_cost(const StructuredQuery& query, const SandboxDataset& d) {
  StructuredQuery q = query;
  q.budget = unlimited_budget;
  MockAgent agent;
  try {
    auto s = retrieve_subset(q, d);
    PlannerOptions opts;
    opts.role = StageRole{Stage::planning, 0.0};
    auto r = plan(q, s, agent, opts);
    auto report = check_all(r.itinerary, q, s, d);
    if (!report.all_passed()) return std::nullopt;
    return compute_cost(r.itinerary, q, s).total;
  } catch (const Error&) {
    return std::nullopt;
  }
}

inline std::pair<Date, Date> date_window(const SandboxDataset& d) {
  if (d.flights().empty()) return {Date{2024, 3, 1}, Date{2024, 3, 14}};
  auto [lo, hi] = std::minmax_element(d.flights().begin(), d.flights().end(),
                                      [](const Flight& a, const Flight& b) { return a.date < b.date; });
  return {lo->date, hi->date};
}

}  // namespace bench_detail

// Seeded synthetic requests, rotating easy/medium/hard. Hard constraints are
// only attached when a greedy plan can satisfy them in this sandbox; the budget
// is the greedy plan's cost times U[1.1, 1.5].
inline std::vector<UserRequest> generate_requests(const SandboxDataset& d, std::size_t n, std::uint64_t seed) {
  using namespace bench_detail;
  if (d.cities().size() < 2) throw ValidationError("need at least two cities to generate requests");
  std::mt19937_64 rng(seed);
  auto uniform = [&](std::size_t k) { return static_cast<std::size_t>(std::uniform_int_distribution<std::size_t>(0, k - 1)(rng)); };
  const auto [first, last] = date_window(d);

  std::vector<std::string> tag_pool = cuisine_vocabulary();
  for (const char* t : {"museum", "art", "history", "garden", "park", "beach", "zoo", "aquarium", "science", "market",
                        "harbor", "castle", "music", "nature", "observatory", "cathedral"})
    tag_pool.emplace_back(t);

  std::vector<UserRequest> out;
  for (std::size_t i = 0; i < n; ++i) {
    const Tier tier = static_cast<Tier>(i % 3);
    const int days = days_for(tier);
    const auto n_dest = std::min<std::size_t>(static_cast<std::size_t>(destinations_for(tier)), d.cities().size() - 1);

    UserRequest r;
    std::vector<std::string> names;
    for (const auto& c : d.cities()) names.push_back(c.name);
    std::shuffle(names.begin(), names.end(), rng);
    r.origin = names[0];
    r.destination_cities.assign(names.begin() + 1, names.begin() + 1 + static_cast<std::ptrdiff_t>(n_dest));

    const int span = std::max(0, first.days_until(last) - (days - 1));
    const Date start = first.plus_days(static_cast<int>(uniform(static_cast<std::size_t>(span) + 1)));
    for (int k = 0; k < days; ++k) r.dates.push_back(start.plus_days(k));
    r.party_size = 1 + static_cast<int>(uniform(4));
    for (std::size_t k = uniform(3); k > 0; --k) {
      const auto& tag = tag_pool[uniform(tag_pool.size())];
      if (std::find(r.preferences.begin(), r.preferences.end(), tag) == r.preferences.end())
        r.preferences.push_back(tag);
    }

    // Candidate hard constraints of each kind.
    auto pick_need = [&] { return static_cast<RoomNeed>(uniform(5)); };
    auto pick_type = [&] { return static_cast<RoomType>(uniform(3)); };
    auto pick_cuisine = [&]() -> std::string {
      std::vector<std::string> served;
      for (const auto& rest : d.restaurants())
        if (std::find(r.destination_cities.begin(), r.destination_cities.end(), rest.city) != r.destination_cities.end())
          for (const auto& c : rest.cuisines) served.push_back(to_lower(c));
      std::sort(served.begin(), served.end());
      served.erase(std::unique(served.begin(), served.end()), served.end());
      return served.empty() ? std::string("italian") : served[uniform(served.size())];
    };
    auto add_kind = [&](HardConstraintSet& h, std::size_t kind) {
      if (kind == 0) h.room_rule_needs.insert(pick_need());
      if (kind == 1) h.cuisines.insert(pick_cuisine());
      if (kind == 2) h.room_type = pick_type();
    };

    const std::size_t n_kinds = tier == Tier::easy ? 0 : (tier == Tier::medium ? 1 : 2);
    std::optional<Cents> cost;
    for (int attempt = 0; attempt < 12 && !cost; ++attempt) {
      HardConstraintSet h;
      std::vector<std::size_t> kinds{0, 1, 2};
      std::shuffle(kinds.begin(), kinds.end(), rng);
      // Later attempts drop constraints so that every request stays plannable.
      const std::size_t want = attempt < 8 ? n_kinds : (attempt < 10 ? std::min<std::size_t>(n_kinds, 1) : 0);
      for (std::size_t k = 0; k < want; ++k) add_kind(h, kinds[k]);
      if (tier == Tier::hard && attempt < 10)
        h.transport_bans.insert(uniform(2) == 0 ? TransportMode::flight : TransportMode::self_drive);
      r.hard = h;
      cost = reference_cost(as_query(r), d);
    }
    const double factor = std::uniform_real_distribution<double>(1.1, 1.5)(rng);
    r.budget = cost ? static_cast<Cents>(std::llround(static_cast<double>(*cost) * factor)) : 100000000;
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Batch runs

struct BatchItem {
  std::size_t index = 0;
  StructuredQuery query;  // decomposed, or the raw request fields when decomposition failed
  std::optional<PlanOutcome> outcome;
  std::string error;
};

inline BatchItem run_one(const UserRequest& r, std::size_t index, const SandboxDataset& d, PipelineConfig cfg) {
  BatchItem item;
  item.index = index;
  item.query = bench_detail::as_query(r);
  cfg.seed = mix_seed(cfg.seed, index);
  auto agent = make_agent(cfg.agent);
  try {
    auto q = decompose_query(r, d, *agent);
    item.query = q;
    item.outcome = run_pipeline_with(q, d, cfg, *agent);
  } catch (const std::exception& e) {
    item.error = e.what();
  }
  return item;
}

// Results are ordered by instance index whatever the number of workers.
inline std::vector<BatchItem> run_batch(const std::vector<UserRequest>& requests, const SandboxDataset& d,
                                        const PipelineConfig& cfg, unsigned jobs = 1) {
  std::vector<BatchItem> items(requests.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < requests.size(); i = next.fetch_add(1))
      items[i] = run_one(requests[i], i, d, cfg);
  };
  jobs = std::max(1u, jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return items;
}

inline BenchmarkReport evaluate_batch(const std::vector<BatchItem>& items) {
  std::vector<InstanceResult> results;
  for (const auto& it : items) {
    const bool delivered = it.outcome && it.outcome->delivered();
    results.push_back(instance_result(it.query, delivered, delivered ? it.outcome->final_report : ConstraintReport{}));
  }
  return evaluate(results);
}

// Per-instance lines for the report file; no timings, so reruns are byte-identical.
inline nlohmann::json batch_instances_json(const std::vector<BatchItem>& items) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& it : items) {
    nlohmann::json j{{"index", it.index}, {"tier", std::string(to_string(it.query.tier()))}};
    if (it.outcome) {
      std::vector<std::string> failing;
      for (const auto& r : it.outcome->final_report.results)
        if (!r.passed) failing.push_back(r.id.name);
      j["delivered"] = it.outcome->delivered();
      j["all_passed"] = it.outcome->final_report.all_passed();
      j["failing"] = failing;
      j["cost"] = it.outcome->cost.total;
      j["budget"] = it.query.budget;
      j["governance_iterations"] = it.outcome->trace.iterations.size();
      j["recomputes"] = it.outcome->recomputes;
    } else {
      j["delivered"] = false;
      j["error"] = it.error;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

inline std::vector<UserRequest> read_requests_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read requests " + path);
  std::vector<UserRequest> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError(path, no, "not valid JSON");
    try {
      out.push_back(request_from_json(j));
    } catch (const ValidationError& e) {
      throw ParseError(path, no, e.what());
    }
  }
  return out;
}

inline void write_requests_jsonl(const std::vector<UserRequest>& requests, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& r : requests) out << to_json(r).dump() << "\n";
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace triflow
