#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "triflow/itinerary.hpp"
#include "triflow/types.hpp"

namespace triflow {

inline constexpr double alignment_weight = 0.7;
inline constexpr double efficiency_weight = 0.3;

struct Candidate {
  SlotValue value;
  std::string name;  // tie-break key
  Cents cost = 0;
  std::vector<std::string> tags;
  double alignment = 0;
  double efficiency = 0;
  double combined = 0;
};

// Fraction of preference tags matched by the candidate's tags. With no
// preferences nothing can be misaligned, so the score is 1.
inline double alignment_score(const std::vector<std::string>& tags, const std::vector<std::string>& preferences) {
  if (preferences.empty()) return 1.0;
  std::size_t hit = 0;
  for (const auto& p : preferences)
    if (std::find(tags.begin(), tags.end(), p) != tags.end()) ++hit;
  return static_cast<double>(hit) / static_cast<double>(preferences.size());
}

// Min-max normalized inverse cost within the pool; scale-invariant.
inline void score_candidates(std::vector<Candidate>& pool, const std::vector<std::string>& preferences) {
  if (pool.empty()) return;
  const auto [lo, hi] = std::minmax_element(pool.begin(), pool.end(),
                                            [](const Candidate& a, const Candidate& b) { return a.cost < b.cost; });
  const Cents min_cost = lo->cost, max_cost = hi->cost;
  for (auto& c : pool) {
    c.alignment = alignment_score(c.tags, preferences);
    c.efficiency = max_cost == min_cost ? 1.0
                                        : static_cast<double>(max_cost - c.cost) / static_cast<double>(max_cost - min_cost);
    c.combined = alignment_weight * c.alignment + efficiency_weight * c.efficiency;
  }
}

// Combined score descending, name ascending on ties.
inline void rank_candidates(std::vector<Candidate>& pool, const std::vector<std::string>& preferences) {
  score_candidates(pool, preferences);
  std::stable_sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
    if (a.combined != b.combined) return a.combined > b.combined;
    return a.name < b.name;
  });
}

}  // namespace triflow
