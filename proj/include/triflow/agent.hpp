#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "triflow/error.hpp"
#include "triflow/types.hpp"

namespace triflow {

enum class Stage { retrieval, planning, governance };

inline std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::retrieval: return "retrieval";
    case Stage::planning: return "planning";
    case Stage::governance: return "governance";
  }
  return "?";
}

struct StageRole {
  Stage stage = Stage::retrieval;
  double temperature = 0.0;
};

struct StageTemperatures {
  double retrieval = 0.0;
  double planning = 0.3;
  double governance = 0.6;

  StageRole role(Stage s) const {
    switch (s) {
      case Stage::retrieval: return {s, retrieval};
      case Stage::planning: return {s, planning};
      case Stage::governance: return {s, governance};
    }
    return {s, 0.0};
  }
};

struct Suggestion {
  std::size_t choice = 0;  // index into the candidate list; untrusted, may be out of range
  std::optional<double> confidence;
  std::string rationale;
};

// Sampling temperature mapped to a top-k window: 0.0 -> 1, 0.3 -> 2, 0.6 -> 3.
inline std::size_t window_for_temperature(double temperature) {
  if (!(temperature > 0.0)) return 1;
  return 1 + static_cast<std::size_t>(std::lround(temperature / 0.3));
}

inline Suggestion mock_suggest(const StageRole& role, std::string_view context, std::size_t n_candidates,
                               std::uint64_t seed) {
  const std::size_t k = std::min(window_for_temperature(role.temperature), n_candidates);
  const std::uint64_t h = mix_seed(seed, fnv1a(context, fnv1a(to_string(role.stage))));
  const std::size_t pick = static_cast<std::size_t>(h % k);
  return Suggestion{pick, 1.0 / static_cast<double>(k), "mock top-" + std::to_string(k) + " pick"};
}

// Keyword extraction used for free-text requests. Maps words onto the
// preference vocabulary (cuisines, attraction kinds, room types).
inline std::vector<std::string> rule_based_tags(std::string_view text) {
  static const std::map<std::string, std::string, std::less<>> lexicon{
      {"american", "american"}, {"bbq", "bbq"},           {"barbecue", "bbq"},        {"cafe", "cafe"},
      {"coffee", "cafe"},       {"chinese", "chinese"},   {"french", "french"},       {"indian", "indian"},
      {"italian", "italian"},   {"pizza", "italian"},     {"pasta", "italian"},       {"japanese", "japanese"},
      {"sushi", "japanese"},    {"mediterranean", "mediterranean"},                   {"mexican", "mexican"},
      {"tacos", "mexican"},     {"seafood", "seafood"},   {"fish", "seafood"},        {"thai", "thai"},
      {"vegan", "vegan"},       {"vegetarian", "vegan"},  {"museum", "museum"},       {"museums", "museum"},
      {"art", "art"},           {"history", "history"},   {"historic", "history"},    {"garden", "garden"},
      {"gardens", "garden"},    {"park", "park"},         {"parks", "park"},          {"fun", "park"},
      {"beach", "beach"},       {"beaches", "beach"},     {"zoo", "zoo"},             {"aquarium", "aquarium"},
      {"science", "science"},   {"market", "market"},     {"markets", "market"},      {"shopping", "market"},
      {"nightlife", "market"},  {"harbor", "harbor"},     {"waterfront", "waterfront"}, {"castle", "castle"},
      {"music", "music"},       {"concert", "music"},     {"nature", "nature"},       {"hiking", "nature"},
      {"observatory", "observatory"}, {"stars", "observatory"}, {"cathedral", "cathedral"},
      {"church", "cathedral"},  {"local", "local"}};
  std::vector<std::string> out;
  for (const auto& w : words(text)) {
    auto it = lexicon.find(w);
    if (it == lexicon.end()) continue;
    if (std::find(out.begin(), out.end(), it->second) == out.end()) out.push_back(it->second);
  }
  return out;
}

// Suggestion interface shared by all stages. Output is untrusted: callers
// validate every choice before using it.
class Agent {
 public:
  virtual ~Agent() = default;

  Suggestion suggest(const StageRole& role, std::string_view context, std::span<const std::string> candidates,
                     std::uint64_t seed) {
    if (candidates.empty()) throw ContractViolation("agent suggest called with no candidates");
    calls_.fetch_add(1, std::memory_order_relaxed);
    return do_suggest(role, context, candidates, seed);
  }

  virtual std::vector<std::string> extract_tags(std::string_view text) {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return rule_based_tags(text);
  }

  int calls() const { return calls_.load(std::memory_order_relaxed); }

 protected:
  virtual Suggestion do_suggest(const StageRole& role, std::string_view context,
                                std::span<const std::string> candidates, std::uint64_t seed) = 0;

 private:
  std::atomic<int> calls_{0};
};

class MockAgent : public Agent {
 protected:
  Suggestion do_suggest(const StageRole& role, std::string_view context, std::span<const std::string> candidates,
                        std::uint64_t seed) override {
    return mock_suggest(role, context, candidates.size(), seed);
  }
};

}  // namespace triflow
