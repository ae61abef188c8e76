#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "triflow/triflow.hpp"

namespace support {

using namespace triflow;

inline const Date kDay0{2024, 5, 1};

// Two cities, two options for every slot class. Alpha is the only destination
// and has enough restaurants for nine distinct meals.
inline SandboxTables micro_tables() {
  SandboxTables t;
  t.cities = {{"Home", 40.0, -100.0}, {"Alpha", 40.0, -97.0}};
  t.flights = {
      {"F1", "Home", "Alpha", kDay0, 480, 570, false, 10000},
      {"F2", "Alpha", "Home", kDay0.plus_days(2), 1080, 1170, false, 12000},
      {"F3", "Alpha", "Home", kDay0, 600, 690, false, 9000},  // wrong day for a return leg
  };
  t.distances = {
      {"Home", "Alpha", 300, 225, 30000, 15000},
      {"Alpha", "Home", 300, 225, 30000, 15000},
  };
  t.accommodations = {
      {"Alpha Inn", "Alpha", 8000, RoomType::private_room, {}, 1, 2},
      {"Alpha Lodge", "Alpha", 5000, RoomType::shared_room, {HouseRule::no_pets}, 2, 4},
      {"Home Rooms", "Home", 4000, RoomType::entire_room, {}, 1, 4},
  };
  t.restaurants = {
      {"Diner", "Alpha", 1500, {"american"}},   {"Trattoria", "Alpha", 2500, {"italian"}},
      {"Thai Palace", "Alpha", 2000, {"thai"}}, {"Noodle Bar", "Alpha", 1200, {"chinese"}},
      {"Bistro", "Alpha", 3000, {"french"}},    {"Taqueria", "Alpha", 1100, {"mexican"}},
      {"Harbor Fish", "Alpha", 2800, {"seafood"}}, {"Corner Cafe", "Alpha", 900, {"cafe"}},
      {"Alpha Deli", "Alpha", 1000, {"deli"}},  {"Alpha Grill", "Alpha", 2200, {"bbq"}},
      {"Home Cafe", "Home", 1000, {"cafe"}},    {"Home Grill", "Home", 2200, {"bbq"}},
  };
  t.attractions = {
      {"Alpha Museum", "Alpha", 40.0, -97.01},
      {"Alpha Park", "Alpha", 40.01, -97.0},
      {"Alpha Castle", "Alpha", 40.02, -97.02},
      {"Home Zoo", "Home", 40.0, -100.01},
  };
  return t;
}

inline StructuredQuery micro_query(bool with_hard, Cents budget = 90000) {
  StructuredQuery q;
  q.origin = "Home";
  q.destinations = {"Alpha"};
  q.dates = {kDay0, kDay0.plus_days(1), kDay0.plus_days(2)};
  q.party_size = 2;
  q.budget = budget;
  if (with_hard) {
    q.hard.room_rule_needs = {RoomNeed::pets};
    q.hard.cuisines = {"thai"};
    q.hard.room_type = RoomType::private_room;
    q.hard.transport_bans = {TransportMode::self_drive};
  }
  return q;
}

// Every record of the dataset, unfiltered. Lets checkers price anything a plan references.
inline RetrievedSubset full_subset(const SandboxDataset& d) {
  RetrievedSubset s;
  for (const auto& c : d.cities()) s.cities.emplace(c.name, c);
  for (const auto& f : d.flights()) s.flights_by_leg[FlightLegKey{f.origin, f.destination, f.date}].push_back(f);
  for (const auto& e : d.distances()) s.ground_by_leg.emplace(LegKey{e.origin, e.destination}, e);
  for (const auto& a : d.accommodations()) s.accommodations_by_city[a.city].push_back(a);
  for (const auto& r : d.restaurants()) s.restaurants_by_city[r.city].push_back(r);
  for (const auto& a : d.attractions()) s.attractions_by_city[a.city].push_back(a);
  return s;
}

inline Itinerary micro_skeleton() {
  Itinerary it;
  for (int i = 0; i < 3; ++i) {
    DayPlan d;
    d.day_index = i;
    d.date = kDay0.plus_days(i);
    d.city = i == 0 ? "Home" : "Alpha";
    if (i == 0) d.to_city = "Alpha";
    if (i == 2) d.to_city = "Home";
    it.days.push_back(d);
  }
  return it;
}

inline constexpr int kMicroBits = 12;

// Plan number `bits` of the 4096-plan space: bit k selects option A or B of slot k.
inline Itinerary micro_plan(unsigned bits) {
  auto b = [&](int k) { return ((bits >> k) & 1u) != 0; };
  Itinerary it = micro_skeleton();
  auto& d0 = it.days[0];
  auto& d1 = it.days[1];
  auto& d2 = it.days[2];
  auto P = [](const char* name, const char* city) { return PlaceRef{name, city}; };

  d0.transport = b(0) ? TransportLeg{TransportMode::self_drive, "", "Home", "Alpha", 15000}
                      : TransportLeg{TransportMode::flight, "F1", "Home", "Alpha", 20000};
  if (b(1)) d1.transport = TransportLeg{TransportMode::taxi, "", "Alpha", "Home", 60000};
  d2.transport = b(2) ? TransportLeg{TransportMode::flight, "F3", "Alpha", "Home", 18000}
                      : TransportLeg{TransportMode::taxi, "", "Alpha", "Home", 60000};
  d0.accommodation = b(3) ? P("Alpha Lodge", "Alpha") : P("Alpha Inn", "Alpha");
  d1.accommodation = b(4) ? P("Alpha Lodge", "Alpha") : P("Alpha Inn", "Alpha");
  if (!b(5)) d0.breakfast = P("Home Cafe", "Home");
  d0.lunch = b(6) ? P("Corner Cafe", "Alpha") : P("Diner", "Alpha");
  d0.dinner = b(7) ? P("Diner", "Alpha") : P("Thai Palace", "Alpha");
  d1.breakfast = b(8) ? P("Home Cafe", "Home") : P("Noodle Bar", "Alpha");
  d1.lunch = b(9) ? P("Ghost Kitchen", "Alpha") : P("Trattoria", "Alpha");
  d1.dinner = P("Bistro", "Alpha");
  d2.breakfast = P("Taqueria", "Alpha");
  d2.lunch = P("Harbor Fish", "Alpha");
  d2.dinner = P("Home Grill", "Home");
  d0.attractions = {b(10) ? P("Alpha Park", "Alpha") : P("Alpha Museum", "Alpha")};
  d1.attractions = {b(11) ? P("Alpha Castle", "Alpha") : P("Alpha Park", "Alpha")};
  d2.attractions = {P("Alpha Castle", "Alpha")};
  return it;
}

// Every commonsense and hard constraint of the hard micro query holds.
inline Itinerary valid_micro_plan() {
  Itinerary it = support::micro_skeleton();
  auto& d = it.days;
  d[0].transport = TransportLeg{TransportMode::flight, "F1", "Home", "Alpha", 20000};
  d[2].transport = TransportLeg{TransportMode::flight, "F2", "Alpha", "Home", 24000};
  d[0].accommodation = d[1].accommodation = PlaceRef{"Alpha Inn", "Alpha"};
  d[0].breakfast = PlaceRef{"Alpha Deli", "Alpha"};
  d[0].lunch = PlaceRef{"Diner", "Alpha"};
  d[0].dinner = PlaceRef{"Thai Palace", "Alpha"};
  d[1].breakfast = PlaceRef{"Noodle Bar", "Alpha"};
  d[1].lunch = PlaceRef{"Trattoria", "Alpha"};
  d[1].dinner = PlaceRef{"Bistro", "Alpha"};
  d[2].breakfast = PlaceRef{"Taqueria", "Alpha"};
  d[2].lunch = PlaceRef{"Harbor Fish", "Alpha"};
  d[2].dinner = PlaceRef{"Alpha Grill", "Alpha"};
  d[0].attractions = {PlaceRef{"Alpha Museum", "Alpha"}};
  d[1].attractions = {PlaceRef{"Alpha Park", "Alpha"}};
  d[2].attractions = {PlaceRef{"Alpha Castle", "Alpha"}};
  return it;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("triflow-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
}

// A seeded synthetic sandbox with a matching request batch.
struct Bench {
  SandboxDataset dataset;
  std::vector<UserRequest> requests;
};

inline Bench make_bench(std::uint64_t seed, std::size_t n) {
  Bench b;
  b.dataset = generate_synthetic(seed);
  b.requests = generate_requests(b.dataset, n, seed);
  return b;
}

}  // namespace support
