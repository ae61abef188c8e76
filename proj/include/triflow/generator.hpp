#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "triflow/error.hpp"
#include "triflow/sandbox.hpp"

namespace triflow {

struct SyntheticParams {
  int n_cities = 5;
  int n_flights_per_pair = 2;  // per ordered city pair per calendar date
  int n_accommodations_per_city = 8;
  int n_restaurants_per_city = 12;
  int n_attractions_per_city = 6;
  Date first_date{2024, 3, 1};
  int n_dates = 14;
};

// Fixed generator constants. Distances are Euclidean over degrees times 100 km.
inline constexpr double km_per_degree = 100.0;
inline constexpr Cents taxi_cents_per_km = 100;
inline constexpr Cents self_drive_cents_per_km = 50;

inline const std::vector<std::string>& cuisine_vocabulary() {
  static const std::vector<std::string> v{"american", "bbq",    "cafe",   "chinese", "french",  "indian",
                                          "italian",  "japanese", "mediterranean", "mexican", "seafood",
                                          "thai",     "vegan"};
  return v;
}

inline const std::vector<std::string>& attraction_kinds() {
  static const std::vector<std::string> v{
      "Art Museum",  "History Museum", "Botanical Garden", "Central Park",  "Beach",         "Zoo",
      "Aquarium",    "Science Center", "Old Town",         "Cathedral",     "Harbor",        "Night Market",
      "Observatory", "Castle",         "Waterfront Park",  "Music Hall",    "Sculpture Garden", "Nature Reserve"};
  return v;
}

namespace gen_detail {

inline const std::vector<std::string> city_names{
    "Ashford",   "Brookvale", "Cedar Falls", "Dunmore",   "Eastwick", "Fairhaven", "Glenrock",  "Harborview",
    "Ironwood",  "Juniper",   "Kingsport",   "Lakeside",  "Maplewood", "Northgate", "Oakridge",  "Pinecrest",
    "Queensbury", "Riverton", "Stonebridge", "Thornbury", "Umberlee", "Valewood",  "Westfield", "Yarrow"};

inline const std::vector<std::string> lodging_adjectives{"Cozy", "Grand", "Quiet", "Sunny", "Urban",
                                                         "Rustic", "Modern", "Royal", "Garden", "Hilltop"};
inline const std::vector<std::string> lodging_nouns{"Loft", "Suite", "Inn", "Studio", "Lodge", "Retreat", "Flat"};
inline const std::vector<std::string> restaurant_adjectives{"Golden", "Blue",  "Red",    "Lucky", "Little",
                                                            "Old",    "Happy", "Silver", "Green", "Wild"};
inline const std::vector<std::string> restaurant_nouns{"Spoon", "Fork", "Table", "Kitchen", "Bistro",
                                                       "Grill", "Pot",  "Garden", "Oven",   "Corner"};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }
  // Inclusive range.
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double real(double lo, double hi) { return lo + (static_cast<double>(next() >> 11) * 0x1.0p-53) * (hi - lo); }
  bool chance(double p) { return real(0.0, 1.0) < p; }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(integer(0, static_cast<std::int64_t>(v.size()) - 1))];
  }

 private:
  std::mt19937_64 engine_;
};

inline double round_to(double v, double scale) { return std::round(v * scale) / scale; }

inline std::string city_name(std::size_t i) {
  if (i < city_names.size()) return city_names[i];
  return city_names[i % city_names.size()] + std::to_string(i / city_names.size() + 1);
}

}  // namespace gen_detail

inline double euclidean_km(double lat1, double lon1, double lat2, double lon2) {
  return std::hypot(lat1 - lat2, lon1 - lon2) * km_per_degree;
}

inline void validate_params(const SyntheticParams& p) {
  if (p.n_cities < 1 || p.n_accommodations_per_city < 1 || p.n_restaurants_per_city < 1 ||
      p.n_attractions_per_city < 1 || p.n_dates < 1)
    throw ValidationError("synthetic sandbox parameters must be >= 1");
  if (p.n_flights_per_pair < 0) throw ValidationError("flights per pair must be >= 0");
  if (!p.first_date.valid()) throw ValidationError("invalid first date");
}

// Pure function of (seed, params); output is integrity-clean.
inline SandboxDataset generate_synthetic(std::uint64_t seed, const SyntheticParams& params = {}) {
  using namespace gen_detail;
  validate_params(params);
  Rng rng(seed);
  SandboxTables t;

  // Cities at least one degree apart.
  for (int i = 0; i < params.n_cities; ++i) {
    City c{city_name(static_cast<std::size_t>(i)), 0, 0};
    for (int attempt = 0;; ++attempt) {
      c.latitude = round_to(rng.real(25.0, 48.0), 100.0);
      c.longitude = round_to(rng.real(-122.0, -70.0), 100.0);
      const bool far = std::all_of(t.cities.begin(), t.cities.end(), [&](const City& o) {
        return std::hypot(o.latitude - c.latitude, o.longitude - c.longitude) >= 1.0;
      });
      if (far || attempt > 1000) break;
    }
    t.cities.push_back(c);
  }

  for (const auto& a : t.cities) {
    for (const auto& b : t.cities) {
      if (a.name == b.name) continue;
      const double km = std::round(euclidean_km(a.latitude, a.longitude, b.latitude, b.longitude));
      t.distances.push_back(DistanceEntry{a.name, b.name, km, std::round(km * 0.75),
                                          static_cast<Cents>(km) * taxi_cents_per_km,
                                          static_cast<Cents>(km) * self_drive_cents_per_km});
    }
  }

  int flight_seq = 0;
  for (int day = 0; day < params.n_dates; ++day) {
    const Date date = params.first_date.plus_days(day);
    for (const auto& a : t.cities) {
      for (const auto& b : t.cities) {
        if (a.name == b.name) continue;
        const double km = euclidean_km(a.latitude, a.longitude, b.latitude, b.longitude);
        for (int k = 0; k < params.n_flights_per_pair; ++k) {
          Flight f;
          char id[16];
          std::snprintf(id, sizeof id, "F%06d", ++flight_seq);
          f.id = id;
          f.origin = a.name;
          f.destination = b.name;
          f.date = date;
          f.depart = static_cast<int>(rng.integer(6 * 60, 22 * 60 - 1));
          const int duration = 45 + static_cast<int>(std::round(km * 60.0 / 800.0));
          f.overnight = f.depart + duration >= 1440;
          f.arrive = (f.depart + duration) % 1440;
          f.price = (4000 + static_cast<Cents>(km * rng.real(6.0, 14.0))) / 100 * 100;
          t.flights.push_back(std::move(f));
        }
      }
    }
  }

  const std::vector<HouseRule> all_rules{HouseRule::no_smoking, HouseRule::no_parties,
                                         HouseRule::no_children_under_10, HouseRule::no_pets,
                                         HouseRule::no_visitors};
  const std::vector<RoomType> room_types{RoomType::entire_room, RoomType::private_room, RoomType::shared_room};

  for (const auto& c : t.cities) {
    std::set<std::string> used;
    for (int i = 0; i < params.n_accommodations_per_city; ++i) {
      Accommodation a;
      std::string base = rng.pick(lodging_adjectives) + " " + rng.pick(lodging_nouns) + " " + c.name;
      a.name = base;
      for (int n = 2; used.count(a.name); ++n) a.name = base + " " + std::to_string(n);
      used.insert(a.name);
      a.city = c.name;
      a.price_per_night = rng.integer(60, 300) * 100;
      a.room_type = rng.pick(room_types);
      for (auto r : all_rules)
        if (rng.chance(0.2)) a.house_rules.insert(r);
      const double u = rng.real(0.0, 1.0);
      a.minimum_nights = u < 0.6 ? 1 : (u < 0.85 ? 2 : 3);
      a.max_occupancy = static_cast<int>(rng.integer(1, 6));
      t.accommodations.push_back(std::move(a));
    }

    used.clear();
    for (int i = 0; i < params.n_restaurants_per_city; ++i) {
      Restaurant r;
      std::string base = rng.pick(restaurant_adjectives) + " " + rng.pick(restaurant_nouns);
      r.name = base;
      for (int n = 2; used.count(r.name); ++n) r.name = base + " " + std::to_string(n);
      used.insert(r.name);
      r.city = c.name;
      r.avg_cost = rng.integer(16, 120) * 50;
      const auto n_cuisines = rng.integer(1, 3);
      while (static_cast<std::int64_t>(r.cuisines.size()) < n_cuisines) r.cuisines.insert(rng.pick(cuisine_vocabulary()));
      t.restaurants.push_back(std::move(r));
    }

    auto kinds = attraction_kinds();
    for (std::size_t i = kinds.size(); i > 1; --i)
      std::swap(kinds[i - 1], kinds[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(i) - 1))]);
    for (int i = 0; i < params.n_attractions_per_city; ++i) {
      Attraction a;
      const auto& kind = kinds[static_cast<std::size_t>(i) % kinds.size()];
      a.name = c.name + " " + kind;
      if (static_cast<std::size_t>(i) >= kinds.size()) a.name += " " + std::to_string(i / kinds.size() + 1);
      a.city = c.name;
      a.latitude = round_to(c.latitude + rng.real(-0.1, 0.1), 10000.0);
      a.longitude = round_to(c.longitude + rng.real(-0.1, 0.1), 10000.0);
      t.attractions.push_back(std::move(a));
    }
  }

  return SandboxDataset(std::move(t));
}

}  // namespace triflow
