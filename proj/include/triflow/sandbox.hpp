#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "triflow/csv.hpp"
#include "triflow/date.hpp"
#include "triflow/error.hpp"
#include "triflow/types.hpp"

namespace triflow {

struct City {
  std::string name;
  double latitude = 0;
  double longitude = 0;
  bool operator==(const City&) const = default;
};

struct Flight {
  std::string id;
  std::string origin;
  std::string destination;
  Date date;
  int depart = 0;  // minutes since midnight
  int arrive = 0;  // minutes since midnight; earlier than depart only when overnight
  bool overnight = false;
  Cents price = 0;  // per person
  bool operator==(const Flight&) const = default;
};

struct Accommodation {
  std::string name;
  std::string city;
  Cents price_per_night = 0;  // per room
  RoomType room_type = RoomType::entire_room;
  std::set<HouseRule> house_rules;
  int minimum_nights = 1;
  int max_occupancy = 1;
  bool operator==(const Accommodation&) const = default;
};

struct Restaurant {
  std::string name;
  std::string city;
  Cents avg_cost = 0;  // per person
  std::set<std::string> cuisines;
  bool operator==(const Restaurant&) const = default;
};

struct Attraction {
  std::string name;
  std::string city;
  double latitude = 0;
  double longitude = 0;
  bool operator==(const Attraction&) const = default;
};

struct DistanceEntry {
  std::string origin;
  std::string destination;
  double distance_km = 0;
  double duration_min = 0;
  Cents taxi_cost = 0;        // per person
  Cents self_drive_cost = 0;  // per vehicle
  bool operator==(const DistanceEntry&) const = default;
};

struct SandboxTables {
  std::vector<City> cities;
  std::vector<Flight> flights;
  std::vector<Accommodation> accommodations;
  std::vector<Restaurant> restaurants;
  std::vector<Attraction> attractions;
  std::vector<DistanceEntry> distances;
  bool operator==(const SandboxTables&) const = default;
};

inline std::string pair_key(std::string_view a, std::string_view b) {
  std::string k(a);
  k.push_back('\x1f');
  k.append(b);
  return k;
}

// The global factual space. Immutable once constructed; lookups go through
// primary-key indices built at construction (first occurrence wins on duplicates).
class SandboxDataset {
 public:
  SandboxDataset() = default;
  explicit SandboxDataset(SandboxTables tables) : tables_(std::move(tables)) { build_indices(); }

  const SandboxTables& tables() const { return tables_; }
  const std::vector<City>& cities() const { return tables_.cities; }
  const std::vector<Flight>& flights() const { return tables_.flights; }
  const std::vector<Accommodation>& accommodations() const { return tables_.accommodations; }
  const std::vector<Restaurant>& restaurants() const { return tables_.restaurants; }
  const std::vector<Attraction>& attractions() const { return tables_.attractions; }
  const std::vector<DistanceEntry>& distances() const { return tables_.distances; }

  const City* find_city(std::string_view name) const { return find(cities_, tables_.cities, std::string(name)); }
  const Flight* find_flight(std::string_view id) const { return find(flights_, tables_.flights, std::string(id)); }
  const Accommodation* find_accommodation(std::string_view name, std::string_view city) const {
    return find(accommodations_, tables_.accommodations, pair_key(name, city));
  }
  const Restaurant* find_restaurant(std::string_view name, std::string_view city) const {
    return find(restaurants_, tables_.restaurants, pair_key(name, city));
  }
  const Attraction* find_attraction(std::string_view name, std::string_view city) const {
    return find(attractions_, tables_.attractions, pair_key(name, city));
  }
  const DistanceEntry* find_distance(std::string_view origin, std::string_view destination) const {
    return find(distances_, tables_.distances, pair_key(origin, destination));
  }

  bool operator==(const SandboxDataset& other) const { return tables_ == other.tables_; }

 private:
  using Index = std::unordered_map<std::string, std::size_t>;

  template <typename T>
  static const T* find(const Index& idx, const std::vector<T>& v, const std::string& key) {
    auto it = idx.find(key);
    return it == idx.end() ? nullptr : &v[it->second];
  }

  void build_indices() {
    for (std::size_t i = 0; i < tables_.cities.size(); ++i) cities_.emplace(tables_.cities[i].name, i);
    for (std::size_t i = 0; i < tables_.flights.size(); ++i) flights_.emplace(tables_.flights[i].id, i);
    for (std::size_t i = 0; i < tables_.accommodations.size(); ++i) {
      const auto& a = tables_.accommodations[i];
      accommodations_.emplace(pair_key(a.name, a.city), i);
    }
    for (std::size_t i = 0; i < tables_.restaurants.size(); ++i) {
      const auto& r = tables_.restaurants[i];
      restaurants_.emplace(pair_key(r.name, r.city), i);
    }
    for (std::size_t i = 0; i < tables_.attractions.size(); ++i) {
      const auto& a = tables_.attractions[i];
      attractions_.emplace(pair_key(a.name, a.city), i);
    }
    for (std::size_t i = 0; i < tables_.distances.size(); ++i) {
      const auto& e = tables_.distances[i];
      distances_.emplace(pair_key(e.origin, e.destination), i);
    }
  }

  SandboxTables tables_;
  Index cities_, flights_, accommodations_, restaurants_, attractions_, distances_;
};

// ---------------------------------------------------------------------------
// Integrity validation

enum class IntegrityCategory { geometry, time_window, price };

inline std::string_view to_string(IntegrityCategory c) {
  switch (c) {
    case IntegrityCategory::geometry: return "geometry";
    case IntegrityCategory::time_window: return "time_window";
    case IntegrityCategory::price: return "price";
  }
  return "?";
}

struct IntegrityViolation {
  IntegrityCategory category;
  std::string table;
  std::string record;
  std::string message;
};

struct IntegrityReport {
  std::vector<IntegrityViolation> violations;

  bool clean() const { return violations.empty(); }
  std::size_t count(IntegrityCategory c) const {
    std::size_t n = 0;
    for (const auto& v : violations) n += v.category == c;
    return n;
  }
};

struct IntegrityOptions {
  // When set, flags distance rows whose taxi_cost exceeds self_drive_cost times this factor.
  std::optional<double> taxi_to_self_drive_factor;
};

namespace integrity {

inline bool lat_ok(double v) { return v >= -90.0 && v <= 90.0; }
inline bool lon_ok(double v) { return v >= -180.0 && v <= 180.0; }
inline bool minute_ok(int v) { return v >= 0 && v < 1440; }

inline void check(const City& c, IntegrityReport& r) {
  if (!lat_ok(c.latitude) || !lon_ok(c.longitude))
    r.violations.push_back({IntegrityCategory::geometry, "cities", c.name, "coordinates out of range"});
}

inline void check(const Flight& f, IntegrityReport& r) {
  if (f.origin == f.destination)
    r.violations.push_back({IntegrityCategory::geometry, "flights", f.id, "origin equals destination"});
  if (!minute_ok(f.depart))
    r.violations.push_back({IntegrityCategory::time_window, "flights", f.id, "depart outside [0,1440)"});
  if (!minute_ok(f.arrive))
    r.violations.push_back({IntegrityCategory::time_window, "flights", f.id, "arrive outside [0,1440)"});
  if (minute_ok(f.depart) && minute_ok(f.arrive) && !f.overnight && f.arrive < f.depart)
    r.violations.push_back(
        {IntegrityCategory::time_window, "flights", f.id, "arrives before departure without overnight flag"});
  if (!f.date.valid()) r.violations.push_back({IntegrityCategory::time_window, "flights", f.id, "invalid date"});
  if (f.price < 0) r.violations.push_back({IntegrityCategory::price, "flights", f.id, "negative price"});
}

inline void check(const Accommodation& a, IntegrityReport& r) {
  if (a.price_per_night < 0)
    r.violations.push_back({IntegrityCategory::price, "accommodations", a.name, "negative price_per_night"});
}

inline void check(const Restaurant& x, IntegrityReport& r) {
  if (x.avg_cost < 0) r.violations.push_back({IntegrityCategory::price, "restaurants", x.name, "negative avg_cost"});
}

inline void check(const Attraction& a, IntegrityReport& r) {
  if (!lat_ok(a.latitude) || !lon_ok(a.longitude))
    r.violations.push_back({IntegrityCategory::geometry, "attractions", a.name, "coordinates out of range"});
}

inline void check(const DistanceEntry& e, const IntegrityOptions& opts, IntegrityReport& r) {
  const std::string id = e.origin + "->" + e.destination;
  if (e.origin == e.destination)
    r.violations.push_back({IntegrityCategory::geometry, "distances", id, "origin equals destination"});
  if (e.distance_km < 0 || e.duration_min < 0)
    r.violations.push_back({IntegrityCategory::geometry, "distances", id, "negative distance or duration"});
  if (e.taxi_cost < 0 || e.self_drive_cost < 0)
    r.violations.push_back({IntegrityCategory::price, "distances", id, "negative cost"});
  if (opts.taxi_to_self_drive_factor &&
      static_cast<double>(e.taxi_cost) > static_cast<double>(e.self_drive_cost) * *opts.taxi_to_self_drive_factor)
    r.violations.push_back({IntegrityCategory::price, "distances", id, "taxi cost inconsistent with self-drive"});
}

template <typename T>
bool record_clean(const T& rec) {
  IntegrityReport r;
  check(rec, r);
  return r.clean();
}

inline bool record_clean(const DistanceEntry& rec) {
  IntegrityReport r;
  check(rec, IntegrityOptions{}, r);
  return r.clean();
}

}  // namespace integrity

// Geometry, time-window and price consistency. Violations are entries, never exceptions.
inline IntegrityReport validate_integrity(const SandboxDataset& d, const IntegrityOptions& opts = {}) {
  IntegrityReport r;
  std::set<std::string> names;
  std::set<std::pair<double, double>> coords;
  for (const auto& c : d.cities()) {
    integrity::check(c, r);
    if (!names.insert(c.name).second)
      r.violations.push_back({IntegrityCategory::geometry, "cities", c.name, "duplicate city name"});
    if (!coords.insert({c.latitude, c.longitude}).second)
      r.violations.push_back({IntegrityCategory::geometry, "cities", c.name, "shares coordinates with another city"});
  }
  for (const auto& f : d.flights()) integrity::check(f, r);
  for (const auto& a : d.accommodations()) integrity::check(a, r);
  for (const auto& x : d.restaurants()) integrity::check(x, r);
  for (const auto& a : d.attractions()) integrity::check(a, r);
  for (const auto& e : d.distances()) integrity::check(e, opts, r);
  return r;
}

// Throws ReferenceError on dangling city names or duplicate primary keys.
inline void check_references(const SandboxTables& t) {
  std::set<std::string> cities;
  for (const auto& c : t.cities)
    if (!cities.insert(c.name).second) throw ReferenceError("cities.csv: duplicate city '" + c.name + "'");
  auto require = [&](const std::string& table, const std::string& rec, const std::string& city) {
    if (!cities.count(city))
      throw ReferenceError(table + ": record '" + rec + "' references unknown city '" + city + "'");
  };
  auto unique = [](std::set<std::string>& seen, const std::string& table, const std::string& key) {
    if (!seen.insert(key).second) throw ReferenceError(table + ": duplicate primary key '" + key + "'");
  };
  std::set<std::string> seen;
  for (const auto& f : t.flights) {
    require("flights.csv", f.id, f.origin);
    require("flights.csv", f.id, f.destination);
    unique(seen, "flights.csv", f.id);
  }
  seen.clear();
  for (const auto& a : t.accommodations) {
    require("accommodations.csv", a.name, a.city);
    unique(seen, "accommodations.csv", a.name + " @ " + a.city);
  }
  seen.clear();
  for (const auto& r : t.restaurants) {
    require("restaurants.csv", r.name, r.city);
    unique(seen, "restaurants.csv", r.name + " @ " + r.city);
  }
  seen.clear();
  for (const auto& a : t.attractions) {
    require("attractions.csv", a.name, a.city);
    unique(seen, "attractions.csv", a.name + " @ " + a.city);
  }
  seen.clear();
  for (const auto& e : t.distances) {
    require("distances.csv", e.origin + "->" + e.destination, e.origin);
    require("distances.csv", e.origin + "->" + e.destination, e.destination);
    unique(seen, "distances.csv", e.origin + "->" + e.destination);
  }
}

// ---------------------------------------------------------------------------
// CSV persistence

namespace sandbox_io {

inline const std::vector<std::string> city_columns{"name", "latitude", "longitude"};
inline const std::vector<std::string> flight_columns{"id",     "origin",    "destination", "date",
                                                     "depart", "arrive",    "overnight",   "price"};
inline const std::vector<std::string> accommodation_columns{
    "name", "city", "price_per_night", "room_type", "house_rules", "minimum_nights", "max_occupancy"};
inline const std::vector<std::string> restaurant_columns{"name", "city", "avg_cost", "cuisines"};
inline const std::vector<std::string> attraction_columns{"name", "city", "latitude", "longitude"};
inline const std::vector<std::string> distance_columns{"origin",       "destination", "distance_km",
                                                       "duration_min", "taxi_cost",   "self_drive_cost"};

class RowReader {
 public:
  RowReader(const std::string& file, const csv::Row& row) : file_(file), row_(row) {}

  const std::string& text(std::size_t i) const { return row_.fields[i]; }

  std::string non_empty(std::size_t i, std::string_view what) const {
    if (row_.fields[i].empty()) fail(std::string(what) + " is empty");
    return row_.fields[i];
  }

  template <typename Int>
  Int integer(std::size_t i, std::string_view what) const {
    const auto& s = row_.fields[i];
    Int v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) fail(std::string(what) + " is not an integer: '" + s + "'");
    return v;
  }

  double real(std::size_t i, std::string_view what) const {
    const auto& s = row_.fields[i];
    double v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) fail(std::string(what) + " is not a number: '" + s + "'");
    return v;
  }

  bool boolean(std::size_t i, std::string_view what) const {
    const auto& s = row_.fields[i];
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    fail(std::string(what) + " is not a boolean: '" + s + "'");
  }

  Date date(std::size_t i, std::string_view what) const {
    auto d = Date::parse(row_.fields[i]);
    if (!d) fail(std::string(what) + " is not a YYYY-MM-DD date: '" + row_.fields[i] + "'");
    return *d;
  }

  std::vector<std::string> tags(std::size_t i) const {
    std::vector<std::string> out;
    if (row_.fields[i].empty()) return out;
    for (auto& t : split(row_.fields[i], ';')) {
      auto tt = trim(t);
      if (!tt.empty()) out.push_back(std::move(tt));
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(file_, row_.line, msg); }

 private:
  const std::string& file_;
  const csv::Row& row_;
};

template <typename T, typename Fn>
std::vector<T> read_table(const std::filesystem::path& dir, const std::string& file,
                          const std::vector<std::string>& columns, Fn&& parse_row) {
  const auto path = dir / file;
  if (!std::filesystem::exists(path)) throw IoError("missing sandbox table " + path.string());
  auto rows = csv::read_file(path.string(), file);
  if (rows.empty()) throw ParseError(file, 1, "missing header row");
  if (rows.front().fields != columns) {
    std::string expected;
    for (const auto& c : columns) expected += (expected.empty() ? "" : ",") + c;
    throw ParseError(file, rows.front().line, "header must be: " + expected);
  }
  std::vector<T> out;
  out.reserve(rows.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].fields.size() != columns.size())
      throw ParseError(file, rows[i].line,
                       "expected " + std::to_string(columns.size()) + " fields, got " +
                           std::to_string(rows[i].fields.size()));
    out.push_back(parse_row(RowReader(file, rows[i])));
  }
  return out;
}

inline std::string join_tags(const auto& tags, auto&& name_of) {
  std::string out;
  for (const auto& t : tags) {
    if (!out.empty()) out.push_back(';');
    out += name_of(t);
  }
  return out;
}

inline void write_table(const std::filesystem::path& path, const std::vector<std::string>& columns,
                        const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  csv::write_row(out, columns);
  for (const auto& r : rows) csv::write_row(out, r);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace sandbox_io

inline SandboxDataset load_sandbox(const std::filesystem::path& root) {
  using namespace sandbox_io;
  if (!std::filesystem::is_directory(root)) throw IoError("sandbox directory not found: " + root.string());

  SandboxTables t;
  t.cities = read_table<City>(root, "cities.csv", city_columns, [](const RowReader& r) {
    return City{r.non_empty(0, "name"), r.real(1, "latitude"), r.real(2, "longitude")};
  });
  t.flights = read_table<Flight>(root, "flights.csv", flight_columns, [](const RowReader& r) {
    return Flight{r.non_empty(0, "id"),           r.non_empty(1, "origin"),     r.non_empty(2, "destination"),
                  r.date(3, "date"),              r.integer<int>(4, "depart"),  r.integer<int>(5, "arrive"),
                  r.boolean(6, "overnight"),      r.integer<Cents>(7, "price")};
  });
  t.accommodations = read_table<Accommodation>(root, "accommodations.csv", accommodation_columns,
                                               [](const RowReader& r) {
    Accommodation a;
    a.name = r.non_empty(0, "name");
    a.city = r.non_empty(1, "city");
    a.price_per_night = r.integer<Cents>(2, "price_per_night");
    auto rt = parse_room_type(r.text(3));
    if (!rt) r.fail("unknown room_type '" + r.text(3) + "'");
    a.room_type = *rt;
    for (const auto& tag : r.tags(4)) {
      auto rule = parse_house_rule(tag);
      if (!rule) r.fail("unknown house rule '" + tag + "'");
      a.house_rules.insert(*rule);
    }
    a.minimum_nights = r.integer<int>(5, "minimum_nights");
    a.max_occupancy = r.integer<int>(6, "max_occupancy");
    if (a.minimum_nights < 1) r.fail("minimum_nights must be >= 1");
    if (a.max_occupancy < 1) r.fail("max_occupancy must be >= 1");
    return a;
  });
  t.restaurants = read_table<Restaurant>(root, "restaurants.csv", restaurant_columns, [](const RowReader& r) {
    Restaurant x;
    x.name = r.non_empty(0, "name");
    x.city = r.non_empty(1, "city");
    x.avg_cost = r.integer<Cents>(2, "avg_cost");
    for (auto& c : r.tags(3)) x.cuisines.insert(std::move(c));
    if (x.cuisines.empty()) r.fail("cuisines must be non-empty");
    return x;
  });
  t.attractions = read_table<Attraction>(root, "attractions.csv", attraction_columns, [](const RowReader& r) {
    return Attraction{r.non_empty(0, "name"), r.non_empty(1, "city"), r.real(2, "latitude"), r.real(3, "longitude")};
  });
  t.distances = read_table<DistanceEntry>(root, "distances.csv", distance_columns, [](const RowReader& r) {
    return DistanceEntry{r.non_empty(0, "origin"),         r.non_empty(1, "destination"),
                         r.real(2, "distance_km"),         r.real(3, "duration_min"),
                         r.integer<Cents>(4, "taxi_cost"), r.integer<Cents>(5, "self_drive_cost")};
  });
  check_references(t);
  return SandboxDataset(std::move(t));
}

inline void save_sandbox(const SandboxDataset& d, const std::filesystem::path& root) {
  using namespace sandbox_io;
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  if (!std::filesystem::is_directory(root)) throw IoError("cannot create directory " + root.string());

  std::vector<std::vector<std::string>> rows;
  for (const auto& c : d.cities()) rows.push_back({c.name, format_double(c.latitude), format_double(c.longitude)});
  write_table(root / "cities.csv", city_columns, rows);

  rows.clear();
  for (const auto& f : d.flights())
    rows.push_back({f.id, f.origin, f.destination, f.date.to_string(), std::to_string(f.depart),
                    std::to_string(f.arrive), f.overnight ? "true" : "false", std::to_string(f.price)});
  write_table(root / "flights.csv", flight_columns, rows);

  rows.clear();
  for (const auto& a : d.accommodations())
    rows.push_back({a.name, a.city, std::to_string(a.price_per_night), std::string(to_string(a.room_type)),
                    join_tags(a.house_rules, [](HouseRule h) { return std::string(to_string(h)); }),
                    std::to_string(a.minimum_nights), std::to_string(a.max_occupancy)});
  write_table(root / "accommodations.csv", accommodation_columns, rows);

  rows.clear();
  for (const auto& r : d.restaurants())
    rows.push_back({r.name, r.city, std::to_string(r.avg_cost),
                    join_tags(r.cuisines, [](const std::string& s) { return s; })});
  write_table(root / "restaurants.csv", restaurant_columns, rows);

  rows.clear();
  for (const auto& a : d.attractions())
    rows.push_back({a.name, a.city, format_double(a.latitude), format_double(a.longitude)});
  write_table(root / "attractions.csv", attraction_columns, rows);

  rows.clear();
  for (const auto& e : d.distances())
    rows.push_back({e.origin, e.destination, format_double(e.distance_km), format_double(e.duration_min),
                    std::to_string(e.taxi_cost), std::to_string(e.self_drive_cost)});
  write_table(root / "distances.csv", distance_columns, rows);
}

}  // namespace triflow
