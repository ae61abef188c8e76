#pragma once

#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace triflow {

// Money is always integer cents.
using Cents = std::int64_t;

enum class RoomType { entire_room, private_room, shared_room };
enum class HouseRule { no_smoking, no_parties, no_children_under_10, no_pets, no_visitors };
enum class RoomNeed { smoking, parties, children_under_10, pets, visitors };
enum class TransportMode { flight, taxi, self_drive };

namespace detail {

template <typename E, std::size_t N>
struct EnumNames {
  std::array<std::pair<E, std::string_view>, N> entries;

  std::string_view name(E e) const {
    for (const auto& [v, n] : entries)
      if (v == e) return n;
    return "?";
  }
  std::optional<E> parse(std::string_view s) const {
    for (const auto& [v, n] : entries)
      if (n == s) return v;
    return std::nullopt;
  }
};

inline constexpr EnumNames<RoomType, 3> room_type_names{{{
    {RoomType::entire_room, "entire_room"},
    {RoomType::private_room, "private_room"},
    {RoomType::shared_room, "shared_room"},
}}};

inline constexpr EnumNames<HouseRule, 5> house_rule_names{{{
    {HouseRule::no_smoking, "no_smoking"},
    {HouseRule::no_parties, "no_parties"},
    {HouseRule::no_children_under_10, "no_children_under_10"},
    {HouseRule::no_pets, "no_pets"},
    {HouseRule::no_visitors, "no_visitors"},
}}};

inline constexpr EnumNames<RoomNeed, 5> room_need_names{{{
    {RoomNeed::smoking, "smoking"},
    {RoomNeed::parties, "parties"},
    {RoomNeed::children_under_10, "children_under_10"},
    {RoomNeed::pets, "pets"},
    {RoomNeed::visitors, "visitors"},
}}};

inline constexpr EnumNames<TransportMode, 3> transport_mode_names{{{
    {TransportMode::flight, "flight"},
    {TransportMode::taxi, "taxi"},
    {TransportMode::self_drive, "self_drive"},
}}};

}  // namespace detail

inline std::string_view to_string(RoomType v) { return detail::room_type_names.name(v); }
inline std::string_view to_string(HouseRule v) { return detail::house_rule_names.name(v); }
inline std::string_view to_string(RoomNeed v) { return detail::room_need_names.name(v); }
inline std::string_view to_string(TransportMode v) { return detail::transport_mode_names.name(v); }

inline std::optional<RoomType> parse_room_type(std::string_view s) { return detail::room_type_names.parse(s); }
inline std::optional<HouseRule> parse_house_rule(std::string_view s) { return detail::house_rule_names.parse(s); }
inline std::optional<RoomNeed> parse_room_need(std::string_view s) { return detail::room_need_names.parse(s); }
inline std::optional<TransportMode> parse_transport_mode(std::string_view s) {
  return detail::transport_mode_names.parse(s);
}

// The house rule that forbids a declared need.
inline HouseRule forbidding_rule(RoomNeed need) {
  switch (need) {
    case RoomNeed::smoking: return HouseRule::no_smoking;
    case RoomNeed::parties: return HouseRule::no_parties;
    case RoomNeed::children_under_10: return HouseRule::no_children_under_10;
    case RoomNeed::pets: return HouseRule::no_pets;
    case RoomNeed::visitors: return HouseRule::no_visitors;
  }
  return HouseRule::no_smoking;
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Lowercased alphanumeric words.
inline std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 14695981039346656037ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

inline Cents ceil_div(Cents a, Cents b) { return (a + b - 1) / b; }

}  // namespace triflow
