#pragma once

#include <chrono>
#include <compare>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace triflow {

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;

  std::chrono::year_month_day ymd() const {
    return std::chrono::year_month_day{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                                       std::chrono::day{static_cast<unsigned>(day)}};
  }

  bool valid() const { return month >= 1 && month <= 12 && day >= 1 && day <= 31 && ymd().ok(); }

  Date plus_days(int n) const {
    const std::chrono::sys_days sd = std::chrono::sys_days{ymd()} + std::chrono::days{n};
    return from_sys_days(sd);
  }

  // Whole days from this date to `other`.
  int days_until(const Date& other) const {
    return static_cast<int>((std::chrono::sys_days{other.ymd()} - std::chrono::sys_days{ymd()}).count());
  }

  static Date from_sys_days(std::chrono::sys_days sd) {
    const std::chrono::year_month_day ymd{sd};
    return Date{static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())),
                static_cast<int>(static_cast<unsigned>(ymd.day()))};
  }

  std::string to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
  }

  // Strict YYYY-MM-DD. Returns nullopt for anything else, including impossible dates.
  static std::optional<Date> parse(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    auto digits = [&](std::size_t pos, std::size_t len, int& out) {
      out = 0;
      for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        out = out * 10 + (s[i] - '0');
      }
      return true;
    };
    Date d;
    if (!digits(0, 4, d.year) || !digits(5, 2, d.month) || !digits(8, 2, d.day)) return std::nullopt;
    if (!d.valid()) return std::nullopt;
    return d;
  }
};

}  // namespace triflow
