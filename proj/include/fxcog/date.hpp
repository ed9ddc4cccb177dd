#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace fxcog {

// Calendar day stored as a count of days since 1970-01-01 (proleptic
// Gregorian). Differences between two Dates are calendar-day distances.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::int32_t days_since_epoch) : days_(days_since_epoch) {}

    static Date from_ymd(int year, unsigned month, unsigned day);
    // Strict YYYY-MM-DD; throws ParseError on anything else.
    static Date parse(std::string_view text);

    constexpr std::int32_t days() const noexcept { return days_; }
    std::string to_string() const;

    friend constexpr auto operator<=>(Date, Date) = default;
    friend constexpr std::int32_t operator-(Date a, Date b) noexcept { return a.days_ - b.days_; }
    friend constexpr Date operator+(Date a, std::int32_t n) noexcept { return Date(a.days_ + n); }

private:
    std::int32_t days_ = 0;
};

} // namespace fxcog
