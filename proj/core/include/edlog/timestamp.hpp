#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace edlog {

/// Naive wall-clock timestamp with second resolution, stored as seconds
/// since 1970-01-01 00:00:00. Source data is de-identified and date-shifted,
/// so no timezone is attached and comparisons are plain wall-clock order.
class Timestamp {
public:
    Timestamp() = default;
    explicit constexpr Timestamp(std::int64_t seconds) : seconds_(seconds) {}

    constexpr std::int64_t seconds() const { return seconds_; }

    constexpr Timestamp plus_seconds(std::int64_t s) const { return Timestamp(seconds_ + s); }
    constexpr std::int64_t operator-(Timestamp other) const { return seconds_ - other.seconds_; }

    auto operator<=>(const Timestamp&) const = default;

    /// Seconds-of-minute component (0-59); used by the granularity check.
    int second_of_minute() const;

    static Timestamp from_civil(int year, int month, int day,
                                int hour = 0, int minute = 0, int second = 0);

    /// Parses "YYYY-MM-DD HH:MM:SS"; seconds optional (absent means :00).
    static std::optional<Timestamp> parse(std::string_view text);
    /// Parses "DD.MM.YYYY HH:MM:SS" (seconds optional).
    static std::optional<Timestamp> parse_dotted(std::string_view text);
    /// Parses "YYYY-MM-DDTHH:MM:SS" with optional "+00:00"/"Z"/fractional part.
    static std::optional<Timestamp> parse_iso8601(std::string_view text);

    std::string to_string() const;    // YYYY-MM-DD HH:MM:SS
    std::string to_dotted() const;    // DD.MM.YYYY HH:MM:SS
    std::string to_iso8601() const;   // YYYY-MM-DDTHH:MM:SS+00:00

    /// Appends the formatted value to out instead of allocating.
    void format_to(std::string& out, bool dotted) const;
    void format_iso8601_to(std::string& out) const;

private:
    std::int64_t seconds_ = 0;
};

}  // namespace edlog
