#include "edlog/timestamp.hpp"

#include <array>
#include <cstdio>

namespace edlog {
namespace {

// Proleptic Gregorian day count (days since 1970-01-01).
std::int64_t days_from_civil(std::int64_t y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, int& month, int& day) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    month = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    year = static_cast<int>(y + (month <= 2));
}

bool read_uint(std::string_view s, size_t pos, size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (size_t i = 0; i < len; ++i) {
        char c = s[pos + i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

bool valid_date(int y, int mo, int d, int h, int mi, int se) {
    static constexpr std::array<int, 12> mdays{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (mo < 1 || mo > 12 || d < 1) return false;
    int lim = mdays[mo - 1];
    if (mo == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) lim = 29;
    if (d > lim) return false;
    return h >= 0 && h < 24 && mi >= 0 && mi < 60 && se >= 0 && se < 60 && y >= 1 && y <= 9999;
}

std::optional<Timestamp> make(int y, int mo, int d, int h, int mi, int se) {
    if (!valid_date(y, mo, d, h, mi, se)) return std::nullopt;
    return Timestamp(days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + se);
}

}  // namespace

int Timestamp::second_of_minute() const {
    std::int64_t s = seconds_ % 60;
    if (s < 0) s += 60;
    return static_cast<int>(s);
}

Timestamp Timestamp::from_civil(int year, int month, int day, int hour, int minute, int second) {
    return Timestamp(days_from_civil(year, month, day) * 86400 + hour * 3600 + minute * 60 + second);
}

std::optional<Timestamp> Timestamp::parse(std::string_view s) {
    int y, mo, d, h, mi, se = 0;
    if (!read_uint(s, 0, 4, y) || s.size() < 16) return std::nullopt;
    if (s[4] != '-' || s[7] != '-' || s[10] != ' ' || s[13] != ':') return std::nullopt;
    if (!read_uint(s, 5, 2, mo) || !read_uint(s, 8, 2, d)) return std::nullopt;
    if (!read_uint(s, 11, 2, h) || !read_uint(s, 14, 2, mi)) return std::nullopt;
    if (s.size() == 16) return make(y, mo, d, h, mi, 0);
    if (s.size() == 19 && s[16] == ':' && read_uint(s, 17, 2, se)) return make(y, mo, d, h, mi, se);
    return std::nullopt;
}

std::optional<Timestamp> Timestamp::parse_dotted(std::string_view s) {
    int y, mo, d, h, mi, se = 0;
    if (s.size() < 16) return std::nullopt;
    if (s[2] != '.' || s[5] != '.' || s[10] != ' ' || s[13] != ':') return std::nullopt;
    if (!read_uint(s, 0, 2, d) || !read_uint(s, 3, 2, mo) || !read_uint(s, 6, 4, y)) return std::nullopt;
    if (!read_uint(s, 11, 2, h) || !read_uint(s, 14, 2, mi)) return std::nullopt;
    if (s.size() == 16) return make(y, mo, d, h, mi, 0);
    if (s.size() == 19 && s[16] == ':' && read_uint(s, 17, 2, se)) return make(y, mo, d, h, mi, se);
    return std::nullopt;
}

std::optional<Timestamp> Timestamp::parse_iso8601(std::string_view s) {
    int y, mo, d, h, mi, se = 0;
    if (s.size() < 19) return std::nullopt;
    if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' || s[16] != ':')
        return std::nullopt;
    if (!read_uint(s, 0, 4, y) || !read_uint(s, 5, 2, mo) || !read_uint(s, 8, 2, d)) return std::nullopt;
    if (!read_uint(s, 11, 2, h) || !read_uint(s, 14, 2, mi) || !read_uint(s, 17, 2, se)) return std::nullopt;
    size_t pos = 19;
    if (pos < s.size() && s[pos] == '.') {  // fractional seconds, ignored
        ++pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    }
    if (pos < s.size()) {
        std::string_view tail = s.substr(pos);
        if (tail != "Z" && tail != "+00:00" && tail != "+0000" && tail != "-00:00") return std::nullopt;
    }
    return make(y, mo, d, h, mi, se);
}

void Timestamp::format_to(std::string& out, bool dotted) const {
    int y, mo, d;
    std::int64_t days = seconds_ / 86400;
    std::int64_t rem = seconds_ % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    civil_from_days(days, y, mo, d);
    const int h = static_cast<int>(rem / 3600);
    const int mi = static_cast<int>((rem / 60) % 60);
    const int se = static_cast<int>(rem % 60);
    char buf[24];
    if (dotted)
        std::snprintf(buf, sizeof buf, "%02d.%02d.%04d %02d:%02d:%02d", d, mo, y, h, mi, se);
    else
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d %02d:%02d:%02d", y, mo, d, h, mi, se);
    out.append(buf);
}

void Timestamp::format_iso8601_to(std::string& out) const {
    size_t start = out.size();
    format_to(out, false);
    out[start + 10] = 'T';
    out.append("+00:00");
}

std::string Timestamp::to_string() const {
    std::string s;
    format_to(s, false);
    return s;
}

std::string Timestamp::to_dotted() const {
    std::string s;
    format_to(s, true);
    return s;
}

std::string Timestamp::to_iso8601() const {
    std::string s;
    format_iso8601_to(s);
    return s;
}

}  // namespace edlog
