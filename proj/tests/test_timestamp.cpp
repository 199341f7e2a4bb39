#include <doctest.h>

#include "edlog/timestamp.hpp"

using edlog::Timestamp;

TEST_CASE("plain format parses and round-trips") {
    auto t = Timestamp::parse("2165-10-31 11:33:05");
    REQUIRE(t.has_value());
    CHECK(t->to_string() == "2165-10-31 11:33:05");
    CHECK(*t == Timestamp::from_civil(2165, 10, 31, 11, 33, 5));
}

TEST_CASE("seconds are optional and default to zero") {
    auto t = Timestamp::parse("2165-10-31 11:33");
    REQUIRE(t.has_value());
    CHECK(t->to_string() == "2165-10-31 11:33:00");
    auto d = Timestamp::parse_dotted("31.10.2165 11:33");
    REQUIRE(d.has_value());
    CHECK(*d == *t);
}

TEST_CASE("dotted format round-trips") {
    auto t = Timestamp::parse_dotted("31.10.2165 11:33:01");
    REQUIRE(t.has_value());
    CHECK(t->to_dotted() == "31.10.2165 11:33:01");
    CHECK(t->to_string() == "2165-10-31 11:33:01");
}

TEST_CASE("iso 8601 variants parse to the same instant") {
    auto base = Timestamp::parse("2165-10-31 11:33:01");
    REQUIRE(base.has_value());
    for (const char* text : {"2165-10-31T11:33:01", "2165-10-31T11:33:01Z",
                             "2165-10-31T11:33:01+00:00", "2165-10-31T11:33:01.000+00:00"}) {
        auto t = Timestamp::parse_iso8601(text);
        REQUIRE_MESSAGE(t.has_value(), text);
        CHECK(*t == *base);
    }
    CHECK(base->to_iso8601() == "2165-10-31T11:33:01+00:00");
}

TEST_CASE("invalid dates are rejected") {
    CHECK_FALSE(Timestamp::parse("2021-02-29 00:00:00").has_value());  // not a leap year
    CHECK(Timestamp::parse("2020-02-29 00:00:00").has_value());
    CHECK_FALSE(Timestamp::parse("2021-13-01 00:00:00").has_value());
    CHECK_FALSE(Timestamp::parse("2021-00-10 00:00:00").has_value());
    CHECK_FALSE(Timestamp::parse("2021-04-31 00:00:00").has_value());
    CHECK_FALSE(Timestamp::parse("2021-01-01 24:00:00").has_value());
    CHECK_FALSE(Timestamp::parse("2021-01-01 10:60:00").has_value());
    CHECK_FALSE(Timestamp::parse("garbage").has_value());
    CHECK_FALSE(Timestamp::parse("").has_value());
}

TEST_CASE("ordering and arithmetic") {
    auto a = Timestamp::from_civil(2150, 1, 1, 0, 0, 0);
    auto b = a.plus_seconds(61);
    CHECK(a < b);
    CHECK(b - a == 61);
    CHECK(b.second_of_minute() == 1);
    CHECK(a.second_of_minute() == 0);
}

TEST_CASE("pre-1970 and far-future dates survive the civil conversion") {
    for (int year : {1960, 1970, 2000, 2100, 2170, 2210}) {
        auto t = Timestamp::from_civil(year, 3, 1, 12, 30, 45);
        auto back = Timestamp::parse(t.to_string());
        REQUIRE(back.has_value());
        CHECK(*back == t);
    }
}
