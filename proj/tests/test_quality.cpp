#include <doctest.h>

#include "edlog/errors.hpp"
#include "edlog/extraction.hpp"
#include "edlog/quality.hpp"
#include "edlog/synthgen.hpp"
#include "helpers.hpp"

using namespace edlog;

namespace {

EventLog fixture_log() {
    return extract_log(testutil::three_stay_fixture(), MappingConfig::defaults()).log;
}

const QualityFinding& get(const QualityReport& report, RuleKind kind, std::string_view detail) {
    const QualityFinding* f = report.find(kind, detail);
    REQUIRE_MESSAGE(f != nullptr, detail);
    return *f;
}

}  // namespace

TEST_CASE("clean fixture produces no violations in any category") {
    auto report = run_quality_suite(fixture_log(), QualityConfig::defaults());
    for (const auto& f : report.findings) {
        if (f.kind == RuleKind::Format) continue;  // informational counts
        CAPTURE(f.detail);
        CHECK(f.affected_cases == 0);
    }
}

TEST_CASE("missing case attribute values are counted per case") {
    auto log = fixture_log();
    log.traces[0].case_attributes.set(attrs().acuity, AttributeValue::absent());
    log.traces[2].case_attributes.erase(attrs().acuity);
    auto findings = check_missing_values(log, {"acuity", "gender"});
    REQUIRE(findings.size() == 2);
    CHECK(findings[0].detail == "acuity");
    CHECK(findings[0].affected_cases == 2);
    CHECK(findings[0].denominator == 3);
    CHECK(findings[0].rate_pct() == doctest::Approx(200.0 / 3));
    CHECK(findings[0].sample_cases.size() == 2);
    CHECK(findings[1].affected_cases == 0);
}

TEST_CASE("unknown attribute names in the rules are a config error") {
    auto log = fixture_log();
    CHECK_THROWS_AS(check_missing_values(log, {"no_such_column"}), UsageError);
}

TEST_CASE("cases lacking a mandatory activity are incomplete") {
    auto log = fixture_log();
    auto& events = log.traces[1].events;
    std::erase_if(events, [](const Event& e) { return e.activity == Activity::TriageEd; });
    auto f = check_incomplete_cases(log, {"Enter the ED", "Triage in the ED", "Discharge from the ED"});
    CHECK(f.affected_cases == 1);
    CHECK(f.denominator == 3);
    REQUIRE(f.sample_cases.size() == 1);
    CHECK(f.sample_cases[0] == 32354539);
}

TEST_CASE("attribute dependencies check presence and absence") {
    auto log = fixture_log();  // all three stays: HOME without hadm_id
    DependencyRule home_rule{"disposition", "HOME", "hadm_id", /*required_present=*/false};
    DependencyRule admit_rule{"disposition", "ADMITTED", "hadm_id", /*required_present=*/true};

    auto findings = check_attribute_dependencies(log, {home_rule, admit_rule});
    REQUIRE(findings.size() == 2);
    CHECK(findings[0].affected_cases == 0);
    CHECK(findings[0].denominator == 3);  // all HOME
    CHECK(findings[1].denominator == 0);  // no ADMITTED stays

    // break the first stay: discharged home yet linked to an admission
    for (auto& e : log.traces[0].events)
        if (e.activity == Activity::EnterEd)
            e.attributes.set(attrs().hadm_id, AttributeValue::integer(7777));
    findings = check_attribute_dependencies(log, {home_rule});
    CHECK(findings[0].affected_cases == 1);
    CHECK(findings[0].sample_cases == std::vector<std::int64_t>{35146496});
}

TEST_CASE("non-positive case durations are time anomalies") {
    auto log = fixture_log();
    auto f = check_time_anomalies(log);
    CHECK(f.affected_cases == 0);
    CHECK(f.denominator == 3);

    // move the discharge back to the entry time
    auto& t = log.traces[0];
    t.events.back().timestamp = t.events.front().timestamp;
    f = check_time_anomalies(log);
    CHECK(f.affected_cases == 1);
}

TEST_CASE("multi-registration means identical timestamps within one case") {
    auto log = fixture_log();
    // duplicate a vital sign check at the same instant in trace 0
    auto& t = log.traces[0];
    Event dup = t.events[2];
    REQUIRE(dup.activity == Activity::VitalSignCheck);
    t.events.insert(t.events.begin() + 3, dup);

    auto findings = check_multi_registration(log);
    REQUIRE(findings.size() == kActivityCount);
    for (const auto& f : findings) {
        if (f.detail == "Vital sign check") {
            CHECK(f.affected_cases == 1);
            CHECK(f.denominator == 2);  // only two traces contain the activity
        } else {
            CHECK(f.affected_cases == 0);
        }
    }
}

TEST_CASE("range check accepts the domain and flags everything else") {
    auto log = fixture_log();
    auto f = check_attribute_range(log, "pain", 0, 10);
    CHECK(f.affected_cases == 0);
    CHECK(f.denominator == 3);

    // out-of-domain number on one event, non-numeric text on another trace
    for (auto& e : log.traces[0].events)
        if (e.activity == Activity::TriageEd)
            e.attributes.set(attrs().pain, AttributeValue::text("13"));
    for (auto& e : log.traces[2].events)
        if (e.activity == Activity::TriageEd)
            e.attributes.set(attrs().pain, AttributeValue::text("denies"));
    f = check_attribute_range(log, "pain", 0, 10);
    CHECK(f.affected_cases == 2);

    // boundary values are inside the domain
    auto g = check_attribute_range(log, "acuity", 1, 5);
    CHECK(g.affected_cases == 0);
}

TEST_CASE("format check reports granularity and temperature units") {
    auto log = fixture_log();
    auto findings = check_format_consistency(log);
    REQUIRE(findings.size() == kActivityCount + 1);
    for (const auto& f : findings) {
        if (f.detail == "timestamp granularity: Enter the ED")
            CHECK(f.annotations.at("granularity") == "minute");
        if (f.detail == "timestamp granularity: Triage in the ED")
            CHECK(f.annotations.at("granularity") == "second");  // entry + 1s offset
        if (f.detail == "timestamp granularity: Vital sign check")
            CHECK(f.annotations.at("granularity") == "minute");
    }
    const auto& temp = findings.back();
    CHECK(temp.detail == "temperature unit");
    CHECK(temp.denominator == 7);  // fixture temperature values, all Fahrenheit
    CHECK(temp.metrics.at("fahrenheit_count") == 7);
    CHECK(temp.metrics.at("celsius_count") == 0);

    // convert one reading to Celsius and add an implausible one
    log.traces[0].events[2].attributes.set(attrs().temperature, AttributeValue::decimal(37.1));
    log.traces[2].events[2].attributes.set(attrs().temperature, AttributeValue::decimal(300.0));
    findings = check_format_consistency(log);
    const auto& temp2 = findings.back();
    CHECK(temp2.metrics.at("celsius_count") == 1);
    CHECK(temp2.metrics.at("implausible_count") == 1);
    CHECK(temp2.metrics.at("fahrenheit_count") == 5);
}

TEST_CASE("the suite is read-only and its report serializes") {
    auto log = fixture_log();
    auto hash_before = log_hash(log);
    auto report = run_quality_suite(log, QualityConfig::defaults(), 4);
    CHECK(log_hash(log) == hash_before);
    CHECK_FALSE(report.findings.empty());
    auto json = report.to_json();
    CHECK(json.find("\"rule\"") != std::string::npos);
    CHECK(json.find("\"affected_cases\"") != std::string::npos);
    auto text = report.to_text();
    CHECK(text.find("missing_value") != std::string::npos);
}

TEST_CASE("suite results are independent of the thread count") {
    auto log = testutil::seeded_log(5, 30);
    auto a = run_quality_suite(log, QualityConfig::defaults(), 1);
    auto b = run_quality_suite(log, QualityConfig::defaults(), 8);
    REQUIRE(a.findings.size() == b.findings.size());
    for (std::size_t i = 0; i < a.findings.size(); ++i) {
        CHECK(a.findings[i].detail == b.findings[i].detail);
        CHECK(a.findings[i].affected_cases == b.findings[i].affected_cases);
        CHECK(a.findings[i].denominator == b.findings[i].denominator);
    }
}

TEST_CASE("quality config loads from a json rules file") {
    testutil::TempDir dir;
    auto path = dir.file("rules.json");
    testutil::write_file(path, R"({
      "mandatory_attributes": ["gender"],
      "mandatory_activities": ["Enter the ED"],
      "dependencies": [
        {"attribute": "disposition", "equals": "ADMITTED",
         "required_attribute": "hadm_id", "required_present": true}
      ],
      "ranges": {"acuity": [1, 5]}
    })");
    auto config = QualityConfig::load(path);
    CHECK(config.mandatory_case_attributes == std::vector<std::string>{"gender"});
    CHECK(config.mandatory_activities == std::vector<std::string>{"Enter the ED"});
    REQUIRE(config.dependencies.size() == 1);
    CHECK(config.dependencies[0].required_attribute == "hadm_id");
    REQUIRE(config.ranges.size() == 1);
    CHECK(config.ranges[0].high == 5);

    testutil::write_file(path, "{not json");
    CHECK_THROWS_AS(QualityConfig::load(path), UsageError);
    CHECK_THROWS_AS(QualityConfig::load(dir.file("absent.json")), IoError);
}

TEST_CASE("injected defects are recovered exactly by the suite") {
    GenParams params;
    params.seed = 77;
    params.n_patients = 120;
    params.defects.missing_acuity_pct = 4;
    params.defects.home_with_hadm_pct = 12;
    params.defects.admitted_without_hadm_pct = 6;
    params.defects.pain_out_of_range_pct = 9;
    params.defects.celsius_temperature_pct = 3;
    auto generated = generate_tables(params);
    const GroundTruth& truth = generated.truth;
    auto log = extract_log(std::move(generated.tables), MappingConfig::defaults()).log;
    auto report = run_quality_suite(log, QualityConfig::defaults());

    CHECK(get(report, RuleKind::MissingValue, "acuity").affected_cases ==
          truth.missing_acuity_count);
    CHECK(get(report, RuleKind::Dependency, "disposition=HOME => hadm_id absent").affected_cases ==
          truth.home_with_hadm_count);
    CHECK(get(report, RuleKind::Dependency, "disposition=ADMITTED => hadm_id present")
              .affected_cases == truth.admitted_without_hadm_count);
    CHECK(get(report, RuleKind::Range, "pain in [0, 10]").affected_cases ==
          truth.pain_out_of_range_count);
    CHECK(get(report, RuleKind::Format, "temperature unit").metrics.at("celsius_count") ==
          static_cast<double>(truth.celsius_value_count));
}
