#include "edlog/quality.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <future>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "edlog/errors.hpp"

namespace edlog {
namespace {

using nlohmann::json;

const std::unordered_set<std::string>& schema_attribute_names() {
    static const std::unordered_set<std::string> names = [] {
        std::unordered_set<std::string> s;
        const auto& a = attrs();
        for (AttrId id : {a.stay_id, a.subject_id, a.hadm_id, a.gender, a.race, a.arrival_transport,
                          a.disposition, a.acuity, a.chiefcomplaint, a.temperature, a.heartrate,
                          a.resprate, a.o2sat, a.sbp, a.dbp, a.pain, a.rhythm, a.name, a.gsn, a.ndc,
                          a.etc_rn, a.etccode, a.etcdescription, a.med_rn, a.gsn_rn, a.seq_num,
                          a.icd_code, a.icd_version, a.icd_title})
            s.insert(attr_name(id));
        return s;
    }();
    return names;
}

AttrId require_known_attr(const std::string& name) {
    if (!schema_attribute_names().contains(name))
        throw UsageError("unknown attribute name '" + name + "'");
    return attr_id(name);
}

void add_sample(QualityFinding& f, std::int64_t case_id) {
    if (f.sample_cases.size() < kSampleCaseLimit) f.sample_cases.push_back(case_id);
}

/// Looks up an attribute on the trace, then on its events.
const AttributeValue* find_anywhere(const Trace& t, AttrId id) {
    if (const AttributeValue* v = t.case_attributes.find(id)) return v;
    for (const Event& e : t.events)
        if (const AttributeValue* v = e.attributes.find(id)) return v;
    return nullptr;
}

std::optional<double> parse_numeric_text(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    if (s.empty()) return std::nullopt;
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

// Numeric view of a value for range checking: integers/decimals directly,
// text parsed after trimming, raw text likewise. nullopt means "has a value
// but it is not numeric".
std::optional<double> range_numeric(const AttributeValue& v) {
    if (auto n = v.numeric()) return n;
    if (const std::string* t = v.as_text()) return parse_numeric_text(*t);
    if (const RawText* r = v.as_raw()) return parse_numeric_text(r->text);
    return std::nullopt;
}

bool has_any_value(const AttributeValue& v) { return v.kind() != ValueKind::Absent; }

}  // namespace

std::string_view rule_kind_name(RuleKind kind) {
    switch (kind) {
        case RuleKind::MissingValue: return "missing_value";
        case RuleKind::IncompleteCase: return "incomplete_case";
        case RuleKind::Dependency: return "dependency";
        case RuleKind::TimeAnomaly: return "time_anomaly";
        case RuleKind::MultiRegistration: return "multi_registration";
        case RuleKind::Range: return "range";
        case RuleKind::Format: return "format";
    }
    return "?";
}

const QualityFinding* QualityReport::find(RuleKind kind, std::string_view detail) const {
    for (const QualityFinding& f : findings)
        if (f.kind == kind && f.detail == detail) return &f;
    return nullptr;
}

std::string QualityReport::to_json() const {
    json j = json::array();
    for (const QualityFinding& f : findings) {
        json e;
        e["rule"] = std::string(rule_kind_name(f.kind));
        e["detail"] = f.detail;
        e["affected_cases"] = f.affected_cases;
        e["denominator"] = f.denominator;
        e["denominator_note"] = f.denominator_note;
        e["rate_pct"] = f.rate_pct();
        e["sample_cases"] = f.sample_cases;
        if (!f.metrics.empty()) e["metrics"] = f.metrics;
        if (!f.annotations.empty()) e["annotations"] = f.annotations;
        j.push_back(std::move(e));
    }
    return j.dump(2);
}

std::string QualityReport::to_text() const {
    std::ostringstream out;
    out << "Data quality report\n";
    out << "-------------------\n";
    for (const QualityFinding& f : findings) {
        char rate[32];
        std::snprintf(rate, sizeof rate, "%.2f%%", f.rate_pct());
        out << rule_kind_name(f.kind) << " | " << f.detail << " | " << rate << " ("
            << f.affected_cases << " of " << f.denominator << " " << f.denominator_note << ")";
        for (const auto& [k, v] : f.annotations) out << " | " << k << "=" << v;
        out << "\n";
    }
    return out.str();
}

QualityConfig QualityConfig::defaults() {
    QualityConfig c;
    c.mandatory_case_attributes = {"subject_id", "gender", "race", "acuity", "arrival_transport",
                                   "disposition"};
    c.mandatory_activities = {"Enter the ED", "Triage in the ED", "Discharge from the ED"};
    c.dependencies = {{"disposition", "ADMITTED", "hadm_id", true},
                      {"disposition", "HOME", "hadm_id", false}};
    c.ranges = {{"pain", 0, 10}, {"acuity", 1, 5}};
    return c;
}

QualityConfig QualityConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open rules file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw UsageError("rules file " + path + ": " + e.what());
    }
    QualityConfig c = defaults();
    try {
        if (j.contains("mandatory_attributes"))
            c.mandatory_case_attributes = j["mandatory_attributes"].get<std::vector<std::string>>();
        if (j.contains("mandatory_activities"))
            c.mandatory_activities = j["mandatory_activities"].get<std::vector<std::string>>();
        if (j.contains("dependencies")) {
            c.dependencies.clear();
            for (const auto& d : j["dependencies"]) {
                DependencyRule r;
                r.condition_attribute = d.at("attribute").get<std::string>();
                r.condition_value = d.at("equals").get<std::string>();
                r.required_attribute = d.at("required_attribute").get<std::string>();
                r.required_present = d.at("required_present").get<bool>();
                c.dependencies.push_back(std::move(r));
            }
        }
        if (j.contains("ranges")) {
            c.ranges.clear();
            for (auto it = j["ranges"].begin(); it != j["ranges"].end(); ++it) {
                auto bounds = it.value().get<std::vector<double>>();
                if (bounds.size() != 2) throw UsageError("rules file: range needs [low, high]");
                c.ranges.push_back({it.key(), bounds[0], bounds[1]});
            }
        }
    } catch (const json::exception& e) {
        throw UsageError("rules file " + path + ": " + e.what());
    }
    return c;
}

QualityFinding check_missing_values_one(const EventLog& log, AttrId attribute) {
    QualityFinding f;
    f.kind = RuleKind::MissingValue;
    f.detail = attr_name(attribute);
    f.denominator = log.traces.size();
    f.denominator_note = "cases";
    for (const Trace& t : log.traces) {
        const AttributeValue* v = t.case_attributes.find(attribute);
        if (!v || v->kind() == ValueKind::Absent) {
            ++f.affected_cases;
            add_sample(f, t.case_id);
        }
    }
    return f;
}

std::vector<QualityFinding> check_missing_values(const EventLog& log,
                                                 const std::vector<std::string>& attributes) {
    std::vector<QualityFinding> out;
    for (const std::string& name : attributes)
        out.push_back(check_missing_values_one(log, require_known_attr(name)));
    return out;
}

QualityFinding check_incomplete_cases(const EventLog& log,
                                      const std::vector<std::string>& mandatory_activities) {
    std::vector<Activity> mandatory;
    for (const std::string& name : mandatory_activities) {
        auto a = activity_from_name(name);
        if (!a) throw UsageError("unknown activity name '" + name + "'");
        mandatory.push_back(*a);
    }
    QualityFinding f;
    f.kind = RuleKind::IncompleteCase;
    f.detail = "mandatory activities";
    f.denominator = log.traces.size();
    f.denominator_note = "cases";
    for (const Trace& t : log.traces) {
        std::array<bool, kActivityCount> present{};
        for (const Event& e : t.events) present[static_cast<std::size_t>(e.activity)] = true;
        std::string missing;
        for (Activity a : mandatory) {
            if (!present[static_cast<std::size_t>(a)]) {
                if (!missing.empty()) missing += ", ";
                missing += activity_name(a);
            }
        }
        if (!missing.empty()) {
            ++f.affected_cases;
            add_sample(f, t.case_id);
            if (f.annotations.size() < kSampleCaseLimit)
                f.annotations["case " + std::to_string(t.case_id)] = "missing: " + missing;
        }
    }
    return f;
}

std::vector<QualityFinding> check_attribute_dependencies(const EventLog& log,
                                                         const std::vector<DependencyRule>& rules) {
    std::vector<QualityFinding> out;
    for (const DependencyRule& rule : rules) {
        AttrId cond = require_known_attr(rule.condition_attribute);
        AttrId req = require_known_attr(rule.required_attribute);
        QualityFinding f;
        f.kind = RuleKind::Dependency;
        f.detail = rule.condition_attribute + "=" + rule.condition_value + " => " +
                   rule.required_attribute + (rule.required_present ? " present" : " absent");
        f.denominator_note = "cases with " + rule.condition_attribute + "=" + rule.condition_value;
        for (const Trace& t : log.traces) {
            const AttributeValue* cv = t.case_attributes.find(cond);
            if (!cv || cv->to_display() != rule.condition_value) continue;
            ++f.denominator;
            const AttributeValue* rv = find_anywhere(t, req);
            bool present = rv && has_any_value(*rv);
            if (present != rule.required_present) {
                ++f.affected_cases;
                add_sample(f, t.case_id);
            }
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 - f.rate_pct());
        f.annotations["satisfied"] = buf;
        out.push_back(std::move(f));
    }
    return out;
}

QualityFinding check_time_anomalies(const EventLog& log) {
    QualityFinding f;
    f.kind = RuleKind::TimeAnomaly;
    f.detail = "case duration <= 0";
    f.denominator_note = "cases with both Enter and Discharge";
    for (const Trace& t : log.traces) {
        std::optional<Timestamp> enter, discharge;
        for (const Event& e : t.events) {
            if (e.activity == Activity::EnterEd && !enter) enter = e.timestamp;
            if (e.activity == Activity::DischargeEd)
                discharge = discharge ? std::max(*discharge, e.timestamp) : e.timestamp;
        }
        if (!enter || !discharge) continue;
        ++f.denominator;
        if (*discharge - *enter <= 0) {
            ++f.affected_cases;
            add_sample(f, t.case_id);
        }
    }
    return f;
}

std::vector<QualityFinding> check_multi_registration(const EventLog& log) {
    std::vector<QualityFinding> out;
    std::array<std::uint64_t, kActivityCount> with_activity{}, repeated{};
    std::array<std::vector<std::int64_t>, kActivityCount> samples;

    std::array<std::vector<Timestamp>, kActivityCount> times;
    for (const Trace& t : log.traces) {
        for (auto& v : times) v.clear();
        for (const Event& e : t.events) times[static_cast<std::size_t>(e.activity)].push_back(e.timestamp);
        for (std::size_t i = 0; i < kActivityCount; ++i) {
            if (times[i].empty()) continue;
            ++with_activity[i];
            auto& ts = times[i];
            std::sort(ts.begin(), ts.end());
            bool rep = std::adjacent_find(ts.begin(), ts.end()) != ts.end();
            if (rep) {
                ++repeated[i];
                if (samples[i].size() < kSampleCaseLimit) samples[i].push_back(t.case_id);
            }
        }
    }
    for (std::size_t i = 0; i < kActivityCount; ++i) {
        QualityFinding f;
        f.kind = RuleKind::MultiRegistration;
        f.detail = std::string(activity_name(kAllActivities[i]));
        f.affected_cases = repeated[i];
        f.denominator = with_activity[i];
        f.denominator_note = "cases containing the activity";
        f.sample_cases = std::move(samples[i]);
        out.push_back(std::move(f));
    }
    return out;
}

QualityFinding check_attribute_range(const EventLog& log, const std::string& attribute, double low,
                                     double high) {
    AttrId id = require_known_attr(attribute);
    QualityFinding f;
    f.kind = RuleKind::Range;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s in [%g, %g]", attribute.c_str(), low, high);
    f.detail = buf;
    f.denominator = log.traces.size();
    f.denominator_note = "cases";
    for (const Trace& t : log.traces) {
        bool violates = false;
        auto consider = [&](const AttributeValue& v) {
            if (!has_any_value(v)) return;
            auto n = range_numeric(v);
            if (!n || *n < low || *n > high) violates = true;
        };
        if (const AttributeValue* v = t.case_attributes.find(id)) consider(*v);
        for (const Event& e : t.events)
            if (const AttributeValue* v = e.attributes.find(id)) consider(*v);
        if (violates) {
            ++f.affected_cases;
            add_sample(f, t.case_id);
        }
    }
    return f;
}

std::vector<QualityFinding> check_format_consistency(const EventLog& log) {
    std::vector<QualityFinding> out;

    // (a) timestamp granularity per activity
    std::array<std::uint64_t, kActivityCount> total_events{}, second_events{};
    for (const Trace& t : log.traces) {
        for (const Event& e : t.events) {
            auto i = static_cast<std::size_t>(e.activity);
            ++total_events[i];
            if (e.timestamp.second_of_minute() != 0) ++second_events[i];
        }
    }
    for (std::size_t i = 0; i < kActivityCount; ++i) {
        QualityFinding f;
        f.kind = RuleKind::Format;
        f.detail = "timestamp granularity: " + std::string(activity_name(kAllActivities[i]));
        f.affected_cases = second_events[i];  // events carrying a seconds component
        f.denominator = total_events[i];
        f.denominator_note = "events of the activity";
        f.annotations["granularity"] =
            !total_events[i] ? "n/a" : (second_events[i] ? "second" : "minute");
        out.push_back(std::move(f));
    }

    // (b) temperature unit heuristic: [25,45] Celsius, [80,115] Fahrenheit.
    QualityFinding f;
    f.kind = RuleKind::Format;
    f.detail = "temperature unit";
    f.denominator_note = "temperature values";
    std::uint64_t celsius = 0, fahrenheit = 0, implausible = 0;
    const AttrId temp = attrs().temperature;
    for (const Trace& t : log.traces) {
        for (const Event& e : t.events) {
            const AttributeValue* v = e.attributes.find(temp);
            if (!v || !has_any_value(*v)) continue;
            auto n = range_numeric(*v);
            if (!n)
                ++implausible;
            else if (*n >= 25 && *n <= 45)
                ++celsius;
            else if (*n >= 80 && *n <= 115)
                ++fahrenheit;
            else
                ++implausible;
        }
    }
    std::uint64_t total = celsius + fahrenheit + implausible;
    f.denominator = total;
    f.metrics["celsius_count"] = static_cast<double>(celsius);
    f.metrics["fahrenheit_count"] = static_cast<double>(fahrenheit);
    f.metrics["implausible_count"] = static_cast<double>(implausible);
    if (total) {
        f.metrics["celsius_pct"] = 100.0 * static_cast<double>(celsius) / static_cast<double>(total);
        f.metrics["fahrenheit_pct"] = 100.0 * static_cast<double>(fahrenheit) / static_cast<double>(total);
        f.metrics["implausible_pct"] =
            100.0 * static_cast<double>(implausible) / static_cast<double>(total);
    }
    out.push_back(std::move(f));
    return out;
}

QualityReport run_quality_suite(const EventLog& log, const QualityConfig& config, int threads) {
    auto missing = std::async(std::launch::async,
                              [&] { return check_missing_values(log, config.mandatory_case_attributes); });
    auto incomplete = std::async(std::launch::async,
                                 [&] { return check_incomplete_cases(log, config.mandatory_activities); });
    auto deps = std::async(std::launch::async,
                           [&] { return check_attribute_dependencies(log, config.dependencies); });
    auto anomalies = std::async(std::launch::async, [&] { return check_time_anomalies(log); });
    auto multi = std::async(std::launch::async, [&] { return check_multi_registration(log); });
    auto format = std::async(std::launch::async, [&] { return check_format_consistency(log); });
    std::vector<QualityFinding> ranges;
    for (const RangeRule& r : config.ranges)
        ranges.push_back(check_attribute_range(log, r.attribute, r.low, r.high));
    (void)threads;  // checks already run one worker each

    QualityReport report;
    for (auto& f : missing.get()) report.findings.push_back(std::move(f));
    report.findings.push_back(incomplete.get());
    for (auto& f : deps.get()) report.findings.push_back(std::move(f));
    report.findings.push_back(anomalies.get());
    for (auto& f : multi.get()) report.findings.push_back(std::move(f));
    for (auto& f : ranges) report.findings.push_back(std::move(f));
    for (auto& f : format.get()) report.findings.push_back(std::move(f));
    return report;
}

}  // namespace edlog
