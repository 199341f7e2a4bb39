#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edlog/event_log.hpp"

namespace edlog {

enum class RuleKind {
    MissingValue,
    IncompleteCase,
    Dependency,
    TimeAnomaly,
    MultiRegistration,
    Range,
    Format,
};

std::string_view rule_kind_name(RuleKind kind);

/// One check result. Every rate carries its denominator and a note naming it,
/// so any reported rate can be recomputed from the raw counts.
struct QualityFinding {
    RuleKind kind{};
    std::string detail;  // attribute / activity / rule text this row refers to
    std::uint64_t affected_cases = 0;
    std::uint64_t denominator = 0;
    std::string denominator_note;
    std::vector<std::int64_t> sample_cases;          // bounded
    std::map<std::string, double> metrics;           // extra per-kind numbers
    std::map<std::string, std::string> annotations;  // extra per-kind text

    double rate_pct() const {
        return denominator ? 100.0 * static_cast<double>(affected_cases) / static_cast<double>(denominator)
                           : 0.0;
    }
};

struct QualityReport {
    std::vector<QualityFinding> findings;

    const QualityFinding* find(RuleKind kind, std::string_view detail) const;
    std::string to_json() const;
    std::string to_text() const;
};

struct DependencyRule {
    std::string condition_attribute;  // case attribute compared as text
    std::string condition_value;
    std::string required_attribute;  // looked up on the trace, then its events
    bool required_present = true;    // present vs required absent
};

struct RangeRule {
    std::string attribute;
    double low = 0;
    double high = 0;
};

struct QualityConfig {
    std::vector<std::string> mandatory_case_attributes;  // missing-value check
    std::vector<std::string> mandatory_activities;       // incomplete-case check
    std::vector<DependencyRule> dependencies;
    std::vector<RangeRule> ranges;

    static QualityConfig defaults();
    static QualityConfig load(const std::string& path);  // JSON rules file
};

inline constexpr std::size_t kSampleCaseLimit = 10;

QualityFinding check_missing_values_one(const EventLog& log, AttrId attribute);
std::vector<QualityFinding> check_missing_values(const EventLog& log,
                                                 const std::vector<std::string>& attributes);
QualityFinding check_incomplete_cases(const EventLog& log,
                                      const std::vector<std::string>& mandatory_activities);
std::vector<QualityFinding> check_attribute_dependencies(const EventLog& log,
                                                         const std::vector<DependencyRule>& rules);
QualityFinding check_time_anomalies(const EventLog& log);
std::vector<QualityFinding> check_multi_registration(const EventLog& log);
QualityFinding check_attribute_range(const EventLog& log, const std::string& attribute, double low,
                                     double high);
std::vector<QualityFinding> check_format_consistency(const EventLog& log);

/// Runs every check of the config (checks are independent and read-only).
QualityReport run_quality_suite(const EventLog& log, const QualityConfig& config, int threads = 0);

}  // namespace edlog
