#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edlog/attribute.hpp"
#include "edlog/timestamp.hpp"

namespace edlog {

/// The six activity kinds. Enumerator order doubles as the tie-break
/// priority for events sharing a timestamp.
enum class Activity : std::uint8_t {
    EnterEd = 0,
    TriageEd = 1,
    MedicineReconciliation = 2,
    VitalSignCheck = 3,
    MedicineDispensation = 4,
    DischargeEd = 5,
};

inline constexpr std::size_t kActivityCount = 6;
inline constexpr std::array<Activity, kActivityCount> kAllActivities{
    Activity::EnterEd,       Activity::TriageEd,             Activity::MedicineReconciliation,
    Activity::VitalSignCheck, Activity::MedicineDispensation, Activity::DischargeEd};

std::string_view activity_name(Activity a);
std::optional<Activity> activity_from_name(std::string_view name);
inline int activity_priority(Activity a) { return static_cast<int>(a); }

struct Event {
    Activity activity{};
    Timestamp timestamp;
    AttrMap attributes;

    bool operator==(const Event&) const = default;
};

struct Trace {
    std::int64_t case_id = 0;  // stay_id
    AttrMap case_attributes;
    std::vector<Event> events;

    bool operator==(const Trace&) const = default;
};

struct LogMetadata {
    std::uint64_t config_hash = 0;
    std::string source;  // informational; not serialized
};

struct EventLog {
    std::vector<Trace> traces;
    LogMetadata metadata;

    std::size_t case_count() const { return traces.size(); }
    std::size_t event_count() const;
};

struct LogStats {
    std::uint64_t case_count = 0;
    std::uint64_t patient_count = 0;  // distinct subject_id
    std::uint64_t event_count = 0;
    std::uint64_t activity_type_count = 0;
    // Undefined when case_count == 0.
    std::optional<double> events_per_case_mean;
    std::optional<std::uint64_t> events_per_case_min;
    std::optional<std::uint64_t> events_per_case_max;

    /// Mean rounded to nearest integer, the display form used in reports.
    std::optional<std::int64_t> events_per_case_mean_rounded() const;
    std::string to_text() const;
};

LogStats log_statistics(const EventLog& log);

/// Traces satisfying the predicate, unmodified. The predicate must be pure.
EventLog sub_log(const EventLog& log, const std::function<bool(const Trace&)>& case_predicate);

/// Structural hash over traces, events and attributes; used to verify that
/// read-only passes leave the log untouched.
std::uint64_t log_hash(const EventLog& log);

/// Deep structural equality (traces in order, events in order, attributes).
bool logs_equal(const EventLog& a, const EventLog& b);

}  // namespace edlog
