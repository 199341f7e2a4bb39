#include "edlog/event_log.hpp"

#include <cmath>
#include <unordered_set>

namespace edlog {

std::string_view activity_name(Activity a) {
    switch (a) {
        case Activity::EnterEd: return "Enter the ED";
        case Activity::TriageEd: return "Triage in the ED";
        case Activity::MedicineReconciliation: return "Medicine reconciliation";
        case Activity::VitalSignCheck: return "Vital sign check";
        case Activity::MedicineDispensation: return "Medicine dispensation";
        case Activity::DischargeEd: return "Discharge from the ED";
    }
    return "?";
}

std::optional<Activity> activity_from_name(std::string_view name) {
    for (Activity a : kAllActivities)
        if (activity_name(a) == name) return a;
    return std::nullopt;
}

std::size_t EventLog::event_count() const {
    std::size_t n = 0;
    for (const Trace& t : traces) n += t.events.size();
    return n;
}

std::optional<std::int64_t> LogStats::events_per_case_mean_rounded() const {
    if (!events_per_case_mean) return std::nullopt;
    return std::llround(*events_per_case_mean);
}

std::string LogStats::to_text() const {
    std::string s;
    s += "# Cases (stay_id): " + std::to_string(case_count) + "\n";
    s += "# Patients (subject_id): " + std::to_string(patient_count) + "\n";
    s += "# Events: " + std::to_string(event_count) + "\n";
    s += "# Activity types: " + std::to_string(activity_type_count) + "\n";
    if (events_per_case_mean) {
        s += "Avg. # events per case: " + std::to_string(*events_per_case_mean_rounded()) + "\n";
        s += "Min. # events per case: " + std::to_string(*events_per_case_min) + "\n";
        s += "Max. # events per case: " + std::to_string(*events_per_case_max) + "\n";
    }
    return s;
}

LogStats log_statistics(const EventLog& log) {
    LogStats st;
    st.case_count = log.traces.size();
    std::unordered_set<std::int64_t> patients;
    std::array<bool, kActivityCount> seen{};
    std::uint64_t min_e = 0, max_e = 0;
    bool first = true;
    for (const Trace& t : log.traces) {
        if (const AttributeValue* v = t.case_attributes.find(attrs().subject_id)) {
            if (auto* i = v->as_integer()) patients.insert(*i);
        }
        st.event_count += t.events.size();
        for (const Event& e : t.events) seen[static_cast<std::size_t>(e.activity)] = true;
        std::uint64_t n = t.events.size();
        if (first) {
            min_e = max_e = n;
            first = false;
        } else {
            min_e = std::min(min_e, n);
            max_e = std::max(max_e, n);
        }
    }
    st.patient_count = patients.size();
    for (bool b : seen)
        if (b) ++st.activity_type_count;
    if (st.case_count > 0) {
        st.events_per_case_mean = static_cast<double>(st.event_count) / static_cast<double>(st.case_count);
        st.events_per_case_min = min_e;
        st.events_per_case_max = max_e;
    }
    return st;
}

EventLog sub_log(const EventLog& log, const std::function<bool(const Trace&)>& case_predicate) {
    EventLog out;
    out.metadata = log.metadata;
    for (const Trace& t : log.traces)
        if (case_predicate(t)) out.traces.push_back(t);
    return out;
}

namespace {

void hash_mix(std::uint64_t& h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
}

std::uint64_t hash_str(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t hash_value(const AttributeValue& v) {
    std::uint64_t h = static_cast<std::uint64_t>(v.kind());
    switch (v.kind()) {
        case ValueKind::Absent: break;
        case ValueKind::AbsentWithRaw: hash_mix(h, hash_str(v.as_raw()->text)); break;
        case ValueKind::Text: hash_mix(h, hash_str(*v.as_text())); break;
        case ValueKind::Integer: hash_mix(h, static_cast<std::uint64_t>(*v.as_integer())); break;
        case ValueKind::Decimal: {
            double d = *v.as_decimal();
            std::uint64_t bits;
            static_assert(sizeof bits == sizeof d);
            __builtin_memcpy(&bits, &d, sizeof bits);
            hash_mix(h, bits);
            break;
        }
        case ValueKind::Time: hash_mix(h, static_cast<std::uint64_t>(v.as_time()->seconds())); break;
    }
    return h;
}

std::uint64_t hash_map(const AttrMap& m) {
    std::uint64_t h = 0;
    for (const auto& [id, val] : m) {
        hash_mix(h, hash_str(attr_name(id)));
        hash_mix(h, hash_value(val));
    }
    return h;
}

}  // namespace

std::uint64_t log_hash(const EventLog& log) {
    std::uint64_t h = 0;
    for (const Trace& t : log.traces) {
        hash_mix(h, static_cast<std::uint64_t>(t.case_id));
        hash_mix(h, hash_map(t.case_attributes));
        for (const Event& e : t.events) {
            hash_mix(h, static_cast<std::uint64_t>(e.activity));
            hash_mix(h, static_cast<std::uint64_t>(e.timestamp.seconds()));
            hash_mix(h, hash_map(e.attributes));
        }
    }
    return h;
}

bool logs_equal(const EventLog& a, const EventLog& b) { return a.traces == b.traces; }

}  // namespace edlog
