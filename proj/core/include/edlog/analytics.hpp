#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edlog/event_log.hpp"

namespace edlog {

struct DfgNode {
    std::uint64_t case_count = 0;  // cases containing the activity at least once
    double case_pct = 0;
    std::uint64_t occurrences = 0;
    std::optional<double> median_self_minutes;  // only when the activity self-loops
};

struct DfgEdge {
    std::uint64_t case_count = 0;  // cases with at least one (a,b) directly-follows pair
    double case_pct = 0;
    std::uint64_t occurrences = 0;
    double median_minutes = 0;  // pooled over all occurrences
};

/// Directly-follows graph with frequency and duration annotations.
struct Dfg {
    std::uint64_t total_cases = 0;
    std::map<Activity, DfgNode> nodes;
    std::map<std::pair<Activity, Activity>, DfgEdge> edges;
    std::map<Activity, std::uint64_t> start_counts;  // first event per trace
    std::map<Activity, std::uint64_t> end_counts;    // last event per trace

    std::string to_json() const;
};

Dfg mine_dfg(const EventLog& log);

enum class DotAnnotation { Frequency, Duration, Both };

struct DotOptions {
    double min_edge_coverage_pct = 0;  // edges below the floor are omitted
    DotAnnotation annotation = DotAnnotation::Both;
};

std::string export_dot(const Dfg& dfg, const DotOptions& options = {});

struct PathStats {
    double case_coverage_pct = 0;
    double median_minutes = 0;
    std::uint64_t occurrence_count = 0;
};

PathStats path_statistics(const EventLog& log, Activity from, Activity to);

enum class AcuityBand { High, Low, Unknown };      // {1,2} / {3,4,5} / absent
enum class Quadrant { Q1, Q2, Q3, Q4, Unclassified };

std::string_view quadrant_name(Quadrant q);

struct LosRecord {
    std::int64_t stay_id = 0;
    double los_minutes = 0;
    AcuityBand acuity_band = AcuityBand::Unknown;
    Quadrant quadrant = Quadrant::Unclassified;
};

/// LoS per trace: minutes from Enter to (last) Discharge. Traces lacking
/// either activity are skipped.
std::vector<LosRecord> compute_los(const EventLog& log);

struct QuadrantShares {
    std::uint64_t counts[5] = {0, 0, 0, 0, 0};  // Q1..Q4, Unclassified
    std::uint64_t total = 0;

    double share_pct(Quadrant q) const {
        return total ? 100.0 * static_cast<double>(counts[static_cast<int>(q)]) /
                           static_cast<double>(total)
                     : 0.0;
    }
};

/// Q1 high acuity & LoS <= threshold, Q4 high & prolonged, Q2 low & normal,
/// Q3 low & prolonged. The threshold boundary is inclusive on the normal side.
QuadrantShares classify_quadrants(std::vector<LosRecord>& records, double los_threshold_minutes);

/// Nearest-rank percentile of the LoS distribution; the default quadrant
/// threshold when none is given.
double los_percentile(const std::vector<LosRecord>& records, double percentile);

struct StayInterval {
    std::int64_t stay_id = 0;
    Timestamp intime;
    Timestamp outtime;
};

struct CrowdednessRecord {
    std::int64_t stay_id = 0;
    std::uint32_t simultaneous_count = 0;
    bool crowded = false;
};

/// Number of other stays overlapping each stay in time; boundary touches
/// count as overlap. Boundary-sorted counting, equivalent to the quadratic
/// pairwise definition. include_self shifts every count by +1.
std::vector<CrowdednessRecord> simultaneity_counts(std::span<const StayInterval> stays,
                                                   bool include_self = false);

/// Enter/Discharge intervals per trace, the input to simultaneity_counts.
std::vector<StayInterval> stay_intervals(const EventLog& log);

/// Nearest-rank percentile (smallest value whose cumulative share >= p).
std::uint32_t crowdedness_threshold(std::span<const std::uint32_t> counts, double percentile = 75);

/// Marks records crowded iff simultaneous_count >= threshold.
void apply_crowdedness_threshold(std::vector<CrowdednessRecord>& records, std::uint32_t threshold);

enum class SplitKind { Disposition, Crowdedness, Quadrant };

struct CohortComparison {
    std::vector<std::string> cohorts;
    std::vector<std::pair<Activity, Activity>> paths;
    // stats[cohort_index][path_index]
    std::vector<std::vector<PathStats>> stats;
    std::vector<std::uint64_t> cohort_sizes;
    std::uint64_t excluded_cases = 0;  // split undefined

    std::string to_json() const;
    std::string to_csv() const;
};

struct CohortOptions {
    double quadrant_threshold_minutes = 500;
    std::optional<std::uint32_t> crowdedness_threshold_override;
};

CohortComparison cohort_compare(const EventLog& log, SplitKind split,
                                std::span<const std::pair<Activity, Activity>> paths,
                                const CohortOptions& options = {});

/// Median with the even-count convention: mean of the two middle values.
double median_of(std::vector<double> values);

}  // namespace edlog
