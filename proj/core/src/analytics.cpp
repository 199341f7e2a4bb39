#include "edlog/analytics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "edlog/errors.hpp"

namespace edlog {
namespace {

using nlohmann::json;

double minutes(std::int64_t seconds) { return static_cast<double>(seconds) / 60.0; }

std::string fmt_pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fmt_min(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

}  // namespace

double median_of(std::vector<double> values) {
    if (values.empty()) return 0;
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

Dfg mine_dfg(const EventLog& log) {
    Dfg dfg;
    dfg.total_cases = log.traces.size();

    struct EdgeAcc {
        std::uint64_t cases = 0, occurrences = 0;
        std::vector<double> durations;
    };
    std::map<std::pair<Activity, Activity>, EdgeAcc> edges;
    std::array<std::uint64_t, kActivityCount> node_cases{}, node_occ{};

    std::map<std::pair<Activity, Activity>, bool> seen_edge_in_trace;
    for (const Trace& t : log.traces) {
        std::array<bool, kActivityCount> seen_node{};
        seen_edge_in_trace.clear();
        for (std::size_t i = 0; i < t.events.size(); ++i) {
            auto a = t.events[i].activity;
            ++node_occ[static_cast<std::size_t>(a)];
            if (!seen_node[static_cast<std::size_t>(a)]) {
                seen_node[static_cast<std::size_t>(a)] = true;
                ++node_cases[static_cast<std::size_t>(a)];
            }
            if (i + 1 < t.events.size()) {
                auto b = t.events[i + 1].activity;
                EdgeAcc& acc = edges[{a, b}];
                ++acc.occurrences;
                acc.durations.push_back(minutes(t.events[i + 1].timestamp - t.events[i].timestamp));
                bool& seen = seen_edge_in_trace[{a, b}];
                if (!seen) {
                    seen = true;
                    ++acc.cases;
                }
            }
        }
        if (!t.events.empty()) {
            ++dfg.start_counts[t.events.front().activity];
            ++dfg.end_counts[t.events.back().activity];
        }
    }

    const double denom = dfg.total_cases ? static_cast<double>(dfg.total_cases) : 1.0;
    for (std::size_t i = 0; i < kActivityCount; ++i) {
        if (!node_cases[i]) continue;
        DfgNode n;
        n.case_count = node_cases[i];
        n.case_pct = 100.0 * static_cast<double>(node_cases[i]) / denom;
        n.occurrences = node_occ[i];
        dfg.nodes[kAllActivities[i]] = n;
    }
    for (auto& [key, acc] : edges) {
        DfgEdge e;
        e.case_count = acc.cases;
        e.case_pct = 100.0 * static_cast<double>(acc.cases) / denom;
        e.occurrences = acc.occurrences;
        e.median_minutes = median_of(std::move(acc.durations));
        if (key.first == key.second) dfg.nodes[key.first].median_self_minutes = e.median_minutes;
        dfg.edges[key] = e;
    }
    return dfg;
}

std::string Dfg::to_json() const {
    json j;
    j["total_cases"] = total_cases;
    json nodes_j = json::array();
    for (const auto& [a, n] : nodes) {
        json e{{"activity", std::string(activity_name(a))},
               {"case_count", n.case_count},
               {"case_pct", n.case_pct},
               {"occurrences", n.occurrences}};
        if (n.median_self_minutes) e["median_self_minutes"] = *n.median_self_minutes;
        nodes_j.push_back(std::move(e));
    }
    j["nodes"] = std::move(nodes_j);
    json edges_j = json::array();
    for (const auto& [key, e] : edges)
        edges_j.push_back({{"from", std::string(activity_name(key.first))},
                           {"to", std::string(activity_name(key.second))},
                           {"case_count", e.case_count},
                           {"case_pct", e.case_pct},
                           {"occurrences", e.occurrences},
                           {"median_minutes", e.median_minutes}});
    j["edges"] = std::move(edges_j);
    json starts = json::object(), ends = json::object();
    for (const auto& [a, c] : start_counts) starts[std::string(activity_name(a))] = c;
    for (const auto& [a, c] : end_counts) ends[std::string(activity_name(a))] = c;
    j["start_counts"] = std::move(starts);
    j["end_counts"] = std::move(ends);
    return j.dump(2);
}

std::string export_dot(const Dfg& dfg, const DotOptions& options) {
    std::ostringstream out;
    out << "digraph dfg {\n";
    out << "  rankdir=TB;\n";
    out << "  node [shape=box, style=rounded];\n";
    out << "  \"__start\" [shape=triangle, label=\"\"];\n";
    out << "  \"__end\" [shape=doublecircle, label=\"\"];\n";

    for (const auto& [a, n] : dfg.nodes) {
        out << "  \"" << activity_name(a) << "\" [label=\"" << activity_name(a) << "\\n"
            << fmt_pct(n.case_pct) << "% of cases\"];\n";
    }

    const double denom = dfg.total_cases ? static_cast<double>(dfg.total_cases) : 1.0;
    auto annotate = [&](double pct, std::uint64_t occurrences, std::optional<double> med) {
        std::string label;
        if (options.annotation != DotAnnotation::Duration) {
            label += fmt_pct(pct) + "% (" + std::to_string(occurrences) + ")";
        }
        if (options.annotation != DotAnnotation::Frequency && med) {
            if (!label.empty()) label += "\\n";
            label += fmt_min(*med) + " min";
        }
        return label;
    };

    for (const auto& [a, c] : dfg.start_counts) {
        double pct = 100.0 * static_cast<double>(c) / denom;
        if (pct < options.min_edge_coverage_pct) continue;
        out << "  \"__start\" -> \"" << activity_name(a) << "\" [style=dashed, label=\""
            << annotate(pct, c, std::nullopt) << "\"];\n";
    }
    for (const auto& [key, e] : dfg.edges) {
        if (e.case_pct < options.min_edge_coverage_pct) continue;
        out << "  \"" << activity_name(key.first) << "\" -> \"" << activity_name(key.second)
            << "\" [label=\"" << annotate(e.case_pct, e.occurrences, e.median_minutes) << "\"];\n";
    }
    for (const auto& [a, c] : dfg.end_counts) {
        double pct = 100.0 * static_cast<double>(c) / denom;
        if (pct < options.min_edge_coverage_pct) continue;
        out << "  \"" << activity_name(a) << "\" -> \"__end\" [style=dashed, label=\""
            << annotate(pct, c, std::nullopt) << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

PathStats path_statistics(const EventLog& log, Activity from, Activity to) {
    PathStats st;
    std::uint64_t covering = 0;
    std::vector<double> durations;
    for (const Trace& t : log.traces) {
        bool found = false;
        for (std::size_t i = 0; i + 1 < t.events.size(); ++i) {
            if (t.events[i].activity == from && t.events[i + 1].activity == to) {
                found = true;
                durations.push_back(minutes(t.events[i + 1].timestamp - t.events[i].timestamp));
            }
        }
        if (found) ++covering;
    }
    st.occurrence_count = durations.size();
    st.median_minutes = median_of(std::move(durations));
    st.case_coverage_pct =
        log.traces.empty() ? 0.0
                           : 100.0 * static_cast<double>(covering) / static_cast<double>(log.traces.size());
    return st;
}

std::string_view quadrant_name(Quadrant q) {
    switch (q) {
        case Quadrant::Q1: return "Q1";
        case Quadrant::Q2: return "Q2";
        case Quadrant::Q3: return "Q3";
        case Quadrant::Q4: return "Q4";
        case Quadrant::Unclassified: return "Unclassified";
    }
    return "?";
}

std::vector<LosRecord> compute_los(const EventLog& log) {
    const AttrId acuity_id = attrs().acuity;
    std::vector<LosRecord> out;
    out.reserve(log.traces.size());
    for (const Trace& t : log.traces) {
        std::optional<Timestamp> enter, discharge;
        for (const Event& e : t.events) {
            if (e.activity == Activity::EnterEd && !enter) enter = e.timestamp;
            if (e.activity == Activity::DischargeEd)
                discharge = discharge ? std::max(*discharge, e.timestamp) : e.timestamp;
        }
        if (!enter || !discharge) continue;
        LosRecord r;
        r.stay_id = t.case_id;
        r.los_minutes = minutes(*discharge - *enter);
        const AttributeValue* v = t.case_attributes.find(acuity_id);
        const std::int64_t* acuity = v ? v->as_integer() : nullptr;
        if (!acuity)
            r.acuity_band = AcuityBand::Unknown;
        else
            r.acuity_band = (*acuity <= 2) ? AcuityBand::High : AcuityBand::Low;
        out.push_back(r);
    }
    return out;
}

QuadrantShares classify_quadrants(std::vector<LosRecord>& records, double los_threshold_minutes) {
    if (los_threshold_minutes <= 0) throw UsageError("LoS threshold must be positive");
    QuadrantShares shares;
    for (LosRecord& r : records) {
        const bool normal = r.los_minutes <= los_threshold_minutes;  // "<= threshold" is normal
        switch (r.acuity_band) {
            case AcuityBand::High: r.quadrant = normal ? Quadrant::Q1 : Quadrant::Q4; break;
            case AcuityBand::Low: r.quadrant = normal ? Quadrant::Q2 : Quadrant::Q3; break;
            case AcuityBand::Unknown: r.quadrant = Quadrant::Unclassified; break;
        }
        ++shares.counts[static_cast<int>(r.quadrant)];
        ++shares.total;
    }
    return shares;
}

double los_percentile(const std::vector<LosRecord>& records, double percentile) {
    if (records.empty()) throw UsageError("LoS percentile of an empty set");
    std::vector<double> v;
    v.reserve(records.size());
    for (const LosRecord& r : records) v.push_back(r.los_minutes);
    std::sort(v.begin(), v.end());
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(percentile / 100.0 * static_cast<double>(v.size())));
    if (rank == 0) rank = 1;
    if (rank > v.size()) rank = v.size();
    return v[rank - 1];
}

std::vector<StayInterval> stay_intervals(const EventLog& log) {
    std::vector<StayInterval> out;
    out.reserve(log.traces.size());
    for (const Trace& t : log.traces) {
        std::optional<Timestamp> enter, discharge;
        for (const Event& e : t.events) {
            if (e.activity == Activity::EnterEd && !enter) enter = e.timestamp;
            if (e.activity == Activity::DischargeEd)
                discharge = discharge ? std::max(*discharge, e.timestamp) : e.timestamp;
        }
        if (!enter || !discharge) continue;
        out.push_back({t.case_id, *enter, *discharge});
    }
    return out;
}

std::vector<CrowdednessRecord> simultaneity_counts(std::span<const StayInterval> stays,
                                                   bool include_self) {
    // Overlap for p against p': not (p'.in > p.out or p'.out < p.in); boundary
    // touches overlap. Counting against sorted boundary arrays reproduces the
    // pairwise definition:
    //   count(p) = #{in' <= p.out} - #{out' < p.in} - (include_self ? 0 : 1)
    std::vector<std::int64_t> ins, outs;
    ins.reserve(stays.size());
    outs.reserve(stays.size());
    for (const StayInterval& s : stays) {
        if (s.outtime <= s.intime) throw DataError("stay " + std::to_string(s.stay_id) +
                                                   ": outtime must exceed intime");
        ins.push_back(s.intime.seconds());
        outs.push_back(s.outtime.seconds());
    }
    std::sort(ins.begin(), ins.end());
    std::sort(outs.begin(), outs.end());

    std::vector<CrowdednessRecord> out;
    out.reserve(stays.size());
    for (const StayInterval& s : stays) {
        auto entered = std::upper_bound(ins.begin(), ins.end(), s.outtime.seconds()) - ins.begin();
        auto left_before = std::lower_bound(outs.begin(), outs.end(), s.intime.seconds()) - outs.begin();
        std::int64_t count = entered - left_before;
        if (!include_self) --count;  // the stay itself always satisfies the predicate
        CrowdednessRecord r;
        r.stay_id = s.stay_id;
        r.simultaneous_count = static_cast<std::uint32_t>(count);
        out.push_back(r);
    }
    return out;
}

std::uint32_t crowdedness_threshold(std::span<const std::uint32_t> counts, double percentile) {
    if (counts.empty()) throw UsageError("crowdedness threshold of an empty distribution");
    std::vector<std::uint32_t> sorted(counts.begin(), counts.end());
    std::sort(sorted.begin(), sorted.end());
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(percentile / 100.0 * static_cast<double>(sorted.size())));
    if (rank == 0) rank = 1;
    if (rank > sorted.size()) rank = sorted.size();
    return sorted[rank - 1];
}

void apply_crowdedness_threshold(std::vector<CrowdednessRecord>& records, std::uint32_t threshold) {
    for (CrowdednessRecord& r : records) r.crowded = r.simultaneous_count >= threshold;
}

CohortComparison cohort_compare(const EventLog& log, SplitKind split,
                                std::span<const std::pair<Activity, Activity>> paths,
                                const CohortOptions& options) {
    CohortComparison cmp;
    cmp.paths.assign(paths.begin(), paths.end());

    // Cohort label per trace; empty label means the split is undefined there.
    std::unordered_map<std::int64_t, std::string> label_by_case;
    switch (split) {
        case SplitKind::Disposition: {
            const AttrId disp = attrs().disposition;
            for (const Trace& t : log.traces) {
                const AttributeValue* v = t.case_attributes.find(disp);
                if (v && v->as_text()) label_by_case[t.case_id] = *v->as_text();
            }
            break;
        }
        case SplitKind::Crowdedness: {
            std::vector<StayInterval> stays = stay_intervals(log);
            auto records = simultaneity_counts(stays);
            std::vector<std::uint32_t> counts;
            counts.reserve(records.size());
            for (const auto& r : records) counts.push_back(r.simultaneous_count);
            std::uint32_t threshold = options.crowdedness_threshold_override
                                          ? *options.crowdedness_threshold_override
                                          : (counts.empty() ? 0 : crowdedness_threshold(counts));
            apply_crowdedness_threshold(records, threshold);
            for (const auto& r : records)
                label_by_case[r.stay_id] = r.crowded ? "crowded" : "normal";
            break;
        }
        case SplitKind::Quadrant: {
            auto records = compute_los(log);
            classify_quadrants(records, options.quadrant_threshold_minutes);
            for (const auto& r : records)
                if (r.quadrant != Quadrant::Unclassified)
                    label_by_case[r.stay_id] = std::string(quadrant_name(r.quadrant));
            break;
        }
    }

    std::map<std::string, std::vector<const Trace*>> by_cohort;
    for (const Trace& t : log.traces) {
        auto it = label_by_case.find(t.case_id);
        if (it == label_by_case.end() || it->second.empty()) {
            ++cmp.excluded_cases;
            continue;
        }
        by_cohort[it->second].push_back(&t);
    }

    for (const auto& [name, traces] : by_cohort) {
        cmp.cohorts.push_back(name);
        cmp.cohort_sizes.push_back(traces.size());
        EventLog sub;
        sub.traces.reserve(traces.size());
        for (const Trace* t : traces) sub.traces.push_back(*t);
        std::vector<PathStats> row;
        for (const auto& [from, to] : cmp.paths) row.push_back(path_statistics(sub, from, to));
        cmp.stats.push_back(std::move(row));
    }
    return cmp;
}

std::string CohortComparison::to_json() const {
    json j;
    j["excluded_cases"] = excluded_cases;
    json cohorts_j = json::array();
    for (std::size_t i = 0; i < cohorts.size(); ++i) {
        json c;
        c["cohort"] = cohorts[i];
        c["cases"] = cohort_sizes[i];
        json paths_j = json::array();
        for (std::size_t p = 0; p < paths.size(); ++p) {
            paths_j.push_back({{"from", std::string(activity_name(paths[p].first))},
                               {"to", std::string(activity_name(paths[p].second))},
                               {"case_coverage_pct", stats[i][p].case_coverage_pct},
                               {"median_minutes", stats[i][p].median_minutes},
                               {"occurrences", stats[i][p].occurrence_count}});
        }
        c["paths"] = std::move(paths_j);
        cohorts_j.push_back(std::move(c));
    }
    j["cohorts"] = std::move(cohorts_j);
    return j.dump(2);
}

std::string CohortComparison::to_csv() const {
    std::ostringstream out;
    out << "cohort,cases,from,to,case_coverage_pct,median_minutes,occurrences\n";
    for (std::size_t i = 0; i < cohorts.size(); ++i) {
        for (std::size_t p = 0; p < paths.size(); ++p) {
            out << cohorts[i] << ',' << cohort_sizes[i] << ',' << activity_name(paths[p].first) << ','
                << activity_name(paths[p].second) << ',' << fmt_pct(stats[i][p].case_coverage_pct)
                << ',' << fmt_min(stats[i][p].median_minutes) << ',' << stats[i][p].occurrence_count
                << '\n';
        }
    }
    return out.str();
}

}  // namespace edlog
