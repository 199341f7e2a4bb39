#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "edlog/analytics.hpp"
#include "edlog/errors.hpp"
#include "edlog/extraction.hpp"
#include "edlog/synthgen.hpp"
#include "helpers.hpp"

using namespace edlog;

namespace {

double naive_median(std::vector<double> v) {
    REQUIRE(!v.empty());
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

/// Straightforward re-derivation of the directly-follows graph, used as the
/// oracle for mine_dfg.
struct NaiveDfg {
    std::map<std::pair<Activity, Activity>, std::uint64_t> edge_occ;
    std::map<std::pair<Activity, Activity>, std::uint64_t> edge_cases;
    std::map<std::pair<Activity, Activity>, std::vector<double>> edge_minutes;
    std::map<Activity, std::uint64_t> node_occ;
    std::map<Activity, std::uint64_t> node_cases;

    explicit NaiveDfg(const EventLog& log) {
        for (const Trace& t : log.traces) {
            std::set<Activity> seen;
            std::set<std::pair<Activity, Activity>> seen_edges;
            for (std::size_t i = 0; i < t.events.size(); ++i) {
                ++node_occ[t.events[i].activity];
                seen.insert(t.events[i].activity);
                if (i + 1 < t.events.size()) {
                    auto key = std::make_pair(t.events[i].activity, t.events[i + 1].activity);
                    ++edge_occ[key];
                    seen_edges.insert(key);
                    edge_minutes[key].push_back(
                        static_cast<double>(t.events[i + 1].timestamp - t.events[i].timestamp) /
                        60.0);
                }
            }
            for (Activity a : seen) ++node_cases[a];
            for (auto e : seen_edges) ++edge_cases[e];
        }
    }
};

}  // namespace

TEST_CASE("median convention: odd picks the middle, even averages the two middles") {
    CHECK(median_of({3.0}) == 3.0);
    CHECK(median_of({1.0, 2.0, 4.0}) == 2.0);
    CHECK(median_of({1.0, 2.0, 3.0, 10.0}) == 2.5);
    CHECK(median_of({5.0, 1.0}) == 3.0);  // order does not matter
}

TEST_CASE("mined graph equals the naive enumeration on seeded logs") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto log = testutil::seeded_log(seed, 40);
        REQUIRE(log.traces.size() <= 200);
        Dfg dfg = mine_dfg(log);
        NaiveDfg oracle(log);

        CHECK(dfg.total_cases == log.traces.size());
        REQUIRE(dfg.nodes.size() == oracle.node_occ.size());
        for (const auto& [a, node] : dfg.nodes) {
            CHECK(node.occurrences == oracle.node_occ.at(a));
            CHECK(node.case_count == oracle.node_cases.at(a));
            CHECK(node.case_pct ==
                  doctest::Approx(100.0 * static_cast<double>(oracle.node_cases.at(a)) /
                                  static_cast<double>(log.traces.size())));
        }
        REQUIRE(dfg.edges.size() == oracle.edge_occ.size());
        for (const auto& [key, edge] : dfg.edges) {
            CHECK(edge.occurrences == oracle.edge_occ.at(key));
            CHECK(edge.case_count == oracle.edge_cases.at(key));
            CHECK(edge.median_minutes == doctest::Approx(naive_median(oracle.edge_minutes.at(key))));
        }
    }
}

TEST_CASE("every trace starts at enter and ends at discharge") {
    auto log = testutil::seeded_log(2, 40);
    Dfg dfg = mine_dfg(log);
    REQUIRE(dfg.start_counts.size() == 1);
    CHECK(dfg.start_counts.begin()->first == Activity::EnterEd);
    CHECK(dfg.start_counts.begin()->second == log.traces.size());
    REQUIRE(dfg.end_counts.size() == 1);
    CHECK(dfg.end_counts.begin()->first == Activity::DischargeEd);
}

TEST_CASE("path statistics agree with the oracle") {
    auto log = testutil::seeded_log(13, 40);
    NaiveDfg oracle(log);
    for (Activity a : kAllActivities)
        for (Activity b : kAllActivities) {
            PathStats stats = path_statistics(log, a, b);
            auto key = std::make_pair(a, b);
            auto it = oracle.edge_occ.find(key);
            if (it == oracle.edge_occ.end()) {
                CHECK(stats.occurrence_count == 0);
                CHECK(stats.case_coverage_pct == 0);
            } else {
                CHECK(stats.occurrence_count == it->second);
                CHECK(stats.case_coverage_pct ==
                      doctest::Approx(100.0 * static_cast<double>(oracle.edge_cases.at(key)) /
                                      static_cast<double>(log.traces.size())));
                CHECK(stats.median_minutes ==
                      doctest::Approx(naive_median(oracle.edge_minutes.at(key))));
            }
        }
}

TEST_CASE("dot export honors the coverage floor") {
    auto log = testutil::seeded_log(4, 40);
    Dfg dfg = mine_dfg(log);
    std::string all = export_dot(dfg);
    for (Activity a : kAllActivities)
        CHECK(all.find(std::string(activity_name(a))) != std::string::npos);
    CHECK(all.find("__start") != std::string::npos);
    CHECK(all.find("__end") != std::string::npos);

    DotOptions strict;
    strict.min_edge_coverage_pct = 101;  // impossible floor: only start/end arcs remain
    std::string minimal = export_dot(dfg, strict);
    CHECK(minimal.size() < all.size());
    CHECK(minimal.find("min") == std::string::npos);  // no duration labels left
}

TEST_CASE("length of stay spans entry to the last discharge") {
    auto log = extract_log(testutil::three_stay_fixture(), MappingConfig::defaults()).log;
    auto records = compute_los(log);
    REQUIRE(records.size() == 3);
    CHECK(records[0].stay_id == 35146496);
    CHECK(records[0].los_minutes == doctest::Approx(145.0));  // 11:33 to 13:58
    CHECK(records[1].los_minutes == doctest::Approx(447.0));  // 18:16 to 01:43
    CHECK(records[2].los_minutes == doctest::Approx(378.0));  // 18:26 to 00:44
    for (const auto& r : records) CHECK(r.acuity_band == AcuityBand::High);  // acuity 2
}

TEST_CASE("quadrant classification is inclusive at the threshold") {
    std::vector<LosRecord> records(4);
    records[0] = {1, 500.0, AcuityBand::High, Quadrant::Unclassified};
    records[1] = {2, 500.01, AcuityBand::High, Quadrant::Unclassified};
    records[2] = {3, 400.0, AcuityBand::Low, Quadrant::Unclassified};
    records[3] = {4, 600.0, AcuityBand::Unknown, Quadrant::Unclassified};
    auto shares = classify_quadrants(records, 500.0);
    CHECK(records[0].quadrant == Quadrant::Q1);  // exactly at the threshold: normal
    CHECK(records[1].quadrant == Quadrant::Q4);
    CHECK(records[2].quadrant == Quadrant::Q2);
    CHECK(records[3].quadrant == Quadrant::Unclassified);
    CHECK(shares.total == 4);
    CHECK(shares.share_pct(Quadrant::Q1) == 25.0);
    CHECK(shares.counts[4] == 1);
}

TEST_CASE("nearest-rank percentile of the los distribution") {
    std::vector<LosRecord> records;
    for (double v : {10.0, 20.0, 30.0, 40.0}) records.push_back({0, v, AcuityBand::Low, {}});
    CHECK(los_percentile(records, 75) == 30.0);  // ceil(0.75*4) = 3rd smallest
    CHECK(los_percentile(records, 100) == 40.0);
    CHECK(los_percentile(records, 1) == 10.0);
}

TEST_CASE("simultaneity counting matches the quadratic definition") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        GenParams params;
        params.seed = seed;
        params.n_patients = 150;
        auto generated = generate_tables(params);
        const auto& stays = generated.tables.edstays;
        REQUIRE(stays.size() <= 2000);

        std::vector<StayInterval> intervals;
        for (const auto& s : stays) intervals.push_back({s.stay_id, s.intime, s.outtime});
        auto records = simultaneity_counts(intervals);
        REQUIRE(records.size() == stays.size());

        // oracle: pairwise boundary-inclusive overlap, self excluded
        for (std::size_t i = 0; i < stays.size(); ++i) {
            std::uint32_t expected = 0;
            for (std::size_t j = 0; j < stays.size(); ++j) {
                if (i == j) continue;
                bool disjoint = stays[j].intime > stays[i].outtime ||
                                stays[j].outtime < stays[i].intime;
                if (!disjoint) ++expected;
                // the overlap relation is symmetric
                bool disjoint_back = stays[i].intime > stays[j].outtime ||
                                     stays[i].outtime < stays[j].intime;
                REQUIRE(disjoint == disjoint_back);
            }
            CHECK(records[i].simultaneous_count == expected);
            CHECK(records[i].stay_id == stays[i].stay_id);
        }
    }
}

TEST_CASE("boundary touch counts as overlap; include_self adds one") {
    std::vector<StayInterval> stays = {
        {1, testutil::ts(2150, 1, 1, 8, 0), testutil::ts(2150, 1, 1, 10, 0)},
        {2, testutil::ts(2150, 1, 1, 10, 0), testutil::ts(2150, 1, 1, 12, 0)},  // touches stay 1
        {3, testutil::ts(2150, 1, 1, 12, 0, 1), testutil::ts(2150, 1, 1, 13, 0)},
    };
    auto records = simultaneity_counts(stays);
    CHECK(records[0].simultaneous_count == 1);
    CHECK(records[1].simultaneous_count == 1);  // second boundary misses stay 3 by one second
    CHECK(records[2].simultaneous_count == 0);
    auto with_self = simultaneity_counts(stays, /*include_self=*/true);
    for (std::size_t i = 0; i < stays.size(); ++i)
        CHECK(with_self[i].simultaneous_count == records[i].simultaneous_count + 1);
}

TEST_CASE("degenerate intervals are rejected") {
    std::vector<StayInterval> stays = {
        {1, testutil::ts(2150, 1, 1, 8, 0), testutil::ts(2150, 1, 1, 8, 0)}};
    CHECK_THROWS_AS(simultaneity_counts(stays), DataError);
}

TEST_CASE("crowdedness threshold is the nearest-rank 75th percentile") {
    std::vector<std::uint32_t> counts = {1, 2, 3, 4, 5, 6, 7, 8};
    CHECK(crowdedness_threshold(counts) == 6);  // ceil(0.75*8) = 6th smallest
    CHECK(crowdedness_threshold(counts, 50) == 4);
    std::vector<std::uint32_t> empty;
    CHECK_THROWS_AS(crowdedness_threshold(empty), UsageError);

    std::vector<CrowdednessRecord> records = {{1, 5, false}, {2, 6, false}, {3, 7, false}};
    apply_crowdedness_threshold(records, 6);
    CHECK_FALSE(records[0].crowded);
    CHECK(records[1].crowded);  // at the threshold counts as crowded
    CHECK(records[2].crowded);
}

TEST_CASE("cohort comparison splits by disposition") {
    auto log = testutil::seeded_log(21, 60);
    std::vector<std::pair<Activity, Activity>> paths = {
        {Activity::EnterEd, Activity::TriageEd}};
    auto cmp = cohort_compare(log, SplitKind::Disposition, paths);
    REQUIRE_FALSE(cmp.cohorts.empty());
    std::uint64_t total = cmp.excluded_cases;
    for (auto n : cmp.cohort_sizes) total += n;
    CHECK(total == log.traces.size());

    // per-cohort stats must equal stats over the corresponding sub-log
    for (std::size_t c = 0; c < cmp.cohorts.size(); ++c) {
        const std::string& label = cmp.cohorts[c];
        auto sub = sub_log(log, [&](const Trace& t) {
            const auto* v = t.case_attributes.find(attrs().disposition);
            return v && v->to_display() == label;
        });
        CHECK(sub.traces.size() == cmp.cohort_sizes[c]);
        PathStats expected = path_statistics(sub, Activity::EnterEd, Activity::TriageEd);
        CHECK(cmp.stats[c][0].occurrence_count == expected.occurrence_count);
        CHECK(cmp.stats[c][0].case_coverage_pct == doctest::Approx(expected.case_coverage_pct));
        CHECK(cmp.stats[c][0].median_minutes == doctest::Approx(expected.median_minutes));
    }

    CHECK(cmp.to_json().find("cohorts") != std::string::npos);
    CHECK(cmp.to_csv().find("cohort") != std::string::npos);
}

TEST_CASE("cohort comparison splits by quadrant and crowdedness") {
    auto log = testutil::seeded_log(22, 60);
    std::vector<std::pair<Activity, Activity>> paths = {
        {Activity::TriageEd, Activity::VitalSignCheck}};
    auto by_quadrant = cohort_compare(log, SplitKind::Quadrant, paths);
    std::uint64_t total = by_quadrant.excluded_cases;
    for (auto n : by_quadrant.cohort_sizes) total += n;
    CHECK(total == log.traces.size());

    auto by_crowd = cohort_compare(log, SplitKind::Crowdedness, paths);
    CHECK(by_crowd.cohorts.size() == 2);
    total = by_crowd.excluded_cases;
    for (auto n : by_crowd.cohort_sizes) total += n;
    CHECK(total == log.traces.size());
}
