// edlog: batch toolkit for extracting, validating and analyzing emergency
// department event logs from the six relational source tables.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "edlog/analytics.hpp"
#include "edlog/errors.hpp"
#include "edlog/event_log.hpp"
#include "edlog/extraction.hpp"
#include "edlog/quality.hpp"
#include "edlog/serialization.hpp"
#include "edlog/source_model.hpp"
#include "edlog/synthgen.hpp"

namespace {

using namespace edlog;

int resolve_threads(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("EDLOG_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    return hw > 0 ? hw : 1;
}

EventLog load_log(const std::string& path) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".xes") == 0) return read_xes(path);
    auto result = read_csv(path);
    for (const auto& w : result.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    return std::move(result.log);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    if (!content.empty() && content.back() != '\n') out << '\n';
}

/// Cohort expressions are "attribute=value" filters on case attributes,
/// compared as display text (e.g. acuity=3, disposition=HOME).
EventLog apply_cohort(const EventLog& log, const std::string& expr) {
    auto eq = expr.find('=');
    if (eq == std::string::npos || eq == 0)
        throw UsageError("cohort expression must look like attribute=value: " + expr);
    std::string attr_name = expr.substr(0, eq);
    std::string want = expr.substr(eq + 1);
    auto id = attr_id_if_known(attr_name);
    if (!id) throw UsageError("unknown cohort attribute: " + attr_name);
    return sub_log(log, [&](const Trace& trace) {
        const AttributeValue* v = trace.case_attributes.find(*id);
        return v && v->to_display() == want;
    });
}

int cmd_extract(const std::string& input, const std::string& config_path, const std::string& out_csv,
                const std::string& out_xes, bool filter, int threads) {
    MappingConfig config = config_path.empty() ? MappingConfig::defaults()
                                               : MappingConfig::load(config_path);
    IngestOptions ingest;
    ingest.parallel = threads > 1;
    LoadResult loaded = load_source_tables(input, ingest);
    if (!loaded.report.rejected.empty())
        std::fprintf(stderr, "note: %zu source rows rejected (see ingest report)\n",
                     loaded.report.rejected.size());

    ExtractionResult extracted = extract_log(std::move(loaded.tables), config);
    if (!extracted.rejected_stays.empty())
        std::printf("stays dropped (outtime not after intime): %zu\n",
                    extracted.rejected_stays.size());
    if (extracted.skipped.total_orphans() > 0)
        std::printf("child rows skipped (no matching stay): %zu\n",
                    extracted.skipped.total_orphans());

    EventLog log = std::move(extracted.log);
    if (filter) {
        FilterResult filtered = filter_pre_arrival_events(std::move(log));
        log = std::move(filtered.log);
        std::printf("pre-arrival events removed: %zu\n", filtered.removed_count);
    }

    std::printf("%s", log_statistics(log).to_text().c_str());
    if (!out_csv.empty()) {
        std::size_t rows = write_csv(log, out_csv);
        std::printf("csv rows written: %zu (%s)\n", rows, out_csv.c_str());
    }
    if (!out_xes.empty()) {
        std::size_t traces = write_xes(log, out_xes);
        std::printf("xes traces written: %zu (%s)\n", traces, out_xes.c_str());
    }
    return 0;
}

int cmd_validate(const std::string& log_path, const std::string& report_path,
                 const std::string& rules_path, int threads) {
    QualityConfig config =
        rules_path.empty() ? QualityConfig::defaults() : QualityConfig::load(rules_path);
    EventLog log = load_log(log_path);
    QualityReport report = run_quality_suite(log, config, threads);
    write_text_file(report_path, report.to_json());
    std::printf("%s", report.to_text().c_str());
    return 0;  // findings are reported, not treated as failure
}

int cmd_mine(const std::string& log_path, const std::string& dot_path, const std::string& json_path,
             const std::string& cohort, double min_coverage, const std::string& annotate) {
    DotOptions options;
    options.min_edge_coverage_pct = min_coverage;
    if (annotate == "frequency")
        options.annotation = DotAnnotation::Frequency;
    else if (annotate == "duration")
        options.annotation = DotAnnotation::Duration;
    else if (annotate == "both")
        options.annotation = DotAnnotation::Both;
    else
        throw UsageError("unknown annotation mode: " + annotate);

    EventLog log = load_log(log_path);
    if (!cohort.empty()) log = apply_cohort(log, cohort);
    Dfg dfg = mine_dfg(log);
    write_text_file(dot_path, export_dot(dfg, options));
    if (!json_path.empty()) write_text_file(json_path, dfg.to_json());
    std::printf("cases: %llu, nodes: %zu, edges: %zu\n",
                static_cast<unsigned long long>(dfg.total_cases), dfg.nodes.size(),
                dfg.edges.size());
    return 0;
}

const std::vector<std::pair<Activity, Activity>>& default_paths() {
    static const std::vector<std::pair<Activity, Activity>> paths = {
        {Activity::EnterEd, Activity::TriageEd},
        {Activity::TriageEd, Activity::MedicineReconciliation},
        {Activity::TriageEd, Activity::VitalSignCheck},
        {Activity::MedicineReconciliation, Activity::VitalSignCheck},
        {Activity::VitalSignCheck, Activity::MedicineDispensation},
        {Activity::MedicineDispensation, Activity::DischargeEd},
        {Activity::VitalSignCheck, Activity::DischargeEd},
    };
    return paths;
}

int cmd_analyze(const std::string& log_path, const std::string& mode, const std::string& out_path,
                double quadrant_threshold, std::optional<double> percentile,
                const std::string& split) {
    EventLog log = load_log(log_path);

    if (mode == "los") {
        std::vector<LosRecord> records = compute_los(log);
        std::string out = "stay_id,los_minutes\n";
        for (const auto& r : records) {
            out += std::to_string(r.stay_id);
            out += ',';
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.2f", r.los_minutes);
            out += buf;
            out += '\n';
        }
        write_text_file(out_path, out);
        std::printf("stays with length-of-stay: %zu\n", records.size());
        return 0;
    }
    if (mode == "quadrants") {
        std::vector<LosRecord> records = compute_los(log);
        double threshold = quadrant_threshold;
        if (percentile) threshold = los_percentile(records, *percentile);
        QuadrantShares shares = classify_quadrants(records, threshold);
        std::string out = "stay_id,los_minutes,quadrant\n";
        for (const auto& r : records) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%lld,%.2f,%s\n",
                          static_cast<long long>(r.stay_id), r.los_minutes,
                          std::string(quadrant_name(r.quadrant)).c_str());
            out += buf;
        }
        write_text_file(out_path, out);
        std::printf("threshold: %.2f minutes\n", threshold);
        for (Quadrant q : {Quadrant::Q1, Quadrant::Q2, Quadrant::Q3, Quadrant::Q4})
            std::printf("%s: %llu (%.2f%%)\n", std::string(quadrant_name(q)).c_str(),
                        static_cast<unsigned long long>(shares.counts[static_cast<int>(q)]),
                        shares.share_pct(q));
        return 0;
    }
    if (mode == "crowdedness") {
        std::vector<StayInterval> intervals = stay_intervals(log);
        std::vector<CrowdednessRecord> records = simultaneity_counts(intervals);
        std::vector<std::uint32_t> counts;
        counts.reserve(records.size());
        for (const auto& r : records) counts.push_back(r.simultaneous_count);
        std::uint32_t threshold = crowdedness_threshold(counts, percentile.value_or(75.0));
        apply_crowdedness_threshold(records, threshold);
        std::string out = "stay_id,simultaneous_count,crowded\n";
        std::uint64_t crowded = 0;
        for (const auto& r : records) {
            out += std::to_string(r.stay_id) + ',' + std::to_string(r.simultaneous_count) + ',' +
                   (r.crowded ? "1" : "0") + '\n';
            if (r.crowded) ++crowded;
        }
        write_text_file(out_path, out);
        std::printf("threshold: %u simultaneous stays\n", threshold);
        std::printf("crowded: %llu, non-crowded: %llu\n", static_cast<unsigned long long>(crowded),
                    static_cast<unsigned long long>(records.size() - crowded));
        return 0;
    }
    if (mode == "paths") {
        SplitKind kind;
        if (split == "disposition")
            kind = SplitKind::Disposition;
        else if (split == "crowdedness")
            kind = SplitKind::Crowdedness;
        else if (split == "quadrant")
            kind = SplitKind::Quadrant;
        else
            throw UsageError("unknown split: " + split);
        CohortOptions options;
        options.quadrant_threshold_minutes = quadrant_threshold;
        CohortComparison cmp = cohort_compare(log, kind, default_paths(), options);
        write_text_file(out_path, cmp.to_csv());
        for (std::size_t i = 0; i < cmp.cohorts.size(); ++i)
            std::printf("cohort %s: %llu cases\n", cmp.cohorts[i].c_str(),
                        static_cast<unsigned long long>(cmp.cohort_sizes[i]));
        return 0;
    }
    throw UsageError("unknown analysis mode: " + mode);
}

int cmd_synth(const std::string& params_path, const std::string& out_dir) {
    GenParams params = params_path.empty() ? GenParams{} : GenParams::load(params_path);
    GenerateResult result = generate_tables(params);
    write_tables_csv(result.tables, out_dir);
    result.truth.write_json(out_dir + "/ground_truth.json");
    std::printf("stays: %llu, expected events: %llu\n",
                static_cast<unsigned long long>(result.truth.n_stays),
                static_cast<unsigned long long>(result.truth.expected_event_count));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event log toolkit for emergency department visit data"};
    app.require_subcommand(1);

    int threads_flag = 0;
    app.add_option("--threads", threads_flag,
                   "Worker threads (default: EDLOG_THREADS env var, else all cores)");

    std::string input, config_path, out_csv, out_xes;
    bool filter = false;
    auto* extract = app.add_subcommand("extract", "Build an event log from the six source tables");
    extract->add_option("--input", input, "Directory with the six source CSV files")->required();
    extract->add_option("--config", config_path, "Mapping configuration (key=value file)");
    extract->add_option("--out-csv", out_csv, "Event log CSV output path");
    extract->add_option("--out-xes", out_xes, "XES output path");
    extract->add_flag("--filter-pre-arrival", filter,
                      "Drop optional events at or before the enter timestamp");

    std::string log_path, report_path, rules_path;
    auto* validate = app.add_subcommand("validate", "Run the data quality checks on an event log");
    validate->add_option("--log", log_path, "Event log (.csv or .xes)")->required();
    validate->add_option("--report", report_path, "JSON report output path")->required();
    validate->add_option("--rules", rules_path, "Quality rules (JSON file)");

    std::string dot_path, json_path, cohort, annotate = "both";
    double min_coverage = 0;
    auto* mine = app.add_subcommand("mine", "Mine a directly-follows process map");
    mine->add_option("--log", log_path, "Event log (.csv or .xes)")->required();
    mine->add_option("--dot", dot_path, "Graphviz DOT output path")->required();
    mine->add_option("--json", json_path, "Node/edge statistics JSON output path");
    mine->add_option("--cohort", cohort, "Case filter, e.g. acuity=3 or disposition=HOME");
    mine->add_option("--min-coverage", min_coverage, "Hide edges below this case-coverage percent");
    mine->add_option("--annotate", annotate, "Edge labels: frequency, duration or both");

    std::string mode, out_path, split = "disposition";
    double quadrant_threshold = 500;
    std::optional<double> percentile;
    double percentile_flag = -1;
    auto* analyze = app.add_subcommand("analyze", "Length-of-stay, crowdedness and path statistics");
    analyze->add_option("--log", log_path, "Event log (.csv or .xes)")->required();
    analyze->add_option("--mode", mode, "One of: los, quadrants, crowdedness, paths")->required();
    analyze->add_option("--out", out_path, "Output table path")->required();
    analyze->add_option("--threshold", quadrant_threshold,
                        "Length-of-stay threshold in minutes (quadrants, paths)");
    analyze->add_option("--percentile", percentile_flag,
                        "Derive the threshold from this percentile instead");
    analyze->add_option("--split", split, "Cohort split for paths: disposition, crowdedness, quadrant");

    std::string params_path, synth_out;
    auto* synth = app.add_subcommand("synth", "Generate synthetic source tables with ground truth");
    synth->add_option("--params", params_path, "Generator parameters (JSON file)");
    synth->add_option("--out", synth_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // usage errors map to exit code 1
    }

    try {
        int threads = resolve_threads(threads_flag);
        if (percentile_flag >= 0) percentile = percentile_flag;
        if (extract->parsed()) return cmd_extract(input, config_path, out_csv, out_xes, filter, threads);
        if (validate->parsed()) return cmd_validate(log_path, report_path, rules_path, threads);
        if (mine->parsed()) return cmd_mine(log_path, dot_path, json_path, cohort, min_coverage, annotate);
        if (analyze->parsed())
            return cmd_analyze(log_path, mode, out_path, quadrant_threshold, percentile, split);
        if (synth->parsed()) return cmd_synth(params_path, synth_out);
    } catch (const edlog::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 1;
}
