#include <benchmark/benchmark.h>

#include "edlog/analytics.hpp"
#include "edlog/extraction.hpp"
#include "edlog/quality.hpp"
#include "edlog/serialization.hpp"
#include "edlog/synthgen.hpp"

#include <filesystem>

namespace {

using namespace edlog;

SourceTables make_tables(std::uint32_t n_patients) {
    GenParams params;
    params.seed = 7;
    params.n_patients = n_patients;
    return generate_tables(params).tables;
}

EventLog make_log(std::uint32_t n_patients) {
    return extract_log(make_tables(n_patients), MappingConfig::defaults()).log;
}

std::string scratch_file(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

void BM_Extract(benchmark::State& state) {
    auto tables = make_tables(static_cast<std::uint32_t>(state.range(0)));
    std::size_t events = 0;
    for (auto _ : state) {
        auto result = extract_log(tables, MappingConfig::defaults());
        events = result.log.event_count();
        benchmark::DoNotOptimize(result.log);
    }
    state.counters["events"] = static_cast<double>(events);
}
BENCHMARK(BM_Extract)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_WriteCsv(benchmark::State& state) {
    auto log = make_log(static_cast<std::uint32_t>(state.range(0)));
    auto path = scratch_file("bench.csv");
    for (auto _ : state) benchmark::DoNotOptimize(write_csv(log, path));
    std::filesystem::remove(path);
}
BENCHMARK(BM_WriteCsv)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_WriteXes(benchmark::State& state) {
    auto log = make_log(static_cast<std::uint32_t>(state.range(0)));
    auto path = scratch_file("bench.xes");
    for (auto _ : state) benchmark::DoNotOptimize(write_xes(log, path));
    std::filesystem::remove(path);
}
BENCHMARK(BM_WriteXes)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ReadCsv(benchmark::State& state) {
    auto log = make_log(static_cast<std::uint32_t>(state.range(0)));
    auto path = scratch_file("bench_read.csv");
    write_csv(log, path);
    for (auto _ : state) {
        auto result = read_csv(path);
        benchmark::DoNotOptimize(result.log);
    }
    std::filesystem::remove(path);
}
BENCHMARK(BM_ReadCsv)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_MineDfg(benchmark::State& state) {
    auto log = make_log(static_cast<std::uint32_t>(state.range(0)));
    for (auto _ : state) {
        Dfg dfg = mine_dfg(log);
        benchmark::DoNotOptimize(dfg);
    }
}
BENCHMARK(BM_MineDfg)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_QualitySuite(benchmark::State& state) {
    auto log = make_log(static_cast<std::uint32_t>(state.range(0)));
    for (auto _ : state) {
        auto report = run_quality_suite(log, QualityConfig::defaults());
        benchmark::DoNotOptimize(report);
    }
}
BENCHMARK(BM_QualitySuite)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Simultaneity(benchmark::State& state) {
    auto tables = make_tables(static_cast<std::uint32_t>(state.range(0)));
    std::vector<StayInterval> intervals;
    for (const auto& s : tables.edstays) intervals.push_back({s.stay_id, s.intime, s.outtime});
    for (auto _ : state) {
        auto records = simultaneity_counts(intervals);
        benchmark::DoNotOptimize(records);
    }
}
BENCHMARK(BM_Simultaneity)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
