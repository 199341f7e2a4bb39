#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edlog/source_model.hpp"

namespace edlog {

struct DefectRates {
    double missing_acuity_pct = 0;           // % of stays with absent triage acuity
    double home_with_hadm_pct = 0;           // % of HOME stays given an hadm_id
    double admitted_without_hadm_pct = 0;    // % of ADMITTED stays stripped of hadm_id
    double pain_out_of_range_pct = 0;        // % of stays with an out-of-domain pain value
    double pre_arrival_event_pct = 0;        // % of stays given one pre-arrival child event
    double celsius_temperature_pct = 0;      // % of stays with temperatures in Celsius
};

/// Deterministic generator parameters; the seed fully determines the output.
struct GenParams {
    std::uint64_t seed = 1;
    std::uint32_t n_patients = 100;
    std::uint32_t max_stays_per_patient = 3;  // uniform 1..max
    std::uint32_t max_vitalsign_rows = 6;     // uniform 0..max per stay
    std::uint32_t max_medrecon_rows = 4;
    std::uint32_t max_pyxis_rows = 3;
    std::uint32_t max_diagnosis_rows = 3;
    std::uint32_t horizon_days = 30;
    std::uint32_t min_los_minutes = 30;
    std::uint32_t max_los_minutes = 900;
    DefectRates defects;

    static GenParams load(const std::string& path);  // JSON parameter file
    void validate() const;
};

/// Exact injected-defect bookkeeping plus closed-form expectations, written
/// alongside generated tables so downstream checks can assert equality.
struct GroundTruth {
    std::uint64_t n_stays = 0;
    std::uint64_t expected_event_count = 0;  // sum of 2 + #vit + #med + #pyx + max(1, #diag)
    std::uint64_t missing_acuity_count = 0;
    std::uint64_t home_with_hadm_count = 0;
    std::uint64_t admitted_without_hadm_count = 0;
    std::uint64_t pain_out_of_range_count = 0;
    std::uint64_t pre_arrival_event_count = 0;
    std::uint64_t celsius_value_count = 0;

    // Populated only when n_stays <= 2000.
    std::vector<std::int64_t> stay_ids;
    std::vector<std::uint32_t> vitalsign_counts, medrecon_counts, pyxis_counts, diagnosis_counts;
    std::vector<std::uint32_t> overlap_counts;  // pairwise-definition simultaneity, self excluded

    std::string to_json() const;
    void write_json(const std::string& path) const;
};

struct GenerateResult {
    SourceTables tables;
    GroundTruth truth;
};

GenerateResult generate_tables(const GenParams& params);

/// Writes the six source CSVs into the directory (creating it if needed).
void write_tables_csv(const SourceTables& tables, const std::string& directory);

}  // namespace edlog
