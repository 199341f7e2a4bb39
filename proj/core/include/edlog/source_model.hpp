#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edlog/attribute.hpp"
#include "edlog/timestamp.hpp"

namespace edlog {

/// Numeric field that keeps the raw text when parsing fails; empty cells
/// are plain absent.
struct OptDecimal {
    std::optional<double> value;
    std::string raw;  // original text when value is nullopt and cell was non-empty

    bool absent() const { return !value && raw.empty(); }
    bool operator==(const OptDecimal&) const = default;
};

struct EdStayRecord {
    std::int64_t subject_id = 0;
    std::optional<std::int64_t> hadm_id;
    std::int64_t stay_id = 0;
    Timestamp intime;
    Timestamp outtime;
    std::string gender;
    std::string race;
    std::string arrival_transport;
    std::string disposition;
};

struct TriageRecord {
    std::int64_t subject_id = 0;
    std::int64_t stay_id = 0;
    OptDecimal temperature, heartrate, resprate, o2sat, sbp, dbp;
    std::string pain;  // free text; may be empty (absent)
    std::optional<std::int64_t> acuity;
    std::string chiefcomplaint;
};

struct VitalSignRecord {
    std::int64_t subject_id = 0;
    std::int64_t stay_id = 0;
    Timestamp charttime;
    OptDecimal temperature, heartrate, resprate, o2sat, sbp, dbp;
    std::string rhythm;
    std::string pain;
};

struct MedreconRecord {
    std::int64_t subject_id = 0;
    std::int64_t stay_id = 0;
    Timestamp charttime;
    std::string name;
    std::string gsn;
    std::string ndc;
    std::int64_t etc_rn = 0;
    std::string etccode;
    std::string etcdescription;
};

struct PyxisRecord {
    std::int64_t subject_id = 0;
    std::int64_t stay_id = 0;
    Timestamp charttime;
    std::int64_t med_rn = 0;
    std::string name;
    std::int64_t gsn_rn = 0;
    std::string gsn;
};

struct DiagnosisRecord {
    std::int64_t subject_id = 0;
    std::int64_t stay_id = 0;
    std::int64_t seq_num = 0;
    std::string icd_code;
    std::int64_t icd_version = 0;
    std::string icd_title;
};

struct SourceTables {
    std::vector<EdStayRecord> edstays;
    std::vector<TriageRecord> triage;
    std::vector<VitalSignRecord> vitalsign;
    std::vector<MedreconRecord> medrecon;
    std::vector<PyxisRecord> pyxis;
    std::vector<DiagnosisRecord> diagnosis;
};

inline constexpr std::array<const char*, 6> kTableNames{
    "edstays", "triage", "vitalsign", "medrecon", "pyxis", "diagnosis"};

struct RejectedRow {
    std::string table;
    std::size_t line = 0;  // 1-based line in the source CSV
    std::string reason;
};

struct IngestReport {
    std::vector<RejectedRow> rejected;
    // Raw data-row counts per table, in kTableNames order.
    std::array<std::size_t, 6> raw_row_counts{};

    std::string to_json() const;
    void write_json(const std::string& path) const;
};

struct IngestOptions {
    bool parallel = true;  // one worker per file
};

struct LoadResult {
    SourceTables tables;
    IngestReport report;
};

/// Loads the six CSV tables from a directory. Rows with unparseable mandatory
/// fields (ids, required timestamps) go to the rejected-row report rather than
/// being dropped silently. Missing file or malformed header is fatal.
LoadResult load_source_tables(const std::string& directory, const IngestOptions& options = {});

struct IntegrityReport {
    struct TableOrphans {
        std::string table;
        std::size_t orphan_count = 0;
        std::vector<std::int64_t> sample_stay_ids;  // bounded sample
    };
    std::vector<TableOrphans> tables;  // one entry per child table

    std::size_t total_orphans() const;
    std::string to_json() const;
};

/// Lists every child-table row whose stay_id has no edstays parent.
IntegrityReport check_referential_integrity(const SourceTables& tables);

}  // namespace edlog
