#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edlog/event_log.hpp"
#include "edlog/source_model.hpp"

namespace edlog {

/// Declarative mapping from source tables to the event log: case notion,
/// case/event attribute split, triage timestamp offset and discharge
/// replication. Defaults reproduce the published extraction.
struct MappingConfig {
    std::string case_id_column = "stay_id";
    std::vector<AttrId> case_attribute_names;   // default: Table 3 set
    std::vector<AttrId> event_attribute_names;  // default: Table 4 set
    std::int64_t triage_offset_seconds = 1;
    bool discharge_replication = true;  // one discharge event per diagnosis row

    static MappingConfig defaults();
    /// Key-value file with keys case_id_column, triage_offset_seconds,
    /// case_attributes, event_attributes, discharge_replication. Missing file
    /// or missing keys fall back to defaults.
    static MappingConfig load(const std::string& path);

    /// Enforces disjoint attribute sets and a positive offset.
    void validate() const;
    std::uint64_t hash() const;

    bool is_case_attribute(AttrId id) const;
};

/// One derived event before grouping; source coordinates break timestamp ties.
struct RawEvent {
    std::int64_t stay_id = 0;
    Activity activity{};
    Timestamp timestamp;
    AttrMap attributes;
    std::uint8_t source_table = 0;  // index into kTableNames
    std::uint32_t source_row = 0;
};

struct CleanResult {
    SourceTables tables;
    std::vector<std::int64_t> rejected_stays;
};

/// Drops every stay whose outtime does not strictly exceed its intime,
/// cascading to all child-table rows of the rejected stays.
CleanResult clean_invalid_stays(SourceTables tables);

Timestamp synthesize_triage_timestamp(Timestamp intime, const MappingConfig& config);

struct DeriveResult {
    std::vector<RawEvent> events;
    IntegrityReport skipped;  // child rows whose stay is absent from edstays
};

DeriveResult derive_activity_events(const SourceTables& tables, const MappingConfig& config);

EventLog assemble_event_log(std::vector<RawEvent> events, const SourceTables& tables,
                            const MappingConfig& config);

struct FilterResult {
    EventLog log;
    std::size_t removed_count = 0;
    std::vector<std::int64_t> traces_without_enter;  // reported, left unmodified
};

/// Removes vital-sign / reconciliation / dispensation events at or before the
/// trace's Enter timestamp. Enter, Triage and Discharge are always retained.
FilterResult filter_pre_arrival_events(EventLog log);

struct ExtractionResult {
    EventLog log;
    std::vector<std::int64_t> rejected_stays;
    IntegrityReport skipped;
};

/// clean -> derive -> assemble convenience pipeline.
ExtractionResult extract_log(SourceTables tables, const MappingConfig& config);

}  // namespace edlog
