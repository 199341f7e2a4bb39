#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "edlog/event_log.hpp"

namespace edlog {

enum class TimestampStyle { Dotted, Iso };  // DD.MM.YYYY vs YYYY-MM-DD

struct CsvOptions {
    TimestampStyle timestamp_style = TimestampStyle::Dotted;
    /// Sparse prints each case attribute only on its carrier activity's rows
    /// (arrival/gender/race on Enter, acuity/chiefcomplaint on Triage,
    /// disposition on Discharge); dense prints them on every row.
    bool dense = false;
};

/// Fixed CSV column order: stay_id, subject_id, timestamp, activity, then the
/// case-attribute columns, then the event-attribute columns.
const std::vector<std::string>& csv_column_order();

/// One row per event. Returns the number of data rows written.
std::size_t write_csv(const EventLog& log, const std::string& path, const CsvOptions& options = {});

struct CsvReadResult {
    EventLog log;
    std::vector<std::string> warnings;  // e.g. unknown pass-through columns
};

CsvReadResult read_csv(const std::string& path);

/// Returns the number of traces written.
std::size_t write_xes(const EventLog& log, const std::string& path);

EventLog read_xes(const std::string& path);

/// Well-formedness plus log/trace/event nesting and attribute-element checks.
/// Throws DataError describing the first violation.
void validate_xes_structure(const std::string& path);

}  // namespace edlog
