#include "edlog/source_model.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <future>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "edlog/csv.hpp"
#include "edlog/errors.hpp"

namespace edlog {
namespace {

using nlohmann::json;

std::optional<std::int64_t> parse_int(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        // ids exported from floating-point frames sometimes read "123.0"
        double d = 0;
        auto [p2, ec2] = std::from_chars(s.data(), s.data() + s.size(), d);
        if (ec2 != std::errc() || p2 != s.data() + s.size()) return std::nullopt;
        std::int64_t i = static_cast<std::int64_t>(d);
        if (static_cast<double>(i) != d) return std::nullopt;
        return i;
    }
    return v;
}

OptDecimal parse_decimal(std::string_view s) {
    OptDecimal out;
    if (s.empty()) return out;
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && p == s.data() + s.size())
        out.value = v;
    else
        out.raw.assign(s);
    return out;
}

/// Resolves required column names against a header row; extra columns are
/// ignored. Throws listing expected vs found when a column is missing.
struct ColumnIndex {
    std::vector<std::size_t> idx;

    ColumnIndex(const std::string& table, std::span<const std::string_view> header,
                std::initializer_list<const char*> required) {
        for (const char* name : required) {
            std::size_t found = header.size();
            for (std::size_t i = 0; i < header.size(); ++i)
                if (header[i] == name) {
                    found = i;
                    break;
                }
            if (found == header.size()) {
                std::string have;
                for (auto h : header) {
                    if (!have.empty()) have += ",";
                    have.append(h);
                }
                std::string want;
                for (const char* r : required) {
                    if (!want.empty()) want += ",";
                    want += r;
                }
                throw DataError("malformed header in " + table + ".csv: expected columns [" + want +
                                "], found [" + have + "]");
            }
            idx.push_back(found);
        }
    }

    std::string_view get(std::span<const std::string_view> row, std::size_t i) const {
        return idx[i] < row.size() ? row[idx[i]] : std::string_view{};
    }
};

struct TableLoadState {
    std::vector<RejectedRow> rejected;
    std::size_t raw_rows = 0;

    void reject(const char* table, std::size_t line, std::string reason) {
        rejected.push_back({table, line, std::move(reason)});
    }
};

std::string table_path(const std::string& dir, const char* table) {
    return (std::filesystem::path(dir) / (std::string(table) + ".csv")).string();
}

void load_edstays(const std::string& path, std::vector<EdStayRecord>& out, TableLoadState& st) {
    std::optional<ColumnIndex> cols;
    std::unordered_set<std::int64_t> seen;
    for_each_csv_record(
        path,
        [&](std::span<const std::string_view> h) {
            cols.emplace("edstays", h,
                         std::initializer_list<const char*>{"subject_id", "hadm_id", "stay_id", "intime",
                                                            "outtime", "gender", "race",
                                                            "arrival_transport", "disposition"});
        },
        [&](std::span<const std::string_view> row, std::size_t line) {
            ++st.raw_rows;
            EdStayRecord r;
            auto sid = parse_int(cols->get(row, 0));
            auto stay = parse_int(cols->get(row, 2));
            auto in = Timestamp::parse(cols->get(row, 3));
            auto outt = Timestamp::parse(cols->get(row, 4));
            if (!sid) return st.reject("edstays", line, "unparseable subject_id");
            if (!stay) return st.reject("edstays", line, "unparseable stay_id");
            if (!in) return st.reject("edstays", line, "unparseable intime");
            if (!outt) return st.reject("edstays", line, "unparseable outtime");
            if (!seen.insert(*stay).second) return st.reject("edstays", line, "duplicate stay_id");
            r.subject_id = *sid;
            r.hadm_id = parse_int(cols->get(row, 1));
            r.stay_id = *stay;
            r.intime = *in;
            r.outtime = *outt;
            r.gender.assign(cols->get(row, 5));
            r.race.assign(cols->get(row, 6));
            r.arrival_transport.assign(cols->get(row, 7));
            r.disposition.assign(cols->get(row, 8));
            out.push_back(std::move(r));
        });
    if (!cols) throw DataError("empty file: " + path);
}

void load_triage(const std::string& path, std::vector<TriageRecord>& out, TableLoadState& st) {
    std::optional<ColumnIndex> cols;
    std::unordered_set<std::int64_t> seen;
    for_each_csv_record(
        path,
        [&](std::span<const std::string_view> h) {
            cols.emplace("triage", h,
                         std::initializer_list<const char*>{"subject_id", "stay_id", "temperature",
                                                            "heartrate", "resprate", "o2sat", "sbp", "dbp",
                                                            "pain", "acuity", "chiefcomplaint"});
        },
        [&](std::span<const std::string_view> row, std::size_t line) {
            ++st.raw_rows;
            auto sid = parse_int(cols->get(row, 0));
            auto stay = parse_int(cols->get(row, 1));
            if (!sid) return st.reject("triage", line, "unparseable subject_id");
            if (!stay) return st.reject("triage", line, "unparseable stay_id");
            if (!seen.insert(*stay).second) return st.reject("triage", line, "duplicate stay_id");
            TriageRecord r;
            r.subject_id = *sid;
            r.stay_id = *stay;
            r.temperature = parse_decimal(cols->get(row, 2));
            r.heartrate = parse_decimal(cols->get(row, 3));
            r.resprate = parse_decimal(cols->get(row, 4));
            r.o2sat = parse_decimal(cols->get(row, 5));
            r.sbp = parse_decimal(cols->get(row, 6));
            r.dbp = parse_decimal(cols->get(row, 7));
            r.pain.assign(cols->get(row, 8));
            r.acuity = parse_int(cols->get(row, 9));
            r.chiefcomplaint.assign(cols->get(row, 10));
            out.push_back(std::move(r));
        });
    if (!cols) throw DataError("empty file: " + path);
}

void load_vitalsign(const std::string& path, std::vector<VitalSignRecord>& out, TableLoadState& st) {
    std::optional<ColumnIndex> cols;
    for_each_csv_record(
        path,
        [&](std::span<const std::string_view> h) {
            cols.emplace("vitalsign", h,
                         std::initializer_list<const char*>{"subject_id", "stay_id", "charttime",
                                                            "temperature", "heartrate", "resprate", "o2sat",
                                                            "sbp", "dbp", "rhythm", "pain"});
        },
        [&](std::span<const std::string_view> row, std::size_t line) {
            ++st.raw_rows;
            auto sid = parse_int(cols->get(row, 0));
            auto stay = parse_int(cols->get(row, 1));
            auto ct = Timestamp::parse(cols->get(row, 2));
            if (!sid) return st.reject("vitalsign", line, "unparseable subject_id");
            if (!stay) return st.reject("vitalsign", line, "unparseable stay_id");
            if (!ct) return st.reject("vitalsign", line, "unparseable charttime");
            VitalSignRecord r;
            r.subject_id = *sid;
            r.stay_id = *stay;
            r.charttime = *ct;
            r.temperature = parse_decimal(cols->get(row, 3));
            r.heartrate = parse_decimal(cols->get(row, 4));
            r.resprate = parse_decimal(cols->get(row, 5));
            r.o2sat = parse_decimal(cols->get(row, 6));
            r.sbp = parse_decimal(cols->get(row, 7));
            r.dbp = parse_decimal(cols->get(row, 8));
            r.rhythm.assign(cols->get(row, 9));
            r.pain.assign(cols->get(row, 10));
            out.push_back(std::move(r));
        });
    if (!cols) throw DataError("empty file: " + path);
}

void load_medrecon(const std::string& path, std::vector<MedreconRecord>& out, TableLoadState& st) {
    std::optional<ColumnIndex> cols;
    for_each_csv_record(
        path,
        [&](std::span<const std::string_view> h) {
            cols.emplace("medrecon", h,
                         std::initializer_list<const char*>{"subject_id", "stay_id", "charttime", "name",
                                                            "gsn", "ndc", "etc_rn", "etccode",
                                                            "etcdescription"});
        },
        [&](std::span<const std::string_view> row, std::size_t line) {
            ++st.raw_rows;
            auto sid = parse_int(cols->get(row, 0));
            auto stay = parse_int(cols->get(row, 1));
            auto ct = Timestamp::parse(cols->get(row, 2));
            auto etc_rn = parse_int(cols->get(row, 6));
            if (!sid) return st.reject("medrecon", line, "unparseable subject_id");
            if (!stay) return st.reject("medrecon", line, "unparseable stay_id");
            if (!ct) return st.reject("medrecon", line, "unparseable charttime");
            if (!etc_rn) return st.reject("medrecon", line, "unparseable etc_rn");
            MedreconRecord r;
            r.subject_id = *sid;
            r.stay_id = *stay;
            r.charttime = *ct;
            r.name.assign(cols->get(row, 3));
            r.gsn.assign(cols->get(row, 4));
            r.ndc.assign(cols->get(row, 5));
            r.etc_rn = *etc_rn;
            r.etccode.assign(cols->get(row, 7));
            r.etcdescription.assign(cols->get(row, 8));
            out.push_back(std::move(r));
        });
    if (!cols) throw DataError("empty file: " + path);
}

void load_pyxis(const std::string& path, std::vector<PyxisRecord>& out, TableLoadState& st) {
    std::optional<ColumnIndex> cols;
    for_each_csv_record(
        path,
        [&](std::span<const std::string_view> h) {
            cols.emplace("pyxis", h,
                         std::initializer_list<const char*>{"subject_id", "stay_id", "charttime", "med_rn",
                                                            "name", "gsn_rn", "gsn"});
        },
        [&](std::span<const std::string_view> row, std::size_t line) {
            ++st.raw_rows;
            auto sid = parse_int(cols->get(row, 0));
            auto stay = parse_int(cols->get(row, 1));
            auto ct = Timestamp::parse(cols->get(row, 2));
            auto med_rn = parse_int(cols->get(row, 3));
            auto gsn_rn = parse_int(cols->get(row, 5));
            if (!sid) return st.reject("pyxis", line, "unparseable subject_id");
            if (!stay) return st.reject("pyxis", line, "unparseable stay_id");
            if (!ct) return st.reject("pyxis", line, "unparseable charttime");
            if (!med_rn) return st.reject("pyxis", line, "unparseable med_rn");
            if (!gsn_rn) return st.reject("pyxis", line, "unparseable gsn_rn");
            PyxisRecord r;
            r.subject_id = *sid;
            r.stay_id = *stay;
            r.charttime = *ct;
            r.med_rn = *med_rn;
            r.name.assign(cols->get(row, 4));
            r.gsn_rn = *gsn_rn;
            r.gsn.assign(cols->get(row, 6));
            out.push_back(std::move(r));
        });
    if (!cols) throw DataError("empty file: " + path);
}

void load_diagnosis(const std::string& path, std::vector<DiagnosisRecord>& out, TableLoadState& st) {
    std::optional<ColumnIndex> cols;
    std::unordered_set<std::uint64_t> seen;  // (stay_id, seq_num) pairs
    for_each_csv_record(
        path,
        [&](std::span<const std::string_view> h) {
            cols.emplace("diagnosis", h,
                         std::initializer_list<const char*>{"subject_id", "stay_id", "seq_num", "icd_code",
                                                            "icd_version", "icd_title"});
        },
        [&](std::span<const std::string_view> row, std::size_t line) {
            ++st.raw_rows;
            auto sid = parse_int(cols->get(row, 0));
            auto stay = parse_int(cols->get(row, 1));
            auto seq = parse_int(cols->get(row, 2));
            auto ver = parse_int(cols->get(row, 4));
            if (!sid) return st.reject("diagnosis", line, "unparseable subject_id");
            if (!stay) return st.reject("diagnosis", line, "unparseable stay_id");
            if (!seq || *seq < 1) return st.reject("diagnosis", line, "unparseable seq_num");
            if (!ver) return st.reject("diagnosis", line, "unparseable icd_version");
            std::uint64_t key = (static_cast<std::uint64_t>(*stay) << 16) ^
                                (static_cast<std::uint64_t>(*seq) * 0x9e3779b97f4a7c15ull);
            if (!seen.insert(key).second) {
                // cheap pre-filter only; confirm with a scan to avoid hash collisions
                bool dup = false;
                for (const auto& d : out)
                    if (d.stay_id == *stay && d.seq_num == *seq) {
                        dup = true;
                        break;
                    }
                if (dup) return st.reject("diagnosis", line, "duplicate (stay_id, seq_num)");
            }
            DiagnosisRecord r;
            r.subject_id = *sid;
            r.stay_id = *stay;
            r.seq_num = *seq;
            r.icd_code.assign(cols->get(row, 3));
            r.icd_version = *ver;
            r.icd_title.assign(cols->get(row, 5));
            out.push_back(std::move(r));
        });
    if (!cols) throw DataError("empty file: " + path);
}

}  // namespace

std::string IngestReport::to_json() const {
    json j;
    j["rejected_rows"] = json::array();
    for (const RejectedRow& r : rejected)
        j["rejected_rows"].push_back({{"table", r.table}, {"line", r.line}, {"reason", r.reason}});
    json counts;
    for (std::size_t i = 0; i < kTableNames.size(); ++i) counts[kTableNames[i]] = raw_row_counts[i];
    j["raw_row_counts"] = counts;
    return j.dump(2);
}

void IngestReport::write_json(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write rejected-row report: " + path);
    out << to_json() << "\n";
}

LoadResult load_source_tables(const std::string& directory, const IngestOptions& options) {
    for (const char* t : kTableNames) {
        std::string p = table_path(directory, t);
        if (!std::filesystem::exists(p)) throw IoError(std::string("missing table: ") + t);
    }

    LoadResult result;
    std::array<TableLoadState, 6> states;
    SourceTables& tb = result.tables;

    auto run = [&](int i) {
        switch (i) {
            case 0: load_edstays(table_path(directory, "edstays"), tb.edstays, states[0]); break;
            case 1: load_triage(table_path(directory, "triage"), tb.triage, states[1]); break;
            case 2: load_vitalsign(table_path(directory, "vitalsign"), tb.vitalsign, states[2]); break;
            case 3: load_medrecon(table_path(directory, "medrecon"), tb.medrecon, states[3]); break;
            case 4: load_pyxis(table_path(directory, "pyxis"), tb.pyxis, states[4]); break;
            case 5: load_diagnosis(table_path(directory, "diagnosis"), tb.diagnosis, states[5]); break;
        }
    };

    if (options.parallel) {
        std::array<std::future<void>, 6> futs;
        for (int i = 0; i < 6; ++i) futs[i] = std::async(std::launch::async, run, i);
        std::exception_ptr err;
        for (auto& f : futs) {
            try {
                f.get();
            } catch (...) {
                if (!err) err = std::current_exception();
            }
        }
        if (err) std::rethrow_exception(err);
    } else {
        for (int i = 0; i < 6; ++i) run(i);
    }

    for (std::size_t i = 0; i < 6; ++i) {
        result.report.raw_row_counts[i] = states[i].raw_rows;
        for (auto& r : states[i].rejected) result.report.rejected.push_back(std::move(r));
    }
    return result;
}

std::size_t IntegrityReport::total_orphans() const {
    std::size_t n = 0;
    for (const auto& t : tables) n += t.orphan_count;
    return n;
}

std::string IntegrityReport::to_json() const {
    json j = json::array();
    for (const auto& t : tables)
        j.push_back({{"table", t.table},
                     {"orphan_count", t.orphan_count},
                     {"sample_stay_ids", t.sample_stay_ids}});
    return j.dump(2);
}

IntegrityReport check_referential_integrity(const SourceTables& tables) {
    std::unordered_set<std::int64_t> parents;
    parents.reserve(tables.edstays.size() * 2);
    for (const auto& s : tables.edstays) parents.insert(s.stay_id);

    IntegrityReport report;
    auto scan = [&](const char* name, auto const& rows) {
        IntegrityReport::TableOrphans t;
        t.table = name;
        for (const auto& r : rows) {
            if (!parents.contains(r.stay_id)) {
                ++t.orphan_count;
                if (t.sample_stay_ids.size() < 10) t.sample_stay_ids.push_back(r.stay_id);
            }
        }
        report.tables.push_back(std::move(t));
    };
    scan("triage", tables.triage);
    scan("vitalsign", tables.vitalsign);
    scan("medrecon", tables.medrecon);
    scan("pyxis", tables.pyxis);
    scan("diagnosis", tables.diagnosis);
    return report;
}

}  // namespace edlog
