#include "edlog/extraction.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "edlog/errors.hpp"

namespace edlog {
namespace {

std::vector<AttrId> default_case_attrs() {
    const auto& a = attrs();
    return {a.stay_id, a.subject_id, a.gender, a.race, a.arrival_transport,
            a.disposition, a.acuity, a.chiefcomplaint};
}

std::vector<AttrId> default_event_attrs() {
    const auto& a = attrs();
    return {a.hadm_id, a.temperature, a.heartrate, a.resprate, a.o2sat, a.sbp, a.dbp,
            a.pain,    a.rhythm,      a.name,      a.gsn,      a.ndc,   a.etc_rn,
            a.etccode, a.etcdescription, a.med_rn, a.gsn_rn,   a.seq_num,
            a.icd_code, a.icd_version, a.icd_title};
}

std::string trim(std::string s) {
    auto issp = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && issp(s.front())) s.erase(s.begin());
    while (!s.empty() && issp(s.back())) s.pop_back();
    return s;
}

std::vector<AttrId> parse_attr_list(const std::string& value) {
    std::vector<AttrId> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(attr_id(item));
    }
    return out;
}

void set_decimal(AttrMap& m, AttrId id, const OptDecimal& v) {
    if (v.value)
        m.set(id, AttributeValue::decimal(*v.value));
    else if (!v.raw.empty())
        m.set(id, AttributeValue::raw(v.raw));
}

void set_text(AttrMap& m, AttrId id, const std::string& v) {
    if (!v.empty()) m.set(id, AttributeValue::text(v));
}

constexpr std::uint8_t kEdstaysIdx = 0, kTriageIdx = 1, kVitalsignIdx = 2, kMedreconIdx = 3,
                       kPyxisIdx = 4, kDiagnosisIdx = 5;

}  // namespace

MappingConfig MappingConfig::defaults() {
    MappingConfig c;
    c.case_attribute_names = default_case_attrs();
    c.event_attribute_names = default_event_attrs();
    return c;
}

MappingConfig MappingConfig::load(const std::string& path) {
    MappingConfig c = defaults();
    std::ifstream in(path);
    if (!in) return c;  // absent file means paper defaults
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config " + path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key == "case_id_column") {
            c.case_id_column = value;
        } else if (key == "triage_offset_seconds") {
            try {
                c.triage_offset_seconds = std::stoll(value);
            } catch (...) {
                throw UsageError("config " + path + ": triage_offset_seconds must be an integer");
            }
        } else if (key == "case_attributes") {
            c.case_attribute_names = parse_attr_list(value);
        } else if (key == "event_attributes") {
            c.event_attribute_names = parse_attr_list(value);
        } else if (key == "discharge_replication") {
            if (value == "true" || value == "on" || value == "1")
                c.discharge_replication = true;
            else if (value == "false" || value == "off" || value == "0")
                c.discharge_replication = false;
            else
                throw UsageError("config " + path + ": discharge_replication must be true/false");
        } else {
            throw UsageError("config " + path + ": unknown key '" + key + "'");
        }
    }
    c.validate();
    return c;
}

void MappingConfig::validate() const {
    if (case_id_column != "stay_id")
        throw UsageError("unsupported case_id_column '" + case_id_column + "' (schema is fixed to stay_id)");
    if (triage_offset_seconds <= 0) throw UsageError("triage_offset_seconds must be positive");
    std::unordered_set<AttrId> case_set(case_attribute_names.begin(), case_attribute_names.end());
    for (AttrId id : event_attribute_names)
        if (case_set.contains(id))
            throw UsageError("attribute '" + attr_name(id) + "' listed as both case and event attribute");
}

std::uint64_t MappingConfig::hash() const {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ull;
    };
    for (char ch : case_id_column) mix(static_cast<unsigned char>(ch));
    for (AttrId id : case_attribute_names) mix(id + 1);
    mix(0xffff);
    for (AttrId id : event_attribute_names) mix(id + 1);
    mix(static_cast<std::uint64_t>(triage_offset_seconds));
    mix(discharge_replication ? 2 : 1);
    return h;
}

bool MappingConfig::is_case_attribute(AttrId id) const {
    return std::find(case_attribute_names.begin(), case_attribute_names.end(), id) !=
           case_attribute_names.end();
}

CleanResult clean_invalid_stays(SourceTables tables) {
    CleanResult result;
    std::unordered_set<std::int64_t> rejected;
    std::erase_if(tables.edstays, [&](const EdStayRecord& s) {
        if (s.outtime > s.intime) return false;
        rejected.insert(s.stay_id);
        return true;
    });
    for (std::int64_t id : rejected) result.rejected_stays.push_back(id);
    std::sort(result.rejected_stays.begin(), result.rejected_stays.end());
    auto drop = [&](auto& rows) {
        std::erase_if(rows, [&](const auto& r) { return rejected.contains(r.stay_id); });
    };
    drop(tables.triage);
    drop(tables.vitalsign);
    drop(tables.medrecon);
    drop(tables.pyxis);
    drop(tables.diagnosis);
    result.tables = std::move(tables);
    return result;
}

Timestamp synthesize_triage_timestamp(Timestamp intime, const MappingConfig& config) {
    return intime.plus_seconds(config.triage_offset_seconds);
}

namespace {

// When `release_consumed` is set, each child table is freed as soon as its
// rows have been turned into events, which roughly halves the peak memory of
// the full pipeline on large inputs. edstays and triage are kept: the
// assembly step still needs them for case attributes.
DeriveResult derive_activity_events_impl(SourceTables& tables, const MappingConfig& config,
                                         bool release_consumed) {
    const auto& a = attrs();
    DeriveResult result;
    auto& events = result.events;
    auto release = [&](auto& rows) {
        if (release_consumed) {
            rows.clear();
            rows.shrink_to_fit();
        }
    };

    std::unordered_map<std::int64_t, const TriageRecord*> triage_by_stay;
    triage_by_stay.reserve(tables.triage.size() * 2);
    for (const auto& t : tables.triage) triage_by_stay.emplace(t.stay_id, &t);

    std::unordered_map<std::int64_t, std::vector<std::uint32_t>> diagnosis_by_stay;
    for (std::uint32_t i = 0; i < tables.diagnosis.size(); ++i)
        diagnosis_by_stay[tables.diagnosis[i].stay_id].push_back(i);

    std::unordered_set<std::int64_t> stays;
    stays.reserve(tables.edstays.size() * 2);
    for (const auto& s : tables.edstays) stays.insert(s.stay_id);

    // Upper bound (a stay with diagnosis rows contributes max(1, rows) final
    // events): reserving once avoids a reallocation spike mid-pipeline.
    std::size_t estimate = tables.edstays.size() * 3 + tables.vitalsign.size() +
                           tables.medrecon.size() + tables.pyxis.size() + tables.diagnosis.size();
    events.reserve(estimate);

    IntegrityReport::TableOrphans skipped_triage{"triage", 0, {}}, skipped_vital{"vitalsign", 0, {}},
        skipped_medrecon{"medrecon", 0, {}}, skipped_pyxis{"pyxis", 0, {}},
        skipped_diagnosis{"diagnosis", 0, {}};
    auto note_skip = [](IntegrityReport::TableOrphans& t, std::int64_t stay) {
        ++t.orphan_count;
        if (t.sample_stay_ids.size() < 10) t.sample_stay_ids.push_back(stay);
    };

    for (std::uint32_t row = 0; row < tables.edstays.size(); ++row) {
        const EdStayRecord& s = tables.edstays[row];

        RawEvent enter;
        enter.stay_id = s.stay_id;
        enter.activity = Activity::EnterEd;
        enter.timestamp = s.intime;
        enter.source_table = kEdstaysIdx;
        enter.source_row = row;
        set_text(enter.attributes, a.arrival_transport, s.arrival_transport);
        if (s.hadm_id) enter.attributes.set(a.hadm_id, AttributeValue::integer(*s.hadm_id));
        events.push_back(std::move(enter));

        RawEvent triage;
        triage.stay_id = s.stay_id;
        triage.activity = Activity::TriageEd;
        triage.timestamp = synthesize_triage_timestamp(s.intime, config);
        triage.source_table = kTriageIdx;
        triage.source_row = row;
        if (auto it = triage_by_stay.find(s.stay_id); it != triage_by_stay.end()) {
            const TriageRecord& t = *it->second;
            set_decimal(triage.attributes, a.temperature, t.temperature);
            set_decimal(triage.attributes, a.heartrate, t.heartrate);
            set_decimal(triage.attributes, a.resprate, t.resprate);
            set_decimal(triage.attributes, a.o2sat, t.o2sat);
            set_decimal(triage.attributes, a.sbp, t.sbp);
            set_decimal(triage.attributes, a.dbp, t.dbp);
            set_text(triage.attributes, a.pain, t.pain);
            if (t.acuity) triage.attributes.set(a.acuity, AttributeValue::integer(*t.acuity));
            set_text(triage.attributes, a.chiefcomplaint, t.chiefcomplaint);
        }
        events.push_back(std::move(triage));

        auto make_discharge = [&](std::uint32_t src_row) {
            RawEvent d;
            d.stay_id = s.stay_id;
            d.activity = Activity::DischargeEd;
            d.timestamp = s.outtime;
            d.source_table = kEdstaysIdx;
            d.source_row = src_row;
            set_text(d.attributes, a.disposition, s.disposition);
            return d;
        };
        auto diag_it = diagnosis_by_stay.find(s.stay_id);
        if (config.discharge_replication && diag_it != diagnosis_by_stay.end() &&
            !diag_it->second.empty()) {
            for (std::uint32_t di : diag_it->second) {
                const DiagnosisRecord& d = tables.diagnosis[di];
                RawEvent ev = make_discharge(di);
                ev.source_table = kDiagnosisIdx;
                ev.attributes.set(a.seq_num, AttributeValue::integer(d.seq_num));
                set_text(ev.attributes, a.icd_code, d.icd_code);
                ev.attributes.set(a.icd_version, AttributeValue::integer(d.icd_version));
                set_text(ev.attributes, a.icd_title, d.icd_title);
                events.push_back(std::move(ev));
            }
        } else {
            events.push_back(make_discharge(row));
        }
    }

    for (const auto& t : tables.triage)
        if (!stays.contains(t.stay_id)) note_skip(skipped_triage, t.stay_id);

    for (const auto& d : tables.diagnosis)
        if (!stays.contains(d.stay_id)) note_skip(skipped_diagnosis, d.stay_id);
    release(tables.diagnosis);

    for (std::uint32_t row = 0; row < tables.vitalsign.size(); ++row) {
        const VitalSignRecord& v = tables.vitalsign[row];
        if (!stays.contains(v.stay_id)) {
            note_skip(skipped_vital, v.stay_id);
            continue;
        }
        RawEvent ev;
        ev.stay_id = v.stay_id;
        ev.activity = Activity::VitalSignCheck;
        ev.timestamp = v.charttime;
        ev.source_table = kVitalsignIdx;
        ev.source_row = row;
        set_decimal(ev.attributes, a.temperature, v.temperature);
        set_decimal(ev.attributes, a.heartrate, v.heartrate);
        set_decimal(ev.attributes, a.resprate, v.resprate);
        set_decimal(ev.attributes, a.o2sat, v.o2sat);
        set_decimal(ev.attributes, a.sbp, v.sbp);
        set_decimal(ev.attributes, a.dbp, v.dbp);
        set_text(ev.attributes, a.rhythm, v.rhythm);
        set_text(ev.attributes, a.pain, v.pain);
        events.push_back(std::move(ev));
    }
    release(tables.vitalsign);

    for (std::uint32_t row = 0; row < tables.medrecon.size(); ++row) {
        const MedreconRecord& m = tables.medrecon[row];
        if (!stays.contains(m.stay_id)) {
            note_skip(skipped_medrecon, m.stay_id);
            continue;
        }
        RawEvent ev;
        ev.stay_id = m.stay_id;
        ev.activity = Activity::MedicineReconciliation;
        ev.timestamp = m.charttime;
        ev.source_table = kMedreconIdx;
        ev.source_row = row;
        set_text(ev.attributes, a.name, m.name);
        set_text(ev.attributes, a.gsn, m.gsn);
        set_text(ev.attributes, a.ndc, m.ndc);
        ev.attributes.set(a.etc_rn, AttributeValue::integer(m.etc_rn));
        set_text(ev.attributes, a.etccode, m.etccode);
        set_text(ev.attributes, a.etcdescription, m.etcdescription);
        events.push_back(std::move(ev));
    }
    release(tables.medrecon);

    for (std::uint32_t row = 0; row < tables.pyxis.size(); ++row) {
        const PyxisRecord& p = tables.pyxis[row];
        if (!stays.contains(p.stay_id)) {
            note_skip(skipped_pyxis, p.stay_id);
            continue;
        }
        RawEvent ev;
        ev.stay_id = p.stay_id;
        ev.activity = Activity::MedicineDispensation;
        ev.timestamp = p.charttime;
        ev.source_table = kPyxisIdx;
        ev.source_row = row;
        ev.attributes.set(a.med_rn, AttributeValue::integer(p.med_rn));
        set_text(ev.attributes, a.name, p.name);
        ev.attributes.set(a.gsn_rn, AttributeValue::integer(p.gsn_rn));
        set_text(ev.attributes, a.gsn, p.gsn);
        events.push_back(std::move(ev));
    }
    release(tables.pyxis);

    result.skipped.tables = {std::move(skipped_triage), std::move(skipped_vital),
                             std::move(skipped_medrecon), std::move(skipped_pyxis),
                             std::move(skipped_diagnosis)};
    return result;
}

}  // namespace

DeriveResult derive_activity_events(const SourceTables& tables, const MappingConfig& config) {
    // The impl only mutates the tables when asked to release them.
    return derive_activity_events_impl(const_cast<SourceTables&>(tables), config,
                                       /*release_consumed=*/false);
}

EventLog assemble_event_log(std::vector<RawEvent> events, const SourceTables& tables,
                            const MappingConfig& config) {
    const auto& a = attrs();
    config.validate();

    std::unordered_map<std::int64_t, const TriageRecord*> triage_by_stay;
    triage_by_stay.reserve(tables.triage.size() * 2);
    for (const auto& t : tables.triage) triage_by_stay.emplace(t.stay_id, &t);

    EventLog log;
    log.metadata.config_hash = config.hash();
    log.traces.reserve(tables.edstays.size());
    std::unordered_map<std::int64_t, std::size_t> trace_index;
    trace_index.reserve(tables.edstays.size() * 2);

    for (const EdStayRecord& s : tables.edstays) {
        Trace t;
        t.case_id = s.stay_id;
        const TriageRecord* tri = nullptr;
        if (auto it = triage_by_stay.find(s.stay_id); it != triage_by_stay.end()) tri = it->second;
        for (AttrId id : config.case_attribute_names) {
            if (id == a.stay_id) {
                t.case_attributes.set(id, AttributeValue::integer(s.stay_id));
            } else if (id == a.subject_id) {
                t.case_attributes.set(id, AttributeValue::integer(s.subject_id));
            } else if (id == a.gender) {
                set_text(t.case_attributes, id, s.gender);
            } else if (id == a.race) {
                set_text(t.case_attributes, id, s.race);
            } else if (id == a.arrival_transport) {
                set_text(t.case_attributes, id, s.arrival_transport);
            } else if (id == a.disposition) {
                set_text(t.case_attributes, id, s.disposition);
            } else if (id == a.acuity) {
                if (tri && tri->acuity)
                    t.case_attributes.set(id, AttributeValue::integer(*tri->acuity));
            } else if (id == a.chiefcomplaint) {
                if (tri) set_text(t.case_attributes, id, tri->chiefcomplaint);
            } else {
                throw UsageError("unsupported case attribute '" + attr_name(id) + "'");
            }
        }
        trace_index.emplace(s.stay_id, log.traces.size());
        log.traces.push_back(std::move(t));
    }

    // Count per trace so event vectors are sized once.
    std::vector<std::uint32_t> counts(log.traces.size(), 0);
    for (const RawEvent& e : events) {
        auto it = trace_index.find(e.stay_id);
        if (it != trace_index.end()) ++counts[it->second];
    }
    struct Keyed {
        Timestamp ts;
        std::uint8_t prio;
        std::uint8_t table;
        std::uint32_t row;
        std::uint32_t event_index;
    };
    std::vector<std::vector<Keyed>> keyed(log.traces.size());
    for (std::size_t i = 0; i < keyed.size(); ++i) keyed[i].reserve(counts[i]);
    for (std::uint32_t i = 0; i < events.size(); ++i) {
        auto it = trace_index.find(events[i].stay_id);
        if (it == trace_index.end()) continue;  // derive already reported these
        const RawEvent& e = events[i];
        keyed[it->second].push_back(
            {e.timestamp, static_cast<std::uint8_t>(activity_priority(e.activity)), e.source_table,
             e.source_row, i});
    }

    for (std::size_t ti = 0; ti < log.traces.size(); ++ti) {
        auto& ks = keyed[ti];
        std::sort(ks.begin(), ks.end(), [](const Keyed& x, const Keyed& y) {
            if (x.ts != y.ts) return x.ts < y.ts;
            if (x.prio != y.prio) return x.prio < y.prio;
            if (x.table != y.table) return x.table < y.table;
            return x.row < y.row;
        });
        Trace& t = log.traces[ti];
        t.events.reserve(ks.size());
        for (const Keyed& k : ks) {
            RawEvent& e = events[k.event_index];
            Event ev;
            ev.activity = e.activity;
            ev.timestamp = e.timestamp;
            ev.attributes = std::move(e.attributes);
            // Case attributes live on the trace only.
            for (AttrId id : config.case_attribute_names) ev.attributes.erase(id);
            t.events.push_back(std::move(ev));
        }
    }
    return log;
}

FilterResult filter_pre_arrival_events(EventLog log) {
    FilterResult result;
    for (Trace& t : log.traces) {
        const Event* enter = nullptr;
        for (const Event& e : t.events)
            if (e.activity == Activity::EnterEd) {
                enter = &e;
                break;
            }
        if (!enter) {
            result.traces_without_enter.push_back(t.case_id);
            continue;
        }
        Timestamp enter_ts = enter->timestamp;
        std::size_t before = t.events.size();
        std::erase_if(t.events, [&](const Event& e) {
            switch (e.activity) {
                case Activity::VitalSignCheck:
                case Activity::MedicineReconciliation:
                case Activity::MedicineDispensation:
                    return e.timestamp <= enter_ts;
                default:
                    return false;
            }
        });
        result.removed_count += before - t.events.size();
    }
    result.log = std::move(log);
    return result;
}

ExtractionResult extract_log(SourceTables tables, const MappingConfig& config) {
    ExtractionResult result;
    CleanResult cleaned = clean_invalid_stays(std::move(tables));
    result.rejected_stays = std::move(cleaned.rejected_stays);
    DeriveResult derived =
        derive_activity_events_impl(cleaned.tables, config, /*release_consumed=*/true);
    result.skipped = std::move(derived.skipped);
    result.log = assemble_event_log(std::move(derived.events), cleaned.tables, config);
    return result;
}

}  // namespace edlog
