#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "edlog/extraction.hpp"
#include "edlog/source_model.hpp"
#include "edlog/synthgen.hpp"

namespace testutil {

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        std::string tmpl = (base / "edlog-test-XXXXXX").string();
        path_ = mkdtemp(tmpl.data());
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::string& path() const { return path_; }
    std::string file(const std::string& name) const {
        return (std::filesystem::path(path_) / name).string();
    }

private:
    std::string path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline edlog::Timestamp ts(int y, int mo, int d, int h, int mi, int s = 0) {
    return edlog::Timestamp::from_civil(y, mo, d, h, mi, s);
}

/// Small seeded log built through the full generate -> extract pipeline.
inline edlog::EventLog seeded_log(std::uint64_t seed, std::uint32_t n_patients = 40) {
    edlog::GenParams params;
    params.seed = seed;
    params.n_patients = n_patients;
    auto generated = edlog::generate_tables(params);
    auto extracted =
        edlog::extract_log(std::move(generated.tables), edlog::MappingConfig::defaults());
    return std::move(extracted.log);
}

/// The three-visit example used by the sparse-CSV golden test: one patient
/// with three stays, all discharged home.
inline edlog::SourceTables three_stay_fixture() {
    using edlog::OptDecimal;
    edlog::SourceTables t;
    const std::int64_t subj = 10010848;

    auto stay = [&](std::int64_t id, edlog::Timestamp in, edlog::Timestamp out,
                    const char* transport) {
        edlog::EdStayRecord s;
        s.subject_id = subj;
        s.stay_id = id;
        s.intime = in;
        s.outtime = out;
        s.gender = "F";
        s.race = "WHITE";
        s.arrival_transport = transport;
        s.disposition = "HOME";
        t.edstays.push_back(s);
    };
    auto triage = [&](std::int64_t id, double temp, const char* pain, std::int64_t acuity) {
        edlog::TriageRecord r;
        r.subject_id = subj;
        r.stay_id = id;
        r.temperature.value = temp;
        r.pain = pain;
        r.acuity = acuity;
        t.triage.push_back(r);
    };
    auto vital = [&](std::int64_t id, edlog::Timestamp when, OptDecimal temp, const char* pain) {
        edlog::VitalSignRecord r;
        r.subject_id = subj;
        r.stay_id = id;
        r.charttime = when;
        r.temperature = temp;
        r.pain = pain;
        t.vitalsign.push_back(r);
    };
    auto medrecon = [&](std::int64_t id, edlog::Timestamp when) {
        edlog::MedreconRecord r;
        r.subject_id = subj;
        r.stay_id = id;
        r.charttime = when;
        r.name = "Aspirin";
        r.etc_rn = 1;
        t.medrecon.push_back(r);
    };
    auto pyxis = [&](std::int64_t id, edlog::Timestamp when) {
        edlog::PyxisRecord r;
        r.subject_id = subj;
        r.stay_id = id;
        r.charttime = when;
        r.med_rn = 1;
        r.name = "Acetaminophen";
        r.gsn_rn = 1;
        t.pyxis.push_back(r);
    };
    auto diagnosis = [&](std::int64_t id) {
        edlog::DiagnosisRecord r;
        r.subject_id = subj;
        r.stay_id = id;
        r.seq_num = 1;
        r.icd_code = "R079";
        r.icd_version = 10;
        r.icd_title = "Chest pain, unspecified";
        t.diagnosis.push_back(r);
    };

    auto dec = [](double v) {
        OptDecimal d;
        d.value = v;
        return d;
    };

    stay(35146496, ts(2165, 10, 31, 11, 33), ts(2165, 10, 31, 13, 58), "AMBULANCE");
    triage(35146496, 98.8, "0", 2);
    vital(35146496, ts(2165, 10, 31, 11, 36), dec(98.8), "0");
    medrecon(35146496, ts(2165, 10, 31, 11, 51));
    vital(35146496, ts(2165, 10, 31, 13, 45), OptDecimal{}, "");
    diagnosis(35146496);

    stay(32354539, ts(2169, 6, 26, 18, 16), ts(2169, 6, 27, 1, 43), "WALK IN");
    triage(32354539, 97.9, "2", 2);
    medrecon(32354539, ts(2169, 6, 26, 22, 28));
    pyxis(32354539, ts(2169, 6, 26, 23, 3));
    diagnosis(32354539);

    stay(30505340, ts(2170, 1, 26, 18, 26), ts(2170, 1, 27, 0, 44), "WALK IN");
    triage(30505340, 98.2, "6", 2);
    vital(30505340, ts(2170, 1, 26, 18, 28), dec(98.2), "6");
    medrecon(30505340, ts(2170, 1, 26, 22, 48));
    vital(30505340, ts(2170, 1, 26, 22, 53), dec(98.0), "6");
    pyxis(30505340, ts(2170, 1, 26, 23, 47));
    vital(30505340, ts(2170, 1, 27, 0, 42), dec(98.1), "4");
    diagnosis(30505340);

    return t;
}

}  // namespace testutil
