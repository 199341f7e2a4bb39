#include "edlog/synthgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "edlog/csv.hpp"
#include "edlog/errors.hpp"

namespace edlog {

namespace {

/// mt19937_64 has a standard-specified sequence, so the same seed produces
/// the same tables on every platform.
struct Rng {
    std::mt19937_64 engine;

    explicit Rng(std::uint64_t seed) : engine(seed) {}

    std::uint64_t next() { return engine(); }
    std::uint32_t below(std::uint32_t n) { return static_cast<std::uint32_t>(next() % n); }
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

/// Picks exactly k of n indices with a partial Fisher-Yates shuffle; the
/// result is sorted so defects are applied in table order.
std::vector<std::size_t> pick_k(std::size_t n, std::size_t k, Rng& rng) {
    k = std::min(k, n);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i)
        std::swap(idx[i], idx[i + rng.below(static_cast<std::uint32_t>(n - i))]);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::size_t defect_count(double pct, std::size_t cohort) {
    return static_cast<std::size_t>(std::llround(pct * static_cast<double>(cohort) / 100.0));
}

constexpr const char* kRaces[] = {"WHITE", "BLACK/AFRICAN AMERICAN", "HISPANIC/LATINO", "ASIAN",
                                  "OTHER", "UNKNOWN"};
constexpr const char* kTransports[] = {"WALK IN", "AMBULANCE", "UNKNOWN", "OTHER"};
constexpr const char* kComplaints[] = {"Chest pain",      "Abdominal pain", "Dyspnea",
                                       "Headache",        "Fever",          "Back pain",
                                       "Dizziness",       "Nausea",         "s/p fall",
                                       "Leg swelling"};
constexpr const char* kRhythms[] = {"", "Sinus Rhythm", "Atrial Fibrillation", "Sinus Tachycardia"};
constexpr const char* kMedNames[] = {"Acetaminophen", "Ibuprofen",  "Ondansetron", "Morphine",
                                     "Lisinopril",    "Metoprolol", "Aspirin",     "Omeprazole"};
constexpr const char* kEtcDescriptions[] = {"Analgesic - Non-Opioid", "Analgesic - Opioid",
                                            "Antiemetic", "Beta Blocker", "ACE Inhibitor"};
struct IcdEntry {
    const char* code;
    int version;
    const char* title;
};
constexpr IcdEntry kIcd[] = {
    {"R079", 10, "Chest pain, unspecified"},
    {"R109", 10, "Unspecified abdominal pain"},
    {"78650", 9, "Chest pain, unspecified"},
    {"R51", 10, "Headache"},
    {"78900", 9, "Abdominal pain, unspecified site"},
    {"R0602", 10, "Shortness of breath"},
    {"M545", 10, "Low back pain"},
};

std::string dec_str(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string opt_dec_str(const OptDecimal& d) {
    if (d.value) return dec_str(*d.value);
    return d.raw;
}

double round1(double v) { return std::round(v * 10.0) / 10.0; }

}  // namespace

GenParams GenParams::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open parameter file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("invalid parameter file " + path + ": " + e.what());
    }
    GenParams p;
    auto get = [&](const nlohmann::json& obj, const char* key, auto& field) {
        if (obj.contains(key)) field = obj.at(key).get<std::decay_t<decltype(field)>>();
    };
    get(j, "seed", p.seed);
    get(j, "n_patients", p.n_patients);
    get(j, "max_stays_per_patient", p.max_stays_per_patient);
    get(j, "max_vitalsign_rows", p.max_vitalsign_rows);
    get(j, "max_medrecon_rows", p.max_medrecon_rows);
    get(j, "max_pyxis_rows", p.max_pyxis_rows);
    get(j, "max_diagnosis_rows", p.max_diagnosis_rows);
    get(j, "horizon_days", p.horizon_days);
    get(j, "min_los_minutes", p.min_los_minutes);
    get(j, "max_los_minutes", p.max_los_minutes);
    if (j.contains("defects")) {
        const auto& d = j.at("defects");
        get(d, "missing_acuity_pct", p.defects.missing_acuity_pct);
        get(d, "home_with_hadm_pct", p.defects.home_with_hadm_pct);
        get(d, "admitted_without_hadm_pct", p.defects.admitted_without_hadm_pct);
        get(d, "pain_out_of_range_pct", p.defects.pain_out_of_range_pct);
        get(d, "pre_arrival_event_pct", p.defects.pre_arrival_event_pct);
        get(d, "celsius_temperature_pct", p.defects.celsius_temperature_pct);
    }
    p.validate();
    return p;
}

void GenParams::validate() const {
    if (n_patients == 0) throw UsageError("n_patients must be positive");
    if (max_stays_per_patient == 0) throw UsageError("max_stays_per_patient must be positive");
    if (horizon_days == 0) throw UsageError("horizon_days must be positive");
    if (min_los_minutes == 0 || max_los_minutes < min_los_minutes)
        throw UsageError("length-of-stay bounds must satisfy 0 < min <= max");
    for (double pct : {defects.missing_acuity_pct, defects.home_with_hadm_pct,
                       defects.admitted_without_hadm_pct, defects.pain_out_of_range_pct,
                       defects.pre_arrival_event_pct, defects.celsius_temperature_pct})
        if (pct < 0 || pct > 100) throw UsageError("defect rates must be between 0 and 100");
}

GenerateResult generate_tables(const GenParams& params) {
    params.validate();
    Rng rng(params.seed);

    GenerateResult out;
    SourceTables& t = out.tables;
    GroundTruth& gt = out.truth;

    std::int64_t next_hadm = 20000000;
    std::int64_t next_stay = 30000000;

    for (std::uint32_t pi = 0; pi < params.n_patients; ++pi) {
        std::int64_t subject = 10000000 + pi;
        const char* gender = rng.below(2) ? "F" : "M";
        const char* race = kRaces[rng.below(std::size(kRaces))];
        std::uint32_t n_stays = 1 + rng.below(params.max_stays_per_patient);

        for (std::uint32_t si = 0; si < n_stays; ++si) {
            EdStayRecord s;
            s.subject_id = subject;
            s.stay_id = next_stay++;
            std::int64_t start = Timestamp::from_civil(2150, 1, 1).seconds();
            s.intime = Timestamp(start + rng.below(params.horizon_days * 86400u));
            std::uint32_t los_min =
                params.min_los_minutes + rng.below(params.max_los_minutes - params.min_los_minutes + 1);
            s.outtime = s.intime.plus_seconds(static_cast<std::int64_t>(los_min) * 60);
            s.gender = gender;
            s.race = race;
            s.arrival_transport = kTransports[rng.below(std::size(kTransports))];
            double u = rng.unit();
            if (u < 0.55) {
                s.disposition = "HOME";
            } else if (u < 0.90) {
                s.disposition = "ADMITTED";
                s.hadm_id = next_hadm++;
            } else if (u < 0.95) {
                s.disposition = "TRANSFER";
            } else {
                s.disposition = "LEFT WITHOUT BEING SEEN";
            }

            TriageRecord tr;
            tr.subject_id = subject;
            tr.stay_id = s.stay_id;
            tr.temperature.value = 96.0 + rng.below(60) / 10.0;  // Fahrenheit
            tr.heartrate.value = 55.0 + rng.below(70);
            tr.resprate.value = 12.0 + rng.below(12);
            tr.o2sat.value = 90.0 + rng.below(11);
            tr.sbp.value = 95.0 + rng.below(70);
            tr.dbp.value = 55.0 + rng.below(45);
            tr.pain = std::to_string(rng.below(11));
            tr.acuity = 1 + rng.below(5);
            tr.chiefcomplaint = kComplaints[rng.below(std::size(kComplaints))];
            t.triage.push_back(std::move(tr));

            // Child rows land on whole minutes strictly inside (intime, outtime].
            auto child_time = [&]() {
                std::int64_t minute = s.intime.seconds() / 60 + 1 + rng.below(los_min);
                return Timestamp(minute * 60);
            };

            std::uint32_t n_vit = params.max_vitalsign_rows ? rng.below(params.max_vitalsign_rows + 1) : 0;
            for (std::uint32_t j = 0; j < n_vit; ++j) {
                VitalSignRecord v;
                v.subject_id = subject;
                v.stay_id = s.stay_id;
                v.charttime = child_time();
                if (rng.unit() < 0.7) v.temperature.value = 96.0 + rng.below(60) / 10.0;
                v.heartrate.value = 55.0 + rng.below(70);
                v.resprate.value = 12.0 + rng.below(12);
                v.o2sat.value = 90.0 + rng.below(11);
                v.sbp.value = 95.0 + rng.below(70);
                v.dbp.value = 55.0 + rng.below(45);
                v.rhythm = kRhythms[rng.below(std::size(kRhythms))];
                if (rng.unit() < 0.8) v.pain = std::to_string(rng.below(11));
                t.vitalsign.push_back(std::move(v));
            }

            std::uint32_t n_med = params.max_medrecon_rows ? rng.below(params.max_medrecon_rows + 1) : 0;
            for (std::uint32_t j = 0; j < n_med; ++j) {
                MedreconRecord m;
                m.subject_id = subject;
                m.stay_id = s.stay_id;
                m.charttime = child_time();
                m.name = kMedNames[rng.below(std::size(kMedNames))];
                m.gsn = std::to_string(100000 + rng.below(900000));
                m.ndc = std::to_string(10000000000ull + rng.next() % 90000000000ull);
                m.etc_rn = 1;
                m.etccode = std::to_string(10 + rng.below(90));
                m.etcdescription = kEtcDescriptions[rng.below(std::size(kEtcDescriptions))];
                t.medrecon.push_back(std::move(m));
            }

            std::uint32_t n_pyx = params.max_pyxis_rows ? rng.below(params.max_pyxis_rows + 1) : 0;
            for (std::uint32_t j = 0; j < n_pyx; ++j) {
                PyxisRecord p;
                p.subject_id = subject;
                p.stay_id = s.stay_id;
                p.charttime = child_time();
                p.med_rn = j + 1;
                p.name = kMedNames[rng.below(std::size(kMedNames))];
                p.gsn_rn = 1;
                p.gsn = std::to_string(100000 + rng.below(900000));
                t.pyxis.push_back(std::move(p));
            }

            std::uint32_t n_diag =
                params.max_diagnosis_rows ? rng.below(params.max_diagnosis_rows + 1) : 0;
            for (std::uint32_t j = 0; j < n_diag; ++j) {
                DiagnosisRecord d;
                d.subject_id = subject;
                d.stay_id = s.stay_id;
                d.seq_num = j + 1;
                const IcdEntry& e = kIcd[rng.below(std::size(kIcd))];
                d.icd_code = e.code;
                d.icd_version = e.version;
                d.icd_title = e.title;
                t.diagnosis.push_back(std::move(d));
            }

            t.edstays.push_back(std::move(s));
        }
    }

    const std::size_t n = t.edstays.size();
    gt.n_stays = n;

    // Defect injection: each category gets an exact count derived from its
    // rate, chosen deterministically from the eligible stays.

    for (std::size_t i : pick_k(n, defect_count(params.defects.missing_acuity_pct, n), rng)) {
        t.triage[i].acuity.reset();
        ++gt.missing_acuity_count;
    }

    std::vector<std::size_t> home_idx, admitted_idx;
    for (std::size_t i = 0; i < n; ++i) {
        if (t.edstays[i].disposition == "HOME") home_idx.push_back(i);
        if (t.edstays[i].disposition == "ADMITTED") admitted_idx.push_back(i);
    }
    for (std::size_t j : pick_k(home_idx.size(),
                                defect_count(params.defects.home_with_hadm_pct, home_idx.size()), rng)) {
        t.edstays[home_idx[j]].hadm_id = next_hadm++;
        ++gt.home_with_hadm_count;
    }
    for (std::size_t j :
         pick_k(admitted_idx.size(),
                defect_count(params.defects.admitted_without_hadm_pct, admitted_idx.size()), rng)) {
        t.edstays[admitted_idx[j]].hadm_id.reset();
        ++gt.admitted_without_hadm_count;
    }

    for (std::size_t i : pick_k(n, defect_count(params.defects.pain_out_of_range_pct, n), rng)) {
        t.triage[i].pain = "13";
        ++gt.pain_out_of_range_count;
    }

    for (std::size_t i : pick_k(n, defect_count(params.defects.pre_arrival_event_pct, n), rng)) {
        const EdStayRecord& s = t.edstays[i];
        VitalSignRecord v;
        v.subject_id = s.subject_id;
        v.stay_id = s.stay_id;
        v.charttime = s.intime.plus_seconds(-static_cast<std::int64_t>(60 + rng.below(3600)));
        v.heartrate.value = 55.0 + rng.below(70);
        v.rhythm = "";
        t.vitalsign.push_back(std::move(v));
        ++gt.pre_arrival_event_count;
    }

    {
        auto celsius_stays = pick_k(n, defect_count(params.defects.celsius_temperature_pct, n), rng);
        std::vector<char> selected(n, 0);
        std::vector<std::int64_t> id_of(n);
        for (std::size_t i = 0; i < n; ++i) id_of[i] = t.edstays[i].stay_id;
        for (std::size_t i : celsius_stays) selected[i] = 1;
        auto to_c = [](double f) { return round1((f - 32.0) * 5.0 / 9.0); };
        for (std::size_t i : celsius_stays)
            if (t.triage[i].temperature.value) {
                t.triage[i].temperature.value = to_c(*t.triage[i].temperature.value);
                ++gt.celsius_value_count;
            }
        // stay_id order matches edstays order, so index = stay_id - first id
        std::int64_t first_id = n ? t.edstays.front().stay_id : 0;
        for (auto& v : t.vitalsign) {
            std::size_t i = static_cast<std::size_t>(v.stay_id - first_id);
            if (i < n && selected[i] && v.temperature.value) {
                v.temperature.value = to_c(*v.temperature.value);
                ++gt.celsius_value_count;
            }
        }
    }

    // Closed-form expectations from the final tables.
    std::vector<std::uint32_t> vit(n, 0), med(n, 0), pyx(n, 0), diag(n, 0);
    std::int64_t first_id = n ? t.edstays.front().stay_id : 0;
    auto slot = [&](std::int64_t stay_id) { return static_cast<std::size_t>(stay_id - first_id); };
    for (const auto& r : t.vitalsign) ++vit[slot(r.stay_id)];
    for (const auto& r : t.medrecon) ++med[slot(r.stay_id)];
    for (const auto& r : t.pyxis) ++pyx[slot(r.stay_id)];
    for (const auto& r : t.diagnosis) ++diag[slot(r.stay_id)];
    for (std::size_t i = 0; i < n; ++i)
        gt.expected_event_count +=
            2 + vit[i] + med[i] + pyx[i] + std::max<std::uint32_t>(1, diag[i]);

    if (n <= 2000) {
        gt.stay_ids.resize(n);
        for (std::size_t i = 0; i < n; ++i) gt.stay_ids[i] = t.edstays[i].stay_id;
        gt.vitalsign_counts = vit;
        gt.medrecon_counts = med;
        gt.pyxis_counts = pyx;
        gt.diagnosis_counts = diag;
        gt.overlap_counts.assign(n, 0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const auto& a = t.edstays[i];
                const auto& b = t.edstays[j];
                if (!(b.intime > a.outtime || b.outtime < a.intime)) ++gt.overlap_counts[i];
            }
    }

    return out;
}

std::string GroundTruth::to_json() const {
    nlohmann::json j;
    j["n_stays"] = n_stays;
    j["expected_event_count"] = expected_event_count;
    j["missing_acuity_count"] = missing_acuity_count;
    j["home_with_hadm_count"] = home_with_hadm_count;
    j["admitted_without_hadm_count"] = admitted_without_hadm_count;
    j["pain_out_of_range_count"] = pain_out_of_range_count;
    j["pre_arrival_event_count"] = pre_arrival_event_count;
    j["celsius_value_count"] = celsius_value_count;
    if (!stay_ids.empty()) {
        j["stay_ids"] = stay_ids;
        j["vitalsign_counts"] = vitalsign_counts;
        j["medrecon_counts"] = medrecon_counts;
        j["pyxis_counts"] = pyxis_counts;
        j["diagnosis_counts"] = diagnosis_counts;
        j["overlap_counts"] = overlap_counts;
    }
    return j.dump(2);
}

void GroundTruth::write_json(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << to_json() << '\n';
}

void write_tables_csv(const SourceTables& tables, const std::string& directory) {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) throw IoError("cannot create directory " + directory + ": " + ec.message());
    auto file = [&](const char* name) {
        return (std::filesystem::path(directory) / (std::string(name) + ".csv")).string();
    };

    {
        CsvWriter w(file("edstays"));
        std::vector<std::string> row = {"subject_id", "hadm_id",           "stay_id",
                                        "intime",     "outtime",           "gender",
                                        "race",       "arrival_transport", "disposition"};
        w.write_row(row);
        for (const auto& r : tables.edstays) {
            row = {std::to_string(r.subject_id),
                   r.hadm_id ? std::to_string(*r.hadm_id) : std::string(),
                   std::to_string(r.stay_id),
                   r.intime.to_string(),
                   r.outtime.to_string(),
                   r.gender,
                   r.race,
                   r.arrival_transport,
                   r.disposition};
            w.write_row(row);
        }
        w.close();
    }
    {
        CsvWriter w(file("triage"));
        std::vector<std::string> row = {"subject_id", "stay_id", "temperature", "heartrate",
                                        "resprate",   "o2sat",   "sbp",         "dbp",
                                        "pain",       "acuity",  "chiefcomplaint"};
        w.write_row(row);
        for (const auto& r : tables.triage) {
            row = {std::to_string(r.subject_id),
                   std::to_string(r.stay_id),
                   opt_dec_str(r.temperature),
                   opt_dec_str(r.heartrate),
                   opt_dec_str(r.resprate),
                   opt_dec_str(r.o2sat),
                   opt_dec_str(r.sbp),
                   opt_dec_str(r.dbp),
                   r.pain,
                   r.acuity ? std::to_string(*r.acuity) : std::string(),
                   r.chiefcomplaint};
            w.write_row(row);
        }
        w.close();
    }
    {
        CsvWriter w(file("vitalsign"));
        std::vector<std::string> row = {"subject_id", "stay_id", "charttime", "temperature",
                                        "heartrate",  "resprate", "o2sat",    "sbp",
                                        "dbp",        "rhythm",   "pain"};
        w.write_row(row);
        for (const auto& r : tables.vitalsign) {
            row = {std::to_string(r.subject_id),
                   std::to_string(r.stay_id),
                   r.charttime.to_string(),
                   opt_dec_str(r.temperature),
                   opt_dec_str(r.heartrate),
                   opt_dec_str(r.resprate),
                   opt_dec_str(r.o2sat),
                   opt_dec_str(r.sbp),
                   opt_dec_str(r.dbp),
                   r.rhythm,
                   r.pain};
            w.write_row(row);
        }
        w.close();
    }
    {
        CsvWriter w(file("medrecon"));
        std::vector<std::string> row = {"subject_id", "stay_id", "charttime",
                                        "name",       "gsn",     "ndc",
                                        "etc_rn",     "etccode", "etcdescription"};
        w.write_row(row);
        for (const auto& r : tables.medrecon) {
            row = {std::to_string(r.subject_id),
                   std::to_string(r.stay_id),
                   r.charttime.to_string(),
                   r.name,
                   r.gsn,
                   r.ndc,
                   std::to_string(r.etc_rn),
                   r.etccode,
                   r.etcdescription};
            w.write_row(row);
        }
        w.close();
    }
    {
        CsvWriter w(file("pyxis"));
        std::vector<std::string> row = {"subject_id", "stay_id", "charttime", "med_rn",
                                        "name",       "gsn_rn",  "gsn"};
        w.write_row(row);
        for (const auto& r : tables.pyxis) {
            row = {std::to_string(r.subject_id), std::to_string(r.stay_id),
                   r.charttime.to_string(),      std::to_string(r.med_rn),
                   r.name,                       std::to_string(r.gsn_rn),
                   r.gsn};
            w.write_row(row);
        }
        w.close();
    }
    {
        CsvWriter w(file("diagnosis"));
        std::vector<std::string> row = {"subject_id", "stay_id",     "seq_num",
                                        "icd_code",   "icd_version", "icd_title"};
        w.write_row(row);
        for (const auto& r : tables.diagnosis) {
            row = {std::to_string(r.subject_id), std::to_string(r.stay_id),
                   std::to_string(r.seq_num),    r.icd_code,
                   std::to_string(r.icd_version), r.icd_title};
            w.write_row(row);
        }
        w.close();
    }
}

}  // namespace edlog
