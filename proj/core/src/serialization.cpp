#include "edlog/serialization.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "edlog/csv.hpp"
#include "edlog/errors.hpp"
#include "edlog/xml.hpp"

namespace edlog {
namespace {

enum class ColType { Integer, Decimal, Text };

struct CaseColumn {
    AttrId id;
    ColType type;
    Activity carrier;  // activity whose rows print this attribute in sparse mode
};

struct EventColumn {
    AttrId id;
    ColType type;
};

const std::vector<CaseColumn>& case_columns() {
    const auto& a = attrs();
    static const std::vector<CaseColumn> cols{
        {a.gender, ColType::Text, Activity::EnterEd},
        {a.race, ColType::Text, Activity::EnterEd},
        {a.arrival_transport, ColType::Text, Activity::EnterEd},
        {a.disposition, ColType::Text, Activity::DischargeEd},
        {a.acuity, ColType::Integer, Activity::TriageEd},
        {a.chiefcomplaint, ColType::Text, Activity::TriageEd},
    };
    return cols;
}

const std::vector<EventColumn>& event_columns() {
    const auto& a = attrs();
    static const std::vector<EventColumn> cols{
        {a.hadm_id, ColType::Integer},   {a.temperature, ColType::Decimal},
        {a.heartrate, ColType::Decimal}, {a.resprate, ColType::Decimal},
        {a.o2sat, ColType::Decimal},     {a.sbp, ColType::Decimal},
        {a.dbp, ColType::Decimal},       {a.pain, ColType::Text},
        {a.rhythm, ColType::Text},       {a.med_rn, ColType::Integer},
        {a.seq_num, ColType::Integer},   {a.name, ColType::Text},
        {a.gsn, ColType::Text},          {a.ndc, ColType::Text},
        {a.etc_rn, ColType::Integer},    {a.etccode, ColType::Text},
        {a.etcdescription, ColType::Text}, {a.gsn_rn, ColType::Integer},
        {a.icd_code, ColType::Text},     {a.icd_version, ColType::Integer},
        {a.icd_title, ColType::Text},
    };
    return cols;
}

AttributeValue value_from_cell(std::string_view cell, ColType type) {
    if (cell.empty()) return AttributeValue::absent();
    switch (type) {
        case ColType::Text:
            return AttributeValue::text(std::string(cell));
        case ColType::Integer: {
            std::int64_t v = 0;
            auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec == std::errc() && p == cell.data() + cell.size()) return AttributeValue::integer(v);
            return AttributeValue::raw(std::string(cell));
        }
        case ColType::Decimal: {
            double v = 0;
            auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec == std::errc() && p == cell.data() + cell.size()) return AttributeValue::decimal(v);
            return AttributeValue::raw(std::string(cell));
        }
    }
    return AttributeValue::absent();
}

}  // namespace

const std::vector<std::string>& csv_column_order() {
    static const std::vector<std::string> order = [] {
        std::vector<std::string> o{"stay_id", "subject_id", "timestamp", "activity"};
        for (const auto& c : case_columns()) o.push_back(attr_name(c.id));
        for (const auto& c : event_columns()) o.push_back(attr_name(c.id));
        return o;
    }();
    return order;
}

std::size_t write_csv(const EventLog& log, const std::string& path, const CsvOptions& options) {
    const auto& a = attrs();
    CsvWriter writer(path);
    const auto& header = csv_column_order();
    {
        std::vector<std::string_view> h(header.begin(), header.end());
        writer.write_row(h);
    }

    std::size_t rows = 0;
    std::vector<std::string> cells(header.size());
    for (const Trace& t : log.traces) {
        std::string stay_cell, subject_cell;
        if (const AttributeValue* v = t.case_attributes.find(a.stay_id))
            stay_cell = v->to_display();
        else
            stay_cell = std::to_string(t.case_id);
        if (const AttributeValue* v = t.case_attributes.find(a.subject_id))
            subject_cell = v->to_display();

        for (const Event& e : t.events) {
            for (auto& c : cells) c.clear();
            cells[0] = stay_cell;
            cells[1] = subject_cell;
            e.timestamp.format_to(cells[2], options.timestamp_style == TimestampStyle::Dotted);
            cells[3] = activity_name(e.activity);
            std::size_t i = 4;
            for (const CaseColumn& cc : case_columns()) {
                if (options.dense || e.activity == cc.carrier) {
                    if (const AttributeValue* v = t.case_attributes.find(cc.id))
                        v->display_to(cells[i]);
                    else if (const AttributeValue* v2 = e.attributes.find(cc.id))
                        v2->display_to(cells[i]);
                }
                ++i;
            }
            for (const EventColumn& ec : event_columns()) {
                if (const AttributeValue* v = e.attributes.find(ec.id)) v->display_to(cells[i]);
                ++i;
            }
            writer.write_row(std::span<const std::string>(cells));
            ++rows;
        }
    }
    writer.close();
    return rows;
}

CsvReadResult read_csv(const std::string& path) {
    const auto& a = attrs();
    CsvReadResult result;

    struct ColInfo {
        enum Role { StayId, SubjectId, Time, ActivityCol, CaseAttr, EventAttr, PassThrough } role;
        AttrId id = 0;
        ColType type = ColType::Text;
    };
    std::vector<ColInfo> cols;

    std::unordered_map<AttrId, const CaseColumn*> case_by_id;
    for (const CaseColumn& c : case_columns()) case_by_id.emplace(c.id, &c);
    std::unordered_map<AttrId, const EventColumn*> event_by_id;
    for (const EventColumn& c : event_columns()) event_by_id.emplace(c.id, &c);

    std::unordered_map<std::int64_t, std::size_t> trace_index;
    EventLog& log = result.log;

    for_each_csv_record(
        path,
        [&](std::span<const std::string_view> header) {
            for (std::string_view name : header) {
                ColInfo info;
                if (name == "stay_id") {
                    info.role = ColInfo::StayId;
                } else if (name == "subject_id") {
                    info.role = ColInfo::SubjectId;
                } else if (name == "timestamp") {
                    info.role = ColInfo::Time;
                } else if (name == "activity") {
                    info.role = ColInfo::ActivityCol;
                } else {
                    AttrId id = attr_id(name);
                    if (auto it = case_by_id.find(id); it != case_by_id.end()) {
                        info.role = ColInfo::CaseAttr;
                        info.id = id;
                        info.type = it->second->type;
                    } else if (auto jt = event_by_id.find(id); jt != event_by_id.end()) {
                        info.role = ColInfo::EventAttr;
                        info.id = id;
                        info.type = jt->second->type;
                    } else {
                        info.role = ColInfo::PassThrough;
                        info.id = id;
                        result.warnings.push_back("unknown column '" + std::string(name) +
                                                  "' preserved as event attribute");
                    }
                }
                cols.push_back(info);
            }
        },
        [&](std::span<const std::string_view> row, std::size_t line) {
            std::optional<std::int64_t> stay;
            Event event;
            bool have_activity = false, have_time = false;
            AttributeValue subject;
            std::vector<std::pair<AttrId, AttributeValue>> case_updates;

            for (std::size_t i = 0; i < cols.size() && i < row.size(); ++i) {
                std::string_view cell = row[i];
                const ColInfo& info = cols[i];
                switch (info.role) {
                    case ColInfo::StayId: {
                        std::int64_t v = 0;
                        auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                        if (ec != std::errc() || p != cell.data() + cell.size())
                            throw DataError("csv line " + std::to_string(line) + ": bad stay_id '" +
                                            std::string(cell) + "'");
                        stay = v;
                        break;
                    }
                    case ColInfo::SubjectId:
                        subject = value_from_cell(cell, ColType::Integer);
                        break;
                    case ColInfo::Time: {
                        auto ts = Timestamp::parse_dotted(cell);
                        if (!ts) ts = Timestamp::parse(cell);
                        if (!ts) ts = Timestamp::parse_iso8601(cell);
                        if (!ts)
                            throw DataError("csv line " + std::to_string(line) + ": bad timestamp '" +
                                            std::string(cell) + "'");
                        event.timestamp = *ts;
                        have_time = true;
                        break;
                    }
                    case ColInfo::ActivityCol: {
                        auto act = activity_from_name(cell);
                        if (!act)
                            throw DataError("csv line " + std::to_string(line) + ": unknown activity '" +
                                            std::string(cell) + "'");
                        event.activity = *act;
                        have_activity = true;
                        break;
                    }
                    case ColInfo::CaseAttr: {
                        AttributeValue v = value_from_cell(cell, info.type);
                        if (!v.is_absent() || v.kind() == ValueKind::AbsentWithRaw)
                            case_updates.emplace_back(info.id, std::move(v));
                        break;
                    }
                    case ColInfo::EventAttr:
                    case ColInfo::PassThrough: {
                        AttributeValue v = value_from_cell(cell, info.type);
                        if (!v.is_absent() || v.kind() == ValueKind::AbsentWithRaw)
                            event.attributes.set(info.id, std::move(v));
                        break;
                    }
                }
            }
            if (!stay || !have_activity || !have_time)
                throw DataError("csv line " + std::to_string(line) +
                                ": missing mandatory stay_id/activity/timestamp");

            auto [it, inserted] = trace_index.try_emplace(*stay, log.traces.size());
            if (inserted) {
                Trace t;
                t.case_id = *stay;
                t.case_attributes.set(a.stay_id, AttributeValue::integer(*stay));
                log.traces.push_back(std::move(t));
            }
            Trace& t = log.traces[it->second];
            if (!subject.is_absent() && !t.case_attributes.find(a.subject_id))
                t.case_attributes.set(a.subject_id, subject);
            for (auto& [id, v] : case_updates)
                if (!t.case_attributes.find(id)) t.case_attributes.set(id, std::move(v));
            t.events.push_back(std::move(event));
        });
    return result;
}

namespace {

class XesBuffer {
public:
    explicit XesBuffer(const std::string& path) : path_(path) {
        file_ = std::fopen(path.c_str(), "wb");
        if (!file_) throw IoError("cannot open file for writing: " + path);
        buf_.reserve(1 << 20);
    }
    ~XesBuffer() {
        if (file_) {
            std::fwrite(buf_.data(), 1, buf_.size(), file_);
            std::fclose(file_);
        }
    }
    void append(std::string_view s) {
        buf_.append(s);
        if (buf_.size() >= (1 << 20)) {
            if (std::fwrite(buf_.data(), 1, buf_.size(), file_) != buf_.size())
                throw IoError("write failed: " + path_);
            buf_.clear();
        }
    }
    std::string& raw() { return buf_; }
    void close() {
        if (!file_) return;
        if (std::fwrite(buf_.data(), 1, buf_.size(), file_) != buf_.size())
            throw IoError("write failed: " + path_);
        std::fclose(file_);
        file_ = nullptr;
    }

private:
    std::FILE* file_;
    std::string path_;
    std::string buf_;
};

void append_attr_element(std::string& out, const char* indent, AttrId id,
                         const AttributeValue& v) {
    const char* tag = nullptr;
    switch (v.kind()) {
        case ValueKind::Absent:
            return;  // no empty elements
        case ValueKind::AbsentWithRaw:
        case ValueKind::Text:
            tag = "string";
            break;
        case ValueKind::Integer:
            tag = "int";
            break;
        case ValueKind::Decimal:
            tag = "float";
            break;
        case ValueKind::Time:
            tag = "date";
            break;
    }
    out += indent;
    out += '<';
    out += tag;
    out += " key=\"";
    xml_escape_to(out, attr_name(id));
    out += "\" value=\"";
    if (v.kind() == ValueKind::Time) {
        v.as_time()->format_iso8601_to(out);
    } else {
        std::string s = v.to_display();
        xml_escape_to(out, s);
    }
    out += "\"/>\n";
}

}  // namespace

std::size_t write_xes(const EventLog& log, const std::string& path) {
    XesBuffer out(path);
    out.append(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<log xes.version=\"1.0\" xes.features=\"\">\n"
        "  <extension name=\"Concept\" prefix=\"concept\" "
        "uri=\"http://www.xes-standard.org/concept.xesext\"/>\n"
        "  <extension name=\"Time\" prefix=\"time\" "
        "uri=\"http://www.xes-standard.org/time.xesext\"/>\n");

    std::string& buf = out.raw();
    std::size_t traces = 0;
    for (const Trace& t : log.traces) {
        out.append("  <trace>\n");
        for (const auto& [id, v] : t.case_attributes) append_attr_element(buf, "    ", id, v);
        for (const Event& e : t.events) {
            out.append("    <event>\n");
            buf += "      <string key=\"concept:name\" value=\"";
            xml_escape_to(buf, activity_name(e.activity));
            buf += "\"/>\n      <date key=\"time:timestamp\" value=\"";
            e.timestamp.format_iso8601_to(buf);
            buf += "\"/>\n";
            for (const auto& [id, v] : e.attributes) append_attr_element(buf, "      ", id, v);
            out.append("    </event>\n");
        }
        out.append("  </trace>\n");
        ++traces;
    }
    out.append("</log>\n");
    out.close();
    return traces;
}

namespace {

AttributeValue xes_value(const XmlElement& el, ColType schema_type) {
    const std::string* value = el.attr("value");
    if (!value) throw DataError("xes: <" + el.name + "> without value attribute");
    if (el.name == "int") {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(value->data(), value->data() + value->size(), v);
        if (ec != std::errc()) throw DataError("xes: bad int value '" + *value + "'");
        return AttributeValue::integer(v);
    }
    if (el.name == "float") {
        double v = 0;
        auto [p, ec] = std::from_chars(value->data(), value->data() + value->size(), v);
        if (ec != std::errc()) throw DataError("xes: bad float value '" + *value + "'");
        return AttributeValue::decimal(v);
    }
    if (el.name == "date") {
        auto ts = Timestamp::parse_iso8601(*value);
        if (!ts) throw DataError("xes: bad date value '" + *value + "'");
        return AttributeValue::time(*ts);
    }
    if (el.name == "string" || el.name == "boolean") {
        // A string carrying a numeric-schema column is a retained raw value.
        if (schema_type != ColType::Text) return AttributeValue::raw(*value);
        return AttributeValue::text(*value);
    }
    throw DataError("xes: unsupported attribute element <" + el.name + ">");
}

ColType schema_type_of(AttrId id) {
    for (const auto& c : case_columns())
        if (c.id == id) return c.type;
    for (const auto& c : event_columns())
        if (c.id == id) return c.type;
    if (id == attrs().stay_id || id == attrs().subject_id) return ColType::Integer;
    return ColType::Text;
}

}  // namespace

EventLog read_xes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string text = std::move(ss).str();

    XmlElement root = parse_xml(text);
    if (root.name != "log") throw DataError("xes: root element is <" + root.name + ">, expected <log>");

    const auto& a = attrs();
    EventLog log;
    for (const XmlElement& tr : root.children) {
        if (tr.name != "trace") continue;  // extensions, classifiers, global attributes
        Trace t;
        bool have_id = false;
        for (const XmlElement& el : tr.children) {
            if (el.name == "event") {
                Event ev;
                bool have_name = false, have_time = false;
                for (const XmlElement& at : el.children) {
                    const std::string* key = at.attr("key");
                    if (!key) throw DataError("xes: attribute element without key");
                    if (*key == "concept:name") {
                        const std::string* value = at.attr("value");
                        auto act = value ? activity_from_name(*value) : std::nullopt;
                        if (!act)
                            throw DataError("xes: unknown activity '" + (value ? *value : "") + "'");
                        ev.activity = *act;
                        have_name = true;
                    } else if (*key == "time:timestamp") {
                        const std::string* value = at.attr("value");
                        auto ts = value ? Timestamp::parse_iso8601(*value) : std::nullopt;
                        if (!ts) throw DataError("xes: bad time:timestamp");
                        ev.timestamp = *ts;
                        have_time = true;
                    } else {
                        AttrId id = attr_id(*key);
                        ev.attributes.set(id, xes_value(at, schema_type_of(id)));
                    }
                }
                if (!have_name || !have_time)
                    throw DataError("xes: event without concept:name or time:timestamp");
                t.events.push_back(std::move(ev));
            } else {
                const std::string* key = el.attr("key");
                if (!key) throw DataError("xes: trace attribute element without key");
                AttrId id = attr_id(*key);
                AttributeValue v = xes_value(el, schema_type_of(id));
                if (id == a.stay_id) {
                    if (auto* i = v.as_integer()) {
                        t.case_id = *i;
                        have_id = true;
                    }
                }
                t.case_attributes.set(id, std::move(v));
            }
        }
        if (!have_id) throw DataError("xes: trace without integer stay_id attribute");
        log.traces.push_back(std::move(t));
    }
    return log;
}

void validate_xes_structure(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string text = std::move(ss).str();

    XmlElement root = parse_xml(text);  // well-formedness
    if (root.name != "log") throw DataError("xes: root must be <log>");
    auto is_attr_element = [](const std::string& n) {
        return n == "string" || n == "int" || n == "float" || n == "date" || n == "boolean" ||
               n == "id" || n == "list";
    };
    for (const XmlElement& c : root.children) {
        if (c.name == "extension" || c.name == "classifier" || c.name == "global" ||
            is_attr_element(c.name))
            continue;
        if (c.name != "trace") throw DataError("xes: unexpected <" + c.name + "> under <log>");
        for (const XmlElement& el : c.children) {
            if (el.name == "event") {
                bool has_name = false, has_time = false;
                for (const XmlElement& at : el.children) {
                    if (!is_attr_element(at.name))
                        throw DataError("xes: unexpected <" + at.name + "> under <event>");
                    const std::string* key = at.attr("key");
                    if (!key || !at.attr("value"))
                        throw DataError("xes: attribute element missing key/value");
                    if (*key == "concept:name") has_name = true;
                    if (*key == "time:timestamp") has_time = true;
                }
                if (!has_name || !has_time)
                    throw DataError("xes: event missing concept:name or time:timestamp");
            } else if (!is_attr_element(el.name)) {
                throw DataError("xes: unexpected <" + el.name + "> under <trace>");
            }
        }
    }
}

}  // namespace edlog
