#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "edlog/timestamp.hpp"

namespace edlog {

/// A numeric field whose raw text failed to parse; the original text is kept
/// so downstream range/format checks can inspect it.
struct RawText {
    std::string text;
    bool operator==(const RawText&) const = default;
};

enum class ValueKind { Absent, AbsentWithRaw, Text, Integer, Decimal, Time };

/// Tagged union for case/event attribute values.
class AttributeValue {
public:
    AttributeValue() = default;

    static AttributeValue absent() { return AttributeValue(); }
    static AttributeValue raw(std::string text) { return AttributeValue(RawText{std::move(text)}); }
    static AttributeValue text(std::string v) { return AttributeValue(Storage(std::in_place_type<std::string>, std::move(v))); }
    static AttributeValue integer(std::int64_t v) { return AttributeValue(Storage(v)); }
    static AttributeValue decimal(double v) { return AttributeValue(Storage(v)); }
    static AttributeValue time(Timestamp v) { return AttributeValue(Storage(v)); }

    ValueKind kind() const { return static_cast<ValueKind>(value_.index()); }
    bool is_absent() const { return kind() == ValueKind::Absent; }
    bool is_present() const { return kind() != ValueKind::Absent && kind() != ValueKind::AbsentWithRaw; }

    const std::string* as_text() const { return std::get_if<std::string>(&value_); }
    const std::int64_t* as_integer() const { return std::get_if<std::int64_t>(&value_); }
    const double* as_decimal() const { return std::get_if<double>(&value_); }
    const Timestamp* as_time() const { return std::get_if<Timestamp>(&value_); }
    const RawText* as_raw() const { return std::get_if<RawText>(&value_); }

    /// Present numeric value as double (integer or decimal), else nullopt.
    std::optional<double> numeric() const {
        if (auto* i = as_integer()) return static_cast<double>(*i);
        if (auto* d = as_decimal()) return *d;
        return std::nullopt;
    }

    /// Rendering used by the CSV writer and text reports. Absent renders as
    /// empty; absent-with-raw renders the retained raw text.
    std::string to_display() const;
    void display_to(std::string& out) const;

    bool operator==(const AttributeValue&) const = default;

private:
    using Storage = std::variant<std::monostate, RawText, std::string, std::int64_t, double, Timestamp>;
    explicit AttributeValue(Storage v) : value_(std::move(v)) {}
    Storage value_;
};

/// Interned attribute-name id. Names are registered process-wide; well-known
/// schema columns are pre-registered with stable ids.
using AttrId = std::uint32_t;

AttrId attr_id(std::string_view name);
std::optional<AttrId> attr_id_if_known(std::string_view name);
const std::string& attr_name(AttrId id);

/// Pre-registered ids for the fixed source schema.
struct KnownAttrs {
    AttrId stay_id, subject_id, hadm_id, gender, race, arrival_transport, disposition,
        acuity, chiefcomplaint, temperature, heartrate, resprate, o2sat, sbp, dbp, pain,
        rhythm, name, gsn, ndc, etc_rn, etccode, etcdescription, med_rn, gsn_rn,
        seq_num, icd_code, icd_version, icd_title;
};
const KnownAttrs& attrs();

/// Small flat map from attribute id to value, kept sorted by id so that
/// equality and iteration order are canonical.
class AttrMap {
public:
    using Item = std::pair<AttrId, AttributeValue>;

    void set(AttrId id, AttributeValue value);
    void erase(AttrId id);
    const AttributeValue* find(AttrId id) const;

    bool empty() const { return items_.empty(); }
    std::size_t size() const { return items_.size(); }
    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

    bool operator==(const AttrMap&) const = default;

private:
    std::vector<Item> items_;
};

}  // namespace edlog
