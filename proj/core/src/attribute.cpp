#include "edlog/attribute.hpp"

#include <algorithm>
#include <charconv>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

namespace edlog {
namespace {

class Interner {
public:
    static Interner& instance() {
        static Interner i;
        return i;
    }

    AttrId intern(std::string_view name) {
        {
            std::shared_lock lock(mu_);
            auto it = ids_.find(std::string(name));
            if (it != ids_.end()) return it->second;
        }
        std::unique_lock lock(mu_);
        auto [it, inserted] = ids_.try_emplace(std::string(name), static_cast<AttrId>(names_.size()));
        if (inserted) names_.push_back(it->first);
        return it->second;
    }

    std::optional<AttrId> lookup(std::string_view name) const {
        std::shared_lock lock(mu_);
        auto it = ids_.find(std::string(name));
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& name(AttrId id) const {
        std::shared_lock lock(mu_);
        return names_[id];
    }

private:
    mutable std::shared_mutex mu_;
    std::unordered_map<std::string, AttrId> ids_;
    std::vector<std::string> names_;  // values are stable; map owns the strings
};

}  // namespace

AttrId attr_id(std::string_view name) { return Interner::instance().intern(name); }
std::optional<AttrId> attr_id_if_known(std::string_view name) { return Interner::instance().lookup(name); }
const std::string& attr_name(AttrId id) { return Interner::instance().name(id); }

const KnownAttrs& attrs() {
    static const KnownAttrs k{
        attr_id("stay_id"), attr_id("subject_id"), attr_id("hadm_id"), attr_id("gender"),
        attr_id("race"), attr_id("arrival_transport"), attr_id("disposition"), attr_id("acuity"),
        attr_id("chiefcomplaint"), attr_id("temperature"), attr_id("heartrate"), attr_id("resprate"),
        attr_id("o2sat"), attr_id("sbp"), attr_id("dbp"), attr_id("pain"), attr_id("rhythm"),
        attr_id("name"), attr_id("gsn"), attr_id("ndc"), attr_id("etc_rn"), attr_id("etccode"),
        attr_id("etcdescription"), attr_id("med_rn"), attr_id("gsn_rn"), attr_id("seq_num"),
        attr_id("icd_code"), attr_id("icd_version"), attr_id("icd_title")};
    return k;
}

void AttributeValue::display_to(std::string& out) const {
    switch (kind()) {
        case ValueKind::Absent:
            return;
        case ValueKind::AbsentWithRaw:
            out += as_raw()->text;
            return;
        case ValueKind::Text:
            out += *as_text();
            return;
        case ValueKind::Integer:
            out += std::to_string(*as_integer());
            return;
        case ValueKind::Decimal: {
            char buf[32];
            auto [p, ec] = std::to_chars(buf, buf + sizeof buf, *as_decimal());
            std::string_view s(buf, static_cast<std::size_t>(p - buf));
            out += s;
            // Whole-valued decimals keep a fractional digit ("98.0", not "98")
            // so a decimal column stays visibly decimal and survives re-parsing
            // with its type intact.
            if (s.find('.') == std::string_view::npos && s.find('e') == std::string_view::npos &&
                s.find("inf") == std::string_view::npos && s.find("nan") == std::string_view::npos)
                out += ".0";
            return;
        }
        case ValueKind::Time:
            as_time()->format_to(out, false);
            return;
    }
}

std::string AttributeValue::to_display() const {
    std::string s;
    display_to(s);
    return s;
}

void AttrMap::set(AttrId id, AttributeValue value) {
    auto it = std::lower_bound(items_.begin(), items_.end(), id,
                               [](const Item& a, AttrId b) { return a.first < b; });
    if (it != items_.end() && it->first == id)
        it->second = std::move(value);
    else
        items_.insert(it, {id, std::move(value)});
}

void AttrMap::erase(AttrId id) {
    auto it = std::lower_bound(items_.begin(), items_.end(), id,
                               [](const Item& a, AttrId b) { return a.first < b; });
    if (it != items_.end() && it->first == id) items_.erase(it);
}

const AttributeValue* AttrMap::find(AttrId id) const {
    auto it = std::lower_bound(items_.begin(), items_.end(), id,
                               [](const Item& a, AttrId b) { return a.first < b; });
    if (it != items_.end() && it->first == id) return &it->second;
    return nullptr;
}

}  // namespace edlog
