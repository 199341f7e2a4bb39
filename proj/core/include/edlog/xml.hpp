#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace edlog {

/// Minimal XML document model, enough for XES logs: elements with attributes
/// and child elements. Text content is not retained (XES carries data in
/// attributes only).
struct XmlElement {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<XmlElement> children;

    const std::string* attr(std::string_view key) const;
    const XmlElement* child(std::string_view name) const;
};

/// Parses a document and returns its root element. Malformed or truncated
/// input raises DataError with the line position; no partial tree is returned.
XmlElement parse_xml(std::string_view text);

void xml_escape_to(std::string& out, std::string_view text);

}  // namespace edlog
