#include "edlog/xml.hpp"

#include <cstdlib>

#include "edlog/errors.hpp"

namespace edlog {

const std::string* XmlElement::attr(std::string_view key) const {
    for (const auto& [k, v] : attributes)
        if (k == key) return &v;
    return nullptr;
}

const XmlElement* XmlElement::child(std::string_view n) const {
    for (const XmlElement& c : children)
        if (c.name == n) return &c;
    return nullptr;
}

void xml_escape_to(std::string& out, std::string_view text) {
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
}

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    XmlElement parse_document() {
        skip_misc();
        XmlElement root = parse_element();
        skip_misc();
        if (pos_ < text_.size()) fail("trailing content after root element");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw DataError("xml: " + what + " at line " + std::to_string(line_));
    }

    char cur() const { return text_[pos_]; }
    bool eof() const { return pos_ >= text_.size(); }

    void advance() {
        if (text_[pos_] == '\n') ++line_;
        ++pos_;
    }

    void skip_ws() {
        while (!eof() && (cur() == ' ' || cur() == '\t' || cur() == '\n' || cur() == '\r')) advance();
    }

    bool starts_with(std::string_view s) const { return text_.substr(pos_, s.size()) == s; }

    void skip_until(std::string_view terminator, const char* what) {
        while (!eof() && !starts_with(terminator)) advance();
        if (eof()) fail(std::string("unterminated ") + what);
        for (std::size_t i = 0; i < terminator.size(); ++i) advance();
    }

    // Prolog, comments, processing instructions, whitespace.
    void skip_misc() {
        while (true) {
            skip_ws();
            if (starts_with("<?")) {
                skip_until("?>", "processing instruction");
            } else if (starts_with("<!--")) {
                skip_until("-->", "comment");
            } else if (starts_with("<!")) {
                skip_until(">", "declaration");
            } else {
                return;
            }
        }
    }

    std::string parse_name() {
        std::size_t start = pos_;
        while (!eof() && cur() != ' ' && cur() != '\t' && cur() != '\n' && cur() != '\r' &&
               cur() != '>' && cur() != '/' && cur() != '=')
            advance();
        if (pos_ == start) fail("expected name");
        return std::string(text_.substr(start, pos_ - start));
    }

    std::string unescape(std::string_view raw) {
        std::string out;
        out.reserve(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] != '&') {
                out += raw[i];
                continue;
            }
            auto end = raw.find(';', i);
            if (end == std::string_view::npos) fail("unterminated entity reference");
            std::string_view ent = raw.substr(i + 1, end - i - 1);
            if (ent == "amp") out += '&';
            else if (ent == "lt") out += '<';
            else if (ent == "gt") out += '>';
            else if (ent == "quot") out += '"';
            else if (ent == "apos") out += '\'';
            else if (!ent.empty() && ent[0] == '#') {
                long code = std::strtol(std::string(ent.substr(ent[1] == 'x' ? 2 : 1)).c_str(),
                                        nullptr, ent[1] == 'x' ? 16 : 10);
                if (code <= 0 || code > 0x10FFFF) fail("bad character reference");
                // encode as UTF-8
                unsigned c = static_cast<unsigned>(code);
                if (c < 0x80) out += static_cast<char>(c);
                else if (c < 0x800) {
                    out += static_cast<char>(0xC0 | (c >> 6));
                    out += static_cast<char>(0x80 | (c & 0x3F));
                } else if (c < 0x10000) {
                    out += static_cast<char>(0xE0 | (c >> 12));
                    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
                    out += static_cast<char>(0x80 | (c & 0x3F));
                } else {
                    out += static_cast<char>(0xF0 | (c >> 18));
                    out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
                    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
                    out += static_cast<char>(0x80 | (c & 0x3F));
                }
            } else {
                fail("unknown entity '" + std::string(ent) + "'");
            }
            i = end;
        }
        return out;
    }

    std::string parse_attr_value() {
        if (eof() || (cur() != '"' && cur() != '\'')) fail("expected quoted attribute value");
        char quote = cur();
        advance();
        std::size_t start = pos_;
        while (!eof() && cur() != quote) advance();
        if (eof()) fail("unterminated attribute value");
        std::string_view raw = text_.substr(start, pos_ - start);
        advance();
        return unescape(raw);
    }

    XmlElement parse_element() {
        if (eof() || cur() != '<') fail("expected element");
        advance();
        XmlElement el;
        el.name = parse_name();
        while (true) {
            skip_ws();
            if (eof()) fail("unterminated start tag");
            if (cur() == '/') {
                advance();
                if (eof() || cur() != '>') fail("malformed empty-element tag");
                advance();
                return el;
            }
            if (cur() == '>') {
                advance();
                break;
            }
            std::string key = parse_name();
            skip_ws();
            if (eof() || cur() != '=') fail("expected '=' in attribute");
            advance();
            skip_ws();
            el.attributes.emplace_back(std::move(key), parse_attr_value());
        }
        // content
        while (true) {
            while (!eof() && cur() != '<') advance();  // character data ignored
            if (eof()) fail("unterminated element <" + el.name + ">");
            if (starts_with("<!--")) {
                skip_until("-->", "comment");
                continue;
            }
            if (starts_with("</")) {
                advance();
                advance();
                std::string name = parse_name();
                if (name != el.name)
                    fail("mismatched end tag </" + name + "> for <" + el.name + ">");
                skip_ws();
                if (eof() || cur() != '>') fail("malformed end tag");
                advance();
                return el;
            }
            el.children.push_back(parse_element());
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

}  // namespace

XmlElement parse_xml(std::string_view text) { return Parser(text).parse_document(); }

}  // namespace edlog
