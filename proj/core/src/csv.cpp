#include "edlog/csv.hpp"

#include <fstream>
#include <sstream>

#include "edlog/errors.hpp"

namespace edlog {

void parse_csv(std::string_view text,
               const std::function<void(std::span<const std::string_view>)>& header_fn,
               const std::function<void(std::span<const std::string_view>, std::size_t)>& row_fn) {
    std::vector<std::string_view> fields;
    std::vector<std::string> owned;  // backing storage for fields that needed unescaping
    std::size_t line = 1;
    std::size_t record_line = 1;
    std::size_t pos = 0;
    bool first_record = true;
    const std::size_t n = text.size();

    while (pos < n) {
        fields.clear();
        owned.clear();
        record_line = line;
        bool record_done = false;
        while (!record_done) {
            if (pos < n && text[pos] == '"') {
                // quoted field
                ++pos;
                std::size_t start = pos;
                bool has_escape = false;
                std::string unescaped;
                while (true) {
                    if (pos >= n) throw DataError("csv: unterminated quoted field at line " + std::to_string(line));
                    char c = text[pos];
                    if (c == '"') {
                        if (pos + 1 < n && text[pos + 1] == '"') {
                            if (!has_escape) {
                                unescaped.assign(text.substr(start, pos - start));
                                has_escape = true;
                            }
                            unescaped += '"';
                            pos += 2;
                            start = pos;
                            continue;
                        }
                        break;
                    }
                    if (c == '\n') ++line;
                    if (has_escape) unescaped += c;
                    ++pos;
                }
                if (has_escape) {
                    owned.push_back(std::move(unescaped));
                    fields.emplace_back(owned.back());
                } else {
                    fields.emplace_back(text.substr(start, pos - start));
                }
                ++pos;  // closing quote
            } else {
                std::size_t start = pos;
                while (pos < n && text[pos] != ',' && text[pos] != '\n' && text[pos] != '\r') ++pos;
                fields.emplace_back(text.substr(start, pos - start));
            }
            if (pos >= n) {
                record_done = true;
            } else if (text[pos] == ',') {
                ++pos;
            } else {
                if (text[pos] == '\r') ++pos;
                if (pos < n && text[pos] == '\n') {
                    ++pos;
                    ++line;
                }
                record_done = true;
            }
        }
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
        if (first_record) {
            header_fn(fields);
            first_record = false;
        } else {
            row_fn(fields, record_line);
        }
    }
}

void for_each_csv_record(const std::string& path,
                         const std::function<void(std::span<const std::string_view>)>& header_fn,
                         const std::function<void(std::span<const std::string_view>, std::size_t)>& row_fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string text = std::move(ss).str();
    parse_csv(text, header_fn, row_fn);
}

CsvWriter::CsvWriter(const std::string& path) : path_(path) {
    file_ = std::fopen(path.c_str(), "wb");
    if (!file_) throw IoError("cannot open file for writing: " + path);
    buf_.reserve(1 << 20);
}

CsvWriter::~CsvWriter() {
    if (file_) {
        std::fwrite(buf_.data(), 1, buf_.size(), file_);
        std::fclose(file_);
    }
}

void CsvWriter::append_field(std::string_view f) {
    if (f.find_first_of(",\"\n\r") != std::string_view::npos) {
        buf_ += '"';
        for (char c : f) {
            if (c == '"') buf_ += '"';
            buf_ += c;
        }
        buf_ += '"';
    } else {
        buf_.append(f);
    }
}

void CsvWriter::flush_if_full() {
    if (buf_.size() >= (1 << 20)) {
        if (std::fwrite(buf_.data(), 1, buf_.size(), file_) != buf_.size())
            throw IoError("write failed: " + path_);
        buf_.clear();
    }
}

void CsvWriter::write_row(std::span<const std::string_view> fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) buf_ += ',';
        append_field(fields[i]);
    }
    buf_ += '\n';
    flush_if_full();
}

void CsvWriter::write_row(std::span<const std::string> fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) buf_ += ',';
        append_field(fields[i]);
    }
    buf_ += '\n';
    flush_if_full();
}

void CsvWriter::close() {
    if (!file_) return;
    if (std::fwrite(buf_.data(), 1, buf_.size(), file_) != buf_.size())
        throw IoError("write failed: " + path_);
    buf_.clear();
    std::fclose(file_);
    file_ = nullptr;
}

}  // namespace edlog
