#pragma once

#include <cstdio>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace edlog {

/// Streams an RFC-4180-style CSV file (comma separated, double-quote escaping,
/// quoted fields may contain commas, quotes and newlines). The whole file is
/// read into memory and fields are handed out as views into that buffer.
///
/// header_fn receives the first record; row_fn receives every subsequent
/// record together with its 1-based line number (the line the record starts on).
void for_each_csv_record(const std::string& path,
                         const std::function<void(std::span<const std::string_view>)>& header_fn,
                         const std::function<void(std::span<const std::string_view>, std::size_t)>& row_fn);

/// Parses CSV text already in memory; same callback contract as above.
void parse_csv(std::string_view text,
               const std::function<void(std::span<const std::string_view>)>& header_fn,
               const std::function<void(std::span<const std::string_view>, std::size_t)>& row_fn);

/// Buffered CSV writer. Fields are quoted only when they contain a comma,
/// quote, or newline.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void write_row(std::span<const std::string_view> fields);
    void write_row(std::span<const std::string> fields);
    void close();

private:
    void append_field(std::string_view f);
    void flush_if_full();

    std::FILE* file_ = nullptr;
    std::string path_;
    std::string buf_;
};

}  // namespace edlog
