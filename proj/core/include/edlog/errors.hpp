#pragma once

#include <stdexcept>
#include <string>

namespace edlog {

// Error categories map 1:1 onto CLI exit codes.
enum class ErrorCategory { Usage = 1, Io = 2, Data = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory cat, std::string msg)
        : std::runtime_error(std::move(msg)), category_(cat) {}

    ErrorCategory category() const { return category_; }
    int exit_code() const { return static_cast<int>(category_); }

private:
    ErrorCategory category_;
};

class UsageError : public Error {
public:
    explicit UsageError(std::string msg) : Error(ErrorCategory::Usage, std::move(msg)) {}
};

class IoError : public Error {
public:
    explicit IoError(std::string msg) : Error(ErrorCategory::Io, std::move(msg)) {}
};

class DataError : public Error {
public:
    explicit DataError(std::string msg) : Error(ErrorCategory::Data, std::move(msg)) {}
};

}  // namespace edlog
