#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hmtl {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition.
struct ContractError : Error {
    using Error::Error;
};

struct DimensionError : ContractError {
    using ContractError::ContractError;
};

class ParseError : public Error {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct ValidationError : Error {
    using Error::Error;
};

struct VocabularyError : Error {
    using Error::Error;
};

struct OversizeError : Error {
    using Error::Error;
};

struct FormatError : Error {
    using Error::Error;
};

struct LookupError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct IncompatibleError : Error {
    using Error::Error;
};

struct UsageError : Error {
    using Error::Error;
};

}  // namespace hmtl
