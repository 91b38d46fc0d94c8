#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wctx {

// Base for everything the library throws on bad input or broken contracts.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed interchange file. `line()` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    ValidationError(const std::string& what, std::size_t line = 0);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class VocabularyError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class PreconditionError : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class TrainingError : public Error { using Error::Error; };
class InconclusiveError : public Error { using Error::Error; };
class ConsistencyError : public Error { using Error::Error; };

} // namespace wctx
