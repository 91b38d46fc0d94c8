#include "wctx/error.hpp"

namespace wctx {
namespace {

std::string with_line(const std::string& what, std::size_t line)
{
    if (line == 0) return what;
    return "line " + std::to_string(line) + ": " + what;
}

} // namespace

ParseError::ParseError(const std::string& what, std::size_t line)
    : Error(with_line(what, line)), line_(line)
{
}

ValidationError::ValidationError(const std::string& what, std::size_t line)
    : Error(with_line(what, line)), line_(line)
{
}

} // namespace wctx
