#pragma once

#include "wctx/error.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

namespace wctx::detail {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

inline std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    return in;
}

inline std::ofstream open_output(const std::filesystem::path& path)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    return out;
}

inline json parse_document(const std::filesystem::path& path)
{
    auto in = open_input(path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

// Calls fn(line_json, line_number) for every non-blank line. JSON syntax errors and
// type errors raised inside fn surface as ParseError with the line number.
inline void for_each_jsonl(std::istream& in, const std::function<void(const json&, std::size_t)>& fn)
{
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(e.what(), number);
        }
        try {
            fn(j, number);
        } catch (const json::exception& e) {
            throw ParseError(e.what(), number);
        }
    }
}

template <typename T>
T required(const json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
    return j.at(key).get<T>();
}

inline double required_number(const json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
    const auto& v = j.at(key);
    if (!v.is_number()) throw ParseError(std::string("field '") + key + "' is not a number");
    return v.get<double>();
}

inline std::int64_t required_integer(const json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
    const auto& v = j.at(key);
    if (!v.is_number_integer()) throw ParseError(std::string("field '") + key + "' is not an integer");
    return v.get<std::int64_t>();
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    auto out = open_output(path);
    out << text;
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

} // namespace wctx::detail
