#pragma once

#include <wctx/types.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace wctx::test {

// Fresh directory under the build tree's temp area, removed on scope exit.
class TempDir {
public:
    TempDir()
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        std::string name = info ? std::string(info->test_suite_name()) + "_" + info->name() : "wctx";
        for (auto& c : name)
            if (c == '/') c = '_';
        path_ = std::filesystem::temp_directory_path() / ("wctx_" + name);
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

private:
    std::filesystem::path path_;
};

inline void write(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream(p, std::ios::binary) << text;
}

inline std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

inline DetectedEvent ev(std::uint32_t id, double ts)
{
    return DetectedEvent{EventId(id), ts, 1.0, 0, 0};
}

// Timestamp-sorted stream from (id, ts) pairs.
inline EventStream stream(std::vector<std::pair<std::uint32_t, double>> items)
{
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    EventStream out;
    for (const auto& [id, ts] : items) out.push_back(ev(id, ts));
    return out;
}

inline std::vector<EventId> ids(std::initializer_list<std::uint32_t> values)
{
    std::vector<EventId> out;
    for (auto v : values) out.emplace_back(v);
    return out;
}

} // namespace wctx::test
