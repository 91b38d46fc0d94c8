#include "wctx/trace.hpp"

#include "json_util.hpp"

#include <algorithm>
#include <fstream>

namespace wctx {

using detail::json;
using detail::ojson;

std::vector<PacketRecord> parse_trace(std::istream& in)
{
    std::vector<PacketRecord> out;
    double last_ts = 0.0;
    detail::for_each_jsonl(in, [&](const json& j, std::size_t line) {
        PacketRecord p;
        try {
            p.ts = detail::required_number(j, "ts");
            const auto size = detail::required_integer(j, "size");
            const auto dir = detail::required_integer(j, "dir");
            const auto layer = detail::required_integer(j, "layer");
            const auto kind = detail::required<std::string>(j, "kind");
            p.src = detail::required<std::string>(j, "src");
            p.dst = detail::required<std::string>(j, "dst");

            if (size < 1) throw ValidationError("packet size must be >= 1, got " + std::to_string(size), line);
            if (dir != 0 && dir != 1) throw ValidationError("dir must be 0 or 1, got " + std::to_string(dir), line);
            if (layer < 0) throw ValidationError("layer must be non-negative", line);
            auto k = packet_kind_from_string(kind);
            if (!k) throw ParseError("unknown packet kind '" + kind + "'", line);
            p.size = static_cast<std::uint32_t>(size);
            p.direction = static_cast<Direction>(dir);
            p.layer = static_cast<std::uint32_t>(layer);
            p.kind = *k;
        } catch (const ValidationError&) {
            throw;
        } catch (const ParseError& e) {
            if (e.line() != 0) throw;
            throw ParseError(e.what(), line);
        }
        if (p.ts < 0.0) throw ValidationError("negative timestamp", line);
        if (!out.empty() && p.ts < last_ts)
            throw ValidationError("timestamp regression (" + std::to_string(p.ts) + " < " + std::to_string(last_ts) + ")",
                                  line);
        last_ts = p.ts;
        out.push_back(std::move(p));
    });
    return out;
}

std::vector<PacketRecord> load_trace(const std::filesystem::path& path)
{
    auto in = detail::open_input(path);
    return parse_trace(in);
}

std::string trace_line(const PacketRecord& p)
{
    ojson j;
    j["ts"] = p.ts;
    j["size"] = p.size;
    j["dir"] = static_cast<int>(p.direction);
    j["layer"] = p.layer;
    j["kind"] = std::string(to_string(p.kind));
    j["src"] = p.src;
    j["dst"] = p.dst;
    return j.dump();
}

void write_trace(std::ostream& out, std::span<const PacketRecord> packets)
{
    for (const auto& p : packets) out << trace_line(p) << '\n';
}

void save_trace(const std::filesystem::path& path, std::span<const PacketRecord> packets)
{
    auto out = detail::open_output(path);
    write_trace(out, packets);
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::vector<PacketRecord> filter_unrelated(std::span<const PacketRecord> packets)
{
    std::vector<PacketRecord> out;
    out.reserve(packets.size());
    std::copy_if(packets.begin(), packets.end(), std::back_inserter(out),
                 [](const PacketRecord& p) { return p.kind == PacketKind::Data; });
    return out;
}

} // namespace wctx
