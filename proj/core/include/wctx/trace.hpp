#pragma once

#include "wctx/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace wctx {

// JSON Lines, one packet per line:
//   {"ts": float, "size": int, "dir": 0|1, "layer": int, "kind": "data"|"beacon"|"ack"|"link",
//    "src": string, "dst": string}
// Throws ParseError on malformed lines and ValidationError on invariant violations
// (size 0, bad direction, negative or regressing ts), both carrying the 1-based line.
std::vector<PacketRecord> load_trace(const std::filesystem::path& path);
std::vector<PacketRecord> parse_trace(std::istream& in);

void save_trace(const std::filesystem::path& path, std::span<const PacketRecord> packets);
void write_trace(std::ostream& out, std::span<const PacketRecord> packets);
std::string trace_line(const PacketRecord& p);

// Keeps Data packets in original order; beacons, acks and link maintenance are dropped.
std::vector<PacketRecord> filter_unrelated(std::span<const PacketRecord> packets);

} // namespace wctx
