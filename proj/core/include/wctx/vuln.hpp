#pragma once

#include "wctx/channels.hpp"
#include "wctx/graph.hpp"
#include "wctx/vocabulary.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wctx {

// Upstream app's terminal action writes the channel, downstream app's trigger reads it.
struct VulnChain {
    std::string upstream;
    std::string channel;
    ChannelType channel_type = ChannelType::Physical;
    std::string downstream;
    EventId writer_event;  // sink of upstream
    EventId reader_event;  // root of downstream
    std::optional<std::vector<EventId>> evidence;
    std::optional<std::string> evidence_graph;
    std::string risk_note;

    bool operator==(const VulnChain&) const = default;
};

// One chain per (upstream, channel, downstream), in graph-pair then channel order.
// Node labels must be "device/command" strings resolvable against `vocabulary`.
std::vector<VulnChain> discover_chains(std::span<const EventTransitionGraph> context, const ChannelMap& channels,
                                       const CapabilityVocabulary& vocabulary);

// Attaches the first wireless path equal to topo(upstream) ++ topo(downstream).
std::vector<VulnChain> confirm_chains(std::vector<VulnChain> chains, std::span<const EventTransitionGraph> context,
                                      std::span<const EventTransitionGraph> wireless);

struct ChannelStat {
    std::string channel;
    ChannelType type = ChannelType::Physical;
    std::size_t apps = 0;    // distinct upstream and downstream apps
    std::size_t chains = 0;

    bool operator==(const ChannelStat&) const = default;
};

// Descending by chain count, then by channel name.
std::vector<ChannelStat> channel_stats(std::span<const VulnChain> chains);

std::string chains_to_json(std::span<const VulnChain> chains, int indent = 2);
std::vector<VulnChain> chains_from_json(const std::string& text);
std::string stats_to_json(std::span<const ChannelStat> stats, int indent = 2);
std::string stats_to_text(std::span<const ChannelStat> stats);

} // namespace wctx
