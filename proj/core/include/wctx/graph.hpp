#pragma once

#include "wctx/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wctx {

enum class GraphSource : std::uint8_t { IotContext, WirelessContext };

std::string_view to_string(GraphSource s);

struct GraphNode {
    EventId id;
    std::string label;
    // Set on IoT-context nodes that stand for an in-app threshold test. The node id is
    // the attribute-report event of the same attribute (the only part visible on air).
    std::optional<ConditionNode> condition;

    bool operator==(const GraphNode&) const = default;
};

using Edge = std::pair<EventId, EventId>;

struct EventTransitionGraph {
    std::string graph_id;
    GraphSource source = GraphSource::IotContext;
    std::vector<GraphNode> nodes;
    std::vector<Edge> edges;
    std::optional<std::uint64_t> occurrence_count;

    bool operator==(const EventTransitionGraph&) const = default;

    const GraphNode* node(EventId id) const;
    bool has_node(EventId id) const { return node(id) != nullptr; }
    bool has_edge(EventId from, EventId to) const;

    std::vector<EventId> node_ids() const;
    std::vector<EventId> roots() const;  // in-degree 0, in node order
    std::vector<EventId> sinks() const;  // out-degree 0, in node order
    std::vector<EventId> successors(EventId id) const;
    std::vector<EventId> predecessors(EventId id) const;

    // Kahn order with node-list position as tie break. Empty when cyclic.
    std::vector<EventId> topological_order() const;
    bool is_path() const;
    bool has_conditions() const;
};

// Throws ValidationError: duplicate node ids, dangling/self/duplicate edges, cycles,
// nodes unreachable from a root, empty graph_id, invalid ids.
void validate_graph(const EventTransitionGraph& g);

EventTransitionGraph make_path_graph(std::string graph_id, GraphSource source,
                                     const std::vector<EventId>& events,
                                     const std::vector<std::string>& labels = {});

// Drops condition nodes, linking each predecessor to each successor.
EventTransitionGraph contract_conditions(const EventTransitionGraph& g);

} // namespace wctx
