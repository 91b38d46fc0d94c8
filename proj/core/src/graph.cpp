#include "wctx/graph.hpp"

#include "wctx/error.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace wctx {

std::string_view to_string(GraphSource s)
{
    return s == GraphSource::IotContext ? "iot" : "wireless";
}

const GraphNode* EventTransitionGraph::node(EventId id) const
{
    auto it = std::find_if(nodes.begin(), nodes.end(), [&](const GraphNode& n) { return n.id == id; });
    return it == nodes.end() ? nullptr : &*it;
}

bool EventTransitionGraph::has_edge(EventId from, EventId to) const
{
    return std::find(edges.begin(), edges.end(), Edge{from, to}) != edges.end();
}

std::vector<EventId> EventTransitionGraph::node_ids() const
{
    std::vector<EventId> out;
    out.reserve(nodes.size());
    for (const auto& n : nodes) out.push_back(n.id);
    return out;
}

std::vector<EventId> EventTransitionGraph::roots() const
{
    std::vector<EventId> out;
    for (const auto& n : nodes) {
        const bool has_in = std::any_of(edges.begin(), edges.end(), [&](const Edge& e) { return e.second == n.id; });
        if (!has_in) out.push_back(n.id);
    }
    return out;
}

std::vector<EventId> EventTransitionGraph::sinks() const
{
    std::vector<EventId> out;
    for (const auto& n : nodes) {
        const bool has_out = std::any_of(edges.begin(), edges.end(), [&](const Edge& e) { return e.first == n.id; });
        if (!has_out) out.push_back(n.id);
    }
    return out;
}

std::vector<EventId> EventTransitionGraph::successors(EventId id) const
{
    std::vector<EventId> out;
    for (const auto& e : edges)
        if (e.first == id) out.push_back(e.second);
    return out;
}

std::vector<EventId> EventTransitionGraph::predecessors(EventId id) const
{
    std::vector<EventId> out;
    for (const auto& e : edges)
        if (e.second == id) out.push_back(e.first);
    return out;
}

std::vector<EventId> EventTransitionGraph::topological_order() const
{
    std::unordered_map<EventId, std::size_t> indegree;
    for (const auto& n : nodes) indegree[n.id] = 0;
    for (const auto& e : edges) ++indegree[e.second];

    std::vector<EventId> order;
    std::vector<bool> done(nodes.size(), false);
    while (order.size() < nodes.size()) {
        bool progressed = false;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (done[i] || indegree[nodes[i].id] != 0) continue;
            done[i] = true;
            order.push_back(nodes[i].id);
            for (const auto& e : edges)
                if (e.first == nodes[i].id) --indegree[e.second];
            progressed = true;
            break;
        }
        if (!progressed) return {};
    }
    return order;
}

bool EventTransitionGraph::is_path() const
{
    if (nodes.empty()) return false;
    if (edges.size() + 1 != nodes.size()) return false;
    const auto order = topological_order();
    if (order.size() != nodes.size()) return false;
    for (std::size_t i = 0; i + 1 < order.size(); ++i)
        if (!has_edge(order[i], order[i + 1])) return false;
    return true;
}

bool EventTransitionGraph::has_conditions() const
{
    return std::any_of(nodes.begin(), nodes.end(), [](const GraphNode& n) { return n.condition.has_value(); });
}

void validate_graph(const EventTransitionGraph& g)
{
    if (g.graph_id.empty()) throw ValidationError("graph has empty graph_id");
    std::unordered_set<EventId> ids;
    for (const auto& n : g.nodes) {
        if (!n.id.valid()) throw ValidationError("graph '" + g.graph_id + "': node id 0 is reserved");
        if (!ids.insert(n.id).second)
            throw ValidationError("graph '" + g.graph_id + "': duplicate node " + std::to_string(n.id.value));
    }
    std::set<Edge> seen;
    for (const auto& e : g.edges) {
        if (!ids.count(e.first) || !ids.count(e.second))
            throw ValidationError("graph '" + g.graph_id + "': edge " + std::to_string(e.first.value) + "->" +
                                  std::to_string(e.second.value) + " references a missing node");
        if (e.first == e.second)
            throw ValidationError("graph '" + g.graph_id + "': self loop on " + std::to_string(e.first.value));
        if (!seen.insert(e).second)
            throw ValidationError("graph '" + g.graph_id + "': duplicate edge " + std::to_string(e.first.value) +
                                  "->" + std::to_string(e.second.value));
    }
    if (!g.nodes.empty() && g.topological_order().size() != g.nodes.size())
        throw ValidationError("graph '" + g.graph_id + "' is not acyclic");

    // Acyclic + finite means every node has an ancestor root, so reachability holds;
    // the explicit walk keeps the check independent of that argument.
    std::unordered_set<EventId> reached;
    std::vector<EventId> stack = g.roots();
    while (!stack.empty()) {
        const EventId cur = stack.back();
        stack.pop_back();
        if (!reached.insert(cur).second) continue;
        for (auto next : g.successors(cur)) stack.push_back(next);
    }
    if (reached.size() != ids.size())
        throw ValidationError("graph '" + g.graph_id + "': node unreachable from any root");
}

EventTransitionGraph make_path_graph(std::string graph_id, GraphSource source, const std::vector<EventId>& events,
                                     const std::vector<std::string>& labels)
{
    EventTransitionGraph g;
    g.graph_id = std::move(graph_id);
    g.source = source;
    for (std::size_t i = 0; i < events.size(); ++i) {
        g.nodes.push_back(GraphNode{events[i], i < labels.size() ? labels[i] : std::string{}, std::nullopt});
        if (i > 0) g.edges.emplace_back(events[i - 1], events[i]);
    }
    return g;
}

EventTransitionGraph contract_conditions(const EventTransitionGraph& g)
{
    if (!g.has_conditions()) return g;
    EventTransitionGraph out = g;
    for (const auto& n : g.nodes) {
        if (!n.condition) continue;
        const auto preds = out.predecessors(n.id);
        const auto succs = out.successors(n.id);
        std::erase_if(out.edges, [&](const Edge& e) { return e.first == n.id || e.second == n.id; });
        for (auto p : preds)
            for (auto s : succs)
                if (!out.has_edge(p, s)) out.edges.emplace_back(p, s);
        std::erase_if(out.nodes, [&](const GraphNode& x) { return x.id == n.id; });
    }
    return out;
}

} // namespace wctx
