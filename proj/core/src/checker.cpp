#include "wctx/checker.hpp"

#include "json_util.hpp"
#include "wctx/error.hpp"
#include "wctx/io.hpp"
#include "wctx/registry.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace wctx {

using detail::json;
using detail::ojson;

std::string_view to_string(AnomalyType t)
{
    switch (t) {
    case AnomalyType::EventSpoofing: return "EventSpoofing";
    case AnomalyType::MisbehaviorOrDeviceFailure: return "MisbehaviorOrDeviceFailure";
    case AnomalyType::Overprivilege: return "Overprivilege";
    case AnomalyType::UnknownMismatch: return "UnknownMismatch";
    }
    return "UnknownMismatch";
}

std::optional<AnomalyType> anomaly_type_from_string(std::string_view s)
{
    for (auto t : {AnomalyType::EventSpoofing, AnomalyType::MisbehaviorOrDeviceFailure, AnomalyType::Overprivilege,
                   AnomalyType::UnknownMismatch})
        if (to_string(t) == s) return t;
    return std::nullopt;
}

namespace {

struct Context {
    const EventTransitionGraph* original;
    EventTransitionGraph graph;  // conditions contracted
    std::set<EventId> nodes;
    std::vector<EventId> roots;
    std::vector<EventId> non_roots;
};

std::vector<Context> prepare(std::span<const EventTransitionGraph> context)
{
    std::vector<Context> out;
    for (const auto& g : context) {
        Context c{&g, contract_conditions(g), {}, {}, {}};
        const auto ids = c.graph.node_ids();
        c.nodes.insert(ids.begin(), ids.end());
        c.roots = c.graph.roots();
        for (auto id : ids)
            if (std::find(c.roots.begin(), c.roots.end(), id) == c.roots.end()) c.non_roots.push_back(id);
        out.push_back(std::move(c));
    }
    return out;
}

bool order_consistent(const std::vector<EventId>& seq, const EventTransitionGraph& g)
{
    for (const auto& [u, v] : g.edges) {
        auto pu = std::find(seq.begin(), seq.end(), u);
        auto pv = std::find(seq.begin(), seq.end(), v);
        if (pu != seq.end() && pv != seq.end() && pu > pv) return false;
    }
    return true;
}

bool covers(const std::set<EventId>& s, const std::vector<EventId>& items)
{
    return std::all_of(items.begin(), items.end(), [&](EventId e) { return s.count(e) > 0; });
}

bool same_nodes(const std::vector<EventId>& seq, const std::set<EventId>& nodes)
{
    return std::set<EventId>(seq.begin(), seq.end()) == nodes && seq.size() == nodes.size();
}

bool matches_sequence(const std::vector<EventId>& seq, const Context& c)
{
    if (same_nodes(seq, c.nodes) && order_consistent(seq, c.graph)) return true;
    const auto ids = c.original->node_ids();
    return c.original->has_conditions() && same_nodes(seq, std::set<EventId>(ids.begin(), ids.end())) &&
           order_consistent(seq, *c.original);
}

struct Verdict {
    AnomalyType kind = AnomalyType::UnknownMismatch;
    std::optional<std::string> context;
    std::vector<EventId> missing;
    std::vector<EventId> extra;
};

Verdict classify(const std::vector<EventId>& seq, const std::vector<Context>& contexts)
{
    const std::set<EventId> s(seq.begin(), seq.end());
    auto strict_subset = [&](const Context& c) {
        return s.size() < c.nodes.size() && std::all_of(s.begin(), s.end(), [&](EventId e) { return c.nodes.count(e) > 0; });
    };

    // Rule 1: the actions are there, some trigger is not.
    {
        const Context* best = nullptr;
        std::size_t best_missing = 0;
        for (const auto& c : contexts) {
            if (!strict_subset(c) || !covers(s, c.non_roots) || covers(s, c.roots)) continue;
            if (!order_consistent(seq, c.graph)) continue;
            const auto missing = c.nodes.size() - s.size();
            if (!best || missing < best_missing) {
                best = &c;
                best_missing = missing;
            }
        }
        if (best) {
            Verdict v{AnomalyType::EventSpoofing, best->graph.graph_id, {}, {}};
            for (auto r : best->roots)
                if (!s.count(r)) v.missing.push_back(r);
            return v;
        }
    }
    // Rule 2: the triggers are there, a downstream part is not.
    {
        const Context* best = nullptr;
        std::size_t best_missing = 0;
        for (const auto& c : contexts) {
            if (!strict_subset(c) || !covers(s, c.roots)) continue;
            const bool closed = std::all_of(s.begin(), s.end(), [&](EventId e) { return covers(s, c.graph.predecessors(e)); });
            if (!closed || !order_consistent(seq, c.graph)) continue;
            const auto missing = c.nodes.size() - s.size();
            if (!best || missing < best_missing) {
                best = &c;
                best_missing = missing;
            }
        }
        if (best) {
            Verdict v{AnomalyType::MisbehaviorOrDeviceFailure, best->graph.graph_id, {}, {}};
            for (auto e : best->graph.topological_order())
                if (!s.count(e)) v.missing.push_back(e);
            return v;
        }
    }
    // Rule 3: a whole context graph followed by surplus events.
    {
        const Context* best = nullptr;
        for (const auto& c : contexts) {
            if (c.nodes.size() >= s.size()) continue;
            if (!std::all_of(c.nodes.begin(), c.nodes.end(), [&](EventId e) { return s.count(e) > 0; })) continue;
            if (!order_consistent(seq, c.graph)) continue;
            std::size_t last_member = 0;
            for (std::size_t k = 0; k < seq.size(); ++k)
                if (c.nodes.count(seq[k])) last_member = k;
            bool trailing = true;
            for (std::size_t k = 0; k < last_member; ++k)
                if (!c.nodes.count(seq[k])) trailing = false;
            if (!trailing) continue;
            if (!best || c.nodes.size() > best->nodes.size()) best = &c;
        }
        if (best) {
            Verdict v{AnomalyType::Overprivilege, best->graph.graph_id, {}, {}};
            for (auto e : seq)
                if (!best->nodes.count(e)) v.extra.push_back(e);
            return v;
        }
    }
    return {};
}

std::vector<EventId> observed_order(const EventTransitionGraph& g)
{
    auto order = g.topological_order();
    if (order.empty() && !g.nodes.empty()) throw ValidationError("observed graph '" + g.graph_id + "' is cyclic");
    return order;
}

void check_labels(const EventTransitionGraph& observed, std::span<const EventTransitionGraph> context)
{
    for (const auto& n : observed.nodes) {
        if (n.label.empty()) continue;
        for (const auto& g : context) {
            const auto* m = g.node(n.id);
            if (m && !m->label.empty() && m->label != n.label && !m->condition)
                throw ConsistencyError("event " + std::to_string(n.id.value) + " is '" + n.label + "' in '" +
                                       observed.graph_id + "' but '" + m->label + "' in '" + g.graph_id + "'");
        }
    }
}

bool same_edges(const EventTransitionGraph& a, const EventTransitionGraph& b)
{
    return std::set<Edge>(a.edges.begin(), a.edges.end()) == std::set<Edge>(b.edges.begin(), b.edges.end());
}

bool graph_matches(const EventTransitionGraph& d, const EventTransitionGraph& g)
{
    const auto dn = d.node_ids();
    const auto gn = g.node_ids();
    if (std::set<EventId>(dn.begin(), dn.end()) != std::set<EventId>(gn.begin(), gn.end()) || dn.size() != gn.size())
        return false;
    if (same_edges(d, g)) return true;
    // A wireless path is one linearisation of a branching context graph.
    return !g.is_path() && d.is_path() && order_consistent(d.topological_order(), g);
}

} // namespace

std::optional<std::string> match_graph(const EventTransitionGraph& observed, std::span<const EventTransitionGraph> context)
{
    check_labels(observed, context);
    for (const auto& g : context) {
        if (graph_matches(observed, g)) return g.graph_id;
        if (g.has_conditions() && graph_matches(observed, contract_conditions(g))) return g.graph_id;
    }
    return std::nullopt;
}

AnomalyReport classify_anomaly(const EventTransitionGraph& observed, std::span<const EventTransitionGraph> context)
{
    const auto contexts = prepare(context);
    const auto v = classify(observed_order(observed), contexts);
    return AnomalyReport{v.kind, observed, v.context, v.missing, v.extra, std::nullopt};
}

std::vector<AnomalyReport> check_graphs(std::span<const EventTransitionGraph> wireless,
                                        std::span<const EventTransitionGraph> context)
{
    std::vector<AnomalyReport> out;
    for (const auto& d : wireless) {
        if (match_graph(d, context)) continue;
        out.push_back(classify_anomaly(d, context));
    }
    return out;
}

std::vector<AnomalyReport> check_stream(const EventStream& events, std::span<const EventTransitionGraph> context,
                                        const CheckerParams& params, const LabelMap& labels)
{
    const auto contexts = prepare(context);
    std::map<std::pair<EventId, EventId>, double> window;  // edge -> max lag accepted
    std::set<EventId> members, roots;
    std::map<EventId, std::set<EventId>> siblings;  // roots sharing a multi-root graph
    for (const auto& c : contexts) {
        members.insert(c.nodes.begin(), c.nodes.end());
        roots.insert(c.roots.begin(), c.roots.end());
        for (const auto& e : c.graph.edges) window[e] = params.miner.max_lag;
        if (c.roots.size() > 1)
            for (auto r : c.roots)
                for (auto q : c.roots)
                    if (r != q) siblings[r].insert(q);
    }
    if (!events.empty()) {
        MinerParams mp = params.miner;
        for (const auto& s : collect_pair_stats(events, mp)) {
            auto it = window.find({s.a, s.b});
            if (it != window.end() && s.stddev < mp.tau) it->second = std::min(mp.max_lag, s.mean + 3.0 * mp.tau);
        }
    }

    struct Occurrence {
        std::vector<std::size_t> idx;
        std::set<EventId> kinds;
        bool open = true;
    };
    std::vector<Occurrence> occ;
    const double close_after = std::max({params.miner.max_lag, params.extra_horizon, params.join_window});

    // Only commands can be surplus app actions; sensor reports are not issued by apps.
    auto issuable = [&](EventId e) {
        auto it = labels.find(e);
        if (it == labels.end()) return true;
        auto parts = split_label(it->second);
        return !parts || (!parts->second.empty() && parts->second.back() == ')');
    };
    auto complete = [&](const Occurrence& o) {
        return std::any_of(contexts.begin(), contexts.end(), [&](const Context& c) {
            return std::all_of(c.nodes.begin(), c.nodes.end(), [&](EventId e) { return o.kinds.count(e) > 0; });
        });
    };

    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto e = events[i].event;
        const double t = events[i].ts;
        for (auto& o : occ)
            if (o.open && t - events[o.idx.back()].ts > close_after) o.open = false;

        Occurrence* target = nullptr;
        double anchor = -1.0;
        for (auto& o : occ) {
            if (!o.open || o.kinds.count(e)) continue;
            for (auto k : o.idx) {
                auto w = window.find({events[k].event, e});
                const double dt = t - events[k].ts;
                if (w != window.end() && dt > 0.0 && dt <= w->second && events[k].ts > anchor) {
                    target = &o;
                    anchor = events[k].ts;
                }
            }
        }
        if (!target && siblings.count(e)) {
            for (auto& o : occ) {
                if (!o.open || o.kinds.count(e)) continue;
                const bool only_siblings = std::all_of(o.kinds.begin(), o.kinds.end(),
                                                       [&](EventId k) { return siblings[e].count(k) > 0; });
                if (only_siblings && t - events[o.idx.front()].ts <= params.join_window) {
                    target = &o;
                    break;
                }
            }
        }
        if (!target && !roots.count(e) && issuable(e)) {
            for (auto& o : occ) {
                if (!o.open || o.kinds.count(e) || !complete(o)) continue;
                const double dt = t - events[o.idx.back()].ts;
                if (dt <= params.extra_horizon && events[o.idx.back()].ts > anchor) {
                    target = &o;
                    anchor = events[o.idx.back()].ts;
                }
            }
        }
        if (target) {
            target->idx.push_back(i);
            target->kinds.insert(e);
        } else if (members.count(e)) {
            occ.push_back(Occurrence{{i}, {e}, true});
        }
        // Drop closed occurrences from the scan set lazily by keeping them; the list is
        // short-lived in practice because close_after bounds the open set.
    }

    std::vector<AnomalyReport> out;
    std::size_t serial = 0;
    for (const auto& o : occ) {
        std::vector<EventId> seq;
        for (auto k : o.idx) seq.push_back(events[k].event);
        ++serial;
        if (std::any_of(contexts.begin(), contexts.end(), [&](const Context& c) { return matches_sequence(seq, c); }))
            continue;

        const std::set<EventId> s(seq.begin(), seq.end());
        const bool some_fully_triggered = std::any_of(contexts.begin(), contexts.end(), [&](const Context& c) {
            return covers(s, c.roots) && !c.original->has_conditions();
        });
        const bool partial_and = std::any_of(contexts.begin(), contexts.end(), [&](const Context& c) {
            return c.roots.size() > 1 && covers(std::set<EventId>(c.roots.begin(), c.roots.end()), seq) &&
                   !covers(s, c.roots);
        });
        const bool unmet_condition = std::any_of(contexts.begin(), contexts.end(), [&](const Context& c) {
            return c.original->has_conditions() && s == std::set<EventId>(c.roots.begin(), c.roots.end());
        });
        if (!some_fully_triggered && (partial_and || unmet_condition)) continue;

        const auto v = classify(seq, contexts);
        std::vector<std::string> names;
        for (auto id : seq) {
            auto it = labels.find(id);
            names.push_back(it == labels.end() ? std::string{} : it->second);
        }
        char id[32];
        std::snprintf(id, sizeof id, "occurrence_%06zu", serial);
        auto g = make_path_graph(id, GraphSource::WirelessContext, seq, names);
        out.push_back(AnomalyReport{v.kind, std::move(g), v.context, v.missing, v.extra, events[o.idx.front()].ts});
    }
    return out;
}

namespace {

ojson ids_json(const std::vector<EventId>& ids)
{
    ojson arr = ojson::array();
    for (auto e : ids) arr.push_back(e.value);
    return arr;
}

} // namespace

std::string report_line(const AnomalyReport& r)
{
    ojson j;
    j["kind"] = std::string(to_string(r.kind));
    j["wireless_graph"] = ojson::parse(graph_to_json(r.wireless_graph));
    j["matched_context"] = r.matched_context ? ojson(*r.matched_context) : ojson(nullptr);
    j["missing_events"] = ids_json(r.missing_events);
    j["extra_events"] = ids_json(r.extra_events);
    j["ts"] = r.ts ? ojson(*r.ts) : ojson(nullptr);
    return j.dump();
}

void save_reports(const std::filesystem::path& path, std::span<const AnomalyReport> reports)
{
    auto out = detail::open_output(path);
    for (const auto& r : reports) out << report_line(r) << '\n';
}

std::vector<AnomalyReport> load_reports(const std::filesystem::path& path)
{
    auto in = detail::open_input(path);
    std::vector<AnomalyReport> out;
    detail::for_each_jsonl(in, [&](const json& j, std::size_t line) {
        AnomalyReport r;
        const auto kind = anomaly_type_from_string(detail::required<std::string>(j, "kind"));
        if (!kind) throw ParseError("unknown anomaly kind", line);
        r.kind = *kind;
        r.wireless_graph = graph_from_json(detail::required<json>(j, "wireless_graph").dump());
        if (j.contains("matched_context") && j["matched_context"].is_string())
            r.matched_context = j["matched_context"].get<std::string>();
        for (auto v : j.value("missing_events", std::vector<std::uint32_t>{})) r.missing_events.emplace_back(v);
        for (auto v : j.value("extra_events", std::vector<std::uint32_t>{})) r.extra_events.emplace_back(v);
        if (j.contains("ts") && j["ts"].is_number()) r.ts = j["ts"].get<double>();
        out.push_back(std::move(r));
    });
    return out;
}

} // namespace wctx
