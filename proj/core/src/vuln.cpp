#include "wctx/vuln.hpp"

#include "json_util.hpp"
#include "wctx/error.hpp"
#include "wctx/registry.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace wctx {

using detail::json;
using detail::ojson;

namespace {

struct Endpoint {
    EventId id;
    std::string device;
    CommandRef command;
};

Endpoint endpoint(const EventTransitionGraph& g, EventId id, const CapabilityVocabulary& vocabulary)
{
    const auto* n = g.node(id);
    auto parts = split_label(n->label);
    if (!parts)
        throw VocabularyError("node " + std::to_string(id.value) + " of '" + g.graph_id + "' has no device/command label");
    return Endpoint{id, parts->first, vocabulary.resolve(parts->second)};
}

std::vector<Endpoint> endpoints(const EventTransitionGraph& g, const std::vector<EventId>& ids,
                                const CapabilityVocabulary& vocabulary)
{
    std::vector<Endpoint> out;
    for (auto id : ids)
        if (!g.node(id)->condition) out.push_back(endpoint(g, id, vocabulary));
    return out;
}


bool term_matches(const ChannelTerm& t, const Endpoint& e)
{
    return t.command.text == e.command.text && qualifier_matches(t.qualifier, e.device);
}

} // namespace

std::vector<VulnChain> discover_chains(std::span<const EventTransitionGraph> context, const ChannelMap& channels,
                                       const CapabilityVocabulary& vocabulary)
{
    struct Resolved {
        const Channel* channel;
        std::vector<ChannelTerm> writers, readers;
    };
    std::vector<Resolved> resolved;
    for (const auto& c : channels.channels) {
        Resolved r{&c, {}, {}};
        for (const auto& w : c.writers) r.writers.push_back(vocabulary.resolve_term(w));
        for (const auto& w : c.readers) r.readers.push_back(vocabulary.resolve_term(w));
        resolved.push_back(std::move(r));
    }
    std::vector<std::vector<Endpoint>> sinks, roots;
    for (const auto& g : context) {
        sinks.push_back(endpoints(g, g.sinks(), vocabulary));
        roots.push_back(endpoints(g, g.roots(), vocabulary));
    }

    std::vector<VulnChain> out;
    for (std::size_t i = 0; i < context.size(); ++i) {
        for (std::size_t j = 0; j < context.size(); ++j) {
            if (i == j || context[i].graph_id == context[j].graph_id) continue;
            for (const auto& r : resolved) {
                std::optional<std::pair<const Endpoint*, const Endpoint*>> hit;
                for (const auto& w : sinks[i]) {
                    if (!std::any_of(r.writers.begin(), r.writers.end(), [&](const auto& t) { return term_matches(t, w); }))
                        continue;
                    for (const auto& d : roots[j]) {
                        if (r.channel->type == ChannelType::Capability && d.device != w.device) continue;
                        if (std::any_of(r.readers.begin(), r.readers.end(), [&](const auto& t) { return term_matches(t, d); })) {
                            hit = std::make_pair(&w, &d);
                            break;
                        }
                    }
                    if (hit) break;
                }
                if (!hit) continue;
                VulnChain c;
                c.upstream = context[i].graph_id;
                c.channel = r.channel->name;
                c.channel_type = r.channel->type;
                c.downstream = context[j].graph_id;
                c.writer_event = hit->first->id;
                c.reader_event = hit->second->id;
                c.risk_note = c.upstream + " runs " + hit->first->device + "/" + hit->first->command.text + ", which " +
                              c.downstream + " observes as " + hit->second->device + "/" + hit->second->command.text +
                              " through " + std::string(to_string(c.channel_type)) + " channel " + c.channel;
                out.push_back(std::move(c));
            }
        }
    }
    return out;
}

std::vector<VulnChain> confirm_chains(std::vector<VulnChain> chains, std::span<const EventTransitionGraph> context,
                                      std::span<const EventTransitionGraph> wireless)
{
    std::map<std::string, std::vector<EventId>> order;
    for (const auto& g : context) order.emplace(g.graph_id, contract_conditions(g).topological_order());
    for (auto& c : chains) {
        auto up = order.find(c.upstream);
        auto down = order.find(c.downstream);
        if (up == order.end() || down == order.end()) continue;
        auto want = up->second;
        want.insert(want.end(), down->second.begin(), down->second.end());
        for (const auto& w : wireless) {
            if (!w.is_path() || w.topological_order() != want) continue;
            c.evidence = want;
            c.evidence_graph = w.graph_id;
            break;
        }
    }
    return chains;
}

std::vector<ChannelStat> channel_stats(std::span<const VulnChain> chains)
{
    std::map<std::string, std::pair<ChannelStat, std::set<std::string>>> acc;
    for (const auto& c : chains) {
        auto& [stat, apps] = acc[c.channel];
        stat.channel = c.channel;
        stat.type = c.channel_type;
        ++stat.chains;
        apps.insert(c.upstream);
        apps.insert(c.downstream);
    }
    std::vector<ChannelStat> out;
    for (auto& [name, entry] : acc) {
        entry.first.apps = entry.second.size();
        out.push_back(entry.first);
    }
    std::stable_sort(out.begin(), out.end(), [](const ChannelStat& a, const ChannelStat& b) {
        return a.chains > b.chains;
    });
    return out;
}

std::string chains_to_json(std::span<const VulnChain> chains, int indent)
{
    ojson arr = ojson::array();
    for (const auto& c : chains) {
        ojson j;
        j["upstream"] = c.upstream;
        j["channel"] = {{"name", c.channel}, {"type", std::string(to_string(c.channel_type))}};
        j["downstream"] = c.downstream;
        j["writer_event"] = c.writer_event.value;
        j["reader_event"] = c.reader_event.value;
        if (c.evidence) {
            ojson ev = ojson::array();
            for (auto e : *c.evidence) ev.push_back(e.value);
            j["evidence"] = {{"graph_id", c.evidence_graph.value_or("")}, {"events", ev}};
        } else {
            j["evidence"] = nullptr;
        }
        j["risk_note"] = c.risk_note;
        arr.push_back(std::move(j));
    }
    return arr.dump(indent) + "\n";
}

std::vector<VulnChain> chains_from_json(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
    if (!doc.is_array()) throw ParseError("chain list must be a JSON array");
    std::vector<VulnChain> out;
    for (const auto& j : doc) try {
        VulnChain c;
        c.upstream = detail::required<std::string>(j, "upstream");
        c.downstream = detail::required<std::string>(j, "downstream");
        const auto& ch = detail::required<json>(j, "channel");
        c.channel = detail::required<std::string>(ch, "name");
        auto type = channel_type_from_string(detail::required<std::string>(ch, "type"));
        if (!type) throw ParseError("unknown channel type '" + ch["type"].get<std::string>() + "'");
        c.channel_type = *type;
        c.writer_event = EventId(detail::required<std::uint32_t>(j, "writer_event"));
        c.reader_event = EventId(detail::required<std::uint32_t>(j, "reader_event"));
        if (j.contains("evidence") && j["evidence"].is_object()) {
            c.evidence_graph = detail::required<std::string>(j["evidence"], "graph_id");
            std::vector<EventId> ev;
            for (auto v : detail::required<std::vector<std::uint32_t>>(j["evidence"], "events")) ev.emplace_back(v);
            c.evidence = std::move(ev);
        }
        c.risk_note = j.value("risk_note", std::string{});
        out.push_back(std::move(c));
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
    return out;
}

std::string stats_to_json(std::span<const ChannelStat> stats, int indent)
{
    ojson arr = ojson::array();
    for (const auto& s : stats) {
        ojson j;
        j["channel"] = s.channel;
        j["type"] = std::string(to_string(s.type));
        j["apps_related"] = s.apps;
        j["interaction_chains"] = s.chains;
        arr.push_back(std::move(j));
    }
    return arr.dump(indent) + "\n";
}

std::string stats_to_text(std::span<const ChannelStat> stats)
{
    std::size_t wn = 7, wt = 4;
    for (const auto& s : stats) {
        wn = std::max(wn, s.channel.size());
        wt = std::max(wt, to_string(s.type).size());
    }
    auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(w, s.size()), ' ');
        return s;
    };
    auto rpad = [](const std::string& s, std::size_t w) { return std::string(w > s.size() ? w - s.size() : 0, ' ') + s; };
    std::string out = pad("channel", wn) + "  " + pad("type", wt) + "  " + rpad("apps", 6) + "  " + rpad("chains", 6) + "\n";
    for (const auto& s : stats)
        out += pad(s.channel, wn) + "  " + pad(std::string(to_string(s.type)), wt) + "  " +
               rpad(std::to_string(s.apps), 6) + "  " + rpad(std::to_string(s.chains), 6) + "\n";
    return out;
}

} // namespace wctx
