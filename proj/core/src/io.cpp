#include "wctx/io.hpp"

#include "json_util.hpp"

#include <algorithm>
#include <sstream>

namespace wctx {

using detail::json;
using detail::ojson;

std::string read_file(const std::filesystem::path& path)
{
    auto in = detail::open_input(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    detail::write_text(path, text);
}

namespace {

EventId event_id_field(const json& j, const char* key)
{
    const auto v = detail::required_integer(j, key);
    if (v < 1 || v > static_cast<std::int64_t>(UINT32_MAX))
        throw ParseError(std::string("field '") + key + "' must be a positive event id");
    return EventId(static_cast<std::uint32_t>(v));
}

template <typename Fn>
auto with_line(std::size_t line, Fn&& fn)
{
    try {
        return fn();
    } catch (const ParseError& e) {
        if (e.line() != 0) throw;
        throw ParseError(e.what(), line);
    }
}

} // namespace

std::vector<LabelRecord> load_labels(const std::filesystem::path& path)
{
    auto in = detail::open_input(path);
    std::vector<LabelRecord> out;
    detail::for_each_jsonl(in, [&](const json& j, std::size_t line) {
        with_line(line, [&] {
            LabelRecord r;
            r.event = event_id_field(j, "event_id");
            r.t_start = detail::required_number(j, "t_start");
            r.t_end = detail::required_number(j, "t_end");
            if (r.t_end < r.t_start) throw ValidationError("t_end before t_start", line);
            if (j.contains("label") && j["label"].is_string()) r.label = j["label"].get<std::string>();
            out.push_back(std::move(r));
            return 0;
        });
    });
    return out;
}

void save_labels(const std::filesystem::path& path, std::span<const LabelRecord> labels)
{
    auto out = detail::open_output(path);
    for (const auto& r : labels) {
        ojson j;
        j["event_id"] = r.event.value;
        j["t_start"] = r.t_start;
        j["t_end"] = r.t_end;
        if (r.label) j["label"] = *r.label;
        out << j.dump() << '\n';
    }
}

EventFile load_events(const std::filesystem::path& path)
{
    auto in = detail::open_input(path);
    EventFile file;
    double last = 0.0;
    detail::for_each_jsonl(in, [&](const json& j, std::size_t line) {
        with_line(line, [&] {
            DetectedEvent e;
            e.event = event_id_field(j, "event_id");
            e.ts = detail::required_number(j, "ts");
            e.confidence = detail::required_number(j, "confidence");
            if (e.confidence < 0.0 || e.confidence > 1.0) throw ValidationError("confidence outside [0,1]", line);
            if (!file.events.empty() && e.ts < last) throw ValidationError("event timestamps regress", line);
            last = e.ts;
            if (j.contains("label") && j["label"].is_string()) file.labels[e.event] = j["label"].get<std::string>();
            file.events.push_back(e);
            return 0;
        });
    });
    return file;
}

void save_events(const std::filesystem::path& path, const EventStream& events, const LabelMap& labels)
{
    auto out = detail::open_output(path);
    for (const auto& e : events) {
        ojson j;
        j["event_id"] = e.event.value;
        j["ts"] = e.ts;
        j["confidence"] = e.confidence;
        if (auto it = labels.find(e.event); it != labels.end()) j["label"] = it->second;
        out << j.dump() << '\n';
    }
}

namespace {

ojson graph_json(const EventTransitionGraph& g)
{
    ojson j;
    j["graph_id"] = g.graph_id;
    j["source"] = std::string(to_string(g.source));
    ojson nodes = ojson::array();
    for (const auto& n : g.nodes) {
        ojson node;
        node["id"] = n.id.value;
        node["label"] = n.label;
        if (n.condition) {
            ojson c;
            c["attribute"] = n.condition->attribute;
            c["op"] = std::string(to_string(n.condition->op));
            c["threshold"] = n.condition->threshold;
            node["condition"] = c;
        }
        nodes.push_back(node);
    }
    j["nodes"] = nodes;
    ojson edges = ojson::array();
    for (const auto& e : g.edges) edges.push_back(ojson::array({e.first.value, e.second.value}));
    j["edges"] = edges;
    if (g.occurrence_count) j["occurrence_count"] = *g.occurrence_count;
    return j;
}

EventTransitionGraph graph_from(const json& j)
{
    EventTransitionGraph g;
    g.graph_id = detail::required<std::string>(j, "graph_id");
    const auto source = detail::required<std::string>(j, "source");
    if (source == "iot") g.source = GraphSource::IotContext;
    else if (source == "wireless") g.source = GraphSource::WirelessContext;
    else throw ParseError("graph source must be \"iot\" or \"wireless\", got \"" + source + "\"");

    if (!j.contains("nodes") || !j["nodes"].is_array()) throw ParseError("graph needs a \"nodes\" array");
    for (const auto& n : j["nodes"]) {
        GraphNode node;
        node.id = event_id_field(n, "id");
        node.label = n.value("label", std::string{});
        if (n.contains("condition") && !n["condition"].is_null()) {
            const auto& c = n["condition"];
            ConditionNode cond;
            cond.attribute = detail::required<std::string>(c, "attribute");
            const auto op = detail::required<std::string>(c, "op");
            auto parsed = comparator_from_string(op);
            if (!parsed) throw ParseError("condition op must be <, > or =, got \"" + op + "\"");
            cond.op = *parsed;
            cond.threshold = detail::required_number(c, "threshold");
            node.condition = cond;
        }
        g.nodes.push_back(std::move(node));
    }
    if (!j.contains("edges") || !j["edges"].is_array()) throw ParseError("graph needs an \"edges\" array");
    for (const auto& e : j["edges"]) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
            throw ParseError("edges must be [int, int] pairs");
        g.edges.emplace_back(EventId(e[0].get<std::uint32_t>()), EventId(e[1].get<std::uint32_t>()));
    }
    if (j.contains("occurrence_count") && !j["occurrence_count"].is_null()) {
        const auto count = j["occurrence_count"];
        if (!count.is_number_integer() || count.get<std::int64_t>() < 0)
            throw ParseError("occurrence_count must be a non-negative integer");
        g.occurrence_count = count.get<std::uint64_t>();
    }
    return g;
}

std::vector<EventTransitionGraph> graphs_from(const json& j)
{
    std::vector<EventTransitionGraph> out;
    try {
        if (j.is_array()) {
            for (const auto& item : j) out.push_back(graph_from(item));
        } else {
            out.push_back(graph_from(j));
        }
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
    return out;
}

} // namespace

std::string graph_to_json(const EventTransitionGraph& g, int indent)
{
    return graph_json(g).dump(indent);
}

EventTransitionGraph graph_from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
    auto graphs = graphs_from(j);
    if (graphs.size() != 1) throw ParseError("expected exactly one graph");
    return graphs.front();
}

std::vector<EventTransitionGraph> load_graphs(const std::filesystem::path& path)
{
    try {
        return graphs_from(detail::parse_document(path));
    } catch (const ParseError& e) {
        if (std::string(e.what()).find(path.string()) != std::string::npos) throw;
        throw ParseError(path.string() + ": " + e.what());
    }
}

void save_graph(const std::filesystem::path& path, const EventTransitionGraph& g)
{
    detail::write_text(path, graph_json(g).dump(2) + "\n");
}

void save_graphs(const std::filesystem::path& path, std::span<const EventTransitionGraph> graphs)
{
    ojson arr = ojson::array();
    for (const auto& g : graphs) arr.push_back(graph_json(g));
    detail::write_text(path, arr.dump(2) + "\n");
}

std::vector<EventTransitionGraph> load_graph_dir(const std::filesystem::path& dir)
{
    if (!std::filesystem::is_directory(dir)) throw Error("context directory '" + dir.string() + "' does not exist");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<EventTransitionGraph> out;
    for (const auto& f : files) {
        for (auto& g : load_graphs(f)) {
            try {
                validate_graph(g);
            } catch (const ValidationError& e) {
                throw ValidationError(f.string() + ": " + e.what());
            }
            out.push_back(std::move(g));
        }
    }
    return out;
}

std::string channel_map_to_json(const ChannelMap& map)
{
    ojson arr = ojson::array();
    for (const auto& c : map.channels) {
        ojson j;
        j["name"] = c.name;
        j["type"] = std::string(to_string(c.type));
        j["writers"] = c.writers;
        j["readers"] = c.readers;
        arr.push_back(j);
    }
    ojson root;
    root["channels"] = arr;
    return root.dump(2) + "\n";
}

ChannelMap channel_map_from_json(const std::string& text)
{
    ChannelMap map;
    try {
        const auto j = json::parse(text);
        if (!j.contains("channels") || !j["channels"].is_array()) throw ParseError("channel map needs a \"channels\" array");
        for (const auto& c : j["channels"]) {
            Channel ch;
            ch.name = detail::required<std::string>(c, "name");
            const auto type = detail::required<std::string>(c, "type");
            auto t = channel_type_from_string(type);
            if (!t) throw ParseError("unknown channel type '" + type + "'");
            ch.type = *t;
            ch.writers = c.value("writers", std::vector<std::string>{});
            ch.readers = c.value("readers", std::vector<std::string>{});
            map.channels.push_back(std::move(ch));
        }
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
    return map;
}

ChannelMap load_channel_map(const std::filesystem::path& path)
{
    return channel_map_from_json(read_file(path));
}

void save_channel_map(const std::filesystem::path& path, const ChannelMap& map)
{
    detail::write_text(path, channel_map_to_json(map));
}

std::string vocabulary_to_json(const CapabilityVocabulary& vocabulary)
{
    ojson arr = ojson::array();
    for (const auto& cap : vocabulary.capabilities()) {
        ojson j;
        j["name"] = cap.name;
        ojson attrs = ojson::array();
        for (const auto& a : cap.attributes) {
            ojson aj;
            aj["name"] = a.name;
            aj["values"] = a.values;
            attrs.push_back(aj);
        }
        j["attributes"] = attrs;
        j["commands"] = cap.commands;
        arr.push_back(j);
    }
    return arr.dump(2) + "\n";
}

CapabilityVocabulary vocabulary_from_json(const std::string& text)
{
    std::vector<Capability> caps;
    try {
        const auto j = json::parse(text);
        if (!j.is_array()) throw ParseError("capability vocabulary must be a JSON list");
        for (const auto& c : j) {
            Capability cap;
            cap.name = detail::required<std::string>(c, "name");
            if (c.contains("attributes")) {
                for (const auto& a : c["attributes"]) {
                    CapabilityAttribute attr;
                    attr.name = detail::required<std::string>(a, "name");
                    attr.values = a.value("values", std::vector<std::string>{});
                    cap.attributes.push_back(std::move(attr));
                }
            }
            cap.commands = c.value("commands", std::vector<std::string>{});
            caps.push_back(std::move(cap));
        }
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
    return CapabilityVocabulary(std::move(caps));
}

CapabilityVocabulary load_vocabulary(const std::filesystem::path& path)
{
    return vocabulary_from_json(read_file(path));
}

void save_vocabulary(const std::filesystem::path& path, const CapabilityVocabulary& vocabulary)
{
    detail::write_text(path, vocabulary_to_json(vocabulary));
}

} // namespace wctx
