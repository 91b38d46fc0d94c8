#include "wctx/sim_io.hpp"

#include "json_util.hpp"
#include "wctx/io.hpp"

namespace wctx {

using detail::json;
using detail::ojson;

namespace {

json parse_text(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
}

std::vector<std::uint32_t> id_values(const std::vector<EventId>& ids)
{
    std::vector<std::uint32_t> out;
    for (auto e : ids) out.push_back(e.value);
    return out;
}

std::vector<EventId> ids_from(const json& j, const char* key)
{
    std::vector<EventId> out;
    for (auto v : detail::required<std::vector<std::uint32_t>>(j, key)) out.emplace_back(v);
    return out;
}

template <typename Fn>
auto guarded(Fn&& fn)
{
    try {
        return fn();
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
}

} // namespace

std::string templates_to_json(std::span<const EventTemplate> templates)
{
    ojson arr = ojson::array();
    for (const auto& t : templates) {
        ojson j;
        j["event_id"] = t.event.value;
        j["label"] = t.label;
        j["sizes"] = t.sizes;
        j["directions"] = t.directions;
        j["base_intervals"] = t.base_intervals;
        j["layer_tags"] = t.layer_tags;
        j["jitter_sigma"] = t.jitter_sigma;
        arr.push_back(j);
    }
    return arr.dump(2) + "\n";
}

std::vector<EventTemplate> templates_from_json(const std::string& text)
{
    const auto j = parse_text(text);
    if (!j.is_array()) throw ParseError("templates file must be a JSON list");
    return guarded([&] {
        std::vector<EventTemplate> out;
        for (const auto& item : j) {
            EventTemplate t;
            t.event = EventId(detail::required<std::uint32_t>(item, "event_id"));
            t.label = item.value("label", std::string{});
            t.sizes = detail::required<std::vector<std::uint32_t>>(item, "sizes");
            t.directions = detail::required<std::vector<std::uint8_t>>(item, "directions");
            t.base_intervals = detail::required<std::vector<double>>(item, "base_intervals");
            t.layer_tags = item.value("layer_tags", std::vector<std::uint32_t>(t.sizes.size(), 0));
            t.jitter_sigma = item.value("jitter_sigma", 0.005);
            out.push_back(std::move(t));
        }
        validate_templates(out);
        return out;
    });
}

std::vector<EventTemplate> load_templates(const std::filesystem::path& path)
{
    return templates_from_json(read_file(path));
}

void save_templates(const std::filesystem::path& path, std::span<const EventTemplate> templates)
{
    write_file(path, templates_to_json(templates));
}

std::string rules_to_json(std::span<const AppRule> rules)
{
    ojson arr = ojson::array();
    for (const auto& r : rules) {
        ojson j;
        j["app_id"] = r.app_id;
        j["triggers"] = id_values(r.triggers);
        j["trigger_mode"] = r.trigger_mode == TriggerMode::All ? "all" : "any";
        if (r.condition) {
            ojson c;
            c["attribute"] = r.condition->node.attribute;
            c["op"] = std::string(to_string(r.condition->node.op));
            c["threshold"] = r.condition->node.threshold;
            c["report"] = r.condition->report.value;
            j["condition"] = c;
        }
        j["actions"] = id_values(r.actions);
        j["reaction_delay_mu"] = r.reaction_delay_mu;
        j["reaction_delay_sigma"] = r.reaction_delay_sigma;
        arr.push_back(j);
    }
    return arr.dump(2) + "\n";
}

std::vector<AppRule> rules_from_json(const std::string& text)
{
    const auto j = parse_text(text);
    if (!j.is_array()) throw ParseError("rules file must be a JSON list");
    return guarded([&] {
        std::vector<AppRule> out;
        for (const auto& item : j) {
            AppRule r;
            r.app_id = detail::required<std::string>(item, "app_id");
            r.triggers = ids_from(item, "triggers");
            const auto mode = item.value("trigger_mode", std::string("any"));
            if (mode == "all") r.trigger_mode = TriggerMode::All;
            else if (mode != "any") throw ParseError("trigger_mode must be \"any\" or \"all\"");
            if (item.contains("condition") && !item["condition"].is_null()) {
                const auto& c = item["condition"];
                RuleCondition cond;
                cond.node.attribute = detail::required<std::string>(c, "attribute");
                const auto op = comparator_from_string(detail::required<std::string>(c, "op"));
                if (!op) throw ParseError("condition op must be <, > or =");
                cond.node.op = *op;
                cond.node.threshold = c.value("threshold", 0.0);
                cond.report = EventId(detail::required<std::uint32_t>(c, "report"));
                r.condition = cond;
            }
            r.actions = ids_from(item, "actions");
            r.reaction_delay_mu = detail::required_number(item, "reaction_delay_mu");
            r.reaction_delay_sigma = item.value("reaction_delay_sigma", 0.05);
            out.push_back(std::move(r));
        }
        validate_rules(out);
        return out;
    });
}

std::vector<AppRule> load_rules(const std::filesystem::path& path)
{
    return rules_from_json(read_file(path));
}

void save_rules(const std::filesystem::path& path, std::span<const AppRule> rules)
{
    write_file(path, rules_to_json(rules));
}

namespace {

ojson anomaly_spec_json(const AnomalySpec& a)
{
    ojson j;
    j["type"] = std::string(to_string(a.kind));
    if (a.target_app) j["target_app"] = *a.target_app;
    j["count"] = a.count;
    return j;
}

AnomalySpec anomaly_spec_from(const json& j)
{
    AnomalySpec a;
    const auto type = detail::required<std::string>(j, "type");
    auto kind = anomaly_kind_from_string(type);
    if (!kind) throw ConfigError("unknown anomaly type '" + type + "'");
    a.kind = *kind;
    if (j.contains("target_app") && j["target_app"].is_string()) a.target_app = j["target_app"].get<std::string>();
    a.count = j.value("count", std::size_t{1});
    return a;
}

} // namespace

std::string sim_config_to_json(const SimConfig& c)
{
    ojson j;
    j["duration"] = c.duration;
    ojson rates = ojson::object();
    for (const auto& [e, rate] : c.trigger_rates) rates[std::to_string(e.value)] = rate;
    j["trigger_rates"] = rates;
    ojson scheduled = ojson::array();
    for (const auto& s : c.scheduled) scheduled.push_back(ojson{{"event_id", s.event.value}, {"ts", s.ts}});
    j["scheduled"] = scheduled;
    j["background_rate"] = c.background_rate;
    j["seed"] = c.seed;
    j["packet_loss"] = c.packet_loss;
    j["join_window"] = c.join_window;
    j["min_gap"] = c.min_gap;
    j["max_cascade_depth"] = c.max_cascade_depth;
    ojson anomalies = ojson::array();
    for (const auto& a : c.anomalies) anomalies.push_back(anomaly_spec_json(a));
    j["anomalies"] = anomalies;
    j["quiet_margin"] = c.quiet_margin;
    j["hub"] = c.hub;
    return j.dump(2) + "\n";
}

SimConfig sim_config_from_json(const std::string& text)
{
    const auto j = parse_text(text);
    if (!j.is_object()) throw ParseError("simulation config must be a JSON object");
    return guarded([&] {
        SimConfig c;
        c.duration = j.value("duration", c.duration);
        if (j.contains("trigger_rates")) {
            for (const auto& [key, rate] : j["trigger_rates"].items()) {
                std::size_t used = 0;
                unsigned long id = 0;
                try {
                    id = std::stoul(key, &used);
                } catch (const std::exception&) {
                    used = 0;
                }
                if (used != key.size() || id == 0) throw ParseError("trigger_rates key '" + key + "' is not an event id");
                c.trigger_rates[EventId(static_cast<std::uint32_t>(id))] = rate.get<double>();
            }
        }
        if (j.contains("scheduled"))
            for (const auto& s : j["scheduled"])
                c.scheduled.push_back({EventId(detail::required<std::uint32_t>(s, "event_id")), detail::required_number(s, "ts")});
        c.background_rate = j.value("background_rate", c.background_rate);
        c.seed = j.value("seed", c.seed);
        c.packet_loss = j.value("packet_loss", c.packet_loss);
        c.join_window = j.value("join_window", c.join_window);
        c.min_gap = j.value("min_gap", c.min_gap);
        c.max_cascade_depth = j.value("max_cascade_depth", c.max_cascade_depth);
        if (j.contains("anomalies"))
            for (const auto& a : j["anomalies"]) c.anomalies.push_back(anomaly_spec_from(a));
        if (j.contains("anomaly") && !j["anomaly"].is_null()) c.anomalies.push_back(anomaly_spec_from(j["anomaly"]));
        c.quiet_margin = j.value("quiet_margin", c.quiet_margin);
        c.hub = j.value("hub", c.hub);
        validate_config(c);
        return c;
    });
}

SimConfig load_sim_config(const std::filesystem::path& path)
{
    return sim_config_from_json(read_file(path));
}

void save_sim_config(const std::filesystem::path& path, const SimConfig& config)
{
    write_file(path, sim_config_to_json(config));
}

void save_truth(const std::filesystem::path& path, std::span<const TruthEntry> truth)
{
    auto out = detail::open_output(path);
    for (const auto& t : truth) {
        ojson j;
        j["event_id"] = t.event.value;
        j["t_start"] = t.t_start;
        j["t_end"] = t.t_end;
        j["ts"] = t.t_start;
        j["label"] = t.label;
        j["app"] = t.app;
        j["firing"] = t.firing;
        j["cause"] = t.cause;
        out << j.dump() << '\n';
    }
}

std::vector<TruthEntry> load_truth(const std::filesystem::path& path)
{
    auto in = detail::open_input(path);
    std::vector<TruthEntry> out;
    detail::for_each_jsonl(in, [&](const json& j, std::size_t line) {
        try {
            TruthEntry t;
            t.event = EventId(detail::required<std::uint32_t>(j, "event_id"));
            t.t_start = detail::required_number(j, "t_start");
            t.t_end = detail::required_number(j, "t_end");
            t.label = j.value("label", std::string{});
            t.app = j.value("app", std::string{});
            t.firing = j.value("firing", std::int64_t{-1});
            t.cause = j.value("cause", std::int64_t{-1});
            out.push_back(std::move(t));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line);
        }
    });
    return out;
}

void save_anomaly_truth(const std::filesystem::path& path, std::span<const AnomalyTruth> anomalies)
{
    auto out = detail::open_output(path);
    for (const auto& a : anomalies) {
        ojson j;
        j["type"] = std::string(to_string(a.kind));
        j["app_id"] = a.app_id;
        j["ts"] = a.ts;
        j["events"] = id_values(a.events);
        out << j.dump() << '\n';
    }
}

std::vector<AnomalyTruth> load_anomaly_truth(const std::filesystem::path& path)
{
    auto in = detail::open_input(path);
    std::vector<AnomalyTruth> out;
    detail::for_each_jsonl(in, [&](const json& j, std::size_t line) {
        AnomalyTruth a;
        const auto type = detail::required<std::string>(j, "type");
        auto kind = anomaly_kind_from_string(type);
        if (!kind) throw ParseError("unknown anomaly type '" + type + "'", line);
        a.kind = *kind;
        a.app_id = detail::required<std::string>(j, "app_id");
        a.ts = detail::required_number(j, "ts");
        a.events = ids_from(j, "events");
        out.push_back(std::move(a));
    });
    return out;
}

} // namespace wctx
