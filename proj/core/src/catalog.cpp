#include "wctx/catalog.hpp"

#include "wctx/error.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace wctx {

CapabilityVocabulary default_vocabulary()
{
    auto attr = [](std::string name, std::vector<std::string> values = {}) {
        return CapabilityAttribute{std::move(name), std::move(values)};
    };
    return CapabilityVocabulary({
        {"switch", {attr("switch", {"on", "off"})}, {"on", "off"}},
        {"switchLevel", {attr("level")}, {"setLevel"}},
        {"colorControl", {attr("color"), attr("hue"), attr("saturation")}, {"setColor", "setHue", "setSaturation"}},
        {"colorTemperature", {attr("colorTemperature")}, {"setColorTemperature"}},
        {"motionSensor", {attr("motion", {"active", "inactive"})}, {}},
        {"contactSensor", {attr("contact", {"open", "closed"})}, {}},
        {"accelerationSensor", {attr("acceleration", {"active", "inactive"})}, {}},
        {"waterSensor", {attr("water", {"wet", "dry"})}, {}},
        {"temperatureMeasurement", {attr("temperature")}, {}},
        {"illuminanceMeasurement", {attr("illuminance")}, {}},
        {"relativeHumidityMeasurement", {attr("humidity")}, {}},
        {"powerMeter", {attr("power")}, {}},
        {"energyMeter", {attr("energy")}, {}},
        {"smokeDetector", {attr("smoke", {"detected", "clear"})}, {}},
        {"presenceSensor", {attr("presence", {"present", "not_present"})}, {}},
        {"lock", {attr("lock", {"locked", "unlocked"})}, {"lock", "unlock"}},
        {"doorControl", {attr("door", {"open", "closed"})}, {"open", "close"}},
        {"windowShade", {attr("windowShade", {"open", "closed"})}, {"open", "close"}},
        {"window", {attr("window", {"open", "closed"})}, {"open", "close"}},
        {"valve", {attr("valve", {"open", "closed"})}, {"open", "close"}},
        {"thermostat", {attr("thermostatMode", {"heat", "cool", "off"})}, {"heat", "cool", "off"}},
        {"alarm", {attr("alarm", {"off", "siren"})}, {"siren", "off"}},
        {"imageCapture", {attr("image")}, {"take"}},
        {"timer", {attr("time")}, {}},
        {"location", {attr("mode", {"home", "away", "night"})}, {"setMode"}},
    });
}

ChannelMap default_channel_map()
{
    using T = ChannelType;
    return ChannelMap{{
        {"switch(light)", T::Capability, {"switch.on(light)", "switch.off(light)"}, {"switch.on", "switch.off"}},
        {"doorControl", T::Capability, {"door.open()", "door.close()"}, {"door.open", "door.closed"}},
        {"lock", T::Capability, {"lock.lock()", "lock.unlock()"}, {"lock.locked", "lock.unlocked"}},
        {"switch(heater)", T::Capability, {"switch.on(heater)", "switch.off(heater)"}, {"switch.on", "switch.off"}},
        {"switch(AC)", T::Capability, {"switch.on(ac)", "switch.off(ac)"}, {"switch.on", "switch.off"}},
        {"colorControl", T::Capability, {"colorControl.setColor()", "colorControl.setHue()"}, {"color.value", "hue.value"}},
        {"thermostat", T::Capability, {"thermostat.heat()", "thermostat.cool()", "thermostat.off()"},
         {"thermostatMode.heat", "thermostatMode.cool", "thermostatMode.off"}},
        {"leakage", T::Physical, {"switch.on(humidifier)", "valve.open()"}, {"water.wet"}},
        {"illuminance", T::Physical,
         {"switch.on(light)", "switch.off(light)", "windowShade.open()", "windowShade.close()"}, {"illuminance.value"}},
        {"energy", T::Physical, {"switch.on()", "switch.off()"}, {"power.value", "energy.value"}},
        {"contact", T::Physical, {"door.open()", "door.close()", "window.open()", "window.close()"},
         {"contact.open", "contact.closed"}},
        {"acceleration", T::Physical, {"door.open()", "door.close()", "window.open()", "window.close()"},
         {"acceleration.active"}},
        {"smoke", T::Physical, {"switch.on(toaster)", "switch.on(heater)"}, {"smoke.detected"}},
        {"temperature", T::Physical,
         {"switch.on(heater)", "switch.off(heater)", "switch.on(ac)", "switch.off(ac)", "thermostat.heat()",
          "thermostat.cool()", "window.open()"},
         {"temperature.value"}},
        {"motion", T::Physical, {"switch.on(fan)", "windowShade.open()"}, {"motion.active"}},
        {"humidity", T::Physical, {"switch.on(humidifier)", "switch.off(humidifier)"}, {"humidity.value"}},
        {"location.mode", T::System, {"location.setMode()"}, {"mode.home", "mode.away", "mode.night"}},
    }};
}

namespace {

// Size/direction shapes per (device model, command). Instance k of a model adds
// 2(k-1) bytes to every packet.
struct Shape {
    std::vector<std::uint32_t> sizes;
    std::vector<std::uint8_t> dirs;
    double duration;
};

const std::map<std::string, std::map<std::string, Shape>>& shapes()
{
    static const std::map<std::string, std::map<std::string, Shape>> table = {
        {"motion_sensor", {
            {"motion.active", {{42, 36, 28, 45, 36}, {0, 1, 1, 0, 1}, 0.35}},
            {"motion.inactive", {{43, 36, 28, 45, 36}, {0, 1, 1, 0, 1}, 0.35}},
            {"temperature.value", {{40, 31, 28}, {0, 1, 0}, 0.25}},
        }},
        {"outlet", {
            {"switch.on()", {{46, 30, 52, 38, 27, 44}, {1, 0, 0, 1, 1, 0}, 0.6}},
            {"switch.off()", {{47, 30, 52, 38, 27, 44}, {1, 0, 0, 1, 1, 0}, 0.6}},
            {"power.value", {{50, 38, 27, 41}, {0, 1, 1, 0}, 0.1477}},
        }},
        {"water_leak", {
            {"water.wet", {{44, 33, 29, 39}, {0, 1, 0, 1}, 0.4}},
            {"water.dry", {{45, 33, 29, 39}, {0, 1, 0, 1}, 0.4}},
            {"temperature.value", {{41, 33, 27}, {0, 1, 0}, 0.3}},
        }},
        {"hue", {
            {"switch.on()", {{55, 34, 48, 29, 61, 34, 27}, {1, 0, 1, 0, 0, 1, 1}, 0.9}},
            {"switch.off()", {{56, 34, 48, 29, 61, 34, 27}, {1, 0, 1, 0, 0, 1, 1}, 0.9}},
            {"colorControl.setColor()",
             {{58, 34, 49, 29, 62, 34, 58, 34, 49, 29, 62, 34, 44, 29, 27},
              {1, 0, 1, 0, 0, 1, 1, 0, 1, 0, 0, 1, 0, 1, 1}, 2.0656}},
            {"colorControl.setHue()", {{57, 34, 49, 29, 62, 34, 44, 29, 27}, {1, 0, 1, 0, 0, 1, 0, 1, 1}, 1.2}},
            {"switchLevel.setLevel()", {{54, 34, 47, 29, 60, 34, 44, 27}, {1, 0, 1, 0, 0, 1, 0, 1}, 1.0}},
            {"colorTemperature.setColorTemperature()",
             {{59, 34, 50, 29, 63, 34, 59, 34, 44, 29, 27}, {1, 0, 1, 0, 0, 1, 1, 0, 0, 1, 1}, 1.5}},
        }},
        {"multipurpose", {
            {"contact.open", {{48, 30, 35}, {0, 1, 1}, 0.2}},
            {"contact.closed", {{49, 30, 35}, {0, 1, 1}, 0.2}},
            {"acceleration.active", {{47, 31, 52, 31, 29}, {0, 1, 0, 1, 1}, 0.5}},
            {"temperature.value", {{39, 30, 26, 33}, {0, 1, 0, 1}, 0.45}},
        }},
        {"presence", {
            {"presence.present", {{37, 30, 41}, {0, 1, 0}, 0.3}},
            {"presence.not_present", {{38, 30, 41}, {0, 1, 0}, 0.3}},
        }},
        {"humidity_sensor", {
            {"humidity.value", {{36, 29, 31, 24}, {0, 1, 0, 1}, 0.3}},
        }},
        {"humidifier", {
            {"switch.on()", {{51, 33, 46, 30, 42}, {1, 0, 0, 1, 0}, 0.55}},
            {"switch.off()", {{52, 33, 46, 30, 42}, {1, 0, 0, 1, 0}, 0.55}},
        }},
        {"valve", {
            {"valve.close()", {{45, 32, 50, 28}, {1, 0, 0, 1}, 0.7}},
            {"valve.open()", {{46, 32, 50, 28}, {1, 0, 0, 1}, 0.7}},
        }},
    };
    return table;
}

// "motion_sensor_2" -> {"motion_sensor", 2}
std::pair<std::string, unsigned> model_of(const std::string& device)
{
    const auto pos = device.rfind('_');
    if (pos == std::string::npos) return {device, 1};
    const auto tail = device.substr(pos + 1);
    if (tail.empty() || !std::all_of(tail.begin(), tail.end(), [](char c) { return c >= '0' && c <= '9'; }))
        return {device, 1};
    return {device.substr(0, pos), static_cast<unsigned>(std::stoul(tail))};
}

EventTemplate shaped(EventId id, const std::string& device, const std::string& command)
{
    const auto [model, instance] = model_of(device);
    const auto m = shapes().find(model);
    if (m == shapes().end()) throw ConfigError("no packet shape for device model '" + model + "'");
    const auto s = m->second.find(command);
    if (s == m->second.end()) throw ConfigError("no packet shape for '" + model + "/" + command + "'");
    auto sizes = s->second.sizes;
    for (auto& size : sizes) size += 2 * (instance - 1);
    std::vector<std::uint32_t> layers(sizes.size());
    for (std::size_t j = 0; j < layers.size(); ++j) layers[j] = s->second.dirs[j] == 0 ? 2 : 3;
    return make_template(id, device + "/" + command, std::move(sizes), s->second.dirs, s->second.duration,
                         std::move(layers));
}

Scenario make_scenario(std::string name, const std::vector<std::pair<std::string, std::string>>& events)
{
    Scenario sc;
    sc.name = std::move(name);
    sc.vocabulary = std::make_shared<const CapabilityVocabulary>(default_vocabulary());
    sc.registry = EventRegistry(sc.vocabulary);
    for (const auto& [device, command] : events) {
        const auto id = sc.registry.register_event(device, command);
        sc.templates.push_back(shaped(id, device, command));
    }
    return sc;
}

EventId id_of(const Scenario& sc, const std::string& device, const std::string& command)
{
    auto id = sc.registry.find(device, command);
    if (!id) throw ConfigError("scenario has no event " + device + "/" + command);
    return *id;
}

AppRule rule(std::string app, std::vector<EventId> triggers, std::vector<EventId> actions, double mu, double sigma = 0.05)
{
    AppRule r;
    r.app_id = std::move(app);
    r.triggers = std::move(triggers);
    r.actions = std::move(actions);
    r.reaction_delay_mu = mu;
    r.reaction_delay_sigma = sigma;
    return r;
}

} // namespace

Scenario testbed_scenario()
{
    // Ids 1..10 are the testbed's canonical event numbers; the closing contact
    // gets its own id (11) since it is a different command from the opening one.
    auto sc = make_scenario("testbed", {
        {"motion_sensor_1", "motion.active"},
        {"hue_1", "switch.on()"},
        {"multipurpose_1", "temperature.value"},
        {"hue_1", "colorControl.setColor()"},
        {"outlet_1", "power.value"},
        {"outlet_1", "switch.off()"},
        {"water_leak_1", "water.wet"},
        {"multipurpose_1", "acceleration.active"},
        {"multipurpose_1", "contact.open"},
        {"hue_1", "colorControl.setHue()"},
        {"multipurpose_1", "contact.closed"},
        {"motion_sensor_1", "motion.inactive"},
        {"motion_sensor_1", "temperature.value"},
        {"outlet_1", "switch.on()"},
        {"water_leak_1", "water.dry"},
        {"water_leak_1", "temperature.value"},
        {"hue_1", "switch.off()"},
        {"hue_1", "switchLevel.setLevel()"},
        {"hue_1", "colorTemperature.setColorTemperature()"},
    });
    auto e = [](std::uint32_t v) { return EventId(v); };
    sc.rules = {
        rule("motion-light", {e(1)}, {e(2)}, 2.8),
        rule("temperature-color", {e(3)}, {e(4)}, 3.2),
        rule("power-cutoff", {e(5)}, {e(6)}, 2.6),
        rule("leak-cutoff", {e(7)}, {e(6)}, 3.6),
        rule("knock-light", {e(8)}, {e(2)}, 4.0),
        rule("door-light", {e(9)}, {e(2)}, 3.0),
        rule("door-close-outlet", {e(11)}, {e(6)}, 4.4),
        rule("idle-hue", {e(12)}, {e(10)}, 3.4),
    };

    // One simulated week. Types no app issues also occur on their own; background is
    // ~30% of packets.
    SimConfig& c = sc.config;
    c.duration = 7 * 24 * 3600.0;
    c.seed = 20240501;
    const double per_type = 50.0 / c.duration;
    std::set<EventId> issued;
    for (const auto& r : sc.rules) issued.insert(r.actions.begin(), r.actions.end());
    double data_rate = 0.0;
    for (const auto& t : sc.templates) {
        if (issued.count(t.event)) continue;
        c.trigger_rates[t.event] = per_type;
        data_rate += per_type * static_cast<double>(t.length());
    }
    for (const auto& r : sc.rules) {
        double fired = per_type * static_cast<double>(r.triggers.size());
        for (auto a : r.actions) data_rate += fired * static_cast<double>(sc.templates[a.value - 1].length());
    }
    c.background_rate = data_rate * 0.3 / 0.7;
    return sc;
}

Scenario home35_scenario()
{
    std::vector<std::pair<std::string, std::string>> sensors;
    for (int k = 1; k <= 4; ++k)
        for (const char* cmd : {"motion.active", "motion.inactive", "temperature.value"})
            sensors.emplace_back("motion_sensor_" + std::to_string(k), cmd);
    for (int k = 1; k <= 3; ++k)
        for (const char* cmd : {"contact.open", "contact.closed", "acceleration.active", "temperature.value"})
            sensors.emplace_back("multipurpose_" + std::to_string(k), cmd);
    for (int k = 1; k <= 3; ++k)
        for (const char* cmd : {"water.wet", "water.dry", "temperature.value"})
            sensors.emplace_back("water_leak_" + std::to_string(k), cmd);
    for (const char* cmd : {"presence.present", "presence.not_present"}) sensors.emplace_back("presence_1", cmd);

    std::vector<std::pair<std::string, std::string>> actuators;
    for (int k = 1; k <= 2; ++k)
        for (const char* cmd : {"switch.on()", "switch.off()", "colorControl.setColor()", "colorControl.setHue()",
                                "switchLevel.setLevel()"})
            actuators.emplace_back("hue_" + std::to_string(k), cmd);
    for (int k = 1; k <= 2; ++k)
        for (const char* cmd : {"switch.on()", "switch.off()"}) actuators.emplace_back("outlet_" + std::to_string(k), cmd);

    auto all = sensors;
    all.insert(all.end(), actuators.begin(), actuators.end());
    auto sc = make_scenario("home35", all);

    for (std::size_t i = 0; i < sensors.size(); ++i) {
        const auto trigger = id_of(sc, sensors[i].first, sensors[i].second);
        const auto& act = actuators[i % actuators.size()];
        const auto action = id_of(sc, act.first, act.second);
        char name[24];
        std::snprintf(name, sizeof name, "home_%02zu", i + 1);
        sc.rules.push_back(rule(name, {trigger}, {action}, 2.6 + static_cast<double>(i % 8) * 0.45));
    }

    // Sparse on purpose: about 25 firings per app spread over ten years, so that
    // unrelated occurrences essentially never fall inside one another's windows.
    SimConfig& c = sc.config;
    c.duration = 3.2e8;
    c.seed = 35035;
    for (const auto& r : sc.rules) c.trigger_rates[r.triggers.front()] = 25.0 / c.duration;
    return sc;
}

Scenario humidity_leak_scenario()
{
    auto sc = make_scenario("humidity-leak", {
        {"humidity_sensor_1", "humidity.value"},
        {"humidifier_1", "switch.on()"},
        {"water_leak_1", "water.wet"},
        {"valve_1", "valve.close()"},
        {"motion_sensor_1", "motion.active"},
        {"hue_1", "switch.on()"},
    });
    auto e = [](std::uint32_t v) { return EventId(v); };
    sc.rules = {
        rule("humidifier-control", {e(1)}, {e(2)}, 2.4, 0.02),
        rule("leak-guard", {e(3)}, {e(4)}, 2.6, 0.02),
        rule("hall-light", {e(5)}, {e(6)}, 2.9, 0.02),
        // The humidifier wets the floor sensor a few seconds after it starts.
        rule("physical:humidity", {e(2)}, {e(3)}, 2.5, 0.02),
    };
    SimConfig& c = sc.config;
    c.duration = 1.0e6;
    c.seed = 4242;
    c.trigger_rates[e(1)] = 40.0 / c.duration;
    c.trigger_rates[e(5)] = 40.0 / c.duration;
    return sc;
}

SimConfig training_config(std::span<const EventTemplate> templates, std::size_t samples, double spacing,
                          std::uint64_t seed)
{
    SimConfig c;
    c.seed = seed;
    const auto classes = templates.size();
    for (std::size_t s = 0; s < samples; ++s)
        for (std::size_t k = 0; k < classes; ++k)
            c.scheduled.push_back({templates[k].event, static_cast<double>(s * classes + k + 1) * spacing});
    c.duration = static_cast<double>(samples * classes + 2) * spacing;
    return c;
}

SimConfig training_config(const Scenario& scenario, std::size_t samples, double spacing, std::uint64_t seed)
{
    return training_config(scenario.templates, samples, spacing, seed);
}

std::vector<EventTransitionGraph> context_graphs(std::span<const AppRule> rules, const EventRegistry& registry)
{
    auto label = [&](EventId id) { return registry.contains(id) ? registry.entry(id).label() : std::string{}; };
    std::vector<EventTransitionGraph> out;
    for (const auto& r : rules) {
        if (r.is_physical()) continue;
        EventTransitionGraph g;
        g.graph_id = r.app_id;
        g.source = GraphSource::IotContext;
        for (auto t : r.triggers) g.nodes.push_back({t, label(t), std::nullopt});
        std::vector<EventId> frontier = r.triggers;
        if (r.condition) {
            g.nodes.push_back({r.condition->report, label(r.condition->report), r.condition->node});
            for (auto t : frontier) g.edges.emplace_back(t, r.condition->report);
            frontier = {r.condition->report};
        }
        for (auto a : r.actions) {
            if (!g.has_node(a)) g.nodes.push_back({a, label(a), std::nullopt});
            for (auto f : frontier)
                if (f != a && !g.has_edge(f, a)) g.edges.emplace_back(f, a);
            frontier = {a};
        }
        validate_graph(g);
        out.push_back(std::move(g));
    }
    return out;
}

std::vector<LabelRecord> truth_labels(std::span<const TruthEntry> truth)
{
    std::vector<LabelRecord> out;
    out.reserve(truth.size());
    for (const auto& t : truth) out.push_back({t.event, t.t_start, t.t_end, t.label.empty() ? std::nullopt : std::optional(t.label)});
    return out;
}

LabelMap registry_labels(const EventRegistry& registry)
{
    LabelMap out;
    for (const auto& e : registry.entries()) out[e.id] = e.label();
    return out;
}

} // namespace wctx
