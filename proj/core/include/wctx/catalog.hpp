#pragma once

#include "wctx/channels.hpp"
#include "wctx/graph.hpp"
#include "wctx/io.hpp"
#include "wctx/registry.hpp"
#include "wctx/sim.hpp"
#include "wctx/vocabulary.hpp"

#include <memory>
#include <string>
#include <vector>

namespace wctx {

// SmartThings-style capability list plus the custom window/timer/location entries
// the bundled apps need.
CapabilityVocabulary default_vocabulary();

// Seven capability channels, nine physical channels and location.mode.
ChannelMap default_channel_map();

struct Scenario {
    std::string name;
    std::shared_ptr<const CapabilityVocabulary> vocabulary;
    EventRegistry registry;
    std::vector<EventTemplate> templates;
    std::vector<AppRule> rules;
    SimConfig config;  // held-out evaluation stream
};

// Five devices, 19 event types, the eight single-trigger apps of the testbed.
Scenario testbed_scenario();

// 35 apps over eleven sensors and four actuators. Every rule has its own trigger.
Scenario home35_scenario();

// Humidifier app and leak-guard app coupled by the room's humidity.
Scenario humidity_leak_scenario();

// Isolated occurrences of every template, `samples` each, `spacing` seconds apart.
// Simulate with an empty rule set.
SimConfig training_config(std::span<const EventTemplate> templates, std::size_t samples, double spacing = 6.0,
                          std::uint64_t seed = 7);
SimConfig training_config(const Scenario& scenario, std::size_t samples, double spacing = 6.0,
                          std::uint64_t seed = 7);

// One IoT-context graph per non-physical rule: triggers -> condition -> actions.
std::vector<EventTransitionGraph> context_graphs(std::span<const AppRule> rules, const EventRegistry& registry);

std::vector<LabelRecord> truth_labels(std::span<const TruthEntry> truth);
LabelMap registry_labels(const EventRegistry& registry);

} // namespace wctx
