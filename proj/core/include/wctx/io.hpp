#pragma once

#include "wctx/channels.hpp"
#include "wctx/graph.hpp"
#include "wctx/types.hpp"
#include "wctx/vocabulary.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wctx {

using LabelMap = std::map<EventId, std::string>;

// One labelled event occurrence: {"event_id": int, "t_start": float, "t_end": float}.
// Extra fields (the simulator's truth log adds several) are ignored on read.
struct LabelRecord {
    EventId event;
    double t_start = 0.0;
    double t_end = 0.0;
    std::optional<std::string> label;

    bool operator==(const LabelRecord&) const = default;
};

std::vector<LabelRecord> load_labels(const std::filesystem::path& path);
void save_labels(const std::filesystem::path& path, std::span<const LabelRecord> labels);

// Event stream JSONL: {"event_id": int, "ts": float, "confidence": float[, "label": str]}.
struct EventFile {
    EventStream events;
    LabelMap labels;
};

EventFile load_events(const std::filesystem::path& path);
void save_events(const std::filesystem::path& path, const EventStream& events, const LabelMap& labels = {});

// Graph JSON. A file holds one graph object or an array of them.
std::string graph_to_json(const EventTransitionGraph& g, int indent = -1);
EventTransitionGraph graph_from_json(const std::string& text);
std::vector<EventTransitionGraph> load_graphs(const std::filesystem::path& path);
void save_graph(const std::filesystem::path& path, const EventTransitionGraph& g);
void save_graphs(const std::filesystem::path& path, std::span<const EventTransitionGraph> graphs);
// Every *.json file in the directory, sorted by file name; each graph is validated.
std::vector<EventTransitionGraph> load_graph_dir(const std::filesystem::path& dir);

std::string channel_map_to_json(const ChannelMap& map);
ChannelMap channel_map_from_json(const std::string& text);
ChannelMap load_channel_map(const std::filesystem::path& path);
void save_channel_map(const std::filesystem::path& path, const ChannelMap& map);

// Capability vocabulary: [{"name": str, "attributes": [{"name": str, "values": [str]}], "commands": [str]}]
std::string vocabulary_to_json(const CapabilityVocabulary& vocabulary);
CapabilityVocabulary vocabulary_from_json(const std::string& text);
CapabilityVocabulary load_vocabulary(const std::filesystem::path& path);
void save_vocabulary(const std::filesystem::path& path, const CapabilityVocabulary& vocabulary);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

} // namespace wctx
