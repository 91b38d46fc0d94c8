#pragma once

#include <wctx/checker.hpp>
#include <wctx/detector.hpp>
#include <wctx/forest.hpp>
#include <wctx/miner.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace wctx::tools {

namespace fs = std::filesystem;

// Reads WCTX_LOG_LEVEL unless `level` is given. Logs go to stderr.
void init_logging(const std::optional<std::string>& level = std::nullopt);

struct TrainingSource {
    std::optional<fs::path> trace;   // recorded trace + labels ...
    std::optional<fs::path> labels;
    std::size_t samples = 0;         // ... or this many simulated samples per template
    double spacing = 6.0;
    std::uint64_t seed = 7;
};

// Every path is absolute after loading (relative entries resolve against the config file).
struct PipelineConfig {
    std::optional<fs::path> templates;
    std::optional<fs::path> rules;
    std::optional<fs::path> sim_config;  // simulate stage runs iff set
    std::optional<fs::path> trace;       // used when not simulating
    std::optional<fs::path> model;       // loaded when given, trained otherwise
    TrainingSource training;
    ForestParams forest;
    DetectorParams detector;
    MinerParams miner;
    CheckerParams checker;
    std::string check_mode = "stream";   // "stream" or "graphs"
    std::optional<fs::path> context_dir;
    std::optional<fs::path> channels;
    std::optional<fs::path> vocabulary;  // built-in vocabulary when absent
    fs::path out_dir = "out";
    std::optional<std::uint64_t> seed;   // overrides the simulation seed
};

PipelineConfig pipeline_config_from_json(const std::string& text, const fs::path& base_dir);
PipelineConfig load_pipeline_config(const fs::path& path);

// Throws ConfigError naming the first missing input.
void validate_config_paths(const PipelineConfig& config);

struct RunSummary {
    std::size_t packets = 0;
    std::size_t events = 0;
    std::size_t wireless_graphs = 0;
    std::size_t reports = 0;
    std::size_t chains = 0;
    std::vector<fs::path> artifacts;
};

// simulate? -> train? -> detect -> mine -> check -> vuln?. Artifacts already written
// stay on disk if a later stage throws.
RunSummary run_pipeline(const PipelineConfig& config);

// Filter, window and fit. Model labels come from the label records.
Classifier train_model(const std::vector<PacketRecord>& trace, std::span<const LabelRecord> labels,
                       const ForestParams& params, std::size_t packets_per_window = kDefaultPacketsPerWindow,
                       double window_seconds = kDefaultWindowSeconds);

// Writes a bundled scenario as data files plus a pipeline.json that runs it.
// Known names: testbed, home35, humidity-leak.
std::vector<fs::path> scaffold(const std::string& scenario, const fs::path& out_dir, std::size_t training_samples = 500);

struct GraphCheck {
    fs::path file;
    std::size_t graphs = 0;
    std::string error;  // empty when valid
};

// Schema, structure and (when a vocabulary is given) label resolution for graph files.
std::vector<GraphCheck> validate_graph_files(const std::vector<fs::path>& paths,
                                             const CapabilityVocabulary* vocabulary);

struct ExtractRequest {
    fs::path descriptions;
    fs::path capabilities;
    fs::path embeddings;
    fs::path out_dir;
    std::optional<std::string> extractor;  // command; WCTX_EXTRACTOR when absent
};

// Runs the external extractor if one is configured, then validates whatever graphs
// are in out_dir. Throws ConfigError when there is neither an extractor nor output.
std::vector<GraphCheck> extract_context(const ExtractRequest& request);

} // namespace wctx::tools
