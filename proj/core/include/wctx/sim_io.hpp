#pragma once

#include "wctx/sim.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace wctx {

// Templates file: JSON list of
//   {"event_id", "label", "sizes", "directions", "base_intervals", "layer_tags", "jitter_sigma"}
std::string templates_to_json(std::span<const EventTemplate> templates);
std::vector<EventTemplate> templates_from_json(const std::string& text);
std::vector<EventTemplate> load_templates(const std::filesystem::path& path);
void save_templates(const std::filesystem::path& path, std::span<const EventTemplate> templates);

// Rules file: JSON list of
//   {"app_id", "triggers", "trigger_mode": "any"|"all", "condition"?: {"attribute", "op", "threshold",
//    "report"}, "actions", "reaction_delay_mu", "reaction_delay_sigma"}
std::string rules_to_json(std::span<const AppRule> rules);
std::vector<AppRule> rules_from_json(const std::string& text);
std::vector<AppRule> load_rules(const std::filesystem::path& path);
void save_rules(const std::filesystem::path& path, std::span<const AppRule> rules);

// Config file: {"duration", "trigger_rates": {"<id>": rate}, "scheduled": [{"event_id", "ts"}],
//   "background_rate", "seed", "packet_loss", "join_window", "min_gap", "max_cascade_depth",
//   "anomalies": [{"type", "target_app"?, "count"}], "hub"}. A single "anomaly" object is also accepted.
// Absent keys keep their defaults.
std::string sim_config_to_json(const SimConfig& config);
SimConfig sim_config_from_json(const std::string& text);
SimConfig load_sim_config(const std::filesystem::path& path);
void save_sim_config(const std::filesystem::path& path, const SimConfig& config);

// Truth log, a superset of the label file schema:
//   {"event_id", "t_start", "t_end", "ts", "label", "app", "firing", "cause"}
void save_truth(const std::filesystem::path& path, std::span<const TruthEntry> truth);
std::vector<TruthEntry> load_truth(const std::filesystem::path& path);

// {"type", "app_id", "ts", "events"} per line.
void save_anomaly_truth(const std::filesystem::path& path, std::span<const AnomalyTruth> anomalies);
std::vector<AnomalyTruth> load_anomaly_truth(const std::filesystem::path& path);

} // namespace wctx
