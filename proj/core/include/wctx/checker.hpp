#pragma once

#include "wctx/graph.hpp"
#include "wctx/miner.hpp"
#include "wctx/types.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wctx {

enum class AnomalyType : std::uint8_t { EventSpoofing, MisbehaviorOrDeviceFailure, Overprivilege, UnknownMismatch };

std::string_view to_string(AnomalyType t);
std::optional<AnomalyType> anomaly_type_from_string(std::string_view s);

struct AnomalyReport {
    AnomalyType kind = AnomalyType::UnknownMismatch;
    EventTransitionGraph wireless_graph;
    std::optional<std::string> matched_context;
    std::vector<EventId> missing_events;
    std::vector<EventId> extra_events;
    std::optional<double> ts;  // first observed event; empty for reports on aggregate graphs

    bool operator==(const AnomalyReport&) const = default;
};

// Identical node set and identical edges. A context graph also matches with its
// condition nodes contracted, and a multi-root context graph matches any path that is
// one of its topological orders. Throws ConsistencyError when a shared id carries two
// different labels.
std::optional<std::string> match_graph(const EventTransitionGraph& observed,
                                       std::span<const EventTransitionGraph> context);

// Classifies an observed event order against the context, in rule order:
// spoofing, misbehavior, overprivilege, unknown.
AnomalyReport classify_anomaly(const EventTransitionGraph& observed, std::span<const EventTransitionGraph> context);

// One report per unmatched wireless graph.
std::vector<AnomalyReport> check_graphs(std::span<const EventTransitionGraph> wireless,
                                        std::span<const EventTransitionGraph> context);

struct CheckerParams {
    double join_window = 2.1;    // AND-trigger siblings
    double extra_horizon = 10.0; // surplus events after a complete occurrence
    MinerParams miner;           // edge timing: mu + 3 tau for dependent edges, else max_lag
};

// Groups the stream into occurrences of context graphs and reports each one that
// does not match. Events outside every context graph never start an occurrence.
std::vector<AnomalyReport> check_stream(const EventStream& events, std::span<const EventTransitionGraph> context,
                                        const CheckerParams& params = {}, const LabelMap& labels = {});

// JSON Lines, one report per line:
//   {"kind", "wireless_graph", "matched_context", "missing_events", "extra_events", "ts"}
std::string report_line(const AnomalyReport& report);
void save_reports(const std::filesystem::path& path, std::span<const AnomalyReport> reports);
std::vector<AnomalyReport> load_reports(const std::filesystem::path& path);

} // namespace wctx
