#pragma once

#include "wctx/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wctx {

inline constexpr std::size_t kDefaultPacketsPerWindow = 15;
inline constexpr double kDefaultWindowSeconds = 2.1;

// Packet-level signature of one event type.
struct EventTemplate {
    EventId event;
    std::string label;  // "device/command"; the device part becomes the packet src/dst
    std::vector<std::uint32_t> sizes;
    std::vector<std::uint8_t> directions;
    std::vector<double> base_intervals;  // mean gap before each packet, [0] == 0
    std::vector<std::uint32_t> layer_tags;
    double jitter_sigma = 0.005;

    std::size_t length() const noexcept { return sizes.size(); }
    double mean_duration() const;
    std::string device() const;
};

// Builds a template whose gap means split `duration` evenly over the packets.
EventTemplate make_template(EventId event, std::string label, std::vector<std::uint32_t> sizes,
                            std::vector<std::uint8_t> directions, double duration,
                            std::vector<std::uint32_t> layers = {}, double jitter_sigma = 0.005);

enum class TriggerMode : std::uint8_t { Any, All };

struct RuleCondition {
    ConditionNode node;
    EventId report;  // attribute-report event that must precede the trigger
};

// If trigger(s) [and condition] then actions. App ids starting with "physical:" model
// environment couplings (heater warms the room) rather than installed apps.
struct AppRule {
    std::string app_id;
    std::vector<EventId> triggers;
    TriggerMode trigger_mode = TriggerMode::Any;
    std::optional<RuleCondition> condition;
    std::vector<EventId> actions;
    double reaction_delay_mu = 1.0;
    double reaction_delay_sigma = 0.05;

    bool is_physical() const { return app_id.rfind("physical:", 0) == 0; }
};

enum class AnomalyKind : std::uint8_t { Spoofing, Misbehavior, Overprivilege };

std::string_view to_string(AnomalyKind k);
std::optional<AnomalyKind> anomaly_kind_from_string(std::string_view s);

struct AnomalySpec {
    AnomalyKind kind = AnomalyKind::Spoofing;
    std::optional<std::string> target_app;  // spread over all app rules when absent
    std::size_t count = 1;
};

struct ScheduledEvent {
    EventId event;
    double ts = 0.0;
};

struct SimConfig {
    double duration = 3600.0;
    std::map<EventId, double> trigger_rates;  // spontaneous Poisson rates, events/s
    std::vector<ScheduledEvent> scheduled;
    double background_rate = 0.0;  // beacon/ack/link packets per second
    std::uint64_t seed = 1;
    double packet_loss = 0.0;
    double join_window = kDefaultWindowSeconds;  // AND triggers and conditions
    double min_gap = 0.0005;
    std::size_t max_cascade_depth = 16;
    std::vector<AnomalySpec> anomalies;
    double quiet_margin = 2.0 * kDefaultWindowSeconds;  // spoofed events keep this clear of real ones
    std::string hub = "hub";
};

// One ground-truth event occurrence. `cause` indexes the truth entry that triggered it.
struct TruthEntry {
    EventId event;
    double t_start = 0.0;
    double t_end = 0.0;
    std::string label;
    std::string app;         // rule that produced it; empty for spontaneous events
    std::int64_t firing = -1;
    std::int64_t cause = -1;

    bool operator==(const TruthEntry&) const = default;
};

struct AnomalyTruth {
    AnomalyKind kind = AnomalyKind::Spoofing;
    std::string app_id;
    double ts = 0.0;  // spoofed action start, or start of the affected trigger
    std::vector<EventId> events;  // spoofed, suppressed or surplus events

    bool operator==(const AnomalyTruth&) const = default;
};

struct SimResult {
    std::vector<PacketRecord> trace;
    std::vector<TruthEntry> truth;  // ordered by t_start
    std::vector<std::int64_t> origin;  // per packet: truth index, -1 for background
    std::vector<AnomalyTruth> anomaly_truth;

    std::size_t data_packet_count() const;
};

// Throws ConfigError for missing templates, ValidationError for broken invariants.
void validate_templates(std::span<const EventTemplate> templates,
                        std::size_t max_packets = kDefaultPacketsPerWindow,
                        double max_duration = kDefaultWindowSeconds);
void validate_rules(std::span<const AppRule> rules);
void validate_config(const SimConfig& config);

SimResult simulate(std::span<const EventTemplate> templates, std::span<const AppRule> rules,
                   const SimConfig& config);

// Mutates `result` in place. Throws ConfigError when the target app is unknown or
// the trace has too few eligible firings/quiet slots for the requested count.
void inject_anomaly(SimResult& result, std::span<const EventTemplate> templates,
                    std::span<const AppRule> rules, const AnomalySpec& spec, std::uint64_t seed,
                    double duration, double quiet_margin = 2.0 * kDefaultWindowSeconds);

} // namespace wctx
