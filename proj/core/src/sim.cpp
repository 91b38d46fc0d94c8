#include "wctx/sim.hpp"

#include "wctx/error.hpp"
#include "wctx/registry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <unordered_map>

namespace wctx {

std::string_view to_string(AnomalyKind k)
{
    switch (k) {
    case AnomalyKind::Spoofing: return "spoofing";
    case AnomalyKind::Misbehavior: return "misbehavior";
    case AnomalyKind::Overprivilege: return "overprivilege";
    }
    return "spoofing";
}

std::optional<AnomalyKind> anomaly_kind_from_string(std::string_view s)
{
    if (s == "spoofing") return AnomalyKind::Spoofing;
    if (s == "misbehavior") return AnomalyKind::Misbehavior;
    if (s == "overprivilege") return AnomalyKind::Overprivilege;
    return std::nullopt;
}

double EventTemplate::mean_duration() const
{
    return std::accumulate(base_intervals.begin(), base_intervals.end(), 0.0);
}

std::string EventTemplate::device() const
{
    if (auto parts = split_label(label)) return parts->first;
    return "dev_" + std::to_string(event.value);
}

EventTemplate make_template(EventId event, std::string label, std::vector<std::uint32_t> sizes,
                            std::vector<std::uint8_t> directions, double duration,
                            std::vector<std::uint32_t> layers, double jitter_sigma)
{
    EventTemplate t;
    t.event = event;
    t.label = std::move(label);
    const std::size_t n = sizes.size();
    t.sizes = std::move(sizes);
    t.directions = std::move(directions);
    t.base_intervals.assign(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) t.base_intervals[j] = duration / static_cast<double>(n - 1);
    t.layer_tags = layers.empty() ? std::vector<std::uint32_t>(n, 0) : std::move(layers);
    t.jitter_sigma = jitter_sigma;
    return t;
}

std::size_t SimResult::data_packet_count() const
{
    return static_cast<std::size_t>(std::count_if(trace.begin(), trace.end(),
                                                  [](const PacketRecord& p) { return p.kind == PacketKind::Data; }));
}

void validate_templates(std::span<const EventTemplate> templates, std::size_t max_packets, double max_duration)
{
    std::set<EventId> seen;
    for (const auto& t : templates) {
        const std::string who = "template " + std::to_string(t.event.value);
        if (!t.event.valid()) throw ValidationError("template with invalid event id");
        if (!seen.insert(t.event).second) throw ValidationError("duplicate " + who);
        const auto n = t.sizes.size();
        if (n < 1 || n > max_packets) throw ValidationError(who + ": length must be in [1, " + std::to_string(max_packets) + "]");
        if (t.directions.size() != n || t.base_intervals.size() != n || t.layer_tags.size() != n)
            throw ValidationError(who + ": sizes, directions, base_intervals and layer_tags differ in length");
        if (t.base_intervals[0] != 0.0) throw ValidationError(who + ": base_intervals[0] must be 0");
        for (std::size_t j = 0; j < n; ++j) {
            if (t.sizes[j] < 1) throw ValidationError(who + ": packet size must be >= 1");
            if (t.directions[j] > 1) throw ValidationError(who + ": direction must be 0 or 1");
            if (t.base_intervals[j] < 0.0) throw ValidationError(who + ": negative interval");
        }
        if (t.mean_duration() > max_duration + 1e-9) throw ValidationError(who + ": mean duration exceeds the window span");
        if (t.jitter_sigma < 0.0) throw ValidationError(who + ": negative jitter");
    }
}

void validate_rules(std::span<const AppRule> rules)
{
    std::set<std::string> ids;
    for (const auto& r : rules) {
        if (r.app_id.empty()) throw ValidationError("rule with empty app_id");
        if (!ids.insert(r.app_id).second) throw ValidationError("duplicate rule '" + r.app_id + "'");
        if (r.triggers.empty() || r.actions.empty())
            throw ValidationError("rule '" + r.app_id + "' needs triggers and actions");
        if (r.reaction_delay_mu < 0.0 || r.reaction_delay_sigma < 0.0)
            throw ValidationError("rule '" + r.app_id + "' has a negative reaction delay");
    }
}

void validate_config(const SimConfig& c)
{
    if (!(c.duration > 0.0)) throw ValidationError("duration must be > 0");
    if (c.background_rate < 0.0) throw ValidationError("background_rate must be >= 0");
    for (const auto& [e, rate] : c.trigger_rates)
        if (rate < 0.0) throw ValidationError("trigger rate for event " + std::to_string(e.value) + " is negative");
    if (c.packet_loss < 0.0 || c.packet_loss >= 1.0) throw ValidationError("packet_loss must be in [0, 1)");
    if (!(c.join_window > 0.0)) throw ValidationError("join_window must be > 0");
    if (c.quiet_margin < 0.0) throw ValidationError("quiet_margin must be >= 0");
    for (const auto& s : c.scheduled)
        if (s.ts < 0.0) throw ValidationError("scheduled event at negative time");
}

namespace {

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index)
{
    return std::mt19937_64(splitmix(seed ^ splitmix(index + 1)));
}

double gauss(std::mt19937_64& rng, double mu, double sigma)
{
    if (sigma <= 0.0) return mu;
    return std::normal_distribution<double>(mu, sigma)(rng);
}

using TemplateIndex = std::unordered_map<EventId, const EventTemplate*>;

TemplateIndex index_templates(std::span<const EventTemplate> templates)
{
    TemplateIndex idx;
    for (const auto& t : templates) idx.emplace(t.event, &t);
    return idx;
}

const EventTemplate& lookup(const TemplateIndex& idx, EventId e)
{
    auto it = idx.find(e);
    if (it == idx.end()) throw ConfigError("no template for event " + std::to_string(e.value));
    return *it->second;
}

// Appends one occurrence (truth entry and packets, unsorted). Returns the truth index.
std::size_t append_event(SimResult& r, const EventTemplate& t, double t0, const std::string& app,
                         std::int64_t firing, std::int64_t cause, std::mt19937_64& jitter,
                         const std::string& hub, double min_gap)
{
    const auto index = r.truth.size();
    const auto device = t.device();
    double ts = t0;
    for (std::size_t j = 0; j < t.length(); ++j) {
        if (j > 0) ts += std::max(min_gap, gauss(jitter, t.base_intervals[j], t.jitter_sigma));
        PacketRecord p;
        p.ts = ts;
        p.size = t.sizes[j];
        p.direction = t.directions[j] ? Direction::HubToDevice : Direction::DeviceToHub;
        p.layer = t.layer_tags[j];
        p.kind = PacketKind::Data;
        p.src = p.direction == Direction::DeviceToHub ? device : hub;
        p.dst = p.direction == Direction::DeviceToHub ? hub : device;
        r.trace.push_back(std::move(p));
        r.origin.push_back(static_cast<std::int64_t>(index));
    }
    r.truth.push_back(TruthEntry{t.event, t0, ts, t.label, app, firing, cause});
    return index;
}

// Sorts truth by start time and packets by timestamp, keeping indices consistent.
void finalize(SimResult& r)
{
    std::vector<std::size_t> order(r.truth.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return r.truth[a].t_start < r.truth[b].t_start; });
    std::vector<std::int64_t> remap(r.truth.size());
    std::vector<TruthEntry> truth;
    truth.reserve(r.truth.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        remap[order[k]] = static_cast<std::int64_t>(k);
        truth.push_back(std::move(r.truth[order[k]]));
    }
    for (auto& t : truth)
        if (t.cause >= 0) t.cause = remap[static_cast<std::size_t>(t.cause)];
    r.truth = std::move(truth);

    std::vector<std::size_t> porder(r.trace.size());
    std::iota(porder.begin(), porder.end(), 0);
    std::stable_sort(porder.begin(), porder.end(),
                     [&](std::size_t a, std::size_t b) { return r.trace[a].ts < r.trace[b].ts; });
    std::vector<PacketRecord> trace;
    std::vector<std::int64_t> origin;
    trace.reserve(porder.size());
    origin.reserve(porder.size());
    for (auto k : porder) {
        trace.push_back(std::move(r.trace[k]));
        const auto o = r.origin[k];
        origin.push_back(o >= 0 ? remap[static_cast<std::size_t>(o)] : -1);
    }
    r.trace = std::move(trace);
    r.origin = std::move(origin);
}

void remove_entries(SimResult& r, const std::set<std::size_t>& doomed)
{
    std::vector<std::int64_t> remap(r.truth.size(), -1);
    std::vector<TruthEntry> truth;
    for (std::size_t k = 0; k < r.truth.size(); ++k) {
        if (doomed.count(k)) continue;
        remap[k] = static_cast<std::int64_t>(truth.size());
        truth.push_back(std::move(r.truth[k]));
    }
    for (auto& t : truth)
        if (t.cause >= 0) t.cause = remap[static_cast<std::size_t>(t.cause)];
    r.truth = std::move(truth);

    std::vector<PacketRecord> trace;
    std::vector<std::int64_t> origin;
    for (std::size_t k = 0; k < r.trace.size(); ++k) {
        const auto o = r.origin[k];
        if (o >= 0 && doomed.count(static_cast<std::size_t>(o))) continue;
        trace.push_back(std::move(r.trace[k]));
        origin.push_back(o >= 0 ? remap[static_cast<std::size_t>(o)] : -1);
    }
    r.trace = std::move(trace);
    r.origin = std::move(origin);
}

struct Pending {
    double t = 0.0;
    std::uint64_t seq = 0;
    EventId event;
    std::int64_t rule = -1;
    std::size_t action = 0;
    std::int64_t firing = -1;
    std::int64_t cause = -1;
    std::size_t depth = 0;

    bool operator>(const Pending& o) const { return t != o.t ? t > o.t : seq > o.seq; }
};

void add_background(SimResult& r, const SimConfig& c, std::mt19937_64& rng)
{
    if (c.background_rate <= 0.0) return;
    std::exponential_distribution<double> gap(c.background_rate);
    std::uniform_int_distribution<int> pick(0, 2);
    std::uniform_int_distribution<int> coin(0, 1);
    for (double t = gap(rng); t < c.duration; t += gap(rng)) {
        PacketRecord p;
        p.ts = t;
        switch (pick(rng)) {
        case 0: p.kind = PacketKind::Beacon; p.size = 24 + static_cast<std::uint32_t>(pick(rng)); break;
        case 1: p.kind = PacketKind::Ack; p.size = 5; break;
        default: p.kind = PacketKind::LinkMaint; p.size = 40 + static_cast<std::uint32_t>(pick(rng)) * 3; break;
        }
        p.direction = coin(rng) ? Direction::HubToDevice : Direction::DeviceToHub;
        p.layer = p.kind == PacketKind::Ack ? 0 : 1;
        p.src = p.direction == Direction::DeviceToHub ? "router" : c.hub;
        p.dst = p.direction == Direction::DeviceToHub ? c.hub : "router";
        r.trace.push_back(std::move(p));
        r.origin.push_back(-1);
    }
}

void apply_loss(SimResult& r, double loss, std::mt19937_64& rng)
{
    if (loss <= 0.0) return;
    std::bernoulli_distribution drop(loss);
    std::vector<PacketRecord> trace;
    std::vector<std::int64_t> origin;
    for (std::size_t k = 0; k < r.trace.size(); ++k) {
        if (drop(rng)) continue;
        trace.push_back(std::move(r.trace[k]));
        origin.push_back(r.origin[k]);
    }
    r.trace = std::move(trace);
    r.origin = std::move(origin);
}

} // namespace

SimResult simulate(std::span<const EventTemplate> templates, std::span<const AppRule> rules, const SimConfig& config)
{
    validate_templates(templates);
    validate_rules(rules);
    validate_config(config);
    const auto idx = index_templates(templates);
    for (const auto& r : rules) {
        for (auto e : r.triggers) lookup(idx, e);
        for (auto e : r.actions) lookup(idx, e);
        if (r.condition) lookup(idx, r.condition->report);
    }
    for (const auto& [e, rate] : config.trigger_rates)
        if (rate > 0.0) lookup(idx, e);
    for (const auto& s : config.scheduled) lookup(idx, s.event);

    auto trig_rng = stream(config.seed, 0);
    auto jitter_rng = stream(config.seed, 1);
    auto delay_rng = stream(config.seed, 2);
    auto bg_rng = stream(config.seed, 3);
    auto loss_rng = stream(config.seed, 4);

    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue;
    std::uint64_t seq = 0;
    for (const auto& [e, rate] : config.trigger_rates) {
        if (rate <= 0.0) continue;
        std::exponential_distribution<double> gap(rate);
        for (double t = gap(trig_rng); t < config.duration; t += gap(trig_rng)) {
            Pending p;
            p.t = t;
            p.seq = seq++;
            p.event = e;
            queue.push(p);
        }
    }
    for (const auto& s : config.scheduled) {
        Pending p;
        p.t = s.ts;
        p.seq = seq++;
        p.event = s.event;
        queue.push(p);
    }

    std::unordered_map<EventId, std::vector<std::size_t>> rules_by_trigger;
    for (std::size_t k = 0; k < rules.size(); ++k)
        for (auto e : rules[k].triggers) rules_by_trigger[e].push_back(k);
    std::unordered_map<EventId, double> last_start;
    std::vector<std::int64_t> firings(rules.size(), 0);

    auto delay = [&](const AppRule& r) {
        return std::max(0.0, gauss(delay_rng, r.reaction_delay_mu, r.reaction_delay_sigma));
    };
    auto recent = [&](EventId e, double t) {
        auto it = last_start.find(e);
        return it != last_start.end() && t - it->second <= config.join_window;
    };

    SimResult result;
    while (!queue.empty()) {
        const Pending p = queue.top();
        queue.pop();
        const auto& tpl = lookup(idx, p.event);
        const std::string app = p.rule >= 0 ? rules[static_cast<std::size_t>(p.rule)].app_id : std::string{};
        const auto at = append_event(result, tpl, p.t, app, p.firing, p.cause, jitter_rng, config.hub, config.min_gap);
        const double t_end = result.truth[at].t_end;
        last_start[p.event] = p.t;

        if (p.rule >= 0) {
            const auto& rule = rules[static_cast<std::size_t>(p.rule)];
            if (p.action + 1 < rule.actions.size()) {
                Pending next = p;
                next.t = t_end + delay(rule);
                next.seq = seq++;
                next.action = p.action + 1;
                next.event = rule.actions[next.action];
                next.cause = static_cast<std::int64_t>(at);
                queue.push(next);
            }
        }
        if (p.depth >= config.max_cascade_depth) continue;
        auto it = rules_by_trigger.find(p.event);
        if (it == rules_by_trigger.end()) continue;
        for (auto k : it->second) {
            const auto& rule = rules[k];
            if (rule.trigger_mode == TriggerMode::All) {
                const bool joined = std::all_of(rule.triggers.begin(), rule.triggers.end(),
                                                [&](EventId e) { return recent(e, p.t); });
                if (!joined) continue;
            }
            if (rule.condition && !recent(rule.condition->report, p.t)) continue;
            Pending f;
            f.t = t_end + delay(rule);
            f.seq = seq++;
            f.event = rule.actions.front();
            f.rule = static_cast<std::int64_t>(k);
            f.action = 0;
            f.firing = firings[k]++;
            f.cause = static_cast<std::int64_t>(at);
            f.depth = p.depth + 1;
            queue.push(f);
        }
    }

    add_background(result, config, bg_rng);
    finalize(result);
    for (std::size_t k = 0; k < config.anomalies.size(); ++k)
        inject_anomaly(result, templates, rules, config.anomalies[k], splitmix(config.seed + 5 + k), config.duration,
                       config.quiet_margin);
    apply_loss(result, config.packet_loss, loss_rng);
    return result;
}

void inject_anomaly(SimResult& result, std::span<const EventTemplate> templates, std::span<const AppRule> rules,
                    const AnomalySpec& spec, std::uint64_t seed, double duration, double quiet_margin)
{
    const auto idx = index_templates(templates);
    std::vector<const AppRule*> eligible;
    if (spec.target_app) {
        auto it = std::find_if(rules.begin(), rules.end(), [&](const AppRule& r) { return r.app_id == *spec.target_app; });
        if (it == rules.end()) throw ConfigError("anomaly target app '" + *spec.target_app + "' is not a rule");
        eligible.push_back(&*it);
    } else {
        for (const auto& r : rules)
            if (!r.is_physical()) eligible.push_back(&r);
    }
    if (eligible.empty()) throw ConfigError("no app rules to inject anomalies into");

    std::mt19937_64 rng(seed);
    // Reuse whatever node id the existing data packets use for the hub.
    std::string hub_id = "hub";
    for (const auto& p : result.trace) {
        if (p.kind != PacketKind::Data) continue;
        hub_id = p.direction == Direction::DeviceToHub ? p.dst : p.src;
        break;
    }
    auto delay = [&](const AppRule& r) { return std::max(0.0, gauss(rng, r.reaction_delay_mu, r.reaction_delay_sigma)); };

    std::set<EventId> trigger_events;
    for (const auto& r : rules) {
        for (auto e : r.triggers) trigger_events.insert(e);
        if (r.condition) trigger_events.insert(r.condition->report);
    }

    auto next_firing = [&](const std::string& app) {
        std::int64_t hi = -1;
        for (const auto& t : result.truth)
            if (t.app == app) hi = std::max(hi, t.firing);
        return hi + 1;
    };

    // Complete firings with a real trigger: (trigger index, action indices). Tampered
    // firings drop out on their own: suppressed ones lose their entries, surplus ones gain one.
    auto firings_of = [&](const AppRule& r) {
        std::map<std::int64_t, std::vector<std::size_t>> by_firing;
        for (std::size_t k = 0; k < result.truth.size(); ++k)
            if (result.truth[k].app == r.app_id && result.truth[k].firing >= 0) by_firing[result.truth[k].firing].push_back(k);
        std::vector<std::pair<std::size_t, std::vector<std::size_t>>> out;
        for (auto& [f, entries] : by_firing) {
            if (entries.size() != r.actions.size()) continue;
            const auto cause = result.truth[entries.front()].cause;
            if (cause < 0) continue;
            out.emplace_back(static_cast<std::size_t>(cause), entries);
        }
        return out;
    };

    auto quiet = [&](double from, double to) {
        return std::none_of(result.truth.begin(), result.truth.end(),
                            [&](const TruthEntry& t) { return t.t_end >= from && t.t_start <= to; });
    };

    const std::size_t offset = std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(rng);
    std::size_t cursor = offset;
    for (std::size_t n = 0; n < spec.count; ++n) {
        bool placed = false;
        for (std::size_t attempt = 0; attempt < eligible.size() && !placed; ++attempt) {
            const AppRule& rule = *eligible[cursor++ % eligible.size()];
            AnomalyTruth record;
            record.kind = spec.kind;
            record.app_id = rule.app_id;

            if (spec.kind == AnomalyKind::Spoofing) {
                double span = 0.0;
                for (auto e : rule.actions) span += lookup(idx, e).mean_duration() + rule.reaction_delay_mu;
                const double lo = quiet_margin;
                const double hi = duration - span - quiet_margin;
                if (hi <= lo) continue;
                std::uniform_real_distribution<double> when(lo, hi);
                for (int tries = 0; tries < 2000 && !placed; ++tries) {
                    const double t = when(rng);
                    if (!quiet(t - quiet_margin, t + span + quiet_margin)) continue;
                    const auto firing = next_firing(rule.app_id);
                    double start = t;
                    std::int64_t cause = -1;
                    for (std::size_t a = 0; a < rule.actions.size(); ++a) {
                        const auto at = append_event(result, lookup(idx, rule.actions[a]), start, rule.app_id, firing,
                                                     a == 0 ? -1 : cause, rng, hub_id, 0.0005);
                        cause = static_cast<std::int64_t>(at);
                        start = result.truth[at].t_end + delay(rule);
                    }
                    record.ts = t;
                    record.events = rule.actions;
                    placed = true;
                }
            } else {
                auto candidates = firings_of(rule);
                if (candidates.empty()) continue;
                auto& [trigger, actions] =
                    candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
                const auto firing = result.truth[actions.front()].firing;
                record.ts = result.truth[trigger].t_start;
                if (spec.kind == AnomalyKind::Misbehavior) {
                    std::set<std::size_t> doomed(actions.begin(), actions.end());
                    for (bool grew = true; grew;) {
                        grew = false;
                        for (std::size_t k = 0; k < result.truth.size(); ++k) {
                            const auto c = result.truth[k].cause;
                            if (c >= 0 && doomed.count(static_cast<std::size_t>(c)) && doomed.insert(k).second) grew = true;
                        }
                    }
                    record.events = rule.actions;
                    remove_entries(result, doomed);
                } else {
                    std::vector<EventId> pool;
                    for (const auto& r : rules)
                        for (auto e : r.actions)
                            if (!trigger_events.count(e) &&
                                std::find(rule.actions.begin(), rule.actions.end(), e) == rule.actions.end() &&
                                std::find(pool.begin(), pool.end(), e) == pool.end())
                                pool.push_back(e);
                    if (pool.empty()) throw ConfigError("no surplus action available for overprivilege on '" + rule.app_id + "'");
                    const EventId extra = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
                    const auto last = actions.back();
                    const double t = result.truth[last].t_end + delay(rule);
                    append_event(result, lookup(idx, extra), t, rule.app_id, firing, static_cast<std::int64_t>(last),
                                 rng, hub_id, 0.0005);
                    record.events = {extra};
                }
                placed = true;
            }
            if (placed) result.anomaly_truth.push_back(std::move(record));
        }
        if (!placed)
            throw ConfigError("cannot place " + std::string(to_string(spec.kind)) + " anomaly " + std::to_string(n + 1) +
                              " of " + std::to_string(spec.count));
        finalize(result);
    }
    std::stable_sort(result.anomaly_truth.begin(), result.anomaly_truth.end(),
                     [](const AnomalyTruth& a, const AnomalyTruth& b) { return a.ts < b.ts; });
}

} // namespace wctx
