#include "support.hpp"

#include <wctx/catalog.hpp>
#include <wctx/error.hpp>
#include <wctx/sim.hpp>
#include <wctx/sim_io.hpp>
#include <wctx/trace.hpp>

#include <algorithm>
#include <cmath>

using namespace wctx;

namespace {

// A: one-packet motion report, B: three-packet switch command.
std::vector<EventTemplate> toy_templates(double jitter = 0.0)
{
    return {make_template(EventId(1), "motion_1/motion.active", {40}, {0}, 0.0, {}, jitter),
            make_template(EventId(2), "light_1/switch.on()", {52, 30, 44}, {1, 0, 0}, 0.3, {}, jitter),
            make_template(EventId(3), "contact_1/contact.open", {33, 45}, {0, 1}, 0.1, {}, jitter)};
}

AppRule rule(std::string id, std::vector<std::uint32_t> triggers, std::vector<std::uint32_t> actions, double mu = 1.0,
             double sigma = 0.05)
{
    AppRule r;
    r.app_id = std::move(id);
    for (auto t : triggers) r.triggers.emplace_back(t);
    for (auto a : actions) r.actions.emplace_back(a);
    r.reaction_delay_mu = mu;
    r.reaction_delay_sigma = sigma;
    return r;
}

const TruthEntry* find_truth(const SimResult& r, EventId e, std::int64_t firing, const std::string& app)
{
    for (const auto& t : r.truth)
        if (t.event == e && t.firing == firing && t.app == app) return &t;
    return nullptr;
}

} // namespace

TEST(Simulate, ZeroRatesGiveEmptyTrace)
{
    SimConfig c;
    c.duration = 100;
    c.trigger_rates[EventId(1)] = 0.0;
    const auto r = simulate(toy_templates(), std::vector{rule("a", {1}, {2})}, c);
    EXPECT_TRUE(r.trace.empty());
    EXPECT_TRUE(r.truth.empty());
}

TEST(Simulate, ZeroJitterGivesExactReactionDelay)
{
    const auto templates = toy_templates(0.0);
    SimConfig c;
    c.duration = 1000;
    c.trigger_rates[EventId(1)] = 0.1;
    const auto r = simulate(templates, std::vector{rule("a", {1}, {2}, 1.25, 0.0)}, c);
    std::size_t firings = 0;
    for (std::size_t k = 0; k < r.truth.size(); ++k) {
        const auto& b = r.truth[k];
        if (b.event != EventId(2)) continue;
        ASSERT_GE(b.cause, 0);
        const auto& a = r.truth[static_cast<std::size_t>(b.cause)];
        EXPECT_EQ(a.event, EventId(1));
        EXPECT_NEAR(b.t_start - a.t_start, 1.25, 1e-9);
        ++firings;
    }
    EXPECT_GT(firings, 70u);
    EXPECT_LT(firings, 130u);
}

TEST(Simulate, ExtremeDurationsWithinFivePercent)
{
    auto sc = testbed_scenario();
    auto find = [&](const std::string& label) {
        auto it = std::find_if(sc.templates.begin(), sc.templates.end(), [&](const EventTemplate& t) { return t.label == label; });
        EXPECT_NE(it, sc.templates.end()) << label;
        return *it;
    };
    const auto color = find("hue_1/colorControl.setColor()");
    const auto power = find("outlet_1/power.value");
    EXPECT_NEAR(color.mean_duration(), 2.0656, 1e-9);
    EXPECT_NEAR(power.mean_duration(), 0.1477, 1e-9);

    SimConfig c;
    c.duration = 20000;
    c.trigger_rates[color.event] = 0.02;
    c.trigger_rates[power.event] = 0.02;
    const std::vector<EventTemplate> two{color, power};
    const auto r = simulate(two, {}, c);
    std::map<EventId, std::pair<double, std::size_t>> acc;
    for (const auto& t : r.truth) {
        acc[t.event].first += t.t_end - t.t_start;
        ++acc[t.event].second;
    }
    ASSERT_GT(acc[color.event].second, 100u);
    ASSERT_GT(acc[power.event].second, 100u);
    EXPECT_NEAR(acc[color.event].first / acc[color.event].second, 2.0656, 0.05 * 2.0656);
    EXPECT_NEAR(acc[power.event].first / acc[power.event].second, 0.1477, 0.05 * 0.1477);
}

TEST(Simulate, DeterministicForFixedSeed)
{
    const auto sc = testbed_scenario();
    auto c = sc.config;
    c.duration = 2000;
    const auto a = simulate(sc.templates, sc.rules, c);
    const auto b = simulate(sc.templates, sc.rules, c);
    EXPECT_EQ(a.trace, b.trace);
    EXPECT_EQ(a.truth, b.truth);
    c.seed += 1;
    EXPECT_NE(simulate(sc.templates, sc.rules, c).trace, a.trace);
}

TEST(Simulate, TruthPacketsStayWithinTemplateDuration)
{
    const auto templates = toy_templates(0.01);
    SimConfig c;
    c.duration = 2000;
    c.trigger_rates[EventId(1)] = 0.05;
    c.trigger_rates[EventId(3)] = 0.05;
    c.background_rate = 0.5;
    const auto r = simulate(templates, std::vector{rule("a", {1}, {2})}, c);
    ASSERT_EQ(r.origin.size(), r.trace.size());
    EXPECT_TRUE(std::is_sorted(r.trace.begin(), r.trace.end(),
                               [](const PacketRecord& x, const PacketRecord& y) { return x.ts < y.ts; }));
    std::map<std::int64_t, std::vector<std::size_t>> by_truth;
    for (std::size_t i = 0; i < r.origin.size(); ++i) {
        if (r.origin[i] < 0) EXPECT_NE(r.trace[i].kind, PacketKind::Data);
        else by_truth[r.origin[i]].push_back(i);
    }
    for (const auto& [k, packets] : by_truth) {
        const auto& t = r.truth[static_cast<std::size_t>(k)];
        const auto& tpl = templates[t.event.value - 1];
        EXPECT_EQ(packets.size(), tpl.length());
        const double span = r.trace[packets.back()].ts - r.trace[packets.front()].ts;
        EXPECT_LE(span, tpl.mean_duration() + 3 * tpl.jitter_sigma * static_cast<double>(tpl.length()) + 1e-9);
        for (std::size_t j = 0; j < packets.size(); ++j) EXPECT_EQ(r.trace[packets[j]].size, tpl.sizes[j]);
    }
}

TEST(Simulate, MissingTemplateIsConfigError)
{
    SimConfig c;
    c.trigger_rates[EventId(1)] = 0.1;
    EXPECT_THROW(simulate(toy_templates(), std::vector{rule("a", {1}, {9})}, c), ConfigError);
}

TEST(Simulate, BadConfigRejected)
{
    SimConfig c;
    c.duration = 0;
    EXPECT_THROW(simulate(toy_templates(), {}, c), ValidationError);
    c.duration = 10;
    c.trigger_rates[EventId(1)] = -1;
    EXPECT_THROW(simulate(toy_templates(), {}, c), ValidationError);
}

TEST(Simulate, TemplateInvariantsChecked)
{
    auto t = toy_templates();
    t[1].base_intervals[0] = 0.1;
    EXPECT_THROW(validate_templates(t), ValidationError);
    auto long_one = toy_templates();
    long_one[1] = make_template(EventId(2), "light_1/switch.on()", std::vector<std::uint32_t>(16, 20),
                                std::vector<std::uint8_t>(16, 0), 1.0);
    EXPECT_THROW(validate_templates(long_one), ValidationError);
    auto slow = toy_templates();
    slow[1] = make_template(EventId(2), "light_1/switch.on()", {1, 2}, {0, 0}, 2.5);
    EXPECT_THROW(validate_templates(slow), ValidationError);
}

TEST(Simulate, AndTriggersNeedBoth)
{
    auto r = rule("and", {1, 3}, {2});
    r.trigger_mode = TriggerMode::All;
    SimConfig c;
    c.duration = 100;
    c.scheduled = {{EventId(1), 10.0}, {EventId(3), 10.5}, {EventId(1), 50.0}};
    const auto res = simulate(toy_templates(), std::vector{r}, c);
    const auto n = std::count_if(res.truth.begin(), res.truth.end(), [](const TruthEntry& t) { return t.event == EventId(2); });
    EXPECT_EQ(n, 1);
}

TEST(Inject, SpoofingHasNoPrecedingTrigger)
{
    SimConfig c;
    c.duration = 3000;
    c.trigger_rates[EventId(1)] = 0.02;
    c.anomalies = {{AnomalyKind::Spoofing, std::string("a"), 5}};
    const auto r = simulate(toy_templates(), std::vector{rule("a", {1}, {2})}, c);
    ASSERT_EQ(r.anomaly_truth.size(), 5u);
    for (const auto& a : r.anomaly_truth) {
        EXPECT_EQ(a.kind, AnomalyKind::Spoofing);
        EXPECT_EQ(a.events, test::ids({2}));
        const double lookback = kDefaultWindowSeconds * 2;
        for (const auto& t : r.truth)
            if (t.event == EventId(1)) EXPECT_FALSE(t.t_start <= a.ts && t.t_start >= a.ts - lookback);
        EXPECT_TRUE(std::any_of(r.truth.begin(), r.truth.end(),
                                [&](const TruthEntry& t) { return t.event == EventId(2) && std::abs(t.t_start - a.ts) < 1e-9; }));
    }
}

TEST(Inject, MisbehaviorSuppressesAction)
{
    SimConfig c;
    c.duration = 3000;
    c.trigger_rates[EventId(1)] = 0.02;
    const auto templates = toy_templates();
    const std::vector rules{rule("a", {1}, {2})};
    const auto clean = simulate(templates, rules, c);
    c.anomalies = {{AnomalyKind::Misbehavior, std::string("a"), 3}};
    const auto r = simulate(templates, rules, c);
    ASSERT_EQ(r.anomaly_truth.size(), 3u);
    auto count = [](const SimResult& s, EventId e) {
        return std::count_if(s.truth.begin(), s.truth.end(), [&](const TruthEntry& t) { return t.event == e; });
    };
    EXPECT_EQ(count(r, EventId(1)), count(clean, EventId(1)));
    EXPECT_EQ(count(r, EventId(2)), count(clean, EventId(2)) - 3);
    for (const auto& a : r.anomaly_truth) {
        EXPECT_TRUE(std::any_of(r.truth.begin(), r.truth.end(),
                                [&](const TruthEntry& t) { return t.event == EventId(1) && std::abs(t.t_start - a.ts) < 1e-9; }));
    }
}

TEST(Inject, OverprivilegeAppendsForeignAction)
{
    SimConfig c;
    c.duration = 3000;
    c.trigger_rates[EventId(1)] = 0.02;
    c.trigger_rates[EventId(3)] = 0.02;
    const std::vector rules{rule("a", {1}, {2}), rule("b", {3}, {1})};
    auto templates = toy_templates();
    templates.push_back(make_template(EventId(4), "siren_1/alarm.siren()", {70, 20}, {1, 0}, 0.2));
    auto rules2 = rules;
    rules2.push_back(rule("c", {2}, {4}));
    c.anomalies = {{AnomalyKind::Overprivilege, std::string("a"), 2}};
    const auto r = simulate(templates, rules2, c);
    ASSERT_EQ(r.anomaly_truth.size(), 2u);
    for (const auto& a : r.anomaly_truth) {
        ASSERT_EQ(a.events.size(), 1u);
        EXPECT_EQ(a.events[0], EventId(4));
    }
}

TEST(Inject, UnknownTargetIsConfigError)
{
    SimConfig c;
    c.duration = 100;
    c.trigger_rates[EventId(1)] = 0.1;
    c.anomalies = {{AnomalyKind::Spoofing, std::string("nope"), 1}};
    EXPECT_THROW(simulate(toy_templates(), std::vector{rule("a", {1}, {2})}, c), ConfigError);
    EXPECT_FALSE(anomaly_kind_from_string("Vandalism").has_value());
}

TEST(Inject, CountMatchesSpecAcrossKinds)
{
    auto sc = testbed_scenario();
    auto c = sc.config;
    c.duration = 20000;
    for (auto& [e, rate] : c.trigger_rates) rate = 0.005;
    c.anomalies = {{AnomalyKind::Spoofing, std::nullopt, 4}, {AnomalyKind::Misbehavior, std::nullopt, 4},
                   {AnomalyKind::Overprivilege, std::nullopt, 4}};
    const auto r = simulate(sc.templates, sc.rules, c);
    EXPECT_EQ(r.anomaly_truth.size(), 12u);
    EXPECT_TRUE(std::is_sorted(r.anomaly_truth.begin(), r.anomaly_truth.end(),
                               [](const AnomalyTruth& a, const AnomalyTruth& b) { return a.ts < b.ts; }));
}

TEST(SimIo, FilesRoundTrip)
{
    test::TempDir dir;
    const auto sc = testbed_scenario();
    save_templates(dir / "t.json", sc.templates);
    save_rules(dir / "r.json", sc.rules);
    save_sim_config(dir / "c.json", sc.config);
    EXPECT_EQ(templates_to_json(load_templates(dir / "t.json")), templates_to_json(sc.templates));
    EXPECT_EQ(rules_to_json(load_rules(dir / "r.json")), rules_to_json(sc.rules));
    EXPECT_EQ(sim_config_to_json(load_sim_config(dir / "c.json")), sim_config_to_json(sc.config));

    auto c = sc.config;
    c.duration = 500;
    const auto r = simulate(sc.templates, sc.rules, c);
    save_truth(dir / "truth.jsonl", r.truth);
    EXPECT_EQ(load_truth(dir / "truth.jsonl"), r.truth);
}
