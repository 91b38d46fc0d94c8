#include "support.hpp"

#include "oracles/brute_miner.hpp"

#include <wctx/error.hpp>
#include <wctx/miner.hpp>
#include <wctx/sim.hpp>

#include <random>

using namespace wctx;
using test::ids;
using test::stream;

namespace {

PairStats pair(std::uint32_t a, std::uint32_t b, double mean, std::size_t support = 10, double sd = 0.0)
{
    PairStats s;
    s.a = EventId(a);
    s.b = EventId(b);
    s.mean = mean;
    s.stddev = sd;
    s.support = support;
    s.samples.assign(support, mean);
    return s;
}

std::vector<std::vector<EventId>> keys(const std::vector<DependencySequence>& s)
{
    std::vector<std::vector<EventId>> out;
    for (const auto& x : s) out.push_back(x.events);
    return out;
}

// 100 runs of a->b->c->d one second apart, plus 50 runs of c->d alone.
EventStream nested_stream()
{
    std::vector<std::pair<std::uint32_t, double>> items;
    for (int k = 0; k < 100; ++k) {
        const double t = 30.0 * k;
        for (std::uint32_t e = 1; e <= 4; ++e) items.emplace_back(e, t + (e - 1));
        if (k < 50) {
            items.emplace_back(3, t + 15.0);
            items.emplace_back(4, t + 16.0);
        }
    }
    return stream(items);
}

EventStream from_truth(const SimResult& r)
{
    EventStream out;
    for (const auto& t : r.truth) out.push_back(DetectedEvent{t.event, t.t_start, 1.0, 0, 0});
    return out;
}

std::vector<EventTemplate> templates()
{
    return {make_template(EventId(1), "a_1/switch.on()", {40, 20}, {1, 0}, 0.1),
            make_template(EventId(2), "b_1/switch.on()", {41, 20}, {1, 0}, 0.1),
            make_template(EventId(3), "c_1/switch.on()", {42, 20}, {1, 0}, 0.1)};
}

AppRule rule(std::string id, std::uint32_t trigger, std::uint32_t action)
{
    AppRule r;
    r.app_id = std::move(id);
    r.triggers = {EventId(trigger)};
    r.actions = {EventId(action)};
    return r;
}

} // namespace

TEST(PairStats, ConstantIntervals)
{
    MinerParams p;
    p.min_support = 2;
    const auto pairs = collect_pair_stats(stream({{1, 0}, {2, 1}, {1, 10}, {2, 11}, {1, 20}, {2, 21}}), p);
    const auto it = std::find_if(pairs.begin(), pairs.end(), [](const PairStats& s) { return s.a == EventId(1) && s.b == EventId(2); });
    ASSERT_NE(it, pairs.end());
    EXPECT_DOUBLE_EQ(it->mean, 1.0);
    EXPECT_DOUBLE_EQ(it->stddev, 0.0);
    EXPECT_EQ(it->support, 3u);
}

TEST(PairStats, EachLaterEventConsumedOnce)
{
    MinerParams p;
    p.min_support = 2;
    const auto pairs = collect_pair_stats(stream({{1, 0}, {1, 0.5}, {2, 1}, {2, 1.2}, {1, 5}}), p);
    const auto it = std::find_if(pairs.begin(), pairs.end(), [](const PairStats& s) { return s.a == EventId(1) && s.b == EventId(2); });
    ASSERT_NE(it, pairs.end());
    EXPECT_EQ(it->samples, (std::vector<double>{1.0, 0.7}));
}

TEST(PairStats, MinSupportAndLagFilter)
{
    MinerParams p;
    p.min_support = 2;
    p.max_lag = 2.0;
    EXPECT_TRUE(collect_pair_stats(stream({{1, 0}, {2, 5}, {1, 10}, {2, 15}}), p).empty());
    EXPECT_TRUE(collect_pair_stats(stream({{1, 0}, {2, 1}}), p).empty());
}

TEST(PairStats, IndependentStreamsVaryWidely)
{
    std::mt19937_64 rng(17);
    std::exponential_distribution<double> gap(0.2);
    std::vector<std::pair<std::uint32_t, double>> items;
    for (double t = 0; t < 5000; t += gap(rng)) items.emplace_back(1, t);
    for (double t = 0; t < 5000; t += gap(rng)) items.emplace_back(2, t);
    const auto pairs = collect_pair_stats(stream(items), MinerParams{});
    ASSERT_FALSE(pairs.empty());
    for (const auto& s : pairs) EXPECT_GT(s.stddev, 0.1);
}

TEST(PairStats, SimulatedRuleDelayIsRecovered)
{
    SimConfig c;
    c.duration = 200 * 30.0;
    for (int k = 0; k < 200; ++k) c.scheduled.push_back({EventId(1), 10.0 + 30.0 * k});
    auto r = rule("r", 1, 2);
    r.reaction_delay_mu = 1.0;
    r.reaction_delay_sigma = 0.05;
    auto t = templates();
    for (auto& x : t) x.jitter_sigma = 0.0;
    const auto sim = simulate(t, std::vector{r}, c);
    const auto pairs = collect_pair_stats(from_truth(sim), MinerParams{});
    const auto it = std::find_if(pairs.begin(), pairs.end(), [](const PairStats& s) { return s.a == EventId(1) && s.b == EventId(2); });
    ASSERT_NE(it, pairs.end());
    EXPECT_EQ(it->support, 200u);
    // The trigger template itself lasts 0.1 s.
    EXPECT_GE(it->mean - 0.1, 0.98);
    EXPECT_LE(it->mean - 0.1, 1.02);
    EXPECT_LT(it->stddev, 0.07);
}

TEST(Dependence, ThresholdAndSupport)
{
    EXPECT_TRUE(test_dependence(pair(1, 2, 1.0, 10, 0.0), 0.1));
    EXPECT_FALSE(test_dependence(pair(1, 2, 1.0, 10, 0.5), 0.1));
    EXPECT_THROW(test_dependence(pair(1, 2, 1.0, 1), 0.1, 2), InconclusiveError);
}

TEST(Concatenate, AdditiveChainMerges)
{
    MinerParams p;
    p.eps_add = 0.05;
    const std::vector pairs{pair(1, 2, 1.0), pair(2, 3, 0.5), pair(1, 3, 1.5)};
    const auto r = concatenate(pairs, p);
    EXPECT_EQ(keys(r.sequences), (std::vector<std::vector<EventId>>{ids({1, 2, 3})}));
    EXPECT_EQ(r.sequences[0].mean_gaps, (std::vector<double>{1.0, 0.5}));
}

TEST(Concatenate, NonAdditiveKeepsPairs)
{
    MinerParams p;
    p.eps_add = 0.05;
    const std::vector pairs{pair(1, 2, 1.0), pair(2, 3, 0.5), pair(1, 3, 3.0)};
    const auto r = concatenate(pairs, p);
    EXPECT_EQ(keys(r.sequences), (std::vector<std::vector<EventId>>{ids({1, 2}), ids({1, 3}), ids({2, 3})}));
}

TEST(Concatenate, CyclesAreFlaggedNotMerged)
{
    const std::vector pairs{pair(1, 2, 1.0), pair(2, 1, 1.0)};
    const auto r = concatenate(pairs, MinerParams{});
    EXPECT_FALSE(r.cycles.empty());
    for (const auto& s : r.sequences) EXPECT_EQ(s.events.size(), 2u);
}

TEST(Concatenate, FixedPoint)
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto events = oracle::random_chain_stream(seed);
        const auto m = mine(events);
        const auto again = extend(m.concatenated.sequences, m.dependent, MinerParams{});
        EXPECT_EQ(keys(again.sequences), keys(m.concatenated.sequences)) << "seed " << seed;
    }
}

TEST(Count, NestedOccurrencesKeepStandaloneRemainder)
{
    const auto r = mine(nested_stream());
    ASSERT_EQ(keys(r.concatenated.sequences), (std::vector<std::vector<EventId>>{ids({1, 2, 3, 4})}));
    ASSERT_EQ(r.sequences.size(), 2u);
    EXPECT_EQ(r.sequences[0].events, ids({1, 2, 3, 4}));
    EXPECT_EQ(r.sequences[0].count, 100u);
    EXPECT_EQ(r.sequences[1].events, ids({3, 4}));
    EXPECT_EQ(r.sequences[1].count, 50u);
    const auto abc = find_occurrences(ids({2, 3, 4}), {1.0, 1.0}, nested_stream(), 0.3);
    EXPECT_EQ(abc.size(), 100u);
}

TEST(Count, LonePairRetainedWithItsCount)
{
    std::vector<std::pair<std::uint32_t, double>> items;
    for (int k = 0; k < 10; ++k) {
        items.emplace_back(1, 20.0 * k);
        items.emplace_back(2, 20.0 * k + 1.5);
    }
    const auto r = mine(stream(items));
    ASSERT_EQ(r.sequences.size(), 1u);
    EXPECT_EQ(r.sequences[0].events, ids({1, 2}));
    EXPECT_EQ(r.sequences[0].count, 10u);
}

TEST(Count, CascadeCountsMatchFirings)
{
    SimConfig c;
    c.duration = 2000;
    std::size_t n_c = 0, n_a = 0;
    for (int k = 0; k < 40; ++k) {
        const bool chain = k % 3 != 0;
        c.scheduled.push_back({EventId(chain ? 3 : 1), 10.0 + 40.0 * k});
        (chain ? n_c : n_a) += 1;
    }
    const auto sim = simulate(templates(), std::vector{rule("ab", 1, 2), rule("ca", 3, 1)}, c);
    const auto r = mine(from_truth(sim));
    ASSERT_EQ(r.sequences.size(), 2u);
    EXPECT_EQ(r.sequences[0].events, ids({1, 2}));
    EXPECT_EQ(r.sequences[0].count, n_a);
    EXPECT_EQ(r.sequences[1].events, ids({3, 1, 2}));
    EXPECT_EQ(r.sequences[1].count, n_c);
}

TEST(Count, OccurrencesNeverReuseEvents)
{
    const auto events = stream({{1, 0}, {2, 1}, {2, 1.05}, {1, 0.02}});
    const auto occ = find_occurrences(ids({1, 2}), {1.0}, events, 0.3);
    ASSERT_EQ(occ.size(), 2u);
    EXPECT_NE(occ[0][1], occ[1][1]);
}

TEST(Mine, ShiftInvariant)
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto events = oracle::random_chain_stream(seed);
        const auto a = mine(events);
        for (auto& e : events) e.ts += 1024.0;
        const auto b = mine(events);
        EXPECT_EQ(keys(a.sequences), keys(b.sequences));
        ASSERT_EQ(a.pairs.size(), b.pairs.size());
        for (std::size_t i = 0; i < a.pairs.size(); ++i) {
            EXPECT_EQ(a.pairs[i].support, b.pairs[i].support);
            EXPECT_NEAR(a.pairs[i].mean, b.pairs[i].mean, 1e-9);
        }
        for (std::size_t i = 0; i < a.sequences.size(); ++i) EXPECT_EQ(a.sequences[i].count, b.sequences[i].count);
    }
}

TEST(Mine, StatsAreSelfConsistent)
{
    const auto r = mine(oracle::random_chain_stream(3));
    for (const auto& s : r.pairs) {
        EXPECT_EQ(s.support, s.samples.size());
        double sum = 0;
        for (double v : s.samples) sum += v;
        EXPECT_NEAR(sum / static_cast<double>(s.support), s.mean, 1e-12);
        EXPECT_GE(s.stddev, 0.0);
    }
    for (const auto& s : r.sequences) EXPECT_EQ(s.mean_gaps.size() + 1, s.events.size());
}

TEST(Mine, MatchesBruteForceOnSmallStreams)
{
    const MinerParams p;
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        const auto events = oracle::random_chain_stream(seed, 300);
        const auto fast = mine(events, p);
        const oracle::BruteMiner slow(events, p);
        ASSERT_EQ(fast.dependent.size(), slow.dependent().size()) << "seed " << seed;
        EXPECT_EQ(keys(fast.concatenated.sequences), slow.maximal()) << "seed " << seed;
        const auto want = slow.retained();
        ASSERT_EQ(keys(fast.sequences), keys(want)) << "seed " << seed;
        for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(fast.sequences[i].count, want[i].count);
    }
}

TEST(Graphs, PathGraphPerSequence)
{
    const std::vector<DependencySequence> seqs{{ids({1, 2}), {1.0}, 7}};
    const auto g = build_wireless_context(seqs, {{EventId(1), "a/x"}});
    ASSERT_EQ(g.size(), 1u);
    EXPECT_EQ(g[0].source, GraphSource::WirelessContext);
    EXPECT_TRUE(g[0].has_edge(EventId(1), EventId(2)));
    EXPECT_EQ(g[0].occurrence_count, 7u);
    EXPECT_EQ(g[0].nodes[0].label, "a/x");
    EXPECT_TRUE(build_wireless_context({}).empty());
}

TEST(Params, ValidationAndRoundTrip)
{
    MinerParams p;
    p.tau = 0;
    EXPECT_THROW(validate_miner_params(p), ValidationError);
    p = {};
    p.min_support = 1;
    EXPECT_THROW(validate_miner_params(p), ValidationError);
    p = {};
    p.max_lag = 0.05;
    EXPECT_THROW(validate_miner_params(p), ValidationError);
    p = {};
    p.tau = 0.2;
    const auto back = miner_params_from_json(miner_params_to_json(p));
    EXPECT_EQ(back.tau, 0.2);
    EXPECT_EQ(back.min_support, 5u);
}
