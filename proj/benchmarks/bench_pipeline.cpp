#include <wctx/catalog.hpp>
#include <wctx/checker.hpp>
#include <wctx/detector.hpp>
#include <wctx/features.hpp>
#include <wctx/forest.hpp>
#include <wctx/miner.hpp>
#include <wctx/trace.hpp>

#include <benchmark/benchmark.h>

using namespace wctx;

namespace {

struct Testbed {
    Scenario sc = testbed_scenario();
    Classifier model;
    std::vector<PacketRecord> packets;
    EventStream events;

    Testbed()
    {
        const auto train = simulate(sc.templates, {}, training_config(sc, 50));
        const auto set = build_training_set(filter_unrelated(train.trace), truth_labels(train.truth),
                                            kDefaultPacketsPerWindow, kDefaultWindowSeconds);
        ForestParams fp;
        fp.n_trees = 50;
        model = Classifier::train(set.samples, set.labels, fp);
        model.step_counts = set.step_counts;
        packets = filter_unrelated(simulate(sc.templates, sc.rules, sc.config).trace);
        events = detect_events(packets, model, DetectorParams{});
    }
};

const Testbed& testbed()
{
    static const Testbed t;
    return t;
}

void BM_Featurize(benchmark::State& state)
{
    const auto& t = testbed();
    const std::span<const PacketRecord> window(t.packets.data(), kDefaultPacketsPerWindow);
    for (auto _ : state) benchmark::DoNotOptimize(featurize(window));
}
BENCHMARK(BM_Featurize);

void BM_PredictWindow(benchmark::State& state)
{
    const auto& t = testbed();
    const auto f = featurize(std::span<const PacketRecord>(t.packets.data(), kDefaultPacketsPerWindow));
    for (auto _ : state) benchmark::DoNotOptimize(t.model.predict_proba(f));
}
BENCHMARK(BM_PredictWindow);

void BM_DetectWeek(benchmark::State& state)
{
    const auto& t = testbed();
    for (auto _ : state) benchmark::DoNotOptimize(detect_events(t.packets, t.model, DetectorParams{}));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.packets.size()));
}
BENCHMARK(BM_DetectWeek)->Unit(benchmark::kMillisecond);

void BM_MineWeek(benchmark::State& state)
{
    const auto& t = testbed();
    for (auto _ : state) benchmark::DoNotOptimize(mine(t.events));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.events.size()));
}
BENCHMARK(BM_MineWeek)->Unit(benchmark::kMillisecond);

// Chain stream of growing length: one rule fired every 30 s.
void BM_MineScaling(benchmark::State& state)
{
    EventStream events;
    for (std::int64_t k = 0; k < state.range(0); ++k) {
        const double t = 30.0 * static_cast<double>(k);
        events.push_back({EventId(1), t, 1.0, 0, 0});
        events.push_back({EventId(2), t + 2.5, 1.0, 0, 0});
        events.push_back({EventId(3), t + 7.0 + static_cast<double>(k % 5), 1.0, 0, 0});
    }
    for (auto _ : state) benchmark::DoNotOptimize(mine(events));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MineScaling)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_CheckStream(benchmark::State& state)
{
    const auto& t = testbed();
    const auto context = context_graphs(t.sc.rules, t.sc.registry);
    for (auto _ : state) benchmark::DoNotOptimize(check_stream(t.events, context));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.events.size()));
}
BENCHMARK(BM_CheckStream)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
