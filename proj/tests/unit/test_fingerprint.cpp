#include "support.hpp"

#include <wctx/catalog.hpp>
#include <wctx/detector.hpp>
#include <wctx/error.hpp>
#include <wctx/features.hpp>
#include <wctx/forest.hpp>
#include <wctx/sim.hpp>
#include <wctx/trace.hpp>

#include <algorithm>
#include <numeric>
#include <set>

using namespace wctx;

namespace {

std::vector<PacketRecord> packets(std::initializer_list<std::pair<double, std::uint32_t>> items)
{
    std::vector<PacketRecord> out;
    for (const auto& [ts, size] : items) out.push_back({ts, size, Direction::DeviceToHub, 2, PacketKind::Data, "d", "hub"});
    return out;
}

FeatureMatrix sized(std::uint32_t size, double jitter = 0.0)
{
    return featurize(packets({{0.0, size}, {0.1 + jitter, size + 1}}));
}

// Two clean classes, many copies each.
std::pair<std::vector<FeatureMatrix>, std::vector<EventId>> toy_set(std::size_t per_class)
{
    std::vector<FeatureMatrix> x;
    std::vector<EventId> y;
    for (std::size_t i = 0; i < per_class; ++i) {
        x.push_back(sized(10, 0.001 * static_cast<double>(i % 5)));
        y.emplace_back(1);
        x.push_back(sized(100, 0.001 * static_cast<double>(i % 7)));
        y.emplace_back(2);
    }
    return {x, y};
}

ForestParams small(std::size_t trees = 15, std::uint64_t seed = 3)
{
    ForestParams p;
    p.n_trees = trees;
    p.seed = seed;
    p.threads = 1;
    return p;
}

} // namespace

TEST(Featurize, PadsToFifteenColumns)
{
    const auto f = featurize(packets({{1.0, 40}, {1.5, 30}, {1.75, 20}}));
    EXPECT_EQ(f.n_real, 3u);
    EXPECT_EQ(f.dim(), kDefaultPacketsPerWindow * kFeatureRows);
    for (std::size_t c = 3; c < 15; ++c)
        for (std::size_t r = 0; r < kFeatureRows; ++r) EXPECT_EQ(f.at(static_cast<Feature>(r), c), 0.0);
    EXPECT_EQ(f.at(Feature::Size, 1), 30.0);
    EXPECT_DOUBLE_EQ(f.at(Feature::Interval, 2), 0.25);
    EXPECT_EQ(f.at(Feature::Layer, 0), 2.0);
}

TEST(Featurize, SinglePacketHasZeroInterval)
{
    const auto f = featurize(packets({{7.0, 40}}));
    EXPECT_EQ(f.n_real, 1u);
    EXPECT_EQ(f.at(Feature::Interval, 0), 0.0);
    EXPECT_EQ(f.at(Feature::Size, 0), 40.0);
}

TEST(Featurize, EmptyAndOversizeRejected)
{
    EXPECT_THROW(featurize(std::vector<PacketRecord>{}), PreconditionError);
    std::vector<PacketRecord> many(16, packets({{0, 1}})[0]);
    EXPECT_THROW(featurize(many), ShapeError);
}

TEST(Featurize, TemplateRoundTrip)
{
    const auto sc = testbed_scenario();
    const auto& tpl = *std::find_if(sc.templates.begin(), sc.templates.end(),
                                    [](const EventTemplate& t) { return t.label.find("switch.on()") != std::string::npos; });
    SimConfig c;
    c.duration = 10;
    c.scheduled = {{tpl.event, 1.0}};
    const std::vector<EventTemplate> one{tpl};
    const auto data = filter_unrelated(simulate(one, {}, c).trace);
    ASSERT_EQ(data.size(), tpl.length());
    const auto f = featurize(data);
    for (std::size_t j = 0; j < tpl.length(); ++j) {
        EXPECT_EQ(f.at(Feature::Size, j), tpl.sizes[j]);
        EXPECT_EQ(f.at(Feature::Direction, j), tpl.directions[j]);
    }
}

TEST(Featurize, OrderSensitive)
{
    const auto a = featurize(packets({{0.0, 40}, {0.1, 30}}));
    const auto b = featurize(packets({{0.0, 30}, {0.1, 40}}));
    EXPECT_NE(a, b);
    EXPECT_EQ(a, featurize(packets({{0.0, 40}, {0.1, 30}})));
}

TEST(Window, BothCapsApply)
{
    const auto p = packets({{0.0, 1}, {1.0, 1}, {2.0, 1}, {2.2, 1}, {3.0, 1}});
    EXPECT_EQ(window_length(p, 0, 15, 2.1), 3u);
    EXPECT_EQ(window_length(p, 0, 2, 2.1), 2u);
    EXPECT_EQ(window_length(p, 4, 15, 2.1), 1u);
}

TEST(Forest, SeparableToySetIsLearnedPerfectly)
{
    const auto [x, y] = toy_set(30);
    const auto c = Classifier::train(x, y, small());
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(c.predict(x[i]), y[i]);
}

TEST(Forest, PureForestIsCertainOnTrainingPoints)
{
    std::vector<FeatureMatrix> x;
    std::vector<EventId> y;
    for (int i = 0; i < 40; ++i) {
        x.push_back(sized(10));
        y.emplace_back(4);
        x.push_back(sized(100));
        y.emplace_back(9);
    }
    const auto c = Classifier::train(x, y, small(10));
    const auto p = c.predict_proba(x[0]);
    EXPECT_DOUBLE_EQ(p.at(EventId(4)), 1.0);
    EXPECT_DOUBLE_EQ(p.at(EventId(9)), 0.0);
}

TEST(Forest, ProbabilitiesFormDistribution)
{
    const auto [x, y] = toy_set(20);
    const auto c = Classifier::train(x, y, small(9));
    for (std::uint32_t s = 5; s <= 120; s += 5) {
        const auto p = c.predict_proba(sized(s));
        double sum = 0;
        for (const auto& [k, v] : p) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
            sum += v;
            const double scaled = v * 9.0;
            EXPECT_NEAR(scaled, std::round(scaled), 1e-9);
        }
        EXPECT_NEAR(sum, 1.0, 1e-9);
    }
}

TEST(Forest, SingleClassIsTrainingError)
{
    std::vector<FeatureMatrix> x{sized(10), sized(11)};
    EXPECT_THROW(Classifier::train(x, test::ids({1, 1}), small()), TrainingError);
    EXPECT_THROW(Classifier::train({}, {}, small()), PreconditionError);
}

TEST(Forest, DimensionMismatchIsShapeError)
{
    const auto [x, y] = toy_set(5);
    const auto c = Classifier::train(x, y, small(3));
    EXPECT_THROW(c.predict_proba(featurize(packets({{0, 3}}), 10)), ShapeError);
}

TEST(Forest, JsonRoundTripPredictsIdentically)
{
    test::TempDir dir;
    const auto [x, y] = toy_set(15);
    auto c = Classifier::train(x, y, small());
    c.step_counts = {{EventId(1), 2}, {EventId(2), 2}};
    c.labels = {{EventId(1), "a/x.on"}};
    c.save(dir / "m.json");
    const auto back = Classifier::load(dir / "m.json");
    EXPECT_EQ(back, c);
    for (std::uint32_t s = 5; s <= 120; s += 7) EXPECT_EQ(back.predict_proba(sized(s)), c.predict_proba(sized(s)));
    EXPECT_EQ(back.to_json(), c.to_json());
}

TEST(Forest, SeedDeterminesModelRegardlessOfThreads)
{
    const auto [x, y] = toy_set(25);
    auto p = small(12, 99);
    const auto a = Classifier::train(x, y, p);
    p.threads = 4;
    const auto b = Classifier::train(x, y, p);
    EXPECT_EQ(a.to_json(), b.to_json());
}

TEST(TrainingSet, UsesMedianStepCount)
{
    const auto p = packets({{0.0, 10}, {0.1, 11}, {5.0, 10}, {5.1, 11}, {5.2, 12}, {9.0, 10}, {9.1, 11}});
    const std::vector<LabelRecord> labels{{EventId(1), 0.0, 0.1}, {EventId(1), 5.0, 5.2}, {EventId(1), 9.0, 9.1},
                                          {EventId(2), 20.0, 21.0}};
    const auto set = build_training_set(p, labels);
    EXPECT_EQ(set.samples.size(), 3u);
    EXPECT_EQ(set.skipped, 1u);
    EXPECT_EQ(set.step_counts.at(EventId(1)), 2u);
}

TEST(Detector, EmptyInputGivesEmptyOutput)
{
    const auto [x, y] = toy_set(5);
    const auto c = Classifier::train(x, y, small(3));
    EXPECT_TRUE(detect_events({}, c, {}).empty());
}

TEST(Detector, CleanOccurrenceDetectedOnceWithFullConfidence)
{
    // Pure forest: every class is a stack of identical copies of its clean occurrence.
    auto sc = testbed_scenario();
    for (auto& t : sc.templates) t.jitter_sigma = 0.0;
    std::vector<std::vector<PacketRecord>> occurrences;
    std::vector<FeatureMatrix> x;
    std::vector<EventId> y;
    for (const auto& tpl : sc.templates) {
        SimConfig one;
        one.duration = 10;
        one.scheduled = {{tpl.event, 1.0}};
        occurrences.push_back(filter_unrelated(simulate(sc.templates, {}, one).trace));
        for (int k = 0; k < 20; ++k) {
            x.push_back(featurize(occurrences.back()));
            y.push_back(tpl.event);
        }
    }
    auto c = Classifier::train(x, y, small(25));
    for (const auto& tpl : sc.templates) c.step_counts[tpl.event] = tpl.length();

    for (std::size_t k = 0; k < sc.templates.size(); ++k) {
        const auto& tpl = sc.templates[k];
        const auto events = detect_events(occurrences[k], c, {});
        ASSERT_EQ(events.size(), 1u) << tpl.label;
        EXPECT_EQ(events[0].event, tpl.event) << tpl.label;
        EXPECT_DOUBLE_EQ(events[0].confidence, 1.0) << tpl.label;
        EXPECT_DOUBLE_EQ(events[0].ts, occurrences[k].front().ts);
        EXPECT_EQ(events[0].last_packet, tpl.length() - 1);
    }
}

TEST(Detector, ProgressNonOverlapAndThresholdMonotonicity)
{
    const auto sc = testbed_scenario();
    const auto tr = simulate(sc.templates, {}, training_config(sc, 10));
    const auto data = filter_unrelated(tr.trace);
    const auto set = build_training_set(data, truth_labels(tr.truth));
    auto c = Classifier::train(set.samples, set.labels, small(25));
    c.step_counts = set.step_counts;

    auto cfg = sc.config;
    cfg.duration = 3000;
    for (auto& [e, rate] : cfg.trigger_rates) rate = 0.005;
    const auto stream = filter_unrelated(simulate(sc.templates, sc.rules, cfg).trace);
    const auto events = detect_events(stream, c, {});
    ASSERT_FALSE(events.empty());
    for (std::size_t i = 1; i < events.size(); ++i) {
        EXPECT_GT(events[i].first_packet, events[i - 1].last_packet);
        EXPECT_GE(events[i].ts, events[i - 1].ts);
    }

    auto key = [](const DetectedEvent& e) { return std::pair(e.first_packet, e.event); };
    DetectorParams lo;
    lo.unit_step = true;
    lo.threshold = 0.5;
    DetectorParams hi = lo;
    hi.threshold = 0.9;
    std::set<std::pair<std::size_t, EventId>> low;
    for (const auto& e : detect_events(stream, c, lo)) low.insert(key(e));
    for (const auto& e : detect_events(stream, c, hi)) EXPECT_TRUE(low.count(key(e)));
}

TEST(Detector, ParamValidation)
{
    const auto [x, y] = toy_set(5);
    const auto c = Classifier::train(x, y, small(3));
    DetectorParams p;
    p.threshold = 1.0;
    EXPECT_THROW(resolve_params(p, c), ValidationError);
    p.threshold = 0.7;
    p.packets_per_window = 10;
    EXPECT_THROW(resolve_params(p, c), ValidationError);
    EXPECT_THROW(detector_params_from_json(R"({"threshold": 0})"), ValidationError);
    const auto r = resolve_params(DetectorParams{}, c);
    EXPECT_EQ(r.step_counts.size(), 2u);
}

TEST(Detector, ParamsRoundTrip)
{
    DetectorParams p;
    p.threshold = 0.8;
    p.step_counts = {{EventId(3), 4}};
    const auto back = detector_params_from_json(detector_params_to_json(p));
    EXPECT_EQ(back.threshold, 0.8);
    EXPECT_EQ(back.step_counts, p.step_counts);
}
