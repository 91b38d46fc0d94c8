#include "support.hpp"

#include <wctx/catalog.hpp>
#include <wctx/error.hpp>
#include <wctx/io.hpp>
#include <wctx/vuln.hpp>
#include <wctx_tools/pipeline.hpp>

#include <nlohmann/json.hpp>

#include <cstdlib>

using namespace wctx;
using namespace wctx::tools;
using test::TempDir;

namespace {

std::vector<fs::path> sorted_files(const fs::path& dir)
{
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file()) out.push_back(e.path().filename());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST(PipelineConfig, RelativePathsResolveAgainstConfigDir)
{
    const auto c = pipeline_config_from_json(R"J({"templates": "t.json", "trace": "/abs/trace.jsonl",
        "checker": {"mode": "graphs", "join_window": 3.0}, "miner": {"tau": 0.2}})J",
                                             "/data/home");
    EXPECT_EQ(*c.templates, fs::path("/data/home/t.json"));
    EXPECT_EQ(*c.trace, fs::path("/abs/trace.jsonl"));
    EXPECT_EQ(c.out_dir, fs::path("/data/home/out"));
    EXPECT_EQ(c.check_mode, "graphs");
    EXPECT_EQ(c.checker.join_window, 3.0);
    EXPECT_EQ(c.checker.miner.tau, 0.2);
    EXPECT_EQ(c.detector.threshold, 0.7);
    EXPECT_EQ(c.forest.n_trees, 100u);
}

TEST(PipelineConfig, UnknownKeysAndBadValuesRejected)
{
    EXPECT_THROW(pipeline_config_from_json(R"J({"templatez": "t.json"})J", "/"), ConfigError);
    EXPECT_THROW(pipeline_config_from_json(R"J({"checker": {"mode": "fuzzy"}})J", "/"), ConfigError);
    EXPECT_THROW(pipeline_config_from_json(R"J({"detector": {"threshold": 2}})J", "/"), ValidationError);
    EXPECT_THROW(pipeline_config_from_json("[1, 2]", "/"), ParseError);
}

TEST(PipelineConfig, MissingInputNamedBeforeAnyStage)
{
    TempDir dir;
    auto c = pipeline_config_from_json(R"J({"trace": "nope.jsonl", "model": "m.json"})J", dir.path());
    try {
        validate_config_paths(c);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("nope.jsonl"), std::string::npos);
    }
    EXPECT_FALSE(fs::exists(c.out_dir));
    EXPECT_THROW(run_pipeline(c), ConfigError);
    EXPECT_FALSE(fs::exists(c.out_dir));
}

TEST(Scaffold, UnknownScenarioRejected)
{
    TempDir dir;
    EXPECT_THROW(scaffold("mansion", dir / "x"), ConfigError);
}

TEST(Scaffold, HumidityLeakRunsCleanAndConfirmsCoupling)
{
    TempDir dir;
    const auto files = scaffold("humidity-leak", dir / "hl", 60);
    EXPECT_FALSE(files.empty());
    auto config = load_pipeline_config(dir / "hl" / "pipeline.json");
    config.out_dir = dir / "run1";
    const auto summary = run_pipeline(config);
    EXPECT_EQ(summary.reports, 0u);
    EXPECT_GT(summary.events, 0u);
    EXPECT_GE(summary.wireless_graphs, 2u);

    const auto chains = chains_from_json(read_file(dir / "run1" / "chains.json"));
    std::size_t confirmed = 0;
    for (const auto& c : chains)
        if (c.evidence) {
            ++confirmed;
            EXPECT_EQ(c.channel, "leakage");
        }
    EXPECT_EQ(confirmed, 1u);

    config.out_dir = dir / "run2";
    run_pipeline(config);
    const auto a = sorted_files(dir / "run1");
    ASSERT_EQ(a, sorted_files(dir / "run2"));
    for (const auto& f : a) EXPECT_EQ(test::slurp(dir / "run1" / f), test::slurp(dir / "run2" / f)) << f;

    const auto summary_json = nlohmann::json::parse(read_file(dir / "run1" / "summary.json"));
    EXPECT_EQ(summary_json["reports"], 0);
    // summary.json lists everything written before it.
    EXPECT_EQ(summary_json["artifacts"].size() + 1, summary.artifacts.size());
}

TEST(Scaffold, WritesValidContextGraphs)
{
    TempDir dir;
    scaffold("testbed", dir / "tb", 10);
    std::vector<fs::path> graphs;
    for (const auto& e : fs::directory_iterator(dir / "tb" / "context")) graphs.push_back(e.path());
    ASSERT_EQ(graphs.size(), 8u);
    const auto vocab = load_vocabulary(dir / "tb" / "vocabulary.json");
    for (const auto& check : validate_graph_files(graphs, &vocab)) EXPECT_TRUE(check.error.empty()) << check.error;
}

TEST(ValidateGraphs, ReportsEachFileIndependently)
{
    TempDir dir;
    const auto vocab = default_vocabulary();
    test::write(dir / "good.json",
                R"J({"graph_id":"g","source":"iot","nodes":[{"id":1,"label":"motion_1/motion.active"},{"id":2,"label":"light_1/switch.on()"}],"edges":[[1,2]]})J");
    test::write(dir / "cycle.json",
                R"J({"graph_id":"c","source":"iot","nodes":[{"id":1,"label":""},{"id":2,"label":""}],"edges":[[1,2],[2,1]]})J");
    test::write(dir / "label.json",
                R"J({"graph_id":"l","source":"iot","nodes":[{"id":1,"label":"x/warp.engage()"}],"edges":[]})J");
    test::write(dir / "broken.json", "{");
    const auto checks = validate_graph_files({dir / "good.json", dir / "cycle.json", dir / "label.json", dir / "broken.json"}, &vocab);
    ASSERT_EQ(checks.size(), 4u);
    EXPECT_TRUE(checks[0].error.empty());
    EXPECT_EQ(checks[0].graphs, 1u);
    EXPECT_FALSE(checks[1].error.empty());
    EXPECT_FALSE(checks[2].error.empty());
    EXPECT_FALSE(checks[3].error.empty());
    EXPECT_TRUE(validate_graph_files({dir / "label.json"}, nullptr)[0].error.empty());
}

TEST(ExtractContext, RunsExternalExtractorAndValidatesOutput)
{
    TempDir dir;
    for (const char* f : {"d.txt", "c.json", "e.bin"}) test::write(dir / f, "x");
    test::write(dir / "fake.sh", R"J(#!/bin/sh
while [ $# -gt 0 ]; do
  case "$1" in --out-dir) out="$2"; shift ;; esac
  shift
done
printf '%s' '{"graph_id":"brighten","source":"iot","nodes":[{"id":1,"label":"multi_1/contact.open"},{"id":2,"label":"light_1/switch.on()"}],"edges":[[1,2]]}' > "$out/brighten.json"
)J");
    fs::permissions(dir / "fake.sh", fs::perms::owner_all);
    ExtractRequest r{dir / "d.txt", dir / "missing_caps.json", dir / "e.bin", dir / "graphs", (dir / "fake.sh").string()};
    EXPECT_THROW(extract_context(r), ConfigError);
    r.capabilities = dir / "c.json";
    test::write(dir / "c.json", vocabulary_to_json(default_vocabulary()));
    const auto checks = extract_context(r);
    ASSERT_EQ(checks.size(), 1u);
    EXPECT_TRUE(checks[0].error.empty()) << checks[0].error;

    r.extractor = "false";
    EXPECT_THROW(extract_context(r), Error);

    r.extractor.reset();
    ::unsetenv("WCTX_EXTRACTOR");
    EXPECT_EQ(extract_context(r).size(), 1u);  // reads existing output
    r.out_dir = dir / "none";
    EXPECT_THROW(extract_context(r), ConfigError);
}
