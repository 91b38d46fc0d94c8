#include "wctx_tools/pipeline.hpp"

#include <wctx/catalog.hpp>
#include <wctx/checker.hpp>
#include <wctx/detector.hpp>
#include <wctx/error.hpp>
#include <wctx/forest.hpp>
#include <wctx/io.hpp>
#include <wctx/miner.hpp>
#include <wctx/sim_io.hpp>
#include <wctx/trace.hpp>
#include <wctx/vuln.hpp>

#include <CLI11/CLI11.hpp>
#include <spdlog/spdlog.h>

#include <iostream>

namespace fs = std::filesystem;
using namespace wctx;

namespace {

fs::path sibling(const fs::path& out, const std::string& suffix)
{
    return out.parent_path() / (out.stem().string() + suffix);
}

int cmd_simulate(const fs::path& templates, const fs::path& rules, const fs::path& config, const fs::path& out_trace,
                 const fs::path& out_truth, const std::optional<fs::path>& out_anomalies,
                 const std::optional<std::uint64_t>& seed)
{
    auto sc = load_sim_config(config);
    if (seed) sc.seed = *seed;
    const auto result = simulate(load_templates(templates), load_rules(rules), sc);
    save_trace(out_trace, result.trace);
    save_truth(out_truth, result.truth);
    save_anomaly_truth(out_anomalies.value_or(sibling(out_truth, ".anomalies.jsonl")), result.anomaly_truth);
    spdlog::info("{} packets, {} events, {} anomalies", result.trace.size(), result.truth.size(),
                 result.anomaly_truth.size());
    return 0;
}

int cmd_train(const fs::path& trace, const fs::path& labels, const fs::path& out_model, const ForestParams& forest,
              std::size_t packets, double seconds)
{
    const auto records = load_labels(labels);
    const auto model = tools::train_model(load_trace(trace), records, forest, packets, seconds);
    model.save(out_model);
    spdlog::info("trained {} trees over {} classes", model.n_trees(), model.classes().size());
    return 0;
}

int cmd_detect(const fs::path& trace, const fs::path& model_path, const std::optional<fs::path>& params,
               const fs::path& out_events)
{
    const auto model = Classifier::load(model_path);
    const auto p = params ? load_detector_params(*params) : DetectorParams{};
    const auto packets = filter_unrelated(load_trace(trace));
    const auto events = detect_events(packets, model, p);
    save_events(out_events, events, model.labels);
    spdlog::info("{} events from {} data packets", events.size(), packets.size());
    return 0;
}

int cmd_mine(const fs::path& events_path, const std::optional<fs::path>& params, const fs::path& out_graphs)
{
    const auto file = load_events(events_path);
    const auto p = params ? load_miner_params(*params) : MinerParams{};
    const auto result = mine(file.events, p);
    save_graphs(out_graphs, build_wireless_context(result.sequences, file.labels));
    spdlog::info("{} dependent pairs, {} retained sequences", result.dependent.size(), result.sequences.size());
    return 0;
}

int cmd_check(const std::optional<fs::path>& wireless, const fs::path& context_dir, const fs::path& out_report,
              const std::optional<fs::path>& events_path, const std::optional<fs::path>& params, CheckerParams cp,
              bool fail_on_anomaly)
{
    if (!wireless && !events_path) throw ConfigError("check needs --wireless or --events");
    const auto context = load_graph_dir(context_dir);
    if (params) cp.miner = load_miner_params(*params);
    std::vector<AnomalyReport> reports;
    if (events_path) {
        const auto file = load_events(*events_path);
        reports = check_stream(file.events, context, cp, file.labels);
    } else {
        reports = check_graphs(load_graphs(*wireless), context);
    }
    save_reports(out_report, reports);
    spdlog::info("{} anomaly reports", reports.size());
    return fail_on_anomaly && !reports.empty() ? 2 : 0;
}

int cmd_vuln(const fs::path& context_dir, const fs::path& channels_path, const std::optional<fs::path>& wireless,
             const std::optional<fs::path>& vocabulary_path, const fs::path& out)
{
    const auto vocabulary = vocabulary_path ? load_vocabulary(*vocabulary_path) : default_vocabulary();
    const auto channels = load_channel_map(channels_path);
    validate_channel_map(channels, vocabulary);
    const auto context = load_graph_dir(context_dir);
    auto chains = discover_chains(context, channels, vocabulary);
    if (wireless) chains = confirm_chains(std::move(chains), context, load_graphs(*wireless));
    const auto stats = channel_stats(chains);
    write_file(out, chains_to_json(chains));
    write_file(sibling(out, ".stats.json"), stats_to_json(stats));
    write_file(sibling(out, ".stats.txt"), stats_to_text(stats));
    std::cout << stats_to_text(stats);
    return 0;
}

int cmd_validate(const std::vector<fs::path>& inputs, const std::optional<fs::path>& vocabulary_path)
{
    std::vector<fs::path> files;
    for (const auto& p : inputs) {
        if (fs::is_directory(p)) {
            std::vector<fs::path> in_dir;
            for (const auto& e : fs::directory_iterator(p))
                if (e.is_regular_file() && e.path().extension() == ".json") in_dir.push_back(e.path());
            std::sort(in_dir.begin(), in_dir.end());
            files.insert(files.end(), in_dir.begin(), in_dir.end());
        } else {
            files.push_back(p);
        }
    }
    const auto vocabulary = vocabulary_path ? load_vocabulary(*vocabulary_path) : default_vocabulary();
    int bad = 0;
    for (const auto& c : tools::validate_graph_files(files, &vocabulary)) {
        if (c.error.empty()) {
            std::cout << "ok   " << c.file.string() << " (" << c.graphs << " graphs)\n";
        } else {
            std::cout << "FAIL " << c.file.string() << ": " << c.error << "\n";
            ++bad;
        }
    }
    return bad == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"wctx: wireless-context security engine for smart homes"};
    app.require_subcommand(1);
    std::optional<std::string> log_level;
    app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off (default: $WCTX_LOG_LEVEL or info)");

    std::function<int()> action;

    // simulate
    auto* sim = app.add_subcommand("simulate", "Generate a labeled packet trace from templates and app rules");
    fs::path s_templates, s_rules, s_config, s_trace, s_truth;
    std::optional<fs::path> s_anomalies;
    std::optional<std::uint64_t> s_seed;
    sim->add_option("--templates", s_templates)->required()->check(CLI::ExistingFile);
    sim->add_option("--rules", s_rules)->required()->check(CLI::ExistingFile);
    sim->add_option("--config", s_config)->required()->check(CLI::ExistingFile);
    sim->add_option("--out-trace", s_trace)->required();
    sim->add_option("--out-truth", s_truth)->required();
    sim->add_option("--out-anomalies", s_anomalies, "default: <truth stem>.anomalies.jsonl");
    sim->add_option("--seed", s_seed, "override the config seed");
    sim->callback([&] { action = [&] { return cmd_simulate(s_templates, s_rules, s_config, s_trace, s_truth, s_anomalies, s_seed); }; });

    // train
    auto* train = app.add_subcommand("train", "Fit the event fingerprint classifier");
    fs::path t_trace, t_labels, t_model;
    ForestParams forest;
    std::optional<std::size_t> t_depth;
    std::size_t t_packets = kDefaultPacketsPerWindow;
    double t_seconds = kDefaultWindowSeconds;
    train->add_option("--trace", t_trace)->required()->check(CLI::ExistingFile);
    train->add_option("--labels", t_labels)->required()->check(CLI::ExistingFile);
    train->add_option("--out-model", t_model)->required();
    train->add_option("--trees", forest.n_trees)->check(CLI::PositiveNumber)->capture_default_str();
    train->add_option("--max-depth", t_depth, "unbounded by default");
    train->add_option("--seed", forest.seed)->capture_default_str();
    train->add_option("--threads", forest.threads, "0 = hardware concurrency")->capture_default_str();
    train->add_option("--packets", t_packets, "packets per window")->capture_default_str();
    train->add_option("--window", t_seconds, "window span in seconds")->capture_default_str();
    train->callback([&] {
        forest.max_depth = t_depth;
        action = [&] { return cmd_train(t_trace, t_labels, t_model, forest, t_packets, t_seconds); };
    });

    // detect
    auto* detect = app.add_subcommand("detect", "Identify events in a trace with a trained model");
    fs::path d_trace, d_model, d_events;
    std::optional<fs::path> d_params;
    detect->add_option("--trace", d_trace)->required()->check(CLI::ExistingFile);
    detect->add_option("--model", d_model)->required()->check(CLI::ExistingFile);
    detect->add_option("--params", d_params)->check(CLI::ExistingFile);
    detect->add_option("--out-events", d_events)->required();
    detect->callback([&] { action = [&] { return cmd_detect(d_trace, d_model, d_params, d_events); }; });

    // mine
    auto* mn = app.add_subcommand("mine", "Mine wireless-context graphs from an event stream");
    fs::path m_events, m_graphs;
    std::optional<fs::path> m_params;
    mn->add_option("--events", m_events)->required()->check(CLI::ExistingFile);
    mn->add_option("--params", m_params)->check(CLI::ExistingFile);
    mn->add_option("--out-graphs", m_graphs)->required();
    mn->callback([&] { action = [&] { return cmd_mine(m_events, m_params, m_graphs); }; });

    // extract-context
    auto* ex = app.add_subcommand("extract-context", "Run or read the description-to-graph extractor and validate its output");
    tools::ExtractRequest er;
    std::optional<std::string> ex_cmd;
    ex->add_option("--descriptions", er.descriptions)->required();
    ex->add_option("--capabilities", er.capabilities)->required();
    ex->add_option("--embeddings", er.embeddings)->required();
    ex->add_option("--out-dir", er.out_dir)->required();
    ex->add_option("--extractor", ex_cmd, "extractor command; default $WCTX_EXTRACTOR, else read --out-dir as is");
    ex->callback([&] {
        action = [&] {
            er.extractor = ex_cmd;
            int bad = 0;
            for (const auto& c : tools::extract_context(er)) {
                if (!c.error.empty()) {
                    std::cerr << "invalid graph " << c.file.string() << ": " << c.error << "\n";
                    ++bad;
                }
            }
            return bad == 0 ? 0 : 1;
        };
    });

    // validate
    auto* val = app.add_subcommand("validate", "Validate graph JSON files or directories");
    std::vector<fs::path> v_inputs;
    std::optional<fs::path> v_vocab;
    val->add_option("inputs", v_inputs)->required()->check(CLI::ExistingPath);
    val->add_option("--vocabulary", v_vocab)->check(CLI::ExistingFile);
    val->callback([&] { action = [&] { return cmd_validate(v_inputs, v_vocab); }; });

    // check
    auto* chk = app.add_subcommand("check", "Compare wireless context with IoT context and report anomalies");
    std::optional<fs::path> c_wireless, c_events, c_params;
    fs::path c_context, c_report;
    CheckerParams cp;
    bool c_fail = false;
    chk->add_option("--wireless", c_wireless)->check(CLI::ExistingFile);
    chk->add_option("--context", c_context)->required()->check(CLI::ExistingDirectory);
    chk->add_option("--out-report", c_report)->required();
    chk->add_option("--events", c_events, "check each occurrence in this event stream instead of aggregate graphs")
        ->check(CLI::ExistingFile);
    chk->add_option("--params", c_params, "miner params for edge timing")->check(CLI::ExistingFile);
    chk->add_option("--join-window", cp.join_window)->capture_default_str();
    chk->add_option("--extra-horizon", cp.extra_horizon)->capture_default_str();
    chk->add_flag("--fail-on-anomaly", c_fail, "exit 2 when any report is produced");
    chk->callback([&] { action = [&] { return cmd_check(c_wireless, c_context, c_report, c_events, c_params, cp, c_fail); }; });

    // vuln
    auto* vl = app.add_subcommand("vuln", "Enumerate inter-app chains through hidden channels");
    fs::path v_context, v_channels, v_out;
    std::optional<fs::path> v_wireless, v_vocabulary;
    vl->add_option("--context", v_context)->required()->check(CLI::ExistingDirectory);
    vl->add_option("--channels", v_channels)->required()->check(CLI::ExistingFile);
    vl->add_option("--wireless", v_wireless)->check(CLI::ExistingFile);
    vl->add_option("--vocabulary", v_vocabulary)->check(CLI::ExistingFile);
    vl->add_option("--out", v_out)->required();
    vl->callback([&] { action = [&] { return cmd_vuln(v_context, v_channels, v_wireless, v_vocabulary, v_out); }; });

    // run
    auto* run = app.add_subcommand("run", "Run the whole pipeline from a JSON config");
    fs::path r_config;
    std::optional<fs::path> r_out, r_model;
    std::optional<std::uint64_t> r_seed;
    bool r_fail = false;
    run->add_option("--config", r_config)->required();
    run->add_option("--out-dir", r_out, "overrides out_dir");
    run->add_option("--model", r_model, "overrides model");
    run->add_option("--seed", r_seed, "overrides the simulation seed");
    run->add_flag("--fail-on-anomaly", r_fail, "exit 2 when any report is produced");
    run->callback([&] {
        action = [&] {
            auto cfg = tools::load_pipeline_config(r_config);
            if (r_out) cfg.out_dir = fs::absolute(*r_out);
            if (r_model) cfg.model = fs::absolute(*r_model);
            if (r_seed) cfg.seed = r_seed;
            const auto summary = tools::run_pipeline(cfg);
            std::cout << "packets " << summary.packets << ", events " << summary.events << ", wireless graphs "
                      << summary.wireless_graphs << ", reports " << summary.reports << ", chains " << summary.chains
                      << "\n";
            return r_fail && summary.reports > 0 ? 2 : 0;
        };
    });

    // scaffold
    auto* sf = app.add_subcommand("scaffold", "Write a bundled scenario as editable data files");
    std::string f_name = "testbed";
    fs::path f_out;
    std::size_t f_samples = 500;
    sf->add_option("--scenario", f_name)->check(CLI::IsMember({"testbed", "home35", "humidity-leak"}))->capture_default_str();
    sf->add_option("--out-dir", f_out)->required();
    sf->add_option("--training-samples", f_samples)->capture_default_str();
    sf->callback([&] {
        action = [&] {
            for (const auto& p : tools::scaffold(f_name, f_out, f_samples)) spdlog::debug("wrote {}", p.string());
            return 0;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        tools::init_logging(log_level);
        return action ? action() : 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
