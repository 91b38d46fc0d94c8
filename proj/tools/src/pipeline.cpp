#include "wctx_tools/pipeline.hpp"

#include <wctx/catalog.hpp>
#include <wctx/error.hpp>
#include <wctx/io.hpp>
#include <wctx/sim_io.hpp>
#include <wctx/trace.hpp>
#include <wctx/vuln.hpp>

#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <set>

namespace wctx::tools {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

void init_logging(const std::optional<std::string>& level)
{
    auto logger = spdlog::stderr_color_mt("wctx");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    std::string name = level.value_or("");
    if (name.empty())
        if (const char* env = std::getenv("WCTX_LOG_LEVEL")) name = env;
    spdlog::set_level(name.empty() ? spdlog::level::info : spdlog::level::from_str(name));
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p)
{
    const fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::optional<fs::path> path_field(const json& j, const char* key, const fs::path& base)
{
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return resolve(base, j[key].get<std::string>());
}

ForestParams forest_from(const json& j, ForestParams p)
{
    p.n_trees = j.value("n_trees", p.n_trees);
    if (j.contains("max_depth") && !j["max_depth"].is_null()) p.max_depth = j["max_depth"].get<std::size_t>();
    p.seed = j.value("seed", p.seed);
    p.threads = j.value("threads", p.threads);
    if (p.n_trees == 0) throw ConfigError("forest.n_trees must be >= 1");
    return p;
}

} // namespace

PipelineConfig pipeline_config_from_json(const std::string& text, const fs::path& base_dir)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("pipeline config: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("pipeline config must be a JSON object");
    static const std::set<std::string> known{"templates", "rules",   "sim_config", "trace",   "model",
                                             "training",  "forest",  "detector",   "miner",   "checker",
                                             "context_dir", "channels", "vocabulary", "out_dir", "seed"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ConfigError("pipeline config: unknown key '" + key + "'");

    try {
        PipelineConfig c;
        c.templates = path_field(j, "templates", base_dir);
        c.rules = path_field(j, "rules", base_dir);
        c.sim_config = path_field(j, "sim_config", base_dir);
        c.trace = path_field(j, "trace", base_dir);
        c.model = path_field(j, "model", base_dir);
        c.context_dir = path_field(j, "context_dir", base_dir);
        c.channels = path_field(j, "channels", base_dir);
        c.vocabulary = path_field(j, "vocabulary", base_dir);
        c.out_dir = resolve(base_dir, j.value("out_dir", std::string("out")));
        if (j.contains("seed") && !j["seed"].is_null()) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("training")) {
            const auto& t = j["training"];
            c.training.trace = path_field(t, "trace", base_dir);
            c.training.labels = path_field(t, "labels", base_dir);
            c.training.samples = t.value("samples", c.training.samples);
            c.training.spacing = t.value("spacing", c.training.spacing);
            c.training.seed = t.value("seed", c.training.seed);
        }
        if (j.contains("forest")) c.forest = forest_from(j["forest"], c.forest);
        if (j.contains("detector")) c.detector = detector_params_from_json(j["detector"].dump());
        if (j.contains("miner")) c.miner = miner_params_from_json(j["miner"].dump());
        if (j.contains("checker")) {
            const auto& k = j["checker"];
            c.checker.join_window = k.value("join_window", c.checker.join_window);
            c.checker.extra_horizon = k.value("extra_horizon", c.checker.extra_horizon);
            c.check_mode = k.value("mode", c.check_mode);
            if (c.check_mode != "stream" && c.check_mode != "graphs")
                throw ConfigError("checker.mode must be 'stream' or 'graphs'");
        }
        c.checker.miner = c.miner;
        return c;
    } catch (const json::exception& e) {
        throw ParseError(std::string("pipeline config: ") + e.what());
    }
}

PipelineConfig load_pipeline_config(const fs::path& path)
{
    if (!fs::exists(path)) throw ConfigError("missing pipeline config: " + path.string());
    return pipeline_config_from_json(read_file(path), fs::absolute(path).parent_path());
}

void validate_config_paths(const PipelineConfig& c)
{
    auto need = [](const std::optional<fs::path>& p, const char* what) {
        if (p && !fs::exists(*p)) throw ConfigError(std::string("missing ") + what + ": " + p->string());
    };
    need(c.templates, "templates file");
    need(c.rules, "rules file");
    need(c.sim_config, "simulation config");
    need(c.trace, "trace file");
    need(c.model, "model file");
    need(c.training.trace, "training trace");
    need(c.training.labels, "training labels");
    need(c.context_dir, "context directory");
    need(c.channels, "channel map");
    need(c.vocabulary, "vocabulary file");

    if (c.sim_config && (!c.templates || !c.rules))
        throw ConfigError("simulation needs both 'templates' and 'rules'");
    if (!c.sim_config && !c.trace) throw ConfigError("either 'sim_config' or 'trace' is required");
    if (!c.model) {
        const bool recorded = c.training.trace && c.training.labels;
        if (!recorded && c.training.samples == 0)
            throw ConfigError("no 'model' given and 'training' has neither trace+labels nor samples");
        if (!recorded && !c.templates) throw ConfigError("simulated training needs 'templates'");
    }
}

Classifier train_model(const std::vector<PacketRecord>& trace, std::span<const LabelRecord> labels,
                       const ForestParams& params, std::size_t packets_per_window, double window_seconds)
{
    const auto packets = filter_unrelated(trace);
    auto set = build_training_set(packets, labels, packets_per_window, window_seconds);
    if (set.skipped > 0) spdlog::warn("{} labeled occurrences had no packets and were skipped", set.skipped);
    auto model = Classifier::train(set.samples, set.labels, params);
    model.step_counts = set.step_counts;
    for (const auto& l : labels)
        if (l.label && !l.label->empty()) model.labels.emplace(l.event, *l.label);
    return model;
}

RunSummary run_pipeline(const PipelineConfig& config)
{
    validate_config_paths(config);
    RunSummary summary;
    const auto& out = config.out_dir;
    fs::create_directories(out);
    auto artifact = [&](const char* name) {
        summary.artifacts.push_back(out / name);
        return out / name;
    };

    const auto vocabulary = config.vocabulary ? load_vocabulary(*config.vocabulary) : default_vocabulary();
    std::vector<EventTemplate> templates;
    if (config.templates) templates = load_templates(*config.templates);

    std::vector<PacketRecord> trace;
    if (config.sim_config) {
        auto sc = load_sim_config(*config.sim_config);
        if (config.seed) sc.seed = *config.seed;
        const auto rules = load_rules(*config.rules);
        spdlog::info("simulating {:.0f} s with {} rules", sc.duration, rules.size());
        auto sim = simulate(templates, rules, sc);
        save_trace(artifact("trace.jsonl"), sim.trace);
        save_truth(artifact("truth.jsonl"), sim.truth);
        save_anomaly_truth(artifact("anomalies.jsonl"), sim.anomaly_truth);
        trace = std::move(sim.trace);
    } else {
        trace = load_trace(*config.trace);
    }
    summary.packets = trace.size();

    Classifier model;
    if (config.model) {
        model = Classifier::load(*config.model);
    } else {
        std::vector<PacketRecord> train_trace;
        std::vector<LabelRecord> labels;
        if (config.training.trace && config.training.labels) {
            train_trace = load_trace(*config.training.trace);
            labels = load_labels(*config.training.labels);
        } else {
            const auto tc = training_config(templates, config.training.samples, config.training.spacing,
                                            config.training.seed);
            auto sim = simulate(templates, {}, tc);
            labels = truth_labels(sim.truth);
            save_trace(artifact("train_trace.jsonl"), sim.trace);
            save_labels(artifact("train_labels.jsonl"), labels);
            train_trace = std::move(sim.trace);
        }
        spdlog::info("training {} trees on {} labeled occurrences", config.forest.n_trees, labels.size());
        model = train_model(train_trace, labels, config.forest, config.detector.packets_per_window,
                            config.detector.window_seconds);
        model.save(artifact("model.json"));
    }

    const auto packets = filter_unrelated(trace);
    const auto events = detect_events(packets, model, config.detector);
    save_events(artifact("events.jsonl"), events, model.labels);
    summary.events = events.size();
    spdlog::info("detected {} events from {} data packets", events.size(), packets.size());

    const auto mined = mine(events, config.miner);
    const auto wireless = build_wireless_context(mined.sequences, model.labels);
    save_graphs(artifact("wireless_graphs.json"), wireless);
    summary.wireless_graphs = wireless.size();
    if (!mined.concatenated.cycles.empty())
        spdlog::warn("{} cyclic dependency chains were left unmerged", mined.concatenated.cycles.size());

    if (config.context_dir) {
        const auto context = load_graph_dir(*config.context_dir);
        const auto reports = config.check_mode == "stream" ? check_stream(events, context, config.checker, model.labels)
                                                           : check_graphs(wireless, context);
        save_reports(artifact("report.jsonl"), reports);
        summary.reports = reports.size();
        spdlog::info("{} context graphs, {} anomaly reports", context.size(), reports.size());

        if (config.channels) {
            const auto channels = load_channel_map(*config.channels);
            validate_channel_map(channels, vocabulary);
            const auto chains = confirm_chains(discover_chains(context, channels, vocabulary), context, wireless);
            const auto stats = channel_stats(chains);
            write_file(artifact("chains.json"), chains_to_json(chains));
            write_file(artifact("channel_stats.json"), stats_to_json(stats));
            write_file(artifact("channel_stats.txt"), stats_to_text(stats));
            summary.chains = chains.size();
        }
    }

    ojson s;
    s["packets"] = summary.packets;
    s["events"] = summary.events;
    s["wireless_graphs"] = summary.wireless_graphs;
    s["reports"] = summary.reports;
    s["chains"] = summary.chains;
    ojson files = ojson::array();
    for (const auto& a : summary.artifacts) files.push_back(a.filename().string());
    s["artifacts"] = files;
    write_file(artifact("summary.json"), s.dump(2) + "\n");
    return summary;
}

std::vector<fs::path> scaffold(const std::string& name, const fs::path& dir, std::size_t training_samples)
{
    Scenario sc;
    if (name == "testbed") sc = testbed_scenario();
    else if (name == "home35") sc = home35_scenario();
    else if (name == "humidity-leak") sc = humidity_leak_scenario();
    else throw ConfigError("unknown scenario '" + name + "' (testbed, home35, humidity-leak)");

    std::vector<fs::path> written;
    auto put = [&](const fs::path& rel) {
        written.push_back(dir / rel);
        return dir / rel;
    };
    save_vocabulary(put("vocabulary.json"), *sc.vocabulary);
    save_channel_map(put("channels.json"), default_channel_map());
    save_templates(put("templates.json"), sc.templates);
    save_rules(put("rules.json"), sc.rules);
    save_sim_config(put("sim_config.json"), sc.config);
    for (const auto& g : context_graphs(sc.rules, sc.registry)) save_graph(put(fs::path("context") / (g.graph_id + ".json")), g);

    ojson p;
    p["templates"] = "templates.json";
    p["rules"] = "rules.json";
    p["sim_config"] = "sim_config.json";
    p["training"] = {{"samples", training_samples}, {"spacing", 6.0}, {"seed", 7}};
    p["forest"] = {{"n_trees", 100}, {"max_depth", nullptr}, {"seed", 1}};
    p["detector"] = ojson::parse(detector_params_to_json(DetectorParams{}));
    p["miner"] = ojson::parse(miner_params_to_json(MinerParams{}));
    p["checker"] = {{"mode", "stream"}, {"join_window", CheckerParams{}.join_window},
                    {"extra_horizon", CheckerParams{}.extra_horizon}};
    p["context_dir"] = "context";
    p["channels"] = "channels.json";
    p["vocabulary"] = "vocabulary.json";
    p["out_dir"] = "out";
    write_file(put("pipeline.json"), p.dump(2) + "\n");
    return written;
}

std::vector<GraphCheck> validate_graph_files(const std::vector<fs::path>& paths, const CapabilityVocabulary* vocabulary)
{
    std::vector<GraphCheck> out;
    for (const auto& path : paths) {
        GraphCheck c{path, 0, {}};
        try {
            const auto graphs = load_graphs(path);
            for (const auto& g : graphs) {
                validate_graph(g);
                if (!vocabulary) continue;
                for (const auto& n : g.nodes) {
                    if (n.condition || n.label.empty()) continue;
                    auto parts = split_label(n.label);
                    vocabulary->resolve(parts ? parts->second : n.label);
                }
            }
            c.graphs = graphs.size();
        } catch (const Error& e) {
            c.error = e.what();
        }
        out.push_back(std::move(c));
    }
    return out;
}

namespace {

std::string shell_quote(const std::string& s)
{
    std::string q = "'";
    for (char ch : s) q += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
    return q + "'";
}

} // namespace

std::vector<GraphCheck> extract_context(const ExtractRequest& r)
{
    std::optional<std::string> command = r.extractor;
    if (!command)
        if (const char* env = std::getenv("WCTX_EXTRACTOR"); env && *env) command = env;

    if (command) {
        for (const auto& p : {r.descriptions, r.capabilities, r.embeddings})
            if (!fs::exists(p)) throw ConfigError("missing extractor input: " + p.string());
        fs::create_directories(r.out_dir);
        const std::string cmd = *command + " --descriptions " + shell_quote(r.descriptions.string()) +
                                " --capabilities " + shell_quote(r.capabilities.string()) + " --embeddings " +
                                shell_quote(r.embeddings.string()) + " --out-dir " + shell_quote(r.out_dir.string());
        spdlog::info("running extractor: {}", cmd);
        const int rc = std::system(cmd.c_str());
        if (rc != 0) throw Error("extractor exited with status " + std::to_string(rc));
    } else if (!fs::is_directory(r.out_dir)) {
        throw ConfigError("no extractor configured (--extractor or WCTX_EXTRACTOR) and no existing output in " +
                          r.out_dir.string());
    }

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(r.out_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ConfigError("extractor output directory has no graph files: " + r.out_dir.string());
    const auto vocabulary = fs::exists(r.capabilities) ? load_vocabulary(r.capabilities) : default_vocabulary();
    return validate_graph_files(files, &vocabulary);
}

} // namespace wctx::tools
