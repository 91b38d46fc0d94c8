#include "wctx/detector.hpp"

#include "json_util.hpp"
#include "wctx/error.hpp"

#include <algorithm>

namespace wctx {

using detail::json;
using detail::ojson;

DetectorParams resolve_params(const DetectorParams& params, const Classifier& classifier)
{
    DetectorParams p = params;
    if (!(p.threshold > 0.0 && p.threshold < 1.0)) throw ValidationError("threshold must be in (0, 1)");
    if (!(p.window_seconds > 0.0)) throw ValidationError("window_seconds must be > 0");
    if (p.packets_per_window == 0) throw ValidationError("packets_per_window must be >= 1");
    if (p.packets_per_window * kFeatureRows != classifier.feature_dim())
        throw ValidationError("packets_per_window " + std::to_string(p.packets_per_window) +
                              " does not match the model's " + std::to_string(classifier.packets_per_window()));
    for (auto c : classifier.classes()) {
        if (p.step_counts.count(c)) continue;
        auto it = classifier.step_counts.find(c);
        p.step_counts[c] = it == classifier.step_counts.end() ? 1 : it->second;
    }
    for (const auto& [e, n] : p.step_counts)
        if (n < 1) throw ValidationError("step count for event " + std::to_string(e.value) + " must be >= 1");
    return p;
}

EventStream detect_events(std::span<const PacketRecord> packets, const Classifier& classifier,
                          const DetectorParams& params)
{
    EventStream out;
    if (packets.empty()) return out;
    const auto p = resolve_params(params, classifier);
    const auto& classes = classifier.classes();

    std::size_t i = 0;
    while (i < packets.size()) {
        const auto n = window_length(packets, i, p.packets_per_window, p.window_seconds);
        const auto f = featurize(packets.subspan(i, n), p.packets_per_window);
        const auto proba = classifier.proba_vector(f.values);
        const auto best = static_cast<std::size_t>(std::max_element(proba.begin(), proba.end()) - proba.begin());
        if (proba[best] > p.threshold) {
            const EventId e = classes[best];
            const std::size_t step = p.unit_step ? 1 : p.step_counts.at(e);
            const std::size_t span = std::min(step, packets.size() - i);
            out.push_back(DetectedEvent{e, packets[i].ts, proba[best], i, i + span - 1});
            i += step;
        } else {
            ++i;
        }
    }
    return out;
}

std::string detector_params_to_json(const DetectorParams& params)
{
    ojson j;
    j["packets_per_window"] = params.packets_per_window;
    j["window_seconds"] = params.window_seconds;
    j["threshold"] = params.threshold;
    if (!params.step_counts.empty()) {
        ojson steps = ojson::object();
        for (const auto& [e, n] : params.step_counts) steps[std::to_string(e.value)] = n;
        j["step_counts"] = steps;
    }
    if (params.unit_step) j["unit_step"] = true;
    return j.dump(2) + "\n";
}

DetectorParams detector_params_from_json(const std::string& text)
{
    DetectorParams p;
    try {
        const auto j = json::parse(text);
        if (!j.is_object()) throw ParseError("detector params must be a JSON object");
        p.packets_per_window = j.value("packets_per_window", p.packets_per_window);
        p.window_seconds = j.value("window_seconds", p.window_seconds);
        p.threshold = j.value("threshold", p.threshold);
        p.unit_step = j.value("unit_step", false);
        if (j.contains("step_counts")) {
            for (const auto& [k, v] : j["step_counts"].items()) {
                const auto id = std::stoul(k);
                if (id == 0) throw ParseError("step_counts key '" + k + "' is not an event id");
                p.step_counts[EventId(static_cast<std::uint32_t>(id))] = v.get<std::size_t>();
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("detector params: ") + e.what());
    } catch (const std::invalid_argument&) {
        throw ParseError("detector params: step_counts keys must be event ids");
    }
    if (!(p.threshold > 0.0 && p.threshold < 1.0)) throw ValidationError("threshold must be in (0, 1)");
    if (!(p.window_seconds > 0.0)) throw ValidationError("window_seconds must be > 0");
    return p;
}

DetectorParams load_detector_params(const std::filesystem::path& path)
{
    return detector_params_from_json(read_file(path));
}

void save_detector_params(const std::filesystem::path& path, const DetectorParams& params)
{
    write_file(path, detector_params_to_json(params));
}

} // namespace wctx
