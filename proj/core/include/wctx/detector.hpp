#pragma once

#include "wctx/forest.hpp"
#include "wctx/types.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <string>

namespace wctx {

struct DetectorParams {
    std::size_t packets_per_window = kDefaultPacketsPerWindow;
    double window_seconds = kDefaultWindowSeconds;
    double threshold = 0.7;
    std::map<EventId, std::size_t> step_counts;  // empty: taken from the model
    bool unit_step = false;                      // always advance by one packet
};

// Fills missing step counts from the classifier and checks the invariants.
// Throws ValidationError.
DetectorParams resolve_params(const DetectorParams& params, const Classifier& classifier);

// `packets` must be filtered (data packets only) and time-ordered.
EventStream detect_events(std::span<const PacketRecord> packets, const Classifier& classifier,
                          const DetectorParams& params);

// {"packets_per_window", "window_seconds", "threshold", "step_counts"?: {"<id>": n}}
std::string detector_params_to_json(const DetectorParams& params);
DetectorParams detector_params_from_json(const std::string& text);
DetectorParams load_detector_params(const std::filesystem::path& path);
void save_detector_params(const std::filesystem::path& path, const DetectorParams& params);

} // namespace wctx
