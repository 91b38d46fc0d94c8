#pragma once

#include "wctx/io.hpp"
#include "wctx/sim.hpp"
#include "wctx/types.hpp"

#include <cstddef>
#include <map>
#include <span>
#include <vector>

namespace wctx {

// Feature rows, in order.
inline constexpr std::size_t kFeatureRows = 4;
enum class Feature : std::size_t { Size = 0, Direction = 1, Interval = 2, Layer = 3 };

// Zero-padded fingerprint of up to `columns` packets, flattened packet-major:
// values[j * kFeatureRows + row].
struct FeatureMatrix {
    std::size_t columns = kDefaultPacketsPerWindow;
    std::size_t n_real = 0;
    std::vector<double> values;

    double at(Feature row, std::size_t column) const { return values[column * kFeatureRows + static_cast<std::size_t>(row)]; }
    std::size_t dim() const noexcept { return values.size(); }
    bool operator==(const FeatureMatrix&) const = default;
};

// Throws PreconditionError on empty input, ShapeError when more than `columns` packets are given.
FeatureMatrix featurize(std::span<const PacketRecord> packets, std::size_t columns = kDefaultPacketsPerWindow);

// Packets in the window opening at `start`: at most `max_packets`, none later than ts[start] + span.
std::size_t window_length(std::span<const PacketRecord> packets, std::size_t start, std::size_t max_packets,
                          double span);

struct TrainingSet {
    std::vector<FeatureMatrix> samples;
    std::vector<EventId> labels;
    std::map<EventId, std::size_t> step_counts;  // median packets per occurrence
    std::size_t skipped = 0;                     // labels with no packets in the trace
};

// One sample per label: the detection window that opens at the label's first packet.
// `packets` must already be filtered.
TrainingSet build_training_set(std::span<const PacketRecord> packets, std::span<const LabelRecord> labels,
                               std::size_t max_packets = kDefaultPacketsPerWindow,
                               double span = kDefaultWindowSeconds);

} // namespace wctx
