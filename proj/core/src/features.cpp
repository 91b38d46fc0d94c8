#include "wctx/features.hpp"

#include "wctx/error.hpp"

#include <algorithm>

namespace wctx {

FeatureMatrix featurize(std::span<const PacketRecord> packets, std::size_t columns)
{
    if (packets.empty()) throw PreconditionError("featurize: no packets");
    if (packets.size() > columns)
        throw ShapeError("featurize: " + std::to_string(packets.size()) + " packets exceed the " +
                         std::to_string(columns) + "-column window");
    FeatureMatrix f;
    f.columns = columns;
    f.n_real = packets.size();
    f.values.assign(columns * kFeatureRows, 0.0);
    for (std::size_t j = 0; j < packets.size(); ++j) {
        const auto& p = packets[j];
        double* col = f.values.data() + j * kFeatureRows;
        col[0] = static_cast<double>(p.size);
        col[1] = p.direction == Direction::HubToDevice ? 1.0 : 0.0;
        col[2] = j == 0 ? 0.0 : std::max(0.0, p.ts - packets[j - 1].ts);
        col[3] = static_cast<double>(p.layer);
    }
    return f;
}

std::size_t window_length(std::span<const PacketRecord> packets, std::size_t start, std::size_t max_packets,
                          double span)
{
    if (start >= packets.size()) return 0;
    const double limit = packets[start].ts + span;
    std::size_t n = 0;
    while (n < max_packets && start + n < packets.size() && packets[start + n].ts <= limit) ++n;
    return n;
}

TrainingSet build_training_set(std::span<const PacketRecord> packets, std::span<const LabelRecord> labels,
                               std::size_t max_packets, double span)
{
    TrainingSet set;
    std::map<EventId, std::vector<std::size_t>> counts;
    constexpr double eps = 1e-9;
    for (const auto& label : labels) {
        auto first = std::lower_bound(packets.begin(), packets.end(), label.t_start - eps,
                                      [](const PacketRecord& p, double t) { return p.ts < t; });
        const auto start = static_cast<std::size_t>(first - packets.begin());
        if (first == packets.end() || first->ts > label.t_end + eps) {
            ++set.skipped;
            continue;
        }
        auto last = std::upper_bound(first, packets.end(), label.t_end + eps,
                                     [](double t, const PacketRecord& p) { return t < p.ts; });
        counts[label.event].push_back(static_cast<std::size_t>(last - first));

        const auto n = window_length(packets, start, max_packets, span);
        set.samples.push_back(featurize(packets.subspan(start, n), max_packets));
        set.labels.push_back(label.event);
    }
    for (auto& [event, c] : counts) {
        std::sort(c.begin(), c.end());
        set.step_counts[event] = std::max<std::size_t>(1, c[(c.size() - 1) / 2]);
    }
    return set;
}

} // namespace wctx
