#pragma once

#include "wctx/graph.hpp"
#include "wctx/io.hpp"
#include "wctx/types.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace wctx {

struct MinerParams {
    double tau = 0.1;
    double max_lag = 10.0;
    std::size_t min_support = 5;
    double eps_add = 0.3;
};

void validate_miner_params(const MinerParams& params);  // throws ValidationError

struct PairStats {
    EventId a;
    EventId b;
    std::vector<double> samples;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation (n - 1)
    std::size_t support = 0;
};

// Pairs every a with the first later, unconsumed b within max_lag, for all ordered
// type pairs a != b. Pairs below min_support are dropped. Sorted by (a, b).
std::vector<PairStats> collect_pair_stats(const EventStream& events, const MinerParams& params);

// sigma < tau. Throws InconclusiveError when support < min_support.
bool test_dependence(const PairStats& stats, double tau, std::size_t min_support = 2);

struct DependencySequence {
    std::vector<EventId> events;
    std::vector<double> mean_gaps;
    std::uint64_t count = 0;

    bool operator==(const DependencySequence&) const = default;
};

struct ConcatResult {
    std::vector<DependencySequence> sequences;      // maximal, sorted by events
    std::vector<std::vector<EventId>> cycles;       // merges skipped for repeating an event
};

// Joins sequences that share an end/start event while mu stays additive, to a fixed point.
ConcatResult concatenate(std::span<const PairStats> dependent, const MinerParams& params);
// Same closure, seeded with `sequences` in addition to the pairs themselves.
ConcatResult extend(std::span<const DependencySequence> sequences, std::span<const PairStats> dependent,
                    const MinerParams& params);

// Counts every contiguous subsequence of the given sequences in `events` (gaps within
// mu +- 3 tau, earliest occurrence first, no event reused within one subsequence) and keeps
// those whose standalone count reaches min_support. The standalone count subtracts the
// standalone counts of retained longer sequences containing it (in order, gaps allowed).
std::vector<DependencySequence> count_subsequences(std::span<const DependencySequence> sequences,
                                                   const EventStream& events, const MinerParams& params);

// Occurrences of one sequence, as index tuples into `events`.
std::vector<std::vector<std::size_t>> find_occurrences(const std::vector<EventId>& sequence,
                                                       const std::vector<double>& mean_gaps,
                                                       const EventStream& events, double tolerance);

std::vector<EventTransitionGraph> build_wireless_context(std::span<const DependencySequence> sequences,
                                                         const LabelMap& labels = {});

struct MineResult {
    std::vector<PairStats> pairs;       // support >= min_support
    std::vector<PairStats> dependent;
    ConcatResult concatenated;
    std::vector<DependencySequence> sequences;  // retained, with standalone counts
};

MineResult mine(const EventStream& events, const MinerParams& params = {});

// {"tau", "max_lag", "min_support", "eps_add"}
std::string miner_params_to_json(const MinerParams& params);
MinerParams miner_params_from_json(const std::string& text);
MinerParams load_miner_params(const std::filesystem::path& path);
void save_miner_params(const std::filesystem::path& path, const MinerParams& params);

} // namespace wctx
