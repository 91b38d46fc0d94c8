#include "wctx/miner.hpp"

#include "json_util.hpp"
#include "wctx/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace wctx {

using detail::json;
using detail::ojson;

void validate_miner_params(const MinerParams& p)
{
    if (!(p.tau > 0.0)) throw ValidationError("tau must be > 0");
    if (!(p.max_lag > p.tau)) throw ValidationError("max_lag must exceed tau");
    if (p.min_support < 2) throw ValidationError("min_support must be >= 2");
    if (!(p.eps_add > 0.0)) throw ValidationError("eps_add must be > 0");
}

namespace {

std::map<EventId, std::vector<std::size_t>> positions(const EventStream& events)
{
    std::map<EventId, std::vector<std::size_t>> pos;
    for (std::size_t i = 0; i < events.size(); ++i) pos[events[i].event].push_back(i);
    return pos;
}

void fill_stats(PairStats& s)
{
    s.support = s.samples.size();
    if (s.samples.empty()) return;
    const double n = static_cast<double>(s.samples.size());
    s.mean = std::accumulate(s.samples.begin(), s.samples.end(), 0.0) / n;
    if (s.samples.size() < 2) {
        s.stddev = 0.0;
        return;
    }
    double ss = 0.0;
    for (double v : s.samples) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
}

} // namespace

std::vector<PairStats> collect_pair_stats(const EventStream& events, const MinerParams& params)
{
    validate_miner_params(params);
    const auto pos = positions(events);
    std::vector<PairStats> out;
    for (const auto& [a, as] : pos) {
        for (const auto& [b, bs] : pos) {
            if (a == b) continue;
            PairStats s;
            s.a = a;
            s.b = b;
            // Every b before the cursor is consumed or not later than the current a.
            std::size_t j = 0;
            for (auto ia : as) {
                const double ta = events[ia].ts;
                while (j < bs.size() && events[bs[j]].ts <= ta) ++j;
                if (j == bs.size()) break;
                const double dt = events[bs[j]].ts - ta;
                if (dt <= params.max_lag) {
                    s.samples.push_back(dt);
                    ++j;
                }
            }
            if (s.samples.size() < params.min_support) continue;
            fill_stats(s);
            out.push_back(std::move(s));
        }
    }
    return out;
}

bool test_dependence(const PairStats& stats, double tau, std::size_t min_support)
{
    if (stats.support < min_support)
        throw InconclusiveError("pair (" + std::to_string(stats.a.value) + ", " + std::to_string(stats.b.value) +
                                ") has support " + std::to_string(stats.support) + " < " + std::to_string(min_support));
    return stats.stddev < tau;
}

namespace {

struct PairIndex {
    std::map<std::pair<EventId, EventId>, double> mu;

    explicit PairIndex(std::span<const PairStats> pairs)
    {
        for (const auto& p : pairs) mu[{p.a, p.b}] = p.mean;
    }
    const double* find(EventId a, EventId b) const
    {
        auto it = mu.find({a, b});
        return it == mu.end() ? nullptr : &it->second;
    }
};

// Order-preserving, gaps allowed: [a,c] is inside [a,b,c].
bool contains_subsequence(const std::vector<EventId>& outer, const std::vector<EventId>& inner)
{
    if (inner.size() > outer.size()) return false;
    std::size_t k = 0;
    for (auto e : outer)
        if (k < inner.size() && e == inner[k]) ++k;
    return k == inner.size();
}

ConcatResult closure(std::vector<DependencySequence> seed, const PairIndex& index, const MinerParams& params)
{
    std::map<std::vector<EventId>, DependencySequence> all;
    for (auto& s : seed) all.emplace(s.events, std::move(s));
    std::set<std::vector<EventId>> cycles;

    std::vector<std::vector<EventId>> frontier;
    for (const auto& [k, v] : all) frontier.push_back(k);
    while (!frontier.empty()) {
        std::vector<std::vector<EventId>> next;
        // Pair every new sequence with every known one, in both orders.
        const auto snapshot = all;
        for (const auto& key : frontier) {
            const auto& x = snapshot.at(key);
            for (const auto& [ykey, y] : snapshot) {
                for (int order = 0; order < 2; ++order) {
                    const auto& left = order == 0 ? x : y;
                    const auto& right = order == 0 ? y : x;
                    if (left.events.back() != right.events.front()) continue;
                    std::vector<EventId> events = left.events;
                    events.insert(events.end(), right.events.begin() + 1, right.events.end());
                    if (all.count(events)) continue;
                    std::set<EventId> distinct(events.begin(), events.end());
                    if (distinct.size() != events.size()) {
                        cycles.insert(events);
                        continue;
                    }
                    const double* direct = index.find(events.front(), events.back());
                    if (!direct) continue;
                    std::vector<double> gaps = left.mean_gaps;
                    gaps.insert(gaps.end(), right.mean_gaps.begin(), right.mean_gaps.end());
                    const double total = std::accumulate(gaps.begin(), gaps.end(), 0.0);
                    if (std::abs(*direct - total) > params.eps_add) continue;
                    all.emplace(events, DependencySequence{events, gaps, 0});
                    next.push_back(events);
                }
            }
        }
        frontier = std::move(next);
    }

    ConcatResult result;
    for (const auto& [key, seq] : all) {
        const bool covered = std::any_of(all.begin(), all.end(), [&](const auto& other) {
            return other.first.size() > key.size() && contains_subsequence(other.first, key);
        });
        if (!covered) result.sequences.push_back(seq);
    }
    result.cycles.assign(cycles.begin(), cycles.end());
    return result;
}

std::vector<DependencySequence> pair_sequences(std::span<const PairStats> dependent)
{
    std::vector<DependencySequence> out;
    for (const auto& p : dependent) out.push_back({{p.a, p.b}, {p.mean}, 0});
    return out;
}

} // namespace

ConcatResult concatenate(std::span<const PairStats> dependent, const MinerParams& params)
{
    return closure(pair_sequences(dependent), PairIndex(dependent), params);
}

ConcatResult extend(std::span<const DependencySequence> sequences, std::span<const PairStats> dependent,
                    const MinerParams& params)
{
    auto seed = pair_sequences(dependent);
    for (const auto& s : sequences) seed.push_back({s.events, s.mean_gaps, 0});
    return closure(std::move(seed), PairIndex(dependent), params);
}

std::vector<std::vector<std::size_t>> find_occurrences(const std::vector<EventId>& sequence,
                                                       const std::vector<double>& mean_gaps,
                                                       const EventStream& events, double tolerance)
{
    std::vector<std::vector<std::size_t>> found;
    if (sequence.empty() || mean_gaps.size() + 1 != sequence.size()) return found;
    const auto pos = positions(events);
    std::vector<const std::vector<std::size_t>*> lists;
    for (auto e : sequence) {
        auto it = pos.find(e);
        if (it == pos.end()) return found;
        lists.push_back(&it->second);
    }
    std::vector<bool> used(events.size(), false);
    std::vector<std::size_t> path(sequence.size());

    // Earliest completion first: depth-first over candidates in stream order.
    auto search = [&](auto&& self, std::size_t level) -> bool {
        if (level == sequence.size()) return true;
        const auto prev = path[level - 1];
        const double lo = events[prev].ts + mean_gaps[level - 1] - tolerance;
        const double hi = events[prev].ts + mean_gaps[level - 1] + tolerance;
        const auto& list = *lists[level];
        auto it = std::lower_bound(list.begin(), list.end(), lo,
                                   [&](std::size_t k, double t) { return events[k].ts < t; });
        for (; it != list.end() && events[*it].ts <= hi; ++it) {
            if (*it <= prev || used[*it]) continue;
            path[level] = *it;
            if (self(self, level + 1)) return true;
        }
        return false;
    };

    for (auto start : *lists[0]) {
        if (used[start]) continue;
        path[0] = start;
        if (!search(search, 1)) continue;
        for (auto k : path) used[k] = true;
        found.push_back(path);
    }
    return found;
}

std::vector<DependencySequence> count_subsequences(std::span<const DependencySequence> sequences,
                                                   const EventStream& events, const MinerParams& params)
{
    std::map<std::vector<EventId>, std::vector<double>> candidates;
    for (const auto& s : sequences) {
        for (std::size_t i = 0; i + 1 < s.events.size(); ++i) {
            for (std::size_t j = i + 2; j <= s.events.size(); ++j) {
                std::vector<EventId> sub(s.events.begin() + static_cast<std::ptrdiff_t>(i),
                                         s.events.begin() + static_cast<std::ptrdiff_t>(j));
                std::vector<double> gaps(s.mean_gaps.begin() + static_cast<std::ptrdiff_t>(i),
                                         s.mean_gaps.begin() + static_cast<std::ptrdiff_t>(j - 1));
                candidates.emplace(std::move(sub), std::move(gaps));
            }
        }
    }

    std::vector<const std::pair<const std::vector<EventId>, std::vector<double>>*> order;
    for (const auto& c : candidates) order.push_back(&c);
    std::stable_sort(order.begin(), order.end(),
                     [](const auto* x, const auto* y) { return x->first.size() > y->first.size(); });

    const double tolerance = 3.0 * params.tau;
    std::vector<DependencySequence> retained;
    for (const auto* c : order) {
        const auto occurrences = find_occurrences(c->first, c->second, events, tolerance);
        std::int64_t standalone = static_cast<std::int64_t>(occurrences.size());
        for (const auto& r : retained)
            if (r.events.size() > c->first.size() && contains_subsequence(r.events, c->first))
                standalone -= static_cast<std::int64_t>(r.count);
        if (standalone >= static_cast<std::int64_t>(params.min_support))
            retained.push_back({c->first, c->second, static_cast<std::uint64_t>(standalone)});
    }
    std::sort(retained.begin(), retained.end(),
              [](const DependencySequence& x, const DependencySequence& y) { return x.events < y.events; });
    return retained;
}

std::vector<EventTransitionGraph> build_wireless_context(std::span<const DependencySequence> sequences,
                                                         const LabelMap& labels)
{
    std::map<std::vector<EventId>, std::uint64_t> unique;
    for (const auto& s : sequences) {
        if (s.events.size() < 2) continue;
        unique[s.events] += s.count;
    }
    std::vector<EventTransitionGraph> out;
    std::size_t k = 0;
    for (const auto& [events, count] : unique) {
        std::vector<std::string> names;
        for (auto e : events) {
            auto it = labels.find(e);
            names.push_back(it == labels.end() ? std::string{} : it->second);
        }
        char id[32];
        std::snprintf(id, sizeof id, "wireless_%03zu", ++k);
        auto g = make_path_graph(id, GraphSource::WirelessContext, events, names);
        g.occurrence_count = count;
        out.push_back(std::move(g));
    }
    return out;
}

MineResult mine(const EventStream& events, const MinerParams& params)
{
    MineResult r;
    r.pairs = collect_pair_stats(events, params);
    for (const auto& p : r.pairs)
        if (test_dependence(p, params.tau, params.min_support)) r.dependent.push_back(p);
    r.concatenated = concatenate(r.dependent, params);
    r.sequences = count_subsequences(r.concatenated.sequences, events, params);
    return r;
}

std::string miner_params_to_json(const MinerParams& p)
{
    ojson j;
    j["tau"] = p.tau;
    j["max_lag"] = p.max_lag;
    j["min_support"] = p.min_support;
    j["eps_add"] = p.eps_add;
    return j.dump(2) + "\n";
}

MinerParams miner_params_from_json(const std::string& text)
{
    MinerParams p;
    try {
        const auto j = json::parse(text);
        if (!j.is_object()) throw ParseError("miner params must be a JSON object");
        p.tau = j.value("tau", p.tau);
        p.max_lag = j.value("max_lag", p.max_lag);
        p.min_support = j.value("min_support", p.min_support);
        p.eps_add = j.value("eps_add", p.eps_add);
    } catch (const json::exception& e) {
        throw ParseError(std::string("miner params: ") + e.what());
    }
    validate_miner_params(p);
    return p;
}

MinerParams load_miner_params(const std::filesystem::path& path)
{
    return miner_params_from_json(read_file(path));
}

void save_miner_params(const std::filesystem::path& path, const MinerParams& params)
{
    write_file(path, miner_params_to_json(params));
}

} // namespace wctx
