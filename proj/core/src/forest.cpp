#include "wctx/forest.hpp"

#include "json_util.hpp"
#include "wctx/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

namespace wctx {

using detail::json;
using detail::ojson;

std::size_t DecisionTree::leaf_for(std::span<const double> x) const
{
    std::size_t k = 0;
    while (nodes[k].feature >= 0) {
        const auto& n = nodes[k];
        k = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return k;
}

std::size_t DecisionTree::vote(std::span<const double> x) const
{
    const auto& counts = nodes[leaf_for(x)].counts;
    return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

std::size_t DecisionTree::depth() const
{
    if (nodes.empty()) return 0;
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t best = 0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        best = std::max(best, d[k]);
        if (nodes[k].feature >= 0) {
            d[static_cast<std::size_t>(nodes[k].left)] = d[k] + 1;
            d[static_cast<std::size_t>(nodes[k].right)] = d[k] + 1;
        }
    }
    return best;
}

namespace {

std::uint64_t mix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct Data {
    const std::vector<double>& x;  // row-major n x d
    const std::vector<std::uint32_t>& y;
    std::size_t d;
    std::size_t classes;

    double value(std::size_t row, std::size_t f) const { return x[row * d + f]; }
};

double gini(std::span<const std::uint32_t> counts, double total)
{
    if (total <= 0.0) return 0.0;
    double sum = 0.0;
    for (auto c : counts) {
        const double p = static_cast<double>(c) / total;
        sum += p * p;
    }
    return 1.0 - sum;
}

class TreeBuilder {
public:
    TreeBuilder(const Data& data, std::optional<std::size_t> max_depth, std::uint64_t seed)
        : data_(data), max_depth_(max_depth), rng_(seed)
    {
        mtry_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(data.d))));
    }

    DecisionTree build(std::size_t n)
    {
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::vector<std::size_t> rows(n);
        for (auto& r : rows) r = pick(rng_);
        std::sort(rows.begin(), rows.end());
        tree_.nodes.clear();
        grow(rows, 0);
        return std::move(tree_);
    }

private:
    std::int32_t grow(std::vector<std::size_t>& rows, std::size_t depth)
    {
        const auto index = static_cast<std::int32_t>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        std::vector<std::uint32_t> counts(data_.classes, 0);
        for (auto r : rows) ++counts[data_.y[r]];
        const bool pure = std::count_if(counts.begin(), counts.end(), [](std::uint32_t c) { return c > 0; }) <= 1;
        const bool capped = max_depth_ && depth >= *max_depth_;

        Split best;
        if (!pure && !capped && rows.size() >= 2) best = find_split(rows, counts);
        if (best.feature < 0) {
            tree_.nodes[static_cast<std::size_t>(index)].counts = std::move(counts);
            return index;
        }

        std::vector<std::size_t> left, right;
        for (auto r : rows) (data_.value(r, static_cast<std::size_t>(best.feature)) <= best.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        const auto l = grow(left, depth + 1);
        const auto r = grow(right, depth + 1);
        auto& node = tree_.nodes[static_cast<std::size_t>(index)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = r;
        return index;
    }

    struct Split {
        std::int32_t feature = -1;
        double threshold = 0.0;
        double impurity = 0.0;
    };

    Split find_split(const std::vector<std::size_t>& rows, const std::vector<std::uint32_t>& counts)
    {
        std::vector<std::size_t> features(data_.d);
        std::iota(features.begin(), features.end(), 0);
        std::shuffle(features.begin(), features.end(), rng_);

        Split best;
        best.impurity = std::numeric_limits<double>::infinity();
        const double total = static_cast<double>(rows.size());
        std::vector<std::pair<double, std::uint32_t>> column(rows.size());
        std::vector<std::uint32_t> left(data_.classes), right(data_.classes);

        // Draw mtry features; keep drawing past mtry only while none of them can split.
        for (std::size_t k = 0; k < features.size(); ++k) {
            if (k >= mtry_ && best.feature >= 0) break;
            const auto f = features[k];
            for (std::size_t i = 0; i < rows.size(); ++i) column[i] = {data_.value(rows[i], f), data_.y[rows[i]]};
            std::sort(column.begin(), column.end());
            if (column.front().first == column.back().first) continue;

            std::fill(left.begin(), left.end(), 0);
            right = counts;
            for (std::size_t i = 0; i + 1 < column.size(); ++i) {
                ++left[column[i].second];
                --right[column[i].second];
                if (column[i].first == column[i + 1].first) continue;
                const double nl = static_cast<double>(i + 1);
                const double nr = total - nl;
                const double imp = (nl * gini(left, nl) + nr * gini(right, nr)) / total;
                if (imp < best.impurity) {
                    best.impurity = imp;
                    best.feature = static_cast<std::int32_t>(f);
                    best.threshold = column[i].first + (column[i + 1].first - column[i].first) / 2.0;
                }
            }
        }
        return best;
    }

    const Data& data_;
    std::optional<std::size_t> max_depth_;
    std::mt19937_64 rng_;
    std::size_t mtry_ = 1;
    DecisionTree tree_;
};

} // namespace

Classifier Classifier::train(std::span<const FeatureMatrix> samples, std::span<const EventId> labels,
                             const ForestParams& params)
{
    if (samples.empty()) throw PreconditionError("train: no samples");
    if (samples.size() != labels.size()) throw PreconditionError("train: samples and labels differ in length");
    if (params.n_trees == 0) throw PreconditionError("train: n_trees must be >= 1");
    const auto d = samples.front().dim();
    for (const auto& s : samples)
        if (s.dim() != d) throw ShapeError("train: samples have different feature dimensions");

    Classifier c;
    c.classes_.assign(labels.begin(), labels.end());
    std::sort(c.classes_.begin(), c.classes_.end());
    c.classes_.erase(std::unique(c.classes_.begin(), c.classes_.end()), c.classes_.end());
    if (c.classes_.size() < 2) throw TrainingError("train: need at least two classes");
    c.feature_dim_ = d;
    c.max_depth_ = params.max_depth;
    c.seed_ = params.seed;

    std::vector<double> x;
    x.reserve(samples.size() * d);
    for (const auto& s : samples) x.insert(x.end(), s.values.begin(), s.values.end());
    std::vector<std::uint32_t> y;
    y.reserve(labels.size());
    for (auto l : labels)
        y.push_back(static_cast<std::uint32_t>(std::lower_bound(c.classes_.begin(), c.classes_.end(), l) - c.classes_.begin()));
    const Data data{x, y, d, c.classes_.size()};

    c.trees_.resize(params.n_trees);
    auto work = [&](std::size_t begin, std::size_t step) {
        for (std::size_t t = begin; t < params.n_trees; t += step) {
            TreeBuilder builder(data, params.max_depth, mix(params.seed ^ mix(t + 1)));
            c.trees_[t] = builder.build(samples.size());
        }
    };
    std::size_t threads = params.threads ? params.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, params.n_trees);
    if (threads <= 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(work, k, threads);
        for (auto& th : pool) th.join();
    }
    return c;
}

std::vector<double> Classifier::proba_vector(std::span<const double> x) const
{
    if (x.size() != feature_dim_)
        throw ShapeError("predict: feature dimension " + std::to_string(x.size()) + " does not match the model's " +
                         std::to_string(feature_dim_));
    std::vector<double> p(classes_.size(), 0.0);
    for (const auto& t : trees_) p[t.vote(x)] += 1.0;
    for (auto& v : p) v /= static_cast<double>(trees_.size());
    return p;
}

std::map<EventId, double> Classifier::predict_proba(const FeatureMatrix& f) const
{
    const auto p = proba_vector(f.values);
    std::map<EventId, double> out;
    for (std::size_t k = 0; k < classes_.size(); ++k) out[classes_[k]] = p[k];
    return out;
}

EventId Classifier::predict(const FeatureMatrix& f) const
{
    const auto p = proba_vector(f.values);
    return classes_[static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin())];
}

std::string Classifier::to_json() const
{
    ojson j;
    j["n_trees"] = trees_.size();
    j["max_depth"] = max_depth_ ? ojson(*max_depth_) : ojson(nullptr);
    std::vector<std::uint32_t> cls;
    for (auto e : classes_) cls.push_back(e.value);
    j["classes"] = cls;
    j["feature_dim"] = feature_dim_;
    j["seed"] = seed_;
    j["packets_per_window"] = packets_per_window();
    ojson labels_json = ojson::object();
    for (const auto& [e, l] : labels) labels_json[std::to_string(e.value)] = l;
    j["labels"] = labels_json;
    ojson steps = ojson::object();
    for (const auto& [e, n] : step_counts) steps[std::to_string(e.value)] = n;
    j["step_counts"] = steps;
    ojson trees = ojson::array();
    for (const auto& t : trees_) {
        ojson nodes = ojson::array();
        for (const auto& n : t.nodes) {
            if (n.feature >= 0) nodes.push_back(ojson{{"split", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
            else nodes.push_back(ojson{{"counts", n.counts}});
        }
        trees.push_back(ojson{{"nodes", nodes}});
    }
    j["trees"] = trees;
    return j.dump() + "\n";
}

namespace {

EventId id_key(const std::string& key)
{
    std::size_t used = 0;
    unsigned long v = 0;
    try {
        v = std::stoul(key, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != key.size() || v == 0) throw ParseError("model key '" + key + "' is not an event id");
    return EventId(static_cast<std::uint32_t>(v));
}

} // namespace

Classifier Classifier::from_json(const std::string& text)
{
    Classifier c;
    try {
        const auto j = json::parse(text);
        for (auto v : detail::required<std::vector<std::uint32_t>>(j, "classes")) c.classes_.emplace_back(v);
        if (!std::is_sorted(c.classes_.begin(), c.classes_.end())) throw ParseError("model classes must be sorted");
        c.feature_dim_ = detail::required<std::size_t>(j, "feature_dim");
        if (j.contains("max_depth") && !j["max_depth"].is_null()) c.max_depth_ = j["max_depth"].get<std::size_t>();
        c.seed_ = j.value("seed", std::uint64_t{0});
        if (j.contains("labels"))
            for (const auto& [k, v] : j["labels"].items()) c.labels[id_key(k)] = v.get<std::string>();
        if (j.contains("step_counts"))
            for (const auto& [k, v] : j["step_counts"].items()) c.step_counts[id_key(k)] = v.get<std::size_t>();
        if (!j.contains("trees") || !j["trees"].is_array()) throw ParseError("model has no trees");
        for (const auto& t : j["trees"]) {
            DecisionTree tree;
            for (const auto& n : detail::required<json>(t, "nodes")) {
                TreeNode node;
                if (n.contains("split")) {
                    node.feature = n["split"].get<std::int32_t>();
                    node.threshold = n["threshold"].get<double>();
                    node.left = n["left"].get<std::int32_t>();
                    node.right = n["right"].get<std::int32_t>();
                } else {
                    node.counts = detail::required<std::vector<std::uint32_t>>(n, "counts");
                    if (node.counts.size() != c.classes_.size()) throw ParseError("leaf counts do not match the class list");
                }
                tree.nodes.push_back(std::move(node));
            }
            const auto size = static_cast<std::int32_t>(tree.nodes.size());
            if (size == 0) throw ParseError("empty tree in model");
            for (std::int32_t k = 0; k < size; ++k) {
                const auto& n = tree.nodes[static_cast<std::size_t>(k)];
                if (n.feature < 0) continue;
                if (n.left <= k || n.left >= size || n.right <= k || n.right >= size ||
                    static_cast<std::size_t>(n.feature) >= c.feature_dim_)
                    throw ParseError("tree node references out of range");
            }
            c.trees_.push_back(std::move(tree));
        }
        const auto declared = detail::required<std::size_t>(j, "n_trees");
        if (declared != c.trees_.size()) throw ParseError("n_trees does not match the tree list");
    } catch (const json::exception& e) {
        throw ParseError(std::string("model: ") + e.what());
    }
    return c;
}

void Classifier::save(const std::filesystem::path& path) const
{
    write_file(path, to_json());
}

Classifier Classifier::load(const std::filesystem::path& path)
{
    try {
        return from_json(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

} // namespace wctx
