#pragma once

#include "wctx/features.hpp"
#include "wctx/io.hpp"
#include "wctx/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wctx {

struct ForestParams {
    std::size_t n_trees = 100;
    std::optional<std::size_t> max_depth;  // unbounded when empty
    std::uint64_t seed = 1;
    std::size_t threads = 0;  // 0: hardware concurrency
};

// Split node when feature >= 0 (go left iff x[feature] <= threshold), leaf otherwise.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::vector<std::uint32_t> counts;  // per class index, leaves only

    bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    std::size_t leaf_for(std::span<const double> x) const;
    std::size_t vote(std::span<const double> x) const;  // majority class index, lowest on ties
    std::size_t depth() const;
    bool operator==(const DecisionTree&) const = default;
};

// Random forest of CART trees (Gini, bootstrap, sqrt(d) candidate features per split),
// hard voting. Immutable after training.
class Classifier {
public:
    Classifier() = default;

    // Throws TrainingError with fewer than two classes, PreconditionError on empty or
    // ragged input.
    static Classifier train(std::span<const FeatureMatrix> samples, std::span<const EventId> labels,
                            const ForestParams& params = {});

    // Fraction of trees voting for each class. Throws ShapeError on a dimension mismatch.
    std::map<EventId, double> predict_proba(const FeatureMatrix& f) const;
    std::vector<double> proba_vector(std::span<const double> x) const;
    EventId predict(const FeatureMatrix& f) const;

    const std::vector<EventId>& classes() const noexcept { return classes_; }
    const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
    std::size_t n_trees() const noexcept { return trees_.size(); }
    std::size_t feature_dim() const noexcept { return feature_dim_; }
    std::size_t packets_per_window() const noexcept { return feature_dim_ / kFeatureRows; }
    std::optional<std::size_t> max_depth() const noexcept { return max_depth_; }
    std::uint64_t seed() const noexcept { return seed_; }

    // Carried in the model file for the detector and for readable output.
    std::map<EventId, std::size_t> step_counts;
    LabelMap labels;

    std::string to_json() const;
    static Classifier from_json(const std::string& text);
    void save(const std::filesystem::path& path) const;
    static Classifier load(const std::filesystem::path& path);

    bool operator==(const Classifier&) const = default;

private:
    std::vector<EventId> classes_;
    std::vector<DecisionTree> trees_;
    std::size_t feature_dim_ = 0;
    std::optional<std::size_t> max_depth_;
    std::uint64_t seed_ = 0;
};

} // namespace wctx
