#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gridsentry/common.hpp"
#include "gridsentry/matrix.hpp"
#include "json.hpp"

namespace gridsentry {

// Axis-aligned binary tree shared by the single tree, the ensembles and the
// boosting models. Leaves hold a class distribution (classification) or a
// single prediction value (regression).
struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> value;
};

struct Tree {
    std::vector<TreeNode> nodes;

    bool empty() const { return nodes.empty(); }
    int find_leaf(std::span<const double> x) const;
    const std::vector<double>& evaluate(std::span<const double> x) const;
};

struct TreeOptions {
    int max_depth = 0;  // 0 = unlimited
    int min_samples_leaf = 1;
    int max_features = 0;  // 0 = all features, otherwise per-node subsample size
    bool random_thresholds = false;  // one uniform draw per candidate feature
};

// CART-style greedy builder on the row subset (repeats allowed, e.g. a
// bootstrap sample). Splits minimize weighted Gini impurity; candidate
// thresholds are midpoints between consecutive distinct values, or uniform
// draws when random_thresholds is set. Ties keep the first candidate in
// (feature, threshold) order. rng is consulted only for feature subsampling
// and random thresholds.
Tree build_classification_tree(const Matrix& x, const std::vector<int>& y, int num_classes,
                               const std::vector<double>& sample_weights,
                               const std::vector<std::size_t>& rows, const TreeOptions& opt,
                               Rng& rng);

// Depth-bounded regression tree over all rows, built level by level against
// pre-sorted per-feature row orders so boosting can reuse the sort across
// rounds. Splits maximize weighted variance reduction; leaves predict the
// weighted mean. row_leaf receives each row's final leaf node id.
Tree build_regression_tree(const Matrix& x,
                           const std::vector<std::vector<std::uint32_t>>& sorted_rows,
                           const std::vector<double>& target,
                           const std::vector<double>& sample_weights, const TreeOptions& opt,
                           std::vector<int>& row_leaf);

// Pre-sorted row ids per feature (value ascending, row id breaking ties).
std::vector<std::vector<std::uint32_t>> presort_features(const Matrix& x);

nlohmann::json tree_to_json(const Tree& tree);
Tree tree_from_json(const nlohmann::json& j);

}  // namespace gridsentry
