#include "gridsentry/models/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gridsentry {

DecisionTree::DecisionTree(int max_depth, int min_samples_leaf, std::uint64_t seed)
    : max_depth_(max_depth), min_samples_leaf_(min_samples_leaf), seed_(seed) {
    if (max_depth_ < 0) throw ValidationError("decision_tree: max_depth must be >= 0");
    if (min_samples_leaf_ < 1) throw ValidationError("decision_tree: min_samples_leaf must be >= 1");
}

void DecisionTree::fit(const Matrix& x, const std::vector<int>& y, int num_classes,
                       const std::vector<double>& sample_weights) {
    check_fit_inputs(x, y, num_classes, sample_weights);
    std::vector<std::size_t> rows(x.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    TreeOptions opt;
    opt.max_depth = max_depth_;
    opt.min_samples_leaf = min_samples_leaf_;
    Rng rng(seed_);
    tree_ = build_classification_tree(x, y, num_classes, sample_weights, rows, opt, rng);
}

Matrix DecisionTree::predict_proba(const Matrix& x) const {
    check_predict_input(x);
    Matrix out(x.rows(), static_cast<std::size_t>(num_classes_));
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto& dist = tree_.evaluate(x.row(r));
        std::copy(dist.begin(), dist.end(), out.row(r).begin());
    }
    return out;
}

nlohmann::json DecisionTree::save_state() const {
    return nlohmann::json{{"num_classes", num_classes_},
                          {"feature_width", feature_width_},
                          {"tree", tree_to_json(tree_)}};
}

void DecisionTree::load_state(const nlohmann::json& state) {
    num_classes_ = state.at("num_classes").get<int>();
    feature_width_ = state.at("feature_width").get<std::size_t>();
    tree_ = tree_from_json(state.at("tree"));
}

TreeEnsemble::TreeEnsemble(std::string kind, int n_trees, int max_depth, int min_samples_leaf,
                           int max_features, std::uint64_t seed)
    : kind_(std::move(kind)),
      n_trees_(n_trees),
      max_depth_(max_depth),
      min_samples_leaf_(min_samples_leaf),
      max_features_(max_features),
      seed_(seed) {
    if (kind_ != "random_forest" && kind_ != "extra_trees")
        throw ValidationError("tree ensemble: unknown kind '" + kind_ + "'");
    if (n_trees_ < 1) throw ValidationError(kind_ + ": n_trees must be >= 1");
    if (max_depth_ < 0) throw ValidationError(kind_ + ": max_depth must be >= 0");
    if (min_samples_leaf_ < 1) throw ValidationError(kind_ + ": min_samples_leaf must be >= 1");
    if (max_features_ < 0) throw ValidationError(kind_ + ": max_features must be >= 0");
}

void TreeEnsemble::fit(const Matrix& x, const std::vector<int>& y, int num_classes,
                       const std::vector<double>& sample_weights) {
    check_fit_inputs(x, y, num_classes, sample_weights);
    const bool bootstrap = kind_ == "random_forest";
    TreeOptions opt;
    opt.max_depth = max_depth_;
    opt.min_samples_leaf = min_samples_leaf_;
    opt.max_features =
        max_features_ > 0
            ? max_features_
            : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(x.cols()))));
    opt.random_thresholds = kind_ == "extra_trees";

    const std::size_t n = x.rows();
    trees_.assign(static_cast<std::size_t>(n_trees_), Tree{});
    const Rng master(seed_);
    // one independent stream per tree: the result does not depend on how the
    // trees are distributed over workers
    parallel_for(static_cast<std::size_t>(n_trees_), [&](std::size_t begin, std::size_t end) {
        std::vector<std::size_t> rows(n);
        for (std::size_t t = begin; t < end; ++t) {
            Rng rng = master.fork(t);
            if (bootstrap) {
                for (std::size_t i = 0; i < n; ++i)
                    rows[i] = static_cast<std::size_t>(rng.next_below(n));
            } else {
                std::iota(rows.begin(), rows.end(), std::size_t{0});
            }
            trees_[t] = build_classification_tree(x, y, num_classes, sample_weights, rows, opt, rng);
        }
    });
}

Matrix TreeEnsemble::predict_proba(const Matrix& x) const {
    check_predict_input(x);
    const auto k = static_cast<std::size_t>(num_classes_);
    Matrix out(x.rows(), k);
    parallel_for(x.rows(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            auto dst = out.row(r);
            for (const auto& tree : trees_) {
                const auto& dist = tree.evaluate(x.row(r));
                for (std::size_t c = 0; c < k; ++c) dst[c] += dist[c];
            }
            const auto scale = 1.0 / static_cast<double>(trees_.size());
            for (std::size_t c = 0; c < k; ++c) dst[c] *= scale;
        }
    });
    return out;
}

nlohmann::json TreeEnsemble::save_state() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_) trees.push_back(tree_to_json(t));
    return nlohmann::json{{"num_classes", num_classes_},
                          {"feature_width", feature_width_},
                          {"trees", std::move(trees)}};
}

void TreeEnsemble::load_state(const nlohmann::json& state) {
    num_classes_ = state.at("num_classes").get<int>();
    feature_width_ = state.at("feature_width").get<std::size_t>();
    trees_.clear();
    for (const auto& t : state.at("trees")) trees_.push_back(tree_from_json(t));
    if (trees_.empty()) throw ValidationError(kind_ + ": serialized ensemble has no trees");
}

}  // namespace gridsentry
