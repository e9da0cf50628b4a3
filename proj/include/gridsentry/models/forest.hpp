#pragma once

#include "gridsentry/classifiers.hpp"
#include "gridsentry/models/tree.hpp"

namespace gridsentry {

// Single CART tree with midpoint thresholds over all features.
class DecisionTree : public ProbabilisticClassifier {
public:
    DecisionTree(int max_depth, int min_samples_leaf, std::uint64_t seed);

    std::string kind() const override { return "decision_tree"; }
    void fit(const Matrix& x, const std::vector<int>& y, int num_classes,
             const std::vector<double>& sample_weights) override;
    Matrix predict_proba(const Matrix& x) const override;
    nlohmann::json save_state() const override;
    void load_state(const nlohmann::json& state) override;

    const Tree& tree() const { return tree_; }

private:
    int max_depth_;
    int min_samples_leaf_;
    std::uint64_t seed_;
    Tree tree_;
};

// Soft-voting tree ensemble covering both bagged forests (bootstrap rows,
// midpoint thresholds) and extremely randomized trees (full sample, uniform
// random thresholds). Both subsample sqrt(d) candidate features per node
// unless max_features overrides it. Probabilities are the plain mean of the
// member leaf distributions.
class TreeEnsemble : public ProbabilisticClassifier {
public:
    TreeEnsemble(std::string kind, int n_trees, int max_depth, int min_samples_leaf,
                 int max_features, std::uint64_t seed);

    std::string kind() const override { return kind_; }
    void fit(const Matrix& x, const std::vector<int>& y, int num_classes,
             const std::vector<double>& sample_weights) override;
    Matrix predict_proba(const Matrix& x) const override;
    nlohmann::json save_state() const override;
    void load_state(const nlohmann::json& state) override;

    const std::vector<Tree>& trees() const { return trees_; }

private:
    std::string kind_;  // "random_forest" or "extra_trees"
    int n_trees_;
    int max_depth_;
    int min_samples_leaf_;
    int max_features_;
    std::uint64_t seed_;
    std::vector<Tree> trees_;
};

}  // namespace gridsentry
