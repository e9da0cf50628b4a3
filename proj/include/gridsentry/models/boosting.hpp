#pragma once

#include "gridsentry/classifiers.hpp"
#include "gridsentry/models/tree.hpp"

namespace gridsentry {

// Multi-class AdaBoost (the SAMME reweighting) over depth-1 stumps. The
// probability output is the normalized exponential of the per-class weighted
// vote shares, which keeps the ranking of the vote but stays deliberately
// soft -- near-uniform on hard problems.
class AdaBoost : public ProbabilisticClassifier {
public:
    AdaBoost(int n_rounds, std::uint64_t seed);

    std::string kind() const override { return "adaboost"; }
    void fit(const Matrix& x, const std::vector<int>& y, int num_classes,
             const std::vector<double>& sample_weights) override;
    Matrix predict_proba(const Matrix& x) const override;
    nlohmann::json save_state() const override;
    void load_state(const nlohmann::json& state) override;

    std::size_t n_fitted_rounds() const { return alphas_.size(); }

private:
    int n_rounds_;
    std::uint64_t seed_;
    std::vector<Tree> stumps_;
    std::vector<double> alphas_;
};

// Gradient boosting on the multinomial deviance: per round, one depth-capped
// regression tree per class fit to the softmax residuals, leaf values set by
// a single Newton step. Scores start at zero and accumulate
// learning_rate * leaf value; probabilities are the softmax of the scores.
class GradientBoosting : public ProbabilisticClassifier {
public:
    GradientBoosting(int n_rounds, double learning_rate, int max_depth, int min_samples_leaf);

    std::string kind() const override { return "gradient_boosting"; }
    void fit(const Matrix& x, const std::vector<int>& y, int num_classes,
             const std::vector<double>& sample_weights) override;
    Matrix predict_proba(const Matrix& x) const override;
    nlohmann::json save_state() const override;
    void load_state(const nlohmann::json& state) override;

private:
    int n_rounds_;
    double learning_rate_;
    int max_depth_;
    int min_samples_leaf_;
    std::vector<std::vector<Tree>> rounds_;  // rounds_[r][k]
};

}  // namespace gridsentry
