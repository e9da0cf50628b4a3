#pragma once

#include "gridsentry/classifiers.hpp"

namespace gridsentry {

// Multinomial logistic regression trained with full-batch gradient descent
// on the weighted cross-entropy plus an L2 penalty on the weights (biases
// left unpenalized). Deterministic: zero initialization, no randomness.
class LogisticRegression : public ProbabilisticClassifier {
public:
    LogisticRegression(double learning_rate, int iterations, double l2);

    std::string kind() const override { return "logistic_regression"; }
    void fit(const Matrix& x, const std::vector<int>& y, int num_classes,
             const std::vector<double>& sample_weights) override;
    Matrix predict_proba(const Matrix& x) const override;
    nlohmann::json save_state() const override;
    void load_state(const nlohmann::json& state) override;

private:
    double learning_rate_;
    int iterations_;
    double l2_;
    Matrix weights_;  // K x d
    std::vector<double> bias_;
};

}  // namespace gridsentry
