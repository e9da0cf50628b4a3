#pragma once

#include "gridsentry/classifiers.hpp"

namespace gridsentry {

// Gaussian naive Bayes: per-class feature means and population variances,
// empirical priors, and a variance floor of var_smoothing times the largest
// overall feature variance added to every class variance.
class GaussianNb : public ProbabilisticClassifier {
public:
    explicit GaussianNb(double var_smoothing);

    std::string kind() const override { return "gaussian_nb"; }
    void fit(const Matrix& x, const std::vector<int>& y, int num_classes,
             const std::vector<double>& sample_weights) override;
    Matrix predict_proba(const Matrix& x) const override;
    nlohmann::json save_state() const override;
    void load_state(const nlohmann::json& state) override;

private:
    double var_smoothing_;
    Matrix means_;  // K x d
    Matrix vars_;   // K x d, floor already applied
    std::vector<double> log_priors_;
};

}  // namespace gridsentry
