#pragma once

#include "gridsentry/classifiers.hpp"

namespace gridsentry {

// Exact brute-force k-nearest-neighbors with uniform vote weights.
// Neighbors are the first k entries of the training set ordered by squared
// Euclidean distance, equal distances broken by training row index.
class Knn : public ProbabilisticClassifier {
public:
    explicit Knn(int k);

    std::string kind() const override { return "knn"; }
    void fit(const Matrix& x, const std::vector<int>& y, int num_classes,
             const std::vector<double>& sample_weights) override;
    Matrix predict_proba(const Matrix& x) const override;
    nlohmann::json save_state() const override;
    void load_state(const nlohmann::json& state) override;

private:
    int k_;
    Matrix train_x_;
    std::vector<int> train_y_;
};

}  // namespace gridsentry
