#pragma once

#include "gridsentry/classifiers.hpp"

namespace gridsentry {

// Fully connected ReLU network with a softmax head, trained by mini-batch
// SGD with classical momentum on the weighted cross-entropy plus an L2
// penalty on the weight matrices. He-normal initialization; the per-epoch
// shuffle and the init draws both come from the ModelSpec seed, so training is
// bit-reproducible.
struct MlpConfig {
    std::vector<int> hidden_layers;
    int epochs = 200;
    int batch_size = 256;
    double learning_rate = 1e-3;
    double momentum = 0.9;
    double l2 = 1e-4;
};

class Mlp : public ProbabilisticClassifier {
public:
    Mlp(std::string kind, MlpConfig config, std::uint64_t seed);

    std::string kind() const override { return kind_; }
    void fit(const Matrix& x, const std::vector<int>& y, int num_classes,
             const std::vector<double>& sample_weights) override;
    Matrix predict_proba(const Matrix& x) const override;
    nlohmann::json save_state() const override;
    void load_state(const nlohmann::json& state) override;

    // Hooks for the analytic-gradient verification: initialize parameters
    // without training, flatten/restore them, and evaluate the training
    // objective with its analytic gradient at the current parameters.
    void init_params(std::size_t feature_width, int num_classes);
    std::vector<double> flat_params() const;
    void set_flat_params(const std::vector<double>& flat);
    std::pair<double, std::vector<double>> loss_and_gradient(
        const Matrix& x, const std::vector<int>& y,
        const std::vector<double>& sample_weights) const;

private:
    std::string kind_;
    MlpConfig config_;
    std::uint64_t seed_;
    std::vector<Matrix> weights_;            // layer l: out x in
    std::vector<std::vector<double>> bias_;  // layer l: out
};

}  // namespace gridsentry
