#include "gridsentry/models/linear.hpp"

#include <algorithm>
#include <cmath>

namespace gridsentry {

LogisticRegression::LogisticRegression(double learning_rate, int iterations, double l2)
    : learning_rate_(learning_rate), iterations_(iterations), l2_(l2) {
    if (!(learning_rate_ > 0.0))
        throw ValidationError("logistic_regression: learning_rate must be positive");
    if (iterations_ < 1) throw ValidationError("logistic_regression: iterations must be >= 1");
    if (!(l2_ >= 0.0)) throw ValidationError("logistic_regression: l2 must be non-negative");
}

void LogisticRegression::fit(const Matrix& x, const std::vector<int>& y, int num_classes,
                             const std::vector<double>& sample_weights) {
    check_fit_inputs(x, y, num_classes, sample_weights);
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    const auto k = static_cast<std::size_t>(num_classes);

    std::vector<double> w(n, 1.0);
    if (!sample_weights.empty()) w = sample_weights;
    double w_sum = 0.0;
    for (double wi : w) w_sum += wi;

    weights_ = Matrix(k, d);
    bias_.assign(k, 0.0);
    Matrix grad_w(k, d);
    std::vector<double> grad_b(k);
    std::vector<double> logits(k);

    for (int iter = 0; iter < iterations_; ++iter) {
        std::fill(grad_w.data(), grad_w.data() + k * d, 0.0);
        std::fill(grad_b.begin(), grad_b.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = x.row(i);
            for (std::size_t c = 0; c < k; ++c) {
                const auto wc = weights_.row(c);
                double z = bias_[c];
                for (std::size_t f = 0; f < d; ++f) z += wc[f] * row[f];
                logits[c] = z;
            }
            const double peak = *std::max_element(logits.begin(), logits.end());
            double total = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                logits[c] = std::exp(logits[c] - peak);
                total += logits[c];
            }
            for (std::size_t c = 0; c < k; ++c) {
                const double p = logits[c] / total;
                const double delta =
                    w[i] * (p - (static_cast<std::size_t>(y[i]) == c ? 1.0 : 0.0));
                auto gw = grad_w.row(c);
                for (std::size_t f = 0; f < d; ++f) gw[f] += delta * row[f];
                grad_b[c] += delta;
            }
        }
        for (std::size_t c = 0; c < k; ++c) {
            auto wc = weights_.row(c);
            const auto gw = grad_w.row(c);
            for (std::size_t f = 0; f < d; ++f)
                wc[f] -= learning_rate_ * (gw[f] / w_sum + l2_ * wc[f]);
            bias_[c] -= learning_rate_ * grad_b[c] / w_sum;
        }
    }
}

Matrix LogisticRegression::predict_proba(const Matrix& x) const {
    check_predict_input(x);
    const auto k = static_cast<std::size_t>(num_classes_);
    const std::size_t d = feature_width_;
    Matrix out(x.rows(), k);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto row = x.row(r);
        auto dst = out.row(r);
        for (std::size_t c = 0; c < k; ++c) {
            const auto wc = weights_.row(c);
            double z = bias_[c];
            for (std::size_t f = 0; f < d; ++f) z += wc[f] * row[f];
            dst[c] = z;
        }
        const double peak = *std::max_element(dst.begin(), dst.end());
        double total = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            dst[c] = std::exp(dst[c] - peak);
            total += dst[c];
        }
        for (std::size_t c = 0; c < k; ++c) dst[c] /= total;
    }
    return out;
}

nlohmann::json LogisticRegression::save_state() const {
    std::vector<double> flat(weights_.data(),
                             weights_.data() + weights_.rows() * weights_.cols());
    return nlohmann::json{{"num_classes", num_classes_},
                          {"feature_width", feature_width_},
                          {"weights", std::move(flat)},
                          {"bias", bias_}};
}

void LogisticRegression::load_state(const nlohmann::json& state) {
    num_classes_ = state.at("num_classes").get<int>();
    feature_width_ = state.at("feature_width").get<std::size_t>();
    const auto k = static_cast<std::size_t>(num_classes_);
    const auto flat = state.at("weights").get<std::vector<double>>();
    bias_ = state.at("bias").get<std::vector<double>>();
    if (flat.size() != k * feature_width_ || bias_.size() != k)
        throw ValidationError("logistic_regression: malformed serialized state");
    weights_ = Matrix(k, feature_width_);
    std::copy(flat.begin(), flat.end(), weights_.data());
}

}  // namespace gridsentry
