#include "gridsentry/models/naive_bayes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gridsentry {

GaussianNb::GaussianNb(double var_smoothing) : var_smoothing_(var_smoothing) {
    if (!(var_smoothing_ >= 0.0))
        throw ValidationError("gaussian_nb: var_smoothing must be non-negative");
}

void GaussianNb::fit(const Matrix& x, const std::vector<int>& y, int num_classes,
                     const std::vector<double>& sample_weights) {
    (void)sample_weights;  // per-class Gaussians have no use for sample weights
    check_fit_inputs(x, y, num_classes, {});
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    const auto k = static_cast<std::size_t>(num_classes);

    std::vector<std::size_t> counts(k, 0);
    for (int label : y) ++counts[static_cast<std::size_t>(label)];
    for (std::size_t c = 0; c < k; ++c)
        if (counts[c] == 0)
            throw ValidationError("gaussian_nb: class " + std::to_string(c) +
                                  " has no training samples");

    means_ = Matrix(k, d);
    vars_ = Matrix(k, d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = x.row(i);
        auto mean = means_.row(static_cast<std::size_t>(y[i]));
        for (std::size_t f = 0; f < d; ++f) mean[f] += row[f];
    }
    for (std::size_t c = 0; c < k; ++c) {
        auto mean = means_.row(c);
        for (std::size_t f = 0; f < d; ++f) mean[f] /= static_cast<double>(counts[c]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = x.row(i);
        const auto mean = means_.row(static_cast<std::size_t>(y[i]));
        auto var = vars_.row(static_cast<std::size_t>(y[i]));
        for (std::size_t f = 0; f < d; ++f) {
            const double delta = row[f] - mean[f];
            var[f] += delta * delta;
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        auto var = vars_.row(c);
        for (std::size_t f = 0; f < d; ++f) var[f] /= static_cast<double>(counts[c]);
    }

    // variance floor: var_smoothing times the largest overall feature variance
    double largest = 0.0;
    for (std::size_t f = 0; f < d; ++f) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += x(i, f);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double delta = x(i, f) - mean;
            var += delta * delta;
        }
        var /= static_cast<double>(n);
        largest = std::max(largest, var);
    }
    const double floor = var_smoothing_ * largest;
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t f = 0; f < d; ++f) vars_(c, f) += floor;

    log_priors_.assign(k, 0.0);
    for (std::size_t c = 0; c < k; ++c)
        log_priors_[c] =
            std::log(static_cast<double>(counts[c]) / static_cast<double>(n));
}

Matrix GaussianNb::predict_proba(const Matrix& x) const {
    check_predict_input(x);
    const auto k = static_cast<std::size_t>(num_classes_);
    const std::size_t d = feature_width_;
    Matrix out(x.rows(), k);
    std::vector<double> joint(k);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto row = x.row(r);
        for (std::size_t c = 0; c < k; ++c) {
            double ll = log_priors_[c];
            const auto mean = means_.row(c);
            const auto var = vars_.row(c);
            for (std::size_t f = 0; f < d; ++f) {
                const double delta = row[f] - mean[f];
                ll += -0.5 * std::log(2.0 * std::numbers::pi * var[f]) -
                      delta * delta / (2.0 * var[f]);
            }
            joint[c] = ll;
        }
        const double peak = *std::max_element(joint.begin(), joint.end());
        double total = 0.0;
        auto dst = out.row(r);
        for (std::size_t c = 0; c < k; ++c) {
            dst[c] = std::exp(joint[c] - peak);
            total += dst[c];
        }
        for (std::size_t c = 0; c < k; ++c) dst[c] /= total;
    }
    return out;
}

nlohmann::json GaussianNb::save_state() const {
    std::vector<double> means(means_.data(), means_.data() + means_.rows() * means_.cols());
    std::vector<double> vars(vars_.data(), vars_.data() + vars_.rows() * vars_.cols());
    return nlohmann::json{{"num_classes", num_classes_},
                          {"feature_width", feature_width_},
                          {"means", std::move(means)},
                          {"vars", std::move(vars)},
                          {"log_priors", log_priors_}};
}

void GaussianNb::load_state(const nlohmann::json& state) {
    num_classes_ = state.at("num_classes").get<int>();
    feature_width_ = state.at("feature_width").get<std::size_t>();
    const auto k = static_cast<std::size_t>(num_classes_);
    const auto means = state.at("means").get<std::vector<double>>();
    const auto vars = state.at("vars").get<std::vector<double>>();
    log_priors_ = state.at("log_priors").get<std::vector<double>>();
    if (means.size() != k * feature_width_ || vars.size() != means.size() ||
        log_priors_.size() != k)
        throw ValidationError("gaussian_nb: malformed serialized state");
    means_ = Matrix(k, feature_width_);
    vars_ = Matrix(k, feature_width_);
    std::copy(means.begin(), means.end(), means_.data());
    std::copy(vars.begin(), vars.end(), vars_.data());
}

}  // namespace gridsentry
