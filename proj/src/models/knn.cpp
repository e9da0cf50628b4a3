#include "gridsentry/models/knn.hpp"

#include <algorithm>

namespace gridsentry {

Knn::Knn(int k) : k_(k) {
    if (k_ < 1) throw ValidationError("knn: k must be >= 1");
}

void Knn::fit(const Matrix& x, const std::vector<int>& y, int num_classes,
              const std::vector<double>& sample_weights) {
    check_fit_inputs(x, y, num_classes, sample_weights);
    if (static_cast<std::size_t>(k_) > x.rows())
        throw ValidationError("knn: k exceeds the training set size");
    train_x_ = x;
    train_y_ = y;
}

Matrix Knn::predict_proba(const Matrix& x) const {
    check_predict_input(x);
    const auto k_classes = static_cast<std::size_t>(num_classes_);
    const std::size_t n_train = train_x_.rows();
    const std::size_t d = train_x_.cols();
    Matrix out(x.rows(), k_classes);
    parallel_for(x.rows(), [&](std::size_t begin, std::size_t end) {
        std::vector<std::pair<double, std::size_t>> dist(n_train);
        for (std::size_t r = begin; r < end; ++r) {
            const auto q = x.row(r);
            for (std::size_t i = 0; i < n_train; ++i) {
                const auto t = train_x_.row(i);
                double acc = 0.0;
                for (std::size_t c = 0; c < d; ++c) {
                    const double delta = q[c] - t[c];
                    acc += delta * delta;
                }
                dist[i] = {acc, i};
            }
            // lexicographic (distance, row) order makes ties land on the
            // lowest training index, matching a full sort
            const auto kth = dist.begin() + k_;
            std::nth_element(dist.begin(), kth - 1, dist.end());
            auto dst = out.row(r);
            for (auto it = dist.begin(); it != kth; ++it)
                dst[static_cast<std::size_t>(train_y_[it->second])] += 1.0;
            for (std::size_t c = 0; c < k_classes; ++c) dst[c] /= static_cast<double>(k_);
        }
    });
    return out;
}

nlohmann::json Knn::save_state() const {
    std::vector<double> flat(train_x_.data(), train_x_.data() + train_x_.rows() * train_x_.cols());
    return nlohmann::json{{"num_classes", num_classes_},
                          {"feature_width", feature_width_},
                          {"k", k_},
                          {"rows", train_x_.rows()},
                          {"x", std::move(flat)},
                          {"y", train_y_}};
}

void Knn::load_state(const nlohmann::json& state) {
    num_classes_ = state.at("num_classes").get<int>();
    feature_width_ = state.at("feature_width").get<std::size_t>();
    k_ = state.at("k").get<int>();
    const auto rows = state.at("rows").get<std::size_t>();
    const auto flat = state.at("x").get<std::vector<double>>();
    train_y_ = state.at("y").get<std::vector<int>>();
    if (rows * feature_width_ != flat.size() || train_y_.size() != rows || rows == 0)
        throw ValidationError("knn: malformed serialized state");
    train_x_ = Matrix(rows, feature_width_);
    std::copy(flat.begin(), flat.end(), train_x_.data());
}

}  // namespace gridsentry
