#include "gridsentry/models/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gridsentry {

AdaBoost::AdaBoost(int n_rounds, std::uint64_t seed) : n_rounds_(n_rounds), seed_(seed) {
    if (n_rounds_ < 1) throw ValidationError("adaboost: n_rounds must be >= 1");
}

void AdaBoost::fit(const Matrix& x, const std::vector<int>& y, int num_classes,
                   const std::vector<double>& sample_weights) {
    check_fit_inputs(x, y, num_classes, sample_weights);
    const std::size_t n = x.rows();
    const double k = static_cast<double>(num_classes);

    std::vector<double> w(n);
    double w_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = sample_weights.empty() ? 1.0 : sample_weights[i];
        w_sum += w[i];
    }
    for (auto& wi : w) wi /= w_sum;

    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    TreeOptions opt;
    opt.max_depth = 1;
    opt.min_samples_leaf = 1;
    Rng rng(seed_);

    stumps_.clear();
    alphas_.clear();
    std::vector<int> pred(n);
    for (int round = 0; round < n_rounds_; ++round) {
        Tree stump = build_classification_tree(x, y, num_classes, w, rows, opt, rng);
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& dist = stump.evaluate(x.row(i));
            int best = 0;
            for (int c = 1; c < num_classes; ++c)
                if (dist[static_cast<std::size_t>(c)] > dist[static_cast<std::size_t>(best)])
                    best = c;
            pred[i] = best;
            if (best != y[i]) err += w[i];
        }
        // a stump no better than random chance under SAMME ends the fit
        if (err >= 1.0 - 1.0 / k) break;
        const double clamped = std::max(err, 1e-12);
        const double alpha = std::log((1.0 - clamped) / clamped) + std::log(k - 1.0);
        stumps_.push_back(std::move(stump));
        alphas_.push_back(alpha);
        if (err <= 0.0) break;  // perfect stump: later rounds would see zero error too

        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (pred[i] != y[i]) w[i] *= std::exp(alpha);
            total += w[i];
        }
        for (auto& wi : w) wi /= total;
    }
    if (stumps_.empty())
        throw ValidationError("adaboost: no stump beat chance on this training set");
}

Matrix AdaBoost::predict_proba(const Matrix& x) const {
    check_predict_input(x);
    const auto k = static_cast<std::size_t>(num_classes_);
    const double alpha_sum = std::accumulate(alphas_.begin(), alphas_.end(), 0.0);
    Matrix out(x.rows(), k);
    std::vector<double> votes(k);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        std::fill(votes.begin(), votes.end(), 0.0);
        for (std::size_t m = 0; m < stumps_.size(); ++m) {
            const auto& dist = stumps_[m].evaluate(x.row(r));
            std::size_t best = 0;
            for (std::size_t c = 1; c < k; ++c)
                if (dist[c] > dist[best]) best = c;
            votes[best] += alphas_[m];
        }
        auto dst = out.row(r);
        if (alpha_sum <= 0.0) {
            std::fill(dst.begin(), dst.end(), 1.0 / static_cast<double>(k));
            continue;
        }
        double peak = -1.0;
        for (std::size_t c = 0; c < k; ++c) {
            votes[c] /= alpha_sum;
            peak = std::max(peak, votes[c]);
        }
        double total = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            dst[c] = std::exp(votes[c] - peak);
            total += dst[c];
        }
        for (std::size_t c = 0; c < k; ++c) dst[c] /= total;
    }
    return out;
}

nlohmann::json AdaBoost::save_state() const {
    nlohmann::json stumps = nlohmann::json::array();
    for (const auto& s : stumps_) stumps.push_back(tree_to_json(s));
    return nlohmann::json{{"num_classes", num_classes_},
                          {"feature_width", feature_width_},
                          {"stumps", std::move(stumps)},
                          {"alphas", alphas_}};
}

void AdaBoost::load_state(const nlohmann::json& state) {
    num_classes_ = state.at("num_classes").get<int>();
    feature_width_ = state.at("feature_width").get<std::size_t>();
    stumps_.clear();
    for (const auto& s : state.at("stumps")) stumps_.push_back(tree_from_json(s));
    alphas_ = state.at("alphas").get<std::vector<double>>();
    if (stumps_.size() != alphas_.size() || stumps_.empty())
        throw ValidationError("adaboost: malformed serialized state");
}

GradientBoosting::GradientBoosting(int n_rounds, double learning_rate, int max_depth,
                                   int min_samples_leaf)
    : n_rounds_(n_rounds),
      learning_rate_(learning_rate),
      max_depth_(max_depth),
      min_samples_leaf_(min_samples_leaf) {
    if (n_rounds_ < 1) throw ValidationError("gradient_boosting: n_rounds must be >= 1");
    if (!(learning_rate_ > 0.0))
        throw ValidationError("gradient_boosting: learning_rate must be positive");
    if (max_depth_ < 1) throw ValidationError("gradient_boosting: max_depth must be >= 1");
    if (min_samples_leaf_ < 1)
        throw ValidationError("gradient_boosting: min_samples_leaf must be >= 1");
}

void GradientBoosting::fit(const Matrix& x, const std::vector<int>& y, int num_classes,
                           const std::vector<double>& sample_weights) {
    check_fit_inputs(x, y, num_classes, sample_weights);
    const std::size_t n = x.rows();
    const auto k = static_cast<std::size_t>(num_classes);
    const auto sorted = presort_features(x);
    std::vector<double> w(n, 1.0);
    if (!sample_weights.empty()) w = sample_weights;

    TreeOptions opt;
    opt.max_depth = max_depth_;
    opt.min_samples_leaf = min_samples_leaf_;

    Matrix scores(n, k);  // running F, all zero at the start
    Matrix proba(n, k);
    std::vector<double> residual(n);
    std::vector<int> row_leaf;
    rounds_.assign(static_cast<std::size_t>(n_rounds_), {});

    for (auto& round : rounds_) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto src = scores.row(i);
            auto dst = proba.row(i);
            const double peak = *std::max_element(src.begin(), src.end());
            double total = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                dst[c] = std::exp(src[c] - peak);
                total += dst[c];
            }
            for (std::size_t c = 0; c < k; ++c) dst[c] /= total;
        }
        round.resize(k);
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t i = 0; i < n; ++i)
                residual[i] = (static_cast<std::size_t>(y[i]) == c ? 1.0 : 0.0) - proba(i, c);
            Tree tree = build_regression_tree(x, sorted, residual, w, opt, row_leaf);

            // Newton step per leaf for the multinomial deviance
            std::vector<double> num(tree.nodes.size(), 0.0);
            std::vector<double> den(tree.nodes.size(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const auto leaf = static_cast<std::size_t>(row_leaf[i]);
                const double r = residual[i];
                num[leaf] += w[i] * r;
                den[leaf] += w[i] * std::abs(r) * (1.0 - std::abs(r));
            }
            const double ratio = (static_cast<double>(k) - 1.0) / static_cast<double>(k);
            for (auto& node : tree.nodes) {
                if (node.feature >= 0) continue;
                const auto id = static_cast<std::size_t>(&node - tree.nodes.data());
                node.value = {den[id] > 1e-150 ? ratio * num[id] / den[id] : 0.0};
            }
            for (std::size_t i = 0; i < n; ++i)
                scores(i, c) +=
                    learning_rate_ * tree.nodes[static_cast<std::size_t>(row_leaf[i])].value[0];
            round[c] = std::move(tree);
        }
    }
}

Matrix GradientBoosting::predict_proba(const Matrix& x) const {
    check_predict_input(x);
    const auto k = static_cast<std::size_t>(num_classes_);
    Matrix out(x.rows(), k);
    parallel_for(x.rows(), [&](std::size_t begin, std::size_t end) {
        std::vector<double> score(k);
        for (std::size_t r = begin; r < end; ++r) {
            std::fill(score.begin(), score.end(), 0.0);
            for (const auto& round : rounds_)
                for (std::size_t c = 0; c < k; ++c)
                    score[c] += learning_rate_ * round[c].evaluate(x.row(r))[0];
            const double peak = *std::max_element(score.begin(), score.end());
            double total = 0.0;
            auto dst = out.row(r);
            for (std::size_t c = 0; c < k; ++c) {
                dst[c] = std::exp(score[c] - peak);
                total += dst[c];
            }
            for (std::size_t c = 0; c < k; ++c) dst[c] /= total;
        }
    });
    return out;
}

nlohmann::json GradientBoosting::save_state() const {
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& round : rounds_) {
        nlohmann::json per_class = nlohmann::json::array();
        for (const auto& t : round) per_class.push_back(tree_to_json(t));
        rounds.push_back(std::move(per_class));
    }
    return nlohmann::json{{"num_classes", num_classes_},
                          {"feature_width", feature_width_},
                          {"learning_rate", learning_rate_},
                          {"rounds", std::move(rounds)}};
}

void GradientBoosting::load_state(const nlohmann::json& state) {
    num_classes_ = state.at("num_classes").get<int>();
    feature_width_ = state.at("feature_width").get<std::size_t>();
    learning_rate_ = state.at("learning_rate").get<double>();
    rounds_.clear();
    for (const auto& round : state.at("rounds")) {
        std::vector<Tree> per_class;
        for (const auto& t : round) per_class.push_back(tree_from_json(t));
        if (per_class.size() != static_cast<std::size_t>(num_classes_))
            throw ValidationError("gradient_boosting: malformed serialized state");
        rounds_.push_back(std::move(per_class));
    }
    if (rounds_.empty()) throw ValidationError("gradient_boosting: serialized state has no rounds");
}

}  // namespace gridsentry
