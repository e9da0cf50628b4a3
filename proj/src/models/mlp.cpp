#include "gridsentry/models/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gridsentry {

namespace {

// z = a * w^T + bias, row-major everywhere; inner loops run over contiguous
// memory so the compiler can vectorize them
void forward_layer(const Matrix& a, const Matrix& w, const std::vector<double>& bias,
                   Matrix& z) {
    const std::size_t n = a.rows(), in = a.cols(), out = w.rows();
    for (std::size_t i = 0; i < n; ++i) {
        const auto ai = a.row(i);
        auto zi = z.row(i);
        for (std::size_t o = 0; o < out; ++o) {
            const auto wo = w.row(o);
            double acc = bias[o];
            for (std::size_t f = 0; f < in; ++f) acc += wo[f] * ai[f];
            zi[o] = acc;
        }
    }
}

void relu_inplace(Matrix& z) {
    double* p = z.data();
    const std::size_t total = z.rows() * z.cols();
    for (std::size_t i = 0; i < total; ++i) p[i] = p[i] > 0.0 ? p[i] : 0.0;
}

void softmax_rows(Matrix& z) {
    for (std::size_t i = 0; i < z.rows(); ++i) {
        auto row = z.row(i);
        const double peak = *std::max_element(row.begin(), row.end());
        double total = 0.0;
        for (auto& v : row) {
            v = std::exp(v - peak);
            total += v;
        }
        for (auto& v : row) v /= total;
    }
}

}  // namespace

Mlp::Mlp(std::string kind, MlpConfig config, std::uint64_t seed)
    : kind_(std::move(kind)), config_(std::move(config)), seed_(seed) {
    if (config_.hidden_layers.empty()) throw ValidationError(kind_ + ": no hidden layers");
    for (int h : config_.hidden_layers)
        if (h < 1) throw ValidationError(kind_ + ": hidden layer width must be >= 1");
    if (config_.epochs < 1) throw ValidationError(kind_ + ": epochs must be >= 1");
    if (config_.batch_size < 1) throw ValidationError(kind_ + ": batch_size must be >= 1");
    if (!(config_.learning_rate > 0.0))
        throw ValidationError(kind_ + ": learning_rate must be positive");
    if (!(config_.momentum >= 0.0 && config_.momentum < 1.0))
        throw ValidationError(kind_ + ": momentum must lie in [0, 1)");
    if (!(config_.l2 >= 0.0)) throw ValidationError(kind_ + ": l2 must be non-negative");
}

void Mlp::init_params(std::size_t feature_width, int num_classes) {
    feature_width_ = feature_width;
    num_classes_ = num_classes;
    std::vector<std::size_t> dims{feature_width};
    for (int h : config_.hidden_layers) dims.push_back(static_cast<std::size_t>(h));
    dims.push_back(static_cast<std::size_t>(num_classes));

    Rng rng(seed_);
    weights_.clear();
    bias_.clear();
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Matrix w(dims[l + 1], dims[l]);
        const double sigma = std::sqrt(2.0 / static_cast<double>(dims[l]));
        for (std::size_t i = 0; i < w.rows() * w.cols(); ++i)
            w.data()[i] = sigma * rng.next_normal();
        weights_.push_back(std::move(w));
        bias_.emplace_back(dims[l + 1], 0.0);
    }
}

void Mlp::fit(const Matrix& x, const std::vector<int>& y, int num_classes,
              const std::vector<double>& sample_weights) {
    check_fit_inputs(x, y, num_classes, sample_weights);
    const std::size_t n = x.rows();
    init_params(x.cols(), num_classes);
    // the init above consumed draws from Rng(seed); keep a separate stream
    // for the epoch shuffles so both are reproducible
    Rng shuffle_rng = Rng(seed_).fork(1);

    const auto batch = static_cast<std::size_t>(config_.batch_size);
    const std::size_t layers = weights_.size();
    std::vector<Matrix> velocity_w;
    std::vector<std::vector<double>> velocity_b;
    for (std::size_t l = 0; l < layers; ++l) {
        velocity_w.emplace_back(weights_[l].rows(), weights_[l].cols());
        velocity_b.emplace_back(bias_[l].size(), 0.0);
    }
    std::vector<Matrix> grad_w;
    std::vector<std::vector<double>> grad_b;
    for (std::size_t l = 0; l < layers; ++l) {
        grad_w.emplace_back(weights_[l].rows(), weights_[l].cols());
        grad_b.emplace_back(bias_[l].size(), 0.0);
    }
    // activations[0] is the batch input, activations[l+1] the layer outputs
    std::vector<Matrix> activations(layers + 1);
    std::vector<Matrix> deltas(layers);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});

    for (int epoch = 0; epoch < config_.epochs; ++epoch) {
        shuffle_rng.shuffle(perm);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t b = std::min(batch, n - start);

            activations[0] = Matrix(b, feature_width_);
            for (std::size_t i = 0; i < b; ++i) {
                const auto src = x.row(perm[start + i]);
                std::copy(src.begin(), src.end(), activations[0].row(i).begin());
            }
            for (std::size_t l = 0; l < layers; ++l) {
                activations[l + 1] = Matrix(b, weights_[l].rows());
                forward_layer(activations[l], weights_[l], bias_[l], activations[l + 1]);
                if (l + 1 < layers) relu_inplace(activations[l + 1]);
            }
            softmax_rows(activations[layers]);

            double weight_total = 0.0;
            for (std::size_t i = 0; i < b; ++i)
                weight_total +=
                    sample_weights.empty() ? 1.0 : sample_weights[perm[start + i]];

            // output delta: (p - onehot) scaled by the sample share of the batch
            deltas[layers - 1] = activations[layers];
            for (std::size_t i = 0; i < b; ++i) {
                auto row = deltas[layers - 1].row(i);
                const std::size_t row_id = perm[start + i];
                row[static_cast<std::size_t>(y[row_id])] -= 1.0;
                const double scale =
                    (sample_weights.empty() ? 1.0 : sample_weights[row_id]) / weight_total;
                for (auto& v : row) v *= scale;
            }

            for (std::size_t l = layers; l-- > 0;) {
                auto& gw = grad_w[l];
                auto& gb = grad_b[l];
                std::fill(gw.data(), gw.data() + gw.rows() * gw.cols(), 0.0);
                std::fill(gb.begin(), gb.end(), 0.0);
                const Matrix& dz = deltas[l];
                const Matrix& a_in = activations[l];
                for (std::size_t i = 0; i < b; ++i) {
                    const auto dzi = dz.row(i);
                    const auto ai = a_in.row(i);
                    for (std::size_t o = 0; o < gw.rows(); ++o) {
                        const double g = dzi[o];
                        if (g == 0.0) continue;
                        auto gwo = gw.row(o);
                        for (std::size_t f = 0; f < gw.cols(); ++f) gwo[f] += g * ai[f];
                        gb[o] += g;
                    }
                }
                if (l > 0) {
                    deltas[l - 1] = Matrix(b, weights_[l].cols());
                    for (std::size_t i = 0; i < b; ++i) {
                        const auto dzi = dz.row(i);
                        auto dai = deltas[l - 1].row(i);
                        for (std::size_t o = 0; o < weights_[l].rows(); ++o) {
                            const double g = dzi[o];
                            if (g == 0.0) continue;
                            const auto wo = weights_[l].row(o);
                            for (std::size_t f = 0; f < dai.size(); ++f) dai[f] += g * wo[f];
                        }
                        // relu gate: activations are zero exactly where the
                        // pre-activation was clipped
                        const auto act = activations[l].row(i);
                        for (std::size_t f = 0; f < dai.size(); ++f)
                            if (act[f] <= 0.0) dai[f] = 0.0;
                    }
                }

                auto& vw = velocity_w[l];
                auto& w = weights_[l];
                for (std::size_t j = 0; j < w.rows() * w.cols(); ++j) {
                    const double g = gw.data()[j] + config_.l2 * w.data()[j];
                    vw.data()[j] = config_.momentum * vw.data()[j] - config_.learning_rate * g;
                    w.data()[j] += vw.data()[j];
                }
                auto& vb = velocity_b[l];
                for (std::size_t j = 0; j < bias_[l].size(); ++j) {
                    vb[j] = config_.momentum * vb[j] - config_.learning_rate * gb[j];
                    bias_[l][j] += vb[j];
                }
            }
        }
    }
}

Matrix Mlp::predict_proba(const Matrix& x) const {
    check_predict_input(x);
    const std::size_t layers = weights_.size();
    Matrix out(x.rows(), static_cast<std::size_t>(num_classes_));
    constexpr std::size_t kChunk = 1024;
    for (std::size_t start = 0; start < x.rows(); start += kChunk) {
        const std::size_t b = std::min(kChunk, x.rows() - start);
        Matrix a(b, x.cols());
        for (std::size_t i = 0; i < b; ++i) {
            const auto src = x.row(start + i);
            std::copy(src.begin(), src.end(), a.row(i).begin());
        }
        for (std::size_t l = 0; l < layers; ++l) {
            Matrix z(b, weights_[l].rows());
            forward_layer(a, weights_[l], bias_[l], z);
            if (l + 1 < layers) relu_inplace(z);
            a = std::move(z);
        }
        softmax_rows(a);
        for (std::size_t i = 0; i < b; ++i) {
            const auto src = a.row(i);
            std::copy(src.begin(), src.end(), out.row(start + i).begin());
        }
    }
    return out;
}

std::vector<double> Mlp::flat_params() const {
    std::vector<double> flat;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        flat.insert(flat.end(), weights_[l].data(),
                    weights_[l].data() + weights_[l].rows() * weights_[l].cols());
        flat.insert(flat.end(), bias_[l].begin(), bias_[l].end());
    }
    return flat;
}

void Mlp::set_flat_params(const std::vector<double>& flat) {
    std::size_t pos = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        const std::size_t wn = weights_[l].rows() * weights_[l].cols();
        if (pos + wn + bias_[l].size() > flat.size())
            throw ValidationError(kind_ + ": flat parameter vector too short");
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pos),
                  flat.begin() + static_cast<std::ptrdiff_t>(pos + wn), weights_[l].data());
        pos += wn;
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pos),
                  flat.begin() + static_cast<std::ptrdiff_t>(pos + bias_[l].size()),
                  bias_[l].begin());
        pos += bias_[l].size();
    }
    if (pos != flat.size())
        throw ValidationError(kind_ + ": flat parameter vector has trailing values");
}

std::pair<double, std::vector<double>> Mlp::loss_and_gradient(
    const Matrix& x, const std::vector<int>& y,
    const std::vector<double>& sample_weights) const {
    if (weights_.empty()) throw ContractError(kind_ + ": parameters not initialized");
    if (x.rows() != y.size() || x.rows() == 0)
        throw ValidationError(kind_ + ": loss evaluation needs matching non-empty inputs");
    const std::size_t n = x.rows();
    const std::size_t layers = weights_.size();

    std::vector<Matrix> activations(layers + 1);
    activations[0] = x;
    for (std::size_t l = 0; l < layers; ++l) {
        activations[l + 1] = Matrix(n, weights_[l].rows());
        forward_layer(activations[l], weights_[l], bias_[l], activations[l + 1]);
        if (l + 1 < layers) relu_inplace(activations[l + 1]);
    }

    double weight_total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        weight_total += sample_weights.empty() ? 1.0 : sample_weights[i];

    // cross entropy through log-sum-exp, then softmax for the backward pass
    double loss = 0.0;
    Matrix proba = activations[layers];
    for (std::size_t i = 0; i < n; ++i) {
        auto row = proba.row(i);
        const double peak = *std::max_element(row.begin(), row.end());
        double total = 0.0;
        for (auto& v : row) {
            v = std::exp(v - peak);
            total += v;
        }
        const double lse = peak + std::log(total);
        const double wi = sample_weights.empty() ? 1.0 : sample_weights[i];
        loss += wi * (lse - activations[layers](i, static_cast<std::size_t>(y[i])));
        for (auto& v : row) v /= total;
    }
    loss /= weight_total;
    for (const auto& w : weights_) {
        double sq = 0.0;
        for (std::size_t j = 0; j < w.rows() * w.cols(); ++j) sq += w.data()[j] * w.data()[j];
        loss += 0.5 * config_.l2 * sq;
    }

    std::vector<Matrix> grad_w;
    std::vector<std::vector<double>> grad_b;
    for (std::size_t l = 0; l < layers; ++l) {
        grad_w.emplace_back(weights_[l].rows(), weights_[l].cols());
        grad_b.emplace_back(bias_[l].size(), 0.0);
    }

    Matrix delta = std::move(proba);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = delta.row(i);
        row[static_cast<std::size_t>(y[i])] -= 1.0;
        const double scale = (sample_weights.empty() ? 1.0 : sample_weights[i]) / weight_total;
        for (auto& v : row) v *= scale;
    }
    for (std::size_t l = layers; l-- > 0;) {
        auto& gw = grad_w[l];
        auto& gb = grad_b[l];
        const Matrix& a_in = activations[l];
        for (std::size_t i = 0; i < n; ++i) {
            const auto dzi = delta.row(i);
            const auto ai = a_in.row(i);
            for (std::size_t o = 0; o < gw.rows(); ++o) {
                const double g = dzi[o];
                auto gwo = gw.row(o);
                for (std::size_t f = 0; f < gw.cols(); ++f) gwo[f] += g * ai[f];
                gb[o] += g;
            }
        }
        for (std::size_t j = 0; j < gw.rows() * gw.cols(); ++j)
            gw.data()[j] += config_.l2 * weights_[l].data()[j];
        if (l > 0) {
            Matrix next(n, weights_[l].cols());
            for (std::size_t i = 0; i < n; ++i) {
                const auto dzi = delta.row(i);
                auto dai = next.row(i);
                for (std::size_t o = 0; o < weights_[l].rows(); ++o) {
                    const double g = dzi[o];
                    const auto wo = weights_[l].row(o);
                    for (std::size_t f = 0; f < dai.size(); ++f) dai[f] += g * wo[f];
                }
                const auto act = activations[l].row(i);
                for (std::size_t f = 0; f < dai.size(); ++f)
                    if (act[f] <= 0.0) dai[f] = 0.0;
            }
            delta = std::move(next);
        }
    }

    std::vector<double> flat;
    for (std::size_t l = 0; l < layers; ++l) {
        flat.insert(flat.end(), grad_w[l].data(),
                    grad_w[l].data() + grad_w[l].rows() * grad_w[l].cols());
        flat.insert(flat.end(), grad_b[l].begin(), grad_b[l].end());
    }
    return {loss, std::move(flat)};
}

nlohmann::json Mlp::save_state() const {
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        std::vector<double> flat(weights_[l].data(),
                                 weights_[l].data() + weights_[l].rows() * weights_[l].cols());
        layers.push_back({{"out", weights_[l].rows()},
                          {"in", weights_[l].cols()},
                          {"w", std::move(flat)},
                          {"b", bias_[l]}});
    }
    return nlohmann::json{{"num_classes", num_classes_},
                          {"feature_width", feature_width_},
                          {"layers", std::move(layers)}};
}

void Mlp::load_state(const nlohmann::json& state) {
    num_classes_ = state.at("num_classes").get<int>();
    feature_width_ = state.at("feature_width").get<std::size_t>();
    weights_.clear();
    bias_.clear();
    for (const auto& layer : state.at("layers")) {
        const auto out = layer.at("out").get<std::size_t>();
        const auto in = layer.at("in").get<std::size_t>();
        const auto flat = layer.at("w").get<std::vector<double>>();
        auto b = layer.at("b").get<std::vector<double>>();
        if (flat.size() != out * in || b.size() != out)
            throw ValidationError(kind_ + ": malformed serialized layer");
        Matrix w(out, in);
        std::copy(flat.begin(), flat.end(), w.data());
        weights_.push_back(std::move(w));
        bias_.push_back(std::move(b));
    }
    if (weights_.empty()) throw ValidationError(kind_ + ": serialized state has no layers");
}

}  // namespace gridsentry
