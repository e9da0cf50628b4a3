#include "gridsentry/stream.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace gridsentry {

void StreamConfig::validate() const {
    if (n_cyc < 2) throw ValidationError("stream: n_cyc must be at least 2");
    if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("stream: tau must lie in [0, 1]");
}

StreamEngine::StreamEngine(const StreamConfig& config, int num_classes)
    : config_(config), k_(static_cast<std::size_t>(num_classes)), n_half_(config.n_cyc / 2) {
    config_.validate();
    if (num_classes < 1) throw ValidationError("stream: num_classes must be positive");
    ring_ = Matrix(config_.n_cyc, k_);
    head_ = Matrix(config_.n_cyc, k_);
}

Decision StreamEngine::decide(std::int64_t emit_index,
                              std::span<const double> window_sum) const {
    std::size_t best = 0;
    for (std::size_t c = 1; c < k_; ++c)
        if (window_sum[c] > window_sum[best]) best = c;  // ties: lowest class
    const double confidence = window_sum[best] / static_cast<double>(config_.n_cyc);
    Decision d;
    d.emit_index = emit_index;
    d.confidence = confidence;
    d.class_id = confidence >= config_.tau ? static_cast<int>(best) : kAbstain;
    return d;
}

std::optional<Decision> StreamEngine::push(std::span<const double> proba) {
    if (flushed_) throw ContractError("stream: push after flush");
    if (proba.size() != k_)
        throw ContractError("stream: probability width " + std::to_string(proba.size()) +
                            " does not match " + std::to_string(k_) + " classes");
    double total = 0.0;
    for (double p : proba) {
        if (!std::isfinite(p) || p < -1e-12)
            throw ContractError("stream: probabilities must be finite and non-negative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw ContractError("stream: probabilities sum to " + format_double(total) +
                            ", not 1");

    const std::size_t i = pushed_;
    auto slot = ring_.row(i % config_.n_cyc);
    std::copy(proba.begin(), proba.end(), slot.begin());
    if (i < config_.n_cyc) {
        auto head = head_.row(i);
        std::copy(proba.begin(), proba.end(), head.begin());
    }
    ++pushed_;

    if (i + 1 < config_.n_cyc) return std::nullopt;
    // the buffer now holds samples [i - n_cyc + 1, i]: the centered window of
    // the sample half a window back
    std::vector<double> sum(k_, 0.0);
    for (std::size_t r = 0; r < config_.n_cyc; ++r) {
        const auto row = ring_.row(r);
        for (std::size_t c = 0; c < k_; ++c) sum[c] += row[c];
    }
    return decide(static_cast<std::int64_t>(i - n_half_), sum);
}

std::vector<Decision> StreamEngine::flush() {
    if (flushed_) throw ContractError("stream: flush called twice");
    if (pushed_ < config_.n_cyc)
        throw ValidationError("stream: " + std::to_string(pushed_) +
                              " samples are fewer than one smoothing window (" +
                              std::to_string(config_.n_cyc) + ")");
    flushed_ = true;
    const auto n = static_cast<std::int64_t>(pushed_);
    const auto n_cyc = static_cast<std::int64_t>(config_.n_cyc);
    const auto half = static_cast<std::int64_t>(n_half_);
    const std::int64_t first_live = n_cyc - 1 - half;
    const std::int64_t last_live = n - 1 - half;

    std::vector<Decision> out;
    std::vector<double> sum(k_);
    // head: windows clamped at the left edge, served from the stored head
    for (std::int64_t e = 0; e < first_live; ++e) {
        std::fill(sum.begin(), sum.end(), 0.0);
        for (std::int64_t j = e + half - n_cyc + 1; j <= e + half; ++j) {
            const auto row = head_.row(static_cast<std::size_t>(std::max<std::int64_t>(j, 0)));
            for (std::size_t c = 0; c < k_; ++c) sum[c] += row[c];
        }
        out.push_back(decide(e, sum));
    }
    // tail: windows clamped at the right edge, served from the ring
    for (std::int64_t e = last_live + 1; e < n; ++e) {
        std::fill(sum.begin(), sum.end(), 0.0);
        for (std::int64_t j = e + half - n_cyc + 1; j <= e + half; ++j) {
            const std::int64_t clamped = std::min<std::int64_t>(j, n - 1);
            const auto row =
                ring_.row(static_cast<std::size_t>(clamped) % config_.n_cyc);
            for (std::size_t c = 0; c < k_; ++c) sum[c] += row[c];
        }
        out.push_back(decide(e, sum));
    }
    return out;
}

Matrix edge_padded_offline_smooth(const Matrix& proba, std::size_t n_cyc) {
    if (n_cyc < 2) throw ValidationError("smooth: n_cyc must be at least 2");
    const std::size_t n = proba.rows();
    const std::size_t k = proba.cols();
    if (n == 0) throw ValidationError("smooth: empty input");
    const auto half = static_cast<std::int64_t>(n_cyc / 2);
    const auto last = static_cast<std::int64_t>(n) - 1;

    // prefix sums per class, plus replicated edge rows for out-of-range taps
    Matrix prefix(n + 1, k);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = proba.row(i);
        const auto prev = prefix.row(i);
        auto next = prefix.row(i + 1);
        for (std::size_t c = 0; c < k; ++c) next[c] = prev[c] + row[c];
    }
    Matrix out(n, k);
    for (std::int64_t e = 0; e <= last; ++e) {
        const std::int64_t hi = e + half;
        const std::int64_t lo = hi - static_cast<std::int64_t>(n_cyc) + 1;
        const std::int64_t lo_c = std::max<std::int64_t>(lo, 0);
        const std::int64_t hi_c = std::min<std::int64_t>(hi, last);
        const auto below = static_cast<double>(lo_c - lo);
        const auto above = static_cast<double>(hi - hi_c);
        const auto lo_row = prefix.row(static_cast<std::size_t>(lo_c));
        const auto hi_row = prefix.row(static_cast<std::size_t>(hi_c) + 1);
        const auto first = proba.row(0);
        const auto final = proba.row(n - 1);
        auto dst = out.row(static_cast<std::size_t>(e));
        for (std::size_t c = 0; c < k; ++c)
            dst[c] = (hi_row[c] - lo_row[c] + below * first[c] + above * final[c]) /
                     static_cast<double>(n_cyc);
    }
    return out;
}

DecisionTrace run_stream(const ProbabilisticClassifier& model, const Matrix& features,
                         const StreamConfig& config) {
    config.validate();
    if (features.rows() < config.n_cyc)
        throw ValidationError("stream: " + std::to_string(features.rows()) +
                              " samples are fewer than one smoothing window (" +
                              std::to_string(config.n_cyc) + ")");

    StreamEngine engine(config, model.num_classes());
    DecisionTrace trace;
    trace.total = features.rows();
    std::vector<double> latencies;
    latencies.reserve(features.rows());

    Matrix sample(1, features.cols());
    bool saw_live = false;
    for (std::size_t i = 0; i < features.rows(); ++i) {
        const auto src = features.row(i);
        std::copy(src.begin(), src.end(), sample.row(0).begin());
        const auto t0 = std::chrono::steady_clock::now();
        const Matrix proba = model.predict_proba(sample);
        auto decision = engine.push(proba.row(0));
        const auto t1 = std::chrono::steady_clock::now();
        latencies.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
        if (decision) {
            if (!saw_live) {
                trace.first_live = decision->emit_index;
                saw_live = true;
            }
            trace.last_live = decision->emit_index;
            trace.decisions.push_back(*decision);
        }
    }
    auto settled = engine.flush();
    trace.decisions.insert(trace.decisions.end(), settled.begin(), settled.end());
    std::sort(trace.decisions.begin(), trace.decisions.end(),
              [](const Decision& a, const Decision& b) { return a.emit_index < b.emit_index; });

    for (const auto& d : trace.decisions)
        ++(d.class_id == kAbstain ? trace.abstained : trace.classified);

    std::sort(latencies.begin(), latencies.end());
    const auto count = latencies.size();
    double total = 0.0;
    for (double v : latencies) total += v;
    const auto rank = [&](double q) {
        return latencies[static_cast<std::size_t>(q * static_cast<double>(count - 1))];
    };
    trace.latency.mean_us = total / static_cast<double>(count);
    trace.latency.p50_us = rank(0.50);
    trace.latency.p95_us = rank(0.95);
    trace.latency.max_us = latencies.back();
    return trace;
}

}  // namespace gridsentry
