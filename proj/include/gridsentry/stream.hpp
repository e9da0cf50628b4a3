#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gridsentry/classifiers.hpp"
#include "gridsentry/matrix.hpp"

namespace gridsentry {

// One decision per sample: the window-smoothed posterior is thresholded, and
// samples whose best smoothed probability falls below tau are abstained on
// rather than guessed at.
inline constexpr int kAbstain = -1;

struct StreamConfig {
    std::size_t n_cyc = 80;  // smoothing window length in samples
    double tau = 0.6;        // confidence threshold; the boundary classifies
    void validate() const;
};

struct Decision {
    std::int64_t emit_index = 0;
    int class_id = kAbstain;  // encoded class, or kAbstain
    double confidence = 0.0;  // max of the smoothed simplex
};

struct LatencyStats {
    double mean_us = 0.0;
    double p50_us = 0.0;
    double p95_us = 0.0;
    double max_us = 0.0;
};

struct DecisionTrace {
    std::vector<Decision> decisions;  // one per sample, ordered by emit_index
    std::size_t total = 0;
    std::size_t classified = 0;
    std::size_t abstained = 0;
    std::int64_t first_live = 0;  // earliest emit index produced during the pass
    std::int64_t last_live = 0;   // latest emit index produced during the pass
    LatencyStats latency;
};

// Causal smoothing core. Feed one probability simplex per sample; once
// n_cyc samples are buffered every push emits the decision for the sample
// half a window back (emission lag n_cyc/2). flush() settles the head and
// tail samples with nearest-edge padded windows so every pushed sample ends
// up with exactly one decision and the result matches the edge-padded
// offline smoothing of the whole stream.
class StreamEngine {
public:
    StreamEngine(const StreamConfig& config, int num_classes);

    std::optional<Decision> push(std::span<const double> proba);
    std::vector<Decision> flush();

    std::size_t pushed() const { return pushed_; }
    std::size_t n_half() const { return n_half_; }

private:
    Decision decide(std::int64_t emit_index, std::span<const double> window_sum) const;

    StreamConfig config_;
    std::size_t k_;
    std::size_t n_half_;
    Matrix ring_;  // most recent n_cyc simplexes, row = sample index mod n_cyc
    Matrix head_;  // the first n_cyc simplexes, kept for the head backfill
    std::size_t pushed_ = 0;
    bool flushed_ = false;
};

// Offline reference: edge-padded centered moving average over the rows of a
// simplex matrix, window n_cyc, indices clamped to [0, N-1].
Matrix edge_padded_offline_smooth(const Matrix& proba, std::size_t n_cyc);

// Full pass over a pre-scaled feature matrix: per-sample model inference,
// smoothing and thresholding (timed together per push), then the flush.
// Throws ValidationError when the stream is shorter than one window.
DecisionTrace run_stream(const ProbabilisticClassifier& model, const Matrix& features,
                         const StreamConfig& config);

}  // namespace gridsentry
