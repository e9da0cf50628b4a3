#pragma once

#include <cstdint>
#include <vector>

#include "gridsentry/dataset.hpp"
#include "gridsentry/matrix.hpp"
#include "gridsentry/schedule.hpp"
#include "gridsentry/stream.hpp"

namespace gridsentry {

// Streaming tallies. Accuracy is measured over the classified samples only —
// abstentions cost coverage, not accuracy — and the anomaly_* fields restrict
// the same accounting to samples whose true class is not the normal one.
struct StreamMetrics {
    std::size_t total = 0;
    std::size_t classified = 0;
    std::size_t abstained = 0;
    std::size_t correct = 0;
    std::size_t anomaly_total = 0;
    std::size_t anomaly_classified = 0;
    std::size_t anomaly_correct = 0;

    double coverage() const;          // classified / total
    double overall_accuracy() const;  // correct / classified
    double anomaly_accuracy() const;  // anomaly_correct / anomaly_classified
};

// Score decisions against per-sample encoded truth (indexed by emit_index).
// The window variant keeps only emit indices in [lo, hi]; the plain call
// scores everything.
StreamMetrics score_stream(const std::vector<Decision>& decisions,
                           const std::vector<int>& truth_encoded, int normal_class = 0);
StreamMetrics score_stream_window(const std::vector<Decision>& decisions,
                                  const std::vector<int>& truth_encoded, std::int64_t lo,
                                  std::int64_t hi, int normal_class = 0);

// Per-event roll-up over a scored time interval. detection_rate charges
// abstentions as misses; accuracy_classified ignores them.
struct EventScore {
    int class_id = 0;    // original (un-encoded) label
    double start = 0.0;  // scored interval, margins already applied
    double end = 0.0;
    std::size_t total = 0;
    std::size_t classified = 0;
    std::size_t correct = 0;

    double detection_rate() const;       // correct / total
    double accuracy_classified() const;  // correct / classified
};

// Score one time interval: every decision whose sample time falls inside
// [start, end] (quarter-sample guard band, matching the labeler) counts, and
// a decision is correct when it equals expected_encoded.
EventScore score_interval(const std::vector<Decision>& decisions, int class_id,
                          int expected_encoded, double start, double end,
                          double sample_rate, double start_timestamp);

// One EventScore per scheduled event, each trimmed by the margins so the
// settled interior is scored rather than the transition edges.
std::vector<EventScore> per_event_scores(const std::vector<Decision>& decisions,
                                         const EventSchedule& schedule,
                                         const LabelEncoder& encoder, double sample_rate,
                                         double start_timestamp, double margin_start,
                                         double margin_end);

// Rows = truth, columns = prediction. Abstentions (negative predictions) are
// not representable here and are rejected.
Matrix confusion_matrix(const std::vector<int>& truth, const std::vector<int>& pred,
                        int num_classes);

// The failure signature worth flagging: a model that looks strong offline but
// refuses to commit on a live stream.
bool high_accuracy_low_coverage(double offline_accuracy, const StreamMetrics& stream);

}  // namespace gridsentry
