#include "gridsentry/metrics.hpp"

#include <limits>
#include <string>

namespace gridsentry {

namespace {

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double StreamMetrics::coverage() const { return ratio(classified, total); }
double StreamMetrics::overall_accuracy() const { return ratio(correct, classified); }
double StreamMetrics::anomaly_accuracy() const {
    return ratio(anomaly_correct, anomaly_classified);
}

StreamMetrics score_stream_window(const std::vector<Decision>& decisions,
                                  const std::vector<int>& truth_encoded, std::int64_t lo,
                                  std::int64_t hi, int normal_class) {
    StreamMetrics m;
    for (const auto& d : decisions) {
        if (d.emit_index < lo || d.emit_index > hi) continue;
        if (d.emit_index < 0 || d.emit_index >= static_cast<std::int64_t>(truth_encoded.size()))
            throw ValidationError("stream metrics: decision index " +
                                  std::to_string(d.emit_index) + " has no truth label (" +
                                  std::to_string(truth_encoded.size()) + " labels)");
        const int truth = truth_encoded[static_cast<std::size_t>(d.emit_index)];
        const bool anomaly = truth != normal_class;
        const bool hit = d.class_id == truth;
        ++m.total;
        if (anomaly) ++m.anomaly_total;
        if (d.class_id == kAbstain) {
            ++m.abstained;
            continue;
        }
        ++m.classified;
        if (hit) ++m.correct;
        if (anomaly) {
            ++m.anomaly_classified;
            if (hit) ++m.anomaly_correct;
        }
    }
    return m;
}

StreamMetrics score_stream(const std::vector<Decision>& decisions,
                           const std::vector<int>& truth_encoded, int normal_class) {
    return score_stream_window(decisions, truth_encoded,
                               std::numeric_limits<std::int64_t>::min(),
                               std::numeric_limits<std::int64_t>::max(), normal_class);
}

double EventScore::detection_rate() const { return ratio(correct, total); }
double EventScore::accuracy_classified() const { return ratio(correct, classified); }

EventScore score_interval(const std::vector<Decision>& decisions, int class_id,
                          int expected_encoded, double start, double end,
                          double sample_rate, double start_timestamp) {
    if (!(sample_rate > 0.0)) throw ValidationError("event score: sample rate must be positive");
    EventScore s;
    s.class_id = class_id;
    s.start = start;
    s.end = end;
    const double eps = 0.25 / sample_rate;
    for (const auto& d : decisions) {
        const double t =
            start_timestamp + static_cast<double>(d.emit_index) / sample_rate;
        if (t < start - eps || t > end + eps) continue;
        ++s.total;
        if (d.class_id == kAbstain) continue;
        ++s.classified;
        if (d.class_id == expected_encoded) ++s.correct;
    }
    return s;
}

std::vector<EventScore> per_event_scores(const std::vector<Decision>& decisions,
                                         const EventSchedule& schedule,
                                         const LabelEncoder& encoder, double sample_rate,
                                         double start_timestamp, double margin_start,
                                         double margin_end) {
    if (margin_start < 0.0 || margin_end < 0.0)
        throw ValidationError("event score: margins must be non-negative");
    std::vector<EventScore> out;
    out.reserve(schedule.events.size());
    for (const auto& ev : schedule.events) {
        const double lo = ev.start + margin_start;
        const double hi = ev.end - margin_end;
        if (lo > hi)
            throw ValidationError("event score: margins swallow the whole event at " +
                                  format_double(ev.start));
        out.push_back(score_interval(decisions, ev.class_id, encoder.encode(ev.class_id),
                                     lo, hi, sample_rate, start_timestamp));
    }
    return out;
}

Matrix confusion_matrix(const std::vector<int>& truth, const std::vector<int>& pred,
                        int num_classes) {
    if (truth.size() != pred.size())
        throw ValidationError("confusion matrix: truth and prediction lengths differ");
    if (num_classes < 1) throw ValidationError("confusion matrix: need at least one class");
    const auto k = static_cast<std::size_t>(num_classes);
    Matrix m(k, k);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= num_classes || pred[i] < 0 || pred[i] >= num_classes)
            throw ValidationError("confusion matrix: class id outside [0, " +
                                  std::to_string(num_classes) + ") at row " +
                                  std::to_string(i));
        m(static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(pred[i])) += 1.0;
    }
    return m;
}

bool high_accuracy_low_coverage(double offline_accuracy, const StreamMetrics& stream) {
    return offline_accuracy >= 0.95 && stream.coverage() < 0.5;
}

}  // namespace gridsentry
