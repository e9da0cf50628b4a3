#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "gridsentry/classifiers.hpp"
#include "gridsentry/metrics.hpp"
#include "gridsentry/stream.hpp"

namespace gridsentry {

// Offline evaluation summary, one row per trained model.
struct OfflineReportRow {
    std::string model;
    OfflineMetrics metrics;
};

std::string render_offline_report_csv(const std::vector<OfflineReportRow>& rows);

// Everything a streaming pass produced for one model.
struct StreamReport {
    std::string model;
    StreamConfig config;
    StreamMetrics all;             // every emitted decision
    StreamMetrics steady;          // emit indices in [first_live, last_live]
    LatencyStats latency;
    std::vector<EventScore> events;  // empty when no schedule was supplied
    double offline_accuracy = -1.0;  // negative when unknown
};

nlohmann::json stream_report_json(const StreamReport& report);

// Per-sample decision trace: time, the decoded class (or -1 for abstain) and
// the smoothed confidence behind it.
std::string render_trace_csv(const std::vector<Decision>& decisions,
                             const LabelEncoder& encoder, double sample_rate,
                             double start_timestamp);

// Offline-strong / stream-shy comparison across models.
struct GapReportRow {
    std::string model;
    double offline_accuracy = 0.0;
    double coverage = 0.0;
    double steady_coverage = 0.0;
    bool flagged = false;
};

std::string render_gap_report_csv(const std::vector<GapReportRow>& rows);
nlohmann::json gap_report_json(const std::vector<GapReportRow>& rows);

// Run provenance. Everything under "deterministic" must be byte-identical
// across reruns with the same inputs and seed; wall-clock readings live under
// "timings" and are excluded from that comparison.
class RunManifest {
public:
    void set(const std::string& key, const nlohmann::json& value);
    void set_timing(const std::string& key, double seconds);
    // records the FNV-1a hash of the file's bytes under deterministic["files"]
    void record_file(const std::string& key, const std::string& path);

    const nlohmann::json& deterministic() const { return deterministic_; }
    nlohmann::json to_json() const;
    std::string render() const;  // pretty JSON, trailing newline

private:
    nlohmann::json deterministic_ = nlohmann::json::object();
    nlohmann::json timings_ = nlohmann::json::object();
};

// Shared writer: pretty two-space JSON with a trailing newline.
void write_json_file(const std::string& path, const nlohmann::json& value);

}  // namespace gridsentry
