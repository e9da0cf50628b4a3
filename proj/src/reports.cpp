#include "gridsentry/reports.hpp"

#include <sstream>

#include "gridsentry/comtrade.hpp"

namespace gridsentry {

std::string render_offline_report_csv(const std::vector<OfflineReportRow>& rows) {
    std::ostringstream out;
    out << "model,accuracy,precision,recall,f1\n";
    for (const auto& r : rows) {
        out << r.model << ',' << format_double(r.metrics.accuracy) << ','
            << format_double(r.metrics.precision) << ',' << format_double(r.metrics.recall)
            << ',' << format_double(r.metrics.f1) << '\n';
    }
    return out.str();
}

namespace {

nlohmann::json metrics_json(const StreamMetrics& m) {
    return {
        {"total", m.total},
        {"classified", m.classified},
        {"abstained", m.abstained},
        {"correct", m.correct},
        {"anomaly_total", m.anomaly_total},
        {"anomaly_classified", m.anomaly_classified},
        {"anomaly_correct", m.anomaly_correct},
        {"coverage", m.coverage()},
        {"overall_accuracy", m.overall_accuracy()},
        {"anomaly_accuracy", m.anomaly_accuracy()},
    };
}

}  // namespace

nlohmann::json stream_report_json(const StreamReport& report) {
    nlohmann::json j{
        {"model", report.model},
        {"n_cyc", report.config.n_cyc},
        {"tau", report.config.tau},
        {"all", metrics_json(report.all)},
        {"steady", metrics_json(report.steady)},
        {"latency_us",
         {{"mean", report.latency.mean_us},
          {"p50", report.latency.p50_us},
          {"p95", report.latency.p95_us},
          {"max", report.latency.max_us}}},
    };
    if (report.offline_accuracy >= 0.0) {
        j["offline_accuracy"] = report.offline_accuracy;
        j["high_accuracy_low_coverage"] =
            high_accuracy_low_coverage(report.offline_accuracy, report.all);
    }
    if (!report.events.empty()) {
        nlohmann::json events = nlohmann::json::array();
        for (const auto& ev : report.events) {
            events.push_back({{"class_id", ev.class_id},
                              {"start", ev.start},
                              {"end", ev.end},
                              {"total", ev.total},
                              {"classified", ev.classified},
                              {"correct", ev.correct},
                              {"detection_rate", ev.detection_rate()},
                              {"accuracy_classified", ev.accuracy_classified()}});
        }
        j["events"] = std::move(events);
    }
    return j;
}

std::string render_trace_csv(const std::vector<Decision>& decisions,
                             const LabelEncoder& encoder, double sample_rate,
                             double start_timestamp) {
    if (!(sample_rate > 0.0)) throw ValidationError("trace: sample rate must be positive");
    std::ostringstream out;
    out << "time_s,class_id,confidence\n";
    for (const auto& d : decisions) {
        const double t =
            start_timestamp + static_cast<double>(d.emit_index) / sample_rate;
        const int label = d.class_id == kAbstain ? kAbstain : encoder.decode(d.class_id);
        out << format_double(t) << ',' << label << ',' << format_double(d.confidence)
            << '\n';
    }
    return out.str();
}

std::string render_gap_report_csv(const std::vector<GapReportRow>& rows) {
    std::ostringstream out;
    out << "model,offline_accuracy,coverage,steady_coverage,high_accuracy_low_coverage\n";
    for (const auto& r : rows) {
        out << r.model << ',' << format_double(r.offline_accuracy) << ','
            << format_double(r.coverage) << ',' << format_double(r.steady_coverage) << ','
            << (r.flagged ? "true" : "false") << '\n';
    }
    return out.str();
}

nlohmann::json gap_report_json(const std::vector<GapReportRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        arr.push_back({{"model", r.model},
                       {"offline_accuracy", r.offline_accuracy},
                       {"coverage", r.coverage},
                       {"steady_coverage", r.steady_coverage},
                       {"high_accuracy_low_coverage", r.flagged}});
    }
    return {{"models", std::move(arr)}};
}

void RunManifest::set(const std::string& key, const nlohmann::json& value) {
    deterministic_[key] = value;
}

void RunManifest::set_timing(const std::string& key, double seconds) {
    timings_[key] = seconds;
}

void RunManifest::record_file(const std::string& key, const std::string& path) {
    const std::string bytes = read_file(path);
    deterministic_["files"][key] = hex64(fnv1a64(bytes));
}

nlohmann::json RunManifest::to_json() const {
    return {{"deterministic", deterministic_}, {"timings", timings_}};
}

std::string RunManifest::render() const { return to_json().dump(2) + "\n"; }

void write_json_file(const std::string& path, const nlohmann::json& value) {
    write_file(path, value.dump(2) + "\n");
}

}  // namespace gridsentry
