#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gridsentry/matrix.hpp"
#include "gridsentry/schedule.hpp"

namespace gridsentry {

// COMTRADE transient-record support, 1999 revision, analog channels only.
// A record is a .cfg/.dat file pair; the dat payload is either ASCII rows or
// fixed-layout binary with 16-bit analog samples. Status/digital channels are
// rejected. Per-row dat timestamps are redundant in fixed-rate records and
// are reconstructed from sample index and rate instead.

enum class DatFormat { ascii, binary16 };

struct ChannelSpec {
    int index = 0;      // 1-based position, contiguous within a record
    std::string name;
    std::string unit;   // "V" or "A"
    double scale = 1.0;   // a: stored value v maps to a*v + b
    double offset = 0.0;  // b
};

struct SamplingSpec {
    double line_frequency = 60.0;
    double sample_rate = 0.0;       // Hz
    std::int64_t total_samples = 0;
    double start_timestamp = 0.0;   // seconds at sample 0

    double samples_per_cycle() const { return sample_rate / line_frequency; }
    void validate() const;
};

struct WaveformRecord {
    std::string station = "GRIDSENTRY";
    std::string device = "MU";
    std::string version = "1999";
    std::vector<ChannelSpec> channels;
    SamplingSpec sampling;
    Matrix data;  // total_samples x channels, engineering values

    double sample_time(std::int64_t i) const {
        return sampling.start_timestamp + static_cast<double>(i) / sampling.sample_rate;
    }
    void validate() const;
};

// Parses a cfg/dat pair into engineering values. Malformed cfg lines raise
// ParseError with the offending line number; payload inconsistencies
// (truncation, non-finite values, the binary missing-data marker) raise
// DataError.
WaveformRecord read_record(std::string_view cfg_text, std::string_view dat_payload);

// Serializes a record. ASCII stores engineering values directly (unit
// scale, >= 6 significant digits); binary16 picks per-channel scale/offset so
// every sample fits a signed 16-bit integer, which bounds the read-back error
// by scale/2.
std::pair<std::string, std::string> write_record(const WaveformRecord& record,
                                                 DatFormat format);

// Ground-truth labels: class_id where the sample time falls inside a closed
// event interval, 0 elsewhere. Throws ValidationError on overlapping events.
std::vector<int> attach_labels(const WaveformRecord& record,
                               const EventSchedule& schedule);

// File-level helpers.
WaveformRecord read_record_files(const std::string& cfg_path, const std::string& dat_path);
void write_record_files(const WaveformRecord& record, DatFormat format,
                        const std::string& cfg_path, const std::string& dat_path);

// Label sidecar CSV ("sample_index,label").
std::vector<int> read_label_csv(const std::string& path);
void write_label_csv(const std::string& path, const std::vector<int>& labels);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace gridsentry
