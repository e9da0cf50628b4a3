#include "gridsentry/comtrade.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gridsentry/common.hpp"

namespace gridsentry {

namespace {

constexpr std::uint16_t kMissingMarker = 0x8000u;
constexpr double kInt16FullScale = 32767.0;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_on(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t begin = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == sep) {
            out.push_back(trim(line.substr(begin, i - begin)));
            begin = i + 1;
        }
    }
    return out;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    return split_on(line, ',');
}

[[noreturn]] void fail_line(std::size_t line_no, const std::string& what) {
    throw ParseError("line " + std::to_string(line_no) + ": " + what);
}

long long parse_int(std::string_view s, std::size_t line_no, const char* what) {
    s = trim(s);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        fail_line(line_no, std::string("expected integer for ") + what + ", got '" +
                               std::string(s) + "'");
    }
    return value;
}

double parse_real(std::string_view s, std::size_t line_no, const char* what) {
    s = trim(s);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
        fail_line(line_no, std::string("expected finite number for ") + what + ", got '" +
                               std::string(s) + "'");
    }
    return value;
}

// Splits text into lines; tolerates a missing trailing newline and drops
// trailing blank lines.
std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t begin = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == '\n') {
            if (i > begin || i < text.size()) lines.push_back(text.substr(begin, i - begin));
            begin = i + 1;
        }
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    return lines;
}

std::uint32_t read_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16le(const unsigned char* p) {
    return static_cast<std::uint16_t>(static_cast<std::uint16_t>(p[0]) |
                                      (static_cast<std::uint16_t>(p[1]) << 8));
}

void append_u32le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void append_u16le(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

long long elapsed_us(const SamplingSpec& sampling, std::int64_t index) {
    return std::llround(static_cast<double>(index) / sampling.sample_rate * 1e6);
}

// "dd/mm/yyyy,hh:mm:ss.ssssss". The date part is fixed; start_timestamp is
// carried as time-of-day with microsecond resolution.
std::string format_start_instant(double seconds) {
    long long total_us = std::llround(seconds * 1e6);
    long long h = total_us / 3'600'000'000LL;
    long long m = (total_us / 60'000'000LL) % 60;
    long long s = (total_us / 1'000'000LL) % 60;
    long long us = total_us % 1'000'000LL;
    char buf[48];
    std::snprintf(buf, sizeof(buf), "01/01/2000,%02lld:%02lld:%02lld.%06lld", h, m, s, us);
    return buf;
}

double parse_start_instant(std::string_view line, std::size_t line_no) {
    line = trim(line);
    if (line.empty()) return 0.0;
    auto parts = split_fields(line);
    if (parts.size() != 2) fail_line(line_no, "expected 'dd/mm/yyyy,hh:mm:ss.ssssss'");
    auto clock = split_on(parts[1], ':');
    if (clock.size() != 3) fail_line(line_no, "expected time as hh:mm:ss.ssssss");
    double h = static_cast<double>(parse_int(clock[0], line_no, "hours"));
    double m = static_cast<double>(parse_int(clock[1], line_no, "minutes"));
    double s = parse_real(clock[2], line_no, "seconds");
    if (h < 0 || h > 23 || m < 0 || m > 59 || s < 0.0 || s >= 60.0) {
        fail_line(line_no, "time of day out of range");
    }
    return h * 3600.0 + m * 60.0 + s;
}

struct CfgInfo {
    std::string station;
    std::string device;
    std::string version;
    std::vector<ChannelSpec> channels;
    SamplingSpec sampling;
    DatFormat format = DatFormat::ascii;
};

CfgInfo parse_cfg(std::string_view cfg_text) {
    auto lines = split_lines(cfg_text);
    std::size_t ln = 0;  // 1-based line number for messages
    auto next_line = [&]() -> std::string_view {
        if (ln >= lines.size()) fail_line(ln + 1, "unexpected end of file");
        return lines[ln++];
    };

    CfgInfo info;

    auto head = split_fields(next_line());
    if (head.size() != 3) fail_line(ln, "expected 'station,device,revision'");
    info.station = std::string(head[0]);
    info.device = std::string(head[1]);
    info.version = std::string(head[2]);
    if (info.version != "1999") {
        fail_line(ln, "unsupported revision '" + info.version + "' (only 1999)");
    }

    auto counts = split_fields(next_line());
    if (counts.size() != 3) fail_line(ln, "expected 'TT,##A,##D'");
    long long total = parse_int(counts[0], ln, "total channel count");
    auto parse_typed = [&](std::string_view f, char suffix, const char* what) -> long long {
        f = trim(f);
        char got = f.empty() ? '\0' : static_cast<char>(std::toupper(f.back()));
        if (got != suffix) {
            fail_line(ln, std::string("expected count ending in '") + suffix + "' for " + what);
        }
        return parse_int(f.substr(0, f.size() - 1), ln, what);
    };
    long long analog = parse_typed(counts[1], 'A', "analog channel count");
    long long digital = parse_typed(counts[2], 'D', "status channel count");
    if (digital != 0) {
        fail_line(ln, "status channels are not supported (got " + std::to_string(digital) + ")");
    }
    if (analog < 1) fail_line(ln, "need at least one analog channel");
    if (total != analog + digital) {
        fail_line(ln, "channel total " + std::to_string(total) + " != " +
                          std::to_string(analog) + "A + " + std::to_string(digital) + "D");
    }

    for (long long c = 0; c < analog; ++c) {
        auto f = split_fields(next_line());
        if (f.size() != 13) {
            fail_line(ln,
                      "analog channel line needs 13 fields, got " + std::to_string(f.size()));
        }
        ChannelSpec ch;
        ch.index = static_cast<int>(parse_int(f[0], ln, "channel index"));
        if (ch.index != static_cast<int>(c) + 1) {
            fail_line(ln, "channel indices must be contiguous from 1; expected " +
                              std::to_string(c + 1) + ", got " + std::to_string(ch.index));
        }
        ch.name = std::string(f[1]);
        ch.unit = std::string(f[4]);
        ch.scale = parse_real(f[5], ln, "scale factor a");
        ch.offset = parse_real(f[6], ln, "offset b");
        if (ch.scale == 0.0) fail_line(ln, "scale factor a must be nonzero");
        info.channels.push_back(std::move(ch));
    }

    info.sampling.line_frequency = parse_real(next_line(), ln, "line frequency");
    long long nrates = parse_int(next_line(), ln, "nrates");
    if (nrates != 1) {
        fail_line(ln, "only single-rate records are supported, got nrates=" +
                          std::to_string(nrates));
    }
    auto rate = split_fields(next_line());
    if (rate.size() != 2) fail_line(ln, "expected 'samp,endsamp'");
    info.sampling.sample_rate = parse_real(rate[0], ln, "sample rate");
    long long endsamp = parse_int(rate[1], ln, "endsamp");
    if (endsamp < 1) fail_line(ln, "endsamp must be >= 1");
    info.sampling.total_samples = endsamp;

    info.sampling.start_timestamp = parse_start_instant(next_line(), ln);
    (void)next_line();  // trigger instant; redundant for fixed-rate records

    auto fmt = trim(next_line());
    std::string fmt_upper(fmt);
    std::transform(fmt_upper.begin(), fmt_upper.end(), fmt_upper.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
    if (fmt_upper == "ASCII") {
        info.format = DatFormat::ascii;
    } else if (fmt_upper == "BINARY") {
        info.format = DatFormat::binary16;
    } else {
        fail_line(ln, "unsupported data file type '" + std::string(fmt) + "'");
    }

    double timemult = parse_real(next_line(), ln, "timemult");
    if (timemult <= 0.0) fail_line(ln, "timemult must be positive");

    if (ln != lines.size()) fail_line(ln + 1, "unexpected trailing content");

    info.sampling.validate();
    return info;
}

Matrix parse_dat_ascii(std::string_view payload, const CfgInfo& info) {
    const auto n = static_cast<std::size_t>(info.sampling.total_samples);
    const std::size_t k = info.channels.size();
    auto lines = split_lines(payload);
    if (lines.size() != n) {
        throw DataError("dat file has " + std::to_string(lines.size()) + " rows, cfg declares " +
                        std::to_string(n));
    }
    Matrix raw(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        auto f = split_fields(lines[i]);
        if (f.size() != k + 2) {
            throw DataError("dat row " + std::to_string(i + 1) + " has " +
                            std::to_string(f.size()) + " fields, expected " +
                            std::to_string(k + 2));
        }
        for (std::size_t c = 0; c < k; ++c) {
            std::string_view field = f[c + 2];
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (ec != std::errc{} || ptr != field.data() + field.size()) {
                throw DataError("dat row " + std::to_string(i + 1) + ", channel " +
                                std::to_string(c + 1) + ": bad value '" + std::string(field) +
                                "'");
            }
            if (!std::isfinite(v)) {
                throw DataError("dat row " + std::to_string(i + 1) + ", channel " +
                                std::to_string(c + 1) + ": non-finite value");
            }
            raw(i, c) = v;
        }
    }
    return raw;
}

Matrix parse_dat_binary(std::string_view payload, const CfgInfo& info) {
    const auto n = static_cast<std::size_t>(info.sampling.total_samples);
    const std::size_t k = info.channels.size();
    const std::size_t frame = 8 + 2 * k;
    if (payload.size() != n * frame) {
        throw DataError("binary dat payload is " + std::to_string(payload.size()) +
                        " bytes, expected " + std::to_string(n * frame) + " (" +
                        std::to_string(n) + " frames of " + std::to_string(frame) + ")");
    }
    Matrix raw(n, k);
    const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
    for (std::size_t i = 0; i < n; ++i, p += frame) {
        (void)read_u32le(p);      // sample number (redundant)
        (void)read_u32le(p + 4);  // elapsed time (redundant at fixed rate)
        for (std::size_t c = 0; c < k; ++c) {
            std::uint16_t bits = read_u16le(p + 8 + 2 * c);
            if (bits == kMissingMarker) {
                throw DataError("missing-sample marker at sample " + std::to_string(i) +
                                ", channel " + std::to_string(c + 1));
            }
            raw(i, c) = static_cast<double>(static_cast<std::int16_t>(bits));
        }
    }
    return raw;
}

}  // namespace

void SamplingSpec::validate() const {
    if (!(line_frequency > 0.0) || !std::isfinite(line_frequency)) {
        throw ValidationError("line frequency must be positive and finite");
    }
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
        throw ValidationError("sample rate must be positive and finite");
    }
    if (total_samples < 1) throw ValidationError("record must contain at least one sample");
    if (!std::isfinite(start_timestamp) || start_timestamp < 0.0 ||
        start_timestamp >= 86400.0) {
        throw ValidationError("start timestamp must lie within one day [0, 86400)");
    }
}

void WaveformRecord::validate() const {
    sampling.validate();
    if (channels.empty()) throw ValidationError("record has no channels");
    for (std::size_t c = 0; c < channels.size(); ++c) {
        const auto& ch = channels[c];
        if (ch.index != static_cast<int>(c) + 1) {
            throw ValidationError("channel indices must be contiguous from 1");
        }
        if (ch.name.empty()) throw ValidationError("channel name must be non-empty");
        if (ch.scale == 0.0 || !std::isfinite(ch.scale) || !std::isfinite(ch.offset)) {
            throw ValidationError("channel '" + ch.name + "' has invalid scale/offset");
        }
    }
    if (data.rows() != static_cast<std::size_t>(sampling.total_samples) ||
        data.cols() != channels.size()) {
        throw ValidationError("data matrix is " + std::to_string(data.rows()) + "x" +
                              std::to_string(data.cols()) + ", expected " +
                              std::to_string(sampling.total_samples) + "x" +
                              std::to_string(channels.size()));
    }
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t c = 0; c < data.cols(); ++c) {
            if (!std::isfinite(data(i, c))) {
                throw ValidationError("non-finite sample at row " + std::to_string(i) +
                                      ", channel " + std::to_string(c + 1));
            }
        }
    }
}

WaveformRecord read_record(std::string_view cfg_text, std::string_view dat_payload) {
    CfgInfo info = parse_cfg(cfg_text);
    Matrix raw = info.format == DatFormat::ascii ? parse_dat_ascii(dat_payload, info)
                                                 : parse_dat_binary(dat_payload, info);
    WaveformRecord rec;
    rec.station = std::move(info.station);
    rec.device = std::move(info.device);
    rec.version = std::move(info.version);
    rec.channels = std::move(info.channels);
    rec.sampling = info.sampling;
    rec.data = Matrix(raw.rows(), raw.cols());
    for (std::size_t c = 0; c < rec.channels.size(); ++c) {
        const double a = rec.channels[c].scale;
        const double b = rec.channels[c].offset;
        for (std::size_t i = 0; i < raw.rows(); ++i) {
            rec.data(i, c) = a * raw(i, c) + b;
        }
    }
    rec.validate();
    return rec;
}

std::pair<std::string, std::string> write_record(const WaveformRecord& record,
                                                 DatFormat format) {
    record.validate();
    const auto n = static_cast<std::size_t>(record.sampling.total_samples);
    const std::size_t k = record.channels.size();

    // Per-channel conversion factors. ASCII stores engineering values at unit
    // scale; binary16 maps each channel's range onto the signed 16-bit grid,
    // which bounds the read-back error by scale/2 per sample.
    std::vector<double> scale(k, 1.0), offset(k, 0.0);
    if (format == DatFormat::binary16) {
        for (std::size_t c = 0; c < k; ++c) {
            double lo = record.data(0, c), hi = record.data(0, c);
            for (std::size_t i = 1; i < n; ++i) {
                lo = std::min(lo, record.data(i, c));
                hi = std::max(hi, record.data(i, c));
            }
            offset[c] = (hi + lo) / 2.0;
            const double half = (hi - lo) / 2.0;
            scale[c] = half > 0.0 ? half / kInt16FullScale : 1.0;
        }
    }

    std::string cfg;
    {
        std::ostringstream os;
        os << record.station << ',' << record.device << ",1999\n";
        os << k << ',' << k << "A,0D\n";
        for (std::size_t c = 0; c < k; ++c) {
            const auto& ch = record.channels[c];
            os << ch.index << ',' << ch.name << ",,," << ch.unit << ','
               << format_double(scale[c]) << ',' << format_double(offset[c])
               << ",0,-32767,32767,1,1,S\n";
        }
        os << format_double(record.sampling.line_frequency) << "\n";
        os << "1\n";
        os << format_double(record.sampling.sample_rate) << ',' << n << "\n";
        const std::string instant = format_start_instant(record.sampling.start_timestamp);
        os << instant << "\n" << instant << "\n";
        os << (format == DatFormat::ascii ? "ASCII" : "BINARY") << "\n";
        os << "1\n";
        cfg = os.str();
    }

    std::string dat;
    if (format == DatFormat::ascii) {
        std::ostringstream os;
        for (std::size_t i = 0; i < n; ++i) {
            os << (i + 1) << ',' << elapsed_us(record.sampling, static_cast<std::int64_t>(i));
            for (std::size_t c = 0; c < k; ++c) os << ',' << format_double(record.data(i, c));
            os << '\n';
        }
        dat = os.str();
    } else {
        dat.reserve(n * (8 + 2 * k));
        for (std::size_t i = 0; i < n; ++i) {
            append_u32le(dat, static_cast<std::uint32_t>(i + 1));
            append_u32le(dat, static_cast<std::uint32_t>(
                                  elapsed_us(record.sampling, static_cast<std::int64_t>(i))));
            for (std::size_t c = 0; c < k; ++c) {
                double q = std::round((record.data(i, c) - offset[c]) / scale[c]);
                q = std::clamp(q, -kInt16FullScale, kInt16FullScale);
                auto bits = static_cast<std::uint16_t>(
                    static_cast<std::int16_t>(static_cast<int>(q)));
                append_u16le(dat, bits);
            }
        }
    }
    return {std::move(cfg), std::move(dat)};
}

std::vector<int> attach_labels(const WaveformRecord& record, const EventSchedule& schedule) {
    auto sorted = schedule.events;
    std::sort(sorted.begin(), sorted.end(),
              [](const ScheduledEvent& a, const ScheduledEvent& b) { return a.start < b.start; });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (!(sorted[i].start < sorted[i].end)) {
            throw ValidationError("event interval must satisfy start < end");
        }
        if (i > 0 && sorted[i].start <= sorted[i - 1].end) {
            throw ValidationError("event intervals overlap near t=" +
                                  std::to_string(sorted[i].start));
        }
    }
    // Guard band of a quarter sample period keeps boundary samples inside the
    // closed interval despite floating-point timestamp rounding.
    const double eps = 0.25 / record.sampling.sample_rate;
    std::vector<int> labels(static_cast<std::size_t>(record.sampling.total_samples), 0);
    std::size_t ev = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double t = record.sample_time(static_cast<std::int64_t>(i));
        while (ev < sorted.size() && t > sorted[ev].end + eps) ++ev;
        if (ev < sorted.size() && t >= sorted[ev].start - eps && t <= sorted[ev].end + eps) {
            labels[i] = sorted[ev].class_id;
        }
    }
    return labels;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failed for '" + path + "'");
    return std::move(buf).str();
}

void write_file(const std::string& path, std::string_view content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
        if (ec) throw IoError("cannot create directory '" + p.parent_path().string() + "'");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for '" + path + "'");
}

WaveformRecord read_record_files(const std::string& cfg_path, const std::string& dat_path) {
    return read_record(read_file(cfg_path), read_file(dat_path));
}

void write_record_files(const WaveformRecord& record, DatFormat format,
                        const std::string& cfg_path, const std::string& dat_path) {
    auto [cfg, dat] = write_record(record, format);
    write_file(cfg_path, cfg);
    write_file(dat_path, dat);
}

std::vector<int> read_label_csv(const std::string& path) {
    std::string text = read_file(path);
    auto lines = split_lines(text);
    if (lines.empty() || trim(lines[0]) != "sample_index,label") {
        throw ParseError("label file '" + path +
                         "' must start with header 'sample_index,label'");
    }
    std::vector<int> labels(lines.size() - 1, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto f = split_fields(lines[i + 1]);
        if (f.size() != 2) {
            throw ParseError("label row " + std::to_string(i + 1) + ": expected 2 fields");
        }
        long long idx = parse_int(f[0], i + 2, "sample index");
        long long lab = parse_int(f[1], i + 2, "label");
        if (idx != static_cast<long long>(i)) {
            throw DataError("label rows must be ordered by sample index; row " +
                            std::to_string(i + 1) + " has index " + std::to_string(idx));
        }
        if (lab < 0) throw DataError("labels must be non-negative");
        labels[i] = static_cast<int>(lab);
    }
    return labels;
}

void write_label_csv(const std::string& path, const std::vector<int>& labels) {
    std::ostringstream os;
    os << "sample_index,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) os << i << ',' << labels[i] << '\n';
    write_file(path, os.str());
}

}  // namespace gridsentry
