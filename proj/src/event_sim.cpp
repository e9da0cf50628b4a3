#include "gridsentry/event_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gridsentry/common.hpp"

namespace gridsentry {

namespace {

constexpr double kPi = 3.141592653589793;
constexpr double kTwoPi = 6.283185307179586;
// Phase angles A, B, C and the electrical displacement of each merging unit
// (MU23 sits one line section downstream, hence the small constant lag).
constexpr double kPhaseAngle[3] = {0.0, -kTwoPi / 3.0, kTwoPi / 3.0};
constexpr double kUnitShift[2] = {0.0, -kPi / 36.0};
constexpr double kLoadAngle = kPi / 6.0;  // lagging power-factor angle
constexpr double kInrushDcFraction = 0.5;
constexpr std::uint64_t kNoiseStream = 1;

enum class Kind { fault_slg, fault_ll, fault_dlg, fault_p3, attack_ct, attack_pt, attack_gps };

struct Traits {
    Kind kind;
    int pa = -1;    // first involved phase
    int pb = -1;    // second involved phase
    int unit = -1;  // attacked merging unit (0 = MU32, 1 = MU23)
    bool grounded = false;
};

Traits traits_for(int class_id) {
    switch (class_id) {
        case 1: return {Kind::fault_slg, 0, -1, -1, true};
        case 2: return {Kind::fault_slg, 1, -1, -1, true};
        case 3: return {Kind::fault_slg, 2, -1, -1, true};
        case 4: return {Kind::attack_ct, -1, -1, 0, false};
        case 5: return {Kind::fault_ll, 0, 1, -1, false};
        case 6: return {Kind::fault_ll, 0, 2, -1, false};
        case 7: return {Kind::fault_ll, 1, 2, -1, false};
        case 8: return {Kind::attack_ct, -1, -1, 1, false};
        case 9: return {Kind::fault_dlg, 0, 1, -1, true};
        case 10: return {Kind::fault_dlg, 0, 2, -1, true};
        case 11: return {Kind::fault_dlg, 1, 2, -1, true};
        case 12: return {Kind::attack_pt, -1, -1, 0, false};
        case 13: return {Kind::attack_pt, -1, -1, 1, false};
        case 14: return {Kind::fault_p3, 0, 1, -1, false};
        case 15: return {Kind::fault_p3, 0, 1, -1, true};
        case 16: return {Kind::attack_gps, -1, -1, 0, false};
        case 17: return {Kind::attack_gps, -1, -1, 1, false};
        default:
            throw ValidationError("unknown anomaly class " + std::to_string(class_id));
    }
}

bool is_fault(Kind k) {
    return k == Kind::fault_slg || k == Kind::fault_ll || k == Kind::fault_dlg ||
           k == Kind::fault_p3;
}

struct FaultEvent {
    Traits traits;
    double start;
    double end;
};

struct AttackEvent {
    Traits traits;
    double start;
    double end;
};

struct Ctx {
    const GridConfig* cfg;
    const AttackParams* atk;
    std::vector<FaultEvent> faults;    // sorted by start
    std::vector<AttackEvent> attacks;  // sorted by start
    double t_cyc;
    double omega;      // rad/s including the capture frequency deviation
    double ramp_tau;   // t_cyc / 5
    double ramp_norm;  // 1 - exp(-t_cyc / ramp_tau)
    double eps;        // boundary guard, a quarter sample period
};

// Fault blend weight: 0 outside [start, end + one cycle], rising over the
// first cycle, 1 in the interior, decaying to exactly 0 one cycle after the
// event ends (the recovery transient, labeled normal).
double blend_weight(const Ctx& c, const FaultEvent& f, double t) {
    if (t < f.start || t > f.end + c.t_cyc) return 0.0;
    auto rise = [&](double dt) {
        return dt >= c.t_cyc ? 1.0 : (1.0 - std::exp(-dt / c.ramp_tau)) / c.ramp_norm;
    };
    if (t <= f.end) return rise(t - f.start);
    const double level = rise(f.end - f.start);
    return level * (std::exp(-(t - f.end) / c.ramp_tau) - std::exp(-c.t_cyc / c.ramp_tau)) /
           c.ramp_norm;
}

// The fault whose influence window covers t; the latest-starting one wins if
// a decay tail runs into the next event.
const FaultEvent* active_fault(const Ctx& c, double t) {
    const FaultEvent* hit = nullptr;
    for (const auto& f : c.faults) {
        if (f.start > t) break;
        if (t <= f.end + c.t_cyc) hit = &f;
    }
    return hit;
}

double theta(const Ctx& c, double t) { return c.omega * (t + c.cfg->capture.time_offset); }

// Circular midpoint of two phase angles, used as the line-to-line fault
// current axis.
double pair_angle(int pa, int pb) {
    return std::atan2(std::sin(kPhaseAngle[pa]) + std::sin(kPhaseAngle[pb]),
                      std::cos(kPhaseAngle[pa]) + std::cos(kPhaseAngle[pb]));
}

double normal_current(const Ctx& c, int unit, int phase, double t) {
    const double chi = theta(c, t) + kPhaseAngle[phase] + kUnitShift[unit] - kLoadAngle -
                       c.cfg->capture.power_factor_shift;
    double v = std::cos(chi);
    for (const auto& h : c.cfg->harmonic_profile) {
        v += h.amplitude * std::cos(static_cast<double>(h.order) * chi);
    }
    return c.cfg->nominal_current * c.cfg->capture.amplitude_scale * v;
}

double energization_current(const Ctx& c, int unit, int phase, double t) {
    const auto& e = c.cfg->energization;
    if (e.current_pu == 0.0 || t < 0.0) return 0.0;
    const double env = std::exp(-t / e.tau);
    const double angle = kPhaseAngle[phase] + kUnitShift[unit];
    const double ring = std::cos(kTwoPi * e.frequency * t + angle);
    // The dc offsets are phase-symmetric, so the three of them cancel in the
    // residual channel just like the ringing does.
    const double dc = kInrushDcFraction * std::cos(angle);
    return c.cfg->nominal_current * e.current_pu * env * (ring + dc);
}

double energization_voltage(const Ctx& c, int unit, int phase, double t) {
    const auto& e = c.cfg->energization;
    if (e.voltage_pu == 0.0 || t < 0.0) return 0.0;
    const double env = std::exp(-t / e.tau);
    const double ring = std::cos(kTwoPi * e.frequency * t + kPhaseAngle[phase] +
                                 kUnitShift[unit]);
    return c.cfg->nominal_voltage * e.voltage_pu * env * ring;
}

// Retained voltage, per unit, for a phase under the given fault.
double fault_voltage_pu(const FaultLevels& lv, const Traits& tr, int phase) {
    switch (tr.kind) {
        case Kind::fault_slg:
            return phase == tr.pa ? lv.slg_voltage : 1.0;
        case Kind::fault_ll:
        case Kind::fault_dlg:
            return (phase == tr.pa || phase == tr.pb) ? lv.ll_voltage : 1.0;
        case Kind::fault_p3:
            return lv.p3_voltage;
        default:
            return 1.0;
    }
}

// Full-fault current on an involved phase. The line-to-line construction
// keeps Kirchhoff's current law intact at every blend level: the two faulted
// phases carry equal-and-opposite loop current plus the healthy phase's
// return, so the residual stays at zero for ungrounded faults and at exactly
// ground_residual pu for grounded ones.
double fault_target_current(const Ctx& c, int unit, int phase, double t, const Traits& tr) {
    const auto& lv = c.cfg->faults;
    const double th = theta(c, t);
    const double psi = kUnitShift[unit];
    const double inom = c.cfg->nominal_current;
    switch (tr.kind) {
        case Kind::fault_slg: {
            const double chi = th + kPhaseAngle[tr.pa] + psi - lv.current_angle;
            return inom * lv.slg_current *
                   (std::cos(chi) + lv.harmonic5 * std::cos(5.0 * chi) +
                    lv.harmonic7 * std::cos(7.0 * chi));
        }
        case Kind::fault_ll:
        case Kind::fault_dlg: {
            const double axis = pair_angle(tr.pa, tr.pb) - lv.current_angle + psi;
            const double loop = inom * lv.ll_current * std::cos(th + axis);
            const double sign = phase == tr.pa ? 1.0 : -1.0;
            const int healthy = 3 - tr.pa - tr.pb;
            double balance = -normal_current(c, unit, healthy, t);
            if (tr.kind == Kind::fault_dlg) {
                balance += inom * lv.ground_residual * std::cos(th + axis + kPi / 4.0);
            }
            return sign * loop + balance / 2.0;
        }
        case Kind::fault_p3: {
            const double chi = th + kPhaseAngle[phase] + psi - lv.current_angle;
            double v = inom * lv.p3_current * std::cos(chi);
            if (tr.grounded) {
                v += inom * lv.ground_residual / 3.0 *
                     std::cos(th - lv.current_angle + kPi / 4.0 + psi);
            }
            return v;
        }
        default:
            throw ContractError("fault_target_current called for a non-fault class");
    }
}

bool phase_involved(const Traits& tr, int phase) {
    if (tr.kind == Kind::fault_p3) return true;
    return phase == tr.pa || phase == tr.pb;
}

double det_voltage(const Ctx& c, int unit, int phase, double t) {
    double amp = 1.0;
    if (const FaultEvent* f = active_fault(c, t)) {
        const double w = blend_weight(c, *f, t);
        amp += w * (fault_voltage_pu(c.cfg->faults, f->traits, phase) - 1.0);
    }
    return c.cfg->nominal_voltage * amp *
               std::cos(theta(c, t) + kPhaseAngle[phase] + kUnitShift[unit]) +
           energization_voltage(c, unit, phase, t);
}

double det_current(const Ctx& c, int unit, int phase, double t) {
    const double base = normal_current(c, unit, phase, t);
    double i = base + energization_current(c, unit, phase, t);
    if (const FaultEvent* f = active_fault(c, t)) {
        if (phase_involved(f->traits, phase)) {
            const double w = blend_weight(c, *f, t);
            if (w > 0.0) i += w * (fault_target_current(c, unit, phase, t, f->traits) - base);
        }
    }
    return i;
}

}  // namespace

const std::vector<std::string>& channel_names() {
    static const std::vector<std::string> names = {
        "MU32_VA", "MU32_VB", "MU32_VC", "MU32_IA", "MU32_IB", "MU32_IC",
        "MU23_VA", "MU23_VB", "MU23_VC", "MU23_IA", "MU23_IB", "MU23_IC",
        "MU32_IN", "MU23_IN"};
    return names;
}

const std::string& class_name(int class_id) {
    static const std::vector<std::string> names = {
        "Normal Operation",
        "Single Line Fault A-N",
        "Single Line Fault B-N",
        "Single Line Fault C-N",
        "CT Ratio Attack on MU32",
        "Double Line Fault A-B",
        "Double Line Fault A-C",
        "Double Line Fault B-C",
        "CT Ratio Attack on MU23",
        "DLG Fault AB-N",
        "DLG Fault AC-N",
        "DLG Fault BC-N",
        "PT Ratio Attack on MU32",
        "PT Ratio Attack on MU23",
        "3 Lines Fault AB-C",
        "3 Lines Fault ABC-N",
        "GPS Spoofing on MU32",
        "GPS Spoofing on MU23"};
    if (class_id < 0 || class_id >= kNumClasses) {
        throw ValidationError("class id out of range: " + std::to_string(class_id));
    }
    return names[static_cast<std::size_t>(class_id)];
}

void AttackParams::validate(double line_frequency) const {
    auto check_factor = [](double f, const char* name) {
        if (!std::isfinite(f) || f <= 0.0 || f == 1.0) {
            throw ValidationError(std::string(name) +
                                  " must be positive, finite and different from 1");
        }
    };
    check_factor(ct_ratio_factor, "ct_ratio_factor");
    check_factor(pt_ratio_factor, "pt_ratio_factor");
    if (!std::isfinite(gps_shift) || gps_shift <= 0.0 || gps_shift >= 1.0 / line_frequency) {
        throw ValidationError("gps_shift must lie strictly between 0 and one cycle");
    }
}

void GridConfig::validate() const {
    if (!(line_frequency > 0.0) || !std::isfinite(line_frequency)) {
        throw ValidationError("line_frequency must be positive");
    }
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate) ||
        sample_rate < 2.0 * line_frequency) {
        throw ValidationError("sample_rate must cover at least two samples per cycle");
    }
    if (!(nominal_voltage > 0.0) || !(nominal_current > 0.0)) {
        throw ValidationError("nominal amplitudes must be positive");
    }
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
        throw ValidationError("noise_sigma must be non-negative");
    }
    for (const auto& h : harmonic_profile) {
        if (h.order < 2) throw ValidationError("harmonic order must be >= 2");
        if (!(h.amplitude >= 0.0) || !std::isfinite(h.amplitude)) {
            throw ValidationError("harmonic amplitude must be non-negative");
        }
    }
    if (!(faults.slg_voltage > 0.0) || !(faults.ll_voltage > 0.0) ||
        !(faults.p3_voltage > 0.0) || faults.slg_voltage >= 1.0 || faults.ll_voltage >= 1.0 ||
        faults.p3_voltage >= 1.0) {
        throw ValidationError("fault voltage sags must lie in (0, 1) per unit");
    }
    if (!(faults.slg_current > 0.0) || !(faults.ll_current > 0.0) ||
        !(faults.p3_current > 0.0) || !(faults.ground_residual >= 0.0)) {
        throw ValidationError("fault current levels must be positive");
    }
    if (!(faults.harmonic5 >= 0.0) || !(faults.harmonic7 >= 0.0)) {
        throw ValidationError("fault harmonic levels must be non-negative");
    }
    if (!(energization.current_pu >= 0.0) || !(energization.voltage_pu >= 0.0) ||
        !(energization.tau > 0.0) || !(energization.frequency >= 0.0)) {
        throw ValidationError("energization parameters out of range");
    }
    if (!(capture.amplitude_scale > 0.0) || !std::isfinite(capture.time_offset) ||
        !std::isfinite(capture.frequency_deviation) ||
        std::abs(capture.frequency_deviation) >= line_frequency / 2.0 ||
        !std::isfinite(capture.power_factor_shift) ||
        std::abs(capture.power_factor_shift) >= kPi) {
        throw ValidationError("capture parameters out of range");
    }
}

GeneratedRecord synthesize(const GridConfig& config, const EventSchedule& schedule,
                           const AttackParams& attacks) {
    config.validate();
    schedule.validate();
    attacks.validate(config.line_frequency);

    Ctx c;
    c.cfg = &config;
    c.atk = &attacks;
    c.t_cyc = 1.0 / config.line_frequency;
    c.omega = kTwoPi * (config.line_frequency + config.capture.frequency_deviation);
    c.ramp_tau = c.t_cyc / 5.0;
    c.ramp_norm = 1.0 - std::exp(-c.t_cyc / c.ramp_tau);
    c.eps = 0.25 / config.sample_rate;

    for (const auto& ev : schedule.events) {
        const Traits tr = traits_for(ev.class_id);
        if (is_fault(tr.kind)) {
            c.faults.push_back({tr, ev.start, ev.end});
        } else {
            c.attacks.push_back({tr, ev.start, ev.end});
        }
    }
    auto by_start = [](const auto& a, const auto& b) { return a.start < b.start; };
    std::sort(c.faults.begin(), c.faults.end(), by_start);
    std::sort(c.attacks.begin(), c.attacks.end(), by_start);

    const auto n = static_cast<std::int64_t>(
        std::llround(schedule.duration * config.sample_rate));
    if (n < 1) throw ValidationError("schedule duration yields an empty record");

    GeneratedRecord out;
    out.schedule = schedule;
    WaveformRecord& rec = out.record;
    rec.station = "GRIDSENTRY";
    rec.device = "MU32_MU23";
    rec.sampling.line_frequency = config.line_frequency;
    rec.sampling.sample_rate = config.sample_rate;
    rec.sampling.total_samples = n;
    const auto& names = channel_names();
    for (std::size_t ch = 0; ch < kNumChannels; ++ch) {
        ChannelSpec spec;
        spec.index = static_cast<int>(ch) + 1;
        spec.name = names[ch];
        spec.unit = names[ch].find("_V") != std::string::npos ? "V" : "A";
        rec.channels.push_back(std::move(spec));
    }
    rec.data = Matrix(static_cast<std::size_t>(n), kNumChannels);

    Rng noise = Rng(config.seed).fork(kNoiseStream);

    for (std::int64_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / config.sample_rate;
        const auto row = static_cast<std::size_t>(i);

        // Active data-layer attacks at this instant (closed intervals, same
        // boundary guard as the labels).
        const AttackEvent* ct_hit[2] = {nullptr, nullptr};
        const AttackEvent* pt_hit[2] = {nullptr, nullptr};
        const AttackEvent* gps_hit[2] = {nullptr, nullptr};
        for (const auto& a : c.attacks) {
            if (t < a.start - c.eps || t > a.end + c.eps) continue;
            const int u = a.traits.unit;
            if (a.traits.kind == Kind::attack_ct) ct_hit[u] = &a;
            if (a.traits.kind == Kind::attack_pt) pt_hit[u] = &a;
            if (a.traits.kind == Kind::attack_gps) gps_hit[u] = &a;
        }

        for (int unit = 0; unit < 2; ++unit) {
            // GPS spoofing slides the unit's acquisition clock, so its whole
            // deterministic waveform is evaluated at the shifted instant.
            const double t_eval = gps_hit[unit] ? t - attacks.gps_shift : t;
            const std::size_t base = static_cast<std::size_t>(unit) * 6;
            for (int p = 0; p < 3; ++p) {
                rec.data(row, base + static_cast<std::size_t>(p)) =
                    det_voltage(c, unit, p, t_eval);
                rec.data(row, base + 3 + static_cast<std::size_t>(p)) =
                    det_current(c, unit, p, t_eval);
            }
        }

        // Measurement noise, drawn in a fixed (sample, channel) order that
        // does not depend on the schedule.
        if (config.noise_sigma > 0.0) {
            for (std::size_t ch = 0; ch < 12; ++ch) {
                const double nominal =
                    ch % 6 < 3 ? config.nominal_voltage : config.nominal_current;
                rec.data(row, ch) += config.noise_sigma * nominal * noise.next_normal();
            }
        } else {
            for (std::size_t ch = 0; ch < 12; ++ch) (void)noise.next_normal();
        }

        // CT/PT ratio attacks scale the final channel values, so an attacked
        // sample is exactly factor x the clean one.
        for (int unit = 0; unit < 2; ++unit) {
            const std::size_t base = static_cast<std::size_t>(unit) * 6;
            if (pt_hit[unit]) {
                for (std::size_t p = 0; p < 3; ++p) {
                    rec.data(row, base + p) *= attacks.pt_ratio_factor;
                }
            }
            if (ct_hit[unit]) {
                for (std::size_t p = 0; p < 3; ++p) {
                    rec.data(row, base + 3 + p) *= attacks.ct_ratio_factor;
                }
            }
        }

        rec.data(row, 12) = -(rec.data(row, 3) + rec.data(row, 4) + rec.data(row, 5));
        rec.data(row, 13) = -(rec.data(row, 9) + rec.data(row, 10) + rec.data(row, 11));
    }

    out.labels = attach_labels(rec, schedule);
    return out;
}

EventSchedule training_benchmark_schedule() {
    EventSchedule s;
    s.duration = 22.0;
    s.events = {{1, 1.0, 1.5},   {2, 2.0, 2.5},   {3, 3.0, 3.5},   {4, 4.0, 4.5},
                {5, 6.0, 6.5},   {6, 7.0, 7.5},   {7, 8.0, 8.5},   {8, 9.0, 9.5},
                {9, 11.0, 11.5}, {10, 12.0, 12.5}, {11, 13.0, 13.5}, {12, 14.0, 14.5},
                {13, 15.0, 15.5}, {14, 17.0, 17.5}, {15, 18.0, 18.5}, {16, 20.0, 20.5},
                {17, 21.0, 21.5}};
    return s;
}

EventSchedule streaming_benchmark_schedule() {
    EventSchedule s;
    s.duration = 6.0;
    s.events = {{1, 1.0, 1.2}, {7, 2.0, 2.2}, {10, 3.0, 3.2}, {4, 4.0, 4.2}, {13, 5.0, 5.2}};
    return s;
}

GridConfig benchmark_grid_config(std::uint64_t seed) {
    GridConfig cfg;
    cfg.seed = seed;
    cfg.harmonic_profile = {{5, 0.02}, {7, 0.014}};
    cfg.energization.current_pu = 0.6;
    cfg.energization.voltage_pu = 0.15;
    cfg.energization.tau = 0.012;
    cfg.energization.frequency = 300.0;
    return cfg;
}

CaptureParams benchmark_capture_params() {
    // The streaming capture runs on its own acquisition chain and was taken
    // under different grid conditions: a fractional-sample clock offset, a
    // small frequency error, a markedly lighter feeder load and a power-factor
    // drift. Values are fixed so the benchmark is reproducible.
    CaptureParams c;
    c.time_offset = 1.0417e-4;
    c.frequency_deviation = 0.25;
    c.amplitude_scale = 0.75;
    c.power_factor_shift = -0.03;
    return c;
}

BenchmarkPair make_benchmark_pair(std::uint64_t seed) {
    const AttackParams attacks;
    BenchmarkPair out;
    out.training = synthesize(benchmark_grid_config(seed), training_benchmark_schedule(),
                              attacks);

    GridConfig stream_cfg = benchmark_grid_config(seed + 1);
    stream_cfg.capture = benchmark_capture_params();
    out.streaming = synthesize(stream_cfg, streaming_benchmark_schedule(), attacks);
    return out;
}

}  // namespace gridsentry
