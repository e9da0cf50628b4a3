#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridsentry/comtrade.hpp"
#include "gridsentry/schedule.hpp"

namespace gridsentry {

// Synthetic three-phase waveform generator for a two-merging-unit feeder.
// Produces 14 channels at a fixed rate: MU32 {VA,VB,VC,IA,IB,IC}, MU23
// {VA,VB,VC,IA,IB,IC}, then the residual currents MU32_IN, MU23_IN, each
// computed as -(IA+IB+IC) of its unit after every other transform.
//
// Class catalogue (0 = normal operation):
//   1..3   single line-to-ground fault on phase A/B/C
//   4, 8   CT ratio attack on MU32 / MU23 (current channels scaled)
//   5..7   line-to-line fault A-B / A-C / B-C
//   9..11  double line-to-ground fault AB / AC / BC
//   12,13  PT ratio attack on MU32 / MU23 (voltage channels scaled)
//   14     three-phase fault, ungrounded
//   15     three-phase fault with ground (adds residual current)
//   16,17  GPS spoofing on MU32 / MU23 (time shift of the unit's channels)
//
// Faults are physical events: their signature blends in and out through a
// one-cycle exponential ramp, and the post-event decay (one further cycle)
// is labeled normal, imitating a recovery transient. Attacks are data-layer
// manipulations and switch instantaneously, so an attacked sample is an
// exact pointwise transform of the clean one.

inline constexpr int kNumClasses = 18;
inline constexpr std::size_t kNumChannels = 14;

// Stable channel order; index 12/13 are the residual channels.
const std::vector<std::string>& channel_names();

// Human-readable class name ("Normal Operation", ...); id outside [0, 18)
// throws ValidationError.
const std::string& class_name(int class_id);

struct HarmonicTerm {
    int order = 0;        // multiple of the fundamental
    double amplitude = 0; // relative to the fundamental current amplitude
};

// Per-class fault signature levels, in per-unit of the nominal amplitudes.
struct FaultLevels {
    double slg_voltage = 0.3;   // retained voltage on the faulted phase
    double slg_current = 1.4;   // fault current, limited by inverter sources
    double ll_voltage = 0.5;
    double ll_current = 1.3;
    double ground_residual = 0.5;  // residual current for ground faults
    double p3_voltage = 0.4;
    double p3_current = 1.4;
    double harmonic5 = 0.06;  // extra harmonic content on SLG fault current
    double harmonic7 = 0.04;
    double current_angle = 1.0471975511965976;  // fault current lag, rad (pi/3)
};

struct AttackParams {
    double ct_ratio_factor = 0.5;
    double pt_ratio_factor = 0.5;
    double gps_shift = 2.08e-3;  // s; ~10 samples (45 deg) at 4.8 kHz / 60 Hz

    // factors > 0 and != 1; 0 < gps_shift < one cycle.
    void validate(double line_frequency) const;
};

// Breaker-closing transient at t=0: decaying LC ringing plus an asymmetric
// dc offset on the currents. Disabled when current_pu == 0.
struct EnergizationParams {
    double current_pu = 0.0;
    double voltage_pu = 0.0;
    double tau = 0.03;         // envelope decay constant, s
    double frequency = 300.0;  // ringing frequency, Hz
};

// Acquisition-chain differences of an independently captured record: clock
// offset, frequency error, load level and power-factor drift. Neutral by
// default; the streaming benchmark sets these so its samples do not fall on
// the training record's phase grid.
struct CaptureParams {
    double time_offset = 0.0;          // s
    double frequency_deviation = 0.0;  // Hz
    double amplitude_scale = 1.0;      // current magnitude factor
    double power_factor_shift = 0.0;   // rad
};

struct GridConfig {
    double line_frequency = 60.0;
    double sample_rate = 4800.0;
    double nominal_voltage = 11267.0;  // V peak per phase (13.8 kV bus)
    double nominal_current = 120.0;    // A peak per phase
    double noise_sigma = 0.01;         // relative to the nominal amplitudes
    std::vector<HarmonicTerm> harmonic_profile;  // steady-state inverter texture
    FaultLevels faults;
    EnergizationParams energization;
    CaptureParams capture;
    std::uint64_t seed = 0;

    void validate() const;
};

struct GeneratedRecord {
    WaveformRecord record;
    std::vector<int> labels;
    EventSchedule schedule;
};

// Renders the schedule into a 14-channel record plus per-sample labels
// (labels come from attach_labels over the same schedule). Deterministic in
// (config, schedule, attacks); the noise stream is drawn per (sample,
// channel) independently of the schedule, so editing events never reshuffles
// noise elsewhere.
GeneratedRecord synthesize(const GridConfig& config, const EventSchedule& schedule,
                           const AttackParams& attacks);

// The 22 s training schedule: one event per class 1..17 with interspersed
// normal operation.
EventSchedule training_benchmark_schedule();

// The 6 s streaming schedule: five ~0.2 s events (SLG A, LL B-C, DLG A-C,
// CT attack on MU32, PT attack on MU23).
EventSchedule streaming_benchmark_schedule();

// Benchmark GridConfig (inverter harmonics, energization transient, default
// noise) for the given seed.
GridConfig benchmark_grid_config(std::uint64_t seed);

// The acquisition-chain constants of the streaming capture (clock offset,
// frequency error, load level, power-factor drift).
CaptureParams benchmark_capture_params();

struct BenchmarkPair {
    GeneratedRecord training;
    GeneratedRecord streaming;
};

// Generates the train/stream record pair. Both share the grid model; the
// streaming record is drawn with its own noise seed and realistic capture
// asynchrony (see CaptureParams).
BenchmarkPair make_benchmark_pair(std::uint64_t seed);

}  // namespace gridsentry
