#pragma once

#include "havok/detector.hpp"
#include "havok/series.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace havok {

using Window = std::pair<long, long>;  // inclusive [start, end]

struct GroundTruth {
    std::vector<long> event_indices;
    std::vector<Window> event_windows;
    std::vector<int> bits;
};

struct Synthetic {
    TimeSeries series;
    GroundTruth truth;
    std::vector<long> outliers;  // impulsive-noise positions (pulse train only)
};

struct CalciumParams {
    std::size_t n_samples = 14400;
    double sample_period = 1.0 / 60.0;
    double rate_hz = 0.21;
    double tau_rise = 0.03;   // s
    double tau_decay = 0.2;   // s
    double noise_rms = 0.1;   // relative to the unit spike amplitude
    double baseline = 0.003;  // random-walk step std per sample
    double baseline_level = 5.0;
    bool saturation = false;
    std::optional<std::vector<long>> spike_indices;  // fixed spikes instead of a Poisson train
    std::uint64_t seed = 0;
};

struct PeriodicParams {
    std::size_t n_samples = 2160;
    double sample_period = 1.0 / 360.0;
    int beat_period = 90;  // samples
    std::vector<Window> anomaly_windows;
    double morph_distortion = 1.0;
    double noise_rms = 0.05;
    std::uint64_t seed = 0;
};

struct PulseTrainParams {
    std::vector<int> bits;
    int slot_len = 40;
    std::vector<double> pulse_shape;  // empty -> hann_pulse(12)
    double drift_amplitude = 1.0;
    double noise_rms = 0.3;
    double impulsive_rate = 0.002;
    double impulsive_scale = 10.0;    // outlier size in units of noise_rms
    double sample_period = 1.0;
    std::uint64_t seed = 0;
};

Synthetic gen_calcium(const CalciumParams& p);
Synthetic gen_periodic_anomaly(const PeriodicParams& p);
Synthetic gen_pulse_train(const PulseTrainParams& p);

// unit-peak double exponential sampled at Ts, long enough to decay
std::vector<double> calcium_kernel(double tau_rise, double tau_decay, double sample_period);
// one clean beat; distortion widens, scales and delays the waves
std::vector<double> beat_template(int period, double distortion = 0.0);
std::vector<double> hann_pulse(int length);
std::vector<int> random_bits(std::size_t n, std::uint64_t seed);
// non-overlapping windows of whole beats, at least two clean beats apart
std::vector<Window> random_beat_windows(std::size_t n_samples, int beat_period, int count, int beats_per_window,
                                        std::uint64_t seed);

struct MatchCounts {
    long matched = 0;
    long misses = 0;
    long false_positives = 0;
};

// one-to-one matching of peaks to truth within +-tol; maximal in the number of pairs
MatchCounts match_events(std::span<const long> peaks, std::span<const long> truth, long tol);
double error_ratio(std::span<const Event> events, const GroundTruth& truth, long tol_samples);
double error_ratio(std::span<const long> peaks, std::span<const long> truth, long tol_samples);

std::vector<int> decode_bits(std::span<const Event> events, std::size_t n_slots, int slot_len);
double bit_error_rate(std::span<const Event> events, const GroundTruth& truth, int slot_len);

// column 1 value, column 2 truth flag (1 at events / inside windows / at bit-1 pulse starts)
void write_synthetic_csv(std::ostream& os, const Synthetic& s);
void write_truth_csv(std::ostream& os, const GroundTruth& truth);

}  // namespace havok
