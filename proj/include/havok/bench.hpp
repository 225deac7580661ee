#pragma once

#include "havok/detector.hpp"
#include "havok/synth.hpp"

#include <span>
#include <vector>

namespace havok {

// Pipeline setups used by the benchmark scenarios.
PipelineConfig calcium_config();
PipelineConfig mud_config(bool matched_filter = true, int pulse_length = 12);
PipelineConfig ecg_config(int beat_period);

struct CalciumTrial {
    double er = 0.0;
    std::size_t truth = 0;
    std::size_t detected = 0;
    int memory_M = 0;
    double dominance = 0.0;
};

struct MudTrial {
    double ber = 0.0;
};

struct WindowScore {
    int hits = 0;           // windows with at least one event peak inside
    int false_windows = 0;  // clusters of peaks away from every window
    bool pass = false;      // hits >= min(2, windows) and false_windows <= 1
};

// Peaks further than margin from every window are false; peaks closer than cluster form one false window.
WindowScore score_windows(std::span<const Event> events, std::span<const Window> windows, long margin, long cluster);

CalciumTrial run_calcium_trial(const CalciumParams& params, const PipelineConfig& config);
MudTrial run_mud_trial(const PulseTrainParams& params, const PipelineConfig& config);
WindowScore run_ecg_trial(const PeriodicParams& params, const PipelineConfig& config);

// Anomaly windows drawn for an ECG trial with this seed (3 beats each).
PeriodicParams ecg_trial_params(std::uint64_t seed, int n_windows = 3, PeriodicParams base = {});
PulseTrainParams mud_trial_params(std::uint64_t seed, std::size_t n_slots = 200, PulseTrainParams base = {});

}  // namespace havok
