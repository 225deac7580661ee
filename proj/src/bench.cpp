#include "havok/bench.hpp"

#include <algorithm>

namespace havok {

PipelineConfig calcium_config() { return PipelineConfig{}; }

PipelineConfig mud_config(bool matched_filter, int pulse_length) {
    PipelineConfig c;
    c.sector_halfwidth = 10;
    c.memory_M = 20;
    c.order_r = 2;
    c.robust_median = true;
    if (matched_filter) c.matched_filter = hann_pulse(pulse_length);
    return c;
}

PipelineConfig ecg_config(int beat_period) {
    PipelineConfig c;
    c.sector_halfwidth = std::max(2, beat_period / 4);
    c.memory_M = 80;
    c.order_r = 2;
    c.use_hilbert = true;
    return c;
}

WindowScore score_windows(std::span<const Event> events, std::span<const Window> windows, long margin, long cluster) {
    WindowScore s;
    for (const auto& [a, b] : windows) {
        const bool hit = std::any_of(events.begin(), events.end(),
                                     [&](const Event& e) { return e.peak_index >= a && e.peak_index <= b; });
        s.hits += hit;
    }
    std::vector<long> stray;
    for (const auto& e : events) {
        const bool near = std::any_of(windows.begin(), windows.end(), [&](const Window& w) {
            return e.peak_index >= w.first - margin && e.peak_index <= w.second + margin;
        });
        if (!near) stray.push_back(e.peak_index);
    }
    std::sort(stray.begin(), stray.end());
    for (std::size_t i = 0; i < stray.size(); ++i)
        if (i == 0 || stray[i] - stray[i - 1] > cluster) ++s.false_windows;
    const int need = std::min<int>(2, static_cast<int>(windows.size()));
    s.pass = s.hits >= need && s.false_windows <= 1;
    return s;
}

CalciumTrial run_calcium_trial(const CalciumParams& params, const PipelineConfig& config) {
    const auto data = gen_calcium(params);
    const auto rep = run_pipeline(data.series, config);
    CalciumTrial t;
    t.er = error_ratio(rep.events, data.truth, rep.sector_halfwidth);
    t.truth = data.truth.event_indices.size();
    t.detected = rep.events.size();
    t.memory_M = rep.memory_M;
    t.dominance = rep.dominance;
    return t;
}

MudTrial run_mud_trial(const PulseTrainParams& params, const PipelineConfig& config) {
    const auto data = gen_pulse_train(params);
    const auto rep = run_pipeline(data.series, config);
    return {bit_error_rate(rep.events, data.truth, params.slot_len)};
}

WindowScore run_ecg_trial(const PeriodicParams& params, const PipelineConfig& config) {
    const auto data = gen_periodic_anomaly(params);
    const auto rep = run_pipeline(data.series, config);
    const long M = rep.memory_M;
    return score_windows(rep.events, data.truth.event_windows, M / 2, M);
}

PeriodicParams ecg_trial_params(std::uint64_t seed, int n_windows, PeriodicParams base) {
    base.seed = seed;
    base.anomaly_windows = random_beat_windows(base.n_samples, base.beat_period, n_windows, 3, seed);
    return base;
}

PulseTrainParams mud_trial_params(std::uint64_t seed, std::size_t n_slots, PulseTrainParams base) {
    base.seed = seed;
    base.bits = random_bits(n_slots, seed ^ 0xB5297A4D3F1E8C61ULL);
    return base;
}

}  // namespace havok
