#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace havok {

class TimeSeries {
public:
    TimeSeries(std::vector<double> samples, double sample_period, double start_time = 0.0);

    std::span<const double> samples() const noexcept { return samples_; }
    const std::vector<double>& values() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    double operator[](std::size_t i) const { return samples_[i]; }
    double sample_period() const noexcept { return sample_period_; }
    double start_time() const noexcept { return start_time_; }
    double time_at(std::size_t i) const noexcept {
        return start_time_ + static_cast<double>(i) * sample_period_;
    }

    // Same timing, new values (must be finite, length >= 2).
    TimeSeries with_values(std::vector<double> v) const;

private:
    std::vector<double> samples_;
    double sample_period_;
    double start_time_;
};

class FeatureBank {
public:
    FeatureBank(std::vector<TimeSeries> features, std::vector<std::string> labels, int sector_halfwidth);

    const std::vector<TimeSeries>& features() const noexcept { return features_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    int sector_halfwidth() const noexcept { return halfwidth_; }
    std::size_t count() const noexcept { return features_.size(); }
    std::size_t length() const noexcept { return features_.front().size(); }
    const TimeSeries& operator[](std::size_t i) const { return features_[i]; }

private:
    std::vector<TimeSeries> features_;
    std::vector<std::string> labels_;
    int halfwidth_;
};

enum class Scaling { none, unit_variance, standardize };
enum class ThresholdMethod { detachment, mixture_fit };

struct PipelineConfig {
    // nullopt means "auto" for every optional knob below
    std::optional<int> sector_halfwidth;
    std::optional<double> min_stimulus_interval;  // seconds, feeds the auto halfwidth
    std::optional<int> memory_M;
    std::optional<int> order_r;
    std::vector<int> M_grid{2, 4, 8, 16, 20, 40, 80};
    std::vector<int> r_grid{2};
    bool cap_M_by_sector = true;  // auto M search keeps M <= L

    bool robust_median = false;
    std::optional<std::vector<double>> matched_filter;
    Scaling scaling = Scaling::unit_variance;

    // running-median window applied to v and r; nullopt -> 20*halfwidth+1, 0 disables
    std::optional<int> detrend_window;
    bool use_hilbert = false;

    std::optional<int> min_event_separation;
    std::optional<int> histogram_bins;
    bool two_sided = false;
    ThresholdMethod threshold_method = ThresholdMethod::detachment;
    double kappa = 3.0;
    int detach_run = 2;

    std::uint64_t rng_seed = 0;
};

inline constexpr int kFeatureCount = 4;
inline constexpr int kFallbackHalfwidth = 8;

// Bounds-check a config against a series. Auto fields stay auto.
PipelineConfig validate(const PipelineConfig& config, const TimeSeries& y);
// Same check when only the length is known.
PipelineConfig validate(const PipelineConfig& config, std::size_t n_samples, int feature_count = kFeatureCount);

}  // namespace havok
