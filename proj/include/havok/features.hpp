#pragma once

#include "havok/series.hpp"

#include <span>
#include <vector>

namespace havok {

// Sector length L is even; each side holds L/2 samples and the center is excluded.
// Near the edges the sectors shrink to what is available.
TimeSeries local_convexity(const TimeSeries& y, int L, bool robust = false);
TimeSeries mean_difference(const TimeSeries& y, int L, bool robust = false);
TimeSeries energy_ratio(const TimeSeries& y, int L, bool robust = false);

// Centered correlation: out[n] = sum_k y[n + k - c] w[k] / |w|^2, c = len(w)/2, zeros outside y.
// A clean copy of w starting at n0 gives 1.0 at n0 + c.
TimeSeries matched_filter_refine(const TimeSeries& y, std::span<const double> w);

// Scaling applied to each feature before embedding. unit_variance divides by the
// standard deviation and keeps the mean; constant features become all zeros.
std::vector<double> scale_feature(std::span<const double> f, Scaling mode, double reference = 0.0);

FeatureBank build_feature_bank(const TimeSeries& y, int sector_halfwidth, bool robust,
                               const std::vector<double>* matched_filter, Scaling scaling);
// Uses the config's halfwidth (auto resolved from min_stimulus_interval or the fallback).
FeatureBank build_feature_bank(const TimeSeries& y, const PipelineConfig& config);

}  // namespace havok
