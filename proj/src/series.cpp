#include "havok/series.hpp"

#include "havok/errors.hpp"

#include <algorithm>
#include <cmath>

namespace havok {

namespace {

void check_finite(std::span<const double> v, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]))
            throw ValidationError(std::string(what) + ": non-finite sample at index " + std::to_string(i));
    }
}

}  // namespace

TimeSeries::TimeSeries(std::vector<double> samples, double sample_period, double start_time)
    : samples_(std::move(samples)), sample_period_(sample_period), start_time_(start_time) {
    if (!(sample_period_ > 0.0) || !std::isfinite(sample_period_))
        throw ValidationError("sample_period must be positive and finite");
    if (!std::isfinite(start_time_)) throw ValidationError("start_time must be finite");
    if (samples_.size() < 2) throw ValidationError("time series needs at least 2 samples");
    check_finite(samples_, "time series");
}

TimeSeries TimeSeries::with_values(std::vector<double> v) const {
    return TimeSeries(std::move(v), sample_period_, start_time_);
}

FeatureBank::FeatureBank(std::vector<TimeSeries> features, std::vector<std::string> labels, int sector_halfwidth)
    : features_(std::move(features)), labels_(std::move(labels)), halfwidth_(sector_halfwidth) {
    if (features_.empty()) throw ValidationError("feature bank is empty");
    if (labels_.size() != features_.size()) throw ValidationError("one label per feature required");
    if (halfwidth_ < 1) throw ValidationError("sector halfwidth must be positive");
    const auto n = features_.front().size();
    const auto ts = features_.front().sample_period();
    for (const auto& f : features_) {
        if (f.size() != n) throw ValidationError("feature lengths differ");
        if (f.sample_period() != ts) throw ValidationError("feature sample periods differ");
    }
}

PipelineConfig validate(const PipelineConfig& config, const TimeSeries& y) {
    return validate(config, y.size(), kFeatureCount);
}

PipelineConfig validate(const PipelineConfig& c, std::size_t n_samples, int feature_count) {
    const auto N = static_cast<long>(n_samples);
    const long F = feature_count;
    if (N < 2) throw ValidationError("series too short: need at least 2 samples");
    if (F < 1) throw ValidationError("feature count must be positive");

    auto fits = [&](long M) { return M >= 1 && F * M < N - M + 1; };

    if (c.sector_halfwidth) {
        const long h = *c.sector_halfwidth;
        if (h < 1) throw ValidationError("sector halfwidth must be >= 1");
        if (2 * h >= N) throw ValidationError("series too short for sector length L=" + std::to_string(2 * h));
    }
    if (c.min_stimulus_interval && !(*c.min_stimulus_interval > 0.0))
        throw ValidationError("min stimulus interval must be positive");

    long rank_bound = 0;
    if (c.memory_M) {
        const long M = *c.memory_M;
        if (M < 1) throw ValidationError("memory M must be >= 1");
        if (!fits(M))
            throw ValidationError("series too short for M=" + std::to_string(M) + " (N=" + std::to_string(N) +
                                  ", " + std::to_string(F * M) + " Hankel rows)");
        rank_bound = std::min(F * M, N - M + 1);
    } else {
        if (c.M_grid.empty()) throw ValidationError("M grid is empty");
        for (int M : c.M_grid)
            if (M < 1) throw ValidationError("M grid entries must be >= 1");
        for (int M : c.M_grid)
            if (fits(M)) rank_bound = std::max(rank_bound, std::min(F * M, N - M + 1));
        if (rank_bound == 0) throw ValidationError("series too short for every M in the grid");
    }

    auto check_r = [&](long r) {
        if (r < 2) throw ValidationError("order r must be >= 2");
        if (r >= rank_bound)
            throw ValidationError("order r=" + std::to_string(r) + " must be below the number of singular values (" +
                                  std::to_string(rank_bound) + ")");
    };
    if (c.order_r) {
        check_r(*c.order_r);
    } else {
        if (c.r_grid.empty()) throw ValidationError("r grid is empty");
        for (int r : c.r_grid) check_r(r);
    }

    if (c.matched_filter) {
        const auto& w = *c.matched_filter;
        if (w.empty()) throw ValidationError("matched filter is empty");
        if (static_cast<long>(w.size()) > N) throw ValidationError("matched filter longer than series");
        check_finite(w, "matched filter");
        if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; }))
            throw ValidationError("matched filter is all zero");
    }
    if (c.detrend_window && *c.detrend_window < 0) throw ValidationError("detrend window must be >= 0");
    if (c.min_event_separation && *c.min_event_separation < 0)
        throw ValidationError("min event separation must be >= 0");
    if (c.histogram_bins && *c.histogram_bins < 1) throw ValidationError("histogram bins must be >= 1");
    if (!(c.kappa > 0.0)) throw ValidationError("kappa must be positive");
    if (c.detach_run < 1) throw ValidationError("detachment run length must be >= 1");
    return c;
}

}  // namespace havok
