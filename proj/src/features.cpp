#include "havok/features.hpp"

#include "havok/detector.hpp"
#include "havok/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace havok {

namespace {

int checked_half(const TimeSeries& y, int L) {
    if (L < 2 || L % 2 != 0) throw ValidationError("sector length L must be even and >= 2");
    if (static_cast<std::size_t>(L) >= y.size()) throw ValidationError("sector length L must be below N");
    return L / 2;
}

struct Sector {
    std::size_t begin, end;  // [begin, end)
    std::size_t size() const { return end - begin; }
};

Sector left_of(std::size_t n, int h) { return {n >= static_cast<std::size_t>(h) ? n - h : 0, n}; }
Sector right_of(std::size_t n, int h, std::size_t N) { return {n + 1, std::min(N, n + 1 + h)}; }

double sum(std::span<const double> y, Sector s) {
    double acc = 0.0;
    for (auto i = s.begin; i < s.end; ++i) acc += y[i];
    return acc;
}

double sum_sq(std::span<const double> y, Sector s) {
    double acc = 0.0;
    for (auto i = s.begin; i < s.end; ++i) acc += y[i] * y[i];
    return acc;
}

double median_of(std::vector<double>& buf) {
    const auto n = buf.size();
    auto mid = buf.begin() + static_cast<long>(n / 2);
    std::nth_element(buf.begin(), mid, buf.end());
    double hi = *mid;
    if (n % 2 == 1) return hi;
    double lo = *std::max_element(buf.begin(), mid);
    return 0.5 * (lo + hi);
}

double sector_median(std::span<const double> y, Sector s, bool squared, std::vector<double>& buf) {
    buf.clear();
    for (auto i = s.begin; i < s.end; ++i) buf.push_back(squared ? y[i] * y[i] : y[i]);
    return median_of(buf);
}

double energy_floor(std::span<const double> y) {
    double m = 0.0;
    for (double v : y) m = std::max(m, std::abs(v));
    return 1e-12 * m * m;
}

}  // namespace

TimeSeries local_convexity(const TimeSeries& y, int L, bool robust) {
    const int h = checked_half(y, L);
    const auto v = y.samples();
    const auto N = v.size();
    std::vector<double> out(N), buf;
    for (std::size_t n = 0; n < N; ++n) {
        const auto l = left_of(n, h), r = right_of(n, h, N);
        const double nl = static_cast<double>(l.size()), nr = static_cast<double>(r.size());
        double neighbours;
        if (robust) {
            const double ml = l.size() ? sector_median(v, l, false, buf) : 0.0;
            const double mr = r.size() ? sector_median(v, r, false, buf) : 0.0;
            neighbours = (ml * nl + mr * nr) / (nl + nr);
        } else {
            neighbours = (sum(v, l) + sum(v, r)) / (nl + nr);
        }
        out[n] = v[n] - neighbours;
    }
    return y.with_values(std::move(out));
}

TimeSeries mean_difference(const TimeSeries& y, int L, bool robust) {
    const int h = checked_half(y, L);
    const auto v = y.samples();
    const auto N = v.size();
    std::vector<double> out(N, 0.0), buf;
    for (std::size_t n = 0; n < N; ++n) {
        const auto l = left_of(n, h), r = right_of(n, h, N);
        if (l.size() == 0 || r.size() == 0) continue;  // one side missing: no shift measurable
        double ml, mr;
        if (robust) {
            ml = sector_median(v, l, false, buf);
            mr = sector_median(v, r, false, buf);
        } else {
            ml = sum(v, l) / static_cast<double>(l.size());
            mr = sum(v, r) / static_cast<double>(r.size());
        }
        out[n] = h * (mr - ml);
    }
    return y.with_values(std::move(out));
}

TimeSeries energy_ratio(const TimeSeries& y, int L, bool robust) {
    const int h = checked_half(y, L);
    const auto v = y.samples();
    const auto N = v.size();
    const double eps = energy_floor(v);
    std::vector<double> out(N, 1.0), buf;
    for (std::size_t n = 0; n < N; ++n) {
        const auto l = left_of(n, h), r = right_of(n, h, N);
        if (l.size() == 0 || r.size() == 0) continue;
        double el, er;
        if (robust) {
            el = sector_median(v, l, true, buf);
            er = sector_median(v, r, true, buf);
        } else {
            // per-sample energy scaled to a full sector, so truncated sectors stay comparable
            el = sum_sq(v, l) / static_cast<double>(l.size()) * h;
            er = sum_sq(v, r) / static_cast<double>(r.size()) * h;
        }
        out[n] = el > eps && el > 0.0 ? er / el : 1.0;
    }
    return y.with_values(std::move(out));
}

TimeSeries matched_filter_refine(const TimeSeries& y, std::span<const double> w) {
    if (w.empty()) throw ValidationError("matched filter is empty");
    if (w.size() > y.size()) throw ValidationError("matched filter longer than series");
    const double energy = std::inner_product(w.begin(), w.end(), w.begin(), 0.0);
    if (!(energy > 0.0)) throw ValidationError("matched filter is all zero");
    const auto v = y.samples();
    const long N = static_cast<long>(v.size());
    const long K = static_cast<long>(w.size());
    const long c = K / 2;
    std::vector<double> out(v.size());
    for (long n = 0; n < N; ++n) {
        double acc = 0.0;
        const long k0 = std::max(0L, c - n);
        const long k1 = std::min(K, N - n + c);
        for (long k = k0; k < k1; ++k) acc += v[n + k - c] * w[k];
        out[n] = acc / energy;
    }
    return y.with_values(std::move(out));
}

std::vector<double> scale_feature(std::span<const double> f, Scaling mode, double reference) {
    std::vector<double> out(f.begin(), f.end());
    if (mode == Scaling::none || f.empty()) return out;
    const double n = static_cast<double>(f.size());
    const double mean = std::accumulate(f.begin(), f.end(), 0.0) / n;
    double ss = 0.0, peak = 0.0;
    for (double x : f) {
        ss += (x - mean) * (x - mean);
        peak = std::max(peak, std::abs(x));
    }
    const double sd = std::sqrt(ss / n);
    // spread at rounding level of the feature or of its source counts as constant
    if (!(sd > 1e-10 * std::max(peak, reference))) {
        std::fill(out.begin(), out.end(), 0.0);
        return out;
    }
    const double shift = mode == Scaling::standardize ? mean : 0.0;
    for (auto& x : out) x = (x - shift) / sd;
    return out;
}

FeatureBank build_feature_bank(const TimeSeries& y, int h, bool robust, const std::vector<double>* matched_filter,
                               Scaling scaling) {
    const TimeSeries src = matched_filter ? matched_filter_refine(y, *matched_filter) : y;
    const int L = 2 * h;
    std::vector<TimeSeries> raw{src, local_convexity(src, L, robust), mean_difference(src, L, robust),
                                energy_ratio(src, L, robust)};
    double amp = 0.0;
    for (double x : src.samples()) amp = std::max(amp, std::abs(x));
    const double ref[] = {amp, amp, amp * h, 1.0};
    std::vector<TimeSeries> scaled;
    scaled.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        scaled.push_back(raw[i].with_values(scale_feature(raw[i].samples(), scaling, ref[i])));
    return FeatureBank(std::move(scaled), {"raw", "convexity", "mean_shift", "energy_ratio"}, h);
}

FeatureBank build_feature_bank(const TimeSeries& y, const PipelineConfig& config) {
    const int h = resolve_sector_halfwidth(config, y.sample_period());
    const auto* w = config.matched_filter ? &*config.matched_filter : nullptr;
    return build_feature_bank(y, h, config.robust_median, w, config.scaling);
}

}  // namespace havok
