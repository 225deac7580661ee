#include "havok/errors.hpp"
#include "havok/features.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace havok;

namespace {

TimeSeries ts(std::vector<double> v) { return TimeSeries(std::move(v), 1.0); }

std::vector<double> randn(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

// zero-padded correlation written as a plain double loop over the padded signal
std::vector<double> brute_correlation(const std::vector<double>& y, const std::vector<double>& w) {
    const long N = static_cast<long>(y.size()), K = static_cast<long>(w.size()), c = K / 2;
    std::vector<double> padded(static_cast<std::size_t>(N + 2 * K), 0.0);
    for (long i = 0; i < N; ++i) padded[static_cast<std::size_t>(i + K)] = y[static_cast<std::size_t>(i)];
    double e = 0.0;
    for (double x : w) e += x * x;
    std::vector<double> out(y.size());
    for (long n = 0; n < N; ++n) {
        double acc = 0.0;
        for (long k = 0; k < K; ++k) acc += padded[static_cast<std::size_t>(n + k - c + K)] * w[static_cast<std::size_t>(k)];
        out[static_cast<std::size_t>(n)] = acc / e;
    }
    return out;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("constant series: convexity 0, mean shift 0, energy ratio 1") {
    for (bool robust : {false, true}) {
        const auto y = ts(std::vector<double>(40, 3.25));
        const auto y2 = local_convexity(y, 6, robust);
        const auto y3 = mean_difference(y, 6, robust);
        const auto y4 = energy_ratio(y, 6, robust);
        for (double v : y2.samples()) CHECK(v == 0.0);
        for (double v : y3.samples()) CHECK(v == 0.0);
        for (double v : y4.samples()) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("convexity hand example") {
    const auto y2 = local_convexity(ts({0, 0, 1, 0, 0}), 4);
    CHECK(y2[2] == 1.0);
}

TEST_CASE("convexity vanishes on a ramp away from the edges") {
    std::vector<double> v(50);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.37 * static_cast<double>(i) - 2.0;
    for (bool robust : {false, true}) {
        const auto y2 = local_convexity(ts(v), 8, robust);
        for (std::size_t n = 4; n + 4 < v.size(); ++n) CHECK(std::abs(y2[n]) < 1e-12);
    }
}

TEST_CASE("mean shift and energy ratio hand examples") {
    const auto y = ts({1, 1, 1, 2, 2});
    CHECK(mean_difference(y, 4)[2] == 2.0);
    CHECK(energy_ratio(y, 4)[2] == 4.0);
    CHECK(mean_difference(y, 4, true)[2] == 2.0);
    CHECK(energy_ratio(y, 4, true)[2] == 4.0);
}

TEST_CASE("step: the mean shift peaks at the step") {
    const std::size_t n0 = 23;
    std::vector<double> v(60, 0.0);
    for (std::size_t i = n0; i < v.size(); ++i) v[i] = 1.0;
    const int h = 5;
    const auto y3 = mean_difference(ts(v), 2 * h);
    // direct scan with the sector-sum formula
    double best = -1.0;
    for (std::size_t n = h; n + h < v.size(); ++n) {
        double r = 0, l = 0;
        for (int k = 1; k <= h; ++k) {
            r += v[n + k];
            l += v[n - k];
        }
        CHECK(y3[n] == doctest::Approx(r - l));
        best = std::max(best, std::abs(r - l));
    }
    CHECK(std::abs(y3[n0]) == best);
    for (std::size_t n = 0; n < v.size(); ++n) CHECK(std::abs(y3[n]) <= best);
}

TEST_CASE("energy ratio falls back to 1 on silent sectors") {
    const auto y4 = energy_ratio(ts({0, 0, 0, 0, 0, 0, 5}), 4);
    CHECK(y4[2] == 1.0);
    CHECK(energy_ratio(ts({0, 0, 0, 0, 0, 0, 0}), 4)[3] == 1.0);
}

TEST_CASE("sector length checks") {
    const auto y = ts({1, 2, 3, 4, 5});
    CHECK_THROWS_AS(local_convexity(y, 3), ValidationError);
    CHECK_THROWS_AS(mean_difference(y, 0), ValidationError);
    CHECK_THROWS_AS(energy_ratio(y, 6), ValidationError);
}

TEST_CASE("matched filter: a clean pulse gives 1 at its centre") {
    const std::vector<double> w{0.2, 0.7, 1.0, 0.6, 0.1};
    const auto out = matched_filter_refine(ts(w), w);
    const auto peak = std::max_element(out.samples().begin(), out.samples().end()) - out.samples().begin();
    CHECK(peak == 2);
    CHECK(out[2] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("matched filter: delta kernel is the identity") {
    std::vector<double> v(20, 0.0);
    v[7] = 1.0;
    const auto out = matched_filter_refine(ts(v), std::vector<double>{1.0});
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(out[i] == v[i]);
}

TEST_CASE("matched filter: two pulses give two local maxima") {
    const std::vector<double> w{0.5, 1.0, 0.5};
    std::vector<double> v(40, 0.0);
    for (std::size_t n0 : {5u, 25u})
        for (std::size_t k = 0; k < w.size(); ++k) v[n0 + k] += w[k];
    const auto out = matched_filter_refine(ts(v), w);
    const auto ref = brute_correlation(v, w);
    std::vector<std::size_t> maxima;
    for (std::size_t i = 1; i + 1 < v.size(); ++i)
        if (ref[i] > ref[i - 1] && ref[i] > ref[i + 1]) maxima.push_back(i);
    REQUIRE(maxima.size() == 2);
    CHECK(maxima[0] == 6);
    CHECK(maxima[1] == 26);
    for (std::size_t i : maxima) CHECK(out[i] == doctest::Approx(1.0));
}

TEST_CASE("matched filter matches a brute-force correlation") {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng() % 63;
        const std::size_t k = 1 + rng() % n;
        const auto y = randn(n, rng());
        auto w = randn(k, rng());
        const auto out = matched_filter_refine(ts(y), w);
        const auto ref = brute_correlation(y, w);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(out[i] - ref[i]) <= 1e-12);
    }
}

TEST_CASE("matched filter rejects empty or zero kernels") {
    const auto y = ts({1, 2, 3});
    CHECK_THROWS_AS(matched_filter_refine(y, std::vector<double>{}), ValidationError);
    CHECK_THROWS_AS(matched_filter_refine(y, std::vector<double>{0.0, 0.0}), ValidationError);
    CHECK_THROWS_AS(matched_filter_refine(y, std::vector<double>(4, 1.0)), ValidationError);
}

TEST_CASE("feature bank: four equal-length features in order") {
    const auto y = ts(randn(300, 1));
    const auto bank = build_feature_bank(y, 5, false, nullptr, Scaling::unit_variance);
    REQUIRE(bank.count() == 4);
    CHECK(bank.labels() == std::vector<std::string>{"raw", "convexity", "mean_shift", "energy_ratio"});
    for (const auto& f : bank.features()) CHECK(f.size() == 300);
    CHECK(bank.sector_halfwidth() == 5);
}

TEST_CASE("feature bank: constant input scales to all zeros") {
    for (auto mode : {Scaling::unit_variance, Scaling::standardize}) {
        const auto bank = build_feature_bank(ts(std::vector<double>(100, 0.1)), 4, false, nullptr, mode);
        for (const auto& f : bank.features())
            for (double v : f.samples()) CHECK(v == 0.0);
    }
}

TEST_CASE("scaling modes") {
    const std::vector<double> f{1.0, 2.0, 3.0, 4.0};
    const auto u = scale_feature(f, Scaling::unit_variance);
    const auto s = scale_feature(f, Scaling::standardize);
    const auto n = scale_feature(f, Scaling::none);
    const double sd = std::sqrt(1.25);
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(u[i] == doctest::Approx(f[i] / sd));
        CHECK(s[i] == doctest::Approx((f[i] - 2.5) / sd));
        CHECK(n[i] == f[i]);
    }
}

TEST_CASE("robust features damp an impulsive outlier in the mean shift") {
    auto v = randn(200, 5);
    for (auto& x : v) x *= 0.1;
    const std::size_t at = 100;
    v[at] += 25.0;
    const auto y = ts(v);
    const auto plain = build_feature_bank(y, 6, false, nullptr, Scaling::none);
    const auto robust = build_feature_bank(y, 6, true, nullptr, Scaling::none);
    // the outlier sits in the left sector one step later
    CHECK(std::abs(robust[2][at + 1]) < std::abs(plain[2][at + 1]));
}

TEST_CASE("features are shift equivariant away from the edges") {
    const auto v = randn(120, 8);
    const std::size_t k = 17;
    std::vector<double> shifted(k, 0.3);
    shifted.insert(shifted.end(), v.begin(), v.end());
    const int h = 6;
    for (bool robust : {false, true}) {
        const auto a = build_feature_bank(ts(v), h, robust, nullptr, Scaling::none);
        const auto b = build_feature_bank(ts(shifted), h, robust, nullptr, Scaling::none);
        for (std::size_t f = 0; f < 4; ++f)
            for (std::size_t n = h; n + h < v.size(); ++n) CHECK(a[f][n] == b[f][n + k]);
    }
}

TEST_CASE("scale behaviour before scaling") {
    const auto v = randn(150, 9);
    std::vector<double> av(v);
    const double a = 3.7;
    for (auto& x : av) x *= a;
    for (bool robust : {false, true}) {
        const auto p = build_feature_bank(ts(v), 5, robust, nullptr, Scaling::none);
        const auto q = build_feature_bank(ts(av), 5, robust, nullptr, Scaling::none);
        for (std::size_t n = 0; n < v.size(); ++n) {
            CHECK(q[1][n] == doctest::Approx(a * p[1][n]).epsilon(1e-12));
            CHECK(q[2][n] == doctest::Approx(a * p[2][n]).epsilon(1e-12));
            CHECK(q[3][n] == doctest::Approx(p[3][n]).epsilon(1e-12));
        }
    }
}

TEST_CASE("robust and plain features agree on constant sectors") {
    // plateaus: where each sector is constant, mean equals median
    std::vector<double> v;
    for (double level : {1.0, 4.0, -2.0, 3.0}) v.insert(v.end(), 30, level);
    const int h = 4;
    const auto a = build_feature_bank(ts(v), h, false, nullptr, Scaling::none);
    const auto b = build_feature_bank(ts(v), h, true, nullptr, Scaling::none);
    for (std::size_t n = h; n + h < v.size(); ++n) {
        const auto same = [&](std::size_t a, std::size_t b) {
            return std::all_of(v.begin() + static_cast<long>(a), v.begin() + static_cast<long>(b),
                               [&](double x) { return x == v[a]; });
        };
        const bool flat = same(n - h, n) && same(n + 1, n + h + 1);
        if (!flat) continue;
        for (std::size_t f = 1; f < 4; ++f) CHECK(a[f][n] == b[f][n]);
    }
}

TEST_CASE("matched filter feeds the bank when configured") {
    const auto v = randn(100, 4);
    const std::vector<double> w{1.0, 2.0, 1.0};
    const auto bank = build_feature_bank(ts(v), 3, false, &w, Scaling::none);
    const auto ref = matched_filter_refine(ts(v), w);
    for (std::size_t n = 0; n < v.size(); ++n) CHECK(bank[0][n] == ref[n]);
}

}
