#include "havok/errors.hpp"
#include "havok/threshold.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

using namespace havok;

namespace {

std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double mu = 0.0, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(mu, sd);
    std::vector<double> v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

std::vector<double> mixture(std::size_t n, double w, double d0, double sd, double dth, double lambda,
                            std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(d0, sd);
    std::exponential_distribution<double> e(lambda);
    std::bernoulli_distribution core(w);
    std::vector<double> v(n);
    for (auto& x : v) x = core(rng) ? g(rng) : dth + e(rng);
    return v;
}

double integral(const Histogram& h) {
    double s = 0.0;
    for (double p : h.density) s += p * h.width();
    return s;
}

}  // namespace

TEST_SUITE("threshold") {

TEST_CASE("histogram of standard normal samples") {
    const auto d = gaussian(10000, 1);
    const auto h = build_histogram(d);
    CHECK(h.bins() >= 20);
    CHECK(h.bins() <= 200);
    CHECK(h.edges.size() == h.bins() + 1);
    CHECK(h.total() == 10000);
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), 0L) == 10000);
    CHECK(integral(h) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::is_sorted(h.edges.begin(), h.edges.end()));
    for (double p : h.density) CHECK(p >= 0.0);
}

TEST_CASE("histogram of constant samples has one occupied bin") {
    const auto h = build_histogram(std::vector<double>(50, 2.0));
    CHECK(h.edges.front() == doctest::Approx(1.5));
    CHECK(h.edges.back() == doctest::Approx(2.5));
    CHECK(std::count_if(h.counts.begin(), h.counts.end(), [](long c) { return c > 0; }) == 1);
    CHECK(integral(h) == doctest::Approx(1.0));
}

TEST_CASE("histogram with explicit bins") {
    const auto h = build_histogram(gaussian(1000, 2), 100);
    CHECK(h.bins() == 100);
    CHECK_THROWS_AS(build_histogram(gaussian(9, 3)), ValidationError);
    CHECK_THROWS_AS(build_histogram(gaussian(100, 3), 0), ValidationError);
}

TEST_CASE("rough threshold of a Gaussian sits at least two sigma out") {
    // the mode estimate wanders by a few hundredths, so count seeds
    int far = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto h = build_histogram(gaussian(10000, 100 + seed));
        const auto r = rough_threshold(h);
        CHECK(std::abs(r.mode) < 0.3);
        CHECK_FALSE(r.fallback);
        if (r.value >= 2.0) ++far;
    }
    CHECK(far >= 18);
}

TEST_CASE("rough threshold of a mirror-symmetric sample is the largest candidate") {
    auto d = gaussian(5000, 4);
    const std::size_t n = d.size();
    for (std::size_t i = 0; i < n; ++i) d.push_back(-d[i]);
    const auto h = build_histogram(d, 80);
    const auto r = rough_threshold(h);
    CHECK_FALSE(r.fallback);
    // candidates step from the refined mode in whole bins
    CHECK(r.value <= h.center(h.bins() - 1));
    CHECK(r.value > h.center(h.bins() - 1) - h.width());
}

TEST_CASE("rough threshold localizes the start of a right-tail bump") {
    int inside = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto d = mixture(20000, 0.9, 0.0, 1.0, 3.0, 2.0, 200 + seed);
        const auto r = rough_threshold(build_histogram(d));
        if (r.value >= 2.0 && r.value <= 3.5) ++inside;
    }
    CHECK(inside >= 9);
}

TEST_CASE("core fit on wide and narrow windows") {
    const auto d = gaussian(10000, 5);
    const auto wide = fit_gaussian_core(d, 0.0, 4.0);
    CHECK(std::abs(wide.d0) < 0.05);
    CHECK(wide.sigma == doctest::Approx(1.0).epsilon(0.05));

    const auto narrow = fit_gaussian_core(d, 0.0, 1.5);
    CHECK(narrow.sigma == doctest::Approx(1.0).epsilon(0.10));
    // the raw truncated spread is far below one
    double ss = 0.0;
    long n = 0;
    for (double x : d)
        if (std::abs(x) <= 1.5) {
            ss += x * x;
            ++n;
        }
    CHECK(std::sqrt(ss / static_cast<double>(n)) < 0.8);
}

TEST_CASE("core fit rejects constant or sparse data") {
    CHECK_THROWS_AS(fit_gaussian_core(std::vector<double>(100, 1.0), 1.0, 2.0), ValidationError);
    CHECK_THROWS_AS(fit_gaussian_core(gaussian(20, 6), 0.0, 5.0), ValidationError);
}

TEST_CASE("detachment flags pure Gaussian data") {
    const auto m = calibrate_detachment(gaussian(10000, 7));
    CHECK(m.no_anomaly);
    CHECK(m.d_th == doctest::Approx(m.d0 + 4.0 * m.sigma_d));
}

TEST_CASE("detachment recovers the tail start of a mixture") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto m = calibrate_detachment(mixture(20000, 0.95, 0.0, 1.0, 3.0, 1.0, 300 + seed));
        CHECK_FALSE(m.no_anomaly);
        CHECK(m.d_th >= 2.4);
        CHECK(m.d_th <= 3.6);
    }
}

TEST_CASE("detachment on a small far tail") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto m = calibrate_detachment(mixture(20000, 0.995, 0.0, 1.0, 6.0, 1.0, 400 + seed));
        if (!m.no_anomaly) {
            CHECK(m.d_th >= 5.0);
            CHECK(m.d_th <= 7.0);
        }
    }
}

TEST_CASE("mixture fit recovers all five parameters") {
    const auto m = fit_mixture(mixture(50000, 0.9, 0.0, 1.0, 3.0, 2.0, 9));
    CHECK(m.method == ThresholdMethod::mixture_fit);
    CHECK_FALSE(m.fit_fallback);
    CHECK(std::abs(m.d_th - 3.0) <= 0.3);
    CHECK(m.w_G == doctest::Approx(0.9).epsilon(0.1));
    CHECK(std::abs(m.d0) <= 0.1);
    CHECK(m.sigma_d == doctest::Approx(1.0).epsilon(0.1));
    CHECK(m.lambda == doctest::Approx(2.0).epsilon(0.1));
    CHECK(m.d_th > m.d0);
}

TEST_CASE("mixture fit on pure Gaussian data falls back") {
    const auto m = fit_mixture(gaussian(20000, 10));
    CHECK(m.fit_fallback);
    CHECK(m.w_G == 1.0);
    CHECK(m.no_anomaly);
}

TEST_CASE("mixture fit on a pure shifted exponential") {
    std::mt19937_64 rng(11);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> d(5000);
    for (auto& x : d) x = 2.0 + e(rng);
    ThresholdModel m;
    CHECK_NOTHROW(m = fit_mixture(d));
    CHECK(std::isfinite(m.d_th));
    CHECK(m.d_th > m.d0);
}

TEST_CASE("mixture fit needs enough samples") {
    CHECK_THROWS_AS(fit_mixture(gaussian(499, 12)), ValidationError);
}

TEST_CASE("fitted density integrates to about one") {
    const auto d = mixture(50000, 0.9, 0.0, 1.0, 3.0, 2.0, 13);
    for (auto method : {ThresholdMethod::detachment, ThresholdMethod::mixture_fit}) {
        const auto m = calibrate(d, method);
        const auto h = build_histogram(d);
        double s = 0.0;
        const int sub = 20;
        const double step = (h.edges.back() - h.edges.front()) / (sub * static_cast<double>(h.bins()));
        for (int i = 0; i < sub * static_cast<int>(h.bins()); ++i) {
            const double x = h.edges.front() + (i + 0.5) * step;
            CHECK(m.density(x) >= 0.0);
            s += m.density(x) * step;
        }
        CHECK(s == doctest::Approx(1.0).epsilon(0.02));
    }
}

TEST_CASE("thresholds are affine equivariant") {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> ua(0.1, 10.0), ub(-50.0, 50.0);
    const auto d = mixture(20000, 0.9, 0.0, 1.0, 3.0, 2.0, 15);
    const auto base = calibrate(d, ThresholdMethod::detachment);
    for (int trial = 0; trial < 10; ++trial) {
        const double a = ua(rng), b = ub(rng);
        std::vector<double> t(d);
        for (auto& x : t) x = a * x + b;
        const auto m = calibrate(t, ThresholdMethod::detachment);
        const double tol = 1e-8 * (std::abs(b) + a * 10.0);
        CHECK(std::abs(m.d_th - (a * base.d_th + b)) <= tol);
        CHECK(std::abs(m.rough - (a * base.rough + b)) <= tol);
        CHECK(std::abs(m.d0 - (a * base.d0 + b)) <= tol);
        CHECK(std::abs(m.sigma_d - a * base.sigma_d) <= tol);
    }
}

TEST_CASE("adding tail mass never raises the detachment threshold") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto d = mixture(20000, 0.95, 0.0, 1.0, 3.0, 1.0, 500 + seed);
        ThresholdOptions opt;
        opt.bins = 120;
        const auto first = calibrate_detachment(d, opt);
        REQUIRE_FALSE(first.no_anomaly);
        const double hi = *std::max_element(d.begin(), d.end());
        std::mt19937_64 rng(600 + seed);
        std::uniform_real_distribution<double> u(first.d_th, hi);
        auto current = first.d_th;
        for (int round = 0; round < 3; ++round) {
            for (int i = 0; i < 300; ++i) d.push_back(u(rng));
            const auto next = calibrate_detachment(d, opt);
            CHECK(next.d_th <= current + 1e-12);
            current = next.d_th;
        }
    }
}

TEST_CASE("no-anomaly flag rate on pure Gaussian inputs") {
    int flagged = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed)
        if (calibrate_detachment(gaussian(10000, 1000 + seed)).no_anomaly) ++flagged;
    CHECK(flagged >= 190);
}

TEST_CASE("histogram csv has a header and one row per bin") {
    const auto d = gaussian(2000, 16);
    const auto m = calibrate(d, ThresholdMethod::detachment);
    const auto h = build_histogram(d, 30);
    std::ostringstream os;
    write_histogram_csv(os, h, m);
    const auto s = os.str();
    CHECK(s.rfind("bin_center,empirical_density,fitted_density\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 31);
}

}
