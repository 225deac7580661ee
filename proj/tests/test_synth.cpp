#include "havok/bench.hpp"
#include "havok/errors.hpp"
#include "havok/synth.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

using namespace havok;

namespace {

Event at(long i) { return Event{i, i, i, 1.0, EventKind::point}; }

// largest one-to-one matching within tol, by exhaustive search
long brute_matching(const std::vector<long>& peaks, const std::vector<long>& truth, long tol) {
    std::vector<bool> used(peaks.size(), false);
    std::function<long(std::size_t)> go = [&](std::size_t t) -> long {
        if (t == truth.size()) return 0;
        long best = go(t + 1);
        for (std::size_t p = 0; p < peaks.size(); ++p) {
            if (used[p] || std::abs(peaks[p] - truth[t]) > tol) continue;
            used[p] = true;
            best = std::max(best, 1 + go(t + 1));
            used[p] = false;
        }
        return best;
    };
    return go(0);
}

double rms(const std::vector<double>& a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return std::sqrt(s / static_cast<double>(a.size()));
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("calcium kernel has unit peak and decays") {
    const auto k = calcium_kernel(0.03, 0.2, 1.0 / 60.0);
    CHECK(k.front() == 0.0);
    CHECK(*std::max_element(k.begin(), k.end()) == doctest::Approx(1.0));
    CHECK(std::abs(k.back()) < 1e-3);
    CHECK_THROWS_AS(calcium_kernel(0.1, 0.1, 0.01), ValidationError);
    CHECK_THROWS_AS(calcium_kernel(0.0, 0.1, 0.01), ValidationError);
}

TEST_CASE("noise-free single spike equals the kernel") {
    CalciumParams p;
    p.n_samples = 400;
    p.noise_rms = 0.0;
    p.baseline = 0.0;
    p.baseline_level = 0.0;
    p.spike_indices = std::vector<long>{50};
    const auto s = gen_calcium(p);
    const auto k = calcium_kernel(p.tau_rise, p.tau_decay, p.sample_period);
    for (std::size_t i = 0; i < 400; ++i) {
        const double want = i >= 50 && i - 50 < k.size() ? k[i - 50] : 0.0;
        CHECK(s.series[i] == want);
    }
    CHECK(s.truth.event_indices == std::vector<long>{50});
}

TEST_CASE("overlapping spikes add up") {
    CalciumParams p;
    p.n_samples = 300;
    p.noise_rms = 0.0;
    p.baseline = 0.0;
    p.baseline_level = 0.0;
    p.spike_indices = std::vector<long>{20, 21};
    const auto s = gen_calcium(p);
    const auto k = calcium_kernel(p.tau_rise, p.tau_decay, p.sample_period);
    for (std::size_t i = 0; i < 300; ++i) {
        double want = 0.0;
        for (std::size_t s0 : {20u, 21u})
            if (i >= s0 && i - s0 < k.size()) want += k[i - s0];
        CHECK(s.series[i] == doctest::Approx(want).epsilon(1e-15));
    }
}

TEST_CASE("calcium truth is sorted, in range and near the requested rate") {
    CalciumParams p;
    p.seed = 4;
    const auto s = gen_calcium(p);
    const auto& t = s.truth.event_indices;
    CHECK(std::is_sorted(t.begin(), t.end()));
    CHECK(std::adjacent_find(t.begin(), t.end()) == t.end());
    CHECK(t.front() >= 0);
    CHECK(t.back() < 14400);
    // 240 s at 0.21 Hz: about 50 spikes
    CHECK(t.size() > 25);
    CHECK(t.size() < 80);
}

TEST_CASE("generators are deterministic under a seed") {
    CalciumParams c;
    c.seed = 9;
    CHECK(gen_calcium(c).series.values() == gen_calcium(c).series.values());
    auto e = ecg_trial_params(9);
    CHECK(gen_periodic_anomaly(e).series.values() == gen_periodic_anomaly(e).series.values());
    auto m = mud_trial_params(9);
    CHECK(gen_pulse_train(m).series.values() == gen_pulse_train(m).series.values());
    c.seed = 10;
    CHECK(gen_calcium(c).series.values() != gen_calcium(CalciumParams{}).series.values());
}

TEST_CASE("periodic signal without distortion has no windows") {
    PeriodicParams p;
    p.anomaly_windows = {{900, 1079}};
    p.morph_distortion = 0.0;
    p.noise_rms = 0.0;
    const auto s = gen_periodic_anomaly(p);
    CHECK(s.truth.event_windows.empty());
    CHECK(s.truth.event_indices.empty());
    for (std::size_t i = 90; i < s.series.size(); ++i) CHECK(s.series[i] == s.series[i - 90]);
}

TEST_CASE("one distorted window is recorded and deviates from the template") {
    PeriodicParams p;
    p.anomaly_windows = {{900, 1079}};
    p.morph_distortion = 0.5;
    p.noise_rms = 0.05;
    p.seed = 2;
    const auto s = gen_periodic_anomaly(p);
    REQUIRE(s.truth.event_windows.size() == 1);
    CHECK(s.truth.event_windows[0] == Window{900, 1079});
    const auto clean = beat_template(90);
    std::vector<double> inside, outside;
    for (std::size_t i = 0; i < s.series.size(); ++i) {
        const double dev = s.series[i] - clean[i % 90];
        (i >= 900 && i <= 1079 ? inside : outside).push_back(dev);
    }
    CHECK(rms(inside) > 2.0 * rms(outside));
}

TEST_CASE("periodic generator rejects bad windows") {
    PeriodicParams p;
    p.anomaly_windows = {{100, 300}, {250, 400}};
    CHECK_THROWS_AS(gen_periodic_anomaly(p), ValidationError);
    p.anomaly_windows = {{2000, 2200}};
    CHECK_THROWS_AS(gen_periodic_anomaly(p), ValidationError);
}

TEST_CASE("random beat windows are whole beats with clean gaps") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto w = random_beat_windows(2160, 90, 3, 3, seed);
        REQUIRE(w.size() == 3);
        for (std::size_t i = 0; i < w.size(); ++i) {
            CHECK(w[i].first % 90 == 0);
            CHECK(w[i].second - w[i].first + 1 == 270);
            CHECK(w[i].first >= 90);
            CHECK(w[i].second <= 2160 - 90 - 1);
            if (i > 0) CHECK(w[i].first - w[i - 1].second > 90);
        }
    }
    CHECK_THROWS_AS(random_beat_windows(900, 90, 3, 3, 0), ValidationError);
}

TEST_CASE("pulse train without pulses or noise is the drift alone") {
    PulseTrainParams p;
    p.bits = std::vector<int>(50, 0);
    p.noise_rms = 0.0;
    p.impulsive_rate = 0.0;
    p.drift_amplitude = 1.5;
    const auto s = gen_pulse_train(p);
    double peak = 0.0, mean = 0.0;
    for (double v : s.series.samples()) {
        peak = std::max(peak, std::abs(v));
        mean += v;
    }
    CHECK(peak == doctest::Approx(1.5));
    CHECK(mean / 2000.0 == doctest::Approx(0.0).scale(1.0));
    CHECK(s.truth.event_indices.empty());
}

TEST_CASE("pulse train places pulses at slot starts") {
    PulseTrainParams p;
    p.bits = {1, 0, 1};
    p.noise_rms = 0.0;
    p.drift_amplitude = 0.0;
    p.impulsive_rate = 0.0;
    const auto s = gen_pulse_train(p);
    const auto w = hann_pulse(12);
    REQUIRE(s.series.size() == 120);
    for (std::size_t i = 0; i < 120; ++i) {
        const std::size_t slot = i / 40, off = i % 40;
        const double want = slot != 1 && off < 12 ? w[off] : 0.0;
        CHECK(s.series[i] == want);
    }
    CHECK(s.truth.event_indices == std::vector<long>{0, 80});
    CHECK(s.truth.bits == p.bits);
}

TEST_CASE("impulsive outlier count follows the rate") {
    PulseTrainParams p;
    p.bits = random_bits(2000, 1);
    p.impulsive_rate = 0.001;
    p.seed = 3;
    const auto s = gen_pulse_train(p);
    // 80000 samples: expect 80, standard deviation about 9
    CHECK(s.outliers.size() >= 50);
    CHECK(s.outliers.size() <= 110);
}

TEST_CASE("pulse train rejects bad parameters") {
    PulseTrainParams p;
    p.bits = {1, 0};
    p.slot_len = 8;
    CHECK_THROWS_AS(gen_pulse_train(p), ValidationError);
    p.slot_len = 40;
    p.bits = {1, 2};
    CHECK_THROWS_AS(gen_pulse_train(p), ValidationError);
}

TEST_CASE("error ratio hand examples") {
    std::vector<long> truth(10);
    for (long i = 0; i < 10; ++i) truth[static_cast<std::size_t>(i)] = 100 * i;
    CHECK(error_ratio(truth, truth, 2) == 0.0);
    std::vector<long> det(truth.begin(), truth.end() - 1);
    det.push_back(555);
    CHECK(error_ratio(det, truth, 2) == doctest::Approx(0.2));
    CHECK(error_ratio(std::vector<long>{5}, std::vector<long>{}, 2) == 1.0);

    GroundTruth g;
    g.event_indices = {10, 50};
    const std::vector<Event> ev{at(11), at(49)};
    CHECK(error_ratio(ev, g, 1) == 0.0);
    CHECK(error_ratio(ev, g, 0) == 2.0);
}

TEST_CASE("error ratio ignores event order") {
    std::mt19937_64 rng(5);
    std::vector<long> peaks{3, 40, 41, 90, 200}, truth{2, 42, 95, 150};
    const double base = error_ratio(peaks, truth, 5);
    for (int i = 0; i < 20; ++i) {
        std::shuffle(peaks.begin(), peaks.end(), rng);
        std::shuffle(truth.begin(), truth.end(), rng);
        CHECK(error_ratio(peaks, truth, 5) == base);
    }
}

TEST_CASE("matching reaches the brute-force optimum") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<long> peaks(rng() % 8), truth(rng() % 8);
        for (auto& x : peaks) x = static_cast<long>(rng() % 40);
        for (auto& x : truth) x = static_cast<long>(rng() % 40);
        const long tol = static_cast<long>(rng() % 5);
        const auto m = match_events(peaks, truth, tol);
        CHECK(m.matched == brute_matching(peaks, truth, tol));
        CHECK(m.misses == static_cast<long>(truth.size()) - m.matched);
        CHECK(m.false_positives == static_cast<long>(peaks.size()) - m.matched);
    }
}

TEST_CASE("bit error rate") {
    GroundTruth g;
    g.bits = std::vector<int>(100, 0);
    for (std::size_t s = 0; s < 100; s += 2) g.bits[s] = 1;
    std::vector<Event> perfect;
    for (std::size_t s = 0; s < 100; s += 2) perfect.push_back(at(static_cast<long>(s * 40 + 5)));
    CHECK(bit_error_rate(perfect, g, 40) == 0.0);

    auto one_off = perfect;
    one_off.push_back(at(1 * 40 + 7));
    CHECK(bit_error_rate(one_off, g, 40) == doctest::Approx(0.01));

    std::vector<Event> flipped;
    for (std::size_t s = 1; s < 100; s += 2) flipped.push_back(at(static_cast<long>(s * 40)));
    CHECK(bit_error_rate(flipped, g, 40) == 1.0);

    CHECK(decode_bits(std::vector<Event>{at(39), at(40), at(-3), at(10000)}, 3, 40) == std::vector<int>{1, 1, 0});
    CHECK_THROWS_AS(bit_error_rate(perfect, GroundTruth{}, 40), ValidationError);
}

TEST_CASE("synthetic csv carries value and truth flag") {
    PulseTrainParams p;
    p.bits = {1, 0};
    p.noise_rms = 0.0;
    p.drift_amplitude = 0.0;
    p.impulsive_rate = 0.0;
    std::ostringstream os;
    write_synthetic_csv(os, gen_pulse_train(p));
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "value,truth");
    std::getline(is, line);
    CHECK(line.substr(line.find(',')) == ",1");
    std::getline(is, line);
    CHECK(line.substr(line.find(',')) == ",0");

    std::ostringstream ts;
    GroundTruth g;
    g.event_windows = {{5, 9}};
    write_truth_csv(ts, g);
    CHECK(ts.str() == "kind,index,start,end,bit\nwindow,,5,9,\n");
}

}
