#include "havok/synth.hpp"

#include "havok/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

namespace havok {

namespace {

constexpr std::uint64_t kWindowStream = 0x9E3779B97F4A7C15ULL;

struct Wave {
    double center, amplitude, width;  // fractions of the beat period
};

constexpr Wave kWaves[] = {
    {0.20, 0.15, 0.025},   // P
    {0.36, -0.12, 0.010},  // Q
    {0.40, 1.00, 0.012},   // R
    {0.44, -0.25, 0.012},  // S
    {0.65, 0.30, 0.050},   // T
};

}  // namespace

std::vector<double> calcium_kernel(double tau_rise, double tau_decay, double ts) {
    if (!(tau_rise > 0.0) || !(tau_decay > 0.0) || !(ts > 0.0)) throw ValidationError("kernel time constants must be positive");
    if (tau_rise == tau_decay) throw ValidationError("rise and decay time constants must differ");
    const auto len = static_cast<std::size_t>(std::max(2.0, std::ceil(10.0 * std::max(tau_decay, tau_rise) / ts)));
    std::vector<double> k(len);
    double peak = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        const double t = static_cast<double>(i) * ts;
        k[i] = std::exp(-t / tau_decay) - std::exp(-t / tau_rise);
        peak = std::max(peak, std::abs(k[i]));
    }
    if (!(peak > 0.0)) throw ValidationError("kernel vanishes at this sample period");
    for (auto& v : k) v /= peak;
    if (tau_rise > tau_decay)
        for (auto& v : k) v = -v;
    return k;
}

Synthetic gen_calcium(const CalciumParams& p) {
    if (p.n_samples < 2) throw ValidationError("n_samples must be >= 2");
    if (!(p.rate_hz >= 0.0)) throw ValidationError("rate must be nonnegative");
    if (p.noise_rms < 0.0 || p.baseline < 0.0) throw ValidationError("noise and baseline must be nonnegative");
    const auto kernel = calcium_kernel(p.tau_rise, p.tau_decay, p.sample_period);
    std::mt19937_64 rng(p.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const auto N = p.n_samples;
    const double prob = p.rate_hz * p.sample_period;
    GroundTruth truth;
    if (p.spike_indices) {
        truth.event_indices = *p.spike_indices;
        std::sort(truth.event_indices.begin(), truth.event_indices.end());
        for (long s : truth.event_indices)
            if (s < 0 || static_cast<std::size_t>(s) >= N) throw ValidationError("spike index out of range");
    } else {
        for (std::size_t n = 0; n < N; ++n)
            if (uni(rng) < prob) truth.event_indices.push_back(static_cast<long>(n));
    }

    std::vector<double> c(N, 0.0);
    for (long s : truth.event_indices)
        for (std::size_t k = 0; k < kernel.size() && static_cast<std::size_t>(s) + k < N; ++k)
            c[static_cast<std::size_t>(s) + k] += kernel[k];
    if (p.saturation)
        for (auto& v : c) v = v / (1.0 + v);

    std::vector<double> y(N);
    double walk = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        walk += p.baseline * gauss(rng);
        y[n] = p.baseline_level + c[n] + walk;
    }
    for (auto& v : y) v += p.noise_rms * gauss(rng);
    return {TimeSeries(std::move(y), p.sample_period), std::move(truth), {}};
}

std::vector<double> beat_template(int period, double distortion) {
    if (period < 4) throw ValidationError("beat period must be >= 4 samples");
    std::vector<double> b(static_cast<std::size_t>(period), 0.0);
    for (const auto& w : kWaves) {
        const double a = w.amplitude * (1.0 + distortion);
        const double wd = w.width * (1.0 + 2.0 * distortion);
        const double c = w.center + (w.center > 0.5 ? 0.05 * distortion : 0.0);
        for (int i = 0; i < period; ++i) {
            const double t = static_cast<double>(i) / period;
            b[static_cast<std::size_t>(i)] += a * std::exp(-0.5 * ((t - c) / wd) * ((t - c) / wd));
        }
    }
    return b;
}

std::vector<Window> random_beat_windows(std::size_t n_samples, int beat_period, int count, int beats_per_window,
                                        std::uint64_t seed) {
    if (beat_period < 4 || count < 0 || beats_per_window < 1) throw ValidationError("invalid window request");
    const long beats = static_cast<long>(n_samples) / beat_period;  // whole beats only
    // start beats 1 .. beats - bpw - 1 keep a clean beat at both ends
    const long lo = 1, hi = beats - beats_per_window - 1;
    if (count == 0) return {};
    if (hi < lo || (hi - lo + 1) < count * (beats_per_window + 2) - 2)
        throw ValidationError("series too short for " + std::to_string(count) + " anomaly windows");
    std::mt19937_64 rng(seed ^ kWindowStream);
    std::uniform_int_distribution<long> pick(lo, hi);
    for (int attempt = 0; attempt < 100000; ++attempt) {
        std::vector<long> starts;
        while (static_cast<int>(starts.size()) < count) {
            const long s = pick(rng);
            if (std::find(starts.begin(), starts.end(), s) == starts.end()) starts.push_back(s);
        }
        std::sort(starts.begin(), starts.end());
        bool ok = true;
        for (std::size_t i = 1; i < starts.size(); ++i)
            if (starts[i] - starts[i - 1] <= beats_per_window + 1) ok = false;
        if (!ok) continue;
        std::vector<Window> w;
        for (long s : starts) w.push_back({s * beat_period, (s + beats_per_window) * beat_period - 1});
        return w;
    }
    throw ValidationError("could not place anomaly windows");
}

Synthetic gen_periodic_anomaly(const PeriodicParams& p) {
    if (p.n_samples < 2) throw ValidationError("n_samples must be >= 2");
    if (p.noise_rms < 0.0) throw ValidationError("noise must be nonnegative");
    if (p.morph_distortion < 0.0) throw ValidationError("morph distortion must be nonnegative");
    auto windows = p.anomaly_windows;
    std::sort(windows.begin(), windows.end());
    const long N = static_cast<long>(p.n_samples);
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto [a, b] = windows[i];
        if (a < 0 || b >= N || a > b) throw ValidationError("anomaly window out of bounds");
        if (i > 0 && a <= windows[i - 1].second) throw ValidationError("anomaly windows overlap");
    }
    const bool distort = p.morph_distortion > 0.0;
    const auto clean = beat_template(p.beat_period, 0.0);
    const auto odd = beat_template(p.beat_period, p.morph_distortion);

    std::vector<double> y(p.n_samples);
    for (long start = 0; start < N; start += p.beat_period) {
        const bool in_window = distort && std::any_of(windows.begin(), windows.end(), [&](const Window& w) {
                                   return start >= w.first && start <= w.second;
                               });
        const auto& beat = in_window ? odd : clean;
        for (long i = 0; i < p.beat_period && start + i < N; ++i)
            y[static_cast<std::size_t>(start + i)] = beat[static_cast<std::size_t>(i)];
    }
    std::mt19937_64 rng(p.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& v : y) v += p.noise_rms * gauss(rng);

    GroundTruth truth;
    if (distort) {
        truth.event_windows = windows;
        for (const auto& w : windows) truth.event_indices.push_back(w.first);
    }
    return {TimeSeries(std::move(y), p.sample_period), std::move(truth), {}};
}

std::vector<double> hann_pulse(int length) {
    if (length < 1) throw ValidationError("pulse length must be >= 1");
    std::vector<double> w(static_cast<std::size_t>(length));
    for (int k = 0; k < length; ++k)
        w[static_cast<std::size_t>(k)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (k + 1) / (length + 1));
    return w;
}

std::vector<int> random_bits(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    std::vector<int> bits(n);
    for (auto& b : bits) b = coin(rng) ? 1 : 0;
    return bits;
}

Synthetic gen_pulse_train(const PulseTrainParams& p) {
    if (p.bits.empty()) throw ValidationError("need at least one slot");
    if (p.slot_len < 1) throw ValidationError("slot length must be >= 1");
    const auto pulse = p.pulse_shape.empty() ? hann_pulse(12) : p.pulse_shape;
    if (static_cast<long>(pulse.size()) > p.slot_len) throw ValidationError("pulse longer than slot");
    if (p.noise_rms < 0.0 || p.drift_amplitude < 0.0) throw ValidationError("noise and drift must be nonnegative");
    if (p.impulsive_rate < 0.0 || p.impulsive_rate > 1.0) throw ValidationError("impulsive rate must be in [0, 1]");
    for (int b : p.bits)
        if (b != 0 && b != 1) throw ValidationError("bits must be 0 or 1");

    const std::size_t N = p.bits.size() * static_cast<std::size_t>(p.slot_len);
    std::vector<double> y(N, 0.0);
    GroundTruth truth;
    truth.bits = p.bits;
    for (std::size_t s = 0; s < p.bits.size(); ++s) {
        if (!p.bits[s]) continue;
        const std::size_t start = s * static_cast<std::size_t>(p.slot_len);
        truth.event_indices.push_back(static_cast<long>(start));
        for (std::size_t k = 0; k < pulse.size(); ++k) y[start + k] += pulse[k];
    }

    std::mt19937_64 rng(p.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    // integrated random walk, centred and scaled to the requested peak excursion
    std::vector<double> drift(N);
    double vel = 0.0, pos = 0.0;
    for (auto& v : drift) {
        vel += gauss(rng);
        pos += vel;
        v = pos;
    }
    double mean = 0.0;
    for (double v : drift) mean += v;
    mean /= static_cast<double>(N);
    double peak = 0.0;
    for (auto& v : drift) {
        v -= mean;
        peak = std::max(peak, std::abs(v));
    }
    for (std::size_t n = 0; n < N; ++n) {
        const double dv = peak > 0.0 ? drift[n] * p.drift_amplitude / peak : 0.0;
        y[n] += dv + p.noise_rms * gauss(rng);
    }

    Synthetic out{TimeSeries(std::move(y), p.sample_period), std::move(truth), {}};
    if (p.impulsive_rate > 0.0) {
        std::vector<double> v(out.series.values());
        for (std::size_t n = 0; n < N; ++n) {
            if (uni(rng) < p.impulsive_rate) {
                const double sign = uni(rng) < 0.5 ? -1.0 : 1.0;
                v[n] += sign * p.impulsive_scale * p.noise_rms;
                out.outliers.push_back(static_cast<long>(n));
            }
        }
        out.series = out.series.with_values(std::move(v));
    }
    return out;
}

MatchCounts match_events(std::span<const long> peaks_in, std::span<const long> truth_in, long tol) {
    if (tol < 0) throw ValidationError("tolerance must be nonnegative");
    std::vector<long> peaks(peaks_in.begin(), peaks_in.end()), truth(truth_in.begin(), truth_in.end());
    std::sort(peaks.begin(), peaks.end());
    std::sort(truth.begin(), truth.end());
    // sweep in time: a peak left behind by one truth index cannot reach a later one
    MatchCounts m;
    std::size_t i = 0;
    for (long t : truth) {
        while (i < peaks.size() && peaks[i] < t - tol) ++i;
        if (i < peaks.size() && peaks[i] <= t + tol) {
            ++m.matched;
            ++i;
        }
    }
    m.misses = static_cast<long>(truth.size()) - m.matched;
    m.false_positives = static_cast<long>(peaks.size()) - m.matched;
    return m;
}

double error_ratio(std::span<const long> peaks, std::span<const long> truth, long tol) {
    const auto m = match_events(peaks, truth, tol);
    return static_cast<double>(m.misses + m.false_positives) / static_cast<double>(std::max<std::size_t>(1, truth.size()));
}

double error_ratio(std::span<const Event> events, const GroundTruth& truth, long tol) {
    std::vector<long> peaks;
    peaks.reserve(events.size());
    for (const auto& e : events) peaks.push_back(e.peak_index);
    return error_ratio(peaks, truth.event_indices, tol);
}

std::vector<int> decode_bits(std::span<const Event> events, std::size_t n_slots, int slot_len) {
    if (slot_len < 1) throw ValidationError("slot length must be >= 1");
    std::vector<int> bits(n_slots, 0);
    for (const auto& e : events) {
        if (e.peak_index < 0) continue;
        const auto s = static_cast<std::size_t>(e.peak_index / slot_len);
        if (s < n_slots) bits[s] = 1;
    }
    return bits;
}

double bit_error_rate(std::span<const Event> events, const GroundTruth& truth, int slot_len) {
    if (truth.bits.empty()) throw ValidationError("ground truth has no bits");
    const auto dec = decode_bits(events, truth.bits.size(), slot_len);
    long wrong = 0;
    for (std::size_t s = 0; s < dec.size(); ++s) wrong += dec[s] != truth.bits[s];
    return static_cast<double>(wrong) / static_cast<double>(dec.size());
}

void write_synthetic_csv(std::ostream& os, const Synthetic& s) {
    const auto N = s.series.size();
    std::vector<int> flag(N, 0);
    for (long i : s.truth.event_indices)
        if (i >= 0 && static_cast<std::size_t>(i) < N) flag[static_cast<std::size_t>(i)] = 1;
    for (const auto& [a, b] : s.truth.event_windows)
        for (long i = a; i <= b && static_cast<std::size_t>(i) < N; ++i) flag[static_cast<std::size_t>(i)] = 1;
    const auto old = os.precision(17);
    os << "value,truth\n";
    for (std::size_t i = 0; i < N; ++i) os << s.series[i] << ',' << flag[i] << '\n';
    os.precision(old);
}

void write_truth_csv(std::ostream& os, const GroundTruth& t) {
    os << "kind,index,start,end,bit\n";
    for (long i : t.event_indices) os << "event," << i << ",,,\n";
    for (const auto& [a, b] : t.event_windows) os << "window,," << a << ',' << b << ",\n";
    for (std::size_t s = 0; s < t.bits.size(); ++s) os << "slot," << s << ",,," << t.bits[s] << '\n';
}

}  // namespace havok
