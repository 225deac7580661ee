#include "havok/bench.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace havok;

void bind_synth(py::module_& m) {
    m.def(
        "gen_calcium",
        [](std::size_t n, double sample_period, double rate_hz, double noise_rms, double baseline,
           double baseline_level, std::uint64_t seed) {
            CalciumParams p;
            p.n_samples = n;
            p.sample_period = sample_period;
            p.rate_hz = rate_hz;
            p.noise_rms = noise_rms;
            p.baseline = baseline;
            p.baseline_level = baseline_level;
            p.seed = seed;
            auto s = gen_calcium(p);
            return py::make_tuple(s.series.values(), s.truth.event_indices);
        },
        py::arg("n") = 14400, py::arg("sample_period") = 1.0 / 60.0, py::arg("rate_hz") = 0.21,
        py::arg("noise_rms") = 0.1, py::arg("baseline") = 0.003, py::arg("baseline_level") = 5.0,
        py::arg("seed") = 0, "Returns (samples, spike indices).");

    m.def(
        "gen_periodic_anomaly",
        [](std::size_t n, int beat_period, int windows, double distortion, double noise_rms, std::uint64_t seed) {
            PeriodicParams base;
            base.n_samples = n;
            base.beat_period = beat_period;
            base.morph_distortion = distortion;
            base.noise_rms = noise_rms;
            auto s = gen_periodic_anomaly(ecg_trial_params(seed, windows, base));
            return py::make_tuple(s.series.values(), s.truth.event_windows);
        },
        py::arg("n") = 2160, py::arg("beat_period") = 90, py::arg("windows") = 3, py::arg("distortion") = 1.0,
        py::arg("noise_rms") = 0.05, py::arg("seed") = 0, "Returns (samples, [(start, end), ...]).");

    m.def(
        "gen_pulse_train",
        [](std::size_t slots, int slot_len, double drift, double noise_rms, double impulsive_rate, std::uint64_t seed) {
            PulseTrainParams base;
            base.slot_len = slot_len;
            base.drift_amplitude = drift;
            base.noise_rms = noise_rms;
            base.impulsive_rate = impulsive_rate;
            auto s = gen_pulse_train(mud_trial_params(seed, slots, base));
            return py::make_tuple(s.series.values(), s.truth.bits);
        },
        py::arg("slots") = 200, py::arg("slot_len") = 40, py::arg("drift") = 1.0, py::arg("noise_rms") = 0.3,
        py::arg("impulsive_rate") = 0.002, py::arg("seed") = 0, "Returns (samples, bits).");

    m.def("hann_pulse", &hann_pulse, py::arg("length"));

    m.def(
        "error_ratio",
        [](std::vector<long> peaks, std::vector<long> truth, long tol) { return error_ratio(peaks, truth, tol); },
        py::arg("peaks"), py::arg("truth"), py::arg("tol"));

    m.def(
        "bit_error_rate",
        [](std::vector<long> peaks, std::vector<int> bits, int slot_len) {
            std::vector<Event> ev;
            for (long p : peaks) ev.push_back({p, p, p, 0.0, EventKind::point});
            GroundTruth t;
            t.bits = std::move(bits);
            return bit_error_rate(ev, t, slot_len);
        },
        py::arg("peaks"), py::arg("bits"), py::arg("slot_len"));
}
