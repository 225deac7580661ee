#include "havok/dynamics.hpp"
#include "havok/embedding.hpp"
#include "havok/errors.hpp"
#include "havok/features.hpp"
#include "havok/threshold.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace havok;

namespace {

Scaling parse_scaling(const std::string& s) {
    if (s == "none") return Scaling::none;
    if (s == "standard") return Scaling::standardize;
    if (s == "unit") return Scaling::unit_variance;
    throw ValidationError("scaling must be 'unit', 'standard' or 'none'");
}

std::vector<TimeSeries> rows_to_series(const Eigen::MatrixXd& rows) {
    std::vector<TimeSeries> out;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        std::vector<double> v(static_cast<std::size_t>(rows.cols()));
        for (Eigen::Index k = 0; k < rows.cols(); ++k) v[static_cast<std::size_t>(k)] = rows(i, k);
        out.emplace_back(std::move(v), 1.0);
    }
    return out;
}

}  // namespace

void bind_core(py::module_& m) {
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def(
        "features",
        [](std::vector<double> y, int halfwidth, bool robust, const std::string& scaling,
           std::optional<std::vector<double>> matched_filter) {
            const TimeSeries ts(std::move(y), 1.0);
            const auto bank = build_feature_bank(ts, halfwidth, robust, matched_filter ? &*matched_filter : nullptr,
                                                 parse_scaling(scaling));
            Eigen::MatrixXd out(static_cast<Eigen::Index>(bank.count()), static_cast<Eigen::Index>(bank.length()));
            for (std::size_t i = 0; i < bank.count(); ++i)
                for (std::size_t k = 0; k < bank.length(); ++k)
                    out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = bank[i][k];
            return out;
        },
        py::arg("y"), py::arg("halfwidth"), py::arg("robust") = false, py::arg("scaling") = "unit",
        py::arg("matched_filter") = py::none(),
        "Rows: raw, convexity, mean_shift, energy_ratio (scaled).");

    m.def(
        "matched_filter",
        [](std::vector<double> y, std::vector<double> w) {
            return matched_filter_refine(TimeSeries(std::move(y), 1.0), w).values();
        },
        py::arg("y"), py::arg("w"));

    m.def(
        "build_hankel",
        [](const Eigen::MatrixXd& rows, int M) {
            auto f = rows_to_series(rows);
            std::vector<std::string> labels;
            for (std::size_t i = 0; i < f.size(); ++i) labels.push_back("f" + std::to_string(i));
            return build_hankel(FeatureBank(std::move(f), std::move(labels), 1), M).entries;
        },
        py::arg("features"), py::arg("M"), "features: (F, N) array; returns the (F*M, N-M+1) Hankel matrix.");

    m.def(
        "decompose",
        [](const Eigen::MatrixXd& H) {
            HankelMatrix h;
            h.entries = H;
            const auto d = decompose(h);
            return py::make_tuple(d.U, d.sigma, d.V);
        },
        py::arg("H"), "Thin SVD with the sign convention; returns (U, sigma, V).");

    m.def(
        "fit_linear_model",
        [](const Eigen::MatrixXd& traj) {
            const auto mdl = fit_linear_model(rows_to_series(traj));
            py::dict out;
            out["A"] = mdl.A;
            out["B"] = mdl.B;
            out["training_mse"] = mdl.training_mse;
            return out;
        },
        py::arg("traj"), "traj: (r, K) array with the forcing mode last.");

    m.def(
        "hilbert_envelope", [](std::vector<double> x) { return hilbert_envelope(std::span<const double>(x)); },
        py::arg("x"));

    m.def(
        "calibrate_threshold",
        [](std::vector<double> d, const std::string& method, std::optional<int> bins) {
            ThresholdOptions opt;
            opt.bins = bins;
            const auto mth = method == "mixture" ? ThresholdMethod::mixture_fit : ThresholdMethod::detachment;
            if (method != "mixture" && method != "detachment")
                throw ValidationError("method must be 'detachment' or 'mixture'");
            const auto t = calibrate(d, mth, opt);
            py::dict out;
            out["d_th"] = t.d_th;
            out["w_G"] = t.w_G;
            out["d0"] = t.d0;
            out["sigma_d"] = t.sigma_d;
            out["lambda"] = t.lambda;
            out["rough"] = t.rough;
            out["detachment"] = t.detachment;
            out["no_anomaly"] = t.no_anomaly;
            out["fallback"] = t.fit_fallback;
            return out;
        },
        py::arg("d"), py::arg("method") = "detachment", py::arg("bins") = py::none());
}
