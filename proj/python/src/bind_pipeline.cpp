#include "havok/detector.hpp"
#include "havok/errors.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace havok;

void bind_pipeline(py::module_& m) {
    m.def(
        "detect_json",
        [](std::vector<double> y, double sample_period, std::optional<int> halfwidth, std::optional<int> M,
           std::optional<int> r, std::optional<double> min_interval, bool robust, bool two_sided, bool hilbert,
           std::optional<std::vector<double>> matched_filter, std::optional<int> bins, const std::string& method,
           std::optional<int> min_separation, std::optional<int> detrend, bool traces) {
            PipelineConfig c;
            c.sector_halfwidth = halfwidth;
            c.memory_M = M;
            c.order_r = r;
            c.min_stimulus_interval = min_interval;
            c.robust_median = robust;
            c.two_sided = two_sided;
            c.use_hilbert = hilbert;
            c.matched_filter = std::move(matched_filter);
            c.histogram_bins = bins;
            if (method != "detachment" && method != "mixture")
                throw ValidationError("method must be 'detachment' or 'mixture'");
            c.threshold_method = method == "mixture" ? ThresholdMethod::mixture_fit : ThresholdMethod::detachment;
            c.min_event_separation = min_separation;
            c.detrend_window = detrend;
            const TimeSeries ts(std::move(y), sample_period);
            std::string out;
            {
                py::gil_scoped_release nogil;
                out = report_to_json(run_pipeline(ts, c), traces, -1);
            }
            return out;
        },
        py::arg("y"), py::arg("sample_period") = 1.0, py::arg("halfwidth") = py::none(), py::arg("M") = py::none(),
        py::arg("r") = py::none(), py::arg("min_interval") = py::none(), py::arg("robust") = false,
        py::arg("two_sided") = false, py::arg("hilbert") = false, py::arg("matched_filter") = py::none(),
        py::arg("bins") = py::none(), py::arg("method") = "detachment", py::arg("min_separation") = py::none(),
        py::arg("detrend") = py::none(), py::arg("traces") = false);

    m.def(
        "extract_events",
        [](std::vector<double> d, double d_th, int min_separation, bool two_sided, double d0) {
            py::list out;
            for (const auto& e : extract_events(d, d_th, min_separation, two_sided, d0)) {
                py::dict ev;
                ev["onset_index"] = e.onset_index;
                ev["peak_index"] = e.peak_index;
                ev["end_index"] = e.end_index;
                ev["peak_value"] = e.peak_value;
                ev["kind"] = e.kind == EventKind::point ? "point" : "interval";
                out.append(ev);
            }
            return out;
        },
        py::arg("d"), py::arg("d_th"), py::arg("min_separation") = 0, py::arg("two_sided") = false,
        py::arg("d0") = 0.0);

    m.def("select_sector_halfwidth", &select_sector_halfwidth, py::arg("min_stimulus_interval"),
          py::arg("sample_period"));
}
