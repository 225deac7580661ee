#include <pybind11/pybind11.h>

namespace py = pybind11;

void bind_core(py::module_& m);
void bind_pipeline(py::module_& m);
void bind_synth(py::module_& m);

PYBIND11_MODULE(_havok, m) {
    m.doc() = "Native core of havok_detect";
    bind_core(m);
    bind_pipeline(m);
    bind_synth(m);
}
