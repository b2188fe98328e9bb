#include <pybind11/pybind11.h>
PYBIND11_MODULE(_vtlsim, m) { m.doc() = "placeholder"; }
