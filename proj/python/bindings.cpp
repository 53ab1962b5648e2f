#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "semiclass/config.hpp"
#include "semiclass/errors.hpp"
#include "semiclass/experiments.hpp"
#include "semiclass/parallel.hpp"
#include "semiclass/quantization.hpp"
#include "semiclass/states.hpp"

namespace py = pybind11;
using namespace semiclass;

namespace {

py::dict report_dict(const SweepReport& r) {
    py::list rows;
    for (const auto& row : r.rows) {
        py::dict d;
        d["command"] = row.command;
        d["h"] = row.h;
        d["tau"] = row.tau;
        d["metric"] = row.metric;
        d["value"] = row.value;
        rows.append(d);
    }
    py::dict out;
    out["command"] = r.command;
    out["rows"] = rows;
    out["meta"] = r.meta.dump();
    out["csv"] = r.csv();
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Semiclassical Schroedinger dynamics on flat tori";

    static py::exception<Error> base(m, "SemiclassError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    py::register_exception<EmptyCluster>(m, "EmptyCluster", base.ptr());
    py::register_exception<PreconditionFailed>(m, "PreconditionFailed", base.ptr());
    py::register_exception<TruncationError>(m, "TruncationError", base.ptr());

    m.def("parse_scale", &parse_scale, py::arg("text"));
    m.def("config_hash", &config_hash, py::arg("text"));
    m.def("command_names", &command_names);
    m.def("set_thread_count", &set_thread_count, py::arg("n"));

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_readwrite("command", &ExperimentConfig::command)
        .def_readwrite("h_list", &ExperimentConfig::h_list)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("threads", &ExperimentConfig::threads)
        .def_readwrite("resolution", &ExperimentConfig::resolution)
        .def_readonly("source", &ExperimentConfig::source);
    m.def("parse_config", &parse_config, py::arg("text"));
    m.def("load_config", &load_config, py::arg("path"));

    m.def(
        "run",
        [](const ExperimentConfig& c, const std::string& command) {
            SweepReport r;
            {
                py::gil_scoped_release release;
                r = run_command(c, command);
            }
            return report_dict(r);
        },
        py::arg("config"), py::arg("command") = "",
        "Runs one sweep; returns {command, rows, meta (JSON text), csv}.");
    m.def(
        "run_to_dir",
        [](const ExperimentConfig& c, const std::string& dir) {
            py::gil_scoped_release release;
            write_report(run_command(c), dir);
        },
        py::arg("config"), py::arg("out"));

    py::class_<HamiltonianModel>(m, "HamiltonianModel")
        .def_static("quadratic", [](const Eigen::MatrixXd& a) { return HamiltonianModel::quadratic(a); })
        .def_static("power", &HamiltonianModel::power, py::arg("alpha"), py::arg("dim"))
        .def_static("saddle2d", &HamiltonianModel::saddle2d)
        .def_property_readonly("dim", &HamiltonianModel::dim)
        .def("value", &HamiltonianModel::value, py::arg("xi"));

    m.def(
        "minimal_spacing",
        [](const HamiltonianModel& model, double h, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
            const auto s = minimal_spacing(model, h, lo, hi);
            return py::make_tuple(s.tau_h, s.min_gap, s.distinct);
        },
        py::arg("model"), py::arg("h"), py::arg("lo"), py::arg("hi"), "Returns (tau_H, min_gap, distinct).");

    py::class_<FourierState>(m, "FourierState")
        .def_property_readonly("h", &FourierState::h)
        .def_property_readonly("dim", &FourierState::dim)
        .def_property_readonly("modes",
                               [](const FourierState& u) {
                                   std::vector<IVec> k;
                                   for (long long i = 0; i < u.grid().size(); ++i) k.push_back(u.grid().mode(i));
                                   return k;
                               })
        .def_property_readonly("coeffs", [](const FourierState& u) { return u.coeffs(); })
        .def("norm", &FourierState::norm);

    m.def(
        "coherent_state",
        [](const Eigen::VectorXd& x0, const Eigen::VectorXd& xi0, double eps, double h) {
            CoherentParams p;
            p.x0 = x0;
            p.xi0 = xi0;
            p.eps = eps;
            return coherent_state(p, h);
        },
        py::arg("x0"), py::arg("xi0"), py::arg("eps"), py::arg("h"));
    m.def("free_propagate", &free_propagate, py::arg("u"), py::arg("t"), py::arg("model"));
    m.def("position_density", &position_density, py::arg("u"), py::arg("resolution"));
}
