#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <string>
#include <vector>

#include "expheat/harness.hpp"
#include "expheat/orlicz.hpp"

namespace py = pybind11;
using namespace expheat;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Field field_from_array(const Array& a, double L) {
    const int n = static_cast<int>(a.ndim());
    if (n < 1 || n > 3) throw std::invalid_argument("field must have 1 to 3 axes");
    const int N = static_cast<int>(a.shape(0));
    for (int d = 1; d < n; ++d)
        if (a.shape(d) != N) throw std::invalid_argument("field must have equal axes");
    const GridSpec grid = make_grid(n, N, L);
    return Field(grid, std::vector<double>(a.data(), a.data() + a.size()));
}

Array array_from_field(const Field& f) {
    const GridSpec& g = f.grid();
    std::vector<py::ssize_t> shape(g.dimension, g.points_per_axis);
    Array out(shape);
    std::copy(f.values().begin(), f.values().end(), out.mutable_data());
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Pseudospectral solver for heat equations with exponential nonlinearity";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.attr("EXIT_OK") = kExitOk;
    m.attr("EXIT_UNPARSEABLE") = kExitUnparseable;
    m.attr("EXIT_INVARIANT") = kExitInvariant;
    m.attr("EXIT_MISSING_ARTIFACT") = kExitMissingArtifact;
    m.attr("EXIT_BLOWUP") = kExitBlowup;

    m.def(
        "luxemburg_norm", [](const Array& a, double L, double r) { return luxemburg_norm(field_from_array(a, L), OrliczParams{r}); },
        py::arg("field"), py::arg("L"), py::arg("r") = 2.0, "exp L^r Luxemburg norm of periodic samples on [-L, L)^n");
    m.def(
        "lp_norm", [](const Array& a, double L, double q) { return lp_norm(field_from_array(a, L), q); }, py::arg("field"),
        py::arg("L"), py::arg("q"));
    m.def(
        "generate",
        [](const std::string& config_json) {
            const ExperimentConfig cfg = parse_config(config_json, "<python>");
            const GeneratedData gen = generate_with_info(cfg.data, build_grid(cfg));
            return py::make_tuple(array_from_field(gen.field), gen.sample_capped);
        },
        py::arg("config_json"), "Initial data of a config as (array, sample_capped)");
    m.def(
        "solve",
        [](const std::string& config_json) {
            const ExperimentConfig cfg = parse_config(config_json, "<python>");
            SolverConfig scfg = cfg.solver;
            scfg.norm_qs = cfg.analysis.q_list;
            Trajectory traj;
            {
                py::gil_scoped_release release;
                traj = integrate(build_problem(cfg), build_time_grid(cfg), scfg);
            }
            py::dict out;
            out["times"] = traj.times;
            out["qs"] = traj.norm_qs;
            out["norms"] = traj.lq_norms;
            out["mass"] = traj.mass_series;
            out["orlicz"] = traj.orlicz_norms;
            out["blowup_time"] = traj.blowup_time ? py::cast(*traj.blowup_time) : py::none();
            return out;
        },
        py::arg("config_json"), "Run a config and return times, norms, mass and blowup time");
    m.def(
        "fit_power_law",
        [](const std::vector<double>& t, const std::vector<double>& y) {
            const PowerLawFit fit = fit_power_law(t, y);
            return py::make_tuple(fit.slope, fit.intercept, fit.r_squared);
        },
        py::arg("t"), py::arg("y"), "Least-squares slope, intercept and R^2 of log y against log t");
    m.def(
        "exponent_selector", [](double p, int n, double theta, double r) { return exponent_selector(p, n, theta, r).p_star; },
        py::arg("p"), py::arg("n"), py::arg("theta"), py::arg("r"));
    m.def("theoretical_exponent", &theoretical_exponent, py::arg("n"), py::arg("theta"), py::arg("p_star"),
          py::arg("q"));
    m.def(
        "series_majorant",
        [](double M, double p, double r, double theta, int n) {
            NonlinearitySpec s;
            s.r = r;
            s.theta = theta;
            s.dimension = n;
            const SeriesMajorant sm = series_majorant(M, p, s);
            return py::make_tuple(sm.value, sm.terms, sm.converged);
        },
        py::arg("M"), py::arg("p"), py::arg("r") = 2.0, py::arg("theta") = 2.0, py::arg("n") = 1);
    m.def(
        "main",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "expheat");
            std::vector<char*> argv;
            for (auto& a : args) argv.push_back(a.data());
            py::gil_scoped_release release;
            return run_cli(static_cast<int>(argv.size()), argv.data());
        },
        py::arg("args"), "Run the command line with the given arguments; returns the exit code");
}
