#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "priorlens/client.hpp"
#include "priorlens/errors.hpp"
#include "priorlens/fit.hpp"
#include "priorlens/parse.hpp"
#include "priorlens/prior.hpp"
#include "priorlens/scenario.hpp"
#include "priorlens/store.hpp"
#include "priorlens/version.hpp"

namespace py = pybind11;
using namespace priorlens;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Posterior-median prediction functions and implicit-prior recovery";
    m.attr("__version__") = kToolVersion;

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<UnsupportedFamilyError>(m, "UnsupportedFamilyError",
                                                   PyExc_ValueError);
    py::register_exception<DegeneratePosteriorError>(m, "DegeneratePosteriorError",
                                                     PyExc_ArithmeticError);
    py::register_exception<InsufficientDataError>(m, "InsufficientDataError",
                                                  PyExc_ValueError);
    py::register_exception<RangeError>(m, "RangeError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<EmptyDataError>(m, "EmptyDataError", PyExc_ValueError);
    py::register_exception<AuthError>(m, "AuthError", PyExc_RuntimeError);

    py::class_<PowerLaw>(m, "PowerLaw")
        .def(py::init<double>(), py::arg("gamma"))
        .def_readwrite("gamma", &PowerLaw::gamma)
        .def("__repr__", [](const PowerLaw& p) {
            return "PowerLaw(gamma=" + std::to_string(p.gamma) + ")";
        });
    py::class_<Erlang>(m, "Erlang")
        .def(py::init<double>(), py::arg("beta"))
        .def_readwrite("beta", &Erlang::beta)
        .def("__repr__", [](const Erlang& p) {
            return "Erlang(beta=" + std::to_string(p.beta) + ")";
        });
    py::class_<Gaussian>(m, "Gaussian")
        .def(py::init<double, double>(), py::arg("mu"), py::arg("sigma"))
        .def_readwrite("mu", &Gaussian::mu)
        .def_readwrite("sigma", &Gaussian::sigma)
        .def("__repr__", [](const Gaussian& p) {
            return "Gaussian(mu=" + std::to_string(p.mu) +
                   ", sigma=" + std::to_string(p.sigma) + ")";
        });
    py::class_<Tabulated>(m, "Tabulated")
        .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("support"),
             py::arg("density"))
        .def_readwrite("support", &Tabulated::support)
        .def_readwrite("density", &Tabulated::density);

    py::class_<QuadratureConfig>(m, "QuadratureConfig")
        .def(py::init<>())
        .def(py::init([](std::size_t n, double eps) {
                 return QuadratureConfig{n, eps};
             }),
             py::arg("grid_points") = QuadratureConfig{}.grid_points,
             py::arg("tail_mass_epsilon") = QuadratureConfig{}.tail_mass_epsilon)
        .def_readwrite("grid_points", &QuadratureConfig::grid_points)
        .def_readwrite("tail_mass_epsilon", &QuadratureConfig::tail_mass_epsilon);

    py::class_<PredictionPair>(m, "PredictionPair")
        .def(py::init<double, double>(), py::arg("t"), py::arg("t_star"))
        .def_readwrite("t", &PredictionPair::t)
        .def_readwrite("t_star", &PredictionPair::t_star)
        .def("__repr__", [](const PredictionPair& p) {
            return "PredictionPair(t=" + std::to_string(p.t) +
                   ", t_star=" + std::to_string(p.t_star) + ")";
        });

    py::enum_<Family>(m, "Family")
        .value("power_law", Family::power_law)
        .value("erlang", Family::erlang)
        .value("gaussian", Family::gaussian);

    py::enum_<Aggregation>(m, "Aggregation")
        .value("median", Aggregation::median)
        .value("mean", Aggregation::mean)
        .value("none", Aggregation::none);

    py::class_<FitOptions>(m, "FitOptions")
        .def(py::init<>())
        .def_readwrite("mu_quantiles", &FitOptions::mu_quantiles)
        .def_readwrite("sigma_factors", &FitOptions::sigma_factors)
        .def_readwrite("simplex_tolerance", &FitOptions::simplex_tolerance)
        .def_readwrite("max_evaluations", &FitOptions::max_evaluations)
        .def_readwrite("replicate_aggregation", &FitOptions::replicate_aggregation)
        .def_readwrite("objective_grid_points", &FitOptions::objective_grid_points)
        .def_readwrite("parallel_starts", &FitOptions::parallel_starts);

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("family", &FitResult::family)
        .def_readonly("params", &FitResult::params)
        .def_readonly("mse", &FitResult::mse)
        .def_readonly("n", &FitResult::n)
        .def_readonly("boundary_flag", &FitResult::boundary_flag)
        .def("__repr__", [](const FitResult& r) {
            return "FitResult(family=" + std::string(family_name(r.family)) +
                   ", mse=" + std::to_string(r.mse) + ")";
        });

    py::class_<ScenarioDef>(m, "ScenarioDef")
        .def(py::init<>())
        .def_readwrite("id", &ScenarioDef::id)
        .def_readwrite("prompt_template", &ScenarioDef::prompt_template)
        .def_readwrite("t_min", &ScenarioDef::t_min)
        .def_readwrite("t_max", &ScenarioDef::t_max)
        .def_readwrite("t_step", &ScenarioDef::t_step)
        .def_readwrite("answer_marker", &ScenarioDef::answer_marker)
        .def_readwrite("units", &ScenarioDef::units)
        .def_readwrite("non_canonical", &ScenarioDef::non_canonical);

    m.def("prior_density", &prior_density, py::arg("prior"), py::arg("x"));
    m.def("posterior_median_analytic", &posterior_median_analytic, py::arg("prior"),
          py::arg("t"));
    m.def("posterior_median_numeric", &posterior_median_numeric, py::arg("prior"),
          py::arg("t"), py::arg("cfg") = QuadratureConfig{});
    m.def("posterior_median", &posterior_median, py::arg("prior"), py::arg("t"),
          py::arg("cfg") = QuadratureConfig{});
    m.def(
        "prediction_curve",
        [](const PriorSpec& prior, const std::vector<double>& ts, const QuadratureConfig& cfg) {
            return prediction_curve(prior, ts, cfg);
        },
        py::arg("prior"), py::arg("t_values"), py::arg("cfg") = QuadratureConfig{});
    m.def(
        "mse",
        [](const std::vector<PredictionPair>& pairs, const PriorSpec& prior,
           const QuadratureConfig& cfg) { return mse(pairs, prior, cfg); },
        py::arg("pairs"), py::arg("prior"), py::arg("cfg") = QuadratureConfig{});
    m.def(
        "fit_power_law",
        [](const std::vector<PredictionPair>& pairs) { return fit_power_law(pairs); },
        py::arg("pairs"));
    m.def(
        "fit_erlang",
        [](const std::vector<PredictionPair>& pairs) { return fit_erlang(pairs); },
        py::arg("pairs"));
    m.def(
        "fit_gaussian",
        [](const std::vector<PredictionPair>& pairs, const FitOptions& opts,
           const QuadratureConfig& cfg) { return fit_gaussian(pairs, opts, cfg); },
        py::arg("pairs"), py::arg("opts") = FitOptions{}, py::arg("cfg") = QuadratureConfig{});
    m.def(
        "select_model",
        [](const std::vector<PredictionPair>& pairs, const FitOptions& opts,
           const QuadratureConfig& cfg) { return select_model(pairs, opts, cfg); },
        py::arg("pairs"), py::arg("opts") = FitOptions{}, py::arg("cfg") = QuadratureConfig{});

    m.def("builtin_scenarios", &builtin_scenarios);
    m.def("render_prompt", &render_prompt, py::arg("scenario"), py::arg("t"));
    m.def(
        "parse_response",
        [](const std::string& raw, const std::string& marker) -> py::object {
            const auto v = parse_response(raw, marker);
            return v ? py::cast(*v) : py::none();
        },
        py::arg("raw"), py::arg("marker"));

    m.def(
        "read_pairs",
        [](const std::filesystem::path& file, Aggregation rule) {
            return read_pairs(file, rule);
        },
        py::arg("file"), py::arg("aggregation") = Aggregation::median);
    m.def(
        "write_fit",
        [](const std::vector<FitResult>& results, const std::filesystem::path& file) {
            write_fit(results, file);
        },
        py::arg("results"), py::arg("file"));
}
