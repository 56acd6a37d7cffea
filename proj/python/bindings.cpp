#include "amsampler/experiment/runner.hpp"
#include "amsampler/experiment/verify.hpp"
#include "amsampler/metrics.hpp"
#include "amsampler/samplers.hpp"
#include "amsampler/sde_checks.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace amsampler;

namespace {

Eigen::MatrixXd stack(const std::vector<Point>& points, Eigen::Index dim) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(points.size()), dim);
    for (std::size_t i = 0; i < points.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
    return out;
}

py::dict trajectory_dict(const Trajectory& t) {
    py::dict d;
    const Eigen::Index dim = t.start.size();
    d["t"] = t.timesteps;
    d["x"] = stack(t.xs, dim);
    d["x0_hat"] = stack(t.x0_hats, dim);
    d["increment"] = stack(t.increments, dim);
    return d;
}

py::object to_py(const nlohmann::ordered_json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

}  // namespace

PYBIND11_MODULE(_amsampler, m) {
    m.doc() = "Reverse-diffusion samplers with an analytic Gaussian-mixture denoiser";

    py::class_<NoiseSchedule>(m, "NoiseSchedule")
        .def(py::init<std::vector<double>, double>(), py::arg("betas"), py::arg("alpha_zero") = 1.0)
        .def_property_readonly("steps", &NoiseSchedule::steps)
        .def("beta", &NoiseSchedule::beta)
        .def("alpha", &NoiseSchedule::alpha)
        .def_property_readonly("betas", [](const NoiseSchedule& s) { return std::vector<double>(s.betas().begin(), s.betas().end()); })
        .def_property_readonly("alphas_cum", [](const NoiseSchedule& s) {
            return std::vector<double>(s.alphas_cum().begin(), s.alphas_cum().end());
        });

    m.def("linear_beta_schedule", &linear_beta_schedule, py::arg("T"), py::arg("beta_start"), py::arg("beta_end"),
          py::arg("alpha_zero") = 1.0);

    py::class_<StepGrid>(m, "StepGrid")
        .def_property_readonly("steps", &StepGrid::steps)
        .def("alpha", &StepGrid::alpha)
        .def("timestep", &StepGrid::timestep)
        .def_static("single", &StepGrid::single);

    m.def("full_grid", &full_grid);
    m.def(
        "respace",
        [](const NoiseSchedule& s, int K, const std::string& mode) {
            const RespacedSchedule r = respace(s, K, parse_respace_mode(mode));
            return py::make_tuple(std::vector<int>(r.tau().begin(), r.tau().end()), r.grid());
        },
        py::arg("schedule"), py::arg("K"), py::arg("mode") = "uniform",
        "Returns (tau, grid).");

    py::class_<GaussianMixture>(m, "GaussianMixture")
        .def(py::init<std::vector<double>, std::vector<Point>, std::vector<Point>>(), py::arg("weights"),
             py::arg("means"), py::arg("variances"))
        .def_static("points_1d", &GaussianMixture::points_1d)
        .def_property_readonly("dim", &GaussianMixture::dim)
        .def(
            "predict",
            [](const GaussianMixture& g, const Point& x, double alpha) {
                const NoisePrediction p = g.predict(x, alpha);
                return py::make_tuple(p.eps_hat, p.x0_hat);
            },
            py::arg("x"), py::arg("alpha"), "Returns (eps_hat, x0_hat).")
        .def("score", &GaussianMixture::score)
        .def("log_density", &GaussianMixture::log_density);

    m.def("sigma", &sigma_from_alphas, py::arg("alpha_t"), py::arg("alpha_prev"), py::arg("eta_mode"));
    m.def("ddim_step", &ddim_step);
    m.def("increment", &increment);

    py::enum_<EtaMode>(m, "EtaMode")
        .value("deterministic", EtaMode::deterministic)
        .value("ddpm_unit", EtaMode::ddpm_unit)
        .value("ddpm_hat", EtaMode::ddpm_hat);
    py::enum_<SamplerKind>(m, "SamplerKind").value("vanilla", SamplerKind::vanilla).value("adaptive", SamplerKind::adaptive);
    py::enum_<CoefficientRule>(m, "CoefficientRule")
        .value("spherical", CoefficientRule::spherical)
        .value("affine", CoefficientRule::affine);
    py::enum_<BSchedule>(m, "BSchedule").value("constant", BSchedule::constant).value("linear_ramp", BSchedule::linear_ramp);
    py::enum_<VNorm>(m, "VNorm").value("raw_l2sq", VNorm::raw_l2sq).value("mean_sq", VNorm::mean_sq);

    py::class_<SamplerConfig>(m, "SamplerConfig")
        .def(py::init<>())
        .def_readwrite("kind", &SamplerConfig::kind)
        .def_readwrite("eta", &SamplerConfig::eta)
        .def_readwrite("b", &SamplerConfig::b)
        .def_readwrite("b_schedule", &SamplerConfig::b_schedule)
        .def_readwrite("a_rule", &SamplerConfig::a_rule)
        .def_readwrite("c", &SamplerConfig::c)
        .def_readwrite("zeta", &SamplerConfig::zeta)
        .def_readwrite("v_norm", &SamplerConfig::v_norm)
        .def_readwrite("record_trajectory", &SamplerConfig::record_trajectory);
    m.def("degenerate_adaptive", &degenerate_adaptive);

    m.def(
        "run_chain",
        [](const GaussianMixture& g, const StepGrid& grid, const SamplerConfig& c, const Point& x_T, std::uint64_t seed) {
            Rng rng(seed);
            const ChainResult r = run_chain(g, grid, c, x_T, rng);
            return py::make_tuple(r.x0, c.record_trajectory ? py::object(trajectory_dict(r.trajectory)) : py::none());
        },
        py::arg("model"), py::arg("grid"), py::arg("config"), py::arg("x_T"), py::arg("seed") = 0);

    m.def(
        "run_chains",
        [](const GaussianMixture& g, const StepGrid& grid, const SamplerConfig& c, std::size_t n, std::uint64_t seed,
           unsigned threads) {
            BatchResult r;
            {
                py::gil_scoped_release release;
                r = run_chains(g, grid, c, n, seed, threads);
            }
            return stack(r.samples, g.dim());
        },
        py::arg("model"), py::arg("grid"), py::arg("config"), py::arg("n_chains"), py::arg("seed") = 0,
        py::arg("threads") = 1, "Final samples as an (n_chains, D) array.");

    m.def("wasserstein1", [](const std::vector<double>& a, const std::vector<double>& b) { return wasserstein1_1d(a, b); });
    m.def(
        "wasserstein1_to_model",
        [](const std::vector<double>& s, const GaussianMixture& g, double alpha) { return wasserstein1_1d(s, g, alpha); },
        py::arg("samples"), py::arg("model"), py::arg("alpha") = 1.0);

    m.def(
        "midpoint_equivalence",
        [](double lambda, const std::vector<double>& noise, const ScalarDrift& drift, double x_start) {
            return midpoint_equivalence(lambda, static_cast<int>(noise.size()), drift, noise, x_start).max_deviation;
        },
        py::arg("lam"), py::arg("noise"), py::arg("drift"), py::arg("x_start") = 0.0);

    m.def(
        "verify",
        [](bool corrupt) {
            experiment::VerifyOptions o;
            o.corrupt_a_rule = corrupt;
            return to_py(experiment::run_verify(o).to_json());
        },
        py::arg("corrupt_a_rule") = false, "Consistency report as a dict.");

    m.def(
        "run_spec",
        [](const std::string& path, std::optional<std::string> out_dir, std::optional<std::size_t> chains) {
            experiment::RunSpec spec = experiment::load_run_spec(path);
            experiment::RunOverrides o;
            o.out_dir = out_dir;
            o.chains = chains;
            apply_overrides(spec, o);
            const experiment::RunOutcome out = experiment::run(spec);
            py::dict metrics;
            for (const auto& s : out.samplers) metrics[py::str(s.name)] = to_py(experiment::to_json(s.metrics));
            return metrics;
        },
        py::arg("path"), py::arg("out_dir") = py::none(), py::arg("chains") = py::none(),
        "Runs a spec file, writes its outputs and returns per-sampler metrics.");

    py::register_exception<experiment::SpecError>(m, "SpecError", PyExc_ValueError);
}
