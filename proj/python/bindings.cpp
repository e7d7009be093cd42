#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mcmc_certify/bounds.hpp"
#include "mcmc_certify/config.hpp"
#include "mcmc_certify/coupling.hpp"
#include "mcmc_certify/numerics.hpp"
#include "mcmc_certify/report.hpp"
#include "mcmc_certify/runner.hpp"
#include "mcmc_certify/spectral.hpp"

namespace py = pybind11;
using namespace certify;

namespace {

ImhChain imh_by_name(const std::string& density) {
    if (density == "uniform") return ImhChain::uniform();
    if (density == "cosine") return ImhChain::cosine();
    throw InvalidArgument("density must be uniform or cosine; tabulated densities go through run_config");
}

py::dict estimate_dict(const CouplingEstimate& e) {
    py::dict d;
    d["horizon"] = e.horizon;
    d["replicas"] = e.replicas;
    d["p_unequal"] = e.p_unequal;
    d["se_unequal"] = e.se_unequal;
    d["mean_psi"] = e.mean_psi;
    d["se_psi"] = e.se_psi;
    return d;
}

}  // namespace

PYBIND11_MODULE(mcmc_certify, m) {
    m.doc() = "Convergence-rate bounds, coupling simulations and spectral brackets for three MCMC kernels.";
    m.attr("__version__") = MCMC_CERTIFY_VERSION;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

    m.def("normal_cdf", &normal_cdf, py::arg("z"));

    // Bounds
    m.def("doeblin_tv_bound", &doeblin_tv_bound, py::arg("eps"), py::arg("t"));
    m.def("imh_doeblin_epsilon", [](const std::string& d) { return imh_doeblin_epsilon(imh_by_name(d)); },
          py::arg("density"));
    m.def("gaussian_minorization_epsilon", &gaussian_minorization_epsilon, py::arg("p"), py::arg("alpha"),
          py::arg("delta_level"));
    m.def(
        "optimize_rho",
        [](int p, double alpha, double delta_level) {
            const auto cert = gaussian_certificate(GaussianChain(p, alpha), delta_level);
            const auto o = optimize_rho(cert);
            py::dict d;
            d["eps"] = cert.eps;
            d["lambda"] = cert.drift.lambda;
            d["L"] = cert.drift.big_l;
            d["r_star"] = o.r_star;
            d["rho_star"] = o.rho_star;
            d["one_minus_rho"] = o.one_minus_rho;
            return d;
        },
        py::arg("p"), py::arg("alpha"), py::arg("delta_level"));
    m.def(
        "dm_tv_bound",
        [](double mu_h, int p, double alpha, double delta_level, std::int64_t t) {
            return dm_tv_bound(mu_h, gaussian_certificate(GaussianChain(p, alpha), delta_level), t);
        },
        py::arg("mu_h"), py::arg("p"), py::arg("alpha"), py::arg("delta_level"), py::arg("t"));
    m.def(
        "gaussian_w1_bound",
        [](double m0, int p, double alpha, std::int64_t t) { return gaussian_w1_bound(m0, GaussianChain(p, alpha), t); },
        py::arg("mu_mean_norm"), py::arg("p"), py::arg("alpha"), py::arg("t"));
    m.def(
        "gaussian_tv_bound",
        [](double m0, int p, double alpha, std::int64_t t) {
            return gaussian_tv_bound(m0, GaussianChain(p, alpha), t).value;
        },
        py::arg("mu_mean_norm"), py::arg("p"), py::arg("alpha"), py::arg("t"));
    m.def(
        "gaussian_tv_mixing_time",
        [](double m0, int p, double alpha, double eps_tol) {
            return mixing_time(gaussian_tv_geometric(m0, GaussianChain(p, alpha)), eps_tol);
        },
        py::arg("mu_mean_norm"), py::arg("p"), py::arg("alpha"), py::arg("eps_tol"),
        "None when the bound never drops below eps_tol.");

    // Spectral
    py::class_<GridChain>(m, "GridChain")
        .def_static("make", &GridChain::make, py::arg("points"), py::arg("weights"), py::arg("matrix"))
        .def_property_readonly("size", &GridChain::size)
        .def_property_readonly("points", &GridChain::points)
        .def_property_readonly("weights", &GridChain::weights)
        .def_property_readonly("matrix", &GridChain::matrix)
        .def_property_readonly("reversible", &GridChain::reversible);
    m.def("discretize_imh", [](const std::string& d, int n) { return discretize_imh(imh_by_name(d), n); },
          py::arg("density"), py::arg("n"));
    m.def("discretize_gaussian1d", [](double alpha, int n) { return discretize_gaussian1d(GaussianChain(1, alpha), n); },
          py::arg("alpha"), py::arg("n"));
    m.def("discretize_rwmh1d",
          [](double sigma, int n, double half_width) { return discretize_rwmh1d(RwmhChain(1, sigma), n, half_width); },
          py::arg("sigma"), py::arg("n"), py::arg("half_width") = 8.0);
    m.def("operator_norm", &operator_norm, py::arg("grid"));
    m.def("spectral_gap", &spectral_gap, py::arg("grid"));
    m.def(
        "conductance_exact",
        [](const GridChain& g) {
            const auto c = conductance_exact(g);
            return py::make_tuple(c.phi, c.argmin_set);
        },
        py::arg("grid"), "Returns (phi, argmin indicator).");
    m.def(
        "cheeger_bracket",
        [](double phi) {
            const auto b = cheeger_bracket(phi);
            return py::make_tuple(b.lower, b.upper);
        },
        py::arg("phi"));
    m.def("rayleigh_lower", &rayleigh_lower, py::arg("grid"), py::arg("f"));
    m.def("propagate", &propagate, py::arg("grid"), py::arg("mu"), py::arg("t"));
    m.def("l2_distance", &l2_distance, py::arg("grid"), py::arg("mu"));
    m.def("tv_distance", &tv_distance, py::arg("grid"), py::arg("mu"));
    m.def("gaussian_norm_upper_iso", [](double alpha) { return gaussian_norm_upper_iso(GaussianChain(1, alpha)); },
          py::arg("alpha"));
    m.def("gaussian_norm_upper_iso_closed_form", &gaussian_norm_upper_iso_closed_form, py::arg("alpha"));
    m.def("rwmh_norm_lower", [](int p, double sigma) { return rwmh_norm_lower(RwmhChain(p, sigma)); }, py::arg("p"),
          py::arg("sigma"));
    m.def("sigma_star", &sigma_star, py::arg("p"));

    // Coupling
    m.def(
        "simulate_crn",
        [](int p, double alpha, std::vector<double> x0, std::vector<double> y0, int horizon, long replicas,
           std::uint64_t seed, int threads) {
            SimulationOptions opts;
            opts.threads = threads;
            const GaussianChain g(p, alpha);
            py::gil_scoped_release release;
            const auto e = simulate_coupling(CouplingStrategy::crn(), make_kernel(g), fixed_pair(x0, y0), horizon,
                                             replicas, Rng(seed), opts);
            py::gil_scoped_acquire acquire;
            return estimate_dict(e);
        },
        py::arg("p"), py::arg("alpha"), py::arg("x0"), py::arg("y0"), py::arg("horizon"), py::arg("replicas"),
        py::arg("seed") = 0, py::arg("threads") = 1);
    m.def(
        "simulate_crn_one_shot",
        [](int p, double alpha, std::vector<double> x0, int horizon, long replicas, std::uint64_t seed,
           int threads) {
            SimulationOptions opts;
            opts.threads = threads;
            const GaussianChain g(p, alpha);
            py::gil_scoped_release release;
            const auto e =
                simulate_crn_one_shot(g, point_vs_gaussian_stationary(x0), horizon, replicas, Rng(seed), opts);
            py::gil_scoped_acquire acquire;
            return estimate_dict(e);
        },
        py::arg("p"), py::arg("alpha"), py::arg("x0"), py::arg("horizon"), py::arg("replicas"),
        py::arg("seed") = 0, py::arg("threads") = 1, "Start at x0 against a stationary draw.");
    m.def(
        "simulate_doeblin_imh",
        [](const std::string& density, double x0, int horizon, long replicas, std::uint64_t seed, int threads) {
            SimulationOptions opts;
            opts.threads = threads;
            const auto chain = imh_by_name(density);
            py::gil_scoped_release release;
            const auto e = simulate_coupling(CouplingStrategy::doeblin_split(imh_doeblin_minorization(chain)),
                                             make_kernel(chain), point_vs_imh_stationary(x0, chain), horizon,
                                             replicas, Rng(seed), opts);
            py::gil_scoped_acquire acquire;
            return estimate_dict(e);
        },
        py::arg("density"), py::arg("x0"), py::arg("horizon"), py::arg("replicas"), py::arg("seed") = 0,
        py::arg("threads") = 1);

    // Configurations
    m.def("method_names", &method_names);
    m.def(
        "validate_config", [](const std::string& text) { (void)parse_config(text); }, py::arg("text"),
        "Raises ConfigError naming the offending field.");
    m.def(
        "run_config",
        [](const std::string& text, const std::string& out_dir) {
            const auto config = parse_config(text);
            const auto report = run(config);
            if (!out_dir.empty()) emit(report, config.output, out_dir);
            return to_json(report).dump();
        },
        py::arg("text"), py::arg("out_dir") = "",
        "Runs a JSON configuration and returns the report as a JSON string. Writes files when out_dir is set.");
}
