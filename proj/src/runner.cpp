#include "mcmc_certify/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>

#include "mcmc_certify/bounds.hpp"
#include "mcmc_certify/coupling.hpp"
#include "mcmc_certify/spectral.hpp"

#ifndef MCMC_CERTIFY_VERSION
#define MCMC_CERTIFY_VERSION "unknown"
#endif

namespace certify {

namespace {

enum class Kind { Number, Integer, Boolean, String, NumberArray, NumberOrArray };

struct Param {
    const char* name;
    Kind kind;
    bool required;
};

class Params {
public:
    Params(const Json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {}

    bool has(const char* key) const { return j_.contains(key); }
    std::string field(const char* key) const { return prefix_ + "." + key; }

    double number(const char* key) const {
        if (!has(key)) throw ConfigError(field(key), "missing required key");
        return j_.at(key).get<double>();
    }
    double number_or(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }
    long long integer(const char* key) const {
        if (!has(key)) throw ConfigError(field(key), "missing required key");
        return j_.at(key).get<long long>();
    }
    std::string string_or(const char* key, const std::string& fallback) const {
        return has(key) ? j_.at(key).get<std::string>() : fallback;
    }
    bool boolean_or(const char* key, bool fallback) const {
        return has(key) ? j_.at(key).get<bool>() : fallback;
    }
    /// A number expands to a constant vector of length p.
    State state(const char* key, int p) const {
        const Json& v = j_.at(key);
        if (v.is_number()) return State(static_cast<std::size_t>(p), v.get<double>());
        State s = v.get<std::vector<double>>();
        if (static_cast<int>(s.size()) != p) {
            throw ConfigError(field(key), "expected " + std::to_string(p) + " coordinates");
        }
        return s;
    }

private:
    const Json& j_;
    std::string prefix_;
};

struct Context {
    const RunConfig& config;
    const KernelSpec& kernel;
    std::size_t index;

    const GaussianChain& gaussian() const { return std::get<GaussianChain>(kernel.params); }
    const ImhChain& imh() const { return std::get<ImhChain>(kernel.params); }
    const RwmhChain& rwmh() const { return std::get<RwmhChain>(kernel.params); }
    Rng rng() const { return Rng(config.mc.seed, index); }
};

using Check = std::function<void(const Params&, const ChainConfig&)>;
using Runner = std::function<void(const Context&, const Params&, AnalysisResult&)>;

struct Method {
    const char* name;
    std::vector<Family> families;
    std::vector<Param> params;
    Check check;
    Runner run;
};

// --- shared checks ----------------------------------------------------------

void check_range(const Params& p, const char* key, double lo, double hi, bool open_lo, bool open_hi) {
    if (!p.has(key)) return;
    const double v = p.number(key);
    const bool ok = (open_lo ? v > lo : v >= lo) && (open_hi ? v < hi : v <= hi) && std::isfinite(v);
    if (!ok) {
        throw ConfigError(p.field(key), std::string("must lie in ") + (open_lo ? "(" : "[") +
                                            std::to_string(lo) + ", " + std::to_string(hi) +
                                            (open_hi ? ")" : "]"));
    }
}

void check_t_max(const Params& p) {
    if (p.has("t_max") && (p.integer("t_max") < 0 || p.integer("t_max") > 100000000)) {
        throw ConfigError(p.field("t_max"), "must lie in [0, 1e8]");
    }
}

void check_state(const Params& p, const char* key, const ChainConfig& chain) {
    if (!p.has(key)) return;
    const State s = p.state(key, chain.p);
    for (double v : s) {
        if (!std::isfinite(v)) throw ConfigError(p.field(key), "coordinates must be finite");
        if (chain.family == Family::Imh && !(v >= 0.0 && v <= 1.0)) {
            throw ConfigError(p.field(key), "IMH states lie in [0, 1]");
        }
    }
}

void check_delta_level(const Params& p, const ChainConfig& chain) {
    if (!p.has("delta_level")) return;
    const GaussianChain g(chain.p, chain.alpha);
    const DriftCondition d = gaussian_drift(g);
    const double threshold = 2.0 * d.big_l / (1.0 - d.lambda);
    const double delta = p.number("delta_level");
    if (!(delta > threshold) || !std::isfinite(delta)) {
        throw ConfigError(p.field("delta_level"),
                          "must exceed 2L/(1 - lambda) = " + std::to_string(threshold) +
                              " (drift lambda = " + std::to_string(d.lambda) +
                              ", L = " + std::to_string(d.big_l) + ")");
    }
}

void check_positive_alpha(const Params& p, const ChainConfig& chain) {
    if (!(chain.alpha > 0.0)) {
        throw ConfigError(p.field("method"), "requires alpha > 0 (alpha = 0 is an exact sampler)");
    }
}

void check_initial_norm(const Params& p, const ChainConfig& chain, const char* scalar_key) {
    if (p.has("x0") == p.has(scalar_key)) {
        throw ConfigError(p.field("x0"), std::string("give exactly one of x0 and ") + scalar_key);
    }
    check_state(p, "x0", chain);
    check_range(p, scalar_key, 0.0, INFINITY, false, true);
}

void check_grid_family(const Params& p, const ChainConfig& chain, int max_n) {
    if (chain.family != Family::Imh && chain.p != 1) {
        throw ConfigError(p.field("method"), "grid oracles need a one-dimensional chain (p = 1)");
    }
    const long long n = p.integer("n");
    if (n < 2 || n > max_n) {
        throw ConfigError(p.field("n"), "must lie in [2, " + std::to_string(max_n) + "]");
    }
    check_range(p, "half_width", 0.0, INFINITY, true, true);
    if (p.has("half_width") && chain.family != Family::Rwmh) {
        throw ConfigError(p.field("half_width"), "only used by the RWMH grid");
    }
}

// --- shared helpers ---------------------------------------------------------

double mean_norm(const Params& p) {
    return p.has("mu_mean_norm") ? p.number("mu_mean_norm") : -1.0;
}

double resolve_mean_norm(const Context& ctx, const Params& p, AnalysisResult& r) {
    double m = mean_norm(p);
    if (m < 0.0) m = point_mass_mean_norm(p.state("x0", ctx.gaussian().p));
    r.params["mu_mean_norm"] = m;
    return m;
}

Curve curve_from(const std::string& name, std::int64_t t_max, const std::function<double(std::int64_t)>& f) {
    Curve c;
    c.name = name;
    for (std::int64_t t = 0; t <= t_max; ++t) {
        c.t.push_back(t);
        c.value.push_back(f(t));
    }
    return c;
}

GridChain build_grid(const Context& ctx, const Params& p, AnalysisResult& r) {
    const int n = static_cast<int>(p.integer("n"));
    switch (ctx.kernel.family) {
        case Family::Imh: return discretize_imh(ctx.imh(), n);
        case Family::Gaussian: return discretize_gaussian1d(ctx.gaussian(), n);
        case Family::Rwmh: {
            const double hw = p.number_or("half_width", 8.0);
            r.params["half_width"] = hw;
            return discretize_rwmh1d(ctx.rwmh(), n, hw);
        }
    }
    throw InvalidArgument("build_grid: unknown family");
}

void add_estimate(const CouplingEstimate& est, AnalysisResult& r) {
    Curve unequal{"p_unequal", {}, est.p_unequal, est.se_unequal};
    Curve psi{"mean_psi", {}, est.mean_psi, est.se_psi};
    for (int t = 0; t <= est.horizon; ++t) {
        unequal.t.push_back(t);
        psi.t.push_back(t);
    }
    r.curves.push_back(std::move(unequal));
    r.curves.push_back(std::move(psi));
    r.scalars["replicas"] = est.replicas;
    r.scalars["horizon"] = est.horizon;
}

PairInit pair_init(const Context& ctx, const Params& p) {
    const int dim = ctx.kernel.dimension;
    State x0 = p.state("x0", dim);
    if (p.has("y0")) return fixed_pair(std::move(x0), p.state("y0", dim));
    if (ctx.kernel.family == Family::Imh) return point_vs_imh_stationary(x0.at(0), ctx.imh());
    return point_vs_gaussian_stationary(std::move(x0));
}

// --- registry ---------------------------------------------------------------

const std::vector<Method>& registry() {
    static const std::vector<Method> methods = [] {
        const std::vector<Family> all{Family::Imh, Family::Gaussian, Family::Rwmh};
        const std::vector<Family> gaussian{Family::Gaussian};
        const std::vector<Family> rwmh{Family::Rwmh};
        std::vector<Method> m;

        m.push_back({"doeblin_tv_bound", all,
                     {{"t_max", Kind::Integer, true}, {"eps", Kind::Number, false}},
                     [](const Params& p, const ChainConfig& c) {
                         check_t_max(p);
                         check_range(p, "eps", 0.0, 1.0, true, false);
                         if (!p.has("eps") && c.family != Family::Imh) {
                             throw ConfigError(p.field("eps"), "required unless the chain is IMH");
                         }
                     },
                     [](const Context& ctx, const Params& p, AnalysisResult& r) {
                         const double eps = p.has("eps") ? p.number("eps") : imh_doeblin_epsilon(ctx.imh());
                         r.params["eps"] = eps;
                         r.curves.push_back(curve_from("bound", p.integer("t_max"),
                                                       [&](std::int64_t t) { return doeblin_tv_bound(eps, t); }));
                     }});

        m.push_back({"gaussian_w1_bound", gaussian,
                     {{"t_max", Kind::Integer, true},
                      {"x0", Kind::NumberOrArray, false},
                      {"mu_mean_norm", Kind::Number, false}},
                     [](const Params& p, const ChainConfig& c) {
                         check_t_max(p);
                         check_initial_norm(p, c, "mu_mean_norm");
                     },
                     [](const Context& ctx, const Params& p, AnalysisResult& r) {
                         const double m = resolve_mean_norm(ctx, p, r);
                         r.curves.push_back(curve_from("bound", p.integer("t_max"), [&](std::int64_t t) {
                             return gaussian_w1_bound(m, ctx.gaussian(), t);
                         }));
                     }});

        m.push_back({"gaussian_tv_bound", gaussian,
                     {{"t_max", Kind::Integer, true},
                      {"x0", Kind::NumberOrArray, false},
                      {"mu_mean_norm", Kind::Number, false}},
                     [](const Params& p, const ChainConfig& c) {
                         check_t_max(p);
                         check_initial_norm(p, c, "mu_mean_norm");
                     },
                     [](const Context& ctx, const Params& p, AnalysisResult& r) {
                         const double m = resolve_mean_norm(ctx, p, r);
                         r.scalars["b"] = gaussian_one_shot_b(ctx.gaussian());
                         r.curves.push_back(curve_from("bound", p.integer("t_max"), [&](std::int64_t t) {
                             return gaussian_tv_bound(m, ctx.gaussian(), t).value;
                         }));
                     }});

        m.push_back({"gaussian_minorization_epsilon", gaussian,
                     {{"delta_level", Kind::Number, true}},
                     [](const Params& p, const ChainConfig& c) {
                         check_positive_alpha(p, c);
                         check_delta_level(p, c);
                     },
                     [](const Context& ctx, const Params& p, AnalysisResult& r) {
                         const auto& g = ctx.gaussian();
                         r.scalars["eps"] = gaussian_minorization_epsilon(g.p, g.alpha, p.number("delta_level"));
                     }});

        m.push_back({"optimize_rho", gaussian,
                     {{"delta_level", Kind::Number, true}},
                     [](const Params& p, const ChainConfig& c) {
                         check_positive_alpha(p, c);
                         check_delta_level(p, c);
                     },
                     [](const Context& ctx, const Params& p, AnalysisResult& r) {
                         const auto cert = gaussian_certificate(ctx.gaussian(), p.number("delta_level"));
                         const auto opt = optimize_rho(cert);
                         r.params["r_star"] = opt.r_star;
                         r.scalars["eps"] = cert.eps;
                         r.scalars["lambda"] = cert.drift.lambda;
                         r.scalars["L"] = cert.drift.big_l;
                         r.scalars["r_star"] = opt.r_star;
                         r.scalars["rho_star"] = opt.rho_star;
                         r.scalars["one_minus_rho"] = opt.one_minus_rho;
                         r.scalars["first_term"] = opt.first_term;
                         r.scalars["second_term"] = opt.second_term;
                     }});

        m.push_back({"optimize_rho_joint", gaussian,
                     {{"delta_hi", Kind::Number, false}},
                     [](const Params& p, const ChainConfig& c) {
                         check_positive_alpha(p, c);
                         check_range(p, "delta_hi", 2.0, 1e6, true, false);
                     },
                     [](const Context& ctx, const Params& p, AnalysisResult& r) {
                         const double hi = p.number_or("delta_hi", 100.0);
                         const auto joint = optimize_rho_joint(ctx.gaussian(), hi);
                         r.params["delta_hi"] = hi;
                         r.params["delta_level"] = joint.delta_level;
                         r.params["r_star"] = joint.rho.r_star;
                         r.scalars["delta_level"] = joint.delta_level;
                         r.scalars["eps"] = joint.eps;
                         r.scalars["r_star"] = joint.rho.r_star;
                         r.scalars["rho_star"] = joint.rho.rho_star;
                         r.scalars["one_minus_rho"] = joint.rho.one_minus_rho;
                     }});

        m.push_back({"dm_tv_bound", gaussian,
                     {{"delta_level", Kind::Number, true},
                      {"t_max", Kind::Integer, true},
                      {"x0", Kind::NumberOrArray, false},
                      {"mu_h", Kind::Number, false}},
                     [](const Params& p, const ChainConfig& c) {
                         check_positive_alpha(p, c);
                         check_delta_level(p, c);
                         check_t_max(p);
                         check_initial_norm(p, c, "mu_h");
                     },
                     [](const Context& ctx, const Params& p, AnalysisResult& r) {
                         const auto cert = gaussian_certificate(ctx.gaussian(), p.number("delta_level"));
                         const auto opt = optimize_rho(cert);
                         const double mu_h = p.has("mu_h") ? p.number("mu_h")
                                                           : point_mass_mu_h(p.state("x0", ctx.gaussian().p));
                         r.params["mu_h"] = mu_h;
                         r.params["r_star"] = opt.r_star;
                         r.scalars["eps"] = cert.eps;
                         r.scalars["rho_star"] = opt.rho_star;
                         r.scalars["one_minus_rho"] = opt.one_minus_rho;
                         r.curves.push_back(curve_from("bound", p.integer("t_max"), [&](std::int64_t t) {
                             return dm_tv_bound(mu_h, cert, opt, t);
                         }));
                     }});

        m.push_back({"mixing_time", {Family::Imh, Family::Gaussian},
                     {{"eps_tol", Kind::Number, true},
                      {"distance", Kind::String, false},
                      {"x0", Kind::NumberOrArray, false},
                      {"mu_mean_norm", Kind::Number, false}},
                     [](const Params& p, const ChainConfig& c) {
                         check_range(p, "eps_tol", 0.0, 1.0, true, true);
                         const std::string d = p.string_or("distance", "tv");
                         if (d != "tv" && d != "w1") throw ConfigError(p.field("distance"), "expected tv or w1");
                         if (c.family == Family::Imh) {
                             if (d != "tv") throw ConfigError(p.field("distance"), "IMH supports tv only");
                             if (p.has("x0") || p.has("mu_mean_norm")) {
                                 throw ConfigError(p.field("x0"), "the Doeblin bound does not depend on the start");
                             }
                             return;
                         }
                         check_positive_alpha(p, c);
                         check_initial_norm(p, c, "mu_mean_norm");
                     },
                     [](const Context& ctx, const Params& p, AnalysisResult& r) {
                         const std::string d = p.string_or("distance", "tv");
                         r.params["distance"] = d;
                         std::optional<GeometricBound> bound;
                         if (ctx.kernel.family == Family::Imh) {
                             bound.emplace(1.0, 1.0 - imh_doeblin_epsilon(ctx.imh()), Distance::TV);
                         } else {
                             const double m = resolve_mean_norm(ctx, p, r);
                             const auto& g = ctx.gaussian();
                             if (d == "tv") bound.emplace(gaussian_tv_geometric(m, g));
                             else bound.emplace(m + std::sqrt(static_cast<double>(g.p)), g.alpha, Distance::W1);
                         }
                         r.scalars["c"] = bound->c;
                         r.scalars["rho"] = bound->rho;
                         const auto t = mixing_time(*bound, p.number("eps_tol"));
                         r.scalars["t_mix"] = t ? Json(*t) : Json(nullptr);
                     }});

        m.push_back({"stationary_moment_bound", gaussian, {}, nullptr,
                     [](const Context& ctx, const Params&, AnalysisResult& r) {
                         const auto d = gaussian_drift(ctx.gaussian());
                         r.scalars["lambda"] = d.lambda;
                         r.scalars["L"] = d.big_l;
                         r.scalars["bound"] = stationary_moment_bound(d);
                     }});

        m.push_back({"simulate_coupling", all,
                     {{"strategy", Kind::String, true},
                      {"x0", Kind::NumberOrArray, true},
                      {"y0", Kind::NumberOrArray, false},
                      {"delta_level", Kind::Number, false},
                      {"metric", Kind::String, false},
                      {"r", Kind::Number, false}},
                     [](const Params& p, const ChainConfig& c) {
                         const std::string s = p.string_or("strategy", "");
                         const bool gaussian_only = s == "crn" || s == "maximal" || s == "dm_split";
                         if (s != "independent" && s != "doeblin_split" && !gaussian_only) {
                             throw ConfigError(p.field("strategy"),
                                               "expected independent, doeblin_split, crn, maximal or dm_split");
                         }
                         if (s == "doeblin_split" && c.family != Family::Imh) {
                             throw ConfigError(p.field("strategy"), "doeblin_split needs the IMH chain");
                         }
                         if (gaussian_only && c.family != Family::Gaussian) {
                             throw ConfigError(p.field("strategy"), s + " needs the Gaussian chain");
                         }
                         if (s == "dm_split") {
                             check_positive_alpha(p, c);
                             if (!p.has("delta_level")) {
                                 throw ConfigError(p.field("delta_level"), "required by dm_split");
                             }
                             check_delta_level(p, c);
                         } else if (p.has("delta_level")) {
                             throw ConfigError(p.field("delta_level"), "only used by dm_split");
                         }
                         check_state(p, "x0", c);
                         check_state(p, "y0", c);
                         const std::string metric = p.string_or("metric", "euclidean");
                         if (metric != "euclidean" && metric != "drift") {
                             throw ConfigError(p.field("metric"), "expected euclidean or drift");
                         }
                         if (p.has("r") && metric != "drift") throw ConfigError(p.field("r"), "only used by the drift metric");
                         check_range(p, "r", 0.0, 1.0, true, true);
                     },
                     [](const Context& ctx, const Params& p, AnalysisResult& r) {
                         const std::string s = p.string_or("strategy", "");
                         CouplingStrategy strategy = CouplingStrategy::independent();
                         if (s == "doeblin_split") {
                             strategy = CouplingStrategy::doeblin_split(imh_doeblin_minorization(ctx.imh()));
                         } else if (s == "crn") {
                             strategy = CouplingStrategy::crn();
                         } else if (s == "maximal") {
                             strategy = CouplingStrategy::maximal();
                         } else if (s == "dm_split") {
                             const auto cert = gaussian_certificate(ctx.gaussian(), p.number("delta_level"));
                             strategy = CouplingStrategy::dm_split(
                                 cert, gaussian_small_set_minorization(ctx.gaussian(), cert));
                             r.scalars["eps"] = cert.eps;
                         }
                         SimulationOptions opts;
                         opts.threads = ctx.config.mc.threads;
                         const std::string metric = p.string_or("metric", "euclidean");
                         r.params["metric"] = metric;
                         if (metric == "drift") {
                             const double rr = p.number_or("r", 0.5);
                             r.params["r"] = rr;
                             opts.psi = drift_pair_metric(rr);
                         }
                         const auto est = simulate_coupling(strategy, ctx.kernel, pair_init(ctx, p),
                                                            ctx.config.mc.horizon, ctx.config.mc.replicas,
                                                            ctx.rng(), opts);
                         add_estimate(est, r);
                     }});

        m.push_back({"simulate_crn_one_shot", gaussian,
                     {{"x0", Kind::NumberOrArray, true}, {"y0", Kind::NumberOrArray, false}},
                     [](const Params& p, const ChainConfig& c) {
                         check_state(p, "x0", c);
                         check_state(p, "y0", c);
                     },
                     [](const Context& ctx, const Params& p, AnalysisResult& r) {
                         SimulationOptions opts;
                         opts.threads = ctx.config.mc.threads;
                         const auto est = simulate_crn_one_shot(ctx.gaussian(), pair_init(ctx, p),
                                                                ctx.config.mc.horizon, ctx.config.mc.replicas,
                                                                ctx.rng(), opts);
                         add_estimate(est, r);
                     }});

        m.push_back({"norm_bracket", all, {}, nullptr,
                     [](const Context& ctx, const Params&, AnalysisResult& r) {
                         NormBracket b;
                         switch (ctx.kernel.family) {
                             case Family::Imh: b = imh_norm_bracket(ctx.imh()); break;
                             case Family::Gaussian: b = gaussian_norm_bracket(ctx.gaussian()); break;
                             case Family::Rwmh: b = rwmh_norm_bracket(ctx.rwmh()); break;
                         }
                         r.scalars["lower"] = b.lower;
                         r.scalars["upper"] = b.upper;
                         r.scalars["provenance"] = b.provenance;
                     }});

        m.push_back({"grid_operator_norm", all,
                     {{"n", Kind::Integer, true}, {"half_width", Kind::Number, false}},
                     [](const Params& p, const ChainConfig& c) { check_grid_family(p, c, 2000); },
                     [](const Context& ctx, const Params& p, AnalysisResult& r) {
                         const GridChain grid = build_grid(ctx, p, r);
                         r.scalars["norm"] = operator_norm(grid);
                         r.scalars["reversible"] = grid.reversible();
                         if (grid.reversible()) {
                             const double lo = min_eigenvalue(grid);
                             r.scalars["gap"] = spectral_gap(grid);
                             r.scalars["min_eigenvalue"] = lo;
                             r.scalars["psd"] = lo >= -1e-10;
                         }
                     }});

        m.push_back({"grid_conductance", all,
                     {{"n", Kind::Integer, true}, {"half_width", Kind::Number, false}},
                     [](const Params& p, const ChainConfig& c) { check_grid_family(p, c, 24); },
                     [](const Context& ctx, const Params& p, AnalysisResult& r) {
                         const GridChain grid = build_grid(ctx, p, r);
                         const Conductance cond = conductance_exact(grid);
                         const GapBracket gb = cheeger_bracket(cond.phi);
                         Json members = Json::array();
                         for (std::size_t i = 0; i < cond.argmin_set.size(); ++i) {
                             if (cond.argmin_set[i]) members.push_back(i);
                         }
                         r.scalars["phi"] = cond.phi;
                         r.scalars["argmin_set"] = members;
                         r.scalars["gap_lower"] = gb.lower;
                         r.scalars["gap_upper"] = gb.upper;
                         r.scalars["set_lower"] = set_lower(grid, cond.argmin_set);
                         if (grid.reversible()) r.scalars["gap"] = spectral_gap(grid);
                     }});

        m.push_back({"gaussian_norm_upper_iso", gaussian,
                     {{"optimize", Kind::Boolean, false}},
                     nullptr,
                     [](const Context& ctx, const Params& p, AnalysisResult& r) {
                         const auto& g = ctx.gaussian();
                         r.scalars["upper"] = gaussian_norm_upper_iso(g);
                         r.scalars["closed_form"] = gaussian_norm_upper_iso_closed_form(g.alpha);
                         const bool optimize = p.boolean_or("optimize", false);
                         r.params["optimize"] = optimize;
                         if (optimize) {
                             const auto o = gaussian_norm_upper_iso_optimized(g);
                             r.params["a"] = o.a;
                             r.params["delta"] = o.delta;
                             r.scalars["a"] = o.a;
                             r.scalars["delta"] = o.delta;
                             r.scalars["eps"] = o.eps;
                             r.scalars["kappa"] = o.kappa;
                             r.scalars["phi"] = o.phi;
                             r.scalars["upper_optimized"] = o.norm_upper;
                         }
                     }});

        m.push_back({"rwmh_norm_lower", rwmh, {}, nullptr,
                     [](const Context& ctx, const Params&, AnalysisResult& r) {
                         r.scalars["lower"] = rwmh_norm_lower(ctx.rwmh());
                         r.scalars["move_mass_origin"] = rwmh_move_mass_at_origin(ctx.rwmh());
                     }});

        m.push_back({"sigma_star", rwmh, {}, nullptr,
                     [](const Context& ctx, const Params&, AnalysisResult& r) {
                         const int p = ctx.rwmh().p;
                         const double s = sigma_star(p);
                         r.scalars["sigma_star"] = s;
                         r.scalars["sigma2_star"] = s * s;
                         r.scalars["lower_at_sigma_star"] = rwmh_norm_lower(RwmhChain(p, s));
                     }});

        m.push_back({"rwmh_move_probability", rwmh,
                     {{"x0", Kind::NumberOrArray, false}},
                     [](const Params& p, const ChainConfig& c) { check_state(p, "x0", c); },
                     [](const Context& ctx, const Params& p, AnalysisResult& r) {
                         const auto& chain = ctx.rwmh();
                         const State x0 = p.has("x0") ? p.state("x0", chain.p) : State(chain.p, 0.0);
                         r.params["x0"] = x0;
                         Rng rng = ctx.rng();
                         const auto est = rwmh_move_probability_mc(x0, chain, ctx.config.mc.replicas, rng);
                         r.scalars["mean"] = est.mean;
                         r.scalars["std_error"] = est.std_error;
                         r.scalars["replicas"] = ctx.config.mc.replicas;
                         if (squared_norm(x0) == 0.0) r.scalars["exact"] = rwmh_move_mass_at_origin(chain);
                     }});
        return m;
    }();
    return methods;
}

const Method* find_method(const std::string& name) {
    for (const auto& m : registry()) {
        if (name == m.name) return &m;
    }
    return nullptr;
}

bool kind_matches(const Json& v, Kind kind) {
    auto numeric_array = [](const Json& a) {
        return a.is_array() && std::all_of(a.begin(), a.end(), [](const Json& e) { return e.is_number(); });
    };
    switch (kind) {
        case Kind::Number: return v.is_number();
        case Kind::Integer: return v.is_number_integer();
        case Kind::Boolean: return v.is_boolean();
        case Kind::String: return v.is_string();
        case Kind::NumberArray: return numeric_array(v);
        case Kind::NumberOrArray: return v.is_number() || numeric_array(v);
    }
    return false;
}

const char* kind_name(Kind kind) {
    switch (kind) {
        case Kind::Number: return "a number";
        case Kind::Integer: return "an integer";
        case Kind::Boolean: return "a boolean";
        case Kind::String: return "a string";
        case Kind::NumberArray: return "an array of numbers";
        case Kind::NumberOrArray: return "a number or an array of numbers";
    }
    return "?";
}

}  // namespace

std::vector<std::string> method_names() {
    std::vector<std::string> out;
    for (const auto& m : registry()) out.emplace_back(m.name);
    return out;
}

void validate_analysis(const AnalysisRequest& request, const ChainConfig& chain,
                       const std::string& field_prefix) {
    const Method* m = find_method(request.method);
    if (!m) throw ConfigError(field_prefix + ".method", "unknown method '" + request.method + "'");
    if (std::find(m->families.begin(), m->families.end(), chain.family) == m->families.end()) {
        throw ConfigError(field_prefix + ".method", request.method + " is not available for the " +
                                                        to_string(chain.family) + " chain");
    }
    if (!request.params.is_object()) throw ConfigError(field_prefix, "expected an object");
    for (const auto& [key, value] : request.params.items()) {
        const auto it = std::find_if(m->params.begin(), m->params.end(),
                                     [&](const Param& p) { return key == p.name; });
        if (it == m->params.end()) throw ConfigError(field_prefix + "." + key, "unknown key");
        if (!kind_matches(value, it->kind)) {
            throw ConfigError(field_prefix + "." + key, std::string("expected ") + kind_name(it->kind));
        }
    }
    for (const auto& p : m->params) {
        if (p.required && !request.params.contains(p.name)) {
            throw ConfigError(field_prefix + "." + p.name, "missing required key");
        }
    }
    if (m->check) m->check(Params(request.params, field_prefix), chain);
}

Report run(const RunConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    Report report;
    report.config_echo = to_json(config);
    report.version = MCMC_CERTIFY_VERSION;
    report.seed = config.mc.seed;

    std::optional<KernelSpec> kernel;
    std::string kernel_error;
    try {
        kernel.emplace(build_kernel(config.chain));
    } catch (const std::exception& e) {
        kernel_error = e.what();
    }

    for (std::size_t i = 0; i < config.analyses.size(); ++i) {
        const auto& req = config.analyses[i];
        AnalysisResult result;
        result.method = req.method;
        result.params = req.params;
        try {
            if (!kernel) throw Error("chain construction failed: " + kernel_error);
            const Method* m = find_method(req.method);
            if (!m) throw Error("unknown method '" + req.method + "'");
            const std::string prefix = "analyses[" + std::to_string(i) + "]";
            validate_analysis(req, config.chain, prefix);
            m->run(Context{config, *kernel, i}, Params(req.params, prefix), result);
        } catch (const std::exception& e) {
            result.error = e.what();
            result.scalars = Json::object();
            result.curves.clear();
        }
        report.results.push_back(std::move(result));
    }
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace certify
