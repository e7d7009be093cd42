#include "mcmc_certify/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mcmc_certify/error.hpp"
#include "mcmc_certify/format.hpp"
#include "mcmc_certify/numerics.hpp"

namespace certify {

const char* to_string(Distance d) {
    switch (d) {
        case Distance::TV: return "TV";
        case Distance::W1: return "W1";
        case Distance::L2: return "L2";
    }
    return "unknown";
}

GeometricBound::GeometricBound(double c_, double rho_, Distance distance_)
    : c(c_), rho(rho_), distance(distance_) {
    if (!(c >= 0.0)) throw InvalidArgument("GeometricBound: c must be >= 0");
    if (!(rho >= 0.0 && rho < 1.0)) throw InvalidArgument("GeometricBound: rho must lie in [0, 1)");
}

double GeometricBound::at(std::int64_t t) const {
    if (t < 0) throw InvalidArgument("GeometricBound::at: t must be >= 0");
    const double v = (t == 0) ? c : c * std::pow(rho, static_cast<double>(t));
    return distance == Distance::TV ? std::min(1.0, v) : v;
}

void DriftCondition::validate() const {
    if (!(lambda >= 0.0 && lambda < 1.0)) {
        throw InvalidArgument("DriftCondition: lambda must lie in [0, 1), got " + std::to_string(lambda));
    }
    if (!(big_l >= 0.0) || !std::isfinite(big_l)) {
        throw InvalidArgument("DriftCondition: L must be >= 0, got " + std::to_string(big_l));
    }
}

void DriftMinorizationCertificate::validate() const {
    drift.validate();
    if (!(eps > 0.0 && eps <= 1.0)) {
        throw InvalidArgument("certificate: eps must lie in (0, 1], got " + format_number(eps));
    }
    const double level = 2.0 * drift.big_l / (1.0 - drift.lambda);
    if (!(delta_level > level)) {
        throw InvalidArgument("certificate: delta_level = " + format_number(delta_level) +
                              " must exceed 2L/(1-lambda) = " + format_number(level));
    }
}

double doeblin_tv_bound(double eps, std::int64_t t) {
    if (!(eps > 0.0 && eps <= 1.0)) throw InvalidArgument("doeblin_tv_bound: eps must lie in (0, 1]");
    if (t < 0) throw InvalidArgument("doeblin_tv_bound: t must be >= 0");
    if (t == 0) return 1.0;
    return std::pow(1.0 - eps, static_cast<double>(t));
}

double stationary_moment_bound(const DriftCondition& drift) {
    drift.validate();
    return drift.big_l / (1.0 - drift.lambda);
}

double gaussian_w1_bound(double mu_mean_norm, const GaussianChain& chain, std::int64_t t) {
    if (!(mu_mean_norm >= 0.0)) throw InvalidArgument("gaussian_w1_bound: mu_mean_norm must be >= 0");
    if (t < 0) throw InvalidArgument("gaussian_w1_bound: t must be >= 0");
    const double scale = mu_mean_norm + std::sqrt(static_cast<double>(chain.p));
    return t == 0 ? scale : scale * std::pow(chain.alpha, static_cast<double>(t));
}

double gaussian_one_shot_b(const GaussianChain& chain) {
    if (chain.alpha == 0.0) return 0.0;
    const double a = chain.alpha;
    return a / std::sqrt(2.0 * std::numbers::pi * (1.0 - a * a));
}

TvBoundValue gaussian_tv_bound(double mu_mean_norm, const GaussianChain& chain, std::int64_t t) {
    if (!(mu_mean_norm >= 0.0)) throw InvalidArgument("gaussian_tv_bound: mu_mean_norm must be >= 0");
    if (t < 0) throw InvalidArgument("gaussian_tv_bound: t must be >= 0");
    if (t == 0) return {1.0, true};
    const double b = gaussian_one_shot_b(chain);
    const double w1 = gaussian_w1_bound(mu_mean_norm, chain, t - 1);
    return {std::min(1.0, b * w1), false};
}

GeometricBound gaussian_tv_geometric(double mu_mean_norm, const GaussianChain& chain) {
    if (chain.alpha == 0.0) return GeometricBound(0.0, 0.0, Distance::TV);
    const double b = gaussian_one_shot_b(chain);
    const double c = b * (mu_mean_norm + std::sqrt(static_cast<double>(chain.p))) / chain.alpha;
    return GeometricBound(c, chain.alpha, Distance::TV);
}

namespace {

struct RhoTerms {
    double log_first;
    double log_second;
};

RhoTerms rho_terms(double r, double eps, double lambda, double big_l, double delta_level) {
    const double base = lambda + (2.0 * big_l + 1.0 - lambda) / (delta_level + 1.0);
    const double log_first = (eps >= 1.0 ? -std::numeric_limits<double>::infinity()
                                         : r * std::log1p(-eps)) +
                             (1.0 - r) * std::log(2.0 * big_l + 1.0);
    const double log_second = (1.0 - r) * std::log(base);
    return {log_first, log_second};
}

RhoOptimum minimize_rho(double eps, double lambda, double big_l, double delta_level) {
    auto objective = [&](double r) {
        const auto terms = rho_terms(r, eps, lambda, big_l, delta_level);
        return std::exp(std::max(terms.log_first, terms.log_second));
    };
    const auto best = minimize_scalar(objective, Interval(1e-9, 1.0 - 1e-9), Tolerance{1e-14, 0.0, 300});
    const auto terms = rho_terms(best.argmin, eps, lambda, big_l, delta_level);
    const double log_rho = std::max(terms.log_first, terms.log_second);
    return {best.argmin, std::exp(log_rho), -std::expm1(log_rho), std::exp(terms.log_first),
            std::exp(terms.log_second)};
}

}  // namespace

double rho_dm(double r, const DriftMinorizationCertificate& cert) {
    if (!(r > 0.0 && r < 1.0)) throw InvalidArgument("rho_dm: r must lie in (0, 1)");
    cert.validate();
    const auto terms = rho_terms(r, cert.eps, cert.drift.lambda, cert.drift.big_l, cert.delta_level);
    return std::exp(std::max(terms.log_first, terms.log_second));
}

RhoOptimum optimize_rho(const DriftMinorizationCertificate& cert) {
    cert.validate();
    const auto opt = minimize_rho(cert.eps, cert.drift.lambda, cert.drift.big_l, cert.delta_level);
    if (!(opt.rho_star < 1.0)) {
        throw Error("optimize_rho: optimized rho = " + format_number(opt.rho_star) +
                    " is not below 1; certificate is inconsistent");
    }
    return opt;
}

double gaussian_minorization_radial_integrand(double u, int p, double alpha, double delta_level) {
    const double var = 1.0 - alpha * alpha;
    const double shift = alpha * std::sqrt(p * delta_level);
    const double half_p = 0.5 * p;
    // log of the (p-1)-sphere surface area 2 pi^(p/2) / Gamma(p/2)
    const double log_surface = std::log(2.0) + half_p * std::log(std::numbers::pi) - std::lgamma(half_p);
    const double radial = (p == 1) ? 0.0 : (p - 1) * std::log(u);
    return std::exp(log_surface + radial - half_p * std::log(2.0 * std::numbers::pi * var) -
                    (u + shift) * (u + shift) / (2.0 * var));
}

double gaussian_minorization_epsilon(int p, double alpha, double delta_level) {
    if (p < 1) throw InvalidArgument("gaussian_minorization_epsilon: p must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgument("gaussian_minorization_epsilon: alpha must lie in (0, 1)");
    }
    if (!(delta_level > 2.0)) {
        throw InvalidArgument("gaussian_minorization_epsilon: delta_level must exceed 2");
    }
    const double var = 1.0 - alpha * alpha;
    const double shift = alpha * std::sqrt(p * delta_level);
    auto f = [&](double u) { return gaussian_minorization_radial_integrand(u, p, alpha, delta_level); };

    // The log-integrand is concave with curvature <= -1/var, so past its mode
    // u_mode it sits below peak * exp(-(u - u_mode)^2 / (2 var)). Truncate
    // where that envelope drops under 1e-3 of the target tolerance.
    const Tolerance tol{0.0, 1e-11, 2000000};
    const double u_mode = 0.5 * (-shift + std::sqrt(shift * shift + 4.0 * var * (p - 1)));
    const double peak = f(u_mode);
    if (!(peak > 0.0)) return 0.0;
    const double threshold = std::max(tol.abs_tol, tol.rel_tol * peak) * 1e-3;
    const double upper = u_mode + std::sqrt(2.0 * var * std::log(peak / threshold));
    return integrate(f, Interval(0.0, upper), tol);
}

DriftCondition gaussian_drift(const GaussianChain& chain) {
    const double a2 = chain.alpha * chain.alpha;
    return {"norm_sq_over_p", a2, 1.0 - a2};
}

DriftMinorizationCertificate gaussian_certificate(const GaussianChain& chain, double delta_level) {
    DriftMinorizationCertificate cert{gaussian_drift(chain), delta_level,
                                      gaussian_minorization_epsilon(chain.p, chain.alpha, delta_level),
                                      "gaussian_inf_density"};
    cert.validate();
    return cert;
}

double dm_tv_bound(double mu_h, const DriftMinorizationCertificate& cert, const RhoOptimum& opt,
                   std::int64_t t) {
    if (!(mu_h >= 0.0)) throw InvalidArgument("dm_tv_bound: mu_h must be >= 0");
    if (t < 0) throw InvalidArgument("dm_tv_bound: t must be >= 0");
    const double prefactor = mu_h + stationary_moment_bound(cert.drift) + 1.0;
    const double log_rho = std::log1p(-opt.one_minus_rho);
    return std::min(1.0, prefactor * std::exp(static_cast<double>(t) * log_rho));
}

double dm_tv_bound(double mu_h, const DriftMinorizationCertificate& cert, std::int64_t t) {
    return dm_tv_bound(mu_h, cert, optimize_rho(cert), t);
}

JointRhoOptimum optimize_rho_joint(const GaussianChain& chain, double delta_hi) {
    const double delta_lo = 2.0 + 1e-6;
    if (!(delta_hi > delta_lo)) throw InvalidArgument("optimize_rho_joint: delta_hi must exceed 2");
    const auto drift = gaussian_drift(chain);
    auto inner = [&](double delta) {
        const double eps = gaussian_minorization_epsilon(chain.p, chain.alpha, delta);
        return minimize_rho(std::min(eps, 1.0), drift.lambda, drift.big_l, delta);
    };
    const auto outer = minimize_scalar([&](double delta) { return -inner(delta).one_minus_rho; },
                                       Interval(delta_lo, delta_hi), Tolerance{1e-9, 1e-9, 200});
    const double delta = outer.argmin;
    auto cert = gaussian_certificate(chain, delta);
    return {delta, cert.eps, optimize_rho(cert)};
}

std::optional<std::int64_t> mixing_time(const GeometricBound& bound, double eps_tol) {
    if (!(eps_tol > 0.0)) throw InvalidArgument("mixing_time: eps_tol must be > 0");
    if (bound.c <= eps_tol || bound.rho == 0.0) return 1;
    const double t = std::ceil((std::log(bound.c) - std::log(eps_tol)) / (-std::log(bound.rho)));
    if (!std::isfinite(t) || t >= 9.0e18) return std::nullopt;
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(t));
}

double point_mass_mean_norm(std::span<const double> x) {
    return std::sqrt(squared_norm(x));
}

double point_mass_mu_h(std::span<const double> x) {
    if (x.empty()) throw InvalidArgument("point_mass_mu_h: empty state");
    return squared_norm(x) / static_cast<double>(x.size());
}

double centered_gaussian_mean_norm(int p, double scale) {
    if (p < 1 || !(scale >= 0.0)) throw InvalidArgument("centered_gaussian_mean_norm: bad arguments");
    return scale * std::numbers::sqrt2 * std::exp(std::lgamma(0.5 * (p + 1)) - std::lgamma(0.5 * p));
}

double gaussian_mu_h(std::span<const double> mean, double scale) {
    if (mean.empty()) throw InvalidArgument("gaussian_mu_h: empty mean");
    const double p = static_cast<double>(mean.size());
    return (squared_norm(mean) + p * scale * scale) / p;
}

std::string to_csv(const BoundCurve& curve) {
    std::ostringstream out;
    out << "t,bound,distance,method\n";
    for (std::size_t i = 0; i < curve.values.size(); ++i) {
        out << curve.t[i] << ',' << format_number(curve.values[i]) << ',' << to_string(curve.distance)
            << ',' << curve.method << '\n';
    }
    return out.str();
}

}  // namespace certify
