#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcmc_certify/chains.hpp"

namespace certify {

enum class Distance { TV, W1, L2 };

const char* to_string(Distance d);

/// t -> c * rho^t. TV evaluations are clamped to 1.
struct GeometricBound {
    double c;
    double rho;
    Distance distance;

    GeometricBound(double c, double rho, Distance distance);
    double at(std::int64_t t) const;
};

/// K h <= lambda h + L.
struct DriftCondition {
    std::string h_id;
    double lambda;
    double big_l;

    void validate() const;
};

/// Drift condition plus minorization K(x, .) >= eps nu(.) on {h <= delta_level}.
struct DriftMinorizationCertificate {
    DriftCondition drift;
    double delta_level;
    double eps;
    std::string nu_id;

    /// Enforces 0 <= lambda < 1, L >= 0, 0 < eps <= 1 and
    /// delta_level > 2 L / (1 - lambda).
    void validate() const;
};

// --- Doeblin and stationary moments ----------------------------------------

/// (1 - eps)^t.
double doeblin_tv_bound(double eps, std::int64_t t);

/// Upper bound L / (1 - lambda) on the stationary mean of h.
double stationary_moment_bound(const DriftCondition& drift);

// --- Gaussian chain: Wasserstein and one-shot TV ---------------------------

/// (mu_mean_norm + sqrt p) alpha^t, with sqrt p standing in for the
/// stationary mean norm.
double gaussian_w1_bound(double mu_mean_norm, const GaussianChain& chain, std::int64_t t);

/// Continuity constant b = alpha / sqrt(2 pi (1 - alpha^2)) with
/// TV(K(x,.), K(y,.)) <= b |x - y|.
double gaussian_one_shot_b(const GaussianChain& chain);

struct TvBoundValue {
    double value;
    /// Set when t = 0: the one-shot step has nothing to consume, value is 1.
    bool needs_step;
};

/// min{1, b (mu_mean_norm + sqrt p) alpha^(t-1)}. The final maximal-coupling
/// step uses up one time index.
TvBoundValue gaussian_tv_bound(double mu_mean_norm, const GaussianChain& chain, std::int64_t t);

/// The same bound written as a GeometricBound (c = b (m + sqrt p) / alpha,
/// rho = alpha) for mixing-time conversion. Requires alpha > 0.
GeometricBound gaussian_tv_geometric(double mu_mean_norm, const GaussianChain& chain);

// --- Drift and minorization -------------------------------------------------

/// max{(1 - eps)^r (2L + 1)^(1-r), (lambda + (2L + 1 - lambda)/(delta + 1))^(1-r)}.
double rho_dm(double r, const DriftMinorizationCertificate& cert);

struct RhoOptimum {
    double r_star;
    double rho_star;
    /// 1 - rho_star evaluated in log space; keeps digits when rho is within
    /// 1e-8 of one.
    double one_minus_rho;
    double first_term;
    double second_term;
};

/// Minimizes rho_dm over r in (1e-9, 1 - 1e-9). Throws Error when the optimum
/// is not below one.
RhoOptimum optimize_rho(const DriftMinorizationCertificate& cert);

/// Minorization constant for the Gaussian chain with h(x) = |x|^2 / p on the
/// small set {h <= delta_level}: the mass of q(x') = inf_{x in S} k(x, x'),
/// reduced to a radial integral.
double gaussian_minorization_epsilon(int p, double alpha, double delta_level);

/// Radial integrand of the above (includes the sphere surface factor).
double gaussian_minorization_radial_integrand(double u, int p, double alpha, double delta_level);

/// Drift lambda = alpha^2, L = 1 - alpha^2 with h(x) = |x|^2 / p.
DriftCondition gaussian_drift(const GaussianChain& chain);

/// Full certificate for the Gaussian chain at the given small-set level.
DriftMinorizationCertificate gaussian_certificate(const GaussianChain& chain, double delta_level);

/// min{1, (mu_h + L / (1 - lambda) + 1) rho_star^t}.
double dm_tv_bound(double mu_h, const DriftMinorizationCertificate& cert, std::int64_t t);

/// Same as dm_tv_bound with a precomputed optimum.
double dm_tv_bound(double mu_h, const DriftMinorizationCertificate& cert, const RhoOptimum& opt,
                   std::int64_t t);

struct JointRhoOptimum {
    double delta_level;
    double eps;
    RhoOptimum rho;
};

/// Nested scalar search over (r, delta) for the Gaussian chain with
/// delta in (2 + 1e-6, delta_hi).
JointRhoOptimum optimize_rho_joint(const GaussianChain& chain, double delta_hi = 100.0);

// --- Mixing time ------------------------------------------------------------

/// max{1, ceil((log c - log eps_tol) / (-log rho))}; 1 when c <= eps_tol or
/// rho = 0. nullopt means the time does not fit in 64 bits.
std::optional<std::int64_t> mixing_time(const GeometricBound& bound, double eps_tol);

// --- Initial-law helpers ----------------------------------------------------

/// Integral of |x| against a point mass.
double point_mass_mean_norm(std::span<const double> x);
/// Integral of h(x) = |x|^2 / p against a point mass.
double point_mass_mu_h(std::span<const double> x);
/// E|X| for X ~ N_p(0, s^2 I_p).
double centered_gaussian_mean_norm(int p, double scale);
/// E h(X) = (|m|^2 + p s^2) / p for X ~ N_p(m, s^2 I_p).
double gaussian_mu_h(std::span<const double> mean, double scale);

// --- Curves -----------------------------------------------------------------

struct BoundCurve {
    std::string method;
    Distance distance;
    std::vector<std::int64_t> t;
    std::vector<double> values;
};

/// CSV with header `t,bound,distance,method`.
std::string to_csv(const BoundCurve& curve);

}  // namespace certify
