#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mcmc_certify/bounds.hpp"
#include "mcmc_certify/error.hpp"
#include "mcmc_certify/numerics.hpp"

using namespace certify;

namespace {

/// Independent trapezoid evaluation of the minorization mass
/// int S_{p-1} u^(p-1) (2 pi v)^(-p/2) exp(-(u + c)^2 / (2 v)) du.
double epsilon_trapezoid(int p, double alpha, double delta) {
    const double v = 1.0 - alpha * alpha;
    const double c = alpha * std::sqrt(p * delta);
    const double log_surface =
        std::log(2.0) + 0.5 * p * std::log(std::numbers::pi) - std::lgamma(0.5 * p);
    const int n = 400000;
    const double hi = 40.0, h = hi / n;
    double sum = 0.0;
    for (int i = 1; i < n; ++i) {
        const double u = i * h;
        sum += std::exp(log_surface + (p - 1) * std::log(u) - 0.5 * p * std::log(2.0 * std::numbers::pi * v) -
                        (u + c) * (u + c) / (2.0 * v));
    }
    return sum * h;
}

}  // namespace

TEST_CASE("GeometricBound and Doeblin bound arithmetic") {
    CHECK(doeblin_tv_bound(2.0 / 3.0, 0) == 1.0);
    CHECK(doeblin_tv_bound(2.0 / 3.0, 2) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
    CHECK(doeblin_tv_bound(1.0, 3) == 0.0);
    CHECK_THROWS_AS(doeblin_tv_bound(0.0, 1), InvalidArgument);
    const GeometricBound b(4.0, 0.5, Distance::TV);
    CHECK(b.at(0) == 1.0);
    CHECK(b.at(3) == doctest::Approx(0.5));
    const GeometricBound w(4.0, 0.5, Distance::W1);
    CHECK(w.at(0) == 4.0);
    CHECK_THROWS_AS(GeometricBound(1.0, 1.0, Distance::TV), InvalidArgument);
}

TEST_CASE("mixing_time matches a direct scan") {
    for (double c : {0.5, 3.0, 200.0}) {
        for (double rho : {0.3, 0.9, 0.999}) {
            const GeometricBound b(c, rho, Distance::W1);
            std::int64_t t = 1;
            while (c * std::pow(rho, static_cast<double>(t)) > 0.01) ++t;
            const auto got = mixing_time(b, 0.01);
            REQUIRE(got.has_value());
            CHECK(*got == t);
        }
    }
    CHECK(mixing_time(GeometricBound(1.0, 0.0, Distance::TV), 0.01) == 1);
}

TEST_CASE("drift and certificate validation") {
    const GaussianChain g(10, 0.5);
    const auto d = gaussian_drift(g);
    CHECK(d.lambda == doctest::Approx(0.25));
    CHECK(d.big_l == doctest::Approx(0.75));
    CHECK(stationary_moment_bound(d) == doctest::Approx(1.0));
    // Delta must exceed 2L / (1 - lambda) = 2.
    CHECK_THROWS_AS(gaussian_certificate(g, 2.0), InvalidArgument);
    CHECK_NOTHROW(gaussian_certificate(g, 2.5));
    CHECK_THROWS_AS((DriftCondition{"h", 1.0, 0.5}.validate()), InvalidArgument);
}

TEST_CASE("Gaussian minorization epsilon: p = 1 closed form") {
    // q(x') = phi_v(|x'| + c), so eps = 2 F_N(-c / sqrt(v)).
    for (double alpha : {0.2, 0.5, 0.8}) {
        for (double delta : {2.5, 4.0, 9.0}) {
            const double c = alpha * std::sqrt(delta);
            const double expect = 2.0 * normal_cdf(-c / std::sqrt(1.0 - alpha * alpha));
            CHECK(gaussian_minorization_epsilon(1, alpha, delta) == doctest::Approx(expect).epsilon(1e-9));
        }
    }
}

TEST_CASE("Gaussian minorization epsilon: p = 10 against trapezoid and 40-digit value") {
    const double eps = gaussian_minorization_epsilon(10, 0.5, 4.0);
    CHECK(eps == doctest::Approx(2.2767085001476143e-7).epsilon(1e-9));
    CHECK(eps == doctest::Approx(epsilon_trapezoid(10, 0.5, 4.0)).epsilon(1e-7));
    CHECK(gaussian_minorization_epsilon(3, 0.7, 5.0) ==
          doctest::Approx(epsilon_trapezoid(3, 0.7, 5.0)).epsilon(1e-7));
    CHECK_THROWS_AS(gaussian_minorization_epsilon(10, 0.0, 4.0), InvalidArgument);
}

TEST_CASE("rho_dm and optimize_rho") {
    const auto cert = gaussian_certificate(GaussianChain(10, 0.5), 4.0);
    // Direct evaluation of the two terms at r = 0.5.
    const double first = std::pow(1.0 - cert.eps, 0.5) * std::pow(2.5, 0.5);
    const double second = std::pow(0.25 + 2.25 / 5.0, 0.5);
    CHECK(rho_dm(0.5, cert) == doctest::Approx(std::max(first, second)).epsilon(1e-14));

    const auto opt = optimize_rho(cert);
    CHECK(opt.one_minus_rho == doctest::Approx(6.379e-8).epsilon(1e-3));
    CHECK(opt.one_minus_rho == doctest::Approx(1.0 - opt.rho_star).epsilon(1e-6));
    // The optimum sits on the crossing of the two terms.
    CHECK(opt.first_term == doctest::Approx(opt.second_term).epsilon(1e-12));
    for (double r = 0.01; r < 1.0; r += 0.01) CHECK(rho_dm(r, cert) >= opt.rho_star);
}

TEST_CASE("optimize_rho_joint does at least as well as a fixed level") {
    const GaussianChain g(10, 0.5);
    const auto fixed = optimize_rho(gaussian_certificate(g, 4.0));
    const auto joint = optimize_rho_joint(g);
    CHECK(joint.rho.one_minus_rho >= fixed.one_minus_rho);
    CHECK(joint.delta_level > 2.0);
    CHECK(joint.eps == doctest::Approx(gaussian_minorization_epsilon(10, 0.5, joint.delta_level)).epsilon(1e-12));
}

TEST_CASE("Gaussian W1 and one-shot TV bounds") {
    const GaussianChain g(4, 0.5);
    CHECK(gaussian_w1_bound(1.0, g, 0) == doctest::Approx(3.0));
    CHECK(gaussian_w1_bound(1.0, g, 3) == doctest::Approx(3.0 / 8.0));
    const double b = 0.5 / std::sqrt(2.0 * std::numbers::pi * 0.75);
    CHECK(gaussian_one_shot_b(g) == doctest::Approx(b).epsilon(1e-15));
    CHECK(gaussian_tv_bound(1.0, g, 0).needs_step);
    CHECK(gaussian_tv_bound(1.0, g, 0).value == 1.0);
    CHECK(gaussian_tv_bound(1.0, g, 4).value == doctest::Approx(b * 3.0 / 8.0).epsilon(1e-14));
    // The geometric form agrees with the pointwise bound.
    const auto geo = gaussian_tv_geometric(1.0, g);
    for (int t = 1; t < 20; ++t) CHECK(geo.at(t) == doctest::Approx(gaussian_tv_bound(1.0, g, t).value));
}

TEST_CASE("one-shot constant b bounds the row TV distance") {
    const GaussianChain g(1, 0.7);
    for (double d : {1e-3, 0.1, 0.5, 2.0}) {
        CHECK(gaussian_tv_between_rows(State{0.0}, State{d}, g) <= gaussian_one_shot_b(g) * d + 1e-15);
    }
}

TEST_CASE("DM bound is far more conservative than the one-shot bound") {
    const GaussianChain g(10, 0.5);
    const auto cert = gaussian_certificate(g, 4.0);
    const auto opt = optimize_rho(cert);
    const State x0(10, 1.0);
    for (std::int64_t t : {1, 10, 100, 1000, 100000}) {
        CHECK(dm_tv_bound(point_mass_mu_h(x0), cert, opt, t) >=
              gaussian_tv_bound(point_mass_mean_norm(x0), g, t).value);
    }
    CHECK(dm_tv_bound(1.0, cert, 5) == doctest::Approx(dm_tv_bound(1.0, cert, opt, 5)));
}

TEST_CASE("initial-law helpers") {
    CHECK(point_mass_mean_norm(State{3.0, 4.0}) == 5.0);
    CHECK(point_mass_mu_h(State{3.0, 4.0}) == 12.5);
    CHECK(centered_gaussian_mean_norm(1, 1.0) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-14));
    CHECK(centered_gaussian_mean_norm(2, 1.0) == doctest::Approx(std::sqrt(std::numbers::pi / 2.0)).epsilon(1e-14));
    CHECK(gaussian_mu_h(State{1.0, 1.0}, 2.0) == doctest::Approx(5.0));
}

TEST_CASE("BoundCurve CSV") {
    BoundCurve c{"doeblin", Distance::TV, {0, 1}, {1.0, 1.0 / 3.0}};
    CHECK(to_csv(c) == "t,bound,distance,method\n0,1,TV,doeblin\n1,0.33333333333333331,TV,doeblin\n");
}
