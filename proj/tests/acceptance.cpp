// Acceptance checks: one PASS/FAIL line per criterion. Every tolerance and
// time budget is fixed below. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mcmc_certify/bounds.hpp"
#include "mcmc_certify/config.hpp"
#include "mcmc_certify/coupling.hpp"
#include "mcmc_certify/report.hpp"
#include "mcmc_certify/runner.hpp"
#include "mcmc_certify/spectral.hpp"
#include "support.hpp"

using namespace certify;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double budget_seconds, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < budget_seconds;
    const bool pass = out.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s C%02d %s: %s [%.2fs of %.0fs]%s\n", pass ? "PASS" : "FAIL", id, title, out.detail.c_str(),
                secs, budget_seconds, in_time ? "" : " (over budget)");
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

int threads() {
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

int main() {
    // Pinned tolerances.
    constexpr double kEpsTarget = 2.28e-7, kEpsRel = 0.02;
    constexpr double kRhoTarget = 6e-8, kRhoFactor = 2.0;
    constexpr double kImhExactTol = 1e-9, kImhGridTol = 1e-3;
    constexpr double kGaussGridTol = 0.01;
    constexpr double kSandwichSe = 3.0;
    constexpr double kCrnRel = 1e-12;
    constexpr double kCheegerSlack = 1e-10, kTwoStateTol = 1e-12;
    constexpr double kIsoRel = 1e-12;
    constexpr double kMcSe = 4.0;
    constexpr double kSlopeRel = 0.10;
    constexpr double kL2Slack = 1e-10;

    criterion(1, "minorization constant eps(p=10, alpha=0.5, Delta=4)", 1.0, [&] {
        const double eps = gaussian_minorization_epsilon(10, 0.5, 4.0);
        const double rel = std::abs(eps / kEpsTarget - 1.0);
        return Outcome{rel <= kEpsRel, fmt("eps=%.6e target=%.2e rel.err=%.4f (tol 0.02)", eps, kEpsTarget, rel)};
    });

    criterion(2, "optimized drift-minorization rate", 1.0, [&] {
        const auto opt = optimize_rho(gaussian_certificate(GaussianChain(10, 0.5), 4.0));
        const double ratio = opt.one_minus_rho / kRhoTarget;
        const bool ok = ratio >= 1.0 / kRhoFactor && ratio <= kRhoFactor;
        return Outcome{ok, fmt("1-rho=%.4e at r*=%.9f, ratio to 6e-8 = %.3f (allowed [0.5, 2])", opt.one_minus_rho,
                               opt.r_star, ratio)};
    });

    criterion(3, "IMH exact norm 1/3 (cosine density)", 10.0, [&] {
        const auto chain = ImhChain::cosine();
        const double upper = doeblin_norm_upper(imh_doeblin_epsilon(chain));
        const double lower = 1.0 - chain.move_probability(chain.argmax());
        const double grid = operator_norm(discretize_imh(chain, 400));
        const double third = 1.0 / 3.0;
        const bool ok = std::abs(upper - third) <= kImhExactTol && std::abs(lower - third) <= kImhExactTol &&
                        std::abs(grid - third) <= kImhGridTol;
        return Outcome{ok, fmt("upper=%.12f lazy-limit lower=%.12f grid(n=400)=%.6f", upper, lower, grid)};
    });

    criterion(4, "Gaussian exact norm alpha (p=1 grid, n=80)", 10.0, [&] {
        bool ok = true;
        double worst_norm = 0.0, worst_ray = 0.0;
        for (double alpha : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const auto grid = discretize_gaussian1d(GaussianChain(1, alpha), 80);
            const double norm = operator_norm(grid);
            const double ray = rayleigh_lower(grid, grid.points());
            worst_norm = std::max(worst_norm, std::abs(norm - alpha));
            worst_ray = std::max(worst_ray, alpha - ray);
            ok = ok && std::abs(norm - alpha) <= kGaussGridTol && ray >= alpha - kGaussGridTol;
        }
        return Outcome{ok, fmt("max|norm-alpha|=%.3e, max(alpha-rayleigh)=%.3e (tol 0.01)", worst_norm, worst_ray)};
    });

    criterion(5, "coupling sandwich (1e5 replicas, t=1..15)", 180.0, [&] {
        constexpr int horizon = 15;
        constexpr long replicas = 100000;
        SimulationOptions opts;
        opts.threads = threads();

        const auto imh = ImhChain::cosine();
        const double eps = imh_doeblin_epsilon(imh);
        const auto doeblin = simulate_coupling(CouplingStrategy::doeblin_split(imh_doeblin_minorization(imh)),
                                               make_kernel(imh), point_vs_imh_stationary(0.5, imh), horizon,
                                               replicas, Rng(501), opts);
        const GaussianChain g(3, 0.5);
        const State x0{1.0, 1.0, 1.0};
        const double m = point_mass_mean_norm(x0);
        const auto crn = simulate_coupling(CouplingStrategy::crn(), make_kernel(g), point_vs_gaussian_stationary(x0),
                                           horizon, replicas, Rng(502), opts);
        const auto one_shot =
            simulate_crn_one_shot(g, point_vs_gaussian_stationary(x0), horizon, replicas, Rng(503), opts);

        double worst = -1e300;  // max over checks of (estimate - 3 se - bound)
        for (int t = 1; t <= horizon; ++t) {
            worst = std::max(worst, doeblin.p_unequal[t] - kSandwichSe * doeblin.se_unequal[t] -
                                        doeblin_tv_bound(eps, t));
            worst = std::max(worst, crn.mean_psi[t] - kSandwichSe * crn.se_psi[t] - gaussian_w1_bound(m, g, t));
            worst = std::max(worst, one_shot.p_unequal[t] - kSandwichSe * one_shot.se_unequal[t] -
                                        gaussian_tv_bound(m, g, t).value);
        }
        return Outcome{worst <= 0.0, fmt("max(estimate - 3se - bound) = %.3e over Doeblin TV, CRN W1, one-shot TV",
                                         worst)};
    });

    criterion(6, "CRN exact contraction (t <= 30)", 300.0, [&] {
        const GaussianChain g(3, 0.5);
        const State x0{1.0, -2.0, 0.5}, y0{-1.0, 0.0, 3.0};
        const double d0 = euclidean_distance(x0, y0);
        const auto est = simulate_coupling(CouplingStrategy::crn(), make_kernel(g), fixed_pair(x0, y0), 30, 1000,
                                           Rng(6));
        double worst = 0.0, worst_se = 0.0;
        for (int t = 0; t <= 30; ++t) {
            const double expect = std::pow(g.alpha, t) * d0;
            worst = std::max(worst, std::abs(est.mean_psi[t] / expect - 1.0));
            worst_se = std::max(worst_se, est.se_psi[t] / expect);
        }
        return Outcome{worst <= kCrnRel && worst_se <= kCrnRel,
                       fmt("max rel.err=%.2e, max se/value=%.2e (tol 1e-12)", worst, worst_se)};
    });

    criterion(7, "Cheeger sandwich on 50 random reversible chains", 60.0, [&] {
        Rng rng(7007);
        double worst = -1e300;
        for (int trial = 0; trial < 50; ++trial) {
            const auto grid = testing_support::random_reversible_chain(2 + trial % 11, rng);
            if (!grid.reversible()) return Outcome{false, "generated chain failed detailed balance"};
            const double phi = conductance_exact(grid).phi;
            const double gap = spectral_gap(grid);
            const auto b = cheeger_bracket(phi);
            worst = std::max({worst, b.lower - gap, gap - b.upper});
        }
        const double p = 0.2, q = 0.3;
        const auto two = testing_support::two_state(p, q);
        const double e_phi = std::abs(conductance_exact(two).phi - (p + q));
        const double e_gap = std::abs(spectral_gap(two) - (p + q));
        const bool ok = worst <= kCheegerSlack && e_phi <= kTwoStateTol && e_gap <= kTwoStateTol;
        return Outcome{ok, fmt("max violation=%.2e; two-state |phi-(p+q)|=%.1e |G-(p+q)|=%.1e", worst, e_phi, e_gap)};
    });

    criterion(8, "isoperimetric upper bound validity and closed form", 1.0, [&] {
        double min_margin = 1e300, worst_rel = 0.0;
        for (int i = 1; i <= 99; ++i) {
            const double a = i / 100.0;
            const double pipeline = gaussian_norm_upper_iso(GaussianChain(1, a));
            min_margin = std::min(min_margin, pipeline - a);
            worst_rel = std::max(worst_rel, std::abs(pipeline / gaussian_norm_upper_iso_closed_form(a) - 1.0));
        }
        return Outcome{min_margin >= 0.0 && worst_rel <= kIsoRel,
                       fmt("min(bound - alpha)=%.3e, max rel.diff to closed form=%.2e", min_margin, worst_rel)};
    });

    criterion(9, "RWMH lower bounds", 60.0, [&] {
        const RwmhChain chain(10, 1.0);
        const double lower = rwmh_norm_lower(chain);
        Rng rng(909);
        const auto mc = rwmh_move_probability_mc(State(10, 0.0), chain, 1000000, rng);
        const double exact = rwmh_move_mass_at_origin(chain);
        const double z = std::abs(mc.mean - exact) / mc.std_error;
        bool bracket = true;
        for (int p : {100, 1000, 10000}) {
            const double v = sigma_star(p) * sigma_star(p);
            bracket = bracket && v >= 1.0 / p && v <= 2.0 * std::log(p) / p;
        }
        const bool ok = lower == 0.96875 && z <= kMcSe && bracket;
        return Outcome{ok, fmt("lower=%.17g, MC move prob z=%.2f (tol 4), sigma_p^2 bracket ", lower, z) +
                                (bracket ? "holds" : "fails")};
    });

    criterion(10, "mixing time grows like log(p)/(-log alpha)", 1.0, [&] {
        std::string detail;
        bool ok = true;
        for (double alpha : {0.5, 0.9}) {
            std::vector<double> xs, ys;
            for (int p : {10, 100, 1000, 10000}) {
                const GaussianChain g(p, alpha);
                const auto t = mixing_time(gaussian_tv_geometric(static_cast<double>(p), g), 0.01);
                if (!t) return Outcome{false, "mixing time overflow"};
                xs.push_back(std::log(static_cast<double>(p)));
                ys.push_back(static_cast<double>(*t));
            }
            const double mx = (xs[0] + xs[1] + xs[2] + xs[3]) / 4.0, my = (ys[0] + ys[1] + ys[2] + ys[3]) / 4.0;
            double sxy = 0.0, sxx = 0.0;
            for (int i = 0; i < 4; ++i) {
                sxy += (xs[i] - mx) * (ys[i] - my);
                sxx += (xs[i] - mx) * (xs[i] - mx);
            }
            const double ratio = (sxy / sxx) * (-std::log(alpha));
            ok = ok && std::abs(ratio - 1.0) <= kSlopeRel;
            detail += fmt("alpha=%.1f slope*(-log alpha)=%.4f; ", alpha, ratio);
        }
        return Outcome{ok, detail + "tol 0.10"};
    });

    criterion(11, "DM bound dominates one-shot TV bound (t up to 1e6)", 1.0, [&] {
        const GaussianChain g(10, 0.5);
        const auto cert = gaussian_certificate(g, 4.0);
        const auto opt = optimize_rho(cert);
        const State x0(10, 1.0);
        const double mu_h = point_mass_mu_h(x0), m = point_mass_mean_norm(x0);
        double worst = 1e300;
        int count = 0;
        std::int64_t prev = 0;
        for (int k = 0; k <= 600; ++k) {
            const auto t = static_cast<std::int64_t>(std::llround(std::pow(10.0, k / 100.0)));
            if (t == prev) continue;
            prev = t;
            ++count;
            worst = std::min(worst, dm_tv_bound(mu_h, cert, opt, t) - gaussian_tv_bound(m, g, t).value);
        }
        return Outcome{worst >= 0.0, fmt("min(dm - one-shot)=%.3e over %.0f log-spaced t", worst, static_cast<double>(count))};
    });

    criterion(12, "L2 contraction and 2 TV <= L2 on the IMH grid", 30.0, [&] {
        const auto grid = discretize_imh(ImhChain::cosine(), 400);
        const double norm = operator_norm(grid);
        Rng rng(1212);
        double worst = 1e300;
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> mu(400);
            double total = 0.0;
            for (double& v : mu) {
                v = std::pow(rng.uniform(), 3.0 + trial);
                total += v;
            }
            for (double& v : mu) v /= total;
            const double d0 = l2_distance(grid, mu);
            auto cur = mu;
            for (int t = 0; t <= 10; ++t) {
                if (t > 0) cur = propagate(grid, cur, 1);
                const double l2 = l2_distance(grid, cur);
                worst = std::min({worst, d0 * std::pow(norm, t) - l2, l2 - 2.0 * tv_distance(grid, cur)});
            }
        }
        return Outcome{worst >= -kL2Slack, fmt("min slack=%.3e (tol -1e-10)", worst)};
    });

    criterion(13, "end-to-end determinism of the reproduction config", 300.0, [&] {
        const std::filesystem::path config_path = std::filesystem::path(MCMC_CERTIFY_SOURCE_DIR) / "configs" /
                                                  "gaussian_p10.json";
        const auto config = load_config(config_path);
        const auto base = std::filesystem::temp_directory_path() / "mcmc_certify_acceptance";
        std::filesystem::remove_all(base);
        const auto a = emit(run(config), config.output, base / "a");
        const auto b = emit(run(config), config.output, base / "b");
        int csvs = 0;
        bool same = a.size() == b.size();
        for (std::size_t i = 0; same && i < a.size(); ++i) {
            if (a[i].extension() != ".csv") continue;
            ++csvs;
            same = a[i].filename() == b[i].filename() && slurp(a[i]) == slurp(b[i]);
        }
        return Outcome{same && csvs > 0, fmt("%.0f CSV files compared, ", static_cast<double>(csvs)) +
                                             (same ? "byte-identical" : "DIFFER")};
    });

    std::printf("%d of 13 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
