#include "mcmc_certify/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "mcmc_certify/error.hpp"

namespace certify {

void Tolerance::validate() const {
    if (!(abs_tol >= 0.0) || !(rel_tol >= 0.0) || !(abs_tol + rel_tol > 0.0)) {
        throw InvalidArgument("Tolerance: need abs_tol, rel_tol >= 0 with abs_tol + rel_tol > 0");
    }
    if (max_iter < 1) {
        throw InvalidArgument("Tolerance: max_iter must be >= 1");
    }
}

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo < hi)) {
        throw InvalidArgument("Interval: need lo < hi, got [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]");
    }
}

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

namespace {

struct Panel {
    double a, b;
    double fa, fm, fb;
    double whole;
    double tol;
};

double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

}  // namespace

double integrate(const ScalarFn& f, Interval domain, Tolerance tol) {
    tol.validate();

    constexpr int kInitialPanels = 16;
    const double h = domain.width() / kInitialPanels;

    std::vector<Panel> stack;
    stack.reserve(256);
    double seed_estimate = 0.0;
    double f_left = f(domain.lo);
    for (int i = 0; i < kInitialPanels; ++i) {
        const double a = domain.lo + i * h;
        const double b = (i + 1 == kInitialPanels) ? domain.hi : a + h;
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        const double fb = f(b);
        const double s = simpson(a, b, f_left, fm, fb);
        seed_estimate += s;
        stack.push_back({a, b, f_left, fm, fb, s, 0.0});
        f_left = fb;
    }

    const double target = std::max(tol.abs_tol, tol.rel_tol * std::abs(seed_estimate));
    for (auto& p : stack) p.tol = target / kInitialPanels;
    std::reverse(stack.begin(), stack.end());

    double accepted = 0.0;
    double compensation = 0.0;  // Kahan
    auto accumulate = [&](double v) {
        const double y = v - compensation;
        const double t = accepted + y;
        compensation = (t - accepted) - y;
        accepted = t;
    };

    int bisections = 0;
    constexpr double kEps = std::numeric_limits<double>::epsilon();
    while (!stack.empty()) {
        const Panel p = stack.back();
        stack.pop_back();

        const double m = 0.5 * (p.a + p.b);
        const double lm = 0.5 * (p.a + m);
        const double rm = 0.5 * (m + p.b);
        const double flm = f(lm);
        const double frm = f(rm);
        const double left = simpson(p.a, m, p.fa, flm, p.fm);
        const double right = simpson(m, p.b, p.fm, frm, p.fb);
        const double delta = left + right - p.whole;

        const bool resolved = std::abs(delta) <= 15.0 * p.tol;
        const bool exhausted =
            (p.b - p.a) <= 8.0 * kEps * std::max({std::abs(p.a), std::abs(p.b), 1.0});
        if (resolved || exhausted) {
            accumulate(left + right + delta / 15.0);
            continue;
        }

        if (++bisections > tol.max_iter) {
            double partial = accepted + left + right;
            for (const auto& q : stack) partial += q.whole;
            throw ConvergenceError("integrate: no convergence within " +
                                       std::to_string(tol.max_iter) + " subdivisions",
                                   partial);
        }
        stack.push_back({m, p.b, p.fm, frm, p.fb, right, 0.5 * p.tol});
        stack.push_back({p.a, m, p.fa, flm, p.fm, left, 0.5 * p.tol});
    }
    return accepted;
}

double find_root(const ScalarFn& g, Interval bracket, Tolerance tol) {
    tol.validate();
    double lo = bracket.lo;
    double hi = bracket.hi;
    double g_lo = g(lo);
    const double g_hi = g(hi);
    if (g_lo == 0.0) return lo;
    if (g_hi == 0.0) return hi;
    if (!(g_lo * g_hi < 0.0)) {
        throw InvalidArgument("find_root: bracket does not straddle a sign change");
    }
    double mid = 0.5 * (lo + hi);
    for (int iter = 0; iter < tol.max_iter; ++iter) {
        mid = 0.5 * (lo + hi);
        const double g_mid = g(mid);
        if (std::abs(g_mid) <= tol.abs_tol || (hi - lo) <= tol.abs_tol) break;
        if ((g_mid < 0.0) == (g_lo < 0.0)) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
        if (mid == lo && mid == hi) break;
    }
    return mid;
}

ScalarMinimum minimize_scalar(const ScalarFn& g, Interval domain, Tolerance tol) {
    tol.validate();
    constexpr int kGrid = 1000;
    const double step = domain.width() / (kGrid - 1);

    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kGrid; ++i) {
        const double x = (i + 1 == kGrid) ? domain.hi : domain.lo + i * step;
        const double v = g(x);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    auto grid_point = [&](int i) {
        return (i + 1 == kGrid) ? domain.hi : domain.lo + i * step;
    };
    ScalarMinimum result{grid_point(best), best_val};

    double a = grid_point(std::max(best - 1, 0));
    double b = grid_point(std::min(best + 1, kGrid - 1));
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double gc = g(c);
    double gd = g(d);
    for (int iter = 0; iter < tol.max_iter; ++iter) {
        if ((b - a) <= tol.abs_tol + tol.rel_tol * std::abs(0.5 * (a + b))) break;
        if (gc < gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    const double x = (gc < gd) ? c : d;
    const double v = std::min(gc, gd);
    if (v < result.min) result = {x, v};
    return result;
}

}  // namespace certify
