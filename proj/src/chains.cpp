#include "mcmc_certify/chains.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mcmc_certify/error.hpp"
#include "mcmc_certify/numerics.hpp"

namespace certify {

namespace {

constexpr int kDensityGrid = 100000;

void require_dimension(std::span<const double> x, int p, const char* who) {
    if (static_cast<int>(x.size()) != p) {
        throw InvalidArgument(std::string(who) + ": state has dimension " +
                              std::to_string(x.size()) + ", chain expects " + std::to_string(p));
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// ImhChain

ImhChain::ImhChain(std::shared_ptr<const std::function<double(double)>> s, std::string name)
    : s_(std::move(s)), name_(std::move(name)) {
    const auto& f = *s_;
    int best = 0;
    double best_val = -1.0;
    for (int i = 0; i < kDensityGrid; ++i) {
        const double x = static_cast<double>(i) / (kDensityGrid - 1);
        const double v = f(x);
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw InvalidArgument("ImhChain(" + name_ + "): density must be positive and finite, s(" +
                                  std::to_string(x) + ") = " + std::to_string(v));
        }
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    const double h = 1.0 / (kDensityGrid - 1);
    const double lo = std::max(0.0, (best - 1) * h);
    const double hi = std::min(1.0, (best + 1) * h);
    const auto refined = minimize_scalar([&](double x) { return -f(x); }, Interval(lo, hi),
                                         Tolerance{1e-14, 0.0, 200});
    if (-refined.min >= best_val) {
        m_s_ = -refined.min;
        argmax_ = refined.argmin;
    } else {
        m_s_ = best_val;
        argmax_ = best * h;
    }

    const double mass = integrate(f, Interval(0.0, 1.0), Tolerance{1e-12, 0.0, 1000000});
    if (std::abs(mass - 1.0) > 1e-6) {
        throw InvalidArgument("ImhChain(" + name_ + "): density integrates to " +
                              std::to_string(mass) + ", not 1");
    }
}

ImhChain ImhChain::uniform() {
    return ImhChain(std::make_shared<const std::function<double(double)>>([](double) { return 1.0; }),
                    "uniform");
}

ImhChain ImhChain::cosine() {
    return ImhChain(std::make_shared<const std::function<double(double)>>(
                        [](double x) { return 1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * x); }),
                    "cosine");
}

ImhChain ImhChain::from_function(std::function<double(double)> s, std::string name) {
    if (!s) throw InvalidArgument("ImhChain::from_function: empty density");
    return ImhChain(std::make_shared<const std::function<double(double)>>(std::move(s)),
                    std::move(name));
}

ImhChain ImhChain::from_table(std::vector<double> xs, std::vector<double> values) {
    if (xs.size() != values.size() || xs.size() < 2) {
        throw InvalidArgument("ImhChain::from_table: need at least two (x, value) pairs");
    }
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i] > xs[i - 1])) {
            throw InvalidArgument("ImhChain::from_table: x must be strictly increasing");
        }
    }
    if (xs.front() > 0.0 || xs.back() < 1.0) {
        throw InvalidArgument("ImhChain::from_table: x must cover [0, 1]");
    }
    auto interp = [xs, values](double x) {
        const auto it = std::upper_bound(xs.begin(), xs.end(), x);
        if (it == xs.begin()) return values.front();
        if (it == xs.end()) return values.back();
        const auto j = static_cast<std::size_t>(it - xs.begin());
        const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
        return (1.0 - w) * values[j - 1] + w * values[j];
    };

    // Exact integral of the interpolant over [0, 1]: trapezoids between the
    // clipped knots.
    std::vector<double> knots{0.0};
    for (double x : xs) {
        if (x > 0.0 && x < 1.0) knots.push_back(x);
    }
    knots.push_back(1.0);
    double mass = 0.0;
    for (std::size_t i = 1; i < knots.size(); ++i) {
        mass += 0.5 * (interp(knots[i - 1]) + interp(knots[i])) * (knots[i] - knots[i - 1]);
    }
    if (!(mass > 0.0)) throw InvalidArgument("ImhChain::from_table: table has no positive mass");

    return ImhChain(std::make_shared<const std::function<double(double)>>(
                        [interp, mass](double x) { return interp(x) / mass; }),
                    "tabulated");
}

ImhChain ImhChain::load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open density table " + path.string());
    std::vector<double> xs, values;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        double x = 0.0, v = 0.0;
        if (!(fields >> x >> v)) {
            if (line_no == 1) continue;  // header
            throw InvalidArgument(path.string() + ":" + std::to_string(line_no) +
                                  ": expected two numeric columns");
        }
        xs.push_back(x);
        values.push_back(v);
    }
    return from_table(std::move(xs), std::move(values));
}

double ImhChain::acceptance(double x, double x_new) const {
    return std::min(1.0, density(x_new) / density(x));
}

double ImhChain::move_probability(double x) const {
    return integrate([&](double xp) { return acceptance(x, xp); }, Interval(0.0, 1.0),
                     Tolerance{1e-12, 0.0, 1000000});
}

// ---------------------------------------------------------------------------
// Gaussian and RWMH records

GaussianChain::GaussianChain(int p_, double alpha_) : p(p_), alpha(alpha_) {
    if (p < 1) throw InvalidArgument("GaussianChain: p must be >= 1");
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw InvalidArgument("GaussianChain: alpha must lie in [0, 1), got " + std::to_string(alpha));
    }
}

double GaussianChain::innovation_sd() const {
    return std::sqrt(1.0 - alpha * alpha);
}

RwmhChain::RwmhChain(int p_, double sigma_) : p(p_), sigma(sigma_) {
    if (p < 1) throw InvalidArgument("RwmhChain: p must be >= 1");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw InvalidArgument("RwmhChain: sigma must be positive, got " + std::to_string(sigma));
    }
}

const char* to_string(Family f) {
    switch (f) {
        case Family::Imh: return "imh";
        case Family::Gaussian: return "gaussian";
        case Family::Rwmh: return "rwmh";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Steps

double imh_step(double x, const ImhChain& chain, Rng& rng) {
    const double proposal = rng.uniform();
    const double u = rng.uniform();
    return (u * chain.density(x) < chain.density(proposal)) ? proposal : x;
}

State gaussian_step(std::span<const double> x, const GaussianChain& chain, Rng& rng) {
    require_dimension(x, chain.p, "gaussian_step");
    const double sd = chain.innovation_sd();
    State out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = chain.alpha * x[i] + sd * rng.normal();
    return out;
}

State rwmh_step(std::span<const double> x, const RwmhChain& chain, Rng& rng) {
    require_dimension(x, chain.p, "rwmh_step");
    State proposal(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) proposal[i] = x[i] + chain.sigma * rng.normal();
    const double log_ratio = -0.5 * (squared_norm(proposal) - squared_norm(x));
    const double u = rng.uniform();
    if (std::log(u) < log_ratio) return proposal;
    return State(x.begin(), x.end());
}

// ---------------------------------------------------------------------------
// Closed forms

double imh_doeblin_epsilon(const ImhChain& chain) {
    return std::min(1.0, 1.0 / chain.m_s());
}

double gaussian_transition_density(std::span<const double> x, std::span<const double> x_new,
                                   const GaussianChain& chain) {
    return std::exp(gaussian_transition_log_density(x, x_new, chain));
}

double gaussian_transition_log_density(std::span<const double> x, std::span<const double> x_new,
                                       const GaussianChain& chain) {
    require_dimension(x, chain.p, "gaussian_transition_density");
    require_dimension(x_new, chain.p, "gaussian_transition_density");
    const double var = 1.0 - chain.alpha * chain.alpha;
    double q = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x_new[i] - chain.alpha * x[i];
        q += d * d;
    }
    return -0.5 * q / var - 0.5 * chain.p * std::log(2.0 * std::numbers::pi * var);
}

double gaussian_tv_between_rows(std::span<const double> x, std::span<const double> y,
                                const GaussianChain& chain) {
    require_dimension(x, chain.p, "gaussian_tv_between_rows");
    require_dimension(y, chain.p, "gaussian_tv_between_rows");
    if (chain.alpha == 0.0) return 0.0;
    const double dist = euclidean_distance(x, y);
    // 1 - 2 F(-z) = erf(z / sqrt 2), which keeps precision for small z.
    const double z = chain.alpha * dist / (2.0 * chain.innovation_sd());
    return std::erf(z / std::numbers::sqrt2);
}

double rwmh_transition_density(std::span<const double> x, std::span<const double> x_new,
                               const RwmhChain& chain) {
    require_dimension(x, chain.p, "rwmh_transition_density");
    require_dimension(x_new, chain.p, "rwmh_transition_density");
    const double s2 = chain.sigma * chain.sigma;
    const double jump = [&] {
        double q = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) q += (x_new[i] - x[i]) * (x_new[i] - x[i]);
        return q;
    }();
    const double log_accept = std::min(0.0, -0.5 * (squared_norm(x_new) - squared_norm(x)));
    return std::exp(-0.5 * jump / s2 - 0.5 * chain.p * std::log(2.0 * std::numbers::pi * s2) +
                    log_accept);
}

double rwmh_self_mass_1d(double x, const RwmhChain& chain) {
    if (chain.p != 1) throw InvalidArgument("rwmh_self_mass_1d: requires p = 1");
    const double half = 12.0 * chain.sigma;
    const double xs[1] = {x};
    const double moved = integrate(
        [&](double xp) {
            const double ys[1] = {xp};
            return rwmh_transition_density(xs, ys, chain);
        },
        Interval(x - half, x + half), Tolerance{1e-13, 0.0, 1000000});
    return std::clamp(1.0 - moved, 0.0, 1.0);
}

MoveEstimate rwmh_move_probability_mc(std::span<const double> x, const RwmhChain& chain,
                                      long replicas, Rng& rng) {
    require_dimension(x, chain.p, "rwmh_move_probability_mc");
    if (replicas < 2) throw InvalidArgument("rwmh_move_probability_mc: need >= 2 replicas");
    long moved = 0;
    for (long i = 0; i < replicas; ++i) {
        const State next = rwmh_step(x, chain, rng);
        if (!std::equal(next.begin(), next.end(), x.begin())) ++moved;
    }
    const double n = static_cast<double>(replicas);
    const double mean = moved / n;
    return {mean, std::sqrt(mean * (1.0 - mean) / n)};
}

double rwmh_move_mass_at_origin(const RwmhChain& chain) {
    return std::pow(chain.sigma * chain.sigma + 1.0, -0.5 * chain.p);
}

double squared_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

double euclidean_distance(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgument("euclidean_distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Kernel specs

KernelSpec make_kernel(const ImhChain& chain) {
    KernelSpec k{Family::Imh, chain, 1, {}, {}, {}, {}};
    k.step = [chain](const State& x, Rng& rng) { return State{imh_step(x.at(0), chain, rng)}; };
    k.density = [chain](const State& x, const State& y) {
        const double v = y.at(0);
        return (v < 0.0 || v > 1.0) ? 0.0 : chain.acceptance(x.at(0), v);
    };
    k.self_mass = [chain](const State& x) { return 1.0 - chain.move_probability(x.at(0)); };
    return k;
}

KernelSpec make_kernel(const GaussianChain& chain) {
    KernelSpec k{Family::Gaussian, chain, chain.p, {}, {}, {}, {}};
    k.step = [chain](const State& x, Rng& rng) { return gaussian_step(x, chain, rng); };
    k.density = [chain](const State& x, const State& y) {
        return gaussian_transition_density(x, y, chain);
    };
    k.log_density = [chain](const State& x, const State& y) {
        return gaussian_transition_log_density(x, y, chain);
    };
    k.self_mass = [](const State&) { return 0.0; };
    return k;
}

KernelSpec make_kernel(const RwmhChain& chain) {
    KernelSpec k{Family::Rwmh, chain, chain.p, {}, {}, {}, {}};
    k.step = [chain](const State& x, Rng& rng) { return rwmh_step(x, chain, rng); };
    k.density = [chain](const State& x, const State& y) {
        return rwmh_transition_density(x, y, chain);
    };
    if (chain.p == 1) {
        k.self_mass = [chain](const State& x) { return rwmh_self_mass_1d(x.at(0), chain); };
    }
    return k;
}

}  // namespace certify
