#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mcmc_certify/rng.hpp"

namespace certify {

using State = std::vector<double>;

/// Independent Metropolis-Hastings on [0, 1] with a uniform proposal and a
/// continuous positive target density s. Immutable once built; copies share
/// the density.
class ImhChain {
public:
    /// s(x) = 1.
    static ImhChain uniform();
    /// s(x) = 1 + cos(2 pi x) / 2, maximum 1.5 at x = 0 and x = 1.
    static ImhChain cosine();
    /// Wraps a caller-supplied density; it must already integrate to one.
    static ImhChain from_function(std::function<double(double)> s, std::string name);
    /// Piecewise-linear interpolation through (xs, values), renormalized on
    /// [0, 1]. xs must be strictly increasing with xs.front() <= 0 and
    /// xs.back() >= 1.
    static ImhChain from_table(std::vector<double> xs, std::vector<double> values);
    /// Two-column CSV `x,value`; a non-numeric first line is taken as header.
    static ImhChain load_csv(const std::filesystem::path& path);

    double density(double x) const { return (*s_)(x); }
    /// M_s = sup s, located by a 1e5-point grid and golden-section refinement.
    double m_s() const { return m_s_; }
    double argmax() const { return argmax_; }
    const std::string& name() const { return name_; }

    /// a_s(x, x') = min{1, s(x') / s(x)}.
    double acceptance(double x, double x_new) const;
    /// K(x, {x}^c) = integral of a_s(x, .) over [0, 1], by quadrature.
    double move_probability(double x) const;

private:
    ImhChain(std::shared_ptr<const std::function<double(double)>> s, std::string name);

    std::shared_ptr<const std::function<double(double)>> s_;
    std::string name_;
    double m_s_ = 0.0;
    double argmax_ = 0.0;
};

/// X' ~ N_p(alpha x, (1 - alpha^2) I_p); stationary law N_p(0, I_p).
struct GaussianChain {
    int p;
    double alpha;

    GaussianChain(int p, double alpha);
    double innovation_sd() const;
};

/// Random-walk Metropolis-Hastings targeting N_p(0, I_p) with proposal
/// N_p(x, sigma^2 I_p).
struct RwmhChain {
    int p;
    double sigma;

    RwmhChain(int p, double sigma);
};

enum class Family { Imh, Gaussian, Rwmh };

const char* to_string(Family f);

/// Type-erased transition kernel. `density` is the absolutely continuous
/// part k(x, x'); `self_mass` is the atom K(x, {x}). Either may be empty when
/// the family does not expose it.
struct KernelSpec {
    Family family;
    std::variant<ImhChain, GaussianChain, RwmhChain> params;
    int dimension;
    std::function<State(const State&, Rng&)> step;
    std::function<double(const State&, const State&)> density;
    std::function<double(const State&, const State&)> log_density;
    std::function<double(const State&)> self_mass;

    bool absolutely_continuous() const { return family == Family::Gaussian; }
};

KernelSpec make_kernel(const ImhChain& chain);
KernelSpec make_kernel(const GaussianChain& chain);
KernelSpec make_kernel(const RwmhChain& chain);

double imh_step(double x, const ImhChain& chain, Rng& rng);
State gaussian_step(std::span<const double> x, const GaussianChain& chain, Rng& rng);
State rwmh_step(std::span<const double> x, const RwmhChain& chain, Rng& rng);

/// Doeblin constant 1 / M_s of the IMH kernel (minorizing measure pi_s).
double imh_doeblin_epsilon(const ImhChain& chain);

/// Log density of N_p(alpha x, (1 - alpha^2) I_p) at x_new.
double gaussian_transition_log_density(std::span<const double> x, std::span<const double> x_new,
                                       const GaussianChain& chain);
double gaussian_transition_density(std::span<const double> x, std::span<const double> x_new,
                                   const GaussianChain& chain);

/// Exact TV distance between the Gaussian-chain rows at x and y:
/// 1 - 2 F_N(-alpha |x - y| / (2 sqrt(1 - alpha^2))).
double gaussian_tv_between_rows(std::span<const double> x, std::span<const double> y,
                                const GaussianChain& chain);

/// Absolutely continuous part of the RWMH kernel: proposal density times
/// acceptance probability.
double rwmh_transition_density(std::span<const double> x, std::span<const double> x_new,
                               const RwmhChain& chain);

/// RWMH rejection atom at x for p = 1, by quadrature of 1 - integral k(x, .).
double rwmh_self_mass_1d(double x, const RwmhChain& chain);

/// Monte Carlo estimate of K(x, {x}^c) for the RWMH chain in any dimension.
struct MoveEstimate {
    double mean;
    double std_error;
};
MoveEstimate rwmh_move_probability_mc(std::span<const double> x, const RwmhChain& chain,
                                      long replicas, Rng& rng);

/// T(0, {0}^c) = (sigma^2 + 1)^(-p/2).
double rwmh_move_mass_at_origin(const RwmhChain& chain);

double euclidean_distance(std::span<const double> x, std::span<const double> y);
double squared_norm(std::span<const double> x);

}  // namespace certify
