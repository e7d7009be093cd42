#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcmc_certify/bounds.hpp"
#include "mcmc_certify/chains.hpp"
#include "mcmc_certify/rng.hpp"

namespace certify {

using StatePair = std::pair<State, State>;
using NuSampler = std::function<State(Rng&)>;
using ResidualSampler = std::function<State(const State&, Rng&)>;

/// K(x, .) >= eps nu(.) for x in the small set. An empty `in_small_set` means
/// the whole space (Doeblin's condition). `sample_residual(x, rng)` draws from
/// (K(x, .) - eps nu) / (1 - eps).
struct Minorization {
    double eps;
    NuSampler sample_nu;
    ResidualSampler sample_residual;
    std::function<bool(const State&)> in_small_set;
};

/// IMH: eps = 1 / M_s and nu = pi_s. nu is sampled by rejection from the
/// uniform proposal; the residual by rejection against K(x, .) including the
/// rejection atom at x.
Minorization imh_doeblin_minorization(const ImhChain& chain);

/// Gaussian chain on S = {|x|^2 / p <= delta}: nu has density q / eps with
/// q(x') = inf_{x in S} k(x, x'). The radius of a nu draw comes from inverse
/// CDF on a 1e4-point table; its direction is uniform on the sphere.
Minorization gaussian_small_set_minorization(const GaussianChain& chain,
                                             const DriftMinorizationCertificate& cert);

/// q(x') = (2 pi (1 - a^2))^(-p/2) exp(-(|x'| + a sqrt(p delta))^2 / (2 (1 - a^2))).
double gaussian_inf_density(std::span<const double> x, const GaussianChain& chain,
                            double delta_level);

enum class CouplingKind { Independent, DoeblinSplit, Crn, Maximal, DmSplit };

const char* to_string(CouplingKind k);

struct CouplingStrategy {
    CouplingKind kind;
    std::optional<Minorization> minorization;
    std::optional<DriftMinorizationCertificate> certificate;

    static CouplingStrategy independent();
    static CouplingStrategy doeblin_split(Minorization m);
    static CouplingStrategy crn();
    static CouplingStrategy maximal();
    static CouplingStrategy dm_split(DriftMinorizationCertificate cert, Minorization m);
};

// --- Single coupled steps ---------------------------------------------------
//
// Every step moves an equal pair together through one kernel draw, so
// coalescence is absorbing and detected by exact equality.

StatePair independent_coupled_step(const StatePair& pair, const KernelSpec& kernel, Rng& rng);

StatePair doeblin_coupled_step(const StatePair& pair, const KernelSpec& kernel, double eps,
                               const NuSampler& nu, const ResidualSampler& residual, Rng& rng);

/// One shared normal vector drives both coordinates; |X' - Y'| = alpha |x - y|.
StatePair crn_coupled_step(const StatePair& pair, const GaussianChain& chain, Rng& rng);

/// Maximal coupling of K(x, .) and K(y, .) by rejection; requires an
/// absolutely continuous kernel with a density.
StatePair maximal_coupled_step(const StatePair& pair, const KernelSpec& kernel, Rng& rng);

/// Doeblin split when both states lie in the small set, independent moves
/// otherwise.
StatePair dm_coupled_step(const StatePair& pair, const KernelSpec& kernel,
                          const DriftMinorizationCertificate& cert, const Minorization& minorization,
                          Rng& rng);

/// Convenience overload that builds the minorization for the kernel's family.
/// Only the Gaussian family has a nu sampler.
StatePair dm_coupled_step(const StatePair& pair, const KernelSpec& kernel,
                          const DriftMinorizationCertificate& cert, Rng& rng);

// --- Monte Carlo harness ----------------------------------------------------

/// Per-time estimates of P(X_t != Y_t) and E psi(X_t, Y_t) over independent
/// replicas, indexed t = 0..horizon.
struct CouplingEstimate {
    int horizon = 0;
    long replicas = 0;
    std::vector<double> p_unequal;
    std::vector<double> se_unequal;
    std::vector<double> mean_psi;
    std::vector<double> se_psi;

    /// `t,p_unequal,se_unequal,mean_psi,se_psi` with a header row.
    std::string to_csv() const;
};

using PairInit = std::function<StatePair(Rng&)>;
using PairMetric = std::function<double(const State&, const State&)>;

struct SimulationOptions {
    /// Worker threads; results do not depend on this value.
    int threads = 1;
    /// Defaults to the Euclidean (absolute, for p = 1) distance.
    PairMetric psi;
};

/// Replica i draws from `rng.substream(i)`. Replicas are reduced in fixed
/// chunks and in index order, so the output is identical for any thread count.
CouplingEstimate simulate_coupling(const CouplingStrategy& strategy, const KernelSpec& kernel,
                                   const PairInit& init, int horizon, long replicas, const Rng& rng,
                                   const SimulationOptions& options = {});

/// One-shot pipeline on the Gaussian chain: for each t >= 1, t - 1 CRN steps
/// followed by one maximal-coupling step. p_unequal[t] estimates the TV
/// upper bound at time t; mean_psi[t] is the CRN distance at time t.
CouplingEstimate simulate_crn_one_shot(const GaussianChain& chain, const PairInit& init, int horizon,
                                       long replicas, const Rng& rng,
                                       const SimulationOptions& options = {});

/// D(x, y) = 1{x != y} (h(x) + h(y) + 1)^(1 - r) with h(x) = |x|^2 / p.
PairMetric drift_pair_metric(double r);

/// Pair initializers.
PairInit fixed_pair(State x0, State y0);
/// X0 = x0, Y0 ~ N_p(0, I_p) (the Gaussian stationary law).
PairInit point_vs_gaussian_stationary(State x0);
/// X0 = x0, Y0 ~ pi_s.
PairInit point_vs_imh_stationary(double x0, const ImhChain& chain);

}  // namespace certify
