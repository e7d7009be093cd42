#include "mcmc_certify/coupling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "mcmc_certify/error.hpp"
#include "mcmc_certify/format.hpp"

namespace certify {

namespace {

constexpr long kRejectionCap = 100000000;

[[noreturn]] void rejection_exhausted(const char* who) {
    throw Error(std::string(who) + ": rejection sampler exceeded its iteration cap");
}

}  // namespace

// ---------------------------------------------------------------------------
// Minorizations

Minorization imh_doeblin_minorization(const ImhChain& chain) {
    const double m_s = chain.m_s();
    Minorization m;
    m.eps = imh_doeblin_epsilon(chain);
    m.sample_nu = [chain, m_s](Rng& rng) {
        for (long i = 0; i < kRejectionCap; ++i) {
            const double u = rng.uniform();
            if (rng.uniform() * m_s < chain.density(u)) return State{u};
        }
        rejection_exhausted("imh nu sampler");
    };
    // K(x, dx') = a(x, x') dx' + r(x) delta_x and eps nu(dx') = s(x') / M_s dx'.
    // Propose from K(x, .); keep the atom, keep a continuous draw x' with
    // probability 1 - s(x') / (M_s a(x, x')).
    m.sample_residual = [chain, m_s](const State& x, Rng& rng) {
        const double sx = chain.density(x.at(0));
        for (long i = 0; i < kRejectionCap; ++i) {
            const double proposal = rng.uniform();
            const double s_prop = chain.density(proposal);
            if (!(rng.uniform() * sx < s_prop)) return State{x[0]};
            const double accept = std::min(1.0, s_prop / sx);
            if (rng.uniform() * accept * m_s >= s_prop) return State{proposal};
        }
        rejection_exhausted("imh residual sampler");
    };
    return m;
}

double gaussian_inf_density(std::span<const double> x, const GaussianChain& chain,
                            double delta_level) {
    const double var = 1.0 - chain.alpha * chain.alpha;
    const double shift = chain.alpha * std::sqrt(chain.p * delta_level);
    const double r = std::sqrt(squared_norm(x));
    return std::exp(-0.5 * chain.p * std::log(2.0 * std::numbers::pi * var) -
                    (r + shift) * (r + shift) / (2.0 * var));
}

Minorization gaussian_small_set_minorization(const GaussianChain& chain,
                                             const DriftMinorizationCertificate& cert) {
    cert.validate();
    const int p = chain.p;
    const double alpha = chain.alpha;
    const double delta = cert.delta_level;
    const double var = 1.0 - alpha * alpha;
    const double shift = alpha * std::sqrt(p * delta);

    constexpr int kTable = 10000;
    const double u_mode = 0.5 * (-shift + std::sqrt(shift * shift + 4.0 * var * (p - 1)));
    const double upper = u_mode + std::sqrt(2.0 * var * std::log(1e16));
    auto radii = std::make_shared<std::vector<double>>(kTable);
    auto cdf = std::make_shared<std::vector<double>>(kTable);
    double prev = 0.0;
    for (int i = 0; i < kTable; ++i) {
        const double u = upper * i / (kTable - 1);
        const double f = gaussian_minorization_radial_integrand(u, p, alpha, delta);
        (*radii)[i] = u;
        (*cdf)[i] = (i == 0) ? 0.0 : (*cdf)[i - 1] + 0.5 * (prev + f) * (upper / (kTable - 1));
        prev = f;
    }
    const double total = cdf->back();
    if (!(total > 0.0)) throw Error("gaussian_small_set_minorization: radial table has no mass");
    for (double& c : *cdf) c /= total;

    Minorization m;
    m.eps = cert.eps;
    m.sample_nu = [radii, cdf, p](Rng& rng) {
        const double target = rng.uniform();
        const auto it = std::upper_bound(cdf->begin(), cdf->end(), target);
        const auto j = std::clamp<std::ptrdiff_t>(it - cdf->begin(), 1, kTable - 1);
        const double c0 = (*cdf)[j - 1], c1 = (*cdf)[j];
        const double w = (c1 > c0) ? (target - c0) / (c1 - c0) : 0.0;
        const double radius = (*radii)[j - 1] + w * ((*radii)[j] - (*radii)[j - 1]);
        State dir(p);
        double norm = 0.0;
        do {
            for (double& v : dir) v = rng.normal();
            norm = std::sqrt(squared_norm(dir));
        } while (norm == 0.0);
        for (double& v : dir) v *= radius / norm;
        return dir;
    };
    m.sample_residual = [chain, delta](const State& x, Rng& rng) {
        for (long i = 0; i < kRejectionCap; ++i) {
            State w = gaussian_step(x, chain, rng);
            const double log_ratio = std::log(gaussian_inf_density(w, chain, delta)) -
                                     gaussian_transition_log_density(x, w, chain);
            if (std::log(rng.uniform()) >= log_ratio) return w;
        }
        rejection_exhausted("gaussian residual sampler");
    };
    m.in_small_set = [p, delta](const State& x) { return squared_norm(x) / p <= delta; };
    return m;
}

// ---------------------------------------------------------------------------
// Strategies

const char* to_string(CouplingKind k) {
    switch (k) {
        case CouplingKind::Independent: return "independent";
        case CouplingKind::DoeblinSplit: return "doeblin_split";
        case CouplingKind::Crn: return "crn";
        case CouplingKind::Maximal: return "maximal";
        case CouplingKind::DmSplit: return "dm_split";
    }
    return "unknown";
}

CouplingStrategy CouplingStrategy::independent() { return {CouplingKind::Independent, {}, {}}; }
CouplingStrategy CouplingStrategy::crn() { return {CouplingKind::Crn, {}, {}}; }
CouplingStrategy CouplingStrategy::maximal() { return {CouplingKind::Maximal, {}, {}}; }

CouplingStrategy CouplingStrategy::doeblin_split(Minorization m) {
    if (!(m.eps > 0.0 && m.eps <= 1.0)) {
        throw InvalidArgument("doeblin_split: eps must lie in (0, 1]");
    }
    return {CouplingKind::DoeblinSplit, std::move(m), {}};
}

CouplingStrategy CouplingStrategy::dm_split(DriftMinorizationCertificate cert, Minorization m) {
    cert.validate();
    return {CouplingKind::DmSplit, std::move(m), std::move(cert)};
}

// ---------------------------------------------------------------------------
// Steps

StatePair independent_coupled_step(const StatePair& pair, const KernelSpec& kernel, Rng& rng) {
    if (pair.first == pair.second) {
        State next = kernel.step(pair.first, rng);
        return {next, next};
    }
    State x = kernel.step(pair.first, rng);
    State y = kernel.step(pair.second, rng);
    return {std::move(x), std::move(y)};
}

StatePair doeblin_coupled_step(const StatePair& pair, const KernelSpec& kernel, double eps,
                               const NuSampler& nu, const ResidualSampler& residual, Rng& rng) {
    if (pair.first == pair.second) {
        State next = kernel.step(pair.first, rng);
        return {next, next};
    }
    if (rng.uniform() < eps) {
        State z = nu(rng);
        return {z, z};
    }
    State x = residual(pair.first, rng);
    State y = residual(pair.second, rng);
    return {std::move(x), std::move(y)};
}

StatePair crn_coupled_step(const StatePair& pair, const GaussianChain& chain, Rng& rng) {
    const auto& [x, y] = pair;
    if (static_cast<int>(x.size()) != chain.p || static_cast<int>(y.size()) != chain.p) {
        throw InvalidArgument("crn_coupled_step: dimension mismatch");
    }
    const double sd = chain.innovation_sd();
    State nx(x.size()), ny(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double noise = sd * rng.normal();
        nx[i] = chain.alpha * x[i] + noise;
        ny[i] = chain.alpha * y[i] + noise;
    }
    return {std::move(nx), std::move(ny)};
}

StatePair maximal_coupled_step(const StatePair& pair, const KernelSpec& kernel, Rng& rng) {
    if (!kernel.absolutely_continuous() || !(kernel.density || kernel.log_density)) {
        throw InvalidArgument(std::string("maximal_coupled_step: kernel family ") +
                              to_string(kernel.family) + " has no transition density");
    }
    const auto& [x, y] = pair;
    if (x == y) {
        State next = kernel.step(x, rng);
        return {next, next};
    }
    auto log_k = [&](const State& from, const State& to) {
        return kernel.log_density ? kernel.log_density(from, to) : std::log(kernel.density(from, to));
    };
    State w = kernel.step(x, rng);
    if (std::log(rng.uniform()) + log_k(x, w) <= log_k(y, w)) return {w, w};
    for (long i = 0; i < kRejectionCap; ++i) {
        State v = kernel.step(y, rng);
        if (std::log(rng.uniform()) + log_k(y, v) > log_k(x, v)) return {std::move(w), std::move(v)};
    }
    rejection_exhausted("maximal_coupled_step");
}

StatePair dm_coupled_step(const StatePair& pair, const KernelSpec& kernel,
                          const DriftMinorizationCertificate& cert, const Minorization& minorization,
                          Rng& rng) {
    (void)cert;
    if (pair.first == pair.second) {
        State next = kernel.step(pair.first, rng);
        return {next, next};
    }
    const bool both_small = !minorization.in_small_set ||
                            (minorization.in_small_set(pair.first) &&
                             minorization.in_small_set(pair.second));
    if (both_small) {
        return doeblin_coupled_step(pair, kernel, minorization.eps, minorization.sample_nu,
                                    minorization.sample_residual, rng);
    }
    return independent_coupled_step(pair, kernel, rng);
}

StatePair dm_coupled_step(const StatePair& pair, const KernelSpec& kernel,
                          const DriftMinorizationCertificate& cert, Rng& rng) {
    if (kernel.family != Family::Gaussian) {
        throw InvalidArgument(std::string("dm_coupled_step: no nu sampler for family ") +
                              to_string(kernel.family));
    }
    const auto m = gaussian_small_set_minorization(std::get<GaussianChain>(kernel.params), cert);
    return dm_coupled_step(pair, kernel, cert, m, rng);
}

// ---------------------------------------------------------------------------
// Harness

namespace {

constexpr long kChunk = 512;

struct Welford {
    long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }

    void merge(const Welford& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const long total = n + o.n;
        const double delta = o.mean - mean;
        mean += delta * static_cast<double>(o.n) / static_cast<double>(total);
        m2 += o.m2 + delta * delta * static_cast<double>(n) * static_cast<double>(o.n) /
                         static_cast<double>(total);
        n = total;
    }
};

struct ChunkStats {
    std::vector<long> unequal;
    std::vector<Welford> psi;
};

/// Fills unequal[t] and psi[t] for t = 0..horizon for one replica.
using ReplicaFn = std::function<void(Rng&, std::vector<char>&, std::vector<double>&)>;

CouplingEstimate run_replicas(int horizon, long replicas, const Rng& rng, int threads,
                              const ReplicaFn& replica) {
    if (horizon < 1) throw InvalidArgument("simulate: horizon must be >= 1");
    if (replicas < 1) throw InvalidArgument("simulate: replicas must be >= 1");
    const long n_chunks = (replicas + kChunk - 1) / kChunk;
    const auto len = static_cast<std::size_t>(horizon) + 1;
    std::vector<ChunkStats> chunks(static_cast<std::size_t>(n_chunks));

    std::atomic<long> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        std::vector<char> unequal(len);
        std::vector<double> psi(len);
        for (long c = next++; c < n_chunks; c = next++) {
            ChunkStats stats{std::vector<long>(len, 0), std::vector<Welford>(len)};
            try {
                const long end = std::min(replicas, (c + 1) * kChunk);
                for (long i = c * kChunk; i < end; ++i) {
                    Rng local = rng.substream(static_cast<std::uint64_t>(i));
                    replica(local, unequal, psi);
                    for (std::size_t t = 0; t < len; ++t) {
                        stats.unequal[t] += unequal[t] ? 1 : 0;
                        stats.psi[t].add(psi[t]);
                    }
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n_chunks;
                return;
            }
            chunks[static_cast<std::size_t>(c)] = std::move(stats);
        }
    };

    const int n_threads = std::clamp(threads, 1, static_cast<int>(std::max<long>(n_chunks, 1)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<long> unequal(len, 0);
    std::vector<Welford> psi(len);
    for (const auto& chunk : chunks) {
        for (std::size_t t = 0; t < len; ++t) {
            unequal[t] += chunk.unequal[t];
            psi[t].merge(chunk.psi[t]);
        }
    }

    CouplingEstimate est;
    est.horizon = horizon;
    est.replicas = replicas;
    const double n = static_cast<double>(replicas);
    for (std::size_t t = 0; t < len; ++t) {
        const double p = static_cast<double>(unequal[t]) / n;
        est.p_unequal.push_back(p);
        est.se_unequal.push_back(std::sqrt(p * (1.0 - p) / n));
        est.mean_psi.push_back(psi[t].mean);
        const double var = replicas > 1 ? std::max(0.0, psi[t].m2 / (n - 1.0)) : 0.0;
        est.se_psi.push_back(std::sqrt(var / n));
    }
    return est;
}

double default_psi(const State& x, const State& y) {
    return euclidean_distance(x, y);
}

}  // namespace

std::string CouplingEstimate::to_csv() const {
    std::ostringstream out;
    out << "t,p_unequal,se_unequal,mean_psi,se_psi\n";
    for (std::size_t t = 0; t < p_unequal.size(); ++t) {
        out << t << ',' << format_number(p_unequal[t]) << ',' << format_number(se_unequal[t]) << ','
            << format_number(mean_psi[t]) << ',' << format_number(se_psi[t]) << '\n';
    }
    return out.str();
}

CouplingEstimate simulate_coupling(const CouplingStrategy& strategy, const KernelSpec& kernel,
                                   const PairInit& init, int horizon, long replicas, const Rng& rng,
                                   const SimulationOptions& options) {
    const PairMetric psi = options.psi ? options.psi : PairMetric(default_psi);

    if (strategy.kind == CouplingKind::Crn) {
        if (kernel.family != Family::Gaussian) {
            throw InvalidArgument("simulate_coupling: CRN coupling requires the Gaussian chain");
        }
        const auto chain = std::get<GaussianChain>(kernel.params);
        const double sd = chain.innovation_sd();
        const bool euclid = !options.psi;
        // The pair is carried as (X, D = Y - X). Under CRN the shared noise
        // cancels in D, so D' = alpha D holds exactly rather than through the
        // difference of two rounded states.
        return run_replicas(horizon, replicas, rng, options.threads,
                            [&](Rng& r, std::vector<char>& unequal, std::vector<double>& out) {
                                auto [x, y] = init(r);
                                State d(x.size());
                                for (std::size_t i = 0; i < x.size(); ++i) d[i] = y[i] - x[i];
                                auto record = [&](std::size_t t) {
                                    const bool differ = std::any_of(d.begin(), d.end(),
                                                                    [](double v) { return v != 0.0; });
                                    unequal[t] = differ;
                                    if (euclid) {
                                        out[t] = std::sqrt(squared_norm(d));
                                    } else {
                                        State yy(x.size());
                                        for (std::size_t i = 0; i < x.size(); ++i) yy[i] = x[i] + d[i];
                                        out[t] = differ ? psi(x, yy) : psi(x, x);
                                    }
                                };
                                record(0);
                                for (int t = 1; t <= horizon; ++t) {
                                    for (std::size_t i = 0; i < x.size(); ++i) {
                                        x[i] = chain.alpha * x[i] + sd * r.normal();
                                        d[i] *= chain.alpha;
                                    }
                                    record(static_cast<std::size_t>(t));
                                }
                            });
    }

    std::function<StatePair(const StatePair&, Rng&)> step;
    switch (strategy.kind) {
        case CouplingKind::Independent:
            step = [&](const StatePair& s, Rng& r) { return independent_coupled_step(s, kernel, r); };
            break;
        case CouplingKind::DoeblinSplit: {
            if (!strategy.minorization) throw InvalidArgument("doeblin_split: missing minorization");
            const auto& m = *strategy.minorization;
            step = [&](const StatePair& s, Rng& r) {
                return doeblin_coupled_step(s, kernel, m.eps, m.sample_nu, m.sample_residual, r);
            };
            break;
        }
        case CouplingKind::Maximal:
            if (!kernel.absolutely_continuous()) {
                throw InvalidArgument("simulate_coupling: maximal coupling needs a kernel density");
            }
            step = [&](const StatePair& s, Rng& r) { return maximal_coupled_step(s, kernel, r); };
            break;
        case CouplingKind::DmSplit: {
            if (!strategy.minorization || !strategy.certificate) {
                throw InvalidArgument("dm_split: missing certificate or minorization");
            }
            const auto& m = *strategy.minorization;
            const auto& cert = *strategy.certificate;
            step = [&](const StatePair& s, Rng& r) { return dm_coupled_step(s, kernel, cert, m, r); };
            break;
        }
        case CouplingKind::Crn: break;
    }

    return run_replicas(horizon, replicas, rng, options.threads,
                        [&](Rng& r, std::vector<char>& unequal, std::vector<double>& out) {
                            StatePair pair = init(r);
                            auto record = [&](std::size_t t) {
                                unequal[t] = pair.first != pair.second;
                                out[t] = psi(pair.first, pair.second);
                            };
                            record(0);
                            for (int t = 1; t <= horizon; ++t) {
                                pair = step(pair, r);
                                record(static_cast<std::size_t>(t));
                            }
                        });
}

CouplingEstimate simulate_crn_one_shot(const GaussianChain& chain, const PairInit& init, int horizon,
                                       long replicas, const Rng& rng,
                                       const SimulationOptions& options) {
    const KernelSpec kernel = make_kernel(chain);
    const double sd = chain.innovation_sd();
    return run_replicas(horizon, replicas, rng, options.threads,
                        [&](Rng& r, std::vector<char>& unequal, std::vector<double>& out) {
                            auto [x, y] = init(r);
                            State d(x.size());
                            for (std::size_t i = 0; i < x.size(); ++i) d[i] = y[i] - x[i];
                            unequal[0] = std::any_of(d.begin(), d.end(), [](double v) { return v != 0.0; });
                            out[0] = std::sqrt(squared_norm(d));
                            State yy(x.size());
                            for (int t = 1; t <= horizon; ++t) {
                                for (std::size_t i = 0; i < x.size(); ++i) yy[i] = x[i] + d[i];
                                const auto [xm, ym] = maximal_coupled_step({x, yy}, kernel, r);
                                unequal[static_cast<std::size_t>(t)] = xm != ym;
                                for (std::size_t i = 0; i < x.size(); ++i) {
                                    x[i] = chain.alpha * x[i] + sd * r.normal();
                                    d[i] *= chain.alpha;
                                }
                                out[static_cast<std::size_t>(t)] = std::sqrt(squared_norm(d));
                            }
                        });
}

PairMetric drift_pair_metric(double r) {
    if (!(r > 0.0 && r < 1.0)) throw InvalidArgument("drift_pair_metric: r must lie in (0, 1)");
    return [r](const State& x, const State& y) {
        if (x == y) return 0.0;
        const double p = static_cast<double>(x.size());
        return std::pow(squared_norm(x) / p + squared_norm(y) / p + 1.0, 1.0 - r);
    };
}

PairInit fixed_pair(State x0, State y0) {
    return [x0 = std::move(x0), y0 = std::move(y0)](Rng&) { return StatePair{x0, y0}; };
}

PairInit point_vs_gaussian_stationary(State x0) {
    return [x0 = std::move(x0)](Rng& rng) {
        State y(x0.size());
        for (double& v : y) v = rng.normal();
        return StatePair{x0, std::move(y)};
    };
}

PairInit point_vs_imh_stationary(double x0, const ImhChain& chain) {
    const auto nu = imh_doeblin_minorization(chain).sample_nu;
    return [x0, nu](Rng& rng) { return StatePair{State{x0}, nu(rng)}; };
}

}  // namespace certify
