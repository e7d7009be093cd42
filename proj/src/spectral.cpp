#include "mcmc_certify/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "mcmc_certify/error.hpp"
#include "mcmc_certify/numerics.hpp"

namespace certify {

namespace {

constexpr double kSumTol = 1e-10;
constexpr double kStationaryTol = 1e-9;
constexpr double kBalanceRelTol = 1e-8;

void require_reversible(const GridChain& grid, const char* who) {
    if (!grid.reversible()) {
        throw InvalidArgument(std::string(who) + ": grid chain is not reversible");
    }
}

Eigen::VectorXd sqrt_weights(const GridChain& grid) {
    Eigen::VectorXd u(grid.size());
    for (int i = 0; i < grid.size(); ++i) u(i) = std::sqrt(grid.weights()[i]);
    return u;
}

/// Householder reflection Q with Q sqrt(pi) = e_1 (Q is symmetric and
/// orthogonal).
Eigen::MatrixXd reflector(const Eigen::VectorXd& u) {
    const int n = static_cast<int>(u.size());
    Eigen::VectorXd v = u / u.norm();
    v(0) -= 1.0;
    const double vv = v.squaredNorm();
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(n, n);
    if (vv > 1e-300) q -= (2.0 / vv) * v * v.transpose();
    return q;
}

struct Restriction {
    Eigen::MatrixXd q;
    Eigen::MatrixXd block;  // (n-1) x (n-1)
};

/// Q S Q with S = D^(1/2) K D^(-1/2), minus its first row and column. Since
/// sqrt(pi) is a left and right fixed vector of S, the remaining block is S on
/// the complement of sqrt(pi).
Restriction restrict_to_complement(const GridChain& grid) {
    const int n = grid.size();
    const Eigen::VectorXd u = sqrt_weights(grid);
    Eigen::MatrixXd s = grid.matrix();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) s(i, j) *= u(i) / u(j);
    }
    Restriction r;
    r.q = reflector(u);
    const Eigen::MatrixXd b = r.q * s * r.q;
    r.block = b.bottomRightCorner(n - 1, n - 1);
    return r;
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> symmetric_eigen(const GridChain& grid,
                                                               Restriction* out = nullptr) {
    Restriction r = restrict_to_complement(grid);
    const Eigen::MatrixXd sym = 0.5 * (r.block + r.block.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) throw Error("symmetric eigensolver failed");
    if (out) *out = std::move(r);
    return solver;
}

std::vector<double> normalized(std::vector<double> w) {
    double total = 0.0;
    for (double v : w) total += v;
    for (double& v : w) v /= total;
    return w;
}

}  // namespace

// ---------------------------------------------------------------------------
// GridChain

GridChain GridChain::make(std::vector<double> points, std::vector<double> weights,
                          Eigen::MatrixXd matrix) {
    const auto n = static_cast<Eigen::Index>(weights.size());
    if (n < 2) throw InvalidArgument("GridChain: need at least two states");
    if (static_cast<Eigen::Index>(points.size()) != n || matrix.rows() != n || matrix.cols() != n) {
        throw InvalidArgument("GridChain: points, weights and matrix sizes disagree");
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("GridChain: weights must be positive");
        total += w;
    }
    if (std::abs(total - 1.0) > kSumTol) throw InvalidArgument("GridChain: weights do not sum to 1");
    for (Eigen::Index i = 0; i < n; ++i) {
        double row = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double k = matrix(i, j);
            if (!(k >= 0.0) || !std::isfinite(k)) {
                throw InvalidArgument("GridChain: matrix entries must be nonnegative");
            }
            row += k;
        }
        if (std::abs(row - 1.0) > kSumTol) {
            throw InvalidArgument("GridChain: row " + std::to_string(i) + " does not sum to 1");
        }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        double col = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) col += weights[static_cast<std::size_t>(i)] * matrix(i, j);
        if (std::abs(col - weights[static_cast<std::size_t>(j)]) > kStationaryTol) {
            throw InvalidArgument("GridChain: weights are not stationary for the matrix");
        }
    }
    bool reversible = true;
    for (Eigen::Index i = 0; i < n && reversible; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double a = weights[static_cast<std::size_t>(i)] * matrix(i, j);
            const double b = weights[static_cast<std::size_t>(j)] * matrix(j, i);
            if (std::abs(a - b) > kBalanceRelTol * std::max(a, b)) {
                reversible = false;
                break;
            }
        }
    }
    GridChain g;
    g.points_ = std::move(points);
    g.weights_ = std::move(weights);
    g.matrix_ = std::move(matrix);
    g.reversible_ = reversible;
    return g;
}

// ---------------------------------------------------------------------------
// Discretizations

GridChain discretize_imh(const ImhChain& chain, int n) {
    if (n < 2) throw InvalidArgument("discretize_imh: n must be >= 2");
    std::vector<double> xs(static_cast<std::size_t>(n)), s(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        xs[i] = (i + 0.5) / n;
        s[i] = chain.density(xs[i]);
    }
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            k(i, j) = std::min(1.0, s[j] / s[i]) / n;
            off += k(i, j);
        }
        k(i, i) = 1.0 - off;
    }
    GridChain grid = GridChain::make(std::move(xs), normalized(s), std::move(k));
    if (!grid.reversible()) throw Error("discretize_imh: detailed balance check failed");
    return grid;
}

GridChain discretize_gaussian1d(const GaussianChain& chain, int n) {
    if (chain.p != 1) throw InvalidArgument("discretize_gaussian1d: requires p = 1");
    if (n < 2) throw InvalidArgument("discretize_gaussian1d: n must be >= 2");

    // Golub-Welsch for the probabilists' Hermite recurrence.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) jacobi(k - 1, k) = jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("discretize_gaussian1d: node computation failed");

    std::vector<double> nodes(static_cast<std::size_t>(n)), log_w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double x = es.eigenvalues()(i);
        // Christoffel weights 1 / sum_k psi_k(x)^2 with orthonormal psi_k.
        double prev = 0.0, cur = 1.0, sum = 1.0;
        for (int k = 0; k + 1 < n; ++k) {
            const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) /
                                std::sqrt(static_cast<double>(k + 1));
            prev = cur;
            cur = next;
            sum += cur * cur;
        }
        nodes[i] = x;
        log_w[i] = -std::log(sum);
    }

    const double a = chain.alpha;
    const double v = 1.0 - a * a;
    Eigen::MatrixXd joint(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double xi = nodes[i], xj = nodes[j];
            // Mehler kernel k(x, y) / phi(y), symmetric in (x, y).
            const double log_m =
                -0.5 * std::log(v) - (a * a * xi * xi - 2.0 * a * xi * xj + a * a * xj * xj) / (2.0 * v);
            joint(i, j) = joint(j, i) = std::exp(log_w[i] + log_w[j] + log_m);
        }
    }
    std::vector<double> mass(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) mass[i] = joint.row(i).sum();
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i) k.row(i) = joint.row(i) / mass[i];
    return GridChain::make(std::move(nodes), normalized(mass), std::move(k));
}

GridChain discretize_rwmh1d(const RwmhChain& chain, int n, double half_width) {
    if (chain.p != 1) throw InvalidArgument("discretize_rwmh1d: requires p = 1");
    if (n < 2) throw InvalidArgument("discretize_rwmh1d: n must be >= 2");
    if (!(half_width > 0.0)) throw InvalidArgument("discretize_rwmh1d: half_width must be positive");
    const double h = 2.0 * half_width / (n - 1);
    std::vector<double> xs(static_cast<std::size_t>(n)), phi(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        xs[i] = -half_width + i * h;
        phi[i] = normal_pdf(xs[i]);
    }
    const double sig = chain.sigma;
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    double max_off = 0.0;
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            k(i, j) = h * normal_pdf((xs[j] - xs[i]) / sig) / sig * std::min(1.0, phi[j] / phi[i]);
            off += k(i, j);
        }
        max_off = std::max(max_off, off);
    }
    // A common scale keeps detailed balance if a Riemann row sum exceeds one.
    const double scale = max_off > 1.0 ? 1.0 / max_off : 1.0;
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            k(i, j) *= scale;
            off += k(i, j);
        }
        k(i, i) = 1.0 - off;
    }
    return GridChain::make(std::move(xs), normalized(phi), std::move(k));
}

// ---------------------------------------------------------------------------
// Exact spectral quantities

double operator_norm(const GridChain& grid) {
    if (grid.reversible()) {
        const auto solver = symmetric_eigen(grid);
        const auto& ev = solver.eigenvalues();
        return std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
    }
    const Restriction r = restrict_to_complement(grid);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(r.block);
    return svd.singularValues()(0);
}

double spectral_gap(const GridChain& grid) {
    require_reversible(grid, "spectral_gap");
    return 1.0 - symmetric_eigen(grid).eigenvalues().maxCoeff();
}

double min_eigenvalue(const GridChain& grid) {
    require_reversible(grid, "min_eigenvalue");
    return symmetric_eigen(grid).eigenvalues().minCoeff();
}

std::vector<double> top_eigenfunction(const GridChain& grid) {
    require_reversible(grid, "top_eigenfunction");
    Restriction r;
    const auto solver = symmetric_eigen(grid, &r);
    const auto& ev = solver.eigenvalues();
    Eigen::Index top = 0;
    ev.cwiseAbs().maxCoeff(&top);
    const int n = grid.size();
    Eigen::VectorXd padded = Eigen::VectorXd::Zero(n);
    padded.tail(n - 1) = solver.eigenvectors().col(top);
    const Eigen::VectorXd g = r.q * padded;
    std::vector<double> f(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) f[i] = g(i) / std::sqrt(grid.weights()[i]);
    return f;
}

// ---------------------------------------------------------------------------
// Conductance

double flow_ratio(const GridChain& grid, const std::vector<bool>& in_set) {
    const int n = grid.size();
    if (static_cast<int>(in_set.size()) != n) throw InvalidArgument("flow_ratio: subset size mismatch");
    const auto& pi = grid.weights();
    const auto& k = grid.matrix();
    double flow = 0.0, mass = 0.0, rest = 0.0;
    for (int i = 0; i < n; ++i) {
        if (!in_set[i]) {
            rest += pi[i];
            continue;
        }
        mass += pi[i];
        for (int j = 0; j < n; ++j) {
            if (!in_set[j]) flow += pi[i] * k(i, j);
        }
    }
    if (mass == 0.0 || rest == 0.0) throw InvalidArgument("flow_ratio: subset must be nontrivial");
    return flow / (mass * rest);
}

Conductance conductance_exact(const GridChain& grid) {
    const int n = grid.size();
    if (n > 24) throw InvalidArgument("conductance_exact: n must be <= 24 for enumeration");
    const auto& pi = grid.weights();
    const auto& k = grid.matrix();
    double total = 0.0;
    for (double w : pi) total += w;

    std::vector<bool> in(static_cast<std::size_t>(n), false);
    double flow = 0.0, mass = 0.0;
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_code = 0;
    const std::uint32_t count = std::uint32_t{1} << (n - 1);
    // Gray-code walk: each step toggles one state, updating the flow in O(n).
    for (std::uint32_t step = 1; step < count; ++step) {
        const std::uint32_t code = step ^ (step >> 1);
        const int b = std::countr_zero(step);
        double into_b = 0.0, out_of_b = 0.0;
        for (int i = 0; i < n; ++i) {
            if (i == b) continue;
            if (in[i]) into_b += pi[i] * k(i, b);
            else out_of_b += k(b, i);
        }
        if (!in[b]) {
            flow += pi[b] * out_of_b - into_b;
            mass += pi[b];
            in[b] = true;
        } else {
            flow += into_b - pi[b] * out_of_b;
            mass -= pi[b];
            in[b] = false;
        }
        const double phi = flow / (mass * (total - mass));
        if (phi < best) {
            best = phi;
            best_code = code;
        }
    }
    Conductance out;
    out.argmin_set.assign(static_cast<std::size_t>(n), false);
    for (int i = 0; i + 1 < n; ++i) out.argmin_set[i] = (best_code >> i) & 1u;
    out.phi = flow_ratio(grid, out.argmin_set);
    return out;
}

GapBracket cheeger_bracket(double phi) {
    if (!(phi >= 0.0)) throw InvalidArgument("cheeger_bracket: phi must be >= 0");
    return {phi * phi / 8.0, phi};
}

// ---------------------------------------------------------------------------
// Upper bounds

double doeblin_norm_upper(double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) throw InvalidArgument("doeblin_norm_upper: eps must lie in (0, 1]");
    return 1.0 - eps;
}

double iso_kappa(double delta, double sigma) {
    if (!(delta > 0.0) || !(sigma > 0.0)) throw InvalidArgument("iso_kappa: delta and sigma must be positive");
    const double u = delta / sigma;
    return 4.0 * u * normal_pdf(u);
}

double isogap_conductance_lower(double eps, double kappa, double a) {
    if (!(eps > 0.0 && eps <= 1.0)) throw InvalidArgument("isogap_conductance_lower: eps must lie in (0, 1]");
    if (!(kappa >= 0.0)) throw InvalidArgument("isogap_conductance_lower: kappa must be nonnegative");
    if (!(a > 0.0 && a <= 1.0)) throw InvalidArgument("isogap_conductance_lower: a must lie in (0, 1]");
    return eps * std::min((1.0 - a) / 2.0, a * a * kappa / 4.0);
}

double gaussian_norm_upper_iso(const GaussianChain& chain) {
    const double alpha = chain.alpha;
    if (alpha == 0.0) return 0.0;
    const double delta = std::sqrt(1.0 - alpha * alpha) / alpha;
    const double eps = 2.0 * normal_cdf(-0.5);
    const double phi = isogap_conductance_lower(eps, iso_kappa(delta, 1.0), 0.5);
    const GapBracket gap = cheeger_bracket(phi);
    // K_{p,alpha} = K_{p,sqrt(alpha)}^2 is positive semi-definite, so the norm is 1 - G.
    return 1.0 - gap.lower;
}

double gaussian_norm_upper_iso_closed_form(double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in [0, 1)");
    if (alpha == 0.0) return 0.0;
    const double r = (1.0 - alpha * alpha) / (alpha * alpha);
    const double f = normal_cdf(-0.5);
    return 1.0 - r / (64.0 * std::numbers::pi) * std::exp(-r) * f * f;
}

IsoOptimum gaussian_norm_upper_iso_optimized(const GaussianChain& chain) {
    const double alpha = chain.alpha;
    if (alpha == 0.0) return {0.5, 1.0, 1.0, iso_kappa(1.0, 1.0), 0.0, 0.0};
    const double s = std::sqrt(1.0 - alpha * alpha);
    // For fixed delta the best a balances (1 - a) / 2 = a^2 kappa / 4.
    auto evaluate = [&](double delta) {
        IsoOptimum o;
        o.delta = delta;
        o.eps = 2.0 * normal_cdf(-alpha * delta / (2.0 * s));
        o.kappa = iso_kappa(delta, 1.0);
        o.a = 2.0 / (std::sqrt(1.0 + 2.0 * o.kappa) + 1.0);
        o.phi = isogap_conductance_lower(o.eps, o.kappa, o.a);
        o.norm_upper = 1.0 - cheeger_bracket(o.phi).lower;
        return o;
    };
    const auto best = minimize_scalar([&](double d) { return -evaluate(d).phi; }, Interval(1e-6, 20.0));
    return evaluate(best.argmin);
}

// ---------------------------------------------------------------------------
// Lower bounds

double rayleigh_lower(const GridChain& grid, const std::vector<double>& f) {
    const int n = grid.size();
    if (static_cast<int>(f.size()) != n) throw InvalidArgument("rayleigh_lower: size mismatch");
    const auto& pi = grid.weights();
    double mean = 0.0, scale = 0.0;
    for (int i = 0; i < n; ++i) {
        mean += pi[i] * f[i];
        scale += pi[i] * f[i] * f[i];
    }
    Eigen::VectorXd c(n);
    for (int i = 0; i < n; ++i) c(i) = f[i] - mean;
    const Eigen::VectorXd kc = grid.matrix() * c;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
        num += pi[i] * c(i) * kc(i);
        den += pi[i] * c(i) * c(i);
    }
    if (!(den > 1e-24 * scale) || den == 0.0) throw InvalidArgument("rayleigh_lower: f is constant");
    return num / den;
}

double set_lower(const GridChain& grid, const std::vector<bool>& in_set) {
    return 1.0 - flow_ratio(grid, in_set);
}

double lazy_lower(double move_mass, double mass_a) {
    if (!(move_mass >= 0.0 && move_mass <= 1.0)) throw InvalidArgument("lazy_lower: move_mass must lie in [0, 1]");
    if (!(mass_a > 0.0 && mass_a < 1.0)) throw InvalidArgument("lazy_lower: mass_a must lie in (0, 1)");
    return 1.0 - move_mass / (1.0 - mass_a);
}

double rwmh_norm_lower(const RwmhChain& chain) {
    const double v = chain.sigma * chain.sigma;
    const double m = std::min(v / 2.0, std::pow(v + 1.0, -0.5 * chain.p));
    return std::max(0.0, 1.0 - m);
}

double sigma_star(int p) {
    if (p < 1) throw InvalidArgument("sigma_star: p must be >= 1");
    const auto g = [p](double v) { return v / 2.0 - std::pow(v + 1.0, -0.5 * p); };
    return std::sqrt(find_root(g, Interval(1e-12, 10.0), Tolerance{1e-15, 0.0, 10000}));
}

double asymptotic_variance_factor(double gap) {
    if (!(gap > 0.0 && gap <= 2.0)) throw InvalidArgument("asymptotic_variance_factor: gap must lie in (0, 2]");
    return (2.0 - gap) / gap;
}

// ---------------------------------------------------------------------------
// Brackets

void NormBracket::validate() const {
    // Slack covers quadrature error in the lazy-point limit.
    constexpr double slack = 1e-8;
    if (!(lower >= -slack && upper <= 1.0 + slack && lower <= upper + slack)) {
        throw Error("NormBracket: need 0 <= lower <= upper <= 1");
    }
}

NormBracket imh_norm_bracket(const ImhChain& chain) {
    NormBracket b;
    b.upper = doeblin_norm_upper(imh_doeblin_epsilon(chain));
    b.lower = std::max(0.0, 1.0 - chain.move_probability(chain.argmax()));
    b.provenance = {"doeblin_norm_upper", "lazy_lower_limit"};
    b.validate();
    return b;
}

NormBracket gaussian_norm_bracket(const GaussianChain& chain) {
    NormBracket b;
    b.lower = chain.alpha;
    b.upper = gaussian_norm_upper_iso(chain);
    b.provenance = {"rayleigh_linear", "gaussian_norm_upper_iso"};
    b.validate();
    return b;
}

NormBracket rwmh_norm_bracket(const RwmhChain& chain) {
    NormBracket b;
    b.lower = rwmh_norm_lower(chain);
    b.upper = 1.0;
    b.provenance = {"rwmh_norm_lower", "trivial"};
    b.validate();
    return b;
}

// ---------------------------------------------------------------------------
// Distances on grids

std::vector<double> propagate(const GridChain& grid, const std::vector<double>& mu, int t) {
    const int n = grid.size();
    if (static_cast<int>(mu.size()) != n) throw InvalidArgument("propagate: size mismatch");
    if (t < 0) throw InvalidArgument("propagate: t must be >= 0");
    Eigen::RowVectorXd row = Eigen::Map<const Eigen::RowVectorXd>(mu.data(), n);
    for (int s = 0; s < t; ++s) row = row * grid.matrix();
    return {row.data(), row.data() + n};
}

double l2_distance(const GridChain& grid, const std::vector<double>& mu) {
    const auto& pi = grid.weights();
    if (mu.size() != pi.size()) throw InvalidArgument("l2_distance: size mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) {
        const double r = mu[i] / pi[i] - 1.0;
        sum += pi[i] * r * r;
    }
    return std::sqrt(sum);
}

double tv_distance(const GridChain& grid, const std::vector<double>& mu) {
    const auto& pi = grid.weights();
    if (mu.size() != pi.size()) throw InvalidArgument("tv_distance: size mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) sum += std::abs(mu[i] - pi[i]);
    return 0.5 * sum;
}

}  // namespace certify
