#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcmc_certify/chains.hpp"

namespace certify {

/// Finite-state kernel on a 1-d grid with stationary weights. Immutable
/// after construction. `reversible` is computed from detailed balance.
class GridChain {
public:
    /// Validates: weights positive and summing to 1 within 1e-10, matrix
    /// nonnegative with rows summing to 1 within 1e-10, and weights stationary
    /// within 1e-9. Sets `reversible` when pi_i K_ij = pi_j K_ji to 1e-8
    /// relative.
    static GridChain make(std::vector<double> points, std::vector<double> weights,
                          Eigen::MatrixXd matrix);

    int size() const { return static_cast<int>(weights_.size()); }
    const std::vector<double>& points() const { return points_; }
    const std::vector<double>& weights() const { return weights_; }
    const Eigen::MatrixXd& matrix() const { return matrix_; }
    bool reversible() const { return reversible_; }

private:
    GridChain() = default;

    std::vector<double> points_;
    std::vector<double> weights_;
    Eigen::MatrixXd matrix_;
    bool reversible_ = false;
};

/// Midpoint grid on [0, 1]; K_ij = a_s(x_i, x_j) / n off the diagonal.
GridChain discretize_imh(const ImhChain& chain, int n);

/// Gauss-Hermite nodes for N(0, 1). K_ij is proportional to
/// w_j k(x_i, x_j) / phi(x_j), which is symmetric up to w_i w_j, so the
/// row-normalized matrix is reversible with pi_i proportional to the row
/// mass. Requires p = 1.
GridChain discretize_gaussian1d(const GaussianChain& chain, int n);

/// Uniform grid on [-half_width, half_width] for the p = 1 RWMH chain;
/// off-diagonal entries are h q(x_i, x_j) a(x_i, x_j), the diagonal holds the
/// rejection mass.
GridChain discretize_rwmh1d(const RwmhChain& chain, int n, double half_width = 8.0);

/// ||K||_2 on L2_0(pi): largest singular value of D^(1/2) K D^(-1/2) on the
/// orthogonal complement of sqrt(pi).
double operator_norm(const GridChain& grid);

/// 1 - lambda_max with lambda_max the largest signed eigenvalue on the
/// complement of sqrt(pi). Reversible grids only.
double spectral_gap(const GridChain& grid);

/// Smallest eigenvalue on the complement of sqrt(pi). Reversible grids only.
double min_eigenvalue(const GridChain& grid);

/// Eigenfunction (in L2(pi) coordinates) for the eigenvalue of largest
/// modulus on the complement of sqrt(pi). Reversible grids only.
std::vector<double> top_eigenfunction(const GridChain& grid);

/// phi_K(A) = sum_{i in A} pi_i sum_{j not in A} K_ij / (pi(A) pi(A^c)).
double flow_ratio(const GridChain& grid, const std::vector<bool>& in_set);

struct Conductance {
    double phi;
    std::vector<bool> argmin_set;
};

/// Exhaustive minimum of flow_ratio over nontrivial subsets; n <= 24.
/// Subsets containing the last state are skipped since phi(A) = phi(A^c)
/// whenever pi is stationary.
Conductance conductance_exact(const GridChain& grid);

struct GapBracket {
    double lower;
    double upper;
};

/// (phi^2 / 8, phi).
GapBracket cheeger_bracket(double phi);

/// 1 - eps under K(x, .) >= eps pi(.).
double doeblin_norm_upper(double eps);

/// 4 (delta / sigma) f_N(delta / sigma).
double iso_kappa(double delta, double sigma);

/// eps min{(1 - a) / 2, a^2 kappa / 4}.
double isogap_conductance_lower(double eps, double kappa, double a);

/// 1 - Phi^2 / 8 with Phi from the close-coupling and three-set constants at
/// a = 1/2, delta = sqrt(1 - alpha^2) / alpha. Returns 0 for alpha = 0.
double gaussian_norm_upper_iso(const GaussianChain& chain);

/// 1 - (1 - a^2) / (64 pi a^2) exp(-(1 - a^2) / a^2) F_N(-1/2)^2.
double gaussian_norm_upper_iso_closed_form(double alpha);

struct IsoOptimum {
    double a;
    double delta;
    double eps;
    double kappa;
    double phi;
    double norm_upper;
};

/// Maximizes the conductance lower bound jointly over (a, delta) with
/// eps(delta) = 2 F_N(-alpha delta / (2 sqrt(1 - alpha^2))).
IsoOptimum gaussian_norm_upper_iso_optimized(const GaussianChain& chain);

/// Signed quotient <f, K f> / ||f||^2 in L2(pi) after centering f.
double rayleigh_lower(const GridChain& grid, const std::vector<double>& f);

/// 1 - phi_K(A).
double set_lower(const GridChain& grid, const std::vector<bool>& in_set);

/// 1 - move_mass / (1 - mass_a).
double lazy_lower(double move_mass, double mass_a);

/// 1 - min{sigma^2 / 2, (sigma^2 + 1)^(-p/2)}, clamped at 0.
double rwmh_norm_lower(const RwmhChain& chain);

/// sigma_p, with sigma_p^2 the root of v / 2 = (v + 1)^(-p/2).
double sigma_star(int p);

/// (2 - gap) / gap.
double asymptotic_variance_factor(double gap);

struct NormBracket {
    double lower;
    double upper;
    std::vector<std::string> provenance;

    /// Throws unless 0 <= lower <= upper <= 1 (1e-8 slack).
    void validate() const;
};

/// Doeblin upper 1 - 1/M_s; lazy-point lower 1 - K(x*, {x*}^c) at the mode
/// x* (the limit of shrinking neighbourhoods).
NormBracket imh_norm_bracket(const ImhChain& chain);

/// Rayleigh lower bound with f(x) = x_1 (exactly alpha) and the
/// isoperimetric upper bound.
NormBracket gaussian_norm_bracket(const GaussianChain& chain);

/// Lower bound from rwmh_norm_lower; the upper end is the trivial 1.
NormBracket rwmh_norm_bracket(const RwmhChain& chain);

/// Row vector mu K^t.
std::vector<double> propagate(const GridChain& grid, const std::vector<double>& mu, int t);

/// ||mu - pi||_2 = (sum_i pi_i (mu_i / pi_i - 1)^2)^(1/2).
double l2_distance(const GridChain& grid, const std::vector<double>& mu);

/// (1/2) sum_i |mu_i - pi_i|.
double tv_distance(const GridChain& grid, const std::vector<double>& mu);

/// Three CSV files `<stem>_points.csv`, `<stem>_weights.csv` (one value per
/// line after a header) and `<stem>_matrix.csv` (row-major, no header).
void write_grid_csv(const GridChain& grid, const std::filesystem::path& dir, const std::string& stem);
GridChain read_grid_csv(const std::filesystem::path& dir, const std::string& stem);

}  // namespace certify
