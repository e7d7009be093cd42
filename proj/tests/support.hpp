#pragma once

// Shared helpers for the test executables: Kolmogorov-Smirnov statistics and
// small random reversible chains.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "mcmc_certify/rng.hpp"
#include "mcmc_certify/spectral.hpp"

namespace testing_support {

/// Asymptotic Kolmogorov tail P(K > lambda).
inline double kolmogorov_tail(double lambda) {
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-17) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline double ks_pvalue_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    const double sn = std::sqrt(n);
    return kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
}

inline double ks_pvalue_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return kolmogorov_tail((ne + 0.12 + 0.11 / ne) * d);
}

/// Random reversible chain: symmetric positive flows W, pi proportional to
/// row sums, K = W / rowsum. Some flows are zeroed to make bottlenecks.
inline certify::GridChain random_reversible_chain(int n, certify::Rng& rng) {
    Eigen::MatrixXd w(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double v = rng.uniform();
            if (i != j && rng.uniform() < 0.3) v *= 1e-3;
            w(i, j) = w(j, i) = v + 1e-6;
        }
    }
    const double total = w.sum();
    std::vector<double> points(n), weights(n);
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i) {
        points[i] = i;
        const double row = w.row(i).sum();
        weights[i] = row / total;
        k.row(i) = w.row(i) / row;
    }
    return certify::GridChain::make(points, weights, k);
}

inline certify::GridChain two_state(double p, double q) {
    Eigen::MatrixXd k(2, 2);
    k << 1.0 - p, p, q, 1.0 - q;
    return certify::GridChain::make({0.0, 1.0}, {q / (p + q), p / (p + q)}, k);
}

}  // namespace testing_support
