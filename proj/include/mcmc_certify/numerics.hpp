#pragma once

#include <functional>

namespace certify {

/// Stopping rule shared by quadrature, root finding and golden-section search.
struct Tolerance {
    double abs_tol = 1e-10;
    double rel_tol = 0.0;
    int max_iter = 100000;

    /// Throws InvalidArgument unless abs_tol + rel_tol > 0 and max_iter >= 1.
    void validate() const;
};

/// Closed interval [lo, hi] with lo < hi.
struct Interval {
    double lo;
    double hi;

    Interval(double lo, double hi);
    double width() const { return hi - lo; }
};

using ScalarFn = std::function<double(double)>;

/// Standard normal density.
double normal_pdf(double z);

/// Standard normal CDF, evaluated as erfc(-z / sqrt 2) / 2 so that the lower
/// tail keeps full relative precision.
double normal_cdf(double z);

/// Adaptive Simpson quadrature with Richardson correction.
///
/// The target error is max(abs_tol, rel_tol * |I|) where |I| is seeded from a
/// 16-panel composite estimate. max_iter bounds the number of panel
/// bisections; exceeding it throws ConvergenceError carrying the partial sum.
double integrate(const ScalarFn& f, Interval domain, Tolerance tol = {});

/// Bisection. Requires a sign change over the bracket; an endpoint that is an
/// exact root is returned as-is. Stops when |g(mid)| <= abs_tol or the bracket
/// is narrower than abs_tol.
double find_root(const ScalarFn& g, Interval bracket, Tolerance tol = {});

struct ScalarMinimum {
    double argmin;
    double min;
};

/// 1000-point grid scan (endpoints included) followed by golden-section
/// refinement on the two cells around the best grid point. No global
/// optimality claim beyond what the scan resolves.
ScalarMinimum minimize_scalar(const ScalarFn& g, Interval domain, Tolerance tol = {1e-12, 0.0, 200});

}  // namespace certify
