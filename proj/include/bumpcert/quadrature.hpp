#pragma once

#include <functional>

namespace bumpcert::quad {

struct Options {
    double abs_tol = 1e-10;
    double rel_tol = 1e-12;
    int max_intervals = 4000;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
    bool converged = false;
};

using Integrand = std::function<double(double)>;

// Globally adaptive 7/15-point Gauss-Kronrod on [a, b]. The interval with the
// largest error estimate is bisected until the total estimate meets
// max(abs_tol, rel_tol * |value|).
Result integrate(const Integrand& f, double a, double b, const Options& opts = {});

// Integral over [a, +inf) using the map x = a + t / (1 - t), t in [0, 1).
Result integrate_to_infinity(const Integrand& f, double a, const Options& opts = {});

} // namespace bumpcert::quad
