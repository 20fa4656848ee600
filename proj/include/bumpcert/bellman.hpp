#pragma once

#include "bumpcert/distribution.hpp"
#include "bumpcert/gauge.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace bumpcert {

/// Slack of an inequality LHS >= RHS. Rounding is absorbed by a relative
/// tolerance; anything below -tol (1 + |RHS|) is a genuine violation.
struct CheckResult {
    double slack = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;

    bool passed(double tol = 1e-9) const { return slack >= -tol * (1.0 + std::abs(rhs)); }
};

/// u(N) = int (2N - m(N)) dt
double u_of_N(const DistFn& n, const BumpGauge& gauge);

/// B(f, u) = f^2 / u, with B(0, 0) = 0.
double bellman_b(double f, double u);
/// B~(f, N) = B(f, u(N))
double bellman_value(double f, const DistFn& n, const BumpGauge& gauge);

struct DerivReport {
    double u_prime = 0.0;  ///< d/dtau u(N + tau dN) at 0
    double u_second = 0.0; ///< second derivative, <= 0
    double w_delta = 0.0;  ///< int |dN|
    double kappa = 0.0;    ///< u_prime / w_delta, |kappa| <= 2
    double n_psi = 0.0;    ///< n_Psi(N)
    double fd_u_prime = 0.0;
    double fd_u_second = 0.0;
};

/// Derivatives of u along dN. N + dN and N - dN must be distribution
/// functions and dN must vanish where N does.
DerivReport directional_derivs(const DistFn& n, const StepFunction& dn, const BumpGauge& gauge,
                               double fd_step = 1e-2);

/// Second derivative of tau -> B~(f + tau df, N + tau dN) at 0.
double bellman_second_derivative(double f, const DistFn& n, double df, const StepFunction& dn,
                                 const BumpGauge& gauge);

/// Quadratic form of the Hessian of B(f, u) = f^2/u in direction (df, du).
double hessian_form(double f, double u, double df, double du);

struct TwoPointResult : CheckResult {
    double b1 = 0.0;
    double b2 = 0.0;
    double b_mid = 0.0;
    double n_mid = 0.0;
};

/// Midpoint inequality: (B~1 + B~2)/2 - B~(mid) >= (c/4)(f1 - f)^2 / n(N).
TwoPointResult check_two_point(double f1, const DistFn& n1, double f2, const DistFn& n2,
                               const BumpGauge& gauge);

/// -B~(f, N) + sum alpha_k B~(f_k, N_k) >= (c/16) (sum alpha_k |f_k - f|)^2 / n(N).
CheckResult check_multi_point(std::span<const double> alpha, std::span<const double> f,
                              std::span<const DistFn> n, const BumpGauge& gauge);

/// beta with |beta_k| <= 1 and sum alpha_k beta_k = 0 maximizing
/// sum alpha_k beta_k x_k. Exact: vertex enumeration for n <= 8, a greedy
/// fill by decreasing x above that.
std::vector<double> balanced_signs(std::span<const double> alpha, std::span<const double> x);

/// T(A, N) integrated over t.
double t_functional(double a, const DistFn& n, const BumpGauge& gauge);
/// -d/dA of t_functional.
double t_functional_neg_da(double a, const DistFn& n, const BumpGauge& gauge);

/// u(M, N) = 2 w(N) - T(M + 1, N)
double u_of_MN(double m, const DistFn& n, const BumpGauge& gauge);
/// B~(f, N, M)
double bellman_value_m(double f, const DistFn& n, double m, const BumpGauge& gauge);

struct DmResult : CheckResult {
    double analytic = 0.0; ///< -dB~/dM by the chain rule
    double fd = 0.0;       ///< central finite difference of -B~ in M
};

/// -dB~/dM >= f^2 / (16 n(N)).
DmResult check_dB_dM(double f, const DistFn& n, double m, const BumpGauge& gauge,
                     double fd_step = 1e-5);

/// -B~(X) + sum alpha_k B~(X_k) >= a f^2 / (16 n(N)) with M = a + sum alpha_k M_k.
CheckResult check_drop(std::span<const double> alpha, double a, std::span<const double> f,
                       std::span<const DistFn> n, std::span<const double> m, const BumpGauge& gauge);

} // namespace bumpcert
