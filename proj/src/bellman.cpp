#include "bumpcert/bellman.hpp"

#include "bumpcert/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bumpcert {

namespace {

constexpr double kSumTol = 1e-9;

struct Piece {
    double len;
    double n;
    double d;
};

// N and dN on their common breakpoints.
std::vector<Piece> align(const StepFunction& a, const StepFunction& b) {
    std::vector<double> ends(a.ends().begin(), a.ends().end());
    ends.insert(ends.end(), b.ends().begin(), b.ends().end());
    std::sort(ends.begin(), ends.end());
    ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
    std::vector<Piece> out;
    out.reserve(ends.size());
    double prev = 0.0;
    for (double e : ends) {
        const double mid = 0.5 * (prev + e);
        out.push_back({e - prev, a(mid), b(mid)});
        prev = e;
    }
    return out;
}

double u_pieces(const std::vector<Piece>& pieces, double tau, const BumpGauge& gauge) {
    double acc = 0.0;
    for (const auto& p : pieces) {
        const double v = std::clamp(p.n + tau * p.d, 0.0, 1.0);
        acc += p.len * (2.0 * v - gauge.m(v));
    }
    return acc;
}

void check_weights(std::span<const double> alpha) {
    double total = 0.0;
    for (double a : alpha) {
        if (!(a >= 0.0)) throw ParameterError("convex weights must be nonnegative");
        total += a;
    }
    if (std::abs(total - 1.0) > kSumTol) throw ParameterError("convex weights must sum to 1");
}

} // namespace

double u_of_N(const DistFn& n, const BumpGauge& gauge) {
    const StepFunction& s = n.steps();
    double acc = 0.0;
    for (std::size_t j = 0; j < s.pieces(); ++j) {
        const double v = s.values()[j];
        acc += s.length(j) * (2.0 * v - gauge.m(v));
    }
    return acc;
}

double bellman_b(double f, double u) {
    if (f == 0.0) return 0.0;
    if (!(u > 0.0)) return std::numeric_limits<double>::infinity();
    return f * f / u;
}

double bellman_value(double f, const DistFn& n, const BumpGauge& gauge) {
    return bellman_b(f, u_of_N(n, gauge));
}

DerivReport directional_derivs(const DistFn& n, const StepFunction& dn, const BumpGauge& gauge,
                               double fd_step) {
    const auto pieces = align(n.steps(), dn);
    double prev_plus = 1.0;
    double prev_minus = 1.0;
    for (const auto& p : pieces) {
        const double plus = p.n + p.d;
        const double minus = p.n - p.d;
        if (plus < -1e-12 || plus > 1.0 + 1e-12 || minus < -1e-12 || minus > 1.0 + 1e-12)
            throw ValidationError("N +/- dN must take values in [0, 1]");
        if (plus > prev_plus + 1e-12 || minus > prev_minus + 1e-12)
            throw ValidationError("N +/- dN must be decreasing");
        if (p.n == 0.0 && p.d != 0.0) throw ValidationError("dN must vanish where N = 0");
        prev_plus = plus;
        prev_minus = minus;
    }
    DerivReport r;
    for (const auto& p : pieces) {
        r.w_delta += p.len * std::abs(p.d);
        if (p.n == 0.0) continue;
        r.u_prime += p.len * (2.0 - gauge.m_prime(p.n)) * p.d;
        r.u_second -= p.len * p.d * p.d / gauge.phi(p.n);
    }
    r.kappa = r.w_delta > 0.0 ? r.u_prime / r.w_delta : 0.0;
    r.n_psi = n_psi(n, gauge);
    // central differences at h and h/2, one Richardson step; N + tau dN stays
    // admissible for |tau| <= 1, so a large h is safe and keeps roundoff down
    const double u0 = u_pieces(pieces, 0.0, gauge);
    auto central = [&](double h, double& d1, double& d2) {
        const double up = u_pieces(pieces, h, gauge);
        const double um = u_pieces(pieces, -h, gauge);
        d1 = (up - um) / (2.0 * h);
        d2 = (up - 2.0 * u0 + um) / (h * h);
    };
    double a1, a2, b1, b2;
    central(fd_step, a1, a2);
    central(0.5 * fd_step, b1, b2);
    r.fd_u_prime = (4.0 * b1 - a1) / 3.0;
    r.fd_u_second = (4.0 * b2 - a2) / 3.0;
    return r;
}

double hessian_form(double f, double u, double df, double du) {
    return 2.0 * df * df / u - 4.0 * f * df * du / (u * u) + 2.0 * f * f * du * du / (u * u * u);
}

double bellman_second_derivative(double f, const DistFn& n, double df, const StepFunction& dn,
                                 const BumpGauge& gauge) {
    const DerivReport d = directional_derivs(n, dn, gauge);
    const double u = u_of_N(n, gauge);
    const double b_u = -f * f / (u * u);
    return hessian_form(f, u, df, d.u_prime) + b_u * d.u_second;
}

TwoPointResult check_two_point(double f1, const DistFn& n1, double f2, const DistFn& n2,
                               const BumpGauge& gauge) {
    const double half[2] = {0.5, 0.5};
    const DistFn parts[2] = {n1, n2};
    const DistFn mid = DistFn::mixture(half, parts);
    const double f = 0.5 * (f1 + f2);
    TwoPointResult r;
    r.n_mid = n_psi(mid, gauge);
    if (r.n_mid == 0.0) {
        if (f1 != f2 || f1 != 0.0)
            throw ParameterError("two-point check: zero distribution needs f1 = f2 = 0");
        return r;
    }
    r.b1 = bellman_value(f1, n1, gauge);
    r.b2 = bellman_value(f2, n2, gauge);
    r.b_mid = bellman_value(f, mid, gauge);
    r.lhs = 0.5 * (r.b1 + r.b2) - r.b_mid;
    r.rhs = gauge.c() / 4.0 * (f1 - f) * (f1 - f) / r.n_mid;
    r.slack = r.lhs - r.rhs;
    return r;
}

CheckResult check_multi_point(std::span<const double> alpha, std::span<const double> f,
                              std::span<const DistFn> n, const BumpGauge& gauge) {
    if (alpha.size() != f.size() || alpha.size() != n.size() || alpha.empty())
        throw ParameterError("multi-point check: size mismatch");
    check_weights(alpha);
    const DistFn mix = DistFn::mixture(alpha, n);
    const double fbar = std::inner_product(alpha.begin(), alpha.end(), f.begin(), 0.0);
    CheckResult r;
    const double nn = n_psi(mix, gauge);
    double spread = 0.0;
    double children = 0.0;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        spread += alpha[k] * std::abs(f[k] - fbar);
        if (alpha[k] > 0.0) children += alpha[k] * bellman_value(f[k], n[k], gauge);
    }
    if (nn == 0.0) return r; // every N_k vanishes: all terms are zero
    r.lhs = children - bellman_value(fbar, mix, gauge);
    r.rhs = gauge.c() / 16.0 * spread * spread / nn;
    r.slack = r.lhs - r.rhs;
    return r;
}

std::vector<double> balanced_signs(std::span<const double> alpha, std::span<const double> x) {
    const std::size_t n = alpha.size();
    if (x.size() != n) throw ParameterError("balanced_signs: size mismatch");
    check_weights(alpha);
    double l1 = 0.0;
    double mean = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        l1 += alpha[k] * std::abs(x[k]);
        mean += alpha[k] * x[k];
    }
    std::vector<double> beta(n, 0.0);
    if (l1 == 0.0) return beta;
    if (std::abs(mean) > kSumTol * l1) throw ParameterError("balanced_signs: x must have zero alpha-mean");

    if (n <= 8) {
        // Vertices of {|beta| <= 1, <alpha, beta> = 0}: all but one coordinate at +/-1.
        double best = -std::numeric_limits<double>::infinity();
        std::vector<double> trial(n);
        for (std::size_t free = 0; free < n; ++free) {
            if (alpha[free] == 0.0) continue;
            const std::size_t patterns = std::size_t{1} << (n - 1);
            for (std::size_t bits = 0; bits < patterns; ++bits) {
                double constraint = 0.0;
                std::size_t b = 0;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == free) continue;
                    trial[k] = (bits >> b++) & 1U ? 1.0 : -1.0;
                    if (alpha[k] == 0.0) trial[k] = 0.0;
                    constraint += alpha[k] * trial[k];
                }
                trial[free] = -constraint / alpha[free];
                if (std::abs(trial[free]) > 1.0 + 1e-15) continue;
                trial[free] = std::clamp(trial[free], -1.0, 1.0);
                double value = 0.0;
                for (std::size_t k = 0; k < n; ++k) value += alpha[k] * trial[k] * x[k];
                if (value > best) {
                    best = value;
                    beta = trial;
                }
            }
        }
        return beta;
    }

    // p_k = alpha_k (1 + beta_k) / 2 in [0, alpha_k] with sum p = 1/2 and objective
    // 2 sum x_k p_k: fill the largest x first.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return x[i] > x[j]; });
    double remaining = 0.5;
    for (std::size_t idx : order) {
        if (alpha[idx] == 0.0) continue;
        const double p = std::min(alpha[idx], std::max(remaining, 0.0));
        remaining -= p;
        beta[idx] = std::clamp(2.0 * p / alpha[idx] - 1.0, -1.0, 1.0);
    }
    return beta;
}

double t_functional(double a, const DistFn& n, const BumpGauge& gauge) {
    const StepFunction& s = n.steps();
    double acc = 0.0;
    for (std::size_t j = 0; j < s.pieces(); ++j) {
        const double v = s.values()[j];
        acc += s.length(j) * v * gauge.m_prime(v / a);
    }
    return acc;
}

double t_functional_neg_da(double a, const DistFn& n, const BumpGauge& gauge) {
    const StepFunction& s = n.steps();
    double acc = 0.0;
    for (std::size_t j = 0; j < s.pieces(); ++j) {
        const double v = s.values()[j];
        acc += s.length(j) * v * v / (a * a * gauge.phi(v / a));
    }
    return acc;
}

double u_of_MN(double m, const DistFn& n, const BumpGauge& gauge) {
    if (m < 0.0 || m > 1.0) throw ValidationError("M must lie in [0, 1]");
    return 2.0 * n.integral() - t_functional(m + 1.0, n, gauge);
}

double bellman_value_m(double f, const DistFn& n, double m, const BumpGauge& gauge) {
    return bellman_b(f, u_of_MN(m, n, gauge));
}

DmResult check_dB_dM(double f, const DistFn& n, double m, const BumpGauge& gauge, double fd_step) {
    if (m < 0.0 || m > 1.0) throw ValidationError("M must lie in [0, 1]");
    DmResult r;
    if (n.is_zero()) return r; // zero-weight convention
    const double u = u_of_MN(m, n, gauge);
    r.analytic = f * f / (u * u) * t_functional_neg_da(m + 1.0, n, gauge);
    const double hi = std::min(1.0, m + fd_step);
    const double lo = std::max(0.0, m - fd_step);
    r.fd = -(bellman_value_m(f, n, hi, gauge) - bellman_value_m(f, n, lo, gauge)) / (hi - lo);
    r.lhs = r.analytic;
    r.rhs = f * f / (16.0 * n_psi(n, gauge));
    r.slack = r.lhs - r.rhs;
    return r;
}

CheckResult check_drop(std::span<const double> alpha, double a, std::span<const double> f,
                       std::span<const DistFn> n, std::span<const double> m, const BumpGauge& gauge) {
    if (alpha.size() != f.size() || alpha.size() != n.size() || alpha.size() != m.size() || alpha.empty())
        throw ParameterError("drop check: size mismatch");
    check_weights(alpha);
    if (!(a >= 0.0)) throw ValidationError("Carleson increment a must be nonnegative");
    double m_avg = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        if (m[k] < 0.0 || m[k] > 1.0) throw ValidationError("M_k must lie in [0, 1]");
        m_avg += alpha[k] * m[k];
    }
    double m_top = a + m_avg;
    if (m_top > 1.0 + 1e-12) throw ValidationError("M = a + sum alpha_k M_k exceeds 1");
    m_top = std::min(m_top, 1.0);
    const DistFn mix = DistFn::mixture(alpha, n);
    const double fbar = std::inner_product(alpha.begin(), alpha.end(), f.begin(), 0.0);
    CheckResult r;
    const double nn = n_psi(mix, gauge);
    if (nn == 0.0) return r;
    double children = 0.0;
    for (std::size_t k = 0; k < alpha.size(); ++k)
        if (alpha[k] > 0.0) children += alpha[k] * bellman_value_m(f[k], n[k], m[k], gauge);
    r.lhs = children - bellman_value_m(fbar, mix, m_top, gauge);
    r.rhs = a * fbar * fbar / (16.0 * nn);
    r.slack = r.lhs - r.rhs;
    return r;
}

} // namespace bumpcert
