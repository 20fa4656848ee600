#include "doctest.h"

#include "bumpcert/bellman.hpp"
#include "bumpcert/error.hpp"
#include "bumpcert/generators.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using namespace bumpcert;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

DistFn indicator(double value, double end = 1.0) { return DistFn(StepFunction({end}, {value})); }

// Exact LP value max{sum a_k b_k x_k : |b| <= 1, sum a_k b_k = 0} by brute force
// over every vertex (all coordinates +-1 but one), independent of the library code.
double lp_oracle(const std::vector<double>& a, const std::vector<double>& x) {
    const std::size_t n = a.size();
    double best = -INFINITY;
    for (std::size_t free = 0; free < n; ++free) {
        for (std::size_t bits = 0; bits < (std::size_t{1} << n); ++bits) {
            if ((bits >> free) & 1U) continue;
            double cons = 0.0, val = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                if (k == free) continue;
                const double b = (bits >> k) & 1U ? 1.0 : -1.0;
                cons += a[k] * b;
                val += a[k] * b * x[k];
            }
            const double bf = -cons / a[free];
            if (std::abs(bf) > 1.0 + 1e-12) continue;
            best = std::max(best, val + a[free] * bf * x[free]);
        }
    }
    return best;
}

std::vector<double> zero_mean(Rng& rng, const std::vector<double>& a) {
    std::normal_distribution<double> g;
    std::vector<double> x(a.size());
    for (double& v : x) v = g(rng);
    const double m = std::inner_product(a.begin(), a.end(), x.begin(), 0.0);
    for (double& v : x) v -= m;
    return x;
}

} // namespace

TEST_SUITE("bellman") {

TEST_CASE("u(N): examples and sandwich") {
    const BumpGauge g = make_log_gauge(2.0);
    CHECK(u_of_N(DistFn(), g) == 0.0);
    boost::math::quadrature::tanh_sinh<double> q;
    const double m1 = q.integrate([](double r) { return r <= 0.0 ? 0.0 : 1.0 / (1.0 + std::log(1.0 / r) / 2.0); }, 0.0, 1.0);
    CHECK(u_of_N(indicator(1.0), g) == doctest::Approx(2.0 - m1).epsilon(1e-12));
    CHECK(bellman_b(0.0, 0.0) == 0.0);

    Rng rng(1);
    for (double alpha : {1.5, 2.0, 3.0}) {
        const BumpGauge ga = make_log_gauge(alpha);
        for (int i = 0; i < 3000; ++i) {
            const DistFn n = random_distfn(rng);
            const double w = n.integral(), u = u_of_N(n, ga);
            CHECK(u >= w * (1.0 - 1e-14));
            CHECK(u <= 2.0 * w * (1.0 + 1e-14));
            CHECK(2.0 * w <= ga.c_psi() * n_psi(n, ga) * (2.0 + 1e-12));
        }
    }
}

TEST_CASE("directional derivatives against finite differences") {
    Rng rng(2);
    const BumpGauge g = make_log_gauge(2.0);
    const DistFn n = random_distfn(rng);
    const DerivReport zero = directional_derivs(n, StepFunction(), g);
    CHECK(zero.u_prime == 0.0);
    CHECK(zero.u_second == 0.0);
    CHECK(zero.w_delta == 0.0);

    double worst1 = 0.0, worst2 = 0.0;
    for (double alpha : {1.5, 2.0, 3.0}) {
        const BumpGauge ga = make_log_gauge(alpha);
        for (int i = 0; i < 400; ++i) {
            const DistFn n1 = random_distfn(rng), n2 = random_distfn(rng);
            const double half[2] = {0.5, 0.5};
            const DistFn parts[2] = {n1, n2};
            const DistFn mid = DistFn::mixture(half, parts);
            const StepFunction dn = (n1.steps() - n2.steps()).scaled(0.5);
            const DerivReport d = directional_derivs(mid, dn, ga);
            if (d.w_delta == 0.0) continue;
            worst1 = std::max(worst1, rel_err(d.u_prime, d.fd_u_prime));
            worst2 = std::max(worst2, rel_err(d.u_second, d.fd_u_second));
            CHECK(std::abs(d.kappa) <= 2.0 + 1e-12);
            CHECK(d.u_second <= 0.0);
            CHECK(-d.u_second >= d.w_delta * d.w_delta / d.n_psi * (1.0 - 1e-12));
            CHECK(d.w_delta >= std::abs(dn.integral()) * (1.0 - 1e-14));
        }
    }
    CHECK(worst1 <= 1e-6);
    CHECK(worst2 <= 1e-6);
    MESSAGE("worst FD rel err u' " << worst1 << ", u'' " << worst2);

    CHECK_THROWS_AS(directional_derivs(indicator(0.5), StepFunction({1.0}, {0.7}), g), ValidationError);
    CHECK_THROWS_AS(directional_derivs(indicator(0.5), StepFunction({2.0}, {0.1}), g), ValidationError);
}

TEST_CASE("Hessian form is positive semidefinite and second derivative bound") {
    Rng rng(3);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> pos(1e-3, 10.0);
    for (int i = 0; i < 10000; ++i) {
        const double f = gauss(rng), u = pos(rng), df = gauss(rng), du = gauss(rng);
        const double h = hessian_form(f, u, df, du);
        const double closed = 2.0 / u * (df - f * du / u) * (df - f * du / u);
        CHECK(h >= -1e-12 * (std::abs(closed) + 2.0 * df * df / u + 1.0));
    }
    for (double alpha : {1.5, 2.0, 3.0}) {
        const BumpGauge g = make_log_gauge(alpha);
        for (int i = 0; i < 300; ++i) {
            const DistFn n1 = random_distfn(rng), n2 = random_distfn(rng);
            const double half[2] = {0.5, 0.5};
            const DistFn parts[2] = {n1, n2};
            const DistFn mid = DistFn::mixture(half, parts);
            const StepFunction dn = (n1.steps() - n2.steps()).scaled(0.5);
            const double f = gauss(rng), df = gauss(rng);
            const double b2 = bellman_second_derivative(f, mid, df, dn, g);
            const double np = n_psi(mid, g);
            CHECK(b2 >= g.c() * df * df / np * (1.0 - 1e-9));
            // second finite difference along the segment
            auto along = [&](double t) {
                const double w[2] = {0.5 + t * 0.5, 0.5 - t * 0.5};
                return bellman_value(f + t * df, DistFn::mixture(w, parts), g);
            };
            const double e = 1e-3;
            const double fd = (along(e) - 2.0 * along(0.0) + along(-e)) / (e * e);
            CHECK(fd == doctest::Approx(b2).epsilon(1e-4));
            // midpoint gauge bound
            CHECK(np >= 0.5 * n_psi(n1, g) * (1.0 - 1e-14));
            CHECK(np >= 0.5 * n_psi(n2, g) * (1.0 - 1e-14));
        }
    }
}

TEST_CASE("two-point inequality: fixed regression case and random instances") {
    const BumpGauge g = make_log_gauge(2.0);
    // Goldens from an independent high-precision evaluation of u and the midpoint inequality.
    const TwoPointResult r = check_two_point(1.0, indicator(1.0), 0.0, indicator(0.5), g);
    CHECK(r.lhs == doctest::Approx(0.1443219913674314).epsilon(1e-12));
    CHECK(r.rhs == doctest::Approx(0.006369236975165745).epsilon(1e-12));
    CHECK(r.n_mid == doctest::Approx(1.962558474231478).epsilon(1e-13));
    CHECK(r.passed());

    Rng rng(4);
    const DistFn same = random_distfn(rng);
    const TwoPointResult z = check_two_point(0.7, same, 0.7, same, g);
    CHECK(z.slack == 0.0);

    std::normal_distribution<double> gauss(0.0, 2.0);
    for (double alpha : {1.5, 2.0, 3.0}) {
        const BumpGauge ga = make_log_gauge(alpha);
        for (int i = 0; i < 3000; ++i) {
            const DistFn n1 = random_distfn(rng), n2 = random_distfn(rng);
            const TwoPointResult t = check_two_point(gauss(rng), n1, gauss(rng), n2, ga);
            CHECK(t.passed());
        }
    }
}

TEST_CASE("multi-point inequality") {
    const BumpGauge g = make_log_gauge(2.0);
    Rng rng(5);
    const DistFn n = random_distfn(rng);
    const std::vector<double> a3{0.2, 0.3, 0.5}, f3{1.5, 1.5, 1.5};
    const std::vector<DistFn> same{n, n, n};
    CHECK(std::abs(check_multi_point(a3, f3, same, g).slack) < 1e-15);

    // two equal halves: the multi-point bound is weaker than the two-point one
    const DistFn n1 = random_distfn(rng), n2 = random_distfn(rng);
    const std::vector<double> half{0.5, 0.5}, f2{2.0, -1.0};
    const std::vector<DistFn> pair{n1, n2};
    const CheckResult mp = check_multi_point(half, f2, pair, g);
    const TwoPointResult tp = check_two_point(2.0, n1, -1.0, n2, g);
    CHECK(mp.lhs == doctest::Approx(tp.lhs).epsilon(1e-13));
    CHECK(mp.rhs <= tp.rhs * (1.0 + 1e-13));

    std::normal_distribution<double> gauss(0.0, 2.0);
    for (int i = 0; i < 1000; ++i) {
        const int k = 2 + static_cast<int>(rng() % 15);
        const auto alpha = random_convex_weights(rng, k);
        std::vector<double> f(k);
        std::vector<DistFn> ns;
        for (int j = 0; j < k; ++j) {
            f[j] = gauss(rng);
            ns.push_back(random_distfn(rng));
        }
        CHECK(check_multi_point(alpha, f, ns, g).passed());
    }
    CHECK_THROWS_AS(check_multi_point(std::vector<double>{0.5, 0.6}, f2, pair, g), ParameterError);
}

TEST_CASE("balanced signs against an LP oracle") {
    const std::vector<double> a2{0.5, 0.5}, x2{1.0, -1.0};
    const auto b2 = balanced_signs(a2, x2);
    CHECK(b2[0] == doctest::Approx(1.0));
    CHECK(b2[1] == doctest::Approx(-1.0));

    const std::vector<double> a3{0.5, 0.25, 0.25}, x3{1.0, -1.0, -1.0};
    const auto b3 = balanced_signs(a3, x3);
    double v3 = 0.0;
    for (int k = 0; k < 3; ++k) v3 += a3[k] * b3[k] * x3[k];
    CHECK(v3 >= 0.5);
    CHECK(v3 == doctest::Approx(lp_oracle(a3, x3)).epsilon(1e-12));

    const std::vector<double> zero{0.0, 0.0};
    for (double b : balanced_signs(a2, zero)) CHECK(b == 0.0);

    Rng rng(6);
    for (int i = 0; i < 2000; ++i) {
        const int n = 2 + static_cast<int>(rng() % 11);
        const auto a = random_convex_weights(rng, n);
        const auto x = zero_mean(rng, a);
        const auto b = balanced_signs(a, x);
        double value = 0.0, cons = 0.0, l1 = 0.0;
        for (int k = 0; k < n; ++k) {
            CHECK(std::abs(b[k]) <= 1.0);
            value += a[k] * b[k] * x[k];
            cons += a[k] * b[k];
            l1 += a[k] * std::abs(x[k]);
        }
        CHECK(std::abs(cons) <= 1e-12);
        CHECK(value >= 0.5 * l1 * (1.0 - 1e-12));
        CHECK(value <= l1 * (1.0 + 1e-12));
        CHECK(value == doctest::Approx(lp_oracle(a, x)).epsilon(1e-10));
    }
}

TEST_CASE("T functional, u(M, N) and the M derivative") {
    Rng rng(7);
    std::normal_distribution<double> gauss(0.0, 2.0);
    std::uniform_real_distribution<double> unif;
    double worst = 0.0;
    for (double alpha : {1.5, 2.0, 3.0}) {
        const BumpGauge g = make_log_gauge(alpha);
        for (int i = 0; i < 300; ++i) {
            const DistFn n = random_distfn(rng);
            const double m = unif(rng), f = gauss(rng);
            const double w = n.integral(), u = u_of_MN(m, n, g);
            CHECK(u >= w * (1.0 - 1e-14));
            CHECK(u <= 2.0 * w * (1.0 + 1e-14));
            CHECK(t_functional(m + 1.0, n, g) <= w * (1.0 + 1e-14));
            // -dT/dA by central differences
            const double a = 1.0 + m, e = 1e-6;
            const double lo = std::max(1.0, a - e), hi = std::min(2.0, a + e);
            const double fd = -(t_functional(hi, n, g) - t_functional(lo, n, g)) / (hi - lo);
            CHECK(t_functional_neg_da(a, n, g) == doctest::Approx(fd).epsilon(1e-6));
            const DmResult d = check_dB_dM(f, n, m, g);
            if (f != 0.0) worst = std::max(worst, rel_err(d.analytic, d.fd));
            CHECK(d.passed());
        }
    }
    CHECK(worst <= 1e-6);
    const DmResult z = check_dB_dM(1.0, DistFn(), 0.3, make_log_gauge(2.0));
    CHECK(z.lhs == 0.0);
    CHECK(z.rhs == 0.0);
    CHECK_THROWS_AS(u_of_MN(1.5, indicator(1.0), make_log_gauge(2.0)), ValidationError);
}

TEST_CASE("B(f, N, M) is convex") {
    Rng rng(8);
    const BumpGauge g = make_log_gauge(2.0);
    std::normal_distribution<double> gauss(0.0, 2.0);
    std::uniform_real_distribution<double> unif;
    for (int i = 0; i < 1000; ++i) {
        const DistFn n1 = random_distfn(rng), n2 = random_distfn(rng);
        const double f1 = gauss(rng), f2 = gauss(rng), m1 = unif(rng), m2 = unif(rng), lam = unif(rng);
        const double w[2] = {lam, 1.0 - lam};
        const DistFn parts[2] = {n1, n2};
        const double mixed = bellman_value_m(lam * f1 + (1 - lam) * f2, DistFn::mixture(w, parts),
                                             lam * m1 + (1 - lam) * m2, g);
        const double chord = lam * bellman_value_m(f1, n1, m1, g) + (1 - lam) * bellman_value_m(f2, n2, m2, g);
        CHECK(mixed <= chord + 1e-9 * (1.0 + std::abs(chord)));
    }
}

TEST_CASE("drop inequality") {
    const BumpGauge g = make_log_gauge(2.0);
    Rng rng(9);
    const DistFn n = random_distfn(rng);
    const std::vector<double> half{0.5, 0.5}, f{0.4, 0.4}, m{0.3, 0.3};
    const std::vector<DistFn> same{n, n};
    CHECK(std::abs(check_drop(half, 0.0, f, same, m, g).slack) < 1e-15);

    std::normal_distribution<double> gauss(0.0, 2.0);
    std::uniform_real_distribution<double> unif;
    for (int i = 0; i < 1000; ++i) {
        const int k = 2 + static_cast<int>(rng() % 7);
        const auto alpha = random_convex_weights(rng, k);
        std::vector<double> fk(k), mk(k);
        std::vector<DistFn> ns;
        double avg = 0.0;
        for (int j = 0; j < k; ++j) {
            fk[j] = gauss(rng);
            mk[j] = unif(rng);
            avg += alpha[j] * mk[j];
            ns.push_back(random_distfn(rng));
        }
        const double a = unif(rng) * (1.0 - avg);
        CHECK(check_drop(alpha, a, fk, ns, mk, g).passed());
    }
    const std::vector<double> big{0.9, 0.9};
    CHECK_THROWS_AS(check_drop(half, 0.5, f, same, big, g), ValidationError);
}

} // TEST_SUITE
