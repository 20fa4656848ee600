#include "bumpcert/spectral.hpp"

#include "bumpcert/error.hpp"

#include <cmath>
#include <random>

namespace bumpcert {

namespace {

double mu_norm(std::span<const double> mu, std::span<const double> x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += mu[i] * x[i] * x[i];
    return std::sqrt(acc);
}

} // namespace

NormEstimate power_norm(const LinearOperator& op, double rel_tol, int max_iter, std::uint64_t seed) {
    if (op.measure.size() != op.dim) throw ParameterError("power_norm: measure has wrong length");
    NormEstimate est;
    est.method = "power";
    if (op.dim == 0) return est;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::vector<double> x(op.dim);
    for (double& xi : x) xi = gauss(rng);
    double nx = mu_norm(op.measure, x);
    for (double& xi : x) xi /= nx;

    for (int it = 1; it <= max_iter; ++it) {
        const std::vector<double> bx = op.apply(x);
        const double lambda = std::pow(mu_norm(op.measure, bx), 2);
        est.iterations = it;
        if (lambda == 0.0) {
            // x is in the kernel; a generic start means B vanishes.
            est.value = 0.0;
            est.residual = 0.0;
            return est;
        }
        std::vector<double> gx = op.adjoint(bx);
        double res = 0.0;
        for (std::size_t i = 0; i < op.dim; ++i) {
            const double r = gx[i] - lambda * x[i];
            res += op.measure[i] * r * r;
        }
        est.value = std::sqrt(lambda);
        est.residual = std::sqrt(res) / lambda;
        if (est.residual <= rel_tol) return est;
        nx = mu_norm(op.measure, gx);
        for (std::size_t i = 0; i < op.dim; ++i) x[i] = gx[i] / nx;
    }
    est.converged = false;
    return est;
}

double dense_spectral_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

Eigen::MatrixXd dense_matrix(const LinearOperator& op) {
    const auto n = static_cast<Eigen::Index>(op.dim);
    Eigen::MatrixXd out(n, n);
    std::vector<double> e(op.dim, 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
        e[j] = 1.0 / std::sqrt(op.measure[j]);
        const std::vector<double> col = op.apply(e);
        for (Eigen::Index i = 0; i < n; ++i) out(i, j) = std::sqrt(op.measure[i]) * col[i];
        e[j] = 0.0;
    }
    return out;
}

} // namespace bumpcert
