#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace bumpcert {

/// Linear map on R^n with the inner product <x, y> = sum_i mu_i x_i y_i.
/// `adjoint` must be the adjoint with respect to that inner product.
struct LinearOperator {
    using Map = std::function<std::vector<double>(std::span<const double>)>;
    std::size_t dim = 0;
    Map apply;
    Map adjoint;
    std::vector<double> measure;
};

struct NormEstimate {
    double value = 0.0;
    double residual = 0.0; ///< ||G x - lambda x|| / lambda at the last iterate, G = B*B
    int iterations = 0;
    bool converged = true;
    std::string method;
};

/// Power iteration on the Gram operator. Stops once the Rayleigh residual
/// drops below rel_tol, which puts lambda = sigma^2 within rel_tol of an
/// eigenvalue of B*B.
NormEstimate power_norm(const LinearOperator& op, double rel_tol = 1e-9, int max_iter = 20000,
                        std::uint64_t seed = 0x5eed);

/// Largest singular value of a dense matrix.
double dense_spectral_norm(const Eigen::MatrixXd& m);

/// Matrix of op in the orthonormal basis e_i / sqrt(mu_i).
Eigen::MatrixXd dense_matrix(const LinearOperator& op);

} // namespace bumpcert
