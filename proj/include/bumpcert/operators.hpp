#pragma once

#include "bumpcert/functionals.hpp"
#include "bumpcert/gauge.hpp"
#include "bumpcert/lattice.hpp"
#include "bumpcert/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace bumpcert {

/// S h = sum_I P_I K_I P_I h where P_I = Delta_I^n and K_I is the integral
/// operator with kernel a_I, constant on ch_n(I) x ch_n(I). Only cells with
/// depth(I) + n <= D carry kernels.
class HaarShift {
public:
    struct Kernel {
        CellId cell = 0;
        /// Row-major m x m block, m = |ch_n(cell)|; row = output cell, column = input cell.
        std::vector<double> entries;
    };

    /// Validates the block sizes and |a_I| <= 1/mass(I).
    HaarShift(std::shared_ptr<const Lattice> lattice, int complexity, std::vector<Kernel> kernels);

    static HaarShift zero(std::shared_ptr<const Lattice> lattice, int complexity);
    /// Entries uniform in [-1/mass(I), 1/mass(I)] at every admissible cell.
    static HaarShift random(std::shared_ptr<const Lattice> lattice, int complexity, std::uint64_t seed);
    /// {"complexity": n, "kernels": {path: row-major list}}
    static HaarShift from_json(std::shared_ptr<const Lattice> lattice, const std::string& text);
    std::string to_json() const;

    const Lattice& lattice() const { return *lattice_; }
    const std::shared_ptr<const Lattice>& lattice_ptr() const { return lattice_; }
    int complexity() const { return complexity_; }
    const std::vector<Kernel>& kernels() const { return kernels_; }

    std::vector<double> apply(std::span<const double> h) const;
    /// Adjoint in L^2(mu): the shift with transposed kernels.
    std::vector<double> apply_adjoint(std::span<const double> h) const;
    /// Leaf-value matrix: column j is apply(e_j).
    Eigen::MatrixXd assemble_matrix() const;
    HaarShift transpose() const;

    /// The n complexity-1 shifts S_k = sum_{depth(I) = k mod n} S_I, each on
    /// the sublattice of generations 0, k, k + n, ..., D.
    std::vector<HaarShift> decompose_complexity() const;

private:
    std::vector<double> apply_impl(std::span<const double> h, bool transposed) const;

    std::shared_ptr<const Lattice> lattice_;
    int complexity_ = 1;
    std::vector<Kernel> kernels_;
};

/// Pi h = sum_I <h>_I Delta_I b with Delta_I b given by its child values.
class Paraproduct {
public:
    /// delta_b[I] holds the values of Delta_I b on the children of I (empty for
    /// zero). Validates mean zero and the Carleson normalization of
    /// a_I = ||Delta_I b||_inf^2.
    Paraproduct(std::shared_ptr<const Lattice> lattice, std::vector<std::vector<double>> delta_b);

    /// Gaussian child values, rescaled so the Carleson norm is exactly 1.
    static Paraproduct random(std::shared_ptr<const Lattice> lattice, std::uint64_t seed);
    /// {"delta_b": {path: child values}}
    static Paraproduct from_json(std::shared_ptr<const Lattice> lattice, const std::string& text);
    std::string to_json() const;

    const Lattice& lattice() const { return *lattice_; }
    const std::vector<std::vector<double>>& delta_b() const { return delta_b_; }
    /// a_I = ||Delta_I b||_inf^2
    CarlesonSeq carleson() const;

    std::vector<double> apply(std::span<const double> h) const;
    /// Pi* g = sum_I (<Delta_I b, g> / |I|) 1_I
    std::vector<double> apply_adjoint(std::span<const double> g) const;
    Eigen::MatrixXd assemble_matrix() const;

private:
    std::shared_ptr<const Lattice> lattice_;
    std::vector<std::vector<double>> delta_b_;
};

/// M_{v^{1/2}} T M_{w^{1/2}} as an operator on L^2(mu).
LinearOperator weighted_operator(const Lattice& lattice, LinearOperator::Map apply,
                                 LinearOperator::Map adjoint, const Weight& v, const Weight& w);

/// ||M_{v^{1/2}} S M_{w^{1/2}}||; dense SVD up to dense_limit leaves, power iteration above.
NormEstimate two_weight_norm(const HaarShift& s, const Weight& v, const Weight& w,
                             std::size_t dense_limit = 4096);
NormEstimate two_weight_norm(const Paraproduct& p, const Weight& v, const Weight& w,
                             std::size_t dense_limit = 4096);

/// <T(f w^{1/2}), g v^{1/2}> in L^2(mu).
double weighted_bilinear(const Lattice& lattice, const std::vector<double>& t_of_fw,
                         std::span<const double> g, const Weight& v);

struct DominationForm {
    double value = 0.0;      ///< the dominating sum
    std::vector<double> terms; ///< per-cell contributions to value
    double e1 = 0.0;         ///< sum paired with (f, w, gauge 1)
    double e2 = 0.0;         ///< embedding sum for (g, v, gauge 2)
    double t_opt = 1.0;      ///< minimizer of (t^2 e1 + t^-2 e2) / 2
    double split_bound = 0.0; ///< sqrt(e1 e2)
};

/// sum_I |I|^{-1} ||Delta_I^n(f w^{1/2})||_1 ||Delta_I^n(g v^{1/2})||_1. n1 and n2
/// are n_{g1}(N_I^w) and n_{g2}(N_I^v) for every cell.
DominationForm domination_form_shift(const Lattice& lattice, std::span<const double> f,
                                     std::span<const double> g, const Weight& v, const Weight& w,
                                     std::span<const double> n1, std::span<const double> n2,
                                     int complexity = 1);
DominationForm domination_form_shift(const Lattice& lattice, std::span<const double> f,
                                     std::span<const double> g, const Weight& v, const Weight& w,
                                     const BumpGauge& g1, const BumpGauge& g2, int complexity = 1);

/// sum_I |<f w^{1/2}>_I| a_I^{1/2} ||Delta_I(g v^{1/2})||_1.
DominationForm domination_form_para(const Lattice& lattice, std::span<const double> f,
                                    std::span<const double> g, const Weight& v, const Weight& w,
                                    const Paraproduct& p, std::span<const double> n1,
                                    std::span<const double> n2);
DominationForm domination_form_para(const Lattice& lattice, std::span<const double> f,
                                    std::span<const double> g, const Weight& v, const Weight& w,
                                    const Paraproduct& p, const BumpGauge& g1, const BumpGauge& g2);

/// Kernels a_I(x, y) = |I|^{-1} sgn Delta_I^n(f w^{1/2})(y) sgn Delta_I^n(g v^{1/2})(x),
/// attaining the first two steps of the shift chain with equality.
HaarShift worst_kernel(std::shared_ptr<const Lattice> lattice, std::span<const double> f,
                       std::span<const double> g, const Weight& v, const Weight& w, int complexity);

} // namespace bumpcert
