#pragma once

#include "bumpcert/distribution.hpp"
#include "bumpcert/gauge.hpp"
#include "bumpcert/lattice.hpp"

#include <vector>

namespace bumpcert {

/// Value of a supremum over cells together with the cell attaining it.
struct CellMax {
    double value = 0.0;
    CellId argmax = 0;
};

/// n_Psi(N_I^w) for every cell.
std::vector<double> cell_n_psi(const Lattice& lattice, const Weight& w, const BumpGauge& gauge);

/// sup_I n_{g1}(N_I^v) n_{g2}(N_I^w). Dividing v by the returned value makes
/// the supremum at most 1.
CellMax bump_constant(const Lattice& lattice, const Weight& v, const Weight& w,
                      const BumpGauge& g1, const BumpGauge& g2);

/// sup_I <v>_I^{1/2} <w>_I^{1/2}
CellMax a2_constant(const Lattice& lattice, const Weight& v, const Weight& w);

/// sup_I ||v||_{L^Phi1(I)} ||w||_{L^Phi2(I)}
CellMax orlicz_bump_constant(const Lattice& lattice, const Weight& v, const Weight& w,
                             const YoungFunction& phi1, const YoungFunction& phi2);

/// ||w||_{L^Phi(I)} for every cell.
std::vector<double> cell_orlicz_norms(const Lattice& lattice, const Weight& w, const YoungFunction& phi);

/// Nonnegative coefficients a_I, one per cell.
class CarlesonSeq {
public:
    CarlesonSeq() = default;
    explicit CarlesonSeq(std::vector<double> coeffs);

    std::span<const double> coeffs() const { return coeffs_; }
    double operator[](CellId id) const { return coeffs_[id]; }
    std::size_t size() const { return coeffs_.size(); }

    /// M_I = mass(I)^{-1} sum_{I' in I} a_{I'} mass(I'), for every cell.
    std::vector<double> loads(const Lattice& lattice) const;
    /// sup_I M_I
    CellMax norm(const Lattice& lattice) const;
    /// Throws ValidationError unless sup_I M_I <= 1 (+ tol).
    void validate(const Lattice& lattice, double tol = 1e-12) const;
    CarlesonSeq scaled(double factor) const;
    /// Rescale so that sup_I M_I = 1 (no-op for the zero sequence).
    CarlesonSeq normalized(const Lattice& lattice) const;

private:
    std::vector<double> coeffs_;
};

/// M_I for a single cell.
double carleson_load(const Lattice& lattice, const CarlesonSeq& a, CellId id);

} // namespace bumpcert
