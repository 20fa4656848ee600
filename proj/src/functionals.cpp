#include "bumpcert/functionals.hpp"

#include "bumpcert/error.hpp"

#include <cmath>

namespace bumpcert {

std::vector<double> cell_n_psi(const Lattice& lattice, const Weight& w, const BumpGauge& gauge) {
    if (w.size() != lattice.num_leaves()) throw ParameterError("weight does not match lattice");
    std::vector<double> out(lattice.num_cells());
    for (CellId id = 0; id < lattice.num_cells(); ++id) out[id] = n_psi(dist_fn(lattice, w, id), gauge);
    return out;
}

CellMax bump_constant(const Lattice& lattice, const Weight& v, const Weight& w,
                      const BumpGauge& g1, const BumpGauge& g2) {
    const auto nv = cell_n_psi(lattice, v, g1);
    const auto nw = cell_n_psi(lattice, w, g2);
    CellMax best;
    for (CellId id = 0; id < lattice.num_cells(); ++id) {
        const double p = nv[id] * nw[id];
        if (p > best.value) best = {p, id};
    }
    return best;
}

CellMax a2_constant(const Lattice& lattice, const Weight& v, const Weight& w) {
    const auto av = lattice.cell_averages(v.values());
    const auto aw = lattice.cell_averages(w.values());
    CellMax best;
    for (CellId id = 0; id < lattice.num_cells(); ++id) {
        const double p = std::sqrt(av[id] * aw[id]);
        if (p > best.value) best = {p, id};
    }
    return best;
}

std::vector<double> cell_orlicz_norms(const Lattice& lattice, const Weight& w, const YoungFunction& phi) {
    if (w.size() != lattice.num_leaves()) throw ParameterError("weight does not match lattice");
    std::vector<double> out(lattice.num_cells());
    for (CellId id = 0; id < lattice.num_cells(); ++id) {
        const auto& c = lattice.cell(id);
        const std::size_t len = c.leaf_end - c.leaf_begin;
        out[id] = orlicz_norm(lattice.leaf_masses().subspan(c.leaf_begin, len),
                              w.values().subspan(c.leaf_begin, len), phi);
    }
    return out;
}

CellMax orlicz_bump_constant(const Lattice& lattice, const Weight& v, const Weight& w,
                             const YoungFunction& phi1, const YoungFunction& phi2) {
    const auto nv = cell_orlicz_norms(lattice, v, phi1);
    const auto nw = cell_orlicz_norms(lattice, w, phi2);
    CellMax best;
    for (CellId id = 0; id < lattice.num_cells(); ++id) {
        const double p = nv[id] * nw[id];
        if (p > best.value) best = {p, id};
    }
    return best;
}

CarlesonSeq::CarlesonSeq(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    for (double a : coeffs_)
        if (!(a >= 0.0) || !std::isfinite(a)) throw ParameterError("Carleson coefficients must be nonnegative");
}

std::vector<double> CarlesonSeq::loads(const Lattice& lattice) const {
    if (coeffs_.size() != lattice.num_cells()) throw ParameterError("Carleson sequence does not match lattice");
    // M_I = a_I + sum_k alpha_k M_{I_k}, evaluated bottom-up.
    std::vector<double> m(coeffs_);
    for (int d = lattice.depth() - 1; d >= 0; --d) {
        const auto r = lattice.level(d);
        for (CellId id = r.begin; id < r.end; ++id) {
            const auto ch = lattice.children(id);
            double acc = 0.0;
            for (CellId k = ch.begin; k < ch.end; ++k) acc += lattice.cell(k).mass * m[k];
            m[id] += acc / lattice.cell(id).mass;
        }
    }
    return m;
}

CellMax CarlesonSeq::norm(const Lattice& lattice) const {
    const auto m = loads(lattice);
    CellMax best;
    for (CellId id = 0; id < m.size(); ++id)
        if (m[id] > best.value) best = {m[id], id};
    return best;
}

void CarlesonSeq::validate(const Lattice& lattice, double tol) const {
    const CellMax n = norm(lattice);
    if (n.value > 1.0 + tol)
        throw ValidationError("Carleson normalization violated at cell '" + lattice.path(n.argmax) +
                              "' (load " + std::to_string(n.value) + ")");
}

CarlesonSeq CarlesonSeq::scaled(double factor) const {
    std::vector<double> c(coeffs_);
    for (double& x : c) x *= factor;
    return CarlesonSeq(std::move(c));
}

CarlesonSeq CarlesonSeq::normalized(const Lattice& lattice) const {
    const CellMax n = norm(lattice);
    return n.value > 0.0 ? scaled(1.0 / n.value) : *this;
}

double carleson_load(const Lattice& lattice, const CarlesonSeq& a, CellId id) {
    a.validate(lattice);
    const auto& c = lattice.cell(id);
    // All cells below I at all depths; the subtree occupies one index range per level.
    double acc = 0.0;
    for (int n = 0; c.depth + n <= lattice.depth(); ++n) {
        const auto r = lattice.descendants(id, n);
        for (CellId j = r.begin; j < r.end; ++j) acc += a[j] * lattice.cell(j).mass;
    }
    return acc / c.mass;
}

} // namespace bumpcert
