#include "bumpcert/embedding.hpp"

#include "bumpcert/bellman.hpp"
#include "bumpcert/distribution.hpp"
#include "bumpcert/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace bumpcert {

namespace {

std::vector<double> f_sqrt_w(std::span<const double> f, const Weight& w) {
    if (f.size() != w.size()) throw ParameterError("f and w have different lengths");
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] * std::sqrt(w[i]);
    return out;
}

void finish(EmbeddingReport& r, const Lattice& lat, std::span<const double> f, double tol) {
    r.by_depth.assign(static_cast<std::size_t>(lat.depth()) + 1, 0.0);
    for (CellId id = 0; id < lat.num_cells(); ++id) {
        r.by_depth[static_cast<std::size_t>(lat.cell(id).depth)] += r.terms[id];
        r.total += r.terms[id];
    }
    for (std::size_t d = 1; d < r.by_depth.size(); ++d) r.by_depth[d] += r.by_depth[d - 1];
    r.norm_sq = lat.l2_norm_sq(f);
    r.ratio = r.norm_sq > 0.0 ? r.total / r.norm_sq : 0.0;
    r.pass = r.total <= r.bound * r.norm_sq * (1.0 + tol) + tol * std::numeric_limits<double>::min();
}

double l2_on(const Lattice& lat, std::span<const double> f, CellId id) {
    const auto& c = lat.cell(id);
    double acc = 0.0;
    for (std::size_t j = c.leaf_begin; j < c.leaf_end; ++j) acc += lat.leaf_masses()[j] * f[j] * f[j];
    return acc;
}

// drops[J] is the guaranteed decrease at J (already multiplied by the constant),
// energy[J] = |J| B~(J).
TelescopeLedger telescope(const Lattice& lat, std::span<const double> f, const std::vector<double>& drops,
                          const std::vector<double>& energy, bool all_roots) {
    TelescopeLedger ledger;
    ledger.min_slack = std::numeric_limits<double>::infinity();
    ledger.min_energy_slack = std::numeric_limits<double>::infinity();
    const CellId roots = all_roots ? static_cast<CellId>(lat.num_cells()) : 1;
    for (CellId root = 0; root < roots; ++root) {
        const std::string path = lat.path(root);
        const double l2 = l2_on(lat, f, root);
        double partial = 0.0;
        for (int g = 0; lat.cell(root).depth + g <= lat.depth(); ++g) {
            const Lattice::Range r = lat.descendants(root, g);
            double e = 0.0;
            for (CellId j = r.begin; j < r.end; ++j) e += energy[j];
            LedgerRow row;
            row.root = root;
            row.path = path;
            row.generation = g;
            row.partial_lhs = partial;
            row.energy = e;
            row.rhs = e - energy[root];
            row.slack = row.rhs - row.partial_lhs;
            row.l2 = l2;
            ledger.min_slack = std::min(ledger.min_slack, row.slack);
            ledger.min_energy_slack = std::min(ledger.min_energy_slack, l2 - e);
            ledger.rows.push_back(std::move(row));
            for (CellId j = r.begin; j < r.end; ++j) partial += drops[j];
        }
    }
    return ledger;
}

} // namespace

EmbeddingReport embed_sum_25(const Lattice& lat, std::span<const double> f, const Weight& w,
                             std::span<const double> n, double bound, double tol) {
    if (n.size() != lat.num_cells()) throw ParameterError("per-cell n_Psi array has wrong length");
    const std::vector<double> avg = lat.cell_averages(f_sqrt_w(f, w));
    EmbeddingReport r;
    r.bound = bound;
    r.terms.assign(lat.num_cells(), 0.0);
    for (CellId id = 0; id < lat.num_cells(); ++id) {
        if (lat.is_leaf(id) || !(n[id] > 0.0)) continue;
        const double a = lat.delta_l1(id, 1, avg);
        r.terms[id] = a * a / (lat.cell(id).mass * n[id]);
    }
    finish(r, lat, f, tol);
    return r;
}

EmbeddingReport embed_sum_25(const Lattice& lat, std::span<const double> f, const Weight& w,
                             const BumpGauge& gauge, double tol) {
    return embed_sum_25(lat, f, w, cell_n_psi(lat, w, gauge), gauge.c25(), tol);
}

EmbeddingReport embed_sum_26(const Lattice& lat, std::span<const double> f, const Weight& w,
                             std::span<const double> n, const CarlesonSeq& a, double bound, double tol) {
    if (n.size() != lat.num_cells() || a.size() != lat.num_cells())
        throw ParameterError("per-cell arrays have wrong length");
    a.validate(lat);
    const std::vector<double> avg = lat.cell_averages(f_sqrt_w(f, w));
    EmbeddingReport r;
    r.bound = bound;
    r.terms.assign(lat.num_cells(), 0.0);
    for (CellId id = 0; id < lat.num_cells(); ++id) {
        if (!(n[id] > 0.0)) continue;
        r.terms[id] = avg[id] * avg[id] * a[id] * lat.cell(id).mass / n[id];
    }
    finish(r, lat, f, tol);
    return r;
}

EmbeddingReport embed_sum_26(const Lattice& lat, std::span<const double> f, const Weight& w,
                             const BumpGauge& gauge, const CarlesonSeq& a, double tol) {
    return embed_sum_26(lat, f, w, cell_n_psi(lat, w, gauge), a, gauge.c26(), tol);
}

bool TelescopeLedger::pass(double tol) const {
    for (const LedgerRow& row : rows) {
        if (row.slack < -tol * (1.0 + std::abs(row.energy))) return false;
        if (row.l2 - row.energy < -tol * (1.0 + row.l2)) return false;
    }
    return true;
}

TelescopeLedger telescope_audit_25(const Lattice& lat, std::span<const double> f, const Weight& w,
                                   const BumpGauge& gauge, bool all_roots) {
    const std::vector<DistFn> dists = cell_dist_fns(lat, w);
    std::vector<double> n(lat.num_cells());
    for (CellId id = 0; id < lat.num_cells(); ++id) n[id] = n_psi(dists[id], gauge);
    const EmbeddingReport rep = embed_sum_25(lat, f, w, n, gauge.c25());
    const std::vector<double> avg = lat.cell_averages(f_sqrt_w(f, w));
    std::vector<double> drops(lat.num_cells());
    std::vector<double> energy(lat.num_cells());
    for (CellId id = 0; id < lat.num_cells(); ++id) {
        drops[id] = gauge.c() / 16.0 * rep.terms[id];
        energy[id] = lat.cell(id).mass * bellman_value(avg[id], dists[id], gauge);
    }
    return telescope(lat, f, drops, energy, all_roots);
}

TelescopeLedger telescope_audit_26(const Lattice& lat, std::span<const double> f, const Weight& w,
                                   const BumpGauge& gauge, const CarlesonSeq& a, bool all_roots) {
    const std::vector<DistFn> dists = cell_dist_fns(lat, w);
    std::vector<double> n(lat.num_cells());
    for (CellId id = 0; id < lat.num_cells(); ++id) n[id] = n_psi(dists[id], gauge);
    const EmbeddingReport rep = embed_sum_26(lat, f, w, n, a, gauge.c26());
    const std::vector<double> loads = a.loads(lat);
    const std::vector<double> avg = lat.cell_averages(f_sqrt_w(f, w));
    std::vector<double> drops(lat.num_cells());
    std::vector<double> energy(lat.num_cells());
    for (CellId id = 0; id < lat.num_cells(); ++id) {
        // The leaf terms have no drop inside the lattice.
        drops[id] = lat.is_leaf(id) ? 0.0 : rep.terms[id] / 16.0;
        const double m = std::min(loads[id], 1.0);
        energy[id] = lat.cell(id).mass * bellman_value_m(avg[id], dists[id], m, gauge);
    }
    return telescope(lat, f, drops, energy, all_roots);
}

AdversarialResult adversarial_ratio(const Lattice& lat, const Weight& w, const BumpGauge& gauge, int budget,
                                    std::uint64_t seed, int restarts) {
    if (budget < 0 || restarts < 1) throw ParameterError("adversarial_ratio: bad budget or restart count");
    const std::vector<double> n = cell_n_psi(lat, w, gauge);
    const std::vector<double> sw = w.sqrt_values();
    const std::size_t leaves = lat.num_leaves();
    auto ratio_of = [&](const std::vector<double>& f) {
        return embed_sum_25(lat, f, w, n, gauge.c25()).ratio;
    };
    auto normalize = [&](std::vector<double>& f) {
        const double s = std::sqrt(lat.l2_norm_sq(f));
        if (s > 0.0)
            for (double& x : f) x /= s;
        return s;
    };
    std::vector<double> sigma(lat.num_cells(), 1.0);
    // Gram operator of the quadratic form sum_I l_I(f)^2 / (|I| n_I) with signs fixed.
    auto gram = [&](const std::vector<double>& f) {
        std::vector<double> h(leaves);
        for (std::size_t i = 0; i < leaves; ++i) h[i] = f[i] * sw[i];
        const std::vector<double> avg = lat.cell_averages(h);
        std::vector<double> add(lat.num_cells(), 0.0);
        for (CellId id = 0; id < lat.num_cells(); ++id) {
            if (lat.is_leaf(id) || !(n[id] > 0.0)) continue;
            const Lattice::Range ch = lat.children(id);
            const double mass = lat.cell(id).mass;
            double sbar = 0.0;
            double ell = 0.0;
            for (CellId j = ch.begin; j < ch.end; ++j) {
                sbar += lat.cell(j).mass * sigma[j];
                ell += sigma[j] * lat.cell(j).mass * (avg[j] - avg[id]);
            }
            sbar /= mass;
            const double coef = ell / (mass * n[id]);
            for (CellId j = ch.begin; j < ch.end; ++j) add[j] += coef * (sigma[j] - sbar);
        }
        std::vector<double> out = lat.accumulate_down(add);
        for (std::size_t i = 0; i < leaves; ++i) out[i] *= sw[i];
        return out;
    };

    AdversarialResult best;
    best.f.assign(leaves, 0.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    for (int r = 0; r < restarts; ++r) {
        std::vector<double> f(leaves);
        for (double& x : f) x = gauss(rng);
        normalize(f);
        for (int it = 0; it < budget; ++it) {
            std::vector<double> h(leaves);
            for (std::size_t i = 0; i < leaves; ++i) h[i] = f[i] * sw[i];
            const std::vector<double> avg = lat.cell_averages(h);
            for (CellId id = 1; id < lat.num_cells(); ++id)
                sigma[id] = avg[id] >= avg[lat.cell(id).parent] ? 1.0 : -1.0;
            for (int step = 0; step < 10; ++step) {
                std::vector<double> g = gram(f);
                if (normalize(g) == 0.0) break;
                f = std::move(g);
            }
            const double ratio = ratio_of(f);
            if (ratio > best.ratio) {
                best.ratio = ratio;
                best.f = f;
            }
            best.history.push_back(best.ratio);
        }
    }
    return best;
}

} // namespace bumpcert
