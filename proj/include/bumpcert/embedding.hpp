#pragma once

#include "bumpcert/functionals.hpp"
#include "bumpcert/gauge.hpp"
#include "bumpcert/lattice.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bumpcert {

struct EmbeddingReport {
    double total = 0.0;
    std::vector<double> terms;       ///< per cell, 0 where skipped
    std::vector<double> by_depth;    ///< partial sums over generations 0..d
    double norm_sq = 0.0;            ///< ||f||^2
    double ratio = 0.0;              ///< total / norm_sq (0 when f = 0)
    double bound = 0.0;
    bool pass = true;
};

/// sum_I n_Psi(N_I^w)^{-1} (|I|^{-1} ||Delta_I(f w^{1/2})||_1)^2 |I|, skipping I with w = 0.
/// Bound 16/c.
EmbeddingReport embed_sum_25(const Lattice& lattice, std::span<const double> f, const Weight& w,
                             const BumpGauge& gauge, double tol = 1e-9);
/// Same with precomputed n_Psi(N_I^w).
EmbeddingReport embed_sum_25(const Lattice& lattice, std::span<const double> f, const Weight& w,
                             std::span<const double> n, double bound, double tol = 1e-9);

/// sum_I <f w^{1/2}>_I^2 a_I |I| / n_Psi(N_I^w); a must be a normalized Carleson sequence. Bound 16.
EmbeddingReport embed_sum_26(const Lattice& lattice, std::span<const double> f, const Weight& w,
                             const BumpGauge& gauge, const CarlesonSeq& a, double tol = 1e-9);
EmbeddingReport embed_sum_26(const Lattice& lattice, std::span<const double> f, const Weight& w,
                             std::span<const double> n, const CarlesonSeq& a, double bound, double tol = 1e-9);

struct LedgerRow {
    CellId root = 0;
    std::string path;
    int generation = 0;
    double partial_lhs = 0.0; ///< telescoped drops over generations < n
    double rhs = 0.0;         ///< sum_{ch_n} |J| B~(J) - |I0| B~(I0)
    double slack = 0.0;       ///< rhs - partial_lhs
    double energy = 0.0;      ///< sum_{ch_n} |J| B~(J)
    double l2 = 0.0;          ///< int_{I0} |f|^2, which bounds energy
};

struct TelescopeLedger {
    std::vector<LedgerRow> rows;
    double min_slack = 0.0;        ///< over telescope rows
    double min_energy_slack = 0.0; ///< min of l2 - energy
    bool pass(double tol = 1e-9) const;
};

/// Ledger of the telescoped Bellman inequalities for every starting cell I0
/// (or only the root). Uses B~(f, N) with the multi-point inequality at constant c/16.
TelescopeLedger telescope_audit_25(const Lattice& lattice, std::span<const double> f, const Weight& w,
                                   const BumpGauge& gauge, bool all_roots = true);
/// Same for B~(f, N, M) with M the Carleson loads and drop a_I f^2 / (16 n).
TelescopeLedger telescope_audit_26(const Lattice& lattice, std::span<const double> f, const Weight& w,
                                   const BumpGauge& gauge, const CarlesonSeq& a, bool all_roots = true);

struct AdversarialResult {
    std::vector<double> f;
    double ratio = 0.0;
    std::vector<double> history; ///< best ratio after each iteration, all restarts in sequence
};

/// Heuristic lower bound for sup_f LHS_25(f) / ||f||^2: alternate fixing the
/// signs of Delta_I(f w^{1/2}) (making the sum a quadratic form) with
/// eigenvector steps of that form. `budget` iterations per restart.
AdversarialResult adversarial_ratio(const Lattice& lattice, const Weight& w, const BumpGauge& gauge,
                                    int budget, std::uint64_t seed = 1, int restarts = 8);

} // namespace bumpcert
