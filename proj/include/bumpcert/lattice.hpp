#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace bumpcert {

using CellId = std::uint32_t;

/// Finite martingale filtration: a rooted tree of cells, all leaves at depth D,
/// arbitrary branching, positive masses with children summing to their parent.
/// Cells are stored level by level with siblings contiguous, so the cells of
/// any generation below a given cell form a contiguous index range and leaves
/// appear in document order.
class Lattice {
public:
    struct Cell {
        CellId parent = 0;
        CellId first_child = 0;
        std::uint32_t num_children = 0;
        int depth = 0;
        double mass = 0.0;
        std::size_t leaf_begin = 0; ///< first leaf index covered by the cell
        std::size_t leaf_end = 0;   ///< one past the last leaf index
    };

    struct Range {
        CellId begin = 0;
        CellId end = 0;
        std::size_t size() const { return end - begin; }
    };

    /// Returns the child mass fractions (summing to 1) of a cell at `depth`.
    using Splitter = std::function<std::vector<double>(int depth, CellId cell)>;

    static Lattice build(int depth, double root_mass, const Splitter& split);
    /// Equal-mass lattice with fixed branching, root mass 1.
    static Lattice uniform(int depth, int branching = 2);
    /// Fixed branching, child fractions drawn from a flat Dirichlet.
    static Lattice random_masses(int depth, int branching, std::uint64_t seed);

    int depth() const { return depth_; }
    std::size_t num_cells() const { return cells_.size(); }
    std::size_t num_leaves() const { return leaf_mass_.size(); }
    const Cell& cell(CellId id) const { return cells_[id]; }
    static constexpr CellId root() { return 0; }
    bool is_leaf(CellId id) const { return cells_[id].num_children == 0; }

    Range children(CellId id) const;
    /// ch_n(I): descendants n generations below I.
    Range descendants(CellId id, int n) const;
    Range level(int depth) const;

    /// Sublattice keeping only the listed generations (must contain 0 and D).
    /// Leaves are the same cells in the same order. If `map` is given it
    /// receives, for every original cell, its id in the sublattice or
    /// kNoCell.
    Lattice coarsen(std::vector<int> levels, std::vector<CellId>* map = nullptr) const;
    static constexpr CellId kNoCell = ~CellId{0};

    std::span<const double> leaf_masses() const { return leaf_mass_; }
    CellId leaf_cell(std::size_t leaf) const { return level(depth_).begin + static_cast<CellId>(leaf); }

    /// Digit string of child indices from the root ("" for the root).
    std::string path(CellId id) const;
    CellId find(const std::string& path) const;

    // Leaf-vector operators. All vectors are indexed by leaf.
    double average(std::span<const double> f, CellId id) const;
    /// Averages of f over every cell, computed bottom-up.
    std::vector<double> cell_averages(std::span<const double> f) const;
    std::vector<double> apply_E(CellId id, std::span<const double> f) const;
    std::vector<double> apply_delta(CellId id, std::span<const double> f) const;
    /// Delta_I^n f = -E_I f + sum_{J in ch_n(I)} E_J f; depth(I) + n must not exceed D.
    std::vector<double> apply_delta_n(CellId id, int n, std::span<const double> f) const;

    /// ||Delta_I^n f||_1 computed from precomputed cell averages.
    double delta_l1(CellId id, int n, std::span<const double> averages) const;

    /// Leaf vector whose value at a leaf is the sum of per_cell over the leaf
    /// and all its ancestors.
    std::vector<double> accumulate_down(std::span<const double> per_cell) const;

    double l2_norm_sq(std::span<const double> f) const;
    double inner(std::span<const double> f, std::span<const double> g) const;

private:
    int depth_ = 0;
    std::vector<Cell> cells_;
    std::vector<CellId> level_begin_;
    std::vector<double> leaf_mass_;
};

/// Nonnegative leaf-level step function.
class Weight {
public:
    Weight() = default;
    explicit Weight(std::vector<double> values);

    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    Weight scaled(double factor) const;
    /// Leaf values of w^{1/2}.
    std::vector<double> sqrt_values() const;
    bool is_zero_on(const Lattice& lattice, CellId id) const;

private:
    std::vector<double> values_;
};

} // namespace bumpcert
