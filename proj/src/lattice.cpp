#include "bumpcert/lattice.hpp"

#include "bumpcert/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace bumpcert {

Lattice Lattice::build(int depth, double root_mass, const Splitter& split) {
    if (depth < 0) throw ParameterError("lattice depth must be nonnegative");
    if (!(root_mass > 0.0)) throw ParameterError("lattice root mass must be positive");
    Lattice lat;
    lat.depth_ = depth;
    lat.cells_.push_back(Cell{0, 0, 0, 0, root_mass, 0, 0});
    lat.level_begin_.push_back(0);
    for (int d = 0; d < depth; ++d) {
        const CellId begin = lat.level_begin_.back();
        const CellId end = static_cast<CellId>(lat.cells_.size());
        lat.level_begin_.push_back(end);
        for (CellId id = begin; id < end; ++id) {
            const std::vector<double> frac = split(d, id);
            if (frac.empty()) throw ParameterError("every non-leaf cell needs at least one child");
            double total = 0.0;
            for (double x : frac) {
                if (!(x > 0.0)) throw ParameterError("child mass fractions must be positive");
                total += x;
            }
            if (std::abs(total - 1.0) > 1e-12)
                throw ParameterError("child mass fractions must sum to 1");
            const double parent_mass = lat.cells_[id].mass;
            lat.cells_[id].first_child = static_cast<CellId>(lat.cells_.size());
            lat.cells_[id].num_children = static_cast<std::uint32_t>(frac.size());
            double assigned = 0.0;
            for (std::size_t k = 0; k < frac.size(); ++k) {
                // The last child absorbs rounding so masses add up exactly.
                const double m = k + 1 == frac.size() ? parent_mass - assigned
                                                      : parent_mass * frac[k] / total;
                assigned += m;
                lat.cells_.push_back(Cell{id, 0, 0, d + 1, m, 0, 0});
            }
        }
    }
    lat.level_begin_.push_back(static_cast<CellId>(lat.cells_.size()));
    const Range leaves = lat.level(depth);
    if (leaves.size() > (std::size_t{1} << 22)) throw ParameterError("lattice too large");
    for (CellId id = leaves.begin; id < leaves.end; ++id) {
        lat.cells_[id].leaf_begin = id - leaves.begin;
        lat.cells_[id].leaf_end = id - leaves.begin + 1;
        lat.leaf_mass_.push_back(lat.cells_[id].mass);
    }
    for (int d = depth - 1; d >= 0; --d) {
        const Range r = lat.level(d);
        for (CellId id = r.begin; id < r.end; ++id) {
            Cell& c = lat.cells_[id];
            c.leaf_begin = lat.cells_[c.first_child].leaf_begin;
            c.leaf_end = lat.cells_[c.first_child + c.num_children - 1].leaf_end;
        }
    }
    return lat;
}

Lattice Lattice::uniform(int depth, int branching) {
    if (branching < 1) throw ParameterError("branching must be at least 1");
    const std::vector<double> frac(static_cast<std::size_t>(branching), 1.0 / branching);
    return build(depth, 1.0, [&](int, CellId) { return frac; });
}

Lattice Lattice::random_masses(int depth, int branching, std::uint64_t seed) {
    if (branching < 1) throw ParameterError("branching must be at least 1");
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> expo(1.0);
    return build(depth, 1.0, [&](int, CellId) {
        std::vector<double> frac(static_cast<std::size_t>(branching));
        double total = 0.0;
        for (double& x : frac) {
            x = 0.05 + expo(rng);
            total += x;
        }
        for (double& x : frac) x /= total;
        return frac;
    });
}

Lattice::Range Lattice::children(CellId id) const {
    const Cell& c = cells_[id];
    return {c.first_child, c.first_child + c.num_children};
}

Lattice::Range Lattice::descendants(CellId id, int n) const {
    if (n < 0 || cells_[id].depth + n > depth_)
        throw RangeError("descendants: depth(I) + n exceeds lattice depth");
    CellId first = id;
    CellId last = id;
    for (int j = 0; j < n; ++j) {
        first = cells_[first].first_child;
        last = cells_[last].first_child + cells_[last].num_children - 1;
    }
    return {first, last + 1};
}

Lattice::Range Lattice::level(int d) const {
    if (d < 0 || d > depth_) throw RangeError("level out of range");
    return {level_begin_[static_cast<std::size_t>(d)], level_begin_[static_cast<std::size_t>(d) + 1]};
}

Lattice Lattice::coarsen(std::vector<int> levels, std::vector<CellId>* map) const {
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    if (levels.empty() || levels.front() != 0 || levels.back() != depth_)
        throw ParameterError("coarsen: levels must include 0 and the lattice depth");
    std::vector<CellId> orig{root()};
    Lattice lat;
    lat.depth_ = static_cast<int>(levels.size()) - 1;
    lat.cells_.push_back(Cell{0, 0, 0, 0, cells_[root()].mass, 0, 0});
    lat.level_begin_.push_back(0);
    for (int li = 0; li < lat.depth_; ++li) {
        const CellId begin = lat.level_begin_.back();
        const CellId end = static_cast<CellId>(lat.cells_.size());
        lat.level_begin_.push_back(end);
        const int step = levels[static_cast<std::size_t>(li) + 1] - levels[static_cast<std::size_t>(li)];
        for (CellId id = begin; id < end; ++id) {
            const Range kids = descendants(orig[id], step);
            lat.cells_[id].first_child = static_cast<CellId>(lat.cells_.size());
            lat.cells_[id].num_children = static_cast<std::uint32_t>(kids.size());
            for (CellId k = kids.begin; k < kids.end; ++k) {
                lat.cells_.push_back(Cell{id, 0, 0, li + 1, cells_[k].mass, 0, 0});
                orig.push_back(k);
            }
        }
    }
    lat.level_begin_.push_back(static_cast<CellId>(lat.cells_.size()));
    lat.leaf_mass_ = leaf_mass_;
    for (CellId id = 0; id < lat.cells_.size(); ++id) {
        lat.cells_[id].leaf_begin = cells_[orig[id]].leaf_begin;
        lat.cells_[id].leaf_end = cells_[orig[id]].leaf_end;
    }
    if (map) {
        map->assign(cells_.size(), kNoCell);
        for (CellId id = 0; id < orig.size(); ++id) (*map)[orig[id]] = id;
    }
    return lat;
}

std::string Lattice::path(CellId id) const {
    std::string out;
    while (id != root()) {
        const CellId parent = cells_[id].parent;
        const CellId idx = id - cells_[parent].first_child;
        out.insert(out.begin(), idx < 10 ? static_cast<char>('0' + idx) : static_cast<char>('a' + idx - 10));
        id = parent;
    }
    return out;
}

CellId Lattice::find(const std::string& path) const {
    CellId id = root();
    for (char ch : path) {
        std::uint32_t k;
        if (ch >= '0' && ch <= '9') {
            k = static_cast<std::uint32_t>(ch - '0');
        } else if (ch >= 'a' && ch <= 'z') {
            k = static_cast<std::uint32_t>(ch - 'a' + 10);
        } else {
            throw ParameterError("invalid character in cell path '" + path + "'");
        }
        if (k >= cells_[id].num_children) throw RangeError("cell path '" + path + "' leaves the lattice");
        id = cells_[id].first_child + k;
    }
    return id;
}

namespace {
void check_size(const Lattice& lat, std::span<const double> f) {
    if (f.size() != lat.num_leaves()) throw ParameterError("leaf vector has wrong length");
}
} // namespace

double Lattice::average(std::span<const double> f, CellId id) const {
    check_size(*this, f);
    const Cell& c = cells_[id];
    double acc = 0.0;
    for (std::size_t j = c.leaf_begin; j < c.leaf_end; ++j) acc += leaf_mass_[j] * f[j];
    return acc / c.mass;
}

std::vector<double> Lattice::cell_averages(std::span<const double> f) const {
    check_size(*this, f);
    // Integrals bottom-up, then divide.
    std::vector<double> integral(cells_.size(), 0.0);
    const Range leaves = level(depth_);
    for (CellId id = leaves.begin; id < leaves.end; ++id)
        integral[id] = leaf_mass_[id - leaves.begin] * f[id - leaves.begin];
    for (int d = depth_ - 1; d >= 0; --d) {
        const Range r = level(d);
        for (CellId id = r.begin; id < r.end; ++id) {
            double acc = 0.0;
            const Range ch = children(id);
            for (CellId k = ch.begin; k < ch.end; ++k) acc += integral[k];
            integral[id] = acc;
        }
    }
    for (CellId id = 0; id < cells_.size(); ++id) integral[id] /= cells_[id].mass;
    return integral;
}

std::vector<double> Lattice::apply_E(CellId id, std::span<const double> f) const {
    const double avg = average(f, id);
    std::vector<double> out(num_leaves(), 0.0);
    const Cell& c = cells_[id];
    for (std::size_t j = c.leaf_begin; j < c.leaf_end; ++j) out[j] = avg;
    return out;
}

std::vector<double> Lattice::apply_delta(CellId id, std::span<const double> f) const {
    return apply_delta_n(id, 1, f);
}

std::vector<double> Lattice::apply_delta_n(CellId id, int n, std::span<const double> f) const {
    check_size(*this, f);
    const Range desc = descendants(id, n);
    const double avg = average(f, id);
    std::vector<double> out(num_leaves(), 0.0);
    for (CellId j = desc.begin; j < desc.end; ++j) {
        const double diff = average(f, j) - avg;
        for (std::size_t l = cells_[j].leaf_begin; l < cells_[j].leaf_end; ++l) out[l] = diff;
    }
    return out;
}

double Lattice::delta_l1(CellId id, int n, std::span<const double> averages) const {
    const Range desc = descendants(id, n);
    double acc = 0.0;
    for (CellId j = desc.begin; j < desc.end; ++j)
        acc += cells_[j].mass * std::abs(averages[j] - averages[id]);
    return acc;
}

std::vector<double> Lattice::accumulate_down(std::span<const double> per_cell) const {
    if (per_cell.size() != cells_.size()) throw ParameterError("per-cell vector has wrong length");
    std::vector<double> acc(per_cell.begin(), per_cell.end());
    for (CellId id = 1; id < cells_.size(); ++id) acc[id] += acc[cells_[id].parent];
    const Range leaves = level(depth_);
    return {acc.begin() + leaves.begin, acc.begin() + leaves.end};
}

double Lattice::l2_norm_sq(std::span<const double> f) const { return inner(f, f); }

double Lattice::inner(std::span<const double> f, std::span<const double> g) const {
    check_size(*this, f);
    check_size(*this, g);
    double acc = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) acc += leaf_mass_[j] * f[j] * g[j];
    return acc;
}

Weight::Weight(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_)
        if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("weights must be finite and nonnegative");
}

Weight Weight::scaled(double factor) const {
    if (!(factor >= 0.0)) throw ParameterError("weight scale must be nonnegative");
    std::vector<double> v(values_);
    for (double& x : v) x *= factor;
    return Weight(std::move(v));
}

std::vector<double> Weight::sqrt_values() const {
    std::vector<double> v(values_.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = std::sqrt(values_[j]);
    return v;
}

bool Weight::is_zero_on(const Lattice& lattice, CellId id) const {
    const auto& c = lattice.cell(id);
    for (std::size_t j = c.leaf_begin; j < c.leaf_end; ++j)
        if (values_[j] != 0.0) return false;
    return true;
}

} // namespace bumpcert
