#include "bumpcert/operators.hpp"

#include "bumpcert/error.hpp"

#include "json.hpp"
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace bumpcert {

using nlohmann::json;

namespace {

constexpr double kKernelTol = 1e-12;

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

bool admissible(const Lattice& lat, CellId id, int n) { return lat.cell(id).depth + n <= lat.depth(); }

Eigen::MatrixXd columns_of(std::size_t n, const std::function<std::vector<double>(std::span<const double>)>& apply) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::vector<double> e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        const std::vector<double> col = apply(e);
        for (std::size_t i = 0; i < n; ++i)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
        e[j] = 0.0;
    }
    return out;
}

json parse_json(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ParameterError(fmt::format("{}: malformed JSON: {}", what, e.what()));
    }
}

std::vector<double> times_sqrt(std::span<const double> x, const std::vector<double>& sq) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * sq[i];
    return out;
}

} // namespace

// ---------------------------------------------------------------- HaarShift

HaarShift::HaarShift(std::shared_ptr<const Lattice> lattice, int complexity, std::vector<Kernel> kernels)
    : lattice_(std::move(lattice)), complexity_(complexity), kernels_(std::move(kernels)) {
    if (!lattice_) throw ParameterError("shift needs a lattice");
    if (complexity_ < 1) throw ParameterError("shift complexity must be at least 1");
    const Lattice& lat = *lattice_;
    std::sort(kernels_.begin(), kernels_.end(), [](const Kernel& a, const Kernel& b) { return a.cell < b.cell; });
    for (std::size_t k = 0; k < kernels_.size(); ++k) {
        const Kernel& ker = kernels_[k];
        if (ker.cell >= lat.num_cells()) throw ValidationError("shift kernel on a nonexistent cell");
        const std::string where = "'" + lat.path(ker.cell) + "'";
        if (k > 0 && kernels_[k - 1].cell == ker.cell)
            throw ValidationError("duplicate shift kernel at cell " + where);
        if (!admissible(lat, ker.cell, complexity_))
            throw ValidationError("shift kernel at cell " + where + " is too deep for the complexity");
        const std::size_t m = lat.descendants(ker.cell, complexity_).size();
        if (ker.entries.size() != m * m)
            throw ValidationError(fmt::format("shift kernel at cell {} must have {} entries", where, m * m));
        const double bound = 1.0 / lat.cell(ker.cell).mass;
        for (double a : ker.entries) {
            if (!std::isfinite(a) || std::abs(a) > bound * (1.0 + kKernelTol))
                throw ValidationError(fmt::format("kernel bound |a_I| <= 1/|I| = {} violated at cell {} (entry {})",
                                                  bound, where, a));
        }
    }
}

HaarShift HaarShift::zero(std::shared_ptr<const Lattice> lattice, int complexity) {
    return HaarShift(std::move(lattice), complexity, {});
}

HaarShift HaarShift::random(std::shared_ptr<const Lattice> lattice, int complexity, std::uint64_t seed) {
    if (!lattice) throw ParameterError("shift needs a lattice");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<Kernel> kernels;
    for (CellId id = 0; id < lattice->num_cells(); ++id) {
        if (!admissible(*lattice, id, complexity)) break; // cells are ordered by depth
        const std::size_t m = lattice->descendants(id, complexity).size();
        Kernel ker{id, std::vector<double>(m * m)};
        const double bound = 1.0 / lattice->cell(id).mass;
        for (double& a : ker.entries) a = bound * unif(rng);
        kernels.push_back(std::move(ker));
    }
    return HaarShift(std::move(lattice), complexity, std::move(kernels));
}

HaarShift HaarShift::from_json(std::shared_ptr<const Lattice> lattice, const std::string& text) {
    const json doc = parse_json(text, "shift");
    try {
        const int n = doc.at("complexity").get<int>();
        std::vector<Kernel> kernels;
        for (const auto& [path, block] : doc.at("kernels").items())
            kernels.push_back({lattice->find(path), block.get<std::vector<double>>()});
        return HaarShift(std::move(lattice), n, std::move(kernels));
    } catch (const json::exception& e) {
        throw ParameterError(fmt::format("shift: {}", e.what()));
    }
}

std::string HaarShift::to_json() const {
    json doc;
    doc["complexity"] = complexity_;
    doc["kernels"] = json::object();
    for (const Kernel& k : kernels_) doc["kernels"][lattice_->path(k.cell)] = k.entries;
    return doc.dump();
}

std::vector<double> HaarShift::apply_impl(std::span<const double> h, bool transposed) const {
    const Lattice& lat = *lattice_;
    const std::vector<double> avg = lat.cell_averages(h);
    std::vector<double> add(lat.num_cells(), 0.0);
    std::vector<double> p;
    std::vector<double> y;
    for (const Kernel& ker : kernels_) {
        const Lattice::Range desc = lat.descendants(ker.cell, complexity_);
        const std::size_t m = desc.size();
        const double mass = lat.cell(ker.cell).mass;
        p.assign(m, 0.0);
        for (std::size_t j = 0; j < m; ++j)
            p[j] = lat.cell(desc.begin + j).mass * (avg[desc.begin + j] - avg[ker.cell]);
        y.assign(m, 0.0);
        double mean = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < m; ++c)
                acc += (transposed ? ker.entries[c * m + r] : ker.entries[r * m + c]) * p[c];
            y[r] = acc;
            mean += lat.cell(desc.begin + r).mass * acc;
        }
        mean /= mass;
        for (std::size_t r = 0; r < m; ++r) add[desc.begin + r] += y[r] - mean;
    }
    return lat.accumulate_down(add);
}

std::vector<double> HaarShift::apply(std::span<const double> h) const { return apply_impl(h, false); }

std::vector<double> HaarShift::apply_adjoint(std::span<const double> h) const { return apply_impl(h, true); }

Eigen::MatrixXd HaarShift::assemble_matrix() const {
    return columns_of(lattice_->num_leaves(), [this](std::span<const double> h) { return apply(h); });
}

HaarShift HaarShift::transpose() const {
    std::vector<Kernel> kernels = kernels_;
    for (Kernel& ker : kernels) {
        const auto m = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(ker.entries.size()))));
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = r + 1; c < m; ++c) std::swap(ker.entries[r * m + c], ker.entries[c * m + r]);
    }
    return HaarShift(lattice_, complexity_, std::move(kernels));
}

std::vector<HaarShift> HaarShift::decompose_complexity() const {
    if (complexity_ == 1) return {*this};
    const Lattice& lat = *lattice_;
    std::vector<HaarShift> parts;
    for (int k = 0; k < complexity_; ++k) {
        std::vector<int> levels{0, lat.depth()};
        for (int d = k; d <= lat.depth(); d += complexity_) levels.push_back(d);
        std::vector<CellId> map;
        auto coarse = std::make_shared<const Lattice>(lat.coarsen(levels, &map));
        std::vector<Kernel> kernels;
        for (const Kernel& ker : kernels_)
            if (lat.cell(ker.cell).depth % complexity_ == k) kernels.push_back({map[ker.cell], ker.entries});
        parts.emplace_back(std::move(coarse), 1, std::move(kernels));
    }
    return parts;
}

// ------------------------------------------------------------- Paraproduct

Paraproduct::Paraproduct(std::shared_ptr<const Lattice> lattice, std::vector<std::vector<double>> delta_b)
    : lattice_(std::move(lattice)), delta_b_(std::move(delta_b)) {
    if (!lattice_) throw ParameterError("paraproduct needs a lattice");
    const Lattice& lat = *lattice_;
    delta_b_.resize(lat.num_cells());
    for (CellId id = 0; id < lat.num_cells(); ++id) {
        const auto& d = delta_b_[id];
        if (d.empty()) continue;
        const std::string where = "'" + lat.path(id) + "'";
        const Lattice::Range ch = lat.children(id);
        if (d.size() != ch.size())
            throw ValidationError(fmt::format("Delta_I b at cell {} needs {} child values", where, ch.size()));
        double mean = 0.0;
        double scale = 0.0;
        for (std::size_t j = 0; j < d.size(); ++j) {
            if (!std::isfinite(d[j])) throw ValidationError("Delta_I b at cell " + where + " is not finite");
            mean += lat.cell(ch.begin + j).mass * d[j];
            scale = std::max(scale, std::abs(d[j]));
        }
        if (std::abs(mean / lat.cell(id).mass) > 1e-12 * scale)
            throw ValidationError("Delta_I b at cell " + where + " does not have mean zero");
    }
    carleson().validate(lat);
}

Paraproduct Paraproduct::random(std::shared_ptr<const Lattice> lattice, std::uint64_t seed) {
    if (!lattice) throw ParameterError("paraproduct needs a lattice");
    const Lattice& lat = *lattice;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::vector<std::vector<double>> delta(lat.num_cells());
    std::vector<double> a(lat.num_cells(), 0.0);
    for (CellId id = 0; id < lat.num_cells(); ++id) {
        if (lat.is_leaf(id)) continue;
        const Lattice::Range ch = lat.children(id);
        if (ch.size() < 2) continue;
        auto& d = delta[id];
        d.resize(ch.size());
        double mean = 0.0;
        for (std::size_t j = 0; j < d.size(); ++j) {
            d[j] = gauss(rng);
            mean += lat.cell(ch.begin + j).mass * d[j];
        }
        mean /= lat.cell(id).mass;
        double sup = 0.0;
        for (double& x : d) {
            x -= mean;
            sup = std::max(sup, std::abs(x));
        }
        a[id] = sup * sup;
    }
    const double norm = CarlesonSeq(a).norm(lat).value;
    if (norm > 0.0) {
        const double s = 1.0 / std::sqrt(norm);
        for (auto& d : delta)
            for (double& x : d) x *= s;
    }
    return Paraproduct(std::move(lattice), std::move(delta));
}

Paraproduct Paraproduct::from_json(std::shared_ptr<const Lattice> lattice, const std::string& text) {
    const json doc = parse_json(text, "paraproduct");
    try {
        std::vector<std::vector<double>> delta(lattice->num_cells());
        for (const auto& [path, values] : doc.at("delta_b").items())
            delta[lattice->find(path)] = values.get<std::vector<double>>();
        return Paraproduct(std::move(lattice), std::move(delta));
    } catch (const json::exception& e) {
        throw ParameterError(fmt::format("paraproduct: {}", e.what()));
    }
}

std::string Paraproduct::to_json() const {
    json doc;
    doc["delta_b"] = json::object();
    for (CellId id = 0; id < lattice_->num_cells(); ++id)
        if (!delta_b_[id].empty()) doc["delta_b"][lattice_->path(id)] = delta_b_[id];
    return doc.dump();
}

CarlesonSeq Paraproduct::carleson() const {
    std::vector<double> a(lattice_->num_cells(), 0.0);
    for (CellId id = 0; id < a.size(); ++id)
        for (double x : delta_b_[id]) a[id] = std::max(a[id], x * x);
    return CarlesonSeq(std::move(a));
}

std::vector<double> Paraproduct::apply(std::span<const double> h) const {
    const Lattice& lat = *lattice_;
    const std::vector<double> avg = lat.cell_averages(h);
    std::vector<double> add(lat.num_cells(), 0.0);
    for (CellId id = 0; id < lat.num_cells(); ++id) {
        const auto& d = delta_b_[id];
        if (d.empty()) continue;
        const CellId first = lat.children(id).begin;
        for (std::size_t j = 0; j < d.size(); ++j) add[first + j] += avg[id] * d[j];
    }
    return lat.accumulate_down(add);
}

std::vector<double> Paraproduct::apply_adjoint(std::span<const double> g) const {
    const Lattice& lat = *lattice_;
    const std::vector<double> avg = lat.cell_averages(g);
    std::vector<double> add(lat.num_cells(), 0.0);
    for (CellId id = 0; id < lat.num_cells(); ++id) {
        const auto& d = delta_b_[id];
        if (d.empty()) continue;
        const CellId first = lat.children(id).begin;
        double acc = 0.0;
        for (std::size_t j = 0; j < d.size(); ++j) acc += d[j] * lat.cell(first + j).mass * avg[first + j];
        add[id] = acc / lat.cell(id).mass;
    }
    return lat.accumulate_down(add);
}

Eigen::MatrixXd Paraproduct::assemble_matrix() const {
    return columns_of(lattice_->num_leaves(), [this](std::span<const double> h) { return apply(h); });
}

// --------------------------------------------------------------- two-weight

LinearOperator weighted_operator(const Lattice& lattice, LinearOperator::Map apply,
                                 LinearOperator::Map adjoint, const Weight& v, const Weight& w) {
    if (v.size() != lattice.num_leaves() || w.size() != lattice.num_leaves())
        throw ParameterError("weights do not match the lattice");
    auto sv = std::make_shared<std::vector<double>>(v.sqrt_values());
    auto sw = std::make_shared<std::vector<double>>(w.sqrt_values());
    LinearOperator op;
    op.dim = lattice.num_leaves();
    op.measure.assign(lattice.leaf_masses().begin(), lattice.leaf_masses().end());
    op.apply = [=](std::span<const double> x) { return times_sqrt(apply(times_sqrt(x, *sw)), *sv); };
    op.adjoint = [=](std::span<const double> y) { return times_sqrt(adjoint(times_sqrt(y, *sv)), *sw); };
    return op;
}

namespace {

NormEstimate norm_of(const LinearOperator& op, std::size_t dense_limit) {
    if (op.dim <= dense_limit) {
        NormEstimate est;
        est.method = "dense";
        est.value = dense_spectral_norm(dense_matrix(op));
        return est;
    }
    return power_norm(op);
}

} // namespace

NormEstimate two_weight_norm(const HaarShift& s, const Weight& v, const Weight& w, std::size_t dense_limit) {
    const LinearOperator op = weighted_operator(
        s.lattice(), [&s](std::span<const double> x) { return s.apply(x); },
        [&s](std::span<const double> x) { return s.apply_adjoint(x); }, v, w);
    return norm_of(op, dense_limit);
}

NormEstimate two_weight_norm(const Paraproduct& p, const Weight& v, const Weight& w, std::size_t dense_limit) {
    const LinearOperator op = weighted_operator(
        p.lattice(), [&p](std::span<const double> x) { return p.apply(x); },
        [&p](std::span<const double> x) { return p.apply_adjoint(x); }, v, w);
    return norm_of(op, dense_limit);
}

double weighted_bilinear(const Lattice& lattice, const std::vector<double>& t_of_fw,
                         std::span<const double> g, const Weight& v) {
    return lattice.inner(t_of_fw, times_sqrt(g, v.sqrt_values()));
}

// --------------------------------------------------------------- domination

namespace {

void finish(DominationForm& d) {
    d.split_bound = std::sqrt(d.e1 * d.e2);
    d.t_opt = d.e1 > 0.0 && d.e2 > 0.0 ? std::pow(d.e2 / d.e1, 0.25) : 1.0;
}

void check_cells(const Lattice& lat, std::span<const double> n1, std::span<const double> n2) {
    if (n1.size() != lat.num_cells() || n2.size() != lat.num_cells())
        throw ParameterError("per-cell n_Psi arrays have wrong length");
}

} // namespace

DominationForm domination_form_shift(const Lattice& lat, std::span<const double> f, std::span<const double> g,
                                     const Weight& v, const Weight& w, std::span<const double> n1,
                                     std::span<const double> n2, int complexity) {
    check_cells(lat, n1, n2);
    const std::vector<double> aw = lat.cell_averages(times_sqrt(f, w.sqrt_values()));
    const std::vector<double> av = lat.cell_averages(times_sqrt(g, v.sqrt_values()));
    DominationForm d;
    d.terms.assign(lat.num_cells(), 0.0);
    for (CellId id = 0; id < lat.num_cells(); ++id) {
        if (!admissible(lat, id, complexity)) break;
        const double a = lat.delta_l1(id, complexity, aw);
        const double b = lat.delta_l1(id, complexity, av);
        const double mass = lat.cell(id).mass;
        d.terms[id] = a * b / mass;
        d.value += d.terms[id];
        if (a > 0.0) d.e1 += a * a / (mass * n1[id]);
        if (b > 0.0) d.e2 += b * b / (mass * n2[id]);
    }
    finish(d);
    return d;
}

DominationForm domination_form_shift(const Lattice& lat, std::span<const double> f, std::span<const double> g,
                                     const Weight& v, const Weight& w, const BumpGauge& g1,
                                     const BumpGauge& g2, int complexity) {
    const auto n1 = cell_n_psi(lat, w, g1);
    const auto n2 = cell_n_psi(lat, v, g2);
    return domination_form_shift(lat, f, g, v, w, n1, n2, complexity);
}

DominationForm domination_form_para(const Lattice& lat, std::span<const double> f, std::span<const double> g,
                                    const Weight& v, const Weight& w, const Paraproduct& p,
                                    std::span<const double> n1, std::span<const double> n2) {
    check_cells(lat, n1, n2);
    const std::vector<double> aw = lat.cell_averages(times_sqrt(f, w.sqrt_values()));
    const std::vector<double> av = lat.cell_averages(times_sqrt(g, v.sqrt_values()));
    const CarlesonSeq a = p.carleson();
    DominationForm d;
    d.terms.assign(lat.num_cells(), 0.0);
    for (CellId id = 0; id < lat.num_cells(); ++id) {
        if (lat.is_leaf(id)) continue;
        const double b = lat.delta_l1(id, 1, av);
        const double mass = lat.cell(id).mass;
        d.terms[id] = std::abs(aw[id]) * std::sqrt(a[id]) * b;
        d.value += d.terms[id];
        if (aw[id] != 0.0) d.e1 += aw[id] * aw[id] * a[id] * mass / n1[id];
        if (b > 0.0) d.e2 += b * b / (mass * n2[id]);
    }
    finish(d);
    return d;
}

DominationForm domination_form_para(const Lattice& lat, std::span<const double> f, std::span<const double> g,
                                    const Weight& v, const Weight& w, const Paraproduct& p,
                                    const BumpGauge& g1, const BumpGauge& g2) {
    const auto n1 = cell_n_psi(lat, w, g1);
    const auto n2 = cell_n_psi(lat, v, g2);
    return domination_form_para(lat, f, g, v, w, p, n1, n2);
}

HaarShift worst_kernel(std::shared_ptr<const Lattice> lattice, std::span<const double> f,
                       std::span<const double> g, const Weight& v, const Weight& w, int complexity) {
    if (!lattice) throw ParameterError("worst_kernel needs a lattice");
    const Lattice& lat = *lattice;
    const std::vector<double> aw = lat.cell_averages(times_sqrt(f, w.sqrt_values()));
    const std::vector<double> av = lat.cell_averages(times_sqrt(g, v.sqrt_values()));
    std::vector<HaarShift::Kernel> kernels;
    for (CellId id = 0; id < lat.num_cells(); ++id) {
        if (!admissible(lat, id, complexity)) break;
        const Lattice::Range desc = lat.descendants(id, complexity);
        const std::size_t m = desc.size();
        const double inv = 1.0 / lat.cell(id).mass;
        HaarShift::Kernel ker{id, std::vector<double>(m * m)};
        for (std::size_t r = 0; r < m; ++r) {
            const double sr = sgn(av[desc.begin + r] - av[id]);
            for (std::size_t c = 0; c < m; ++c)
                ker.entries[r * m + c] = inv * sr * sgn(aw[desc.begin + c] - aw[id]);
        }
        kernels.push_back(std::move(ker));
    }
    return HaarShift(std::move(lattice), complexity, std::move(kernels));
}

} // namespace bumpcert
