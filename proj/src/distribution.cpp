#include "bumpcert/distribution.hpp"

#include "bumpcert/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bumpcert {

StepFunction::StepFunction(std::vector<double> ends, std::vector<double> values)
    : ends_(std::move(ends)), values_(std::move(values)) {
    if (ends_.size() != values_.size()) throw ParameterError("step function: size mismatch");
    double prev = 0.0;
    for (std::size_t j = 0; j < ends_.size(); ++j) {
        if (!(ends_[j] > prev) || !std::isfinite(ends_[j]))
            throw ParameterError("step function: breakpoints must be finite and increasing from 0");
        if (!std::isfinite(values_[j])) throw ParameterError("step function: non-finite value");
        prev = ends_[j];
    }
    canonicalize();
}

void StepFunction::canonicalize() {
    std::vector<double> ends;
    std::vector<double> values;
    ends.reserve(ends_.size());
    values.reserve(values_.size());
    for (std::size_t j = 0; j < ends_.size(); ++j) {
        if (!values.empty() && values.back() == values_[j]) {
            ends.back() = ends_[j];
        } else {
            ends.push_back(ends_[j]);
            values.push_back(values_[j]);
        }
    }
    while (!values.empty() && values.back() == 0.0) {
        values.pop_back();
        ends.pop_back();
    }
    ends_ = std::move(ends);
    values_ = std::move(values);
}

double StepFunction::operator()(double t) const {
    if (t < 0.0) return values_.empty() ? 0.0 : values_.front();
    const auto it = std::upper_bound(ends_.begin(), ends_.end(), t);
    if (it == ends_.end()) return 0.0;
    return values_[static_cast<std::size_t>(it - ends_.begin())];
}

double StepFunction::integral() const {
    double acc = 0.0;
    for (std::size_t j = 0; j < values_.size(); ++j) acc += length(j) * values_[j];
    return acc;
}

double StepFunction::abs_integral() const {
    double acc = 0.0;
    for (std::size_t j = 0; j < values_.size(); ++j) acc += length(j) * std::abs(values_[j]);
    return acc;
}

StepFunction StepFunction::combine(std::span<const double> coeffs, std::span<const StepFunction> fns) {
    if (coeffs.size() != fns.size()) throw ParameterError("combine: size mismatch");
    std::vector<double> ends;
    for (const auto& f : fns) ends.insert(ends.end(), f.ends_.begin(), f.ends_.end());
    std::sort(ends.begin(), ends.end());
    ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
    std::vector<double> values(ends.size(), 0.0);
    for (std::size_t k = 0; k < fns.size(); ++k) {
        const StepFunction& f = fns[k];
        std::size_t piece = 0;
        for (std::size_t j = 0; j < ends.size() && piece < f.ends_.size(); ++j) {
            values[j] += coeffs[k] * f.values_[piece];
            if (ends[j] == f.ends_[piece]) ++piece;
        }
    }
    StepFunction out;
    out.ends_ = std::move(ends);
    out.values_ = std::move(values);
    out.canonicalize();
    return out;
}

StepFunction StepFunction::operator+(const StepFunction& other) const {
    const double c[2] = {1.0, 1.0};
    const StepFunction f[2] = {*this, other};
    return combine(c, f);
}

StepFunction StepFunction::operator-(const StepFunction& other) const {
    const double c[2] = {1.0, -1.0};
    const StepFunction f[2] = {*this, other};
    return combine(c, f);
}

StepFunction StepFunction::scaled(double factor) const {
    StepFunction out(*this);
    for (double& v : out.values_) v *= factor;
    out.canonicalize();
    return out;
}

DistFn::DistFn(StepFunction steps) : steps_(std::move(steps)) {
    const auto v = steps_.values();
    for (std::size_t j = 0; j < v.size(); ++j) {
        if (!(v[j] > 0.0) || v[j] > 1.0 + 1e-12)
            throw ValidationError("distribution function values must lie in (0, 1]");
        if (j > 0 && !(v[j] < v[j - 1]))
            throw ValidationError("distribution function must be decreasing");
    }
}

DistFn DistFn::from_samples(std::span<const double> masses, std::span<const double> values) {
    if (masses.size() != values.size()) throw ParameterError("from_samples: size mismatch");
    double total = 0.0;
    std::vector<std::pair<double, double>> pts; // (value, mass), positive values only
    for (std::size_t j = 0; j < masses.size(); ++j) {
        total += masses[j];
        if (values[j] > 0.0) pts.emplace_back(values[j], masses[j]);
    }
    if (!(total > 0.0)) throw ParameterError("from_samples: total mass must be positive");
    std::sort(pts.begin(), pts.end());
    std::vector<double> ends;
    std::vector<double> mass;
    for (const auto& [value, m] : pts) {
        if (!ends.empty() && ends.back() == value) {
            mass.back() += m;
        } else {
            ends.push_back(value);
            mass.push_back(m);
        }
    }
    // On [u_{j-1}, u_j) the superlevel set {w > t} is {w >= u_j}.
    std::vector<double> vals(ends.size());
    double suffix = 0.0;
    for (std::size_t j = ends.size(); j-- > 0;) {
        suffix += mass[j];
        vals[j] = std::min(1.0, suffix / total);
    }
    return DistFn(StepFunction(std::move(ends), std::move(vals)));
}

DistFn DistFn::mixture(std::span<const double> alpha, std::span<const DistFn> parts) {
    std::vector<StepFunction> fns;
    fns.reserve(parts.size());
    for (const auto& p : parts) fns.push_back(p.steps_);
    const StepFunction sum = StepFunction::combine(alpha, fns);
    // Rounding may leave a one-ulp rise where the exact mixture is flat.
    std::vector<double> ends(sum.ends().begin(), sum.ends().end());
    std::vector<double> values(sum.values().begin(), sum.values().end());
    for (std::size_t j = 1; j < values.size(); ++j) values[j] = std::min(values[j], values[j - 1]);
    for (double& v : values) v = std::min(v, 1.0);
    return DistFn(StepFunction(std::move(ends), std::move(values)));
}

DistFn dist_fn(const Lattice& lattice, const Weight& w, CellId id) {
    const auto& c = lattice.cell(id);
    const auto masses = lattice.leaf_masses().subspan(c.leaf_begin, c.leaf_end - c.leaf_begin);
    const auto values = w.values().subspan(c.leaf_begin, c.leaf_end - c.leaf_begin);
    return DistFn::from_samples(masses, values);
}

std::vector<DistFn> cell_dist_fns(const Lattice& lattice, const Weight& w) {
    if (w.size() != lattice.num_leaves()) throw ParameterError("weight does not match lattice");
    std::vector<DistFn> out;
    out.reserve(lattice.num_cells());
    for (CellId id = 0; id < lattice.num_cells(); ++id) out.push_back(dist_fn(lattice, w, id));
    return out;
}

double n_psi(const DistFn& n, const BumpGauge& gauge) {
    const StepFunction& s = n.steps();
    double acc = 0.0;
    for (std::size_t j = 0; j < s.pieces(); ++j) acc += s.length(j) * gauge.phi(s.values()[j]);
    return acc;
}

} // namespace bumpcert
