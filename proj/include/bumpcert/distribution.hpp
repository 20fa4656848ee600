#pragma once

#include "bumpcert/gauge.hpp"
#include "bumpcert/lattice.hpp"

#include <span>
#include <vector>

namespace bumpcert {

/// Right-continuous step function on [0, inf) with compact support: value
/// values()[j] on [ends()[j-1], ends()[j]) (ends()[-1] = 0) and 0 after the
/// last end. Canonical form merges equal neighbours and drops a zero tail.
class StepFunction {
public:
    StepFunction() = default;
    StepFunction(std::vector<double> ends, std::vector<double> values);

    std::span<const double> ends() const { return ends_; }
    std::span<const double> values() const { return values_; }
    std::size_t pieces() const { return values_.size(); }
    double length(std::size_t j) const { return ends_[j] - (j == 0 ? 0.0 : ends_[j - 1]); }
    double operator()(double t) const;
    double integral() const;
    double abs_integral() const;
    bool is_zero() const { return values_.empty(); }

    /// sum_k coeffs[k] * fns[k] on the union of breakpoints.
    static StepFunction combine(std::span<const double> coeffs, std::span<const StepFunction> fns);
    StepFunction operator+(const StepFunction& other) const;
    StepFunction operator-(const StepFunction& other) const;
    StepFunction scaled(double factor) const;

private:
    void canonicalize();

    std::vector<double> ends_;
    std::vector<double> values_;
};

/// Normalized distribution function: a step function with values in (0, 1],
/// strictly decreasing across breakpoints.
class DistFn {
public:
    DistFn() = default;
    /// Validates and canonicalizes; throws ValidationError if not a distribution function.
    explicit DistFn(StepFunction steps);

    /// N(t) = mass{w > t} / total from sample values with their masses.
    static DistFn from_samples(std::span<const double> masses, std::span<const double> values);
    /// sum_k alpha_k N_k
    static DistFn mixture(std::span<const double> alpha, std::span<const DistFn> parts);

    const StepFunction& steps() const { return steps_; }
    double operator()(double t) const { return steps_(t); }
    /// int_0^inf N(t) dt, the average of the generating weight.
    double integral() const { return steps_.integral(); }
    bool is_zero() const { return steps_.is_zero(); }

private:
    StepFunction steps_;
};

/// Distribution function N_I^w of w over cell I.
DistFn dist_fn(const Lattice& lattice, const Weight& w, CellId id);
/// N_I^w for every cell.
std::vector<DistFn> cell_dist_fns(const Lattice& lattice, const Weight& w);

/// n_Psi(N) = int_0^inf N(t) Psi(N(t)) dt; 0 for the zero distribution.
double n_psi(const DistFn& n, const BumpGauge& gauge);

} // namespace bumpcert
