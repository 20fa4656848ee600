#pragma once

#include "bumpcert/distribution.hpp"
#include "bumpcert/functionals.hpp"
#include "bumpcert/lattice.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace bumpcert {

std::uint64_t splitmix64(std::uint64_t x);
/// Seed of trial k, computable without running trials < k.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t k);
/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

using Rng = std::mt19937_64;

struct WeightSpec {
    std::string kind = "lognormal"; ///< constant | lognormal | power | a2-extremal-pair | explicit
    std::map<std::string, double> params;
    std::vector<double> values; ///< explicit kind
    bool has_seed = false;
    std::uint64_t seed = 0;
};

enum class WeightSlot { v, w };

/// Weight on the leaves. Leaves are identified with consecutive intervals of
/// [0, |root|] in document order for the power kinds. a2-extremal-pair gives
/// x^a in the v slot and x^{-a} in the w slot.
/// Throws UsageError on out-of-range parameters.
Weight generate_weight(const WeightSpec& spec, const Lattice& lattice, std::uint64_t seed,
                       WeightSlot slot = WeightSlot::w);

/// Average of x^a over [x0, x1], a > -1.
double power_average(double a, double x0, double x1);

struct DistFnSpec {
    int max_pieces = 6;
    double sigma = 1.5;     ///< log-normal spread of sample values
    double zero_prob = 0.2; ///< chance a sample is 0, so N(0) < 1
};

DistFn random_distfn(Rng& rng, const DistFnSpec& spec = {});
/// Random point of the simplex with k coordinates bounded away from 0.
std::vector<double> random_convex_weights(Rng& rng, int k);
/// Sparse random Carleson sequence scaled to norm exactly 1.
CarlesonSeq random_carleson(const Lattice& lattice, Rng& rng, double density = 0.5);
std::vector<double> random_leaf_vector(const Lattice& lattice, Rng& rng);

} // namespace bumpcert
