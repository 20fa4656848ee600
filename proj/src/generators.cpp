#include "bumpcert/generators.hpp"

#include "bumpcert/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace bumpcert {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t k) {
    return splitmix64(splitmix64(master) ^ (k * 0xD1B54A32D192ED03ULL));
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

double power_average(double a, double x0, double x1) {
    if (!(a > -1.0)) throw UsageError("power exponent must exceed -1");
    if (x1 <= x0) return std::pow(x1, a);
    const double b = a + 1.0;
    return (std::pow(x1, b) - std::pow(x0, b)) / (b * (x1 - x0));
}

namespace {

double param(const WeightSpec& spec, const std::string& key, double fallback) {
    const auto it = spec.params.find(key);
    return it == spec.params.end() ? fallback : it->second;
}

void allow(const WeightSpec& spec, std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : spec.params) {
        bool ok = false;
        for (const char* key : keys) ok = ok || k == key;
        if (!ok) throw UsageError(fmt::format("weight kind '{}' has no parameter '{}'", spec.kind, k));
    }
}

std::vector<double> power_leaves(const Lattice& lat, double a) {
    std::vector<double> out(lat.num_leaves());
    double x = 0.0;
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double next = x + lat.leaf_masses()[j];
        out[j] = power_average(a, x, next);
        x = next;
    }
    return out;
}

} // namespace

Weight generate_weight(const WeightSpec& spec, const Lattice& lat, std::uint64_t seed, WeightSlot slot) {
    Rng rng(spec.has_seed ? spec.seed : seed);
    if (spec.kind == "constant") {
        allow(spec, {"value"});
        const double value = param(spec, "value", 1.0);
        if (!(value >= 0.0) || !std::isfinite(value)) throw UsageError("constant weight value must be >= 0");
        return Weight(std::vector<double>(lat.num_leaves(), value));
    }
    if (spec.kind == "lognormal") {
        allow(spec, {"mu", "sigma", "zero_fraction"});
        const double mu = param(spec, "mu", 0.0);
        const double sigma = param(spec, "sigma", 1.0);
        const double zero = param(spec, "zero_fraction", 0.0);
        if (!(sigma >= 0.0) || sigma > 20.0) throw UsageError("lognormal sigma must lie in [0, 20]");
        if (!(zero >= 0.0 && zero < 1.0)) throw UsageError("zero_fraction must lie in [0, 1)");
        std::normal_distribution<double> gauss(mu, sigma);
        std::uniform_real_distribution<double> unif;
        std::vector<double> out(lat.num_leaves());
        for (double& x : out) {
            const double draw = std::exp(gauss(rng));
            x = unif(rng) < zero ? 0.0 : draw;
        }
        return Weight(std::move(out));
    }
    if (spec.kind == "power") {
        allow(spec, {"a"});
        const double a = param(spec, "a", 0.0);
        if (!(a > -1.0) || a > 50.0) throw UsageError("power weight exponent must lie in (-1, 50]");
        return Weight(power_leaves(lat, a));
    }
    if (spec.kind == "a2-extremal-pair") {
        allow(spec, {"a"});
        const double a = param(spec, "a", 0.5);
        if (!(a >= 0.0 && a < 1.0)) throw UsageError("a2-extremal-pair exponent must lie in [0, 1)");
        return Weight(power_leaves(lat, slot == WeightSlot::v ? a : -a));
    }
    if (spec.kind == "explicit") {
        allow(spec, {});
        if (spec.values.size() != lat.num_leaves())
            throw UsageError(fmt::format("explicit weight needs {} leaf values, got {}", lat.num_leaves(),
                                         spec.values.size()));
        try {
            return Weight(spec.values);
        } catch (const ParameterError& e) {
            throw UsageError(e.what());
        }
    }
    throw UsageError("unknown weight kind '" + spec.kind + "'");
}

DistFn random_distfn(Rng& rng, const DistFnSpec& spec) {
    std::uniform_int_distribution<int> pieces(1, spec.max_pieces);
    std::uniform_real_distribution<double> unif(0.01, 1.0);
    std::normal_distribution<double> gauss(0.0, spec.sigma);
    const int k = pieces(rng);
    std::vector<double> masses(static_cast<std::size_t>(k));
    std::vector<double> values(static_cast<std::size_t>(k));
    bool any = false;
    for (int i = 0; i < k; ++i) {
        masses[i] = unif(rng);
        const double u = unif(rng);
        values[i] = u < spec.zero_prob ? 0.0 : std::exp(gauss(rng));
        any = any || values[i] > 0.0;
    }
    if (!any) values[0] = 1.0;
    return DistFn::from_samples(masses, values);
}

std::vector<double> random_convex_weights(Rng& rng, int k) {
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> out(static_cast<std::size_t>(k));
    double total = 0.0;
    for (double& x : out) {
        x = 0.02 + expo(rng);
        total += x;
    }
    for (double& x : out) x /= total;
    return out;
}

CarlesonSeq random_carleson(const Lattice& lat, Rng& rng, double density) {
    std::uniform_real_distribution<double> unif;
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> a(lat.num_cells(), 0.0);
    for (double& x : a)
        if (unif(rng) < density) x = expo(rng);
    return CarlesonSeq(std::move(a)).normalized(lat);
}

std::vector<double> random_leaf_vector(const Lattice& lat, Rng& rng) {
    std::normal_distribution<double> gauss;
    std::vector<double> f(lat.num_leaves());
    for (double& x : f) x = gauss(rng);
    return f;
}

} // namespace bumpcert
