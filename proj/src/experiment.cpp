#include "bumpcert/experiment.hpp"

#include "bumpcert/bellman.hpp"
#include "bumpcert/error.hpp"
#include "bumpcert/operators.hpp"

#include "json.hpp"
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace bumpcert {

using nlohmann::json;
namespace fs = std::filesystem;

// ------------------------------------------------------------------ config

namespace {

class Reader {
public:
    Reader(const std::string& text, std::string origin) : text_(text), origin_(std::move(origin)) {}

    [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const {
        std::string field;
        for (const auto& p : path) field += (field.empty() ? "" : ".") + p;
        throw UsageError(fmt::format("{}:{}: field '{}': {}", origin_, line_of(path), field, msg));
    }

    // Line of the last key of `path`, found by scanning for each key in turn.
    int line_of(const std::vector<std::string>& path) const {
        std::size_t pos = 0;
        std::size_t found = std::string::npos;
        for (const auto& key : path) {
            const std::size_t at = text_.find("\"" + key + "\"", pos);
            if (at == std::string::npos) break;
            found = at;
            pos = at + 1;
        }
        if (found == std::string::npos) return 1;
        return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<long>(found), '\n'));
    }

    void keys(const json& obj, const std::vector<std::string>& path, std::initializer_list<const char*> allowed) const {
        if (!obj.is_object()) fail(path, "expected an object");
        for (const auto& [k, v] : obj.items()) {
            bool ok = false;
            for (const char* a : allowed) ok = ok || k == a;
            if (!ok) {
                auto p = path;
                p.push_back(k);
                fail(p, "unknown field");
            }
        }
    }

    double number(const json& obj, const std::vector<std::string>& path, const std::string& key, double fallback,
                  double lo, double hi) const {
        if (!obj.contains(key)) return fallback;
        auto p = path;
        p.push_back(key);
        const json& v = obj.at(key);
        if (!v.is_number()) fail(p, "expected a number");
        const double x = v.get<double>();
        if (!(x >= lo && x <= hi)) fail(p, fmt::format("value {} outside [{}, {}]", x, lo, hi));
        return x;
    }

    std::int64_t integer(const json& obj, const std::vector<std::string>& path, const std::string& key,
                         std::int64_t fallback, std::int64_t lo, std::int64_t hi) const {
        if (!obj.contains(key)) return fallback;
        auto p = path;
        p.push_back(key);
        const json& v = obj.at(key);
        if (!v.is_number_integer()) fail(p, "expected an integer");
        const auto x = v.get<std::int64_t>();
        if (x < lo || x > hi) fail(p, fmt::format("value {} outside [{}, {}]", x, lo, hi));
        return x;
    }

    std::uint64_t seed(const json& obj, const std::vector<std::string>& path, const std::string& key) const {
        auto p = path;
        p.push_back(key);
        const json& v = obj.at(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
            fail(p, "expected a nonnegative integer seed");
        return v.get<std::uint64_t>();
    }

    std::string string(const json& obj, const std::vector<std::string>& path, const std::string& key,
                       const std::string& fallback, std::initializer_list<const char*> choices) const {
        if (!obj.contains(key)) return fallback;
        auto p = path;
        p.push_back(key);
        const json& v = obj.at(key);
        if (!v.is_string()) fail(p, "expected a string");
        const auto s = v.get<std::string>();
        std::string all;
        for (const char* c : choices) {
            if (s == c) return s;
            all += (all.empty() ? "" : ", ") + std::string(c);
        }
        fail(p, fmt::format("'{}' is not one of: {}", s, all));
    }

    bool boolean(const json& obj, const std::vector<std::string>& path, const std::string& key, bool fallback) const {
        if (!obj.contains(key)) return fallback;
        auto p = path;
        p.push_back(key);
        if (!obj.at(key).is_boolean()) fail(p, "expected true or false");
        return obj.at(key).get<bool>();
    }

private:
    const std::string& text_;
    std::string origin_;
};

GaugeSpec read_gauge(const Reader& rd, const json& obj, const std::string& name, double alpha_default) {
    const std::vector<std::string> path{name};
    rd.keys(obj, path, {"family", "alpha"});
    GaugeSpec g;
    g.family = rd.string(obj, path, "family", "log", {"log", "young-log"});
    g.alpha = rd.number(obj, path, "alpha", alpha_default, 1.0 + 1e-9, 20.0);
    return g;
}

WeightSpec read_weight(const Reader& rd, const json& obj, const std::string& name) {
    const std::vector<std::string> path{name};
    rd.keys(obj, path, {"kind", "params", "seed", "values"});
    WeightSpec w;
    w.kind = rd.string(obj, path, "kind", "lognormal", {"constant", "lognormal", "power", "a2-extremal-pair", "explicit"});
    if (obj.contains("params")) {
        const json& p = obj.at("params");
        if (!p.is_object()) rd.fail({name, "params"}, "expected an object");
        for (const auto& [k, v] : p.items()) {
            if (!v.is_number()) rd.fail({name, "params", k}, "expected a number");
            w.params[k] = v.get<double>();
        }
    }
    if (obj.contains("seed")) {
        w.has_seed = true;
        w.seed = rd.seed(obj, path, "seed");
    }
    if (obj.contains("values")) {
        const json& v = obj.at("values");
        if (!v.is_array()) rd.fail({name, "values"}, "expected an array of numbers");
        for (const auto& x : v) {
            if (!x.is_number()) rd.fail({name, "values"}, "expected an array of numbers");
            w.values.push_back(x.get<double>());
        }
    }
    if (w.kind == "explicit" && !obj.contains("values")) rd.fail(path, "explicit weights need 'values'");
    return w;
}

} // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto byte = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(byte ? byte - 1 : 0), '\n');
        throw UsageError(fmt::format("{}:{}: malformed JSON: {}", origin, line, e.what()));
    }
    const Reader rd(text, origin);
    rd.keys(doc, {}, {"gauge", "gauge2", "lattice", "v", "w", "operator", "bellman", "carleson", "trials", "seed",
                      "tolerance", "alpha"});
    ExperimentConfig cfg;
    const double alpha = rd.number(doc, {}, "alpha", 2.0, 1.0 + 1e-9, 20.0);
    cfg.gauge.alpha = alpha;
    if (doc.contains("gauge")) cfg.gauge = read_gauge(rd, doc.at("gauge"), "gauge", alpha);
    if (doc.contains("gauge2")) cfg.gauge2 = read_gauge(rd, doc.at("gauge2"), "gauge2", alpha);
    if (doc.contains("lattice")) {
        const json& l = doc.at("lattice");
        rd.keys(l, {"lattice"}, {"depth", "branching", "masses", "seed"});
        cfg.lattice.depth = static_cast<int>(rd.integer(l, {"lattice"}, "depth", 8, 0, 20));
        cfg.lattice.branching = static_cast<int>(rd.integer(l, {"lattice"}, "branching", 2, 1, 36));
        cfg.lattice.masses = rd.string(l, {"lattice"}, "masses", "equal", {"equal", "random"});
        if (l.contains("seed")) cfg.lattice.seed = rd.seed(l, {"lattice"}, "seed");
    }
    if (cfg.lattice.depth * std::log2(static_cast<double>(cfg.lattice.branching)) > 20.0 + 1e-12)
        rd.fail({"lattice", "depth"}, "depth * log2(branching) must not exceed 20");
    if (doc.contains("v")) cfg.v = read_weight(rd, doc.at("v"), "v");
    if (doc.contains("w")) cfg.w = read_weight(rd, doc.at("w"), "w");
    if (doc.contains("operator")) {
        const json& o = doc.at("operator");
        const std::vector<std::string> p{"operator"};
        rd.keys(o, p, {"kind", "complexity", "max_complexity", "extremal"});
        cfg.op.kind = rd.string(o, p, "kind", "shift", {"shift", "paraproduct"});
        cfg.op.complexity = static_cast<int>(rd.integer(o, p, "complexity", 1, 1, 20));
        cfg.op.max_complexity = static_cast<int>(rd.integer(o, p, "max_complexity", 4, 1, 20));
        cfg.op.extremal = rd.boolean(o, p, "extremal", false);
    }
    if (cfg.op.complexity > std::max(cfg.lattice.depth, 1))
        rd.fail({"operator", "complexity"}, "complexity exceeds the lattice depth");
    if (doc.contains("bellman")) {
        const json& b = doc.at("bellman");
        const std::vector<std::string> p{"bellman"};
        rd.keys(b, p, {"max_pieces", "sigma", "zero_prob", "min_children", "max_children"});
        cfg.bellman.dist.max_pieces = static_cast<int>(rd.integer(b, p, "max_pieces", 6, 1, 1000));
        cfg.bellman.dist.sigma = rd.number(b, p, "sigma", 1.5, 0.0, 20.0);
        cfg.bellman.dist.zero_prob = rd.number(b, p, "zero_prob", 0.2, 0.0, 0.99);
        cfg.bellman.min_children = static_cast<int>(rd.integer(b, p, "min_children", 2, 1, 64));
        cfg.bellman.max_children = static_cast<int>(rd.integer(b, p, "max_children", 16, 1, 64));
        if (cfg.bellman.max_children < cfg.bellman.min_children)
            rd.fail({"bellman", "max_children"}, "must be at least min_children");
    }
    if (doc.contains("carleson")) {
        const json& c = doc.at("carleson");
        rd.keys(c, {"carleson"}, {"density"});
        cfg.carleson_density = rd.number(c, {"carleson"}, "density", 0.5, 0.0, 1.0);
    }
    cfg.trials = static_cast<int>(rd.integer(doc, {}, "trials", 100, 0, 100000000));
    if (doc.contains("seed")) cfg.seed = rd.seed(doc, {}, "seed");
    cfg.tolerance = rd.number(doc, {}, "tolerance", 1e-9, 0.0, 1.0);
    if (!(cfg.tolerance > 0.0)) rd.fail({"tolerance"}, "tolerance must be positive");
    cfg.canonical = doc.dump();
    cfg.hash = fnv1a(cfg.canonical);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"bellman-two-point", "bellman-multi", "bellman-T",
                                                "bellman-drop",      "embed-25",      "embed-26",
                                                "shift-norm",        "para-norm",     "complexity-growth",
                                                "lemma-1-1",         "telescope"};
    return names;
}

// ------------------------------------------------------------------ suites

namespace {

std::string num(double x) { return fmt::format("{:.17g}", x); }

struct Context {
    const ExperimentConfig& cfg;
    BumpGauge g1;
    BumpGauge g2;
    std::shared_ptr<const Lattice> lattice;
    double tol;
};

// Worst-of aggregation of several checks into one row.
class Row {
public:
    Row(std::int64_t trial, double tol) : tol_(tol) { row_.trial = trial; }

    void add(const CheckResult& c, const std::string& witness) {
        const double norm = c.slack / (1.0 + std::abs(c.rhs));
        const bool ok = c.slack >= -tol_ * (1.0 + std::abs(c.rhs));
        if (first_ || norm < worst_) {
            worst_ = norm;
            row_.slack = c.slack;
            row_.lhs = c.lhs;
            row_.rhs = c.rhs;
            row_.witness = witness;
        }
        first_ = false;
        row_.pass = row_.pass && ok;
    }
    void ratio(double r) { row_.ratio = std::max(row_.ratio, r); }
    TrialRow done() { return row_; }

private:
    TrialRow row_;
    double tol_;
    double worst_ = 0.0;
    bool first_ = true;
};

CheckResult lower(double lhs, double rhs) { return {lhs - rhs, lhs, rhs}; }
// value <= bound written as bound - value >= 0.
CheckResult upper(double value, double bound) { return {bound - value, value, bound}; }

std::string seed_tag(std::uint64_t seed) { return fmt::format("seed={:#018x}", seed); }

// Weights for a trial: per-trial draws unless the weight config pins a seed.
std::pair<Weight, Weight> weights(const Context& ctx, std::uint64_t seed) {
    Weight v = generate_weight(ctx.cfg.v, *ctx.lattice, splitmix64(seed ^ 0x76), WeightSlot::v);
    Weight w = generate_weight(ctx.cfg.w, *ctx.lattice, splitmix64(seed ^ 0x77), WeightSlot::w);
    return {std::move(v), std::move(w)};
}

// v rescaled so that n_{g1}(N_I^w) n_{g2}(N_I^v) <= 1 everywhere.
Weight bump_normalized_v(const Context& ctx, const Weight& v, const Weight& w) {
    const CellMax rho = bump_constant(*ctx.lattice, w, v, ctx.g1, ctx.g2);
    return rho.value > 0.0 ? v.scaled(1.0 / rho.value) : v;
}

std::string leaf_witness(const Lattice& lat, std::uint64_t seed, CellId id) {
    return fmt::format("{} cell='{}'", seed_tag(seed), lat.path(id));
}

CellId argmax_term(const std::vector<double>& terms) {
    return static_cast<CellId>(std::max_element(terms.begin(), terms.end()) - terms.begin());
}

using TrialFn = std::function<TrialRow(const Context&, std::int64_t, std::uint64_t, RunReport&)>;

TrialRow two_point_trial(const Context& ctx, std::int64_t k, std::uint64_t seed, RunReport&) {
    Rng rng(seed);
    std::normal_distribution<double> gauss;
    const DistFn n1 = random_distfn(rng, ctx.cfg.bellman.dist);
    const DistFn n2 = random_distfn(rng, ctx.cfg.bellman.dist);
    const double f1 = gauss(rng) * std::exp(gauss(rng));
    const double f2 = gauss(rng) * std::exp(gauss(rng));
    Row row(k, ctx.tol);
    row.add(check_two_point(f1, n1, f2, n2, ctx.g1), fmt::format("{} f1={} f2={}", seed_tag(seed), num(f1), num(f2)));
    return row.done();
}

TrialRow multi_trial(const Context& ctx, std::int64_t k, std::uint64_t seed, RunReport&) {
    Rng rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_int_distribution<int> kids(ctx.cfg.bellman.min_children, ctx.cfg.bellman.max_children);
    const int m = kids(rng);
    const std::vector<double> alpha = random_convex_weights(rng, m);
    std::vector<double> f(static_cast<std::size_t>(m));
    std::vector<DistFn> n;
    for (int i = 0; i < m; ++i) {
        f[i] = gauss(rng) * std::exp(gauss(rng));
        n.push_back(random_distfn(rng, ctx.cfg.bellman.dist));
    }
    Row row(k, ctx.tol);
    const std::string tag = fmt::format("{} children={}", seed_tag(seed), m);
    row.add(check_multi_point(alpha, f, n, ctx.g1), tag);
    double fbar = 0.0;
    for (int i = 0; i < m; ++i) fbar += alpha[i] * f[i];
    std::vector<double> x(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) x[i] = f[i] - fbar;
    // Remove the rounding in the mean so the selection sees an exactly balanced x.
    double drift = 0.0;
    for (int i = 0; i < m; ++i) drift += alpha[i] * x[i];
    for (double& xi : x) xi -= drift;
    const std::vector<double> beta = balanced_signs(alpha, x);
    double l1 = 0.0;
    double got = 0.0;
    double balance = 0.0;
    for (int i = 0; i < m; ++i) {
        l1 += alpha[i] * std::abs(x[i]);
        got += alpha[i] * beta[i] * x[i];
        balance += alpha[i] * beta[i];
    }
    row.add(lower(got, 0.5 * l1), tag + " check=balanced-signs");
    row.add(upper(std::abs(balance), 1e-12), tag + " check=balance");
    return row.done();
}

TrialRow t_trial(const Context& ctx, std::int64_t k, std::uint64_t seed, RunReport&) {
    Rng rng(seed);
    std::uniform_real_distribution<double> unif;
    const double a = 1.0 + unif(rng);
    // Half the points log-uniform down to 1e-12 to probe the singular corner.
    const double n = unif(rng) < 0.5 ? 1.0 - unif(rng) : std::exp(-27.6 * unif(rng));
    const TValues t = t_scalar(ctx.g1, a, n);
    const std::string tag = fmt::format("{} A={} N={}", seed_tag(seed), num(a), num(n));
    Row row(k, ctx.tol);
    row.add(lower(-t.d_a, n * n / (4.0 * ctx.g1.phi(n))), tag + " check=-T_A");
    row.add(lower(t.hessian_det(), -1e-12), tag + " check=det");
    row.add(lower(t.d_aa, 0.0), tag + " check=T_AA");
    row.add(lower(t.d_nn, 0.0), tag + " check=T_NN");
    const DistFn dist = random_distfn(rng, ctx.cfg.bellman.dist);
    std::normal_distribution<double> gauss;
    const double f = gauss(rng);
    const double m = unif(rng);
    row.add(check_dB_dM(f, dist, m, ctx.g1), fmt::format("{} f={} M={} check=dB/dM", seed_tag(seed), num(f), num(m)));
    return row.done();
}

TrialRow drop_trial(const Context& ctx, std::int64_t k, std::uint64_t seed, RunReport&) {
    Rng rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif;
    std::uniform_int_distribution<int> kids(ctx.cfg.bellman.min_children, ctx.cfg.bellman.max_children);
    const int m = kids(rng);
    const std::vector<double> alpha = random_convex_weights(rng, m);
    std::vector<double> f(static_cast<std::size_t>(m));
    std::vector<double> loads(static_cast<std::size_t>(m));
    std::vector<DistFn> n;
    const double scale = unif(rng);
    double avg = 0.0;
    for (int i = 0; i < m; ++i) {
        f[i] = gauss(rng) * std::exp(gauss(rng));
        loads[i] = scale * unif(rng);
        avg += alpha[i] * loads[i];
        n.push_back(random_distfn(rng, ctx.cfg.bellman.dist));
    }
    const double a = std::max(0.0, (1.0 - avg) * unif(rng));
    Row row(k, ctx.tol);
    row.add(check_drop(alpha, a, f, n, loads, ctx.g1), fmt::format("{} children={} a={}", seed_tag(seed), m, num(a)));
    return row.done();
}

TrialRow embed25_trial(const Context& ctx, std::int64_t k, std::uint64_t seed, RunReport&) {
    Rng rng(seed);
    const Lattice& lat = *ctx.lattice;
    const auto [v, w] = weights(ctx, seed);
    const std::vector<double> f = random_leaf_vector(lat, rng);
    const EmbeddingReport rep = embed_sum_25(lat, f, w, ctx.g1, ctx.tol);
    Row row(k, ctx.tol);
    row.add(upper(rep.total, rep.bound * rep.norm_sq), leaf_witness(lat, seed, argmax_term(rep.terms)));
    row.ratio(rep.ratio);
    return row.done();
}

TrialRow embed26_trial(const Context& ctx, std::int64_t k, std::uint64_t seed, RunReport&) {
    Rng rng(seed);
    const Lattice& lat = *ctx.lattice;
    const auto [v, w] = weights(ctx, seed);
    const std::vector<double> f = random_leaf_vector(lat, rng);
    const CarlesonSeq a = random_carleson(lat, rng, ctx.cfg.carleson_density);
    const EmbeddingReport rep = embed_sum_26(lat, f, w, ctx.g1, a, ctx.tol);
    Row row(k, ctx.tol);
    row.add(upper(rep.total, rep.bound * rep.norm_sq), leaf_witness(lat, seed, argmax_term(rep.terms)));
    row.ratio(rep.ratio);
    return row.done();
}

void chain_checks(Row& row, const std::string& tag, double bilinear, const DominationForm& d, double constant,
                  double fg, bool with_constant) {
    row.add(upper(std::abs(bilinear), d.value), tag + " check=bilinear<=domination");
    row.add(upper(d.value, d.split_bound), tag + " check=domination<=split");
    if (with_constant) row.add(upper(d.split_bound, constant * fg), tag + " check=split<=bound");
}

double split_constant_shift(const Context& ctx) { return std::sqrt(ctx.g1.c25() * ctx.g2.c25()); }
double split_constant_para(const Context& ctx) { return std::sqrt(ctx.g1.c26() * ctx.g2.c25()); }

TrialRow shift_trial(const Context& ctx, std::int64_t k, std::uint64_t seed, RunReport&) {
    Rng rng(seed);
    const Lattice& lat = *ctx.lattice;
    auto [v0, w] = weights(ctx, seed);
    const Weight v = bump_normalized_v(ctx, v0, w);
    const int n = ctx.cfg.op.complexity;
    const std::vector<double> f = random_leaf_vector(lat, rng);
    const std::vector<double> g = random_leaf_vector(lat, rng);
    const HaarShift s = ctx.cfg.op.extremal ? worst_kernel(ctx.lattice, f, g, v, w, n)
                                            : HaarShift::random(ctx.lattice, n, rng());
    const double bound = n * split_constant_shift(ctx);
    const NormEstimate est = two_weight_norm(s, v, w);
    const std::string tag = seed_tag(seed);
    Row row(k, ctx.tol);
    row.add(upper(est.value, bound), tag + " check=norm");
    row.ratio(est.value);
    std::vector<double> fw(f);
    const auto sw = w.sqrt_values();
    for (std::size_t i = 0; i < fw.size(); ++i) fw[i] *= sw[i];
    const double bil = weighted_bilinear(lat, s.apply(fw), g, v);
    const auto n1 = cell_n_psi(lat, w, ctx.g1);
    const auto n2 = cell_n_psi(lat, v, ctx.g2);
    const DominationForm d = domination_form_shift(lat, f, g, v, w, n1, n2, n);
    const double fg = std::sqrt(lat.l2_norm_sq(f) * lat.l2_norm_sq(g));
    chain_checks(row, tag, bil, d, split_constant_shift(ctx), fg, n == 1);
    return row.done();
}

TrialRow para_trial(const Context& ctx, std::int64_t k, std::uint64_t seed, RunReport&) {
    Rng rng(seed);
    const Lattice& lat = *ctx.lattice;
    auto [v0, w] = weights(ctx, seed);
    const Weight v = bump_normalized_v(ctx, v0, w);
    const Paraproduct p = Paraproduct::random(ctx.lattice, rng());
    const double bound = split_constant_para(ctx);
    const NormEstimate est = two_weight_norm(p, v, w);
    const std::string tag = seed_tag(seed);
    Row row(k, ctx.tol);
    row.add(upper(est.value, bound), tag + " check=norm");
    row.ratio(est.value);
    const std::vector<double> f = random_leaf_vector(lat, rng);
    const std::vector<double> g = random_leaf_vector(lat, rng);
    std::vector<double> fw(f);
    const auto sw = w.sqrt_values();
    for (std::size_t i = 0; i < fw.size(); ++i) fw[i] *= sw[i];
    const double bil = weighted_bilinear(lat, p.apply(fw), g, v);
    const DominationForm d =
        domination_form_para(lat, f, g, v, w, p, cell_n_psi(lat, w, ctx.g1), cell_n_psi(lat, v, ctx.g2));
    const double fg = std::sqrt(lat.l2_norm_sq(f) * lat.l2_norm_sq(g));
    chain_checks(row, tag, bil, d, bound, fg, true);
    return row.done();
}

TrialRow growth_trial(const Context& ctx, std::int64_t k, std::uint64_t seed, RunReport&) {
    Rng rng(seed);
    const Lattice& lat = *ctx.lattice;
    auto [v0, w] = weights(ctx, seed);
    const Weight v = bump_normalized_v(ctx, v0, w);
    const double c1 = split_constant_shift(ctx);
    Row row(k, ctx.tol);
    const int top = std::min(ctx.cfg.op.max_complexity, lat.depth());
    double worst = 0.0;
    for (int n = 1; n <= top; ++n) {
        const std::string tag = fmt::format("{} complexity={}", seed_tag(seed), n);
        const HaarShift s = HaarShift::random(ctx.lattice, n, rng());
        const std::vector<HaarShift> parts = s.decompose_complexity();
        const Eigen::MatrixXd full = s.assemble_matrix();
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(full.rows(), full.cols());
        double part_norms = 0.0;
        for (const HaarShift& p : parts) {
            sum += p.assemble_matrix();
            part_norms += two_weight_norm(p, v, w).value;
        }
        const double err = full.size() ? (sum - full).cwiseAbs().maxCoeff() : 0.0;
        row.add(upper(err, 1e-12 * std::max(1.0, full.size() ? full.cwiseAbs().maxCoeff() : 0.0)),
                tag + " check=reassembly");
        const double norm = two_weight_norm(s, v, w).value;
        row.add(upper(norm, part_norms), tag + " check=triangle");
        row.add(upper(norm, n * c1), tag + " check=n-fold");
        worst = std::max(worst, norm / n);
    }
    row.ratio(worst);
    return row.done();
}

struct LemmaData {
    YoungFunction phi;
    BumpGauge psi;
    MatchedPairConstant cl;
};

TrialRow lemma_trial(const Context& ctx, const LemmaData& data, std::int64_t k, std::uint64_t seed) {
    const Lattice& lat = *ctx.lattice;
    const auto [v, w] = weights(ctx, seed);
    const auto n = cell_n_psi(lat, w, data.psi);
    const auto norms = cell_orlicz_norms(lat, w, data.phi);
    Row row(k, ctx.tol);
    double worst = 0.0;
    for (CellId id = 0; id < lat.num_cells(); ++id) {
        row.add(lower(data.cl.value * norms[id], n[id]), leaf_witness(lat, seed, id));
        if (norms[id] > 0.0) worst = std::max(worst, n[id] / norms[id]);
    }
    row.ratio(worst);
    return row.done();
}

TrialRow telescope_trial(const Context& ctx, std::int64_t k, std::uint64_t seed, RunReport& report) {
    Rng rng(seed);
    const Lattice& lat = *ctx.lattice;
    const auto [v, w] = weights(ctx, seed);
    const std::vector<double> f = random_leaf_vector(lat, rng);
    const CarlesonSeq a = random_carleson(lat, rng, ctx.cfg.carleson_density);
    Row row(k, ctx.tol);
    const TelescopeLedger l25 = telescope_audit_25(lat, f, w, ctx.g1);
    const TelescopeLedger l26 = telescope_audit_26(lat, f, w, ctx.g1, a);
    const std::pair<const TelescopeLedger*, const char*> forms[] = {{&l25, "25"}, {&l26, "26"}};
    for (const auto& [ledger, form] : forms) {
        for (const LedgerRow& r : ledger->rows) {
            const std::string tag = fmt::format("{} form={} root='{}' generation={}", seed_tag(seed), form, r.path,
                                                r.generation);
            // Slack relative to the energy scale of the generation.
            row.add({r.slack, r.partial_lhs, r.energy}, tag);
            row.add(upper(r.energy, r.l2), tag + " check=cauchy-schwarz");
            report.ledger.push_back({k, form, r});
        }
    }
    return row.done();
}

} // namespace

RunReport run_suite(const std::string& suite, const ExperimentConfig& cfg, const RunOptions& opt) {
    const auto& names = suite_names();
    if (std::find(names.begin(), names.end(), suite) == names.end())
        throw UsageError("unknown suite '" + suite + "'");
    RunReport report;
    report.suite = suite;
    report.seed = opt.seed.value_or(cfg.seed);
    report.config_hash = cfg.hash;
    report.tolerance = cfg.tolerance;
    const int trials = opt.trials.value_or(cfg.trials);
    if (trials < 0) throw UsageError("trials must be nonnegative");

    auto make = [](const GaugeSpec& g) { return make_gauge_family(g.family, g.alpha); };
    const LatticeSpec& ls = cfg.lattice;
    auto lattice = std::make_shared<const Lattice>(
        ls.masses == "random" ? Lattice::random_masses(ls.depth, ls.branching, ls.seed.value_or(report.seed))
                              : Lattice::uniform(ls.depth, ls.branching));
    const BumpGauge g1 = make(cfg.gauge);
    const Context ctx{cfg, g1, cfg.gauge2 ? make(*cfg.gauge2) : g1, lattice, cfg.tolerance};

    TrialFn fn;
    std::optional<LemmaData> lemma;
    if (suite == "bellman-two-point") fn = two_point_trial;
    if (suite == "bellman-multi") fn = multi_trial;
    if (suite == "bellman-T") fn = t_trial;
    if (suite == "bellman-drop") fn = drop_trial;
    if (suite == "embed-25") {
        fn = embed25_trial;
        report.has_ratio = true;
        report.ratio_bound = g1.c25();
    }
    if (suite == "embed-26") {
        fn = embed26_trial;
        report.has_ratio = true;
        report.ratio_bound = g1.c26();
    }
    if (suite == "shift-norm") {
        fn = shift_trial;
        report.has_ratio = true;
        report.ratio_bound = cfg.op.complexity * split_constant_shift(ctx);
    }
    if (suite == "para-norm") {
        fn = para_trial;
        report.has_ratio = true;
        report.ratio_bound = split_constant_para(ctx);
    }
    if (suite == "complexity-growth") {
        fn = growth_trial;
        report.has_ratio = true;
        report.ratio_bound = split_constant_shift(ctx);
    }
    if (suite == "lemma-1-1") {
        const YoungFunction phi = YoungFunction::log_power(cfg.gauge.alpha);
        const BumpGauge psi = psi_from_young(phi);
        lemma = LemmaData{phi, psi, matched_pair_constant(phi, psi)};
        fn = [&lemma](const Context& c, std::int64_t k, std::uint64_t s, RunReport&) {
            return lemma_trial(c, *lemma, k, s);
        };
        report.has_ratio = true;
        report.ratio_bound = lemma->cl.value;
        report.notes.push_back(fmt::format("C_L = {} (k = {}, t1 = {}, head = {}, tail = {})", num(lemma->cl.value),
                                           num(lemma->cl.k_match), num(lemma->cl.t_one), num(lemma->cl.head),
                                           num(lemma->cl.tail)));
    }
    if (suite == "telescope") fn = telescope_trial;

    report.notes.push_back(fmt::format("gauge {} alpha={} c={} C25={} C26={}", cfg.gauge.family, num(cfg.gauge.alpha),
                                       num(g1.c()), num(g1.c25()), num(g1.c26())));
    std::int64_t first = 0;
    std::int64_t last = trials;
    if (opt.only_trial) {
        if (*opt.only_trial < 0) throw UsageError("trial index must be nonnegative");
        first = *opt.only_trial;
        last = first + 1;
    }
    for (std::int64_t k = first; k < last; ++k) {
        const std::uint64_t seed = trial_seed(report.seed, static_cast<std::uint64_t>(k));
        report.rows.push_back(fn(ctx, k, seed, report));
    }
    report.min_slack = report.rows.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    for (const TrialRow& r : report.rows) {
        report.min_slack = std::min(report.min_slack, r.slack);
        report.max_ratio = std::max(report.max_ratio, r.ratio);
        report.pass = report.pass && r.pass;
    }
    return report;
}

// ------------------------------------------------------------------ output

std::string trials_csv(const RunReport& report) {
    std::string out = "trial,slack,lhs,rhs,witness\n";
    for (const TrialRow& r : report.rows)
        out += fmt::format("{},{},{},{},\"{}\"\n", r.trial, num(r.slack), num(r.lhs), num(r.rhs), r.witness);
    return out;
}

std::string summary_markdown(const RunReport& report) {
    std::string out = fmt::format("# {}\n\n", report.suite);
    out += "| field | value |\n|---|---|\n";
    out += fmt::format("| seed | {} |\n", report.seed);
    out += fmt::format("| config hash | {:016x} |\n", report.config_hash);
    out += fmt::format("| trials | {} |\n", report.rows.size());
    out += fmt::format("| tolerance | {} |\n", num(report.tolerance));
    out += fmt::format("| min slack | {} |\n", num(report.min_slack));
    if (report.has_ratio) {
        out += fmt::format("| max ratio | {} |\n", num(report.max_ratio));
        out += fmt::format("| ratio bound | {} |\n", num(report.ratio_bound));
    }
    out += fmt::format("| result | {} |\n", report.pass ? "PASS" : "FAIL");
    if (!report.notes.empty()) {
        out += "\n";
        for (const auto& n : report.notes) out += "- " + n + "\n";
    }
    std::string failing;
    for (const TrialRow& r : report.rows)
        if (!r.pass) failing += fmt::format("| {} | {} | {} |\n", r.trial, num(r.slack), r.witness);
    if (!failing.empty()) out += "\n## Failing trials\n\n| trial | slack | witness |\n|---|---|---|\n" + failing;
    return out;
}

std::string histogram_csv(const RunReport& report, int bins) {
    std::vector<double> values;
    for (const TrialRow& r : report.rows)
        values.push_back(report.has_ratio ? r.ratio : r.slack / (1.0 + std::abs(r.rhs)));
    // one row per bin of the per-trial ratio (or relative slack when there is no ratio)
    std::string out = fmt::format("bin,{0}_lo,{0}_hi,count\n", report.has_ratio ? "ratio" : "relative_slack");
    if (values.empty() || bins < 1) return out;
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it > lo ? *hi_it : lo + 1.0;
    std::vector<int> counts(static_cast<std::size_t>(bins), 0);
    for (double x : values) {
        auto b = static_cast<int>((x - lo) / (hi - lo) * bins);
        counts[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))]++;
    }
    for (int b = 0; b < bins; ++b)
        out += fmt::format("{},{},{},{}\n", b, num(lo + (hi - lo) * b / bins), num(lo + (hi - lo) * (b + 1) / bins),
                           counts[static_cast<std::size_t>(b)]);
    return out;
}

std::string ledger_csv(const RunReport& report) {
    std::string out = "trial,form,root,generation,partial_lhs,rhs,slack\n";
    for (const LedgerEntry& e : report.ledger)
        out += fmt::format("{},{},\"{}\",{},{},{},{}\n", e.trial, e.form, e.row.path, e.row.generation,
                           num(e.row.partial_lhs), num(e.row.rhs), num(e.row.slack));
    return out;
}

namespace {

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + p.string() + "'");
    out << content;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + p.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

void write_report(const RunReport& report, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw UsageError("cannot create output directory '" + dir + "': " + ec.message());
    write_file(fs::path(dir) / "trials.csv", trials_csv(report));
    write_file(fs::path(dir) / "summary.md", summary_markdown(report));
    write_file(fs::path(dir) / "histogram.csv", histogram_csv(report));
    if (!report.ledger.empty()) write_file(fs::path(dir) / "ledger.csv", ledger_csv(report));
    json meta;
    meta["suite"] = report.suite;
    meta["seed"] = report.seed;
    meta["config_hash"] = fmt::format("{:016x}", report.config_hash);
    meta["tolerance"] = report.tolerance;
    meta["has_ratio"] = report.has_ratio;
    meta["ratio_bound"] = report.ratio_bound;
    meta["notes"] = report.notes;
    json rows = json::array();
    for (const TrialRow& r : report.rows) rows.push_back({{"pass", r.pass}, {"ratio", r.ratio}});
    meta["rows"] = rows;
    write_file(fs::path(dir) / "run.json", meta.dump(2) + "\n");
}

RunReport read_report(const std::string& dir) {
    json meta;
    try {
        meta = json::parse(read_file(fs::path(dir) / "run.json"));
    } catch (const json::exception& e) {
        throw UsageError(std::string("malformed run.json: ") + e.what());
    }
    RunReport report;
    try {
        report.suite = meta.at("suite").get<std::string>();
        report.seed = meta.at("seed").get<std::uint64_t>();
        report.config_hash = std::stoull(meta.at("config_hash").get<std::string>(), nullptr, 16);
        report.tolerance = meta.at("tolerance").get<double>();
        report.has_ratio = meta.at("has_ratio").get<bool>();
        report.ratio_bound = meta.at("ratio_bound").get<double>();
        report.notes = meta.at("notes").get<std::vector<std::string>>();
    } catch (const std::exception& e) {
        throw UsageError(std::string("malformed run.json: ") + e.what());
    }
    std::istringstream csv(read_file(fs::path(dir) / "trials.csv"));
    std::string line;
    std::getline(csv, line);
    std::size_t idx = 0;
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        TrialRow r;
        std::istringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        for (int c = 0; c < 4 && std::getline(ls, cell, ','); ++c) cells.push_back(cell);
        std::getline(ls, cell);
        if (cells.size() != 4) throw UsageError("malformed trials.csv line: " + line);
        r.trial = std::stoll(cells[0]);
        r.slack = std::stod(cells[1]);
        r.lhs = std::stod(cells[2]);
        r.rhs = std::stod(cells[3]);
        r.witness = cell.size() >= 2 ? cell.substr(1, cell.size() - 2) : cell;
        if (idx < meta["rows"].size()) {
            r.pass = meta["rows"][idx].at("pass").get<bool>();
            r.ratio = meta["rows"][idx].at("ratio").get<double>();
        }
        ++idx;
        report.rows.push_back(std::move(r));
    }
    report.min_slack = report.rows.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    for (const TrialRow& r : report.rows) {
        report.min_slack = std::min(report.min_slack, r.slack);
        report.max_ratio = std::max(report.max_ratio, r.ratio);
        report.pass = report.pass && r.pass;
    }
    return report;
}

// ------------------------------------------------------------------ bump

std::string bump_table(const ExperimentConfig& cfg) {
    const LatticeSpec& ls = cfg.lattice;
    const Lattice lat = ls.masses == "random" ? Lattice::random_masses(ls.depth, ls.branching, ls.seed.value_or(cfg.seed))
                                              : Lattice::uniform(ls.depth, ls.branching);
    const BumpGauge g1 = make_gauge_family(cfg.gauge.family, cfg.gauge.alpha);
    const GaugeSpec gs2 = cfg.gauge2.value_or(cfg.gauge);
    const BumpGauge g2 = make_gauge_family(gs2.family, gs2.alpha);
    const YoungFunction phi1 = YoungFunction::log_power(cfg.gauge.alpha);
    const YoungFunction phi2 = YoungFunction::log_power(gs2.alpha);
    const std::uint64_t seed = trial_seed(cfg.seed, 0);

    std::string out = "| weights | A2 | Orlicz bump | n_Psi bump | A2 cell | Orlicz cell | n_Psi cell |\n";
    out += "|---|---|---|---|---|---|---|\n";
    auto line = [&](const std::string& label, const Weight& v, const Weight& w) {
        const CellMax a2 = a2_constant(lat, v, w);
        const CellMax orl = orlicz_bump_constant(lat, v, w, phi1, phi2);
        const CellMax nb = bump_constant(lat, v, w, g1, g2);
        out += fmt::format("| {} | {:.6g} | {:.6g} | {:.6g} | '{}' | '{}' | '{}' |\n", label, a2.value, orl.value,
                           nb.value, lat.path(a2.argmax), lat.path(orl.argmax), lat.path(nb.argmax));
    };
    const Weight v = generate_weight(cfg.v, lat, splitmix64(seed ^ 0x76), WeightSlot::v);
    const Weight w = generate_weight(cfg.w, lat, splitmix64(seed ^ 0x77), WeightSlot::w);
    line(fmt::format("v={} w={}", cfg.v.kind, cfg.w.kind), v, w);
    if (cfg.v.kind == "a2-extremal-pair" || cfg.w.kind == "a2-extremal-pair") {
        for (double a : {0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.99}) {
            WeightSpec spec;
            spec.kind = "a2-extremal-pair";
            spec.params["a"] = a;
            line(fmt::format("a2-extremal-pair a={}", a), generate_weight(spec, lat, 0, WeightSlot::v),
                 generate_weight(spec, lat, 0, WeightSlot::w));
        }
    }
    return out;
}

} // namespace bumpcert
