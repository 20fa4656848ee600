// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "bumpcert/bellman.hpp"
#include "bumpcert/distribution.hpp"
#include "bumpcert/embedding.hpp"
#include "bumpcert/functionals.hpp"
#include "bumpcert/gauge.hpp"
#include "bumpcert/generators.hpp"
#include "bumpcert/operators.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <fmt/core.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

using namespace bumpcert;

namespace {

const double kAlphas[] = {1.5, 2.0, 3.0};
constexpr double kTol = 1e-9;

struct Outcome {
    bool ok = true;
    std::string detail;
    void require(bool cond) { ok = ok && cond; }
};

int failures = 0;

template <class F>
void criterion(int id, const char* title, double budget_s, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        body(out);
    } catch (const std::exception& e) {
        out.ok = false;
        out.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = budget_s <= 0.0 || secs < budget_s;
    const bool ok = out.ok && in_time;
    if (!ok) ++failures;
    fmt::print("{} criterion {:>2}: {} [{:.2f} s{}] {}\n", ok ? "PASS" : "FAIL", id, title, secs,
               budget_s > 0.0 ? fmt::format(" / {:.0f} s budget", budget_s) : "", out.detail);
    std::fflush(stdout);
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

std::vector<double> times_sqrt(const std::vector<double>& f, const Weight& w) {
    std::vector<double> out(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) out[j] = f[j] * std::sqrt(w[j]);
    return out;
}

Weight random_weight(const Lattice& lat, Rng& rng, int variant) {
    WeightSpec spec;
    switch (variant % 4) {
    case 0:
        spec.params["sigma"] = 1.0;
        break;
    case 1:
        spec.params["sigma"] = 2.5;
        spec.params["zero_fraction"] = 0.2;
        break;
    case 2:
        spec.kind = "a2-extremal-pair";
        spec.params["a"] = 0.9;
        break;
    default:
        spec.kind = "power";
        spec.params["a"] = -0.7;
        break;
    }
    return generate_weight(spec, lat, rng(), WeightSlot::w);
}

// Structural identities, accumulated over every lattice instance touched below.
struct Structural {
    double additivity = 0.0;
    double martingale = 0.0;
    double homogeneity = 0.0;
    long instances = 0;

    void observe(const Lattice& lat, const Weight& w, const std::vector<double>& f, const BumpGauge& g) {
        ++instances;
        const auto dists = cell_dist_fns(lat, w);
        const auto avg = lat.cell_averages(times_sqrt(f, w));
        const Weight w3 = w.scaled(3.0);
        for (CellId id = 0; id < lat.num_cells(); ++id) {
            if (!lat.is_leaf(id)) {
                const auto ch = lat.children(id);
                std::vector<double> alpha;
                std::vector<DistFn> parts;
                double mart = 0.0;
                for (CellId k = ch.begin; k < ch.end; ++k) {
                    const double a = lat.cell(k).mass / lat.cell(id).mass;
                    alpha.push_back(a);
                    parts.push_back(dists[k]);
                    mart += a * avg[k];
                }
                martingale = std::max(martingale, std::abs(mart - avg[id]) / (1.0 + std::abs(avg[id])));
                const StepFunction diff = DistFn::mixture(alpha, parts).steps() - dists[id].steps();
                for (double v : diff.values()) additivity = std::max(additivity, std::abs(v));
            }
            if (id % 17 == 0) {
                const double n1 = n_psi(dists[id], g);
                const double n3 = n_psi(dist_fn(lat, w3, id), g);
                if (n1 > 0.0) homogeneity = std::max(homogeneity, std::abs(n3 - 3.0 * n1) / (3.0 * n1));
            }
        }
    }
    bool ok() const { return additivity <= 1e-12 && martingale <= 1e-12 && homogeneity <= 1e-12; }
};

Structural structural;

} // namespace

int main() {
    std::vector<BumpGauge> gauges;
    for (double a : kAlphas) gauges.push_back(make_log_gauge(a));

    criterion(1, "gauge laws", 10.0, [&](Outcome& out) {
        double worst_norm = 0.0;
        long points = 0;
        for (const auto& g : gauges) {
            boost::math::quadrature::exp_sinh<double> q;
            const double integral = q.integrate([&](double x) { return 1.0 / g.psi_x(x); });
            worst_norm = std::max(worst_norm, std::abs(integral - 1.0));
            // 10^4 points: log-spaced on [1e-15, 1], monotonicity checked along the sorted grid
            double prev_psi = INFINITY, prev_phi = 0.0;
            for (int i = 0; i < 10000; ++i) {
                const double s = std::pow(10.0, -15.0 + 15.0 * i / 9999.0);
                const double psi = g.psi(s), phi = g.phi(s), mp = g.m_prime(s), m = g.m(s);
                out.require(psi <= prev_psi * (1.0 + 1e-15));
                out.require(phi >= prev_phi * (1.0 - 1e-15));
                out.require(mp >= 0.0 && mp <= 1.0 + 1e-15);
                out.require(m >= 0.0 && m <= s * (1.0 + 1e-15));
                prev_psi = psi;
                prev_phi = phi;
                ++points;
            }
        }
        out.require(worst_norm <= 1e-9);
        out.detail = fmt::format("|int dx / Psi - 1| <= {:.1e}, {} grid points", worst_norm, points);
    });

    criterion(2, "T convexity and -dT/dA bound", 10.0, [&](Outcome& out) {
        double min_det = INFINITY, min_ratio = INFINITY;
        for (const auto& g : gauges) {
            for (int i = 0; i < 100; ++i) {
                const double a = 1.0 + i / 99.0;
                for (int j = 1; j <= 100; ++j) {
                    const double n = j / 100.0;
                    const TValues t = t_scalar(g, a, n);
                    min_det = std::min(min_det, t.hessian_det());
                    out.require(t.hessian_det() >= -1e-12);
                    out.require(t.d_aa >= 0.0);
                    const double bound = 0.25 * n * n / g.phi(n);
                    min_ratio = std::min(min_ratio, -t.d_a / bound);
                    out.require(-t.d_a >= bound);
                }
            }
        }
        out.detail = fmt::format("min det {:.2e}, min (-dT/dA)/bound {:.3f}", min_det, min_ratio);
    });

    criterion(3, "derivative oracles", 0.0, [&](Outcome& out) {
        Rng rng(trial_seed(3, 0));
        std::normal_distribution<double> gauss(0.0, 2.0);
        std::uniform_real_distribution<double> unif;
        double e1 = 0.0, e2 = 0.0, e3 = 0.0, kappa = 0.0, min_u2 = INFINITY;
        for (int i = 0; i < 1000; ++i) {
            const BumpGauge& g = gauges[static_cast<std::size_t>(i % 3)];
            const DistFn n1 = random_distfn(rng), n2 = random_distfn(rng);
            const double half[2] = {0.5, 0.5};
            const DistFn parts[2] = {n1, n2};
            const DistFn mid = DistFn::mixture(half, parts);
            const StepFunction dn = (n1.steps() - n2.steps()).scaled(0.5);
            const DerivReport d = directional_derivs(mid, dn, g);
            if (d.w_delta > 0.0) {
                e1 = std::max(e1, rel_err(d.u_prime, d.fd_u_prime));
                e2 = std::max(e2, rel_err(d.u_second, d.fd_u_second));
                kappa = std::max(kappa, std::abs(d.kappa));
                const double r = -d.u_second / (d.w_delta * d.w_delta / d.n_psi);
                min_u2 = std::min(min_u2, r);
                out.require(r >= 1.0 - kTol);
            }
            const DmResult m = check_dB_dM(gauss(rng), n1, unif(rng), g);
            if (m.analytic > 0.0) e3 = std::max(e3, rel_err(m.analytic, m.fd));
        }
        out.require(e1 <= 1e-6 && e2 <= 1e-6 && e3 <= 1e-6 && kappa <= 2.0);
        out.detail = fmt::format("max rel err u' {:.1e}, u'' {:.1e}, dB/dM {:.1e}; max|kappa| {:.3f}; "
                                 "min -u''/(w^2/n) {:.3f}",
                                 e1, e2, e3, kappa, min_u2);
    });

    criterion(4, "two-point inequality", 60.0, [&](Outcome& out) {
        std::string detail;
        for (std::size_t gi = 0; gi < gauges.size(); ++gi) {
            const BumpGauge& g = gauges[gi];
            Rng rng(trial_seed(4, gi));
            std::normal_distribution<double> gauss(0.0, 2.0);
            double min_slack = INFINITY, min_ratio = INFINITY, min_literal = INFINITY;
            for (int i = 0; i < 100000; ++i) {
                const DistFn n1 = random_distfn(rng), n2 = random_distfn(rng);
                const TwoPointResult r = check_two_point(gauss(rng), n1, gauss(rng), n2, g);
                out.require(r.passed(kTol));
                min_slack = std::min(min_slack, r.slack / (1.0 + std::abs(r.rhs)));
                if (r.rhs > 0.0) min_ratio = std::min(min_ratio, r.lhs / r.rhs);
                if (kAlphas[gi] == 2.0) {
                    // the stricter constant 2/9 quoted for this gauge
                    const double rhs = r.rhs * (2.0 / 9.0) / g.c();
                    out.require(r.lhs - rhs >= -kTol * (1.0 + rhs));
                    if (rhs > 0.0) min_literal = std::min(min_literal, r.lhs / rhs);
                }
            }
            detail += fmt::format("alpha {}: c {:.4f}, min rel slack {:.1e}, min lhs/rhs {:.2f}{}; ", kAlphas[gi],
                                  g.c(), min_slack, min_ratio,
                                  std::isfinite(min_literal) ? fmt::format(" (c = 2/9: {:.2f})", min_literal) : "");
        }
        out.detail = detail;
    });

    criterion(5, "multi-point inequality and balanced signs", 0.0, [&](Outcome& out) {
        const BumpGauge& g = gauges[1];
        Rng rng(trial_seed(5, 0));
        std::normal_distribution<double> gauss(0.0, 2.0);
        double min_ratio = INFINITY, worst_cons = 0.0, min_half = INFINITY;
        for (int i = 0; i < 10000; ++i) {
            const int k = 2 + static_cast<int>(rng() % 15);
            const auto alpha = random_convex_weights(rng, k);
            std::vector<double> f(k);
            std::vector<DistFn> ns;
            for (int j = 0; j < k; ++j) {
                f[j] = gauss(rng);
                ns.push_back(random_distfn(rng));
            }
            const CheckResult r = check_multi_point(alpha, f, ns, g);
            out.require(r.passed(kTol));
            if (r.rhs > 0.0) min_ratio = std::min(min_ratio, r.lhs / r.rhs);
            const double fbar = std::inner_product(alpha.begin(), alpha.end(), f.begin(), 0.0);
            std::vector<double> x(k);
            for (int j = 0; j < k; ++j) x[j] = f[j] - fbar;
            const auto beta = balanced_signs(alpha, x);
            double cons = 0.0, value = 0.0, l1 = 0.0;
            for (int j = 0; j < k; ++j) {
                out.require(std::abs(beta[j]) <= 1.0);
                cons += alpha[j] * beta[j];
                value += alpha[j] * beta[j] * x[j];
                l1 += alpha[j] * std::abs(x[j]);
            }
            worst_cons = std::max(worst_cons, std::abs(cons));
            if (l1 > 0.0) min_half = std::min(min_half, value / l1);
        }
        out.require(worst_cons <= 1e-12 && min_half >= 0.5 - 1e-12);
        out.detail = fmt::format("min lhs/rhs {:.2f}; balanced signs: max |sum alpha beta| {:.1e}, "
                                 "min value/l1 {:.3f}",
                                 min_ratio, worst_cons, min_half);
    });

    criterion(6, "drop inequality", 0.0, [&](Outcome& out) {
        Rng rng(trial_seed(6, 0));
        std::normal_distribution<double> gauss(0.0, 2.0);
        std::uniform_real_distribution<double> unif;
        double min_ratio = INFINITY;
        for (int i = 0; i < 10000; ++i) {
            const BumpGauge& g = gauges[static_cast<std::size_t>(i % 3)];
            const int k = 2 + static_cast<int>(rng() % 7);
            const auto alpha = random_convex_weights(rng, k);
            std::vector<double> f(k), m(k);
            std::vector<DistFn> ns;
            double avg = 0.0;
            for (int j = 0; j < k; ++j) {
                f[j] = gauss(rng);
                m[j] = unif(rng);
                avg += alpha[j] * m[j];
                ns.push_back(random_distfn(rng));
            }
            const double a = unif(rng) * (1.0 - avg);
            const CheckResult r = check_drop(alpha, a, f, ns, m, g);
            out.require(r.passed(kTol));
            if (r.rhs > 0.0) min_ratio = std::min(min_ratio, r.lhs / r.rhs);
        }
        out.detail = fmt::format("min lhs/rhs {:.2f}", min_ratio);
    });

    criterion(7, "square-function embedding and telescope ledger", 0.0, [&](Outcome& out) {
        std::string detail;
        for (std::size_t gi = 0; gi < gauges.size(); ++gi) {
            const BumpGauge& g = gauges[gi];
            Rng rng(trial_seed(7, gi));
            double max_ratio = 0.0, min_slack = INFINITY;
            for (int i = 0; i < 100; ++i) {
                const int depth = 2 + i % 11; // 2..12
                const Lattice lat = i % 2 ? Lattice::uniform(depth, 2) : Lattice::random_masses(depth, 2, rng());
                const Weight w = random_weight(lat, rng, i);
                const auto f = random_leaf_vector(lat, rng);
                const EmbeddingReport r = embed_sum_25(lat, f, w, g);
                max_ratio = std::max(max_ratio, r.ratio);
                out.require(r.ratio <= g.c25() * (1.0 + kTol));
                if (kAlphas[gi] == 2.0) out.require(r.ratio <= 72.0);
                const TelescopeLedger t = telescope_audit_25(lat, f, w, g, depth <= 8);
                out.require(t.pass(kTol));
                min_slack = std::min(min_slack, t.min_slack);
                if (i % 10 == 0) structural.observe(lat, w, f, g);
            }
            detail += fmt::format("alpha {}: max ratio {:.3f} (bound {:.1f}), ledger min slack {:.1e}; ",
                                  kAlphas[gi], max_ratio, g.c25(), min_slack);
        }
        out.detail = detail;
    });

    criterion(8, "Carleson embedding", 0.0, [&](Outcome& out) {
        const BumpGauge& g = gauges[1];
        Rng rng(trial_seed(8, 0));
        double max_ratio = 0.0, worst_rec = 0.0;
        for (int i = 0; i < 100; ++i) {
            const Lattice lat = Lattice::random_masses(3 + i % 8, 2 + i % 2, rng());
            const Weight w = random_weight(lat, rng, i);
            const auto f = random_leaf_vector(lat, rng);
            const CarlesonSeq a = random_carleson(lat, rng, 0.2 + 0.6 * (i % 5) / 4.0);
            const EmbeddingReport r = embed_sum_26(lat, f, w, g, a);
            max_ratio = std::max(max_ratio, r.ratio);
            out.require(r.ratio <= 16.0);
            const auto loads = a.loads(lat);
            for (CellId id = 0; id < lat.num_cells(); ++id) {
                double rec = a[id];
                if (!lat.is_leaf(id)) {
                    const auto ch = lat.children(id);
                    for (CellId k = ch.begin; k < ch.end; ++k) rec += lat.cell(k).mass / lat.cell(id).mass * loads[k];
                }
                worst_rec = std::max(worst_rec, std::abs(rec - loads[id]));
            }
            if (lat.depth() <= 6) out.require(telescope_audit_26(lat, f, w, g, a).pass(kTol));
            if (i % 10 == 0) structural.observe(lat, w, f, g);
        }
        out.require(worst_rec <= 1e-12);
        out.detail = fmt::format("max ratio {:.4f} (bound 16), recursion error {:.1e}", max_ratio, worst_rec);
    });

    criterion(9, "Haar shifts", 0.0, [&](Outcome& out) {
        const BumpGauge& g = gauges[1];
        const double bound = std::sqrt(g.c25() * g.c25());
        Rng rng(trial_seed(9, 0));
        double max_norm = 0.0, max_growth = 0.0, worst_reassembly = 0.0, worst_attain = 0.0;
        for (int i = 0; i < 100; ++i) {
            auto lat = std::make_shared<const Lattice>(Lattice::random_masses(4 + i % 4, 2, rng()));
            const Weight w = random_weight(*lat, rng, i);
            Weight v = random_weight(*lat, rng, i + 1);
            v = v.scaled(1.0 / bump_constant(*lat, w, v, g, g).value);
            const HaarShift s = i % 4 == 3 ? worst_kernel(lat, random_leaf_vector(*lat, rng),
                                                          random_leaf_vector(*lat, rng), v, w, 1)
                                           : HaarShift::random(lat, 1, rng());
            const double nrm = two_weight_norm(s, v, w).value;
            max_norm = std::max(max_norm, nrm);
            out.require(nrm <= bound && nrm <= 72.0);

            const int n = 2 + i % 3; // 2..4
            if (n <= lat->depth()) {
                const HaarShift sn = HaarShift::random(lat, n, rng());
                const auto parts = sn.decompose_complexity();
                Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(lat->num_leaves(), lat->num_leaves());
                for (const auto& p : parts) sum += p.assemble_matrix();
                worst_reassembly = std::max(worst_reassembly, (sum - sn.assemble_matrix()).cwiseAbs().maxCoeff());
                const double nn = two_weight_norm(sn, v, w).value;
                max_growth = std::max(max_growth, nn / n);
                out.require(nn <= n * bound);
            }

            const auto f = random_leaf_vector(*lat, rng), h = random_leaf_vector(*lat, rng);
            const int c = 1 + i % 3;
            const HaarShift wk = worst_kernel(lat, f, h, v, w, c);
            const double pair = weighted_bilinear(*lat, wk.apply(times_sqrt(f, w)), h, v);
            const double form = domination_form_shift(*lat, f, h, v, w, g, g, c).value;
            worst_attain = std::max(worst_attain, rel_err(pair, form));
        }
        out.require(worst_reassembly <= 1e-12 && worst_attain <= 1e-10);
        out.detail = fmt::format("max norm {:.3f} (bound {:.0f}), max norm/n {:.3f}, reassembly {:.1e}, "
                                 "attainment {:.1e}",
                                 max_norm, bound, max_growth, worst_reassembly, worst_attain);
    });

    criterion(10, "paraproducts", 0.0, [&](Outcome& out) {
        const BumpGauge& g = gauges[1];
        const double bound = std::sqrt(g.c26() * g.c25());
        Rng rng(trial_seed(10, 0));
        double max_norm = 0.0;
        for (int i = 0; i < 100; ++i) {
            const int branching = 2 + i % 2;
            const int depth = branching == 2 ? 4 + i % 4 : 3 + i % 3; // at most 729 leaves
            auto lat = std::make_shared<const Lattice>(Lattice::random_masses(depth, branching, rng()));
            const Weight w = random_weight(*lat, rng, i);
            Weight v = random_weight(*lat, rng, i + 2);
            v = v.scaled(1.0 / bump_constant(*lat, w, v, g, g).value);
            const Paraproduct p = Paraproduct::random(lat, rng());
            out.require(std::abs(p.carleson().norm(*lat).value - 1.0) <= 1e-12);
            const double nrm = two_weight_norm(p, v, w).value;
            max_norm = std::max(max_norm, nrm);
            out.require(nrm <= bound && nrm <= std::sqrt(16.0 * 72.0));
        }
        out.detail = fmt::format("max norm {:.3f} (bound {:.2f})", max_norm, bound);
    });

    criterion(11, "n_Psi against the Orlicz norm", 0.0, [&](Outcome& out) {
        const YoungFunction phi = YoungFunction::log_power(2.0);
        const BumpGauge psi = psi_from_young(phi);
        const MatchedPairConstant cl = matched_pair_constant(phi, psi);
        Rng rng(trial_seed(11, 0));
        const Lattice lat = Lattice::random_masses(4, 2, 1234);
        double worst = 0.0, worst_def = 0.0;
        const auto& masses = lat.leaf_masses();
        for (int i = 0; i < 1000; ++i) {
            const Weight w = random_weight(lat, rng, i);
            const auto n = cell_n_psi(lat, w, psi);
            const auto norms = cell_orlicz_norms(lat, w, phi);
            for (CellId id = 0; id < lat.num_cells(); ++id) {
                if (norms[id] == 0.0) {
                    out.require(n[id] == 0.0);
                    continue;
                }
                // the norm is the root of lambda -> avg Phi(w / lambda) = 1
                const auto& cell = lat.cell(id);
                double avg = 0.0;
                for (std::size_t j = cell.leaf_begin; j < cell.leaf_end; ++j) avg += masses[j] * phi.eval(w[j] / norms[id]);
                avg /= cell.mass;
                worst_def = std::max(worst_def, std::abs(avg - 1.0));
                worst = std::max(worst, n[id] / norms[id]);
                out.require(n[id] <= cl.value * norms[id] * (1.0 + kTol));
            }
        }
        out.require(worst_def <= 1e-9);
        out.detail = fmt::format("C_L = {:.4f} (k {:.4f} + head {:.4f} + tail {:.4f}), max ratio {:.4f}, "
                                 "|avg Phi(w/norm) - 1| <= {:.1e}",
                                 cl.value, cl.k_match, cl.head, cl.tail, worst, worst_def);
    });

    criterion(12, "structural exactness", 0.0, [&](Outcome& out) {
        out.require(structural.instances > 0 && structural.ok());
        out.detail = fmt::format("{} instances: additivity {:.1e}, martingale {:.1e}, homogeneity {:.1e}",
                                 structural.instances, structural.additivity, structural.martingale,
                                 structural.homogeneity);
    });

    fmt::print("{} of 12 criteria passed\n", 12 - failures);
    return failures == 0 ? 0 : 1;
}
