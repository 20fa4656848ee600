#include "doctest.h"

#include "bumpcert/embedding.hpp"
#include "bumpcert/error.hpp"
#include "bumpcert/generators.hpp"

#include <cmath>
#include <vector>

using namespace bumpcert;

namespace {

Weight lognormal_weight(const Lattice& lat, Rng& rng, double sigma = 1.5, double zero_p = 0.0) {
    std::lognormal_distribution<double> ln(0.0, sigma);
    std::bernoulli_distribution z(zero_p);
    std::vector<double> v(lat.num_leaves());
    for (double& x : v) x = z(rng) ? 0.0 : ln(rng);
    return Weight(v);
}

// Direct evaluation of the square-function sum, cell by cell from leaf data.
double direct_25(const Lattice& lat, const std::vector<double>& f, const Weight& w, const BumpGauge& g) {
    double total = 0.0;
    std::vector<double> fw(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) fw[j] = f[j] * std::sqrt(w[j]);
    for (CellId id = 0; id < lat.num_cells(); ++id) {
        if (lat.is_leaf(id) || w.is_zero_on(lat, id)) continue;
        const auto d = lat.apply_delta(id, fw);
        double l1 = 0.0;
        for (std::size_t j = 0; j < d.size(); ++j) l1 += lat.leaf_masses()[j] * std::abs(d[j]);
        const double mass = lat.cell(id).mass;
        total += (l1 / mass) * (l1 / mass) * mass / n_psi(dist_fn(lat, w, id), g);
    }
    return total;
}

} // namespace

TEST_SUITE("embedding") {

TEST_CASE("one-term hand example for w = 1") {
    const BumpGauge g = make_log_gauge(2.0);
    const Lattice lat = Lattice::uniform(3, 2);
    const Weight one(std::vector<double>(8, 1.0));
    std::vector<double> f(8);
    for (int j = 0; j < 8; ++j) f[j] = j < 4 ? 1.0 : -1.0;
    const EmbeddingReport r = embed_sum_25(lat, f, one, g);
    // ||Delta_root f||_1 = 1, n_Psi = 2, |root| = 1
    CHECK(r.total == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(r.terms[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(r.norm_sq == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.bound == g.c25());
    CHECK(r.pass);
    const EmbeddingReport z = embed_sum_25(lat, std::vector<double>(8, 0.0), one, g);
    CHECK(z.total == 0.0);
    CHECK(z.ratio == 0.0);
}

TEST_CASE("embedding sum against direct evaluation; ratio bound; partial sums") {
    Rng rng(1);
    for (double alpha : {1.5, 2.0, 3.0}) {
        const BumpGauge g = make_log_gauge(alpha);
        for (int trial = 0; trial < 10; ++trial) {
            const Lattice lat = Lattice::random_masses(4 + trial % 4, 2, 10 + trial);
            const Weight w = lognormal_weight(lat, rng, 1.5, 0.2);
            const auto f = random_leaf_vector(lat, rng);
            const EmbeddingReport r = embed_sum_25(lat, f, w, g);
            CHECK(r.total == doctest::Approx(direct_25(lat, f, w, g)).epsilon(1e-12));
            CHECK(r.ratio <= g.c25());
            CHECK(r.pass);
            for (double t : r.terms) CHECK(t >= 0.0);
            for (std::size_t d = 1; d < r.by_depth.size(); ++d) CHECK(r.by_depth[d] >= r.by_depth[d - 1]);
            CHECK(r.by_depth.back() == doctest::Approx(r.total).epsilon(1e-14));
            // deleting a term never increases the sum
            for (CellId id = 0; id < lat.num_cells(); id += 7) CHECK(r.total - r.terms[id] <= r.total);
            // w -> lambda w leaves the ratio unchanged
            const EmbeddingReport s = embed_sum_25(lat, f, w.scaled(37.0), g);
            CHECK(s.ratio == doctest::Approx(r.ratio).epsilon(1e-12));
        }
    }
}

TEST_CASE("Carleson embedding: zero, root-only, monotone, bound") {
    const BumpGauge g = make_log_gauge(2.0);
    Rng rng(2);
    const Lattice lat = Lattice::random_masses(6, 2, 77);
    const Weight w = lognormal_weight(lat, rng);
    const auto f = random_leaf_vector(lat, rng);
    CHECK(embed_sum_26(lat, f, w, g, CarlesonSeq(std::vector<double>(lat.num_cells(), 0.0))).total == 0.0);

    std::vector<double> root(lat.num_cells(), 0.0);
    root[0] = 1.0;
    const EmbeddingReport one = embed_sum_26(lat, f, w, g, CarlesonSeq(root));
    const double avg = [&] {
        std::vector<double> fw(f.size());
        for (std::size_t j = 0; j < f.size(); ++j) fw[j] = f[j] * std::sqrt(w[j]);
        return lat.average(fw, 0);
    }();
    CHECK(one.total == doctest::Approx(avg * avg / n_psi(dist_fn(lat, w, 0), g)).epsilon(1e-13));
    CHECK(one.total <= g.c_psi() * one.norm_sq);

    for (int trial = 0; trial < 30; ++trial) {
        const CarlesonSeq a = random_carleson(lat, rng, 0.5);
        std::vector<double> smaller(a.coeffs().begin(), a.coeffs().end());
        std::uniform_real_distribution<double> u;
        for (double& x : smaller) x *= u(rng);
        const auto ft = random_leaf_vector(lat, rng);
        const EmbeddingReport big = embed_sum_26(lat, ft, w, g, a);
        const EmbeddingReport small = embed_sum_26(lat, ft, w, g, CarlesonSeq(smaller));
        CHECK(small.total <= big.total * (1.0 + 1e-14));
        CHECK(big.ratio <= 16.0);
        CHECK(big.pass);
    }
    CHECK_THROWS_AS(embed_sum_26(lat, f, w, g, random_carleson(lat, rng).scaled(2.0)), ValidationError);
}

TEST_CASE("telescope ledgers") {
    const BumpGauge g = make_log_gauge(2.0);
    Rng rng(3);
    const Lattice lat = Lattice::random_masses(3, 2, 5);
    const Weight w = lognormal_weight(lat, rng, 1.5, 0.2);
    const TelescopeLedger zero = telescope_audit_25(lat, std::vector<double>(8, 0.0), w, g);
    for (const auto& row : zero.rows) {
        CHECK(row.partial_lhs == 0.0);
        CHECK(row.rhs == 0.0);
    }
    for (int trial = 0; trial < 30; ++trial) {
        const Lattice l = Lattice::random_masses(3 + trial % 4, 2 + trial % 2, 40 + trial);
        const Weight wt = lognormal_weight(l, rng, 1.5, 0.2);
        const auto f = random_leaf_vector(l, rng);
        const TelescopeLedger t25 = telescope_audit_25(l, f, wt, g);
        CHECK(t25.pass());
        CHECK(t25.min_slack >= -1e-9);
        CHECK(t25.min_energy_slack >= -1e-9);
        // one row per (root, generation)
        std::size_t expect = 0;
        for (CellId id = 0; id < l.num_cells(); ++id) expect += static_cast<std::size_t>(l.depth() - l.cell(id).depth + 1);
        CHECK(t25.rows.size() == expect);
        // generation-0 rows have nothing to telescope
        for (const auto& row : t25.rows)
            if (row.generation == 0) CHECK(row.partial_lhs == 0.0);
        const TelescopeLedger only_root = telescope_audit_25(l, f, wt, g, false);
        CHECK(only_root.rows.size() == static_cast<std::size_t>(l.depth()) + 1);

        const CarlesonSeq a = random_carleson(l, rng, 0.5);
        const TelescopeLedger t26 = telescope_audit_26(l, f, wt, g, a);
        CHECK(t26.pass());
    }
}

TEST_CASE("adversarial search") {
    const BumpGauge g = make_log_gauge(2.0);
    const Lattice lat = Lattice::uniform(5, 2);
    const Weight one(std::vector<double>(lat.num_leaves(), 1.0));
    const AdversarialResult r = adversarial_ratio(lat, one, g, 10, 3, 4);
    CHECK(r.ratio >= 0.5);
    CHECK(r.ratio <= g.c25());
    for (std::size_t i = 1; i < r.history.size(); ++i)
        if (i % 10 != 0) CHECK(r.history[i] >= r.history[i - 1]);
    CHECK(embed_sum_25(lat, r.f, one, g).ratio == doctest::Approx(r.ratio).epsilon(1e-12));

    Rng rng(4);
    const Lattice rl = Lattice::random_masses(6, 2, 9);
    const Weight w = lognormal_weight(rl, rng, 2.0);
    double prev = 0.0;
    for (int budget : {1, 3, 8, 20}) {
        const AdversarialResult a = adversarial_ratio(rl, w, g, budget, 11);
        CHECK(a.ratio >= prev);
        CHECK(a.ratio <= g.c25());
        prev = a.ratio;
    }
    CHECK_THROWS_AS(adversarial_ratio(rl, w, g, -1), ParameterError);
}

} // TEST_SUITE
