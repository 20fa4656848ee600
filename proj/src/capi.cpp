#include "bumpcert/bumpcert.h"

#include "bumpcert/bellman.hpp"
#include "bumpcert/embedding.hpp"
#include "bumpcert/error.hpp"
#include "bumpcert/experiment.hpp"
#include "bumpcert/operators.hpp"

#include "json.hpp"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

using namespace bumpcert;

struct bc_gauge {
    BumpGauge g;
};
struct bc_young {
    YoungFunction phi;
};
struct bc_lattice {
    std::shared_ptr<const Lattice> lat;
};
struct bc_weight {
    Weight w;
};
struct bc_distfn {
    DistFn d;
};
struct bc_shift {
    HaarShift s;
};
struct bc_paraproduct {
    Paraproduct p;
};

namespace {

thread_local std::string last_error;

struct NullArg {};

template <class... P>
void need(const P*... ptrs) {
    if (((ptrs == nullptr) || ...)) throw NullArg{};
}

template <class F>
bc_status run(F&& body) {
    try {
        last_error.clear();
        body();
        return BC_OK;
    } catch (const ParameterError& e) {
        last_error = e.what();
        return BC_ERR_PARAMETER;
    } catch (const DomainError& e) {
        last_error = e.what();
        return BC_ERR_DOMAIN;
    } catch (const RangeError& e) {
        last_error = e.what();
        return BC_ERR_RANGE;
    } catch (const ValidationError& e) {
        last_error = e.what();
        return BC_ERR_VALIDATION;
    } catch (const UsageError& e) {
        last_error = e.what();
        return BC_ERR_USAGE;
    } catch (NullArg) {
        last_error = "null pointer argument";
        return BC_ERR_NULL;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return BC_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return BC_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return BC_ERR_INTERNAL;
    }
}

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::vector<DistFn> dists(size_t k, const bc_distfn* const* n) {
    std::vector<DistFn> out;
    for (size_t i = 0; i < k; ++i) {
        need(n[i]);
        out.push_back(n[i]->d);
    }
    return out;
}

} // namespace

extern "C" {

const char* bc_last_error(void) { return last_error.c_str(); }
const char* bc_version(void) { return "1.0.0"; }
void bc_string_free(char* s) { std::free(s); }

const char* bc_suite_list(void) {
    static const std::string list = [] {
        std::string s;
        for (const auto& n : suite_names()) s += n + "\n";
        return s;
    }();
    return list.c_str();
}

// ---- gauges

bc_status bc_gauge_create_log(double alpha, bc_gauge** out) {
    return run([&] {
        need(out);
        *out = new bc_gauge{make_log_gauge(alpha)};
    });
}

bc_status bc_gauge_create_family(const char* family, double alpha, bc_gauge** out) {
    return run([&] {
        need(family, out);
        *out = new bc_gauge{make_gauge_family(family, alpha)};
    });
}

bc_status bc_gauge_from_young(const bc_young* phi, double t_min, bc_gauge** out) {
    return run([&] {
        need(phi, out);
        *out = new bc_gauge{psi_from_young(phi->phi, t_min)};
    });
}

void bc_gauge_free(bc_gauge* g) { delete g; }

bc_status bc_gauge_eval(const bc_gauge* g, bc_gauge_fn fn, double s, double* out) {
    return run([&] {
        need(g, out);
        switch (fn) {
        case BC_PSI: *out = g->g.psi(s); break;
        case BC_PHI: *out = g->g.phi(s); break;
        case BC_M_PRIME: *out = g->g.m_prime(s); break;
        case BC_M: *out = g->g.m(s); break;
        case BC_PSI_PRIME: *out = g->g.psi_prime(s); break;
        case BC_PHI_PRIME: *out = g->g.phi_prime(s); break;
        case BC_RAW_PSI: *out = g->g.raw_psi(s); break;
        default: throw ParameterError("unknown gauge function");
        }
    });
}

bc_status bc_gauge_constants_get(const bc_gauge* g, bc_gauge_constants* out) {
    return run([&] {
        need(g, out);
        const GaugeConstants& c = g->g.constants();
        *out = {c.k, c.s_star, c.c_psi, c.c, c.c25, c.c26};
    });
}

bc_status bc_gauge_t(const bc_gauge* g, double a, double n, bc_t_values* out) {
    return run([&] {
        need(g, out);
        const TValues t = t_scalar(g->g, a, n);
        *out = {t.value, t.d_a, t.d_n, t.d_aa, t.d_an, t.d_nn};
    });
}

// ---- Young functions

bc_status bc_young_create_log_power(double alpha, bc_young** out) {
    return run([&] {
        need(out);
        *out = new bc_young{YoungFunction::log_power(alpha)};
    });
}

void bc_young_free(bc_young* phi) { delete phi; }

bc_status bc_young_eval(const bc_young* phi, double t, double* value, double* deriv) {
    return run([&] {
        need(phi);
        if (value) *value = phi->phi.eval(t);
        if (deriv) *deriv = phi->phi.deriv(t);
    });
}

bc_status bc_orlicz_norm(const bc_young* phi, const double* masses, const double* values, size_t n, double* out) {
    return run([&] {
        need(phi, out);
        if (n > 0) need(masses, values);
        *out = orlicz_norm({masses, n}, {values, n}, phi->phi);
    });
}

bc_status bc_matched_pair_constant(const bc_young* phi, const bc_gauge* psi, double* out) {
    return run([&] {
        need(phi, psi, out);
        *out = matched_pair_constant(phi->phi, psi->g).value;
    });
}

// ---- lattices and weights

bc_status bc_lattice_create_uniform(int depth, int branching, bc_lattice** out) {
    return run([&] {
        need(out);
        *out = new bc_lattice{std::make_shared<const Lattice>(Lattice::uniform(depth, branching))};
    });
}

bc_status bc_lattice_create_random(int depth, int branching, uint64_t seed, bc_lattice** out) {
    return run([&] {
        need(out);
        *out = new bc_lattice{std::make_shared<const Lattice>(Lattice::random_masses(depth, branching, seed))};
    });
}

void bc_lattice_free(bc_lattice* lat) { delete lat; }

bc_status bc_lattice_info(const bc_lattice* lat, int* depth, size_t* num_cells, size_t* num_leaves) {
    return run([&] {
        need(lat);
        if (depth) *depth = lat->lat->depth();
        if (num_cells) *num_cells = lat->lat->num_cells();
        if (num_leaves) *num_leaves = lat->lat->num_leaves();
    });
}

bc_status bc_lattice_cell_mass(const bc_lattice* lat, uint32_t cell, double* out) {
    return run([&] {
        need(lat, out);
        if (cell >= lat->lat->num_cells()) throw RangeError("cell index out of range");
        *out = lat->lat->cell(cell).mass;
    });
}

bc_status bc_lattice_path(const bc_lattice* lat, uint32_t cell, char** out) {
    return run([&] {
        need(lat, out);
        if (cell >= lat->lat->num_cells()) throw RangeError("cell index out of range");
        *out = dup(lat->lat->path(cell));
    });
}

bc_status bc_lattice_find(const bc_lattice* lat, const char* path, uint32_t* out) {
    return run([&] {
        need(lat, path, out);
        *out = lat->lat->find(path);
    });
}

bc_status bc_weight_create(const double* values, size_t n, bc_weight** out) {
    return run([&] {
        need(out);
        if (n > 0) need(values);
        *out = new bc_weight{Weight(std::vector<double>(values, values + n))};
    });
}

bc_status bc_weight_generate(const bc_lattice* lat, const char* spec_json, uint64_t seed, int slot, bc_weight** out) {
    return run([&] {
        need(lat, spec_json, out);
        // Reuse the config reader so diagnostics match the CLI.
        const std::string doc = std::string("{\"w\": ") + spec_json + "}";
        const ExperimentConfig cfg = parse_config(doc, "weight spec");
        *out = new bc_weight{generate_weight(cfg.w, *lat->lat, seed, slot == 0 ? WeightSlot::v : WeightSlot::w)};
    });
}

void bc_weight_free(bc_weight* w) { delete w; }

bc_status bc_weight_values(const bc_weight* w, double* out, size_t n) {
    return run([&] {
        need(w, out);
        if (n != w->w.size()) throw ParameterError("output buffer has wrong length");
        std::copy(w->w.values().begin(), w->w.values().end(), out);
    });
}

// ---- distribution functions

bc_status bc_distfn_from_samples(const double* masses, const double* values, size_t n, bc_distfn** out) {
    return run([&] {
        need(out);
        if (n > 0) need(masses, values);
        *out = new bc_distfn{DistFn::from_samples({masses, n}, {values, n})};
    });
}

bc_status bc_distfn_of_cell(const bc_lattice* lat, const bc_weight* w, uint32_t cell, bc_distfn** out) {
    return run([&] {
        need(lat, w, out);
        if (cell >= lat->lat->num_cells()) throw RangeError("cell index out of range");
        *out = new bc_distfn{dist_fn(*lat->lat, w->w, cell)};
    });
}

void bc_distfn_free(bc_distfn* d) { delete d; }

bc_status bc_distfn_eval(const bc_distfn* d, double t, double* out) {
    return run([&] {
        need(d, out);
        *out = d->d(t);
    });
}

bc_status bc_distfn_integral(const bc_distfn* d, double* out) {
    return run([&] {
        need(d, out);
        *out = d->d.integral();
    });
}

bc_status bc_n_psi(const bc_distfn* d, const bc_gauge* g, double* out) {
    return run([&] {
        need(d, g, out);
        *out = n_psi(d->d, g->g);
    });
}

bc_status bc_u_of_n(const bc_distfn* d, const bc_gauge* g, double* out) {
    return run([&] {
        need(d, g, out);
        *out = u_of_N(d->d, g->g);
    });
}

// ---- bump constants

bc_status bc_bump_constant(const bc_lattice* lat, const bc_weight* v, const bc_weight* w, const bc_gauge* g1,
                           const bc_gauge* g2, double* value, uint32_t* cell) {
    return run([&] {
        need(lat, v, w, g1, g2, value);
        const CellMax m = bump_constant(*lat->lat, v->w, w->w, g1->g, g2->g);
        *value = m.value;
        if (cell) *cell = m.argmax;
    });
}

bc_status bc_a2_constant(const bc_lattice* lat, const bc_weight* v, const bc_weight* w, double* value,
                         uint32_t* cell) {
    return run([&] {
        need(lat, v, w, value);
        const CellMax m = a2_constant(*lat->lat, v->w, w->w);
        *value = m.value;
        if (cell) *cell = m.argmax;
    });
}

bc_status bc_orlicz_bump_constant(const bc_lattice* lat, const bc_weight* v, const bc_weight* w,
                                  const bc_young* phi1, const bc_young* phi2, double* value, uint32_t* cell) {
    return run([&] {
        need(lat, v, w, phi1, phi2, value);
        const CellMax m = orlicz_bump_constant(*lat->lat, v->w, w->w, phi1->phi, phi2->phi);
        *value = m.value;
        if (cell) *cell = m.argmax;
    });
}

// ---- Bellman

bc_status bc_check_two_point(double f1, const bc_distfn* n1, double f2, const bc_distfn* n2, const bc_gauge* g,
                             bc_check* out) {
    return run([&] {
        need(n1, n2, g, out);
        const TwoPointResult r = check_two_point(f1, n1->d, f2, n2->d, g->g);
        *out = {r.slack, r.lhs, r.rhs};
    });
}

bc_status bc_check_multi_point(size_t k, const double* alpha, const double* f, const bc_distfn* const* n,
                               const bc_gauge* g, bc_check* out) {
    return run([&] {
        need(alpha, f, n, g, out);
        const std::vector<DistFn> parts = dists(k, n);
        const CheckResult r = check_multi_point({alpha, k}, {f, k}, parts, g->g);
        *out = {r.slack, r.lhs, r.rhs};
    });
}

bc_status bc_check_drop(size_t k, const double* alpha, double a, const double* f, const bc_distfn* const* n,
                        const double* m, const bc_gauge* g, bc_check* out) {
    return run([&] {
        need(alpha, f, n, m, g, out);
        const std::vector<DistFn> parts = dists(k, n);
        const CheckResult r = check_drop({alpha, k}, a, {f, k}, parts, {m, k}, g->g);
        *out = {r.slack, r.lhs, r.rhs};
    });
}

bc_status bc_balanced_signs(size_t k, const double* alpha, const double* x, double* beta) {
    return run([&] {
        need(alpha, x, beta);
        const std::vector<double> b = balanced_signs({alpha, k}, {x, k});
        std::copy(b.begin(), b.end(), beta);
    });
}

// ---- embeddings

namespace {
void fill(const EmbeddingReport& r, bc_embedding* out) { *out = {r.total, r.norm_sq, r.ratio, r.bound, r.pass ? 1 : 0}; }
} // namespace

bc_status bc_embed_25(const bc_lattice* lat, const double* f, size_t n, const bc_weight* w, const bc_gauge* g,
                      bc_embedding* out) {
    return run([&] {
        need(lat, f, w, g, out);
        fill(embed_sum_25(*lat->lat, {f, n}, w->w, g->g), out);
    });
}

bc_status bc_embed_26(const bc_lattice* lat, const double* f, size_t n, const bc_weight* w, const bc_gauge* g,
                      const double* a, size_t num_cells, bc_embedding* out) {
    return run([&] {
        need(lat, f, w, g, a, out);
        const CarlesonSeq seq(std::vector<double>(a, a + num_cells));
        fill(embed_sum_26(*lat->lat, {f, n}, w->w, g->g, seq), out);
    });
}

// ---- operators

bc_status bc_shift_create_random(const bc_lattice* lat, int complexity, uint64_t seed, bc_shift** out) {
    return run([&] {
        need(lat, out);
        *out = new bc_shift{HaarShift::random(lat->lat, complexity, seed)};
    });
}

bc_status bc_shift_from_json(const bc_lattice* lat, const char* json, bc_shift** out) {
    return run([&] {
        need(lat, json, out);
        *out = new bc_shift{HaarShift::from_json(lat->lat, json)};
    });
}

bc_status bc_shift_to_json(const bc_shift* s, char** out) {
    return run([&] {
        need(s, out);
        *out = dup(s->s.to_json());
    });
}

void bc_shift_free(bc_shift* s) { delete s; }

bc_status bc_shift_apply(const bc_shift* s, const double* in, double* out, size_t n) {
    return run([&] {
        need(s, in, out);
        const std::vector<double> r = s->s.apply({in, n});
        std::copy(r.begin(), r.end(), out);
    });
}

bc_status bc_shift_two_weight_norm(const bc_shift* s, const bc_weight* v, const bc_weight* w, double* out) {
    return run([&] {
        need(s, v, w, out);
        *out = two_weight_norm(s->s, v->w, w->w).value;
    });
}

bc_status bc_paraproduct_create_random(const bc_lattice* lat, uint64_t seed, bc_paraproduct** out) {
    return run([&] {
        need(lat, out);
        *out = new bc_paraproduct{Paraproduct::random(lat->lat, seed)};
    });
}

bc_status bc_paraproduct_from_json(const bc_lattice* lat, const char* json, bc_paraproduct** out) {
    return run([&] {
        need(lat, json, out);
        *out = new bc_paraproduct{Paraproduct::from_json(lat->lat, json)};
    });
}

bc_status bc_paraproduct_to_json(const bc_paraproduct* p, char** out) {
    return run([&] {
        need(p, out);
        *out = dup(p->p.to_json());
    });
}

void bc_paraproduct_free(bc_paraproduct* p) { delete p; }

bc_status bc_paraproduct_apply(const bc_paraproduct* p, const double* in, double* out, size_t n) {
    return run([&] {
        need(p, in, out);
        const std::vector<double> r = p->p.apply({in, n});
        std::copy(r.begin(), r.end(), out);
    });
}

bc_status bc_paraproduct_two_weight_norm(const bc_paraproduct* p, const bc_weight* v, const bc_weight* w,
                                         double* out) {
    return run([&] {
        need(p, v, w, out);
        *out = two_weight_norm(p->p, v->w, w->w).value;
    });
}

// ---- harness

bc_status bc_run_suite(const char* suite, const char* config_json, const char* origin, const bc_run_options* options,
                       const char* out_dir, int* passed, char** summary) {
    return run([&] {
        need(suite, config_json, passed);
        const ExperimentConfig cfg = parse_config(config_json, origin ? origin : "config");
        RunOptions opt;
        if (options) {
            if (options->has_seed) opt.seed = options->seed;
            if (options->has_trials) opt.trials = options->trials;
            if (options->has_trial) opt.only_trial = options->trial;
        }
        const RunReport rep = run_suite(suite, cfg, opt);
        if (out_dir) write_report(rep, out_dir);
        *passed = rep.pass ? 1 : 0;
        if (summary) *summary = dup(summary_markdown(rep));
    });
}

bc_status bc_report(const char* dir, int* passed, char** summary) {
    return run([&] {
        need(dir, passed);
        const RunReport rep = read_report(dir);
        *passed = rep.pass ? 1 : 0;
        if (summary) *summary = dup(summary_markdown(rep));
    });
}

bc_status bc_bump_table(const char* config_json, const char* origin, char** table) {
    return run([&] {
        need(config_json, table);
        *table = dup(bump_table(parse_config(config_json, origin ? origin : "config")));
    });
}

} // extern "C"
