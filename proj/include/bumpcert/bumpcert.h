#ifndef BUMPCERT_H
#define BUMPCERT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BC_API __declspec(dllexport)
#else
#define BC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bc_status {
    BC_OK = 0,
    BC_ERR_PARAMETER = 1,  /* bad argument value */
    BC_ERR_DOMAIN = 2,     /* point outside a function's domain */
    BC_ERR_RANGE = 3,      /* index or depth out of range */
    BC_ERR_VALIDATION = 4, /* object fails its invariant (kernel bound, Carleson, ...) */
    BC_ERR_USAGE = 5,      /* malformed config or request */
    BC_ERR_NULL = 6,       /* null pointer argument */
    BC_ERR_INTERNAL = 7
} bc_status;

/* Message of the last failed call on this thread ("" if none). */
BC_API const char* bc_last_error(void);
BC_API const char* bc_version(void);
/* Frees strings returned through char** out-parameters. */
BC_API void bc_string_free(char* s);

typedef struct bc_gauge bc_gauge;
typedef struct bc_young bc_young;
typedef struct bc_lattice bc_lattice;
typedef struct bc_weight bc_weight;
typedef struct bc_distfn bc_distfn;
typedef struct bc_shift bc_shift;
typedef struct bc_paraproduct bc_paraproduct;

/* ---- gauges ---- */

typedef enum bc_gauge_fn {
    BC_PSI = 0,
    BC_PHI = 1,
    BC_M_PRIME = 2,
    BC_M = 3,
    BC_PSI_PRIME = 4,
    BC_PHI_PRIME = 5,
    BC_RAW_PSI = 6
} bc_gauge_fn;

typedef struct bc_gauge_constants {
    double k;
    double s_star;
    double c_psi;
    double c;
    double c25;
    double c26;
} bc_gauge_constants;

typedef struct bc_t_values {
    double value;
    double d_a;
    double d_n;
    double d_aa;
    double d_an;
    double d_nn;
} bc_t_values;

BC_API bc_status bc_gauge_create_log(double alpha, bc_gauge** out);
/* family: "log" or "young-log" */
BC_API bc_status bc_gauge_create_family(const char* family, double alpha, bc_gauge** out);
BC_API bc_status bc_gauge_from_young(const bc_young* phi, double t_min, bc_gauge** out);
BC_API void bc_gauge_free(bc_gauge* g);
BC_API bc_status bc_gauge_eval(const bc_gauge* g, bc_gauge_fn fn, double s, double* out);
BC_API bc_status bc_gauge_constants_get(const bc_gauge* g, bc_gauge_constants* out);
BC_API bc_status bc_gauge_t(const bc_gauge* g, double a, double n, bc_t_values* out);

/* ---- Young functions and Orlicz norms ---- */

BC_API bc_status bc_young_create_log_power(double alpha, bc_young** out);
BC_API void bc_young_free(bc_young* phi);
BC_API bc_status bc_young_eval(const bc_young* phi, double t, double* value, double* deriv);
BC_API bc_status bc_orlicz_norm(const bc_young* phi, const double* masses, const double* values, size_t n,
                                double* out);
/* Constant C_L of n_Psi(N_I^w) <= C_L ||w||_{L^Phi(I)} for a gauge built by bc_gauge_from_young. */
BC_API bc_status bc_matched_pair_constant(const bc_young* phi, const bc_gauge* psi, double* out);

/* ---- lattices and weights ---- */

BC_API bc_status bc_lattice_create_uniform(int depth, int branching, bc_lattice** out);
BC_API bc_status bc_lattice_create_random(int depth, int branching, uint64_t seed, bc_lattice** out);
BC_API void bc_lattice_free(bc_lattice* lat);
BC_API bc_status bc_lattice_info(const bc_lattice* lat, int* depth, size_t* num_cells, size_t* num_leaves);
BC_API bc_status bc_lattice_cell_mass(const bc_lattice* lat, uint32_t cell, double* out);
BC_API bc_status bc_lattice_path(const bc_lattice* lat, uint32_t cell, char** out);
BC_API bc_status bc_lattice_find(const bc_lattice* lat, const char* path, uint32_t* out);

BC_API bc_status bc_weight_create(const double* values, size_t n, bc_weight** out);
/* spec_json: {"kind": ..., "params": {...}, "seed": ..., "values": [...]}; slot 0 = v, 1 = w. */
BC_API bc_status bc_weight_generate(const bc_lattice* lat, const char* spec_json, uint64_t seed, int slot,
                                    bc_weight** out);
BC_API void bc_weight_free(bc_weight* w);
BC_API bc_status bc_weight_values(const bc_weight* w, double* out, size_t n);

/* ---- distribution functions ---- */

BC_API bc_status bc_distfn_from_samples(const double* masses, const double* values, size_t n, bc_distfn** out);
BC_API bc_status bc_distfn_of_cell(const bc_lattice* lat, const bc_weight* w, uint32_t cell, bc_distfn** out);
BC_API void bc_distfn_free(bc_distfn* d);
BC_API bc_status bc_distfn_eval(const bc_distfn* d, double t, double* out);
BC_API bc_status bc_distfn_integral(const bc_distfn* d, double* out);
BC_API bc_status bc_n_psi(const bc_distfn* d, const bc_gauge* g, double* out);
BC_API bc_status bc_u_of_n(const bc_distfn* d, const bc_gauge* g, double* out);

/* ---- bump constants: supremum value and the cell attaining it ---- */

BC_API bc_status bc_bump_constant(const bc_lattice* lat, const bc_weight* v, const bc_weight* w,
                                  const bc_gauge* g1, const bc_gauge* g2, double* value, uint32_t* cell);
BC_API bc_status bc_a2_constant(const bc_lattice* lat, const bc_weight* v, const bc_weight* w, double* value,
                                uint32_t* cell);
BC_API bc_status bc_orlicz_bump_constant(const bc_lattice* lat, const bc_weight* v, const bc_weight* w,
                                         const bc_young* phi1, const bc_young* phi2, double* value, uint32_t* cell);

/* ---- Bellman inequalities ---- */

typedef struct bc_check {
    double slack;
    double lhs;
    double rhs;
} bc_check;

BC_API bc_status bc_check_two_point(double f1, const bc_distfn* n1, double f2, const bc_distfn* n2,
                                    const bc_gauge* g, bc_check* out);
BC_API bc_status bc_check_multi_point(size_t k, const double* alpha, const double* f,
                                      const bc_distfn* const* n, const bc_gauge* g, bc_check* out);
BC_API bc_status bc_check_drop(size_t k, const double* alpha, double a, const double* f,
                               const bc_distfn* const* n, const double* m, const bc_gauge* g, bc_check* out);
BC_API bc_status bc_balanced_signs(size_t k, const double* alpha, const double* x, double* beta);

/* ---- embedding sums ---- */

typedef struct bc_embedding {
    double total;
    double norm_sq;
    double ratio;
    double bound;
    int pass;
} bc_embedding;

BC_API bc_status bc_embed_25(const bc_lattice* lat, const double* f, size_t n, const bc_weight* w,
                             const bc_gauge* g, bc_embedding* out);
/* a: one nonnegative coefficient per cell, Carleson-normalized. */
BC_API bc_status bc_embed_26(const bc_lattice* lat, const double* f, size_t n, const bc_weight* w,
                             const bc_gauge* g, const double* a, size_t num_cells, bc_embedding* out);

/* ---- operators ---- */

BC_API bc_status bc_shift_create_random(const bc_lattice* lat, int complexity, uint64_t seed, bc_shift** out);
BC_API bc_status bc_shift_from_json(const bc_lattice* lat, const char* json, bc_shift** out);
BC_API bc_status bc_shift_to_json(const bc_shift* s, char** out);
BC_API void bc_shift_free(bc_shift* s);
BC_API bc_status bc_shift_apply(const bc_shift* s, const double* in, double* out, size_t n);
BC_API bc_status bc_shift_two_weight_norm(const bc_shift* s, const bc_weight* v, const bc_weight* w, double* out);

BC_API bc_status bc_paraproduct_create_random(const bc_lattice* lat, uint64_t seed, bc_paraproduct** out);
BC_API bc_status bc_paraproduct_from_json(const bc_lattice* lat, const char* json, bc_paraproduct** out);
BC_API bc_status bc_paraproduct_to_json(const bc_paraproduct* p, char** out);
BC_API void bc_paraproduct_free(bc_paraproduct* p);
BC_API bc_status bc_paraproduct_apply(const bc_paraproduct* p, const double* in, double* out, size_t n);
BC_API bc_status bc_paraproduct_two_weight_norm(const bc_paraproduct* p, const bc_weight* v, const bc_weight* w,
                                                double* out);

/* ---- experiment harness ---- */

typedef struct bc_run_options {
    int has_seed;
    uint64_t seed;
    int has_trials;
    int trials;
    int has_trial; /* replay a single trial */
    int64_t trial;
} bc_run_options;

/* Runs a verification suite. Writes reports to out_dir when it is non-null.
   *passed is 1 iff every check passed. summary (optional) receives Markdown. */
BC_API bc_status bc_run_suite(const char* suite, const char* config_json, const char* origin,
                              const bc_run_options* options, const char* out_dir, int* passed, char** summary);
/* Re-reads a report directory. */
BC_API bc_status bc_report(const char* dir, int* passed, char** summary);
BC_API bc_status bc_bump_table(const char* config_json, const char* origin, char** table);
/* Newline-separated suite names. */
BC_API const char* bc_suite_list(void);

#ifdef __cplusplus
}
#endif

#endif
