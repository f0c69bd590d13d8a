/* scalent C API: opaque handles, integer error codes, string results.
 *
 * Error codes: 0 ok, 1 validation error, 2 cap/budget error, 64 usage error.
 * On any nonzero return, slt_last_error() describes the failure (thread-local).
 * All returned strings are malloc'd; free them with slt_string_free().
 */
#ifndef SCALENT_H
#define SCALENT_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct slt_triple slt_triple;

const char* slt_version(void);
const char* slt_last_error(void);
void slt_string_free(char* s);
void slt_triple_free(slt_triple* t);

/* ---- triples ---- */
int slt_triple_parse(const char* text, slt_triple** out);
int slt_triple_load(const char* path, slt_triple** out);
int slt_triple_format(const slt_triple* t, char** out_text);
/* "scalent-report-v1" JSON validation report; *valid set to 0/1 */
int slt_triple_validate(const slt_triple* t, int strict, int* valid, char** report_json);
/* realize a system descriptor as a finite triple: exact windows when the
 * count fits cap, otherwise mc_samples Monte-Carlo windows (mc_samples > 0) */
int slt_triple_from_system(const char* descriptor, int n, long long cap, int mc_samples,
                           uint64_t seed, slt_triple** out);
int slt_triple_subsample(const slt_triple* t, int n, uint64_t seed, slt_triple** out);

/* ---- entropy ---- */
/* method: "exact" | "greedy" | "pack_lb"; bits: 0 nats, 1 bits */
int slt_entropy_eps(const slt_triple* t, double eps, const char* method, int bits,
                    char** report_json);
/* mode: "exact" | "greedy" */
int slt_entropy_kantorovich(const slt_triple* t, double eps, const char* mode, int bits,
                            char** report_json);

/* ---- omega realization ---- */
int slt_omega(const char* descriptor, double z, double tolerance, long long cap,
              int mc_samples, uint64_t seed, char** report_json, slt_triple** out_triple);

/* ---- distances between triples ---- */
/* metric: "distm" | "distk"; mode: "exact" | "heur" */
int slt_dist(const slt_triple* a, const slt_triple* b, const char* metric, const char* mode,
             long long budget, uint64_t seed, char** report_json);

/* ---- scaling grids ---- */
int slt_phi_grid(const char* descriptor, const char* eps_csv, const char* n_csv,
                 const char* method, uint64_t seed, int threads, char** profile_csv);
/* sigma_csv may be NULL; profile is the CSV produced by slt_phi_grid */
int slt_fit_class(const char* profile_csv, int n_min, const char* sigma_csv,
                  char** report_json);

/* ---- matrix distributions ---- */
int slt_matrix_sample(const char* descriptor, int realize_n, int n, int replicas,
                      uint64_t seed, char** matrices_text);
int slt_matrix_spectra(const char* descriptor, int realize_n, int n, int replicas,
                       uint64_t seed, const char* sizes_csv, char** spectra_csv);
int slt_matrix_invariance(const char* descriptor, int realize_n, int n, int replicas,
                          uint64_t seed, const char* statistic, char** report_json);
int slt_projectivity(const char* descriptor, int realize_n, int n, uint64_t seed,
                     char** report_json);

/* ---- system invariants ---- */
int slt_system_invariants(const char* descriptor, char** report_json);

#ifdef __cplusplus
}
#endif
#endif /* SCALENT_H */
