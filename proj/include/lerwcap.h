/* lerwcap - C API for the loop-erased random walk capacity laboratory.
 *
 * All functions return lerw_status; results travel through out-parameters.
 * Objects are opaque handles freed by their *_destroy function. Strings
 * returned through char** are heap-allocated and must be released with
 * lerw_string_free. On failure, lerw_last_error() describes the problem for
 * the calling thread.
 */
#ifndef LERWCAP_H
#define LERWCAP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lerw_status {
  LERW_OK = 0,
  LERW_ERR_INVALID_ARGUMENT = 1,
  LERW_ERR_RUNTIME = 2,
  LERW_ERR_IO = 3
} lerw_status;

const char* lerw_version(void);
const char* lerw_last_error(void);
void lerw_string_free(char* s);
void lerw_buffer_free(int64_t* buf);

/* ---- counter-based rng streams ---- */

typedef struct lerw_rng lerw_rng;

lerw_status lerw_rng_create(uint64_t master_seed, uint64_t stream_id,
                            lerw_rng** out);
void lerw_rng_destroy(lerw_rng* rng);
lerw_status lerw_rng_next_u64(lerw_rng* rng, uint64_t* out);

/* ---- lattice paths ---- */

typedef struct lerw_path lerw_path;

/* coords: n_points * dim integers, point-major. */
lerw_status lerw_path_create(int dim, const int64_t* coords, size_t n_points,
                             lerw_path** out);
void lerw_path_destroy(lerw_path* p);
int lerw_path_dim(const lerw_path* p);
size_t lerw_path_points(const lerw_path* p);
/* buf must hold n_points * dim integers. */
lerw_status lerw_path_coords(const lerw_path* p, int64_t* buf, size_t buf_points);
/* One comma-separated point per line. */
lerw_status lerw_path_save(const lerw_path* p, const char* file);
lerw_status lerw_path_load(const char* file, int dim, lerw_path** out);
lerw_status lerw_path_to_text(const lerw_path* p, char** out);

lerw_status lerw_srw_sample(int dim, int64_t n_steps, lerw_rng* rng,
                            lerw_path** out);
lerw_status lerw_path_shift(const lerw_path* p, int64_t k, lerw_path** out);
/* All indices n with p[0..n] disjoint from p[n+1..]; caller frees with
 * lerw_buffer_free. */
lerw_status lerw_path_cut_times(const lerw_path* p, int64_t** out, size_t* n_out);

/* ---- loop erasure ---- */

typedef struct lerw_lep lerw_lep;

lerw_status lerw_loop_erase(const lerw_path* omega, lerw_lep** out);
/* Samples the first target_len steps of the loop erasure of an unbounded
 * walk; safety_factor controls how far the generator runs past the target
 * before the prefix is frozen (<= 0 selects the default, 3). */
lerw_status lerw_lerw_sample(int dim, int64_t target_len, double safety_factor,
                             lerw_rng* rng, lerw_lep** out);
void lerw_lep_destroy(lerw_lep* lep);
lerw_status lerw_lep_path(const lerw_lep* lep, lerw_path** out);
size_t lerw_lep_points(const lerw_lep* lep);
int64_t lerw_lep_source_length(const lerw_lep* lep);
/* buf must hold lerw_lep_points entries. */
lerw_status lerw_lep_erasure_times(const lerw_lep* lep, int64_t* buf,
                                   size_t buf_len);
lerw_status lerw_lep_retained_count(const lerw_lep* lep, int64_t j, int64_t* out);

/* ---- capacity estimators ---- */

typedef struct lerw_estimate {
  double value;
  double stderr_value;
  int64_t trials;
  char method[32];
} lerw_estimate;

/* The path's points are treated as the target set (order matters only for
 * the decomposition estimator). json_out (optional, may be NULL) receives the
 * full provenance record. threads <= 0 selects the default. */
lerw_status lerw_capacity_escape_sum(const lerw_path* points, double R,
                                     int64_t trials_per_point, lerw_rng* rng,
                                     int threads, lerw_estimate* out,
                                     char** json_out);
lerw_status lerw_capacity_decomposition(const lerw_path* ordered, double R,
                                        int64_t trials_per_point, lerw_rng* rng,
                                        int threads, lerw_estimate* out,
                                        char** json_out);
lerw_status lerw_capacity_hitting(const lerw_path* points, double y_radius,
                                  double kill_factor, int64_t trials,
                                  lerw_rng* rng, int threads,
                                  lerw_estimate* out, char** json_out);
lerw_status lerw_sausage_capacity(const lerw_path* anchor_path, double eps,
                                  double y_radius, double kill_factor,
                                  int64_t trials, lerw_rng* rng, int threads,
                                  lerw_estimate* out, char** json_out);
/* from must lie in the set. Returns the truncation bracket. */
lerw_status lerw_escape_probability(const lerw_path* points,
                                    const int64_t* from, double R,
                                    int64_t trials, lerw_rng* rng,
                                    double* lower, double* upper);
/* method: "monte_carlo" or "asymptotic" (trials ignored for the latter). */
lerw_status lerw_green_estimate(int dim, const int64_t* y, const char* method,
                                int64_t trials, lerw_rng* rng, double* value,
                                double* stderr_out);

/* ---- exact chain oracle ---- */

typedef struct lerw_chain lerw_chain;

lerw_status lerw_chain_load(const char* file, lerw_chain** out);
lerw_status lerw_chain_boxed_walk(int dim, int radius, lerw_chain** out,
                                  int* origin_state);
void lerw_chain_destroy(lerw_chain* chain);
lerw_status lerw_chain_escape(const lerw_chain* chain, const int32_t* states,
                              size_t n, int32_t x, double* out);
lerw_status lerw_chain_capacity(const lerw_chain* chain, const int32_t* states,
                                size_t n, double* out);
lerw_status lerw_chain_decomposition(const lerw_chain* chain,
                                     const int32_t* ordered, size_t n,
                                     double* out);
/* Random-chain identity suite; reports the largest observed
 * |capacity - decomposition|. */
lerw_status lerw_oracle_suite(uint64_t seed, int n_chains, int max_states,
                              int max_subset, int orderings,
                              double* max_deviation);

/* ---- two-sided sampling and diagnostics ---- */

lerw_status lerw_two_sided_sample(int dim, int64_t side_len, int64_t horizon,
                                  lerw_rng* rng, lerw_path** forward,
                                  lerw_path** backward, int64_t* attempts,
                                  int64_t* accepted, int64_t* late_violations);
/* variant: 0 = n-step walk against the whole sampled path, 1 = kill-radius
 * walk against the n-point prefix. */
lerw_status lerw_scaled_escape(const lerw_lep* eta, int64_t n,
                               int64_t w_trials, int variant, lerw_rng* rng,
                               int threads, double* value, double* lower,
                               double* upper);
lerw_status lerw_stationarity_diagnostic(int dim, int64_t n_samples,
                                         const int64_t* k_shifts,
                                         size_t n_shifts, int64_t horizon,
                                         lerw_rng* rng, char** json_out);

/* ---- experiments ---- */

/* Runs the experiment described by the flat key-value config file; out_dir
 * and seed overrides are optional (NULL / has_seed_override = 0). Returns the
 * summary as JSON. */
lerw_status lerw_experiment_run(const char* config_file, const char* out_dir,
                                int threads, uint64_t seed_override,
                                int has_seed_override, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* LERWCAP_H */
