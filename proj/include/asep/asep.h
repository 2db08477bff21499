/* C interface to the ASEP toolkit. Objects are opaque handles created and destroyed
 * through this API; every fallible call returns an asep_status and leaves a message
 * for asep_last_error() on failure. No C++ exception crosses this boundary. */
#ifndef ASEP_H
#define ASEP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(ASEP_BUILDING_LIBRARY)
#define ASEP_API __attribute__((visibility("default")))
#else
#define ASEP_API
#endif

typedef enum asep_status {
  ASEP_OK = 0,
  ASEP_ERR_INVALID_ARGUMENT = 1,
  ASEP_ERR_COMPUTE = 2,
  ASEP_ERR_CONFIG = 3,
  ASEP_ERR_IO = 4,
  ASEP_ERR_INTERNAL = 5
} asep_status;

typedef struct asep_law asep_law;
typedef struct asep_config asep_config;
typedef struct asep_run asep_run;
typedef struct asep_stats asep_stats;
typedef struct asep_oracle asep_oracle;

ASEP_API const char* asep_version(void);
/* Message of the most recent failing call on the calling thread; "" if none. */
ASEP_API const char* asep_last_error(void);
ASEP_API const char* asep_status_name(asep_status status);

/* ---- jump laws ---- */

/* dimension 1: p(+1) = 1; dimension 2: p(e1) = 1, p(+-e2) = 1/2. */
ASEP_API asep_status asep_law_tasep(int dimension, asep_law** out);
/* n entries p(dx[k], dy[k]) = rate[k]; dy may be NULL when dimension is 1. */
ASEP_API asep_status asep_law_create(int dimension, const int* dx, const int* dy, const double* rate, size_t n,
                                     asep_law** out);
ASEP_API asep_status asep_law_mean(const asep_law* law, double mean[2]);
ASEP_API void asep_law_destroy(asep_law* law);

/* ---- configuration files and runs ---- */

ASEP_API asep_status asep_config_load(const char* path, asep_config** out);
/* Effective configuration, one "key = value" per line; owned by the handle. */
ASEP_API const char* asep_config_text(const asep_config* config);
ASEP_API void asep_config_destroy(asep_config* config);

/* Loads, validates and runs a config file. subcommand may be NULL, in which case the file's
 * run.subcommand is used. Progress goes to stderr when verbose is nonzero. Returns ASEP_OK
 * whenever a run handle was produced, including failed runs: inspect asep_run_exit_code. */
ASEP_API asep_status asep_run_config(const char* path, const char* subcommand, int verbose, asep_run** out);
/* 0 ok, 1 compute failure or invariant violation, 2 config failure. */
ASEP_API int asep_run_exit_code(const asep_run* run);
ASEP_API const char* asep_run_message(const asep_run* run);
ASEP_API const char* asep_run_output_dir(const asep_run* run);
ASEP_API void asep_run_destroy(asep_run* run);

/* ---- simulation ---- */

typedef struct asep_sim_params {
  int side1;
  int side2;            /* ignored in dimension 1 */
  double density;
  const double* times;  /* strictly increasing observation times */
  size_t n_times;
  int canonical;        /* nonzero: fixed particle number round(density * sites) */
  int replicas;
  uint64_t seed;
  int threads;          /* 0: all cores; results do not depend on it */
} asep_sim_params;

ASEP_API asep_status asep_simulate(const asep_law* law, const asep_sim_params* params, asep_stats** out);
ASEP_API int asep_stats_replicas(const asep_stats* stats);
/* from_current = 0: first moment of the structure function; 1: regression on the particle number. */
ASEP_API asep_status asep_stats_velocity(const asep_stats* stats, int from_current, double value[2], double stderr_out[2]);
/* D_11 at the accepted observation times. Fills at most `capacity` entries; *count gets the total. */
ASEP_API asep_status asep_stats_diffusivity(const asep_stats* stats, int from_current, double* t, double* d11,
                                            double* stderr_out, size_t capacity, size_t* count);
/* d = 1 only: translation-averaged variance of the integrated bond current at every observation time. */
ASEP_API asep_status asep_stats_bond_variance(const asep_stats* stats, double* value, double* stderr_out, size_t capacity,
                                              size_t* count);
ASEP_API void asep_stats_destroy(asep_stats* stats);

/* ---- resolvent, Fourier bounds, variational bound ---- */

typedef struct asep_resolvent_params {
  double lambda;
  int degree;         /* truncation level n >= 2 */
  int window;         /* extent cap M */
  int free_dynamics;  /* nonzero: free Laplacian and free A+ */
  double tolerance;
  int check_window;   /* nonzero: also solve at 2M */
} asep_resolvent_params;

/* doubled_window_value may be NULL; it is NaN when check_window is zero. */
ASEP_API asep_status asep_resolvent_solve(const asep_law* law, const asep_resolvent_params* params, double* value,
                                          double* doubled_window_value);
ASEP_API asep_status asep_fourier_lower_integral(double lambda, int dimension, double tolerance, double* value);
/* Least-squares exponent of value against lambda (log_model = 0) or |log lambda| (log_model = 1). */
ASEP_API asep_status asep_fit_exponent(const double* lambda, const double* value, size_t n, int log_model, double* exponent,
                                       double* stderr_out);
ASEP_API asep_status asep_variational_bound(double lambda, double* bound, double* alpha);

/* ---- exact small-torus oracle (at most 16 sites) ---- */

ASEP_API asep_status asep_oracle_create(const asep_law* law, int side1, int side2, asep_oracle** out);
ASEP_API asep_status asep_oracle_stationarity(const asep_oracle* oracle, double density, double* residual);
/* Both sides of the Laplace-transform identity at density 1/2. */
ASEP_API asep_status asep_oracle_laplace(const asep_oracle* oracle, double lambda, double* lhs, double* rhs,
                                         double* relative_gap);
/* <<w, (lambda - L)^-1 w>> on the torus; degree 0 means no truncation. */
ASEP_API asep_status asep_oracle_pairing(const asep_oracle* oracle, double lambda, int degree, double* value);
ASEP_API void asep_oracle_destroy(asep_oracle* oracle);

#ifdef __cplusplus
}
#endif

#endif
