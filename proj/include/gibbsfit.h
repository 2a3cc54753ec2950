/* gibbsfit - fitting, covariance estimation and simulation for
 * exponential-family marked Gibbs point process models.
 *
 * C interface of the shared library. Handles are opaque; every function
 * that can fail returns NULL (pointer results) or a nonzero status code,
 * and gf_last_error() describes the most recent failure on the calling
 * thread. Strings returned as char* are heap-allocated; release them with
 * gf_string_free().
 */
#ifndef GIBBSFIT_H
#define GIBBSFIT_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define GF_OK 0
#define GF_ERR_INVALID 1        /* invalid input or parameters */
#define GF_ERR_PARSE 2          /* malformed file or config */
#define GF_ERR_INFEASIBLE 3     /* data violates a hard core */
#define GF_ERR_ILL_CONDITIONED 4
#define GF_ERR_NUMERIC 5
#define GF_ERR_IO 6

typedef struct gf_config gf_config;    /* parsed model + run settings */
typedef struct gf_pattern gf_pattern;  /* marked point pattern */
typedef struct gf_fit gf_fit;          /* fit / covariance result */

const char* gf_last_error(void);

/* --- configuration ----------------------------------------------------- */

/* Loads a TOML model/run config; a ".json" extension selects JSON. */
gf_config* gf_config_load(const char* path);
gf_config* gf_config_parse(const char* text, int is_json);
void gf_config_free(gf_config* config);

int gf_config_dimension(const gf_config* config);
double gf_config_range(const gf_config* config);
/* Copies the configured theta into out (capacity cap); returns the number
 * of components, or 0 when the config carries no theta. */
int gf_config_theta(const gf_config* config, double* out, int cap);
/* Fills out[4] = {xmin, xmax, ymin, ymax} from [data]; returns 1 if set. */
int gf_config_data_window(const gf_config* config, double out[4]);

/* --- patterns ----------------------------------------------------------- */

/* Reads a pattern CSV against the config's mark space. window may be NULL
 * to use the [data] window from the config. */
gf_pattern* gf_pattern_read(const gf_config* config, const char* csv_path,
                            const double window[4]);
void gf_pattern_free(gf_pattern* pattern);
long gf_pattern_size(const gf_pattern* pattern);
int gf_pattern_write(const gf_pattern* pattern, const char* csv_path);
char* gf_pattern_svg_string(const gf_pattern* pattern);

/* --- fitting and covariances ------------------------------------------- */

typedef struct gf_run_options {
  double dvee;      /* erosion distance D-vee; <= 0: config, else model D */
  double cell;      /* covariance cell size;  <= 0: config, else model D */
  int grid_nx;      /* quadrature grid;       <= 0: config, else 256 */
  int grid_ny;
  int mark_nodes;   /* continuous-mark nodes; <= 0: config, else 16 */
  double level;     /* confidence level;      <= 0: config, else 0.95 */
  int threads;      /* <= 0: all cores */
} gf_run_options;

void gf_run_options_init(gf_run_options* options);

/* Maximum pseudolikelihood fit. Non-convergence is not an error: the
 * result is still produced and gf_fit_converged reports 0. */
gf_fit* gf_fit_run(const gf_config* config, const gf_pattern* pattern,
                   const gf_run_options* options);
/* Covariances, intervals and diagnostics at a fixed theta (no solve). */
gf_fit* gf_vcov_run(const gf_config* config, const gf_pattern* pattern,
                    const double* theta, int theta_len,
                    const gf_run_options* options);
void gf_fit_free(gf_fit* fit);

int gf_fit_converged(const gf_fit* fit);
int gf_fit_dimension(const gf_fit* fit);
double gf_fit_theta_at(const gf_fit* fit, int j);
double gf_fit_vcov_at(const gf_fit* fit, int j, int k);
char* gf_fit_json_string(const gf_fit* fit);

/* --- simulation ---------------------------------------------------------- */

typedef struct gf_sim_options {
  double window[4];   /* all-zero: use the config's [simulate] window */
  long long steps;    /* < 0: config, else 200000 */
  long long burn_in;  /* < 0: config, else 100000 */
  uint64_t seed;
  int seed_set;       /* 0: take the seed from the config (default 0) */
  double p_birth, p_death, p_move;  /* all-zero: config, else .45/.45/.10 */
  const double* theta;              /* NULL: config theta */
  int theta_len;
} gf_sim_options;

void gf_sim_options_init(gf_sim_options* options);

gf_pattern* gf_simulate(const gf_config* config,
                        const gf_sim_options* options,
                        char** manifest_json);

/* --- statistics and residuals ------------------------------------------- */

char* gf_stats_json_string(const gf_config* config, const gf_pattern* pattern,
                           int per_point);
char* gf_gnz_json_string(const gf_config* config, const gf_pattern* pattern,
                         const double* theta, int theta_len,
                         const gf_run_options* options);

void gf_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* GIBBSFIT_H */
