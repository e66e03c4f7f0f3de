#ifndef JFLOQ_JFLOQ_H
#define JFLOQ_JFLOQ_H

#include <stddef.h>

#if defined(_WIN32)
#define JFLOQ_API __declspec(dllexport)
#else
#define JFLOQ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum jfloq_status {
  JFLOQ_OK = 0,
  JFLOQ_ERR_INVALID_ARGUMENT = 1,
  JFLOQ_ERR_INVALID_DIMENSION = 2,
  JFLOQ_ERR_SHAPE = 3,
  JFLOQ_ERR_CONTRACT = 4,
  JFLOQ_ERR_CONFIGURATION = 5,
  JFLOQ_ERR_SINGULAR_FRAME = 6,
  JFLOQ_ERR_UNSTABLE_FRAME = 7,
  JFLOQ_ERR_CONVERGENCE = 8,
  JFLOQ_ERR_INTEGRATION = 9,
  JFLOQ_ERR_NUMERICAL = 10,
  JFLOQ_ERR_NUMERICAL_RANK = 11,
  JFLOQ_ERR_ALIASING = 12,
  JFLOQ_ERR_PRECONDITION = 13,
  JFLOQ_ERR_TIMEOUT = 14,
  JFLOQ_ERR_TRUNCATION = 15,
  JFLOQ_ERR_LADDER = 16,
  JFLOQ_ERR_IO = 17,
  JFLOQ_ERR_INTERNAL = 99
} jfloq_status;

typedef enum jfloq_study {
  JFLOQ_STUDY_SWEEP = 0,
  JFLOQ_STUDY_NG = 1,
  JFLOQ_STUDY_RATIO = 2
} jfloq_study;

/* Opaque handles. */
typedef struct jfloq_config jfloq_config;
typedef struct jfloq_results jfloq_results;

typedef struct jfloq_spectrum {
  double cavity_hz;
  double qubit_hz;
  double anharmonicity_hz;
  double self_kerr_hz;
  double cross_kerr_hz;
  double confined_levels; /* unshunted only, else 0 */
} jfloq_spectrum;

typedef struct jfloq_point {
  double grid_value;
  double nbar_est;
  double A_p_over_2pi_MHz;
  double xi;
  int ok;
  jfloq_status error;
  double impurity;
  double mean_excitation;
  double ground_population;
  double leakage;
  double dominant_hz;
  double dominant_ratio;
  int kerr_ok;
  double kerr_hz;
  int has_averaged;
  double averaged_frequency_hz;
  double averaged_kerr_hz;
  size_t num_lines;
  size_t num_flags;
} jfloq_point;

typedef struct jfloq_validation {
  int passed;
  int within_tolerance;
  int monotone;
  size_t num_kappa;
  double max_trace_distance;
  double min_fidelity;
} jfloq_validation;

JFLOQ_API const char* jfloq_version(void);
JFLOQ_API const char* jfloq_status_name(jfloq_status status);
/* Message of the last failure on the calling thread; empty after success. */
JFLOQ_API const char* jfloq_last_error(void);
/* Frees strings returned through char** out-parameters. */
JFLOQ_API void jfloq_string_free(char* s);

/* model: "unshunted" | "shunted" | "shunted_alt"; scale: "paper" | "ci". */
JFLOQ_API jfloq_status jfloq_config_preset(const char* model, const char* scale, jfloq_config** out);
JFLOQ_API jfloq_status jfloq_config_from_json(const char* text, jfloq_config** out);
JFLOQ_API jfloq_status jfloq_config_load(const char* path, jfloq_config** out);
JFLOQ_API jfloq_status jfloq_config_to_json(const jfloq_config* cfg, char** out);
JFLOQ_API jfloq_status jfloq_config_set_grid(jfloq_config* cfg, const double* values, size_t n);
JFLOQ_API jfloq_status jfloq_config_set_workers(jfloq_config* cfg, int workers);
JFLOQ_API jfloq_status jfloq_config_output_dir(const jfloq_config* cfg, char** out);
JFLOQ_API void jfloq_config_free(jfloq_config* cfg);

/* Static dressed spectrum at A_p = 0 for the configured circuit. */
JFLOQ_API jfloq_status jfloq_spectrum_compute(const jfloq_config* cfg, jfloq_spectrum* out);

/* workers <= 0 uses the configured count. Per-point failures do not fail the call. */
JFLOQ_API jfloq_status jfloq_run(const jfloq_config* cfg, jfloq_study study, int workers, jfloq_results** out);
JFLOQ_API jfloq_status jfloq_results_read(const char* dir, jfloq_results** out);
/* One subdirectory per sweep when the results hold more than one. */
JFLOQ_API jfloq_status jfloq_results_write(const jfloq_results* res, const char* dir);
JFLOQ_API size_t jfloq_results_num_sweeps(const jfloq_results* res);
JFLOQ_API size_t jfloq_results_num_points(const jfloq_results* res, size_t sweep);
JFLOQ_API size_t jfloq_results_num_failures(const jfloq_results* res);
JFLOQ_API jfloq_status jfloq_results_sweep_name(const jfloq_results* res, size_t sweep, char** out);
JFLOQ_API jfloq_status jfloq_results_point(const jfloq_results* res, size_t sweep, size_t index, jfloq_point* out);
/* Populations over the diagnostic eigenbasis; writes min(n, available), reports available in *count. */
JFLOQ_API jfloq_status jfloq_results_populations(const jfloq_results* res, size_t sweep, size_t index, double* values,
                                                 size_t n, size_t* count);
/* Figure data and rendering for figure 1..5; warnings are joined by newlines into *warnings (may be NULL). */
JFLOQ_API jfloq_status jfloq_results_emit(const jfloq_results* res, int figure, const char* dir, char** warnings);
JFLOQ_API void jfloq_results_free(jfloq_results* res);

/* Direct master-equation comparison on the configured small instance. *json may be NULL. */
JFLOQ_API jfloq_status jfloq_validate(const jfloq_config* cfg, jfloq_validation* out, char** json);

#ifdef __cplusplus
}
#endif

#endif
