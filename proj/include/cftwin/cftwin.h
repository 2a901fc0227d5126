#ifndef CFTWIN_CFTWIN_H
#define CFTWIN_CFTWIN_H

/* C interface to the cftwin library.
 *
 * All functions return a cft_status. On failure the message is available
 * from cft_last_error() on the same thread until the next call. Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with cft_string_free. Reports are JSON documents. */

#include <stdint.h>

#if defined(_WIN32)
#  if defined(CFTWIN_BUILDING_LIBRARY)
#    define CFT_API __declspec(dllexport)
#  else
#    define CFT_API __declspec(dllimport)
#  endif
#else
#  define CFT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cft_status {
  CFT_OK = 0,
  CFT_ERR_VALIDATION = 1, /* invalid model, policy or failed check */
  CFT_ERR_BUDGET = 2,     /* enumeration or search budget exceeded */
  CFT_ERR_ARGUMENT = 3,   /* bad arguments */
  CFT_ERR_IO = 4,
  CFT_ERR_LOOKUP = 5,     /* unknown variable or fixture */
  CFT_ERR_CONFIG = 6,     /* incompatible agent / environment */
  CFT_ERR_INTERNAL = 7
} cft_status;

typedef struct cft_model cft_model;
typedef struct cft_twin cft_twin;

CFT_API const char* cft_version(void);
CFT_API const char* cft_last_error(void);
CFT_API const char* cft_status_name(cft_status status);
CFT_API void cft_string_free(char* s);

/* Models */
CFT_API cft_status cft_model_load_file(const char* path, cft_model** out);
CFT_API cft_status cft_model_load_json(const char* text, cft_model** out);
CFT_API cft_status cft_model_load_fixture(const char* name, cft_model** out);
CFT_API void cft_model_free(cft_model* model);
/* Canonical model JSON (metadata included). */
CFT_API cft_status cft_model_to_json(const cft_model* model, char** out);
/* Variables, edges, topological order and the reward variable as JSON. */
CFT_API cft_status cft_model_summary(const cft_model* model, char** out);
/* The "metadata" object of the model file ("null" when absent). */
CFT_API cft_status cft_model_metadata(const cft_model* model, char** out);
CFT_API cft_status cft_model_expected_reward(const cft_model* model, double* out);

/* Comma-separated list of bundled fixture names. */
CFT_API cft_status cft_fixture_names(char** out);
CFT_API cft_status cft_fixture_json(const char* name, char** out);

/* Conditional twin over comma-separated targets ("" for none). */
CFT_API cft_status cft_twin_build(const cft_model* model, const char* targets, cft_twin** out);
/* New model handle holding the twin; free with cft_model_free. */
CFT_API cft_status cft_twin_model(const cft_twin* twin, cft_model** out);
/* JSON array of [target, copy] pairs. */
CFT_API cft_status cft_twin_copy_map(const cft_twin* twin, char** out);
CFT_API void cft_twin_free(cft_twin* twin);

typedef struct cft_verify_options {
  const char* targets;      /* comma-separated; NULL means the model's default targets */
  const char* policies;     /* flip | identity | const:<v> | A=..,B=.. | file.json | random:N */
  int exact;                /* nonzero: exact rational arithmetic */
  uint64_t seed;            /* for random:N */
  const cft_model* twin;    /* optional twin to verify against */
} cft_verify_options;

/* Writes the report and sets *all_passed. Failed checks are not an error. */
CFT_API cft_status cft_verify(const cft_model* model, const cft_verify_options* options, char** report,
                              int* all_passed);

typedef struct cft_estimate_options {
  const char* targets;   /* NULL: model default */
  const char* rho;       /* policy spec, default "flip" */
  const char* estimator; /* eq1 | naive | three-factor */
  uint64_t n;
  uint64_t seed;
  int y;
  double smoothing;
} cft_estimate_options;

/* Report JSON and the simulated trials as CSV (either out may be NULL). */
CFT_API cft_status cft_estimate(const cft_model* model, const cft_estimate_options* options, char** report,
                                char** trials_csv);

/* Policy report JSON; budget 0 means the default. */
CFT_API cft_status cft_optimize(const cft_model* model, const char* targets, uint64_t budget, char** report);

typedef struct cft_bandit_options {
  const char* agent;     /* do-ucb | do-ts | cf-ts | uniform */
  const char* action;    /* NULL: model default */
  uint64_t horizon;
  uint64_t seeds;
  uint64_t seed;
  int exposes_intuition;
} cft_bandit_options;

typedef struct cft_bandit_result cft_bandit_result;

CFT_API cft_status cft_bandit(const cft_model* model, const cft_bandit_options* options,
                              cft_bandit_result** out);
CFT_API cft_status cft_bandit_curve_csv(const cft_bandit_result* result, char** out);
CFT_API cft_status cft_bandit_summary(const cft_bandit_result* result, char** out);
CFT_API uint64_t cft_bandit_run_count(const cft_bandit_result* result);
/* Per-round CSV of run `index`. */
CFT_API cft_status cft_bandit_run_csv(const cft_bandit_result* result, uint64_t index, char** out);
CFT_API void cft_bandit_free(cft_bandit_result* result);

#ifdef __cplusplus
}
#endif

#endif /* CFTWIN_CFTWIN_H */
