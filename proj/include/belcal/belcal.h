/* C interface to the belief-projection engine. All handles are opaque; every
 * fallible call returns a belcal_status and, on failure, records a message
 * retrievable with belcal_last_error() on the calling thread. */
#ifndef BELCAL_H
#define BELCAL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(BELCAL_BUILDING)
#define BELCAL_API __declspec(dllexport)
#else
#define BELCAL_API __declspec(dllimport)
#endif
#else
#define BELCAL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum belcal_status {
  BELCAL_OK = 0,
  BELCAL_SYNTAX_ERROR,
  BELCAL_DUPLICATE_NAME,
  BELCAL_UNKNOWN_IDENTIFIER,
  BELCAL_ARITY_MISMATCH,
  BELCAL_DOMAIN_MISMATCH,
  BELCAL_TYPE_ERROR,
  BELCAL_DIVISION_BY_ZERO,
  BELCAL_NON_POSITIVE_VARIANCE,
  BELCAL_UNBOUND_REFERENCE,
  BELCAL_HISTORY_INDEX_OUT_OF_RANGE,
  BELCAL_NON_FINITE_RESULT,
  BELCAL_DOMAIN_VIOLATION,
  BELCAL_NEGATIVE_LIKELIHOOD,
  BELCAL_NEGATIVE_WEIGHT,
  BELCAL_DEGENERATE_BELIEF,
  BELCAL_DIMENSION_LIMIT,
  BELCAL_CONFIG_ERROR,
  BELCAL_UNRECOGNIZED_INIT_FORM,
  BELCAL_UNRECOGNIZED_LIKELIHOOD_FORM,
  BELCAL_UNBOUNDED_SUPPORT,
  BELCAL_ZERO_EVIDENCE,
  BELCAL_INFINITE_DOMAIN,
  BELCAL_FINITE_FLUENT_MARGINAL,
  BELCAL_VALIDATION_FAILED,
  BELCAL_ORACLE_NOT_APPLICABLE,
  BELCAL_IO_ERROR,
  BELCAL_INVALID_ARGUMENT = 100,
  BELCAL_INTERNAL_ERROR = 101
} belcal_status;

typedef enum belcal_backend { BELCAL_BACKEND_QUAD = 0, BELCAL_BACKEND_MC = 1 } belcal_backend;
enum { BELCAL_QUERY_BEL = 0, BELCAL_QUERY_KNOWS = 1, BELCAL_QUERY_MARGINAL = 2 }; /* belcal_query_kind() results */
typedef enum belcal_severity { BELCAL_SEVERITY_ERROR = 0, BELCAL_SEVERITY_WARNING = 1, BELCAL_SEVERITY_NOTE = 2 } belcal_severity;
typedef enum belcal_oracle_method { BELCAL_ORACLE_ENUMERATE = 0, BELCAL_ORACLE_BAYES = 1 } belcal_oracle_method;

typedef struct belcal_theory belcal_theory;
typedef struct belcal_query belcal_query;
typedef struct belcal_histogram belcal_histogram;

typedef struct belcal_config {
  int backend; /* belcal_backend */
  uint64_t mc_samples;
  uint64_t seed;
  uint32_t quad_points_per_dim;
  double gauss_truncation_sigmas;
  uint32_t max_quad_dims;
  double equality_epsilon;
  uint64_t max_quad_nodes;
  double atom_threshold;
  uint32_t threads; /* 0 = all cores, capped by BELCAL_THREADS */
} belcal_config;

/* Bits of belcal_overrides.mask naming the fields that are set. */
enum {
  BELCAL_SET_BACKEND = 1u << 0,
  BELCAL_SET_SAMPLES = 1u << 1,
  BELCAL_SET_SEED = 1u << 2,
  BELCAL_SET_GRID = 1u << 3,
  BELCAL_SET_TRUNC_SIGMAS = 1u << 4,
  BELCAL_SET_MAX_DIMS = 1u << 5,
  BELCAL_SET_EPS = 1u << 6,
  BELCAL_SET_MAX_NODES = 1u << 7,
  BELCAL_SET_ATOM_THRESHOLD = 1u << 8,
  BELCAL_SET_THREADS = 1u << 9
};

typedef struct belcal_overrides {
  uint32_t mask;
  belcal_config values;
} belcal_overrides;

typedef struct belcal_result {
  double value;
  double numerator;
  double gamma;
  double std_error; /* valid when has_std_error */
  int has_std_error;
  double ess; /* valid when has_ess */
  int has_ess;
  int backend; /* backend actually used */
  uint64_t nodes;
  uint32_t dims;          /* quadrature dimensions */
  uint32_t points_per_dim; /* largest per-dimension point count */
} belcal_result;

BELCAL_API const char* belcal_version(void);
BELCAL_API const char* belcal_status_name(belcal_status status);
/* Message of the last failed call on this thread ("" if none). The span is
 * 1-based and 0 when the failure has no source position. */
BELCAL_API const char* belcal_last_error(void);
BELCAL_API void belcal_last_error_span(uint32_t* line, uint32_t* column);

BELCAL_API void belcal_config_default(belcal_config* out);
/* Sets one field from a `key=value` style setting. */
BELCAL_API belcal_status belcal_overrides_set(belcal_overrides* o, const char* key, const char* value);

/* Parse failures return an error and no handle; validation problems are
 * reported as diagnostics on a valid handle. */
BELCAL_API belcal_status belcal_theory_load_file(const char* path, belcal_theory** out);
BELCAL_API belcal_status belcal_theory_parse(const char* text, size_t length, belcal_theory** out);
BELCAL_API void belcal_theory_free(belcal_theory* theory);
BELCAL_API const char* belcal_theory_name(const belcal_theory* theory);
/* Content hash of the theory source (FNV-1a, 64 bit). */
BELCAL_API uint64_t belcal_theory_digest(const belcal_theory* theory);
BELCAL_API size_t belcal_theory_diagnostic_count(const belcal_theory* theory);
BELCAL_API belcal_status belcal_theory_diagnostic(const belcal_theory* theory, size_t index, int* severity,
                                                  belcal_status* code, uint32_t* line, uint32_t* column,
                                                  const char** message);
/* Nonzero when some diagnostic has error severity. */
BELCAL_API int belcal_theory_has_errors(const belcal_theory* theory);
/* Canonical text of the theory; valid until the theory is freed. */
BELCAL_API const char* belcal_theory_print(belcal_theory* theory);

BELCAL_API belcal_status belcal_query_parse(const belcal_theory* theory, const char* text, belcal_query** out);
BELCAL_API void belcal_query_free(belcal_query* query);
BELCAL_API int belcal_query_kind(const belcal_query* query);
BELCAL_API const char* belcal_query_text(const belcal_query* query);

/* base (NULL = defaults) < theory config < query options < flags (may be NULL). */
BELCAL_API belcal_status belcal_effective_config(const belcal_theory* theory, const belcal_query* query,
                                                 const belcal_config* base, const belcal_overrides* flags,
                                                 belcal_config* out);

BELCAL_API belcal_status belcal_bel(const belcal_theory* theory, const belcal_query* query, const belcal_config* cfg,
                                    belcal_result* out);
BELCAL_API belcal_status belcal_knows(const belcal_theory* theory, const belcal_query* query, const belcal_config* cfg,
                                      int* known, uint64_t* nodes);
BELCAL_API belcal_status belcal_marginal(const belcal_theory* theory, const belcal_query* query,
                                         const belcal_config* cfg, belcal_histogram** out);
/* Engine notes of the last bel/knows/marginal call on this thread. */
BELCAL_API size_t belcal_note_count(void);
BELCAL_API const char* belcal_note(size_t index);

BELCAL_API void belcal_histogram_free(belcal_histogram* h);
BELCAL_API size_t belcal_histogram_bin_count(const belcal_histogram* h);
BELCAL_API void belcal_histogram_range(const belcal_histogram* h, double* lo, double* hi);
BELCAL_API belcal_status belcal_histogram_bin(const belcal_histogram* h, size_t index, double* lo, double* hi,
                                              double* mass);
BELCAL_API void belcal_histogram_outside(const belcal_histogram* h, double* below, double* above);
BELCAL_API size_t belcal_histogram_atom_count(const belcal_histogram* h);
BELCAL_API belcal_status belcal_histogram_atom(const belcal_histogram* h, size_t index, double* value, double* mass);
BELCAL_API double belcal_histogram_total(const belcal_histogram* h);
/* CSV: header `bin_lo,bin_hi,mass`, one row per bin, `-inf,lo,m` and
 * `hi,inf,m` rows for mass outside the range, then `atom,value,mass` rows. */
BELCAL_API const char* belcal_histogram_csv(belcal_histogram* h);
BELCAL_API belcal_status belcal_histogram_write_csv(belcal_histogram* h, const char* path);

/* Independent reference value for a bel query. */
BELCAL_API belcal_status belcal_oracle(const belcal_theory* theory, const belcal_query* query,
                                       const belcal_config* cfg, double* value, int* method);

typedef void (*belcal_criterion_fn)(int id, const char* title, int pass, const char* detail, double seconds,
                                    void* user);
/* Runs the acceptance table on the example theories in `dir`. */
BELCAL_API belcal_status belcal_paper_table_run(const char* dir, belcal_criterion_fn on_row, void* user,
                                                int* all_passed);

#ifdef __cplusplus
}
#endif

#endif
