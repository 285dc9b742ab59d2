/* C interface of the microlam library. All strings returned through char** are owned by the
 * caller and released with ml_string_free. Failing calls return a nonzero ml_status and leave
 * a message retrievable with ml_last_error (thread-local, valid until the next call). */
#ifndef MICROLAM_H
#define MICROLAM_H

#include <stddef.h>

#if defined(MICROLAM_BUILDING)
#define ML_API __attribute__((visibility("default")))
#else
#define ML_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ml_status {
  ML_OK = 0,
  ML_ERR_INVALID_INPUT = 1,
  ML_ERR_DIMENSION_MISMATCH = 2,
  ML_ERR_UNSUPPORTED_ORDER = 3,
  ML_ERR_COMPATIBILITY = 4,
  ML_ERR_DEGENERATE_PARAMETERS = 5,
  ML_ERR_TILING = 6,
  ML_ERR_ENUMERATION_GUARD = 7,
  ML_ERR_SEQUENCING = 8,
  ML_ERR_FIT = 9,
  ML_ERR_MUST_CALIBRATE = 10,
  ML_ERR_IO = 11,
  ML_ERR_TRIVIAL_INPUT = 12,
  ML_ERR_MEMBERSHIP = 13,
  ML_ERR_INTERNAL = 99
} ml_status;

typedef struct ml_operator ml_operator;
typedef struct ml_construction ml_construction;
typedef struct ml_field ml_field;

ML_API const char* ml_version(void);
ML_API const char* ml_last_error(void);
ML_API const char* ml_status_name(ml_status s);
ML_API void ml_string_free(char* s);

/* Operators: builtin names "div", "curl3", "curlcurl2"; JSON form as documented in the README. */
ML_API ml_status ml_operator_builtin(const char* name, int rows, int d, ml_operator** out);
ML_API ml_status ml_operator_from_json(const char* json, ml_operator** out);
ML_API ml_status ml_operator_to_json(const ml_operator* op, char** json);
ML_API void ml_operator_free(ml_operator* op);
/* Writes the m x n symbol at xi (length d) row-major into out (capacity out_len). */
ML_API ml_status ml_symbol_eval(const ml_operator* op, const double* xi, int d, double* out, size_t out_len);
/* mu given as a matrix literal; result JSON {member, direction, residual, sigma_ref, lamination_space}. */
ML_API ml_status ml_wave_cone(const ml_operator* op, const char* mu_literal, double tol, char** json);
ML_API ml_status ml_constant_rank(const ml_operator* op, int samples, char** json);
ML_API ml_status ml_omega(const ml_operator* op, unsigned long long seed, char** json);

/* Matrix literals (grammar in the README); rows/cols/values as JSON. */
ML_API ml_status ml_parse_matrix(const char* literal, char** json);

/* Constructions. kind: "branching", "t3", "laminate"; params as JSON. */
ML_API ml_status ml_build(const char* kind, const char* params_json, ml_construction** out);
ML_API void ml_construction_free(ml_construction* c);
ML_API ml_status ml_construction_report(const ml_construction* c, char** json);
/* Fails with ML_ERR_INVALID_INPUT when no explicit complex was built. */
ML_API ml_status ml_construction_regions(const ml_construction* c, char** json);
/* op may be NULL for the construction's own operator; tol <= 0 selects the default 1e-12. */
ML_API ml_status ml_construction_interface_check(const ml_construction* c, const ml_operator* op, double tol, char** json);
ML_API ml_status ml_construction_rasterize(const ml_construction* c, int n, ml_field** out);

/* Fields. */
ML_API ml_status ml_field_read(const char* path, ml_field** out);
ML_API ml_status ml_field_write(const ml_field* f, const char* path, const char* meta_json);
ML_API ml_status ml_field_info(const ml_field* f, char** json);
ML_API void ml_field_free(ml_field* f);
/* EnergyReport JSON; op NULL selects the divergence operator of the field shape; F_literal NULL uses the field mean. */
ML_API ml_status ml_field_energy(const ml_field* f, const ml_operator* op, double eps, const char* F_literal, char** json);

/* Hulls and rigidity. */
ML_API ml_status ml_hull_check(const char* F_literal, char** json);
ML_API ml_status ml_hull_decompose(const char* F_literal, int tree_depth, char** json);
ML_API ml_status ml_verify_t3_identities(char** json);
/* wells: "t3" or a JSON array of matrix literals; mode: "auto", "enumerate", "search". */
ML_API ml_status ml_rigidity_search(int grid, const char* wells, const char* mode, char** json);

/* Scaling lab. */
ML_API ml_status ml_sweep(const char* config_json, char** csv, char** json);
ML_API ml_status ml_fit(const char* csv_text, const char* model, char** json);
ML_API ml_status ml_exponent_balance(int p, long long* num, long long* den);

/* Diagnostics on field files carrying phase labels. */
ML_API ml_status ml_calibrate_controls(const ml_field* f, int a, int b, const double* mus, size_t n_mus, double safety, char** json);
ML_API ml_status ml_lower_bound(const ml_field* f, int a, int b, const char* F_literal, double eps, const char* constants_json,
                                char** json);
ML_API ml_status ml_rigidity_estimate(const ml_field* f, const char* F_literal, double eps, double c_nu, double nu, char** json);
ML_API ml_status ml_cone_profile(const ml_field* f, const char* F_literal, double eps, double nu, int kmax, double growth, int smooth,
                                 char** json);

#ifdef __cplusplus
}
#endif

#endif
