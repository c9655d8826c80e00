/*
 * epdyn C API.
 *
 * All objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every call returns an epdyn_status; on failure the
 * message is available from epdyn_last_error() until the next call on the
 * same thread.
 */
#ifndef EPDYN_H
#define EPDYN_H

#include <stddef.h>
#include <stdint.h>

#if defined(EPDYN_BUILDING_LIBRARY)
#define EPDYN_API __attribute__((visibility("default")))
#else
#define EPDYN_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as CLI exit codes where one applies. */
typedef enum epdyn_status
{
	EPDYN_OK = 0,
	EPDYN_ERR_INVALID_ARGUMENT = 1,
	EPDYN_ERR_CONFIG = 2,
	EPDYN_WARN_INCOMPLETE = 3, /* result is still produced */
	EPDYN_ERR_CHECK_FAILED = 4,
	EPDYN_ERR_BLOWUP = 5,
	EPDYN_ERR_IO = 6,
	EPDYN_ERR_NUMERIC = 7,
	EPDYN_ERR_INTERNAL = 8
} epdyn_status;

typedef struct epdyn_config epdyn_config;
typedef struct epdyn_result epdyn_result;

typedef enum epdyn_result_kind
{
	EPDYN_RESULT_SPECTRUM = 0,
	EPDYN_RESULT_EP_ROOTS = 1,
	EPDYN_RESULT_HOP = 2,
	EPDYN_RESULT_EVOLVE = 3,
	EPDYN_RESULT_VERIFY = 4
} epdyn_result_kind;

EPDYN_API const char* epdyn_version(void);
EPDYN_API const char* epdyn_last_error(void);
EPDYN_API const char* epdyn_status_name(epdyn_status status);

/* Configuration ---------------------------------------------------------- */

EPDYN_API epdyn_status epdyn_config_load(const char* path, epdyn_config** out);
/* origin names the text in error messages (may be NULL). */
EPDYN_API epdyn_status epdyn_config_parse(const char* json_text, const char* origin, epdyn_config** out);
EPDYN_API void epdyn_config_free(epdyn_config* config);

/* Overrides the hop seed. */
EPDYN_API epdyn_status epdyn_config_set_seed(epdyn_config* config, uint64_t seed);
EPDYN_API epdyn_status epdyn_config_set_oracle_cap(epdyn_config* config, size_t cap);
EPDYN_API epdyn_status epdyn_config_set_threads(epdyn_config* config, unsigned threads);
/* Applies EPDYN_ORACLE_CAP if set. */
EPDYN_API epdyn_status epdyn_config_apply_env(epdyn_config* config);

/* Commands --------------------------------------------------------------- */

EPDYN_API epdyn_status epdyn_run_spectrum(const epdyn_config* config, epdyn_result** out);
/* Returns EPDYN_WARN_INCOMPLETE (with *out set) when roots + decoupled poles
 * fall short of the dimension. */
EPDYN_API epdyn_status epdyn_run_ep_roots(const epdyn_config* config, epdyn_result** out);
EPDYN_API epdyn_status epdyn_run_hop(const epdyn_config* config, epdyn_result** out);
EPDYN_API epdyn_status epdyn_run_evolve(const epdyn_config* config, epdyn_result** out);

/* suite: "all", "ep", "hop", "action", "universal" or "determinism".
 * tolerance_overrides: JSON object of check name -> tolerance, or NULL.
 * Returns EPDYN_ERR_CHECK_FAILED (with *out set) if any check fails. */
EPDYN_API epdyn_status epdyn_verify(const char* suite, const char* tolerance_overrides, unsigned threads,
                                    epdyn_result** out);

/* Results ---------------------------------------------------------------- */

EPDYN_API epdyn_result_kind epdyn_result_get_kind(const epdyn_result* result);
/* Human-readable summary; owned by the result. */
EPDYN_API const char* epdyn_result_summary(const epdyn_result* result);
/* Writes the command's files into out_dir (created if missing). */
EPDYN_API epdyn_status epdyn_result_write(const epdyn_result* result, const char* out_dir);

/* Primary numeric series: eigenvalues, root energies, per-realisation
 * frequencies, final |psi|^2, or per-check measured values. */
EPDYN_API size_t epdyn_result_count(const epdyn_result* result);
/* Copies min(count, capacity) values; *written receives the number copied. */
EPDYN_API epdyn_status epdyn_result_values(const epdyn_result* result, double* out, size_t capacity,
                                           size_t* written);

/* ep-roots only: decoupled-pole count and completeness flag. */
EPDYN_API epdyn_status epdyn_result_decoupled_count(const epdyn_result* result, size_t* count);
EPDYN_API epdyn_status epdyn_result_complete(const epdyn_result* result, int* complete);
/* hop only: freeze step, or 0 when the trajectory never froze. */
EPDYN_API epdyn_status epdyn_result_frozen_at(const epdyn_result* result, uint64_t* step);
/* verify only: 1 if every check passed. */
EPDYN_API epdyn_status epdyn_result_passed(const epdyn_result* result, int* passed);

EPDYN_API void epdyn_result_free(epdyn_result* result);

/* Dense helper ------------------------------------------------------------ */

/* EP roots of an n x n Hermitian matrix (row-major real and imaginary parts;
 * imag may be NULL) with retained indices p[0..p_count). Roots go to roots
 * (capacity n), decoupled poles to poles (capacity n). */
EPDYN_API epdyn_status epdyn_ep_roots_dense(const double* real, const double* imag, size_t n, const size_t* p,
                                            size_t p_count, double* roots, size_t* root_count, double* poles,
                                            size_t* pole_count);

#ifdef __cplusplus
}
#endif

#endif /* EPDYN_H */
