#ifndef HDFE_H
#define HDFE_H

#include <stddef.h>
#include <stdint.h>

#define HDFE_REFINE_NONE 0

#define HDFE_REFINE_ONESHOT 1

#define HDFE_REFINE_ITERATIVE 2

typedef enum HdfeStatus {
  HDFE_STATUS_OK = 0,
  HDFE_STATUS_NULL_POINTER = 1,
  HDFE_STATUS_INVALID_ARGUMENT = 2,
  HDFE_STATUS_DIMENSION = 3,
  HDFE_STATUS_NUMERIC = 4,
  HDFE_STATUS_CONFIG_MISMATCH = 5,
  HDFE_STATUS_IO = 6,
  HDFE_STATUS_FORMAT = 7,
  HDFE_STATUS_PANIC = 8,
} HdfeStatus;

/**
 * Encoder parameters and their random projections.
 */
typedef struct HdfeConfig HdfeConfig;

/**
 * A function encoding bound to the config that produced it.
 */
typedef struct HdfeEncoding HdfeEncoding;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *hdfe_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hdfe_version(void);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum HdfeStatus hdfe_config_new(size_t n,
                                size_t m,
                                double alpha,
                                double beta,
                                uint64_t seed,
                                struct HdfeConfig **out);

/**
 * # Safety
 * `cfg` must be null or a handle from this library not yet freed.
 */
void hdfe_config_free(struct HdfeConfig *cfg);

/**
 * Config fingerprint, or 0 for a null handle.
 *
 * # Safety
 * `cfg` must be null or a live config handle.
 */
uint64_t hdfe_config_fingerprint(const struct HdfeConfig *cfg);

/**
 * Encodes `n_samples` rows of `inputs` (row-major, width `m` of the config)
 * with one output each.
 *
 * # Safety
 * `inputs` must hold `n_samples * m` doubles, `outputs` `n_samples` doubles,
 * and `out` must be writable.
 */
enum HdfeStatus hdfe_encode_explicit(const struct HdfeConfig *cfg,
                                     const double *inputs,
                                     const double *outputs,
                                     size_t n_samples,
                                     uint32_t refinement,
                                     struct HdfeEncoding **out);

/**
 * Encodes a point set (row-major `n_samples x m`).
 *
 * # Safety
 * `points` must hold `n_samples * m` doubles and `out` must be writable.
 */
enum HdfeStatus hdfe_encode_implicit(const struct HdfeConfig *cfg,
                                     const double *points,
                                     size_t n_samples,
                                     uint32_t refinement,
                                     struct HdfeEncoding **out);

/**
 * # Safety
 * `enc` must be null or a handle from this library not yet freed.
 */
void hdfe_encoding_free(struct HdfeEncoding *enc);

/**
 * Dimension `N` of the encoding, or 0 for a null handle.
 *
 * # Safety
 * `enc` must be null or a live encoding handle.
 */
size_t hdfe_encoding_dim(const struct HdfeEncoding *enc);

/**
 * Copies the vector as interleaved `(re, im)` pairs into `buf`, which must
 * have room for `len >= 2 * N` doubles.
 *
 * # Safety
 * `buf` must point to `len` writable doubles.
 */
enum HdfeStatus hdfe_encoding_copy_vector(const struct HdfeEncoding *enc, double *buf, size_t len);

/**
 * Decodes at `x0` (length `m`). A nonzero `grid_resolution` selects the
 * exhaustive grid search at that resolution; 0 selects gradient ascent.
 *
 * # Safety
 * `x0` must hold `m` doubles and `y` must be writable.
 */
enum HdfeStatus hdfe_decode(const struct HdfeConfig *cfg,
                            const struct HdfeEncoding *enc,
                            const double *x0,
                            size_t m,
                            size_t grid_resolution,
                            double *y);

/**
 * Real-cosine similarity of an implicit encoding with the point `xq`.
 *
 * # Safety
 * `xq` must hold `m` doubles and `out` must be writable.
 */
enum HdfeStatus hdfe_query(const struct HdfeConfig *cfg,
                           const struct HdfeEncoding *enc,
                           const double *xq,
                           size_t m,
                           double *out);

/**
 * # Safety
 * `path` must be a NUL-terminated UTF-8 string.
 */
enum HdfeStatus hdfe_encoding_save(const struct HdfeConfig *cfg,
                                   const struct HdfeEncoding *enc,
                                   const char *path);

/**
 * Reads an encoding file and returns new config and encoding handles.
 *
 * # Safety
 * `path` must be a NUL-terminated UTF-8 string; both out pointers must be
 * writable.
 */
enum HdfeStatus hdfe_encoding_load(const char *path,
                                   struct HdfeConfig **cfg_out,
                                   struct HdfeEncoding **enc_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HDFE_H */
