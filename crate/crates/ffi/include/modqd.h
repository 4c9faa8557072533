#ifndef MODQD_H
#define MODQD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ModqdStatus {
  MODQD_STATUS_OK = 0,
  MODQD_STATUS_NULL_POINTER = 1,
  MODQD_STATUS_INVALID_UTF8 = 2,
  MODQD_STATUS_PARSE = 3,
  MODQD_STATUS_INVALID = 4,
  MODQD_STATUS_IO = 5,
  MODQD_STATUS_PANIC = 6,
} ModqdStatus;

/**
 * Opaque genome handle.
 */
typedef struct ModqdGenome ModqdGenome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next library call on the same thread.
 */
const char *modqd_last_error(void);

/**
 * Library version as a static string.
 */
const char *modqd_version(void);

/**
 * Draws a random genome with the default size and depth limits.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum ModqdStatus modqd_genome_random(uint64_t seed, struct ModqdGenome **out);

/**
 * Parses the JSON genome format.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum ModqdStatus modqd_genome_from_json(const char *json, struct ModqdGenome **out);

/**
 * Serializes a genome. Free the result with `modqd_string_free`.
 *
 * # Safety
 * `genome` must be a live handle; `out` must be valid for writes.
 */
enum ModqdStatus modqd_genome_to_json(const struct ModqdGenome *genome, char **out);

/**
 * Number of genotype nodes, including ones the phenotype does not realize.
 *
 * # Safety
 * `genome` must be a live handle; `out` must be valid for writes.
 */
enum ModqdStatus modqd_genome_node_count(const struct ModqdGenome *genome, size_t *out);

/**
 * Realized `(bricks, servos)` under the default limits.
 *
 * # Safety
 * `genome` must be a live handle; `bricks` and `servos` must be valid for writes.
 */
enum ModqdStatus modqd_genome_descriptor(const struct ModqdGenome *genome,
                                         size_t *bricks,
                                         size_t *servos);

/**
 * Simulates a genome with the default limits and simulator settings.
 * `bricks` and `servos` may be null.
 *
 * # Safety
 * `genome` must be a live handle; non-null pointers must be valid for writes.
 */
enum ModqdStatus modqd_evaluate(const struct ModqdGenome *genome,
                                double *fitness,
                                size_t *bricks,
                                size_t *servos);

/**
 * Releases a genome handle. Null is ignored.
 *
 * # Safety
 * `genome` must come from this library and not be used afterwards.
 */
void modqd_genome_free(struct ModqdGenome *genome);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void modqd_string_free(char *s);

/**
 * Runs an experiment described by a TOML config string (same keys as the
 * CLI's `--config` file) and writes its outputs.
 *
 * # Safety
 * `config_toml` must be a NUL-terminated string.
 */
enum ModqdStatus modqd_run(const char *config_toml);

/**
 * Runs an experiment from a TOML config file.
 *
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum ModqdStatus modqd_run_file(const char *path);

/**
 * Folds `v` back into `[min, max]` by reflection. Returns NaN unless all
 * arguments are finite and `min < max`.
 */
double modqd_bounce_back(double v, double min, double max);

/**
 * Clamped servo set-point at time `t`.
 */
double modqd_joint_angle(double alpha, double omega, double phi, double offset, double t);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MODQD_H */
