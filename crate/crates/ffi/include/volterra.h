#ifndef VOLTERRA_H
#define VOLTERRA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define VK_SCHEME_MIDPOINT 0

#define VK_SCHEME_PRODUCT 1

/**
 * Result codes. `VK_STATUS_OK` is zero.
 */
typedef enum VkStatus {
  VK_STATUS_OK = 0,
  VK_STATUS_NULL_POINTER = 1,
  VK_STATUS_INVALID_ARGUMENT = 2,
  VK_STATUS_NO_ROOT = 3,
  VK_STATUS_STEP_REJECTED = 4,
  VK_STATUS_UNDEFINED_ORDER = 5,
  VK_STATUS_PARSE = 6,
  VK_STATUS_DIGIT_MISMATCH = 7,
  VK_STATUS_RANGE = 8,
  VK_STATUS_PANIC = 99,
} VkStatus;

/**
 * Fixed-length decimal with valid-digit count.
 */
typedef struct VkSigDecimal VkSigDecimal;

/**
 * Mesh solution with its error record against the reference solution.
 */
typedef struct VkSolution VkSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *vk_status_message(enum VkStatus status);

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *vk_last_error_message(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void vk_string_free(char *s);

/**
 * `K_N(λ)`.
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum VkStatus vk_kernel_eval(uint32_t order, double lambda, double *out);

/**
 * Smallest positive root `λ*` of `K_N`.
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum VkStatus vk_kernel_root(uint32_t order, double *out);

/**
 * Largest admissible midpoint step `2 λ*`; `+inf` when unbounded.
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum VkStatus vk_kernel_max_step(uint32_t order, double *out);

/**
 * Solves for the reference solution with shape `alpha` on `nodes` nodes
 * of `[0, 1]`. `scheme` is `VK_SCHEME_MIDPOINT` or `VK_SCHEME_PRODUCT`.
 *
 * # Safety
 * `out` must be a valid pointer; on success it receives a handle owned by
 * the caller.
 */
enum VkStatus vk_solve(uint32_t scheme,
                       uint32_t order,
                       double alpha,
                       size_t nodes,
                       struct VkSolution **out);

/**
 * Number of nodes; 0 for null.
 *
 * # Safety
 * `sol` must be null or a live handle.
 */
size_t vk_solution_len(const struct VkSolution *sol);

/**
 * Midpoint values `φ_{i-1/2}`, `i = 1..len`, owned by the handle.
 *
 * # Safety
 * `sol` must be null or a live handle.
 */
const double *vk_solution_values(const struct VkSolution *sol);

/**
 * Maximum midpoint error against the reference solution.
 *
 * # Safety
 * `sol` must be a live handle and `out` a valid pointer.
 */
enum VkStatus vk_solution_norm(const struct VkSolution *sol, double *out);

/**
 * 1 when the error norm exceeds `max |φ|`, 0 otherwise, -1 for null.
 *
 * # Safety
 * `sol` must be null or a live handle.
 */
int32_t vk_solution_overflow(const struct VkSolution *sol);

/**
 * # Safety
 * `sol` must be null or a handle from [`vk_solve`] not yet freed.
 */
void vk_solution_free(struct VkSolution *sol);

/**
 * `log2(coarse / fine)`.
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum VkStatus vk_convergence_order(double coarse, double fine, double *out);

/**
 * Rounds `x` to `digits` significand digits, all valid.
 *
 * # Safety
 * `out` must be a valid pointer; on success it receives an owned handle.
 */
enum VkStatus vk_sigdec_from_real(double x, uint32_t digits, struct VkSigDecimal **out);

/**
 * Parses `+18652239e2 (f=6, L=8)`.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum VkStatus vk_sigdec_parse(const char *text, struct VkSigDecimal **out);

/**
 * # Safety
 * `a`, `b` must be live handles and `out` a valid pointer.
 */
enum VkStatus vk_sigdec_add(const struct VkSigDecimal *a,
                            const struct VkSigDecimal *b,
                            struct VkSigDecimal **out);

/**
 * # Safety
 * `a`, `b` must be live handles and `out` a valid pointer.
 */
enum VkStatus vk_sigdec_sub(const struct VkSigDecimal *a,
                            const struct VkSigDecimal *b,
                            struct VkSigDecimal **out);

/**
 * Text rendering; release with [`vk_string_free`].
 *
 * # Safety
 * `x` must be a live handle and `out` a valid pointer.
 */
enum VkStatus vk_sigdec_render(const struct VkSigDecimal *x, char **out);

/**
 * Valid significand digits `f`; 0 for null.
 *
 * # Safety
 * `x` must be null or a live handle.
 */
uint32_t vk_sigdec_valid(const struct VkSigDecimal *x);

/**
 * Significand length `L`; 0 for null.
 *
 * # Safety
 * `x` must be null or a live handle.
 */
uint32_t vk_sigdec_digits(const struct VkSigDecimal *x);

/**
 * Decimal exponent `p`; 0 for null.
 *
 * # Safety
 * `x` must be null or a live handle.
 */
int32_t vk_sigdec_exponent(const struct VkSigDecimal *x);

/**
 * Nearest double; NaN for null.
 *
 * # Safety
 * `x` must be null or a live handle.
 */
double vk_sigdec_to_double(const struct VkSigDecimal *x);

/**
 * # Safety
 * `x` must be null or a handle from this library not yet freed.
 */
void vk_sigdec_free(struct VkSigDecimal *x);

/**
 * Valid-digit minorant of a sum from exponents and valid digits.
 */
int64_t vk_estimate_f_sum(int32_t p1, uint32_t f1, int32_t p2, uint32_t f2);

/**
 * Valid-digit minorant of `|x4| - |x3|`; significands are decimal strings.
 *
 * # Safety
 * `m3`, `m4` must be NUL-terminated strings and `out` a valid pointer.
 */
enum VkStatus vk_estimate_f_diff(const char *m3,
                                 uint32_t f3,
                                 const char *m4,
                                 uint32_t f4,
                                 uint32_t digits,
                                 uint32_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VOLTERRA_H */
