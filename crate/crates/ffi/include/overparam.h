#ifndef OVERPARAM_H
#define OVERPARAM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum OpStatus {
  OP_STATUS_OK = 0,
  OP_STATUS_NULL_POINTER = 1,
  OP_STATUS_INVALID_ARGUMENT = 2,
  OP_STATUS_DIMENSION_MISMATCH = 3,
  OP_STATUS_INVALID_TOPOLOGY = 4,
  OP_STATUS_INVALID_HYPER_PARAMS = 5,
  OP_STATUS_INVALID_DATASET = 6,
  OP_STATUS_NON_FINITE_RISK = 7,
  OP_STATUS_BUFFER_TOO_SMALL = 8,
  OP_STATUS_PANIC = 9,
  OP_STATUS_INTERNAL = 10,
} OpStatus;

// Which per-step series to read.
typedef enum OpSeries {
  OP_SERIES_RISK = 0,
  OP_SERIES_GRAD_NORM = 1,
  OP_SERIES_DRIFT = 2,
} OpSeries;

// Training sample with points stored row-major.
typedef struct OpDataset OpDataset;

// Network weights in the flat layout `[block_1, ..., block_K, a_1, ..., a_K]`.
typedef struct OpNetwork OpNetwork;

// Record of a finished gradient descent run.
typedef struct OpTrace OpTrace;

// Constants and schedule of the estimator.
typedef struct OpHyperParams {
  size_t n;
  double c1;
  double c2;
  double c3;
  double c4;
  double c5;
  double c6;
  double tau;
  // Inverse step size; the step size is `1 / l_n`.
  double l_n;
  // Number of gradient steps.
  uint64_t t_n;
} OpHyperParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` as a
// NUL-terminated string, truncating to `len - 1` bytes. Returns the full
// message length excluding the terminator, so a call with `len = 0` sizes
// the buffer. The message is empty after a successful call.
//
// # Safety
// `buf` must be valid for `len` bytes or null with `len = 0`.
size_t op_last_error_message(char *buf, size_t len);

// Logistic squasher `1 / (1 + exp(-x))`.
double op_sigma(double x);

// `max(-beta, min(beta, z))`.
double op_truncate(double z, double beta);

// Suggested constants for sample size `n`, dimension `d` and moment
// constant `c5`, with `l_n = 1` and `t_n = 0` left for the caller.
//
// # Safety
// `out` must be valid for writes.
enum OpStatus op_hyper_suggested(size_t n, size_t d, double c5, struct OpHyperParams *out);

// Network with all weights zero.
//
// # Safety
// `out` must be valid for writes. The handle must be released with
// [`op_network_free`].
enum OpStatus op_network_new(size_t d,
                             size_t depth,
                             size_t width,
                             size_t subnets,
                             struct OpNetwork **out);

// Random initialization: outer weights zero, inner weights uniform on the
// ranges given by `hp`. The result depends only on `seed`.
//
// # Safety
// `hp` must be readable and `out` writable. The handle must be released
// with [`op_network_free`].
enum OpStatus op_network_init(size_t d,
                              size_t depth,
                              size_t width,
                              size_t subnets,
                              const struct OpHyperParams *hp,
                              uint64_t seed,
                              struct OpNetwork **out);

// # Safety
// `net` must come from this library and not be used afterwards. Null is
// ignored.
void op_network_free(struct OpNetwork *net);

// Number of weights, or 0 for a null handle.
//
// # Safety
// `net` must be a live handle or null.
size_t op_network_weight_count(const struct OpNetwork *net);

// Input dimension, or 0 for a null handle.
//
// # Safety
// `net` must be a live handle or null.
size_t op_network_input_dim(const struct OpNetwork *net);

// Copies all weights into `buf`, which must hold at least
// [`op_network_weight_count`] values.
//
// # Safety
// `net` must be a live handle and `buf` valid for `len` writes.
enum OpStatus op_network_get_weights(const struct OpNetwork *net, double *buf, size_t len);

// Replaces all weights; `len` must equal [`op_network_weight_count`].
//
// # Safety
// `net` must be a live handle and `buf` valid for `len` reads.
enum OpStatus op_network_set_weights(struct OpNetwork *net, const double *buf, size_t len);

// Untruncated network output at `x` of length `d`.
//
// # Safety
// `net` must be a live handle, `x` valid for `d` reads and `out` writable.
enum OpStatus op_network_forward(const struct OpNetwork *net,
                                 const double *x,
                                 size_t d,
                                 double *out);

// Copies `n` points (`xs`, row-major `n x d`) and responses `ys`.
//
// # Safety
// `xs` must be valid for `n * d` reads, `ys` for `n` reads, `out` writable.
// The handle must be released with [`op_dataset_free`].
enum OpStatus op_dataset_new(size_t d,
                             size_t n,
                             const double *xs,
                             const double *ys,
                             struct OpDataset **out);

// # Safety
// `data` must come from this library and not be used afterwards. Null is
// ignored.
void op_dataset_free(struct OpDataset *data);

// Regularized empirical risk `(1/n) sum (Y_i - f(X_i))^2 + c3 sum a_k^2`.
//
// # Safety
// Handles must be live and `out` writable.
enum OpStatus op_risk(const struct OpNetwork *net,
                      const struct OpDataset *data,
                      double c3,
                      double *out);

// Gradient of the risk with respect to every weight, in the flat layout.
//
// # Safety
// Handles must be live and `buf` valid for `len` writes.
enum OpStatus op_gradient(const struct OpNetwork *net,
                          const struct OpDataset *data,
                          double c3,
                          double *buf,
                          size_t len);

// Runs `hp.t_n` gradient descent steps of size `1 / hp.l_n` from `net`,
// which is left unchanged.
//
// # Safety
// Handles and `hp` must be live, `out` writable. The trace must be released
// with [`op_trace_free`].
enum OpStatus op_train(const struct OpNetwork *net,
                       const struct OpDataset *data,
                       const struct OpHyperParams *hp,
                       struct OpTrace **out);

// # Safety
// `trace` must come from this library and not be used afterwards. Null is
// ignored.
void op_trace_free(struct OpTrace *trace);

// Number of steps taken, or 0 for a null handle. Series have one more entry.
//
// # Safety
// `trace` must be a live handle or null.
size_t op_trace_steps(const struct OpTrace *trace);

// Copies a per-step series (`steps + 1` values) into `buf`.
//
// # Safety
// `trace` must be a live handle and `buf` valid for `len` writes.
enum OpStatus op_trace_series(const struct OpTrace *trace,
                              enum OpSeries series,
                              double *buf,
                              size_t len);

// New network handle holding the final weights.
//
// # Safety
// `trace` must be a live handle and `out` writable. The network must be
// released with [`op_network_free`].
enum OpStatus op_trace_final_network(const struct OpTrace *trace, struct OpNetwork **out);

// Truncated estimate `T_beta f(x)` at the final weights.
//
// # Safety
// `trace` must be a live handle, `x` valid for `d` reads, `out` writable.
enum OpStatus op_trace_predict(const struct OpTrace *trace, const double *x, size_t d, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OVERPARAM_H */
