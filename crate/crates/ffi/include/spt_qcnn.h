#ifndef SPT_QCNN_H
#define SPT_QCNN_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum SptStatus {
  SPT_STATUS_OK = 0,
  SPT_STATUS_NULL_POINTER = 1,
  SPT_STATUS_INVALID_ARGUMENT = 2,
  SPT_STATUS_SIZE_MISMATCH = 3,
  SPT_STATUS_OUT_OF_RANGE = 4,
  SPT_STATUS_UNSUPPORTED = 5,
  SPT_STATUS_IO = 6,
  SPT_STATUS_CONFIG = 7,
  SPT_STATUS_NUMERICAL = 8,
  SPT_STATUS_PANIC = 9,
} SptStatus;

/**
 * Density matrix on `n` qubits.
 */
typedef struct SptDensity SptDensity;

/**
 * Noise parameters of a device.
 */
typedef struct SptDevice SptDevice;

/**
 * Pauli expansion of the multiscale string order parameter.
 */
typedef struct SptMsop SptMsop;

/**
 * Pure state on `n` qubits.
 */
typedef struct SptState SptState;

/**
 * Result of a variational ground-state search.
 */
typedef struct SptVqeResult SptVqeResult;

/**
 * Settings for [`spt_vqe_optimize`].
 */
typedef struct SptVqeOptions {
  uintptr_t depth;
  uintptr_t max_restarts;
  uint64_t max_iters;
  double accept_fidelity;
  uint64_t seed;
} SptVqeOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library defaults for [`SptVqeOptions`].
 */
struct SptVqeOptions spt_vqe_options_default(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *spt_version(void);

/**
 * Copies the last error message of the calling thread into `buf`.
 *
 * Returns the message length (excluding the terminator), so a call with
 * `len == 0` sizes the buffer.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
uintptr_t spt_last_error_message(char *buf, uintptr_t len);

/**
 * Exact ground state of the cluster-Ising chain.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum SptStatus spt_ground_state(double h1, double h2, uintptr_t n, struct SptState **out_state);

/**
 * State from `2^n` amplitudes given as separate real and imaginary arrays.
 *
 * # Safety
 * `re` and `im` must each point to `len` readable doubles.
 */
enum SptStatus spt_state_from_amplitudes(const double *re,
                                         const double *im,
                                         uintptr_t len,
                                         struct SptState **out_state);

/**
 * # Safety
 * `state` must be null or a handle not yet freed.
 */
void spt_state_free(struct SptState *state);

/**
 * # Safety
 * `state` must be a live handle.
 */
uintptr_t spt_state_num_qubits(const struct SptState *state);

/**
 * Copies the amplitudes out; `len` must equal `2^n`.
 *
 * # Safety
 * `re` and `im` must each point to `len` writable doubles.
 */
enum SptStatus spt_state_amplitudes(const struct SptState *state,
                                    double *re,
                                    double *im,
                                    uintptr_t len);

/**
 * Direct string order parameter `⟨Z X…X Z⟩` on a pure state.
 *
 * # Safety
 * `state` must be a live handle and `out_value` writable.
 */
enum SptStatus spt_state_string_order(const struct SptState *state, double *out_value);

/**
 * Exact seven-qubit QCNN output `2⟨y⟩ − 1` on a pure state.
 *
 * # Safety
 * `state` must be a live handle and `out_value` writable.
 */
enum SptStatus spt_state_qcnn_output(const struct SptState *state, double *out_value);

/**
 * # Safety
 * `state` must be a live handle and `out_density` writable.
 */
enum SptStatus spt_density_from_state(const struct SptState *state,
                                      struct SptDensity **out_density);

/**
 * # Safety
 * `rho` must be null or a handle not yet freed.
 */
void spt_density_free(struct SptDensity *rho);

/**
 * # Safety
 * `rho` must be a live handle and `out_value` writable.
 */
enum SptStatus spt_density_string_order(const struct SptDensity *rho, double *out_value);

/**
 * Exact (noiseless) QCNN output on a density matrix.
 *
 * # Safety
 * `rho` must be a live handle and `out_value` writable.
 */
enum SptStatus spt_density_qcnn_output(const struct SptDensity *rho, double *out_value);

/**
 * Built-in seven-qubit device with the tabulated coherence, readout and
 * gate parameters.
 *
 * # Safety
 * `out_device` must be writable.
 */
enum SptStatus spt_device_table_one(struct SptDevice **out_device);

/**
 * Device without any noise.
 *
 * # Safety
 * `out_device` must be writable.
 */
enum SptStatus spt_device_noiseless(uintptr_t n, struct SptDevice **out_device);

/**
 * Device from a TOML file.
 *
 * # Safety
 * `path` must be a NUL-terminated UTF-8 string and `out_device` writable.
 */
enum SptStatus spt_device_load(const char *path, struct SptDevice **out_device);

/**
 * # Safety
 * `device` must be null or a handle not yet freed.
 */
void spt_device_free(struct SptDevice *device);

/**
 * Optimizes the layered ansatz against the exact ground state at `(h1, h2)`.
 * A null `options` uses the defaults.
 *
 * # Safety
 * `options` must be null or readable; `out_result` writable.
 */
enum SptStatus spt_vqe_optimize(double h1,
                                double h2,
                                uintptr_t n,
                                const struct SptVqeOptions *options,
                                struct SptVqeResult **out_result);

/**
 * # Safety
 * `result` must be null or a handle not yet freed.
 */
void spt_vqe_result_free(struct SptVqeResult *result);

/**
 * Fidelity with the exact ground state; NaN for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double spt_vqe_result_fidelity(const struct SptVqeResult *result);

/**
 * Variational energy; NaN for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double spt_vqe_result_energy(const struct SptVqeResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
bool spt_vqe_result_accepted(const struct SptVqeResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
uintptr_t spt_vqe_result_num_angles(const struct SptVqeResult *result);

/**
 * Copies the optimized angles; with `rewrite` the first layer is mapped
 * into `[−π/2, π/2]`. `len` must equal the angle count.
 *
 * # Safety
 * `result` must be a live handle and `angles` point to `len` writable doubles.
 */
enum SptStatus spt_vqe_result_angles(const struct SptVqeResult *result,
                                     bool rewrite,
                                     double *angles,
                                     uintptr_t len);

/**
 * Noiseless state prepared by the ansatz with the given angles.
 *
 * # Safety
 * `angles` must point to `len` readable doubles and `out_state` be writable.
 */
enum SptStatus spt_ansatz_state(uintptr_t n,
                                uintptr_t depth,
                                const double *angles,
                                uintptr_t len,
                                struct SptState **out_state);

/**
 * Runs the ansatz on `device` and returns the noisy density matrix.
 * Without `preselection` the register starts in the thermal product state.
 *
 * # Safety
 * `device` must be a live handle, `angles` readable for `len` doubles and
 * `out_density` writable.
 */
enum SptStatus spt_noisy_ansatz(const struct SptDevice *device,
                                uintptr_t n,
                                uintptr_t depth,
                                const double *angles,
                                uintptr_t len,
                                bool preselection,
                                struct SptDensity **out_density);

/**
 * QCNN output with the device's gate and readout noise; `shots == 0`
 * evaluates probabilities exactly.
 *
 * # Safety
 * `device` and `rho` must be live handles and `out_value` writable.
 */
enum SptStatus spt_noisy_qcnn_output(const struct SptDevice *device,
                                     const struct SptDensity *rho,
                                     bool mitigate,
                                     uint64_t shots,
                                     uint64_t seed,
                                     double *out_value);

/**
 * Direct string order parameter measured through the device readout.
 *
 * # Safety
 * `device` and `rho` must be live handles and `out_value` writable.
 */
enum SptStatus spt_noisy_string_order(const struct SptDevice *device,
                                      const struct SptDensity *rho,
                                      bool mitigate,
                                      uint64_t shots,
                                      uint64_t seed,
                                      double *out_value);

/**
 * Pauli expansion of the depth-`d` multiscale string order parameter.
 *
 * # Safety
 * `out_msop` must be writable.
 */
enum SptStatus spt_msop_expand(uintptr_t d, struct SptMsop **out_msop);

/**
 * # Safety
 * `msop` must be null or a handle not yet freed.
 */
void spt_msop_free(struct SptMsop *msop);

/**
 * # Safety
 * `msop` must be null or a live handle.
 */
uintptr_t spt_msop_num_terms(const struct SptMsop *msop);

/**
 * # Safety
 * `msop` must be null or a live handle.
 */
uintptr_t spt_msop_num_qubits(const struct SptMsop *msop);

/**
 * Coefficient and Pauli string (e.g. `"X1 Z2"`, sign included) of term
 * `index`. The string is copied into `buf` as with
 * [`spt_last_error_message`]; its full length goes to `out_len`.
 *
 * # Safety
 * `msop` must be a live handle, `buf` null or writable for `len` bytes,
 * `out_coefficient` and `out_len` writable.
 */
enum SptStatus spt_msop_term(const struct SptMsop *msop,
                             uintptr_t index,
                             double *out_coefficient,
                             char *buf,
                             uintptr_t len,
                             uintptr_t *out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPT_QCNN_H */
