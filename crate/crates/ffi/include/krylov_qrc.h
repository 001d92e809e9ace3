#ifndef KRYLOV_QRC_H
#define KRYLOV_QRC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum KqStatus {
  KQ_STATUS_OK = 0,
  KQ_STATUS_NULL_POINTER = 1,
  KQ_STATUS_INVALID_ARGUMENT = 2,
  KQ_STATUS_DIMENSION_MISMATCH = 3,
  KQ_STATUS_NUMERICAL = 4,
  KQ_STATUS_IO = 5,
  KQ_STATUS_PANIC = 6,
} KqStatus;

/*
 Ising Hamiltonian handle.
 */
typedef struct KqHamiltonian KqHamiltonian;

/*
 Reservoir handle.
 */
typedef struct KqReservoir KqReservoir;

/*
 State matrix handle, row-major on export.
 */
typedef struct KqStateMatrix KqStateMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failing call on this thread, or null. The pointer is
 valid until the next failing call on the same thread.
 */
const char *kq_last_error_message(void);

/*
 Random Ising Hamiltonian with couplings drawn from `coupling_seed`.

 # Safety
 `out` must be valid for a pointer write. The handle written there must be
 released with [`kq_hamiltonian_free`].
 */
enum KqStatus kq_ising_new(size_t n_sites,
                           double field,
                           uint64_t coupling_seed,
                           struct KqHamiltonian **out);

/*
 Releases a Hamiltonian; null is ignored.

 # Safety
 `handle` must come from [`kq_ising_new`] and not have been freed.
 */
void kq_hamiltonian_free(struct KqHamiltonian *handle);

/*
 Hilbert-space dimension `2^n_sites`, or 0 for a null handle.

 # Safety
 `handle` must be null or a live Hamiltonian handle.
 */
size_t kq_hamiltonian_dim(const struct KqHamiltonian *handle);

/*
 Liouvillian Krylov grade of the Pauli string `label` (e.g. `"Z_1Z_2"`).

 # Safety
 `handle` must be a live Hamiltonian handle, `label` a nul-terminated
 string and `out_grade` valid for a write.
 */
enum KqStatus kq_krylov_grade(const struct KqHamiltonian *handle,
                              const char *label,
                              double tolerance,
                              size_t *out_grade);

/*
 Krylov observability of the listed observables at clock cycle
 `clock_cycle` and multiplexing `multiplexing`.

 # Safety
 `handle` must be a live Hamiltonian handle, `labels_ptr` must point to
 `n_labels` nul-terminated strings and `out_total` must be valid for a
 write.
 */
enum KqStatus kq_observability(const struct KqHamiltonian *handle,
                               const char *const *labels_ptr,
                               size_t n_labels,
                               double clock_cycle,
                               size_t multiplexing,
                               double *out_total);

/*
 Zeno time of `label`; infinite when the observable commutes with `H`.

 # Safety
 `handle` must be a live Hamiltonian handle, `label` a nul-terminated
 string and `out` valid for a write.
 */
enum KqStatus kq_zeno_time(const struct KqHamiltonian *handle, const char *label, double *out);

/*
 Heisenberg time `2π/⟨s⟩`.

 # Safety
 `handle` must be a live Hamiltonian handle and `out` valid for a write.
 */
enum KqStatus kq_heisenberg_time(const struct KqHamiltonian *handle, double *out);

/*
 Reservoir on a random Ising register measuring the listed observables.

 # Safety
 `labels_ptr` must point to `n_labels` nul-terminated strings and `out` must
 be valid for a pointer write. The handle must be released with
 [`kq_reservoir_free`].
 */
enum KqStatus kq_reservoir_new(size_t n_sites,
                               uint64_t coupling_seed,
                               double clock_cycle,
                               size_t multiplexing,
                               const char *const *labels_ptr,
                               size_t n_labels,
                               double noise_eta,
                               uint64_t noise_seed,
                               size_t washout,
                               struct KqReservoir **out);

/*
 Releases a reservoir; null is ignored.

 # Safety
 `handle` must come from [`kq_reservoir_new`] and not have been freed.
 */
void kq_reservoir_free(struct KqReservoir *handle);

/*
 Drives the reservoir with `inputs` from the maximally mixed state.

 # Safety
 `handle` must be a live reservoir handle, `inputs` must point to
 `n_inputs` doubles and `out` must be valid for a pointer write. The state
 matrix must be released with [`kq_state_matrix_free`].
 */
enum KqStatus kq_reservoir_run(const struct KqReservoir *handle,
                               const double *inputs,
                               size_t n_inputs,
                               struct KqStateMatrix **out);

/*
 Releases a state matrix; null is ignored.

 # Safety
 `handle` must come from [`kq_reservoir_run`] and not have been freed.
 */
void kq_state_matrix_free(struct KqStateMatrix *handle);

/*
 Row count, or 0 for a null handle.

 # Safety
 `handle` must be null or a live state matrix handle.
 */
size_t kq_state_matrix_rows(const struct KqStateMatrix *handle);

/*
 Column count, or 0 for a null handle.

 # Safety
 `handle` must be null or a live state matrix handle.
 */
size_t kq_state_matrix_cols(const struct KqStateMatrix *handle);

/*
 Copies the entries row-major into `buffer`, which must hold exactly
 `rows·cols` doubles.

 # Safety
 `handle` must be a live state matrix handle and `buffer` valid for
 `len` double writes.
 */
enum KqStatus kq_state_matrix_copy(const struct KqStateMatrix *handle, double *buffer, size_t len);

/*
 Total information processing capacity of a state matrix produced from
 `inputs`, with the default surrogate threshold.

 # Safety
 `handle` must be a live state matrix handle, `inputs` must point to
 `n_inputs` doubles (the full sequence including washout) and `out_total`
 must be valid for a write.
 */
enum KqStatus kq_total_ipc(const struct KqStateMatrix *handle,
                           const double *inputs,
                           size_t n_inputs,
                           size_t max_degree,
                           size_t max_delay,
                           size_t train_len,
                           size_t test_len,
                           double *out_total);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KRYLOV_QRC_H */
