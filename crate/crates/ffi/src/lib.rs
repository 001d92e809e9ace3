//! C ABI over the krylov-qrc library.
//!
//! Objects cross the boundary as opaque handles created by `kq_*_new` or
//! `kq_*_run` functions and released with the matching `kq_*_free`. Every
//! fallible call returns a [`KqStatus`]; on failure the message is available
//! from [`kq_last_error_message`] until the next failing call on the same
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use krylov_qrc::capacity::{total_ipc, IpcConfig};
use krylov_qrc::error::Error;
use krylov_qrc::krylov::{krylov_observability, krylov_space_liouvillian, RankTolerance};
use krylov_qrc::quantum::ising::IsingModel;
use krylov_qrc::quantum::pauli::parse_pauli_label;
use krylov_qrc::quantum::spectral::Hamiltonian;
use krylov_qrc::quantum::Operator;
use krylov_qrc::reservoir::{Reservoir, ReservoirConfig, StateMatrix};
use krylov_qrc::timescales::{heisenberg_time, zeno_time};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

/// Ising Hamiltonian handle.
pub struct KqHamiltonian(Hamiltonian);

/// Reservoir handle.
pub struct KqReservoir(Reservoir);

/// State matrix handle, row-major on export.
pub struct KqStateMatrix(StateMatrix);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).expect("interior nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn status_of(error: &Error) -> KqStatus {
    match error {
        Error::InvalidArgument(_)
        | Error::ZeroOperator(_)
        | Error::NotHermitian { .. }
        | Error::EnumerationCap { .. }
        | Error::Config(_) => KqStatus::InvalidArgument,
        Error::DimensionMismatch { .. } => KqStatus::DimensionMismatch,
        Error::Numerical(_) | Error::DegenerateSpectrum(_) => KqStatus::Numerical,
        Error::Io(_) | Error::MissingInputs(_) | Error::Format { .. } | Error::Json(_) => {
            KqStatus::Io
        }
        Error::Cell { source, .. } => status_of(source),
    }
}

/// Runs `body`, converting errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), (KqStatus, String)>) -> KqStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => KqStatus::Ok,
        Ok(Err((status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("panic inside krylov-qrc".into());
            KqStatus::Panic
        }
    }
}

fn lift<T>(result: krylov_qrc::error::Result<T>) -> Result<T, (KqStatus, String)> {
    result.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (KqStatus, String) {
    (KqStatus::NullPointer, format!("{what} is null"))
}

unsafe fn reference<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, (KqStatus, String)> {
    ptr.as_ref().ok_or_else(|| null(what))
}

unsafe fn text(ptr: *const c_char, what: &str) -> Result<String, (KqStatus, String)> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| (KqStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn labels(
    ptr: *const *const c_char,
    count: usize,
) -> Result<Vec<String>, (KqStatus, String)> {
    if count == 0 {
        return Err((KqStatus::InvalidArgument, "observable list is empty".into()));
    }
    if ptr.is_null() {
        return Err(null("observable list"));
    }
    std::slice::from_raw_parts(ptr, count)
        .iter()
        .map(|&p| text(p, "observable label"))
        .collect()
}

unsafe fn slice<'a>(
    ptr: *const f64,
    len: usize,
    what: &str,
) -> Result<&'a [f64], (KqStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), (KqStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn operators(h: &Hamiltonian, names: &[String]) -> Result<Vec<Operator>, (KqStatus, String)> {
    let n_sites = h.dim().trailing_zeros() as usize;
    names
        .iter()
        .map(|l| lift(parse_pauli_label(l, n_sites)))
        .collect()
}

/// Message of the last failing call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn kq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |s| s.as_ptr())
    })
}

/// Random Ising Hamiltonian with couplings drawn from `coupling_seed`.
///
/// # Safety
/// `out` must be valid for a pointer write. The handle written there must be
/// released with [`kq_hamiltonian_free`].
#[no_mangle]
pub unsafe extern "C" fn kq_ising_new(
    n_sites: usize,
    field: f64,
    coupling_seed: u64,
    out: *mut *mut KqHamiltonian,
) -> KqStatus {
    guard(|| {
        let h =
            lift(IsingModel::random(n_sites, field, coupling_seed).and_then(|m| m.hamiltonian()))?;
        write(
            out,
            Box::into_raw(Box::new(KqHamiltonian(h))),
            "output handle",
        )
    })
}

/// Releases a Hamiltonian; null is ignored.
///
/// # Safety
/// `handle` must come from [`kq_ising_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn kq_hamiltonian_free(handle: *mut KqHamiltonian) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Hilbert-space dimension `2^n_sites`, or 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live Hamiltonian handle.
#[no_mangle]
pub unsafe extern "C" fn kq_hamiltonian_dim(handle: *const KqHamiltonian) -> usize {
    handle.as_ref().map_or(0, |h| h.0.dim())
}

/// Liouvillian Krylov grade of the Pauli string `label` (e.g. `"Z_1Z_2"`).
///
/// # Safety
/// `handle` must be a live Hamiltonian handle, `label` a nul-terminated
/// string and `out_grade` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn kq_krylov_grade(
    handle: *const KqHamiltonian,
    label: *const c_char,
    tolerance: f64,
    out_grade: *mut usize,
) -> KqStatus {
    guard(|| {
        let h = &reference(handle, "Hamiltonian")?.0;
        let op = operators(h, &[text(label, "label")?])?.remove(0);
        let tol = lift(RankTolerance::new(tolerance))?;
        let grade = lift(krylov_space_liouvillian(h, &op, tol))?.grade();
        write(out_grade, grade, "grade output")
    })
}

/// Krylov observability of the listed observables at clock cycle
/// `clock_cycle` and multiplexing `multiplexing`.
///
/// # Safety
/// `handle` must be a live Hamiltonian handle, `labels_ptr` must point to
/// `n_labels` nul-terminated strings and `out_total` must be valid for a
/// write.
#[no_mangle]
pub unsafe extern "C" fn kq_observability(
    handle: *const KqHamiltonian,
    labels_ptr: *const *const c_char,
    n_labels: usize,
    clock_cycle: f64,
    multiplexing: usize,
    out_total: *mut f64,
) -> KqStatus {
    guard(|| {
        let h = &reference(handle, "Hamiltonian")?.0;
        let ops = operators(h, &labels(labels_ptr, n_labels)?)?;
        let report = lift(krylov_observability(
            h,
            &ops,
            clock_cycle,
            multiplexing,
            RankTolerance::DEFAULT,
        ))?;
        write(out_total, report.total, "total output")
    })
}

/// Zeno time of `label`; infinite when the observable commutes with `H`.
///
/// # Safety
/// `handle` must be a live Hamiltonian handle, `label` a nul-terminated
/// string and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn kq_zeno_time(
    handle: *const KqHamiltonian,
    label: *const c_char,
    out: *mut f64,
) -> KqStatus {
    guard(|| {
        let h = &reference(handle, "Hamiltonian")?.0;
        let op = operators(h, &[text(label, "label")?])?.remove(0);
        write(out, lift(zeno_time(h, &op))?.0, "Zeno time output")
    })
}

/// Heisenberg time `2π/⟨s⟩`.
///
/// # Safety
/// `handle` must be a live Hamiltonian handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn kq_heisenberg_time(
    handle: *const KqHamiltonian,
    out: *mut f64,
) -> KqStatus {
    guard(|| {
        let h = &reference(handle, "Hamiltonian")?.0;
        write(out, lift(heisenberg_time(h))?, "Heisenberg time output")
    })
}

/// Reservoir on a random Ising register measuring the listed observables.
///
/// # Safety
/// `labels_ptr` must point to `n_labels` nul-terminated strings and `out` must
/// be valid for a pointer write. The handle must be released with
/// [`kq_reservoir_free`].
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn kq_reservoir_new(
    n_sites: usize,
    coupling_seed: u64,
    clock_cycle: f64,
    multiplexing: usize,
    labels_ptr: *const *const c_char,
    n_labels: usize,
    noise_eta: f64,
    noise_seed: u64,
    washout: usize,
    out: *mut *mut KqReservoir,
) -> KqStatus {
    guard(|| {
        let mut cfg = ReservoirConfig::new(n_sites, coupling_seed, clock_cycle, multiplexing);
        cfg.observables = labels(labels_ptr, n_labels)?;
        cfg.noise_eta = noise_eta;
        cfg.noise_seed = noise_seed;
        cfg.washout = washout;
        let reservoir = lift(Reservoir::new(&cfg))?;
        write(
            out,
            Box::into_raw(Box::new(KqReservoir(reservoir))),
            "output handle",
        )
    })
}

/// Releases a reservoir; null is ignored.
///
/// # Safety
/// `handle` must come from [`kq_reservoir_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn kq_reservoir_free(handle: *mut KqReservoir) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Drives the reservoir with `inputs` from the maximally mixed state.
///
/// # Safety
/// `handle` must be a live reservoir handle, `inputs` must point to
/// `n_inputs` doubles and `out` must be valid for a pointer write. The state
/// matrix must be released with [`kq_state_matrix_free`].
#[no_mangle]
pub unsafe extern "C" fn kq_reservoir_run(
    handle: *const KqReservoir,
    inputs: *const f64,
    n_inputs: usize,
    out: *mut *mut KqStateMatrix,
) -> KqStatus {
    guard(|| {
        let reservoir = &reference(handle, "reservoir")?.0;
        let states = lift(reservoir.run(slice(inputs, n_inputs, "inputs")?))?;
        write(
            out,
            Box::into_raw(Box::new(KqStateMatrix(states))),
            "output handle",
        )
    })
}

/// Releases a state matrix; null is ignored.
///
/// # Safety
/// `handle` must come from [`kq_reservoir_run`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn kq_state_matrix_free(handle: *mut KqStateMatrix) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Row count, or 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live state matrix handle.
#[no_mangle]
pub unsafe extern "C" fn kq_state_matrix_rows(handle: *const KqStateMatrix) -> usize {
    handle.as_ref().map_or(0, |s| s.0.rows())
}

/// Column count, or 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live state matrix handle.
#[no_mangle]
pub unsafe extern "C" fn kq_state_matrix_cols(handle: *const KqStateMatrix) -> usize {
    handle.as_ref().map_or(0, |s| s.0.cols())
}

/// Copies the entries row-major into `buffer`, which must hold exactly
/// `rows·cols` doubles.
///
/// # Safety
/// `handle` must be a live state matrix handle and `buffer` valid for
/// `len` double writes.
#[no_mangle]
pub unsafe extern "C" fn kq_state_matrix_copy(
    handle: *const KqStateMatrix,
    buffer: *mut f64,
    len: usize,
) -> KqStatus {
    guard(|| {
        let values = reference(handle, "state matrix")?.0.values();
        if len != values.len() {
            return Err((
                KqStatus::DimensionMismatch,
                format!("buffer holds {len} values, matrix has {}", values.len()),
            ));
        }
        if buffer.is_null() {
            return Err(null("buffer"));
        }
        let out = std::slice::from_raw_parts_mut(buffer, len);
        let cols = values.ncols();
        for r in 0..values.nrows() {
            for c in 0..cols {
                out[r * cols + c] = values[(r, c)];
            }
        }
        Ok(())
    })
}

/// Total information processing capacity of a state matrix produced from
/// `inputs`, with the default surrogate threshold.
///
/// # Safety
/// `handle` must be a live state matrix handle, `inputs` must point to
/// `n_inputs` doubles (the full sequence including washout) and `out_total`
/// must be valid for a write.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn kq_total_ipc(
    handle: *const KqStateMatrix,
    inputs: *const f64,
    n_inputs: usize,
    max_degree: usize,
    max_delay: usize,
    train_len: usize,
    test_len: usize,
    out_total: *mut f64,
) -> KqStatus {
    guard(|| {
        let states = &reference(handle, "state matrix")?.0;
        let cfg = IpcConfig {
            max_degree,
            max_delay,
            train_len,
            test_len,
            ..IpcConfig::default()
        };
        let report = lift(total_ipc(states, slice(inputs, n_inputs, "inputs")?, &cfg))?;
        write(out_total, report.total, "total output")
    })
}
