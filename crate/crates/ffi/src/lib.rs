//! C ABI over the `overparam` estimator.
//!
//! Objects cross the boundary as opaque handles created by `op_*_new` (or
//! returned by `op_train`) and released by the matching `op_*_free`. Every
//! fallible call returns an [`OpStatus`]; on failure a message describing the
//! error is kept per thread and can be copied out with
//! [`op_last_error_message`].
//!
//! Handles are not synchronized: a handle may be used from any thread but not
//! from two threads at once.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use overparam::net::{init_weights, DeskOverrides};
use overparam::optim::{empirical_risk, risk_and_gradient, train};
use overparam::{Dataset, Error, HyperParams, Topology, TrainTrace, WeightVector};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    InvalidTopology = 4,
    InvalidHyperParams = 5,
    InvalidDataset = 6,
    NonFiniteRisk = 7,
    BufferTooSmall = 8,
    Panic = 9,
    Internal = 10,
}

/// Network weights in the flat layout `[block_1, ..., block_K, a_1, ..., a_K]`.
pub struct OpNetwork {
    weights: WeightVector,
}

/// Training sample with points stored row-major.
pub struct OpDataset {
    data: Dataset,
}

/// Record of a finished gradient descent run.
pub struct OpTrace {
    trace: TrainTrace<WeightVector>,
}

/// Constants and schedule of the estimator.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct OpHyperParams {
    pub n: usize,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub tau: f64,
    /// Inverse step size; the step size is `1 / l_n`.
    pub l_n: f64,
    /// Number of gradient steps.
    pub t_n: u64,
}

impl From<OpHyperParams> for HyperParams {
    fn from(h: OpHyperParams) -> Self {
        HyperParams {
            n: h.n,
            c1: h.c1,
            c2: h.c2,
            c3: h.c3,
            c4: h.c4,
            c5: h.c5,
            c6: h.c6,
            tau: h.tau,
            l_n: h.l_n,
            t_n: h.t_n,
            desk: DeskOverrides::default(),
        }
    }
}

impl From<HyperParams> for OpHyperParams {
    fn from(h: HyperParams) -> Self {
        OpHyperParams {
            n: h.n,
            c1: h.c1,
            c2: h.c2,
            c3: h.c3,
            c4: h.c4,
            c5: h.c5,
            c6: h.c6,
            tau: h.tau,
            l_n: h.l_n,
            t_n: h.t_n,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_last_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> OpStatus {
    match err {
        Error::DimensionMismatch { .. } => OpStatus::DimensionMismatch,
        Error::InvalidTopology(_) => OpStatus::InvalidTopology,
        Error::InvalidHyperParams(_) => OpStatus::InvalidHyperParams,
        Error::InvalidDataset(_) => OpStatus::InvalidDataset,
        Error::InvalidArgument(_) => OpStatus::InvalidArgument,
        Error::NonFiniteRisk { .. } => OpStatus::NonFiniteRisk,
        _ => OpStatus::Internal,
    }
}

struct Failure(OpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(OpStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> OpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(String::new());
            OpStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("panic: {msg}"));
            OpStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn as_slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn as_mut_slice<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    unsafe { out.write(value) };
    Ok(())
}

fn copy_into(src: &[f64], dst: &mut [f64]) -> Result<(), Failure> {
    if dst.len() < src.len() {
        return Err(Failure(
            OpStatus::BufferTooSmall,
            format!("buffer holds {} values, need {}", dst.len(), src.len()),
        ));
    }
    dst[..src.len()].copy_from_slice(src);
    Ok(())
}

/// Copies the calling thread's last error message into `buf` as a
/// NUL-terminated string, truncating to `len - 1` bytes. Returns the full
/// message length excluding the terminator, so a call with `len = 0` sizes
/// the buffer. The message is empty after a successful call.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null with `len = 0`.
#[no_mangle]
pub unsafe extern "C" fn op_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Logistic squasher `1 / (1 + exp(-x))`.
#[no_mangle]
pub extern "C" fn op_sigma(x: f64) -> f64 {
    overparam::sigma(x)
}

/// `max(-beta, min(beta, z))`.
#[no_mangle]
pub extern "C" fn op_truncate(z: f64, beta: f64) -> f64 {
    overparam::truncate(z, beta)
}

/// Suggested constants for sample size `n`, dimension `d` and moment
/// constant `c5`, with `l_n = 1` and `t_n = 0` left for the caller.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn op_hyper_suggested(n: usize, d: usize, c5: f64, out: *mut OpHyperParams) -> OpStatus {
    guard(|| {
        let hp = HyperParams::suggested(n, d, c5);
        hp.validate()?;
        write_out(out, hp.into(), "out")
    })
}

/// Network with all weights zero.
///
/// # Safety
/// `out` must be valid for writes. The handle must be released with
/// [`op_network_free`].
#[no_mangle]
pub unsafe extern "C" fn op_network_new(
    d: usize,
    depth: usize,
    width: usize,
    subnets: usize,
    out: *mut *mut OpNetwork,
) -> OpStatus {
    guard(|| {
        let topo = Topology::new(d, depth, width, subnets)?;
        let handle = Box::new(OpNetwork { weights: WeightVector::zeros(topo) });
        write_out(out, Box::into_raw(handle), "out")
    })
}

/// Random initialization: outer weights zero, inner weights uniform on the
/// ranges given by `hp`. The result depends only on `seed`.
///
/// # Safety
/// `hp` must be readable and `out` writable. The handle must be released
/// with [`op_network_free`].
#[no_mangle]
pub unsafe extern "C" fn op_network_init(
    d: usize,
    depth: usize,
    width: usize,
    subnets: usize,
    hp: *const OpHyperParams,
    seed: u64,
    out: *mut *mut OpNetwork,
) -> OpStatus {
    guard(|| {
        let hp: HyperParams = (*as_ref(hp, "hp")?).into();
        hp.validate()?;
        let topo = Topology::new(d, depth, width, subnets)?;
        let handle = Box::new(OpNetwork { weights: init_weights(topo, &hp, seed) });
        write_out(out, Box::into_raw(handle), "out")
    })
}

/// # Safety
/// `net` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn op_network_free(net: *mut OpNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Number of weights, or 0 for a null handle.
///
/// # Safety
/// `net` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn op_network_weight_count(net: *const OpNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.weights.len())
}

/// Input dimension, or 0 for a null handle.
///
/// # Safety
/// `net` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn op_network_input_dim(net: *const OpNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.weights.topology().d)
}

/// Copies all weights into `buf`, which must hold at least
/// [`op_network_weight_count`] values.
///
/// # Safety
/// `net` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn op_network_get_weights(net: *const OpNetwork, buf: *mut f64, len: usize) -> OpStatus {
    guard(|| {
        let net = as_ref(net, "net")?;
        copy_into(net.weights.as_slice(), as_mut_slice(buf, len, "buf")?)
    })
}

/// Replaces all weights; `len` must equal [`op_network_weight_count`].
///
/// # Safety
/// `net` must be a live handle and `buf` valid for `len` reads.
#[no_mangle]
pub unsafe extern "C" fn op_network_set_weights(net: *mut OpNetwork, buf: *const f64, len: usize) -> OpStatus {
    guard(|| {
        let net = net.as_mut().ok_or_else(|| null("net"))?;
        let src = as_slice(buf, len, "buf")?;
        if src.len() != net.weights.len() {
            return Err(Error::DimensionMismatch { expected: net.weights.len(), got: src.len() }.into());
        }
        net.weights.as_mut_slice().copy_from_slice(src);
        Ok(())
    })
}

/// Untruncated network output at `x` of length `d`.
///
/// # Safety
/// `net` must be a live handle, `x` valid for `d` reads and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn op_network_forward(net: *const OpNetwork, x: *const f64, d: usize, out: *mut f64) -> OpStatus {
    guard(|| {
        let net = as_ref(net, "net")?;
        let y = overparam::forward(&net.weights, as_slice(x, d, "x")?)?;
        write_out(out, y, "out")
    })
}

/// Copies `n` points (`xs`, row-major `n x d`) and responses `ys`.
///
/// # Safety
/// `xs` must be valid for `n * d` reads, `ys` for `n` reads, `out` writable.
/// The handle must be released with [`op_dataset_free`].
#[no_mangle]
pub unsafe extern "C" fn op_dataset_new(
    d: usize,
    n: usize,
    xs: *const f64,
    ys: *const f64,
    out: *mut *mut OpDataset,
) -> OpStatus {
    guard(|| {
        let len = n.checked_mul(d).ok_or_else(|| Failure(OpStatus::InvalidArgument, "n * d overflows".into()))?;
        let data = Dataset::new(d, as_slice(xs, len, "xs")?.to_vec(), as_slice(ys, n, "ys")?.to_vec())?;
        write_out(out, Box::into_raw(Box::new(OpDataset { data })), "out")
    })
}

/// # Safety
/// `data` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn op_dataset_free(data: *mut OpDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Regularized empirical risk `(1/n) sum (Y_i - f(X_i))^2 + c3 sum a_k^2`.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn op_risk(net: *const OpNetwork, data: *const OpDataset, c3: f64, out: *mut f64) -> OpStatus {
    guard(|| {
        let r = empirical_risk(&as_ref(net, "net")?.weights, &as_ref(data, "data")?.data, c3)?;
        write_out(out, r, "out")
    })
}

/// Gradient of the risk with respect to every weight, in the flat layout.
///
/// # Safety
/// Handles must be live and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn op_gradient(
    net: *const OpNetwork,
    data: *const OpDataset,
    c3: f64,
    buf: *mut f64,
    len: usize,
) -> OpStatus {
    guard(|| {
        let (_, g) = risk_and_gradient(&as_ref(net, "net")?.weights, &as_ref(data, "data")?.data, c3)?;
        copy_into(&g, as_mut_slice(buf, len, "buf")?)
    })
}

/// Runs `hp.t_n` gradient descent steps of size `1 / hp.l_n` from `net`,
/// which is left unchanged.
///
/// # Safety
/// Handles and `hp` must be live, `out` writable. The trace must be released
/// with [`op_trace_free`].
#[no_mangle]
pub unsafe extern "C" fn op_train(
    net: *const OpNetwork,
    data: *const OpDataset,
    hp: *const OpHyperParams,
    out: *mut *mut OpTrace,
) -> OpStatus {
    guard(|| {
        let hp: HyperParams = (*as_ref(hp, "hp")?).into();
        hp.validate()?;
        let trace = train(&as_ref(net, "net")?.weights, &as_ref(data, "data")?.data, &hp)?;
        write_out(out, Box::into_raw(Box::new(OpTrace { trace })), "out")
    })
}

/// # Safety
/// `trace` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn op_trace_free(trace: *mut OpTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Number of steps taken, or 0 for a null handle. Series have one more entry.
///
/// # Safety
/// `trace` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn op_trace_steps(trace: *const OpTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.trace.steps())
}

/// Which per-step series to read.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpSeries {
    Risk = 0,
    GradNorm = 1,
    Drift = 2,
}

/// Copies a per-step series (`steps + 1` values) into `buf`.
///
/// # Safety
/// `trace` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn op_trace_series(
    trace: *const OpTrace,
    series: OpSeries,
    buf: *mut f64,
    len: usize,
) -> OpStatus {
    guard(|| {
        let t = &as_ref(trace, "trace")?.trace;
        let src = match series {
            OpSeries::Risk => &t.risk,
            OpSeries::GradNorm => &t.grad_norm,
            OpSeries::Drift => &t.drift,
        };
        copy_into(src, as_mut_slice(buf, len, "buf")?)
    })
}

/// New network handle holding the final weights.
///
/// # Safety
/// `trace` must be a live handle and `out` writable. The network must be
/// released with [`op_network_free`].
#[no_mangle]
pub unsafe extern "C" fn op_trace_final_network(trace: *const OpTrace, out: *mut *mut OpNetwork) -> OpStatus {
    guard(|| {
        let weights = as_ref(trace, "trace")?.trace.final_weights.clone();
        write_out(out, Box::into_raw(Box::new(OpNetwork { weights })), "out")
    })
}

/// Truncated estimate `T_beta f(x)` at the final weights.
///
/// # Safety
/// `trace` must be a live handle, `x` valid for `d` reads, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn op_trace_predict(trace: *const OpTrace, x: *const f64, d: usize, out: *mut f64) -> OpStatus {
    guard(|| {
        let t = &as_ref(trace, "trace")?.trace;
        let x = as_slice(x, d, "x")?;
        let y = overparam::forward(&t.final_weights, x)?;
        write_out(out, overparam::truncate(y, t.beta), "out")
    })
}
