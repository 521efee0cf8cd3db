//! C ABI over `crs-core`.
//!
//! Every fallible call returns a [`CrsStatus`]; on failure the message is available from
//! [`crs_last_error_message`] on the same thread until the next failing call.
//! Instances are opaque handles created by `crs_instance_*` and released with
//! [`crs_instance_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;
use std::str::FromStr;

use crs_core::analytics::{beta, estimate_balancedness, gamma, Estimator};
use crs_core::graph::{FractionalPoint, Multigraph};
use crs_core::instance::Instance;
use crs_core::oracle::exact_balancedness;
use crs_core::rng::RngStream;
use crs_core::sampler::resolve_procedure;
use crs_core::schemes::Procedure;
use crs_core::CrsError;

/// Result codes shared by all functions.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrsStatus {
    Ok = 0,
    /// Malformed instance, marginals or scheme name.
    InputError = 1,
    /// Out-of-range numeric parameter.
    ParameterError = 2,
    /// Well-formed request beyond what the routine supports.
    CapabilityError = 3,
    /// A required pointer was null.
    NullPointer = 4,
    /// An output buffer is too small.
    BufferTooSmall = 5,
    /// Unexpected internal failure.
    InternalError = 6,
}

/// Opaque instance handle.
pub struct CrsInstance {
    inner: Instance,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: CrsStatus, msg: &str) -> CrsStatus {
    set_error(msg);
    status
}

fn from_core(e: CrsError) -> CrsStatus {
    let status = match e {
        CrsError::Capability(_) => CrsStatus::CapabilityError,
        CrsError::Parameter(_) => CrsStatus::ParameterError,
        _ => CrsStatus::InputError,
    };
    fail(status, &e.to_string())
}

fn guard<F>(f: F) -> CrsStatus
where
    F: FnOnce() -> Result<(), CrsStatus>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CrsStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(CrsStatus::InternalError, "internal panic"),
    }
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, CrsStatus> {
    if p.is_null() {
        return Err(fail(CrsStatus::NullPointer, &format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(CrsStatus::InputError, &format!("{what} is not valid UTF-8")))
}

unsafe fn instance<'a>(p: *const CrsInstance) -> Result<&'a Instance, CrsStatus> {
    p.as_ref()
        .map(|h| &h.inner)
        .ok_or_else(|| fail(CrsStatus::NullPointer, "instance is null"))
}

fn procedure(name: &str) -> Result<Procedure, CrsStatus> {
    Procedure::from_str(name).map_err(from_core)
}

unsafe fn out_slice<'a, T>(
    p: *mut T,
    len: usize,
    need: usize,
    what: &str,
) -> Result<&'a mut [T], CrsStatus> {
    if p.is_null() {
        return Err(fail(CrsStatus::NullPointer, &format!("{what} is null")));
    }
    if len < need {
        return Err(fail(
            CrsStatus::BufferTooSmall,
            &format!("{what} holds {len} entries, {need} needed"),
        ));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

fn publish(out: *mut *mut CrsInstance, inst: Instance) -> Result<(), CrsStatus> {
    let h = Box::into_raw(Box::new(CrsInstance { inner: inst }));
    // SAFETY: caller checked `out` for null.
    unsafe { *out = h };
    Ok(())
}

/// Message of the most recent failure on this thread; empty if none. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn crs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds an instance from `edge_count` endpoint pairs and edge values.
///
/// # Safety
/// `us`, `vs` and `xs` must point to `edge_count` readable elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn crs_instance_new(
    vertex_count: usize,
    us: *const usize,
    vs: *const usize,
    xs: *const f64,
    edge_count: usize,
    out: *mut *mut CrsInstance,
) -> CrsStatus {
    guard(|| {
        if out.is_null() || (edge_count > 0 && (us.is_null() || vs.is_null() || xs.is_null())) {
            return Err(fail(CrsStatus::NullPointer, "null argument"));
        }
        let (us, vs, xs) = if edge_count == 0 {
            (&[][..], &[][..], &[][..])
        } else {
            (
                slice::from_raw_parts(us, edge_count),
                slice::from_raw_parts(vs, edge_count),
                slice::from_raw_parts(xs, edge_count),
            )
        };
        let g = Multigraph::new(vertex_count, us.iter().copied().zip(vs.iter().copied()))
            .map_err(from_core)?;
        let x = FractionalPoint::new(xs.to_vec()).map_err(from_core)?;
        publish(out, Instance::new(g, x, None).map_err(from_core)?)
    })
}

/// Parses an instance from its JSON representation.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn crs_instance_from_json(
    json: *const c_char,
    out: *mut *mut CrsInstance,
) -> CrsStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(CrsStatus::NullPointer, "out is null"));
        }
        let text = c_str(json, "json")?;
        publish(out, Instance::from_json(text).map_err(from_core)?)
    })
}

/// Releases an instance; null is ignored.
///
/// # Safety
/// `inst` must come from `crs_instance_new` or `crs_instance_from_json` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn crs_instance_free(inst: *mut CrsInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of edges, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn crs_instance_edge_count(inst: *const CrsInstance) -> usize {
    inst.as_ref().map_or(0, |h| h.inner.graph.edge_count())
}

/// Optimal bipartite balancedness constant at `b ∈ [0, 1]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn crs_beta(b: f64, out: *mut f64) -> CrsStatus {
    guard(|| {
        let v = beta(b).map_err(from_core)?;
        *out_slice(out, 1, 1, "out")?.first_mut().expect("len 1") = v;
        Ok(())
    })
}

/// General-matching balancedness constant `(1 − e^{−2b}) / (2b)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn crs_gamma(b: f64, out: *mut f64) -> CrsStatus {
    guard(|| {
        let v = gamma(b).map_err(from_core)?;
        *out_slice(out, 1, 1, "out")?.first_mut().expect("len 1") = v;
        Ok(())
    })
}

/// Samples one matching from the named procedure. Writes edge ids into `out_edges`
/// (room for `capacity` ids) and the count into `out_len`.
///
/// # Safety
/// `inst` must be live, `scheme` NUL-terminated, and the output pointers writable.
#[no_mangle]
pub unsafe extern "C" fn crs_resolve(
    inst: *const CrsInstance,
    scheme: *const c_char,
    seed: u64,
    out_edges: *mut usize,
    capacity: usize,
    out_len: *mut usize,
) -> CrsStatus {
    guard(|| {
        let inst = instance(inst)?;
        let p = procedure(c_str(scheme, "scheme")?)?;
        let buf = out_slice(out_edges, capacity, 0, "out_edges")?;
        if out_len.is_null() {
            return Err(fail(CrsStatus::NullPointer, "out_len is null"));
        }
        let mut r = RngStream::new(seed, 0);
        let matching = resolve_procedure(p, &inst.graph, &inst.x, &mut r).map_err(from_core)?;
        if matching.len() > capacity {
            return Err(fail(CrsStatus::BufferTooSmall, "out_edges is too small"));
        }
        buf[..matching.len()].copy_from_slice(&matching);
        *out_len = matching.len();
        Ok(())
    })
}

/// Exact balancedness `E[y_e] / x_e` per edge (NaN outside `supp(x)`), plus the
/// minimum over the support.
///
/// # Safety
/// `inst` must be live, `scheme` NUL-terminated, `out_values` writable for `len` entries.
#[no_mangle]
pub unsafe extern "C" fn crs_exact_balancedness(
    inst: *const CrsInstance,
    scheme: *const c_char,
    out_values: *mut f64,
    len: usize,
    out_min: *mut f64,
) -> CrsStatus {
    guard(|| {
        let inst = instance(inst)?;
        let kind = match procedure(c_str(scheme, "scheme")?)? {
            Procedure::Cr(k) => k,
            Procedure::Merged(_) => {
                return Err(fail(
                    CrsStatus::CapabilityError,
                    "exact balancedness covers contention resolution schemes only",
                ))
            }
        };
        let m = inst.graph.edge_count();
        let values = out_slice(out_values, len, m, "out_values")?;
        let report = exact_balancedness(kind, &inst.graph, &inst.x).map_err(from_core)?;
        values[..m].iter_mut().for_each(|v| *v = f64::NAN);
        for b in &report.edges {
            values[b.edge] = b.value;
        }
        if !out_min.is_null() {
            *out_min = report.min;
        }
        Ok(())
    })
}

/// Monte Carlo balancedness per edge with standard errors (NaN outside `supp(x)`).
///
/// # Safety
/// `inst` must be live, `scheme` NUL-terminated, both output arrays writable for `len` entries.
#[no_mangle]
pub unsafe extern "C" fn crs_estimate_balancedness(
    inst: *const CrsInstance,
    scheme: *const c_char,
    trials: u64,
    seed: u64,
    out_values: *mut f64,
    out_std_errors: *mut f64,
    len: usize,
) -> CrsStatus {
    guard(|| {
        let inst = instance(inst)?;
        let p = procedure(c_str(scheme, "scheme")?)?;
        let m = inst.graph.edge_count();
        let values = out_slice(out_values, len, m, "out_values")?;
        let errors = out_slice(out_std_errors, len, m, "out_std_errors")?;
        let report = estimate_balancedness(
            p,
            &inst.graph,
            &inst.x,
            trials,
            &RngStream::new(seed, 0),
            Estimator::Conditional,
        )
        .map_err(from_core)?;
        values[..m].iter_mut().for_each(|v| *v = f64::NAN);
        errors[..m].iter_mut().for_each(|v| *v = f64::NAN);
        for b in &report.edges {
            values[b.edge] = b.value;
            errors[b.edge] = b.std_error.unwrap_or(0.0);
        }
        Ok(())
    })
}
