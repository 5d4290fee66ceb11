//! C ABI over the varlab core. Every object crosses the boundary as an
//! opaque handle created by a `varlab_*` constructor and released by the
//! matching `varlab_*_free`; every fallible call returns a [`VarlabStatus`]
//! and stores a human-readable message retrievable through
//! [`varlab_last_error_message`] on failure.
//!
//! Conventions:
//! * out-parameters are written only on `VARLAB_STATUS_OK`;
//! * `NULL` handles are rejected with `VARLAB_STATUS_NULL_ARGUMENT`, never
//!   dereferenced;
//! * strings returned as `char *` are owned by the caller and must be
//!   released with [`varlab_string_free`]; strings returned as
//!   `const char *` are borrowed and must not be freed.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use varlab::config::BoundaryFixture;
use varlab::dag::{format_classes, parse_dag, ClaimDag};
use varlab::grid::{discrete_gradient, DiscreteField, Grid};
use varlab::integrand::{
    eval_density, ghost_regularize, grad_density, CoefficientField, IntegrandSpec,
};
use varlab::metrics::{fit_caccioppoli, holder_exponent};
use varlab::solver::{ghost_continuation, SolveConfig, SolveResult};
use varlab::threshold::{classify, GrowthParams, Regime};
use varlab::Error;

/// Call outcome. Anything other than `Ok` leaves a message for
/// [`varlab_last_error_message`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarlabStatus {
    Ok = 0,
    /// A required pointer argument was `NULL`.
    NullArgument = 1,
    /// Parameters violate a documented precondition.
    InvalidArgument = 2,
    /// Evaluation at a point where the integrand is not smooth enough.
    Singular = 3,
    /// A coercivity floor degenerated.
    Degenerate = 4,
    /// Text input could not be parsed.
    ParseError = 5,
    /// Everything else (claim-diagram violations, internal failures).
    Failed = 6,
}

/// Growth regime relative to the sharp threshold, ordered by position
/// along the q axis.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarlabRegime {
    UniformSchauder = 0,
    SharpSchauderHolds = 1,
    Borderline = 2,
    DoublePhaseBounded = 3,
    CounterexampleRegion = 4,
}

impl From<Regime> for VarlabRegime {
    fn from(r: Regime) -> Self {
        match r {
            Regime::UniformSchauder => VarlabRegime::UniformSchauder,
            Regime::SharpSchauderHolds => VarlabRegime::SharpSchauderHolds,
            Regime::Borderline => VarlabRegime::Borderline,
            Regime::DoublePhaseBounded => VarlabRegime::DoublePhaseBounded,
            Regime::CounterexampleRegion => VarlabRegime::CounterexampleRegion,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: String) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(e: Error) -> VarlabStatus {
    let status = match &e {
        Error::InvalidParameter(_) | Error::OutsideDomain(..) | Error::Config(_) => {
            VarlabStatus::InvalidArgument
        }
        Error::SingularAtZero { .. } => VarlabStatus::Singular,
        Error::DegenerateHessian(_) => VarlabStatus::Degenerate,
        Error::Parse { .. } => VarlabStatus::ParseError,
        Error::Grid(_) | Error::OffsetOutOfRange(..) => VarlabStatus::InvalidArgument,
        _ => VarlabStatus::Failed,
    };
    set_error(e.to_string());
    status
}

fn null_argument(name: &str) -> VarlabStatus {
    set_error(format!("{name} must not be NULL"));
    VarlabStatus::NullArgument
}

/// Borrowed message describing the most recent failure on this thread.
/// Valid until the next failing `varlab_*` call on the same thread; do not
/// free.
#[no_mangle]
pub extern "C" fn varlab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Releases a `char *` the library handed out as caller-owned.
///
/// # Safety
/// `s` must be a pointer previously returned by this library as an owned
/// string (or `NULL`, which is ignored), and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn varlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Classifies `(p, q, alpha, n)` against the sharp threshold, reporting the
/// regime and the signed margin `1 + alpha/n - q/p`.
///
/// # Safety
/// `out_regime` and `out_margin` must be valid for writes or `NULL` is
/// reported.
#[no_mangle]
pub unsafe extern "C" fn varlab_classify(
    p: f64,
    q: f64,
    alpha: f64,
    n: u32,
    out_regime: *mut VarlabRegime,
    out_margin: *mut f64,
) -> VarlabStatus {
    if out_regime.is_null() {
        return null_argument("out_regime");
    }
    if out_margin.is_null() {
        return null_argument("out_margin");
    }
    let params = match GrowthParams::new(p, q, alpha, n) {
        Ok(gp) => gp,
        Err(e) => return fail(e),
    };
    let verdict = classify(&params);
    out_regime.write(verdict.regime.into());
    out_margin.write(verdict.margin);
    VarlabStatus::Ok
}

/// Opaque coefficient field over the unit square.
pub struct VarlabCoefficient(CoefficientField);

unsafe fn emit<T>(out: *mut *mut T, value: T) -> VarlabStatus {
    out.write(Box::into_raw(Box::new(value)));
    VarlabStatus::Ok
}

/// Constant coefficient `value >= 0`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn varlab_coefficient_constant(
    value: f64,
    out: *mut *mut VarlabCoefficient,
) -> VarlabStatus {
    if out.is_null() {
        return null_argument("out");
    }
    match CoefficientField::constant(value) {
        Ok(c) => emit(out, VarlabCoefficient(c)),
        Err(e) => fail(e),
    }
}

/// Coefficient `amplitude * |x1 - offset|^alpha` with `alpha` in (0, 1].
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn varlab_coefficient_distance_power(
    alpha: f64,
    amplitude: f64,
    offset: f64,
    out: *mut *mut VarlabCoefficient,
) -> VarlabStatus {
    if out.is_null() {
        return null_argument("out");
    }
    match CoefficientField::distance_power(alpha, amplitude, offset) {
        Ok(c) => emit(out, VarlabCoefficient(c)),
        Err(e) => fail(e),
    }
}

/// Smoothed-step coefficient rising to `amplitude` across `center` over
/// scale `width`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn varlab_coefficient_smoothed_step(
    alpha: f64,
    amplitude: f64,
    center: f64,
    width: f64,
    out: *mut *mut VarlabCoefficient,
) -> VarlabStatus {
    if out.is_null() {
        return null_argument("out");
    }
    match CoefficientField::smoothed_step(alpha, amplitude, center, width) {
        Ok(c) => emit(out, VarlabCoefficient(c)),
        Err(e) => fail(e),
    }
}

/// Evaluates a coefficient at `(x1, x2)` in the closed unit square.
///
/// # Safety
/// `coefficient` must be a live handle from this library; `out` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn varlab_coefficient_eval(
    coefficient: *const VarlabCoefficient,
    x1: f64,
    x2: f64,
    out: *mut f64,
) -> VarlabStatus {
    if coefficient.is_null() {
        return null_argument("coefficient");
    }
    if out.is_null() {
        return null_argument("out");
    }
    out.write((*coefficient).0.eval([x1, x2]));
    VarlabStatus::Ok
}

/// Releases a coefficient handle.
///
/// # Safety
/// `coefficient` must be a live handle from this library or `NULL`; it must
/// not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn varlab_coefficient_free(coefficient: *mut VarlabCoefficient) {
    if !coefficient.is_null() {
        drop(Box::from_raw(coefficient));
    }
}

/// Opaque integrand description (family, exponents, regularization).
pub struct VarlabIntegrand(IntegrandSpec);

/// p-power integrand `(a(x) + eps) (|z|^2 + mu^2)^{p/2}` with `p > 1`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn varlab_integrand_p_power(
    p: f64,
    out: *mut *mut VarlabIntegrand,
) -> VarlabStatus {
    if out.is_null() {
        return null_argument("out");
    }
    match IntegrandSpec::p_power(p) {
        Ok(s) => emit(out, VarlabIntegrand(s)),
        Err(e) => fail(e),
    }
}

/// Double-phase integrand `m^p + (a(x) + eps) m^q` with `1 < p <= q`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn varlab_integrand_double_phase(
    p: f64,
    q: f64,
    out: *mut *mut VarlabIntegrand,
) -> VarlabStatus {
    if out.is_null() {
        return null_argument("out");
    }
    match IntegrandSpec::double_phase(p, q) {
        Ok(s) => emit(out, VarlabIntegrand(s)),
        Err(e) => fail(e),
    }
}

/// Log-linear base phase plus two raw power phases with exponents
/// `q, s > 1`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn varlab_integrand_log_multiphase(
    q: f64,
    s: f64,
    out: *mut *mut VarlabIntegrand,
) -> VarlabStatus {
    if out.is_null() {
        return null_argument("out");
    }
    match IntegrandSpec::log_multiphase(q, s) {
        Ok(spec) => emit(out, VarlabIntegrand(spec)),
        Err(e) => fail(e),
    }
}

/// Copy of `integrand` with ghost regularization `(eps, mu)` installed.
///
/// # Safety
/// `integrand` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn varlab_integrand_regularize(
    integrand: *const VarlabIntegrand,
    eps: f64,
    mu: f64,
    out: *mut *mut VarlabIntegrand,
) -> VarlabStatus {
    if integrand.is_null() {
        return null_argument("integrand");
    }
    if out.is_null() {
        return null_argument("out");
    }
    match ghost_regularize(&(*integrand).0, eps, mu) {
        Ok(spec) => emit(out, VarlabIntegrand(spec)),
        Err(e) => fail(e),
    }
}

unsafe fn coefficient_or_zero(ptr: *const VarlabCoefficient) -> CoefficientField {
    if ptr.is_null() {
        CoefficientField::zero()
    } else {
        (*ptr).0.clone()
    }
}

/// Density value at spatial point `(x1, x2)` and gradient `(z1, z2)`.
/// `NULL` coefficients mean identically zero.
///
/// # Safety
/// `integrand` must be a live handle; `a`/`b` must be live handles or
/// `NULL`; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn varlab_integrand_eval(
    integrand: *const VarlabIntegrand,
    a: *const VarlabCoefficient,
    b: *const VarlabCoefficient,
    x1: f64,
    x2: f64,
    z1: f64,
    z2: f64,
    out: *mut f64,
) -> VarlabStatus {
    if integrand.is_null() {
        return null_argument("integrand");
    }
    if out.is_null() {
        return null_argument("out");
    }
    let (fa, fb) = (coefficient_or_zero(a), coefficient_or_zero(b));
    match eval_density(&(*integrand).0, &fa, &fb, [x1, x2], [z1, z2]) {
        Ok(v) => {
            out.write(v);
            VarlabStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Density gradient in `z` at `(x1, x2)`, `(z1, z2)`.
///
/// # Safety
/// Same as [`varlab_integrand_eval`], with both out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn varlab_integrand_grad(
    integrand: *const VarlabIntegrand,
    a: *const VarlabCoefficient,
    b: *const VarlabCoefficient,
    x1: f64,
    x2: f64,
    z1: f64,
    z2: f64,
    out_g1: *mut f64,
    out_g2: *mut f64,
) -> VarlabStatus {
    if integrand.is_null() {
        return null_argument("integrand");
    }
    if out_g1.is_null() || out_g2.is_null() {
        return null_argument("out_g1/out_g2");
    }
    let (fa, fb) = (coefficient_or_zero(a), coefficient_or_zero(b));
    match grad_density(&(*integrand).0, &fa, &fb, [x1, x2], [z1, z2]) {
        Ok(g) => {
            out_g1.write(g[0]);
            out_g2.write(g[1]);
            VarlabStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Releases an integrand handle.
///
/// # Safety
/// `integrand` must be a live handle from this library or `NULL`; it must
/// not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn varlab_integrand_free(integrand: *mut VarlabIntegrand) {
    if !integrand.is_null() {
        drop(Box::from_raw(integrand));
    }
}

/// Opaque minimization outcome, including the final field.
pub struct VarlabSolveResult {
    result: SolveResult,
    diagnostic: Option<CString>,
}

/// Minimizes the energy on an `m x m` grid under Dirichlet data, running
/// one warm-started stage per `(eps, mu)` schedule row. `boundary` holds
/// `(m + 1)^2` nodal values row-major; only the rim is read. `schedule`
/// holds `schedule_len` rows of two doubles, lexicographically strictly
/// decreasing. A result is produced even when the final tolerance was not
/// reached; check [`varlab_solve_result_converged`].
///
/// # Safety
/// `integrand` must be a live handle; `a`/`b` live or `NULL`; `boundary`
/// must point to `(m + 1)^2` readable doubles; `schedule` to
/// `2 * schedule_len` readable doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn varlab_solve(
    integrand: *const VarlabIntegrand,
    a: *const VarlabCoefficient,
    b: *const VarlabCoefficient,
    m: usize,
    boundary: *const f64,
    tol_grad: f64,
    max_iters: u64,
    schedule: *const f64,
    schedule_len: usize,
    out: *mut *mut VarlabSolveResult,
) -> VarlabStatus {
    if integrand.is_null() {
        return null_argument("integrand");
    }
    if boundary.is_null() {
        return null_argument("boundary");
    }
    if schedule.is_null() {
        return null_argument("schedule");
    }
    if out.is_null() {
        return null_argument("out");
    }
    let grid = match Grid::new(m) {
        Ok(g) => g,
        Err(e) => return fail(e),
    };
    let values = std::slice::from_raw_parts(boundary, grid.node_count()).to_vec();
    let field = match DiscreteField::from_values(grid, values) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    let pairs: Vec<(f64, f64)> = std::slice::from_raw_parts(schedule, 2 * schedule_len)
        .chunks_exact(2)
        .map(|c| (c[0], c[1]))
        .collect();
    let config = match SolveConfig::new(tol_grad, max_iters, 1e-4, 0.5, pairs) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let (fa, fb) = (coefficient_or_zero(a), coefficient_or_zero(b));
    match ghost_continuation(&(*integrand).0, &fa, &fb, grid, &field, &config) {
        Ok(result) => {
            let diagnostic = result
                .diagnostic
                .as_deref()
                .map(|d| CString::new(d.replace('\0', " ")).unwrap_or_default());
            emit(out, VarlabSolveResult { result, diagnostic })
        }
        Err(e) => fail(e),
    }
}

/// Samples a named boundary fixture into a caller buffer of `(m + 1)^2`
/// doubles: 0 affine(c1, c2), 1 saddle, 2 ramp-wave(c1, c2),
/// 3 cusp(c1).
///
/// # Safety
/// `buffer` must point to `(m + 1)^2` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn varlab_boundary_sample(
    kind: u32,
    c1: f64,
    c2: f64,
    m: usize,
    buffer: *mut f64,
) -> VarlabStatus {
    if buffer.is_null() {
        return null_argument("buffer");
    }
    let fixture = match kind {
        0 => BoundaryFixture::Affine { gx: c1, gy: c2 },
        1 => BoundaryFixture::Saddle,
        2 => BoundaryFixture::RampWave { slope: c1, wobble: c2 },
        3 => BoundaryFixture::Cusp { exponent: c1 },
        other => {
            set_error(format!("unknown boundary fixture kind {other}"));
            return VarlabStatus::InvalidArgument;
        }
    };
    let grid = match Grid::new(m) {
        Ok(g) => g,
        Err(e) => return fail(e),
    };
    let field = fixture.sample(grid);
    std::slice::from_raw_parts_mut(buffer, grid.node_count()).copy_from_slice(field.values());
    VarlabStatus::Ok
}

/// Whether every continuation stage reached its gradient tolerance.
///
/// # Safety
/// `result` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn varlab_solve_result_converged(
    result: *const VarlabSolveResult,
) -> bool {
    !result.is_null() && (*result).result.converged
}

/// Total accepted descent steps across all stages.
///
/// # Safety
/// `result` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn varlab_solve_result_iterations(
    result: *const VarlabSolveResult,
) -> u64 {
    if result.is_null() {
        return 0;
    }
    (*result).result.iterations
}

/// Max-norm of the final objective gradient.
///
/// # Safety
/// `result` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn varlab_solve_result_grad_norm(
    result: *const VarlabSolveResult,
) -> f64 {
    if result.is_null() {
        return f64::NAN;
    }
    (*result).result.grad_norm
}

/// Energy of the final stage's minimizer.
///
/// # Safety
/// `result` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn varlab_solve_result_energy(result: *const VarlabSolveResult) -> f64 {
    if result.is_null() {
        return f64::NAN;
    }
    (*result).result.per_stage.last().map(|s| s.energy).unwrap_or(f64::NAN)
}

/// Number of nodal values in the solved field.
///
/// # Safety
/// `result` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn varlab_solve_result_node_count(
    result: *const VarlabSolveResult,
) -> usize {
    if result.is_null() {
        return 0;
    }
    (*result).result.field.values().len()
}

/// Copies the solved nodal field (row-major) into a caller buffer.
///
/// # Safety
/// `result` must be a live handle; `buffer` must point to `len` writable
/// doubles with `len` at least the node count.
#[no_mangle]
pub unsafe extern "C" fn varlab_solve_result_copy_field(
    result: *const VarlabSolveResult,
    buffer: *mut f64,
    len: usize,
) -> VarlabStatus {
    if result.is_null() {
        return null_argument("result");
    }
    if buffer.is_null() {
        return null_argument("buffer");
    }
    let values = (*result).result.field.values();
    if len < values.len() {
        set_error(format!("buffer holds {len} doubles, need {}", values.len()));
        return VarlabStatus::InvalidArgument;
    }
    std::slice::from_raw_parts_mut(buffer, values.len()).copy_from_slice(values);
    VarlabStatus::Ok
}

/// Borrowed diagnostic for a non-converged solve, or `NULL` when the solve
/// converged. Valid while the handle lives; do not free.
///
/// # Safety
/// `result` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn varlab_solve_result_diagnostic(
    result: *const VarlabSolveResult,
) -> *const c_char {
    if result.is_null() {
        return std::ptr::null();
    }
    match &(*result).diagnostic {
        Some(s) => s.as_ptr(),
        None => std::ptr::null(),
    }
}

/// Oscillation-decay estimate of the minimizer's gradient regularity at the
/// domain center. `radii` must be strictly decreasing, at least 4 entries,
/// each at least two cell widths.
///
/// # Safety
/// `result` must be a live handle; `radii` must point to `radii_len`
/// readable doubles; out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn varlab_solve_result_holder(
    result: *const VarlabSolveResult,
    radii: *const f64,
    radii_len: usize,
    out_exponent: *mut f64,
    out_quality: *mut f64,
) -> VarlabStatus {
    if result.is_null() {
        return null_argument("result");
    }
    if radii.is_null() {
        return null_argument("radii");
    }
    if out_exponent.is_null() || out_quality.is_null() {
        return null_argument("out_exponent/out_quality");
    }
    let grads = discrete_gradient(&(*result).result.field);
    let radii = std::slice::from_raw_parts(radii, radii_len);
    match holder_exponent(&grads, [0.5, 0.5], radii) {
        Ok(est) => {
            out_exponent.write(est.exponent);
            out_quality.write(est.fit_quality);
            VarlabStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Difference-quotient decay fit on the minimizer. `offsets` holds
/// `offsets_len` rows of two integers (lattice translations); the distinct
/// translation lengths must number at least 4 and span a factor of 4.
/// An exactly regular field reports `s_order = +inf`, `c = 0`.
///
/// # Safety
/// `result` must be a live handle; `offsets` must point to
/// `2 * offsets_len` readable 64-bit integers; out-pointers must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn varlab_solve_result_caccioppoli(
    result: *const VarlabSolveResult,
    p: f64,
    q: f64,
    offsets: *const i64,
    offsets_len: usize,
    out_s_order: *mut f64,
    out_c: *mut f64,
    out_residual: *mut f64,
) -> VarlabStatus {
    if result.is_null() {
        return null_argument("result");
    }
    if offsets.is_null() {
        return null_argument("offsets");
    }
    if out_s_order.is_null() || out_c.is_null() || out_residual.is_null() {
        return null_argument("out_s_order/out_c/out_residual");
    }
    let grads = discrete_gradient(&(*result).result.field);
    let pairs: Vec<(i64, i64)> = std::slice::from_raw_parts(offsets, 2 * offsets_len)
        .chunks_exact(2)
        .map(|c| (c[0], c[1]))
        .collect();
    match fit_caccioppoli(&grads, p, q, &pairs) {
        Ok(fit) => {
            out_s_order.write(fit.s_order);
            out_c.write(fit.c);
            out_residual.write(fit.residual);
            VarlabStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Releases a solve-result handle.
///
/// # Safety
/// `result` must be a live handle from this library or `NULL`; it must not
/// be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn varlab_solve_result_free(result: *mut VarlabSolveResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Opaque claim diagram.
pub struct VarlabDag(ClaimDag);

/// Parses the line-oriented diagram format (`node <id> <label,...>`,
/// `edge <src> <dst> <from=to,...>`).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn varlab_dag_parse(
    text: *const c_char,
    out: *mut *mut VarlabDag,
) -> VarlabStatus {
    if text.is_null() {
        return null_argument("text");
    }
    if out.is_null() {
        return null_argument("out");
    }
    let text = match CStr::from_ptr(text).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("text is not valid UTF-8".into());
            return VarlabStatus::ParseError;
        }
    };
    match parse_dag(text) {
        Ok(dag) => emit(out, VarlabDag(dag)),
        Err(e) => fail(e),
    }
}

/// Settles every claim: rejected ids fail the checker, everything else
/// passes, and rejection propagates to descendants.
///
/// # Safety
/// `dag` must be a live handle; `reject` must point to `reject_len`
/// NUL-terminated strings (or be `NULL` when `reject_len` is 0).
#[no_mangle]
pub unsafe extern "C" fn varlab_dag_validate(
    dag: *mut VarlabDag,
    reject: *const *const c_char,
    reject_len: usize,
) -> VarlabStatus {
    if dag.is_null() {
        return null_argument("dag");
    }
    if reject.is_null() && reject_len > 0 {
        return null_argument("reject");
    }
    let mut rejected = Vec::with_capacity(reject_len);
    for k in 0..reject_len {
        let ptr = *reject.add(k);
        if ptr.is_null() {
            return null_argument("reject[k]");
        }
        match CStr::from_ptr(ptr).to_str() {
            Ok(s) => rejected.push(s.to_owned()),
            Err(_) => {
                set_error(format!("reject[{k}] is not valid UTF-8"));
                return VarlabStatus::ParseError;
            }
        }
    }
    match (*dag).0.validate(|node| !rejected.iter().any(|r| r == node.id())) {
        Ok(()) => VarlabStatus::Ok,
        Err(e) => fail(e),
    }
}

/// Renders the colimit classes of a validated diagram as caller-owned text,
/// one `class <k>: <id>:<label> ...` line per class. Release with
/// [`varlab_string_free`].
///
/// # Safety
/// `dag` must be a live handle; `out_classes` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn varlab_dag_colimit(
    dag: *const VarlabDag,
    out_classes: *mut *mut c_char,
) -> VarlabStatus {
    if dag.is_null() {
        return null_argument("dag");
    }
    if out_classes.is_null() {
        return null_argument("out_classes");
    }
    match (*dag).0.colimit() {
        Ok(result) => {
            let text = format_classes(&result);
            match CString::new(text) {
                Ok(s) => {
                    out_classes.write(s.into_raw());
                    VarlabStatus::Ok
                }
                Err(_) => {
                    set_error("class rendering contained an interior NUL".into());
                    VarlabStatus::Failed
                }
            }
        }
        Err(e) => fail(e),
    }
}

/// Releases a diagram handle.
///
/// # Safety
/// `dag` must be a live handle from this library or `NULL`; it must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn varlab_dag_free(dag: *mut VarlabDag) {
    if !dag.is_null() {
        drop(Box::from_raw(dag));
    }
}
