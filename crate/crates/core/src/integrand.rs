//! Energy densities `rho(x, z) = c(x) G(z)` with controlled growth, their
//! first two z-derivatives, and the ellipticity ratio.
//!
//! Three families are supported:
//!
//! * `PPower(p)`: `(a(x) + eps) * m^p`,
//! * `DoublePhase(p, q)`: `m^p + (a(x) + eps) * m^q`,
//! * `LogMultiphase(q, s)`:
//!   `m * ln(1 + m) + (a(x) + eps) * |z|^q + (b(x) + eps) * |z|^s`,
//!
//! where `m = sqrt(|z|^2 + mu^2)` is the regularized gradient modulus. The
//! pair `(eps, mu)` is the ghost regularization: `eps` lifts the modulating
//! coefficients away from zero, `mu` smooths the modulus. Note that in the
//! log-multiphase family the two phase powers act on the raw `|z|`, so a
//! positive `mu` smooths only the log-linear part; with a sub-quadratic
//! phase power the Hessian at `z = 0` stays unbounded and is rejected.
//!
//! Derivatives of a radial term `phi(r(z))` use `grad = (phi'(r)/r) z` and
//! `hess = (phi''(r) - phi'(r)/r) (z x z)/r^2 + (phi'(r)/r) I`, which stays
//! finite at `z = 0` whenever the term is twice differentiable there.

use crate::vec2::{norm, Vec2};
use crate::{Error, Result};

/// Growth family of an [`IntegrandSpec`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    PPower { p: f64 },
    DoublePhase { p: f64, q: f64 },
    LogMultiphase { q: f64, s: f64 },
}

impl Family {
    fn name(&self) -> &'static str {
        match self {
            Family::PPower { .. } => "p_power",
            Family::DoublePhase { .. } => "double_phase",
            Family::LogMultiphase { .. } => "log_multiphase",
        }
    }
}

/// A density specification: growth family plus ghost regularization.
///
/// Invariants: `PPower` needs `p > 1`; `DoublePhase` needs `1 < p <= q`;
/// `LogMultiphase` needs `q > 1` and `s > 1`; `mu >= 0`, `eps >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrandSpec {
    family: Family,
    mu: f64,
    eps: f64,
}

impl IntegrandSpec {
    pub fn p_power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::invalid(format!("p = {p} must be finite and exceed 1")));
        }
        Ok(IntegrandSpec { family: Family::PPower { p }, mu: 0.0, eps: 0.0 })
    }

    pub fn double_phase(p: f64, q: f64) -> Result<Self> {
        if !(p.is_finite() && q.is_finite() && p > 1.0 && q >= p) {
            return Err(Error::invalid(format!(
                "double phase needs 1 < p <= q, got p = {p}, q = {q}"
            )));
        }
        Ok(IntegrandSpec { family: Family::DoublePhase { p, q }, mu: 0.0, eps: 0.0 })
    }

    pub fn log_multiphase(q: f64, s: f64) -> Result<Self> {
        if !(q.is_finite() && s.is_finite() && q > 1.0 && s > 1.0) {
            return Err(Error::invalid(format!(
                "log multiphase needs q > 1 and s > 1, got q = {q}, s = {s}"
            )));
        }
        Ok(IntegrandSpec { family: Family::LogMultiphase { q, s }, mu: 0.0, eps: 0.0 })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// The largest growth exponent, used for right-hand energy weights.
    pub fn top_exponent(&self) -> f64 {
        match self.family {
            Family::PPower { p } => p,
            Family::DoublePhase { q, .. } => q,
            Family::LogMultiphase { q, s } => q.max(s),
        }
    }

    /// The coercive base exponent.
    pub fn base_exponent(&self) -> f64 {
        match self.family {
            Family::PPower { p } => p,
            Family::DoublePhase { p, .. } => p,
            // The log-linear floor is just above linear growth.
            Family::LogMultiphase { .. } => 1.0,
        }
    }
}

/// Returns a copy of `spec` with the ghost regularization set to
/// `(eps, mu)`. Raising `eps` raises the density pointwise; raising `mu`
/// smooths the modulus.
pub fn ghost_regularize(spec: &IntegrandSpec, eps: f64, mu: f64) -> Result<IntegrandSpec> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::invalid(format!("eps = {eps} must be finite and nonnegative")));
    }
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(Error::invalid(format!("mu = {mu} must be finite and nonnegative")));
    }
    Ok(IntegrandSpec { family: spec.family, mu, eps })
}

/// Scalar coefficient field on the closed unit square. All variants are
/// nonnegative and Hoelder continuous with the stated exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientField {
    /// Identically `value`.
    Constant { value: f64 },
    /// `amplitude * |x1 - offset|^alpha`: vanishes on the vertical line
    /// `x1 = offset`, Hoelder seminorm exactly `amplitude`.
    DistancePower { alpha: f64, amplitude: f64, offset: f64 },
    /// `amplitude * (1 + tanh((x1 - center)/width)) / 2`: a smooth ramp from
    /// 0 to `amplitude`; `alpha` records the exponent it is used as.
    SmoothedStep { alpha: f64, amplitude: f64, center: f64, width: f64 },
}

impl CoefficientField {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::invalid(format!("coefficient value = {value} must be >= 0")));
        }
        Ok(CoefficientField::Constant { value })
    }

    pub fn distance_power(alpha: f64, amplitude: f64, offset: f64) -> Result<Self> {
        check_alpha_amplitude(alpha, amplitude)?;
        if !offset.is_finite() {
            return Err(Error::invalid("offset must be finite"));
        }
        Ok(CoefficientField::DistancePower { alpha, amplitude, offset })
    }

    pub fn smoothed_step(alpha: f64, amplitude: f64, center: f64, width: f64) -> Result<Self> {
        check_alpha_amplitude(alpha, amplitude)?;
        if !(center.is_finite() && width.is_finite() && width > 0.0) {
            return Err(Error::invalid("center must be finite and width positive"));
        }
        Ok(CoefficientField::SmoothedStep { alpha, amplitude, center, width })
    }

    /// The zero field.
    pub fn zero() -> Self {
        CoefficientField::Constant { value: 0.0 }
    }

    /// The unit field.
    pub fn one() -> Self {
        CoefficientField::Constant { value: 1.0 }
    }

    pub fn eval(&self, x: Vec2) -> f64 {
        match *self {
            CoefficientField::Constant { value } => value,
            CoefficientField::DistancePower { alpha, amplitude, offset } => {
                amplitude * (x[0] - offset).abs().powf(alpha)
            }
            CoefficientField::SmoothedStep { alpha: _, amplitude, center, width } => {
                amplitude * 0.5 * (1.0 + ((x[0] - center) / width).tanh())
            }
        }
    }

    /// The Hoelder exponent this field is declared with.
    pub fn holder_alpha(&self) -> f64 {
        match *self {
            CoefficientField::Constant { .. } => 1.0,
            CoefficientField::DistancePower { alpha, .. } => alpha,
            CoefficientField::SmoothedStep { alpha, .. } => alpha,
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            CoefficientField::Constant { value } => value,
            CoefficientField::DistancePower { amplitude, .. } => amplitude,
            CoefficientField::SmoothedStep { amplitude, .. } => amplitude,
        }
    }
}

fn check_alpha_amplitude(alpha: f64, amplitude: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("alpha = {alpha} must lie in (0, 1]")));
    }
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(Error::invalid(format!("amplitude = {amplitude} must be >= 0")));
    }
    Ok(())
}

/// Symmetric 2x2 matrix, the z-Hessian of a density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymMat2 {
    /// Eigenvalues as `(min, max)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mid = 0.5 * (self.xx + self.yy);
        let d = 0.5 * (self.xx - self.yy).hypot(2.0 * self.xy);
        (mid - d, mid + d)
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        [self.xx * v[0] + self.xy * v[1], self.xy * v[0] + self.yy * v[1]]
    }
}

/// `phi'(r)/r` and `phi''(r)` of a radial profile at radius `r`.
struct Radial {
    w: f64,
    phi2: f64,
}

fn power_radial(k: f64, r: f64) -> Radial {
    // powf(0, 0) = 1 makes the k = 2 row exact at r = 0; k < 2 at r = 0 is
    // guarded by the singularity checks before this is called.
    let rk2 = r.powf(k - 2.0);
    Radial { w: k * rk2, phi2: k * (k - 1.0) * rk2 }
}

fn loglin_radial(r: f64) -> Radial {
    let u = 1.0 + r;
    let w = if r == 0.0 { 2.0 } else { (r.ln_1p() + r / u) / r };
    Radial { w, phi2: 1.0 / u + 1.0 / (u * u) }
}

fn check_domain(x: Vec2) -> Result<()> {
    if x[0] >= 0.0 && x[0] <= 1.0 && x[1] >= 0.0 && x[1] <= 1.0 {
        Ok(())
    } else {
        Err(Error::OutsideDomain(x[0], x[1]))
    }
}

/// Smallest power exponent that actually appears as a z-power term.
fn min_power_exponent(spec: &IntegrandSpec) -> f64 {
    match spec.family {
        Family::PPower { p } => p,
        Family::DoublePhase { p, q } => p.min(q),
        Family::LogMultiphase { q, s } => q.min(s),
    }
}

fn singular_grad_at_zero(spec: &IntegrandSpec) -> bool {
    spec.mu == 0.0 && min_power_exponent(spec) < 2.0
}

fn singular_hess_at_zero(spec: &IntegrandSpec) -> bool {
    match spec.family {
        // Regularized-modulus families are C^2 at z = 0 whenever mu > 0.
        Family::PPower { p } => spec.mu == 0.0 && p < 2.0,
        Family::DoublePhase { p, q } => spec.mu == 0.0 && p.min(q) < 2.0,
        // The raw phase powers ignore mu.
        Family::LogMultiphase { q, s } => q.min(s) < 2.0,
    }
}

/// Evaluates the density at spatial point `x` (inside the closed unit
/// square) and gradient `z`.
pub fn eval_density(
    spec: &IntegrandSpec,
    a: &CoefficientField,
    b: &CoefficientField,
    x: Vec2,
    z: Vec2,
) -> Result<f64> {
    check_domain(x)?;
    if !(z[0].is_finite() && z[1].is_finite()) {
        return Err(Error::invalid("gradient must be finite"));
    }
    let m = (z[0] * z[0] + z[1] * z[1] + spec.mu * spec.mu).sqrt();
    Ok(match spec.family {
        Family::PPower { p } => (a.eval(x) + spec.eps) * m.powf(p),
        Family::DoublePhase { p, q } => m.powf(p) + (a.eval(x) + spec.eps) * m.powf(q),
        Family::LogMultiphase { q, s } => {
            let r = norm(z);
            m * m.ln_1p() + (a.eval(x) + spec.eps) * r.powf(q) + (b.eval(x) + spec.eps) * r.powf(s)
        }
    })
}

/// Gradient of the density in `z`.
///
/// At `z = 0` the gradient exists and is zero whenever `mu > 0` (the
/// sub-quadratic raw phase terms take their limit value); with `mu = 0` a
/// family containing a power below 2 is rejected as singular.
pub fn grad_density(
    spec: &IntegrandSpec,
    a: &CoefficientField,
    b: &CoefficientField,
    x: Vec2,
    z: Vec2,
) -> Result<Vec2> {
    check_domain(x)?;
    if z == [0.0, 0.0] && singular_grad_at_zero(spec) {
        return Err(Error::SingularAtZero { family: spec.family.name(), mu: spec.mu });
    }
    let m = (z[0] * z[0] + z[1] * z[1] + spec.mu * spec.mu).sqrt();
    // Weight such that grad = weight * z.
    let weight = match spec.family {
        Family::PPower { p } => (a.eval(x) + spec.eps) * power_radial(p, m).w,
        Family::DoublePhase { p, q } => {
            power_radial(p, m).w + (a.eval(x) + spec.eps) * power_radial(q, m).w
        }
        Family::LogMultiphase { q, s } => {
            let r = norm(z);
            let phase = |k: f64, c: f64| {
                if r == 0.0 && k < 2.0 {
                    // Sub-quadratic phase gradient vanishes in the limit.
                    0.0
                } else {
                    c * power_radial(k, r).w
                }
            };
            loglin_radial(m).w + phase(q, a.eval(x) + spec.eps) + phase(s, b.eval(x) + spec.eps)
        }
    };
    Ok([weight * z[0], weight * z[1]])
}

/// Hessian of the density in `z`.
pub fn hess_density(
    spec: &IntegrandSpec,
    a: &CoefficientField,
    b: &CoefficientField,
    x: Vec2,
    z: Vec2,
) -> Result<SymMat2> {
    check_domain(x)?;
    if z == [0.0, 0.0] && singular_hess_at_zero(spec) {
        return Err(Error::SingularAtZero { family: spec.family.name(), mu: spec.mu });
    }
    let m = (z[0] * z[0] + z[1] * z[1] + spec.mu * spec.mu).sqrt();

    // Accumulate sum of coeff * [ (phi2 - w) (z x z)/r^2 + w I ] over terms.
    let mut aniso = 0.0; // sum coeff * (phi2 - w) / r^2
    let mut iso = 0.0; // sum coeff * w
    let mut add = |coeff: f64, rad: &Radial, r: f64| {
        iso += coeff * rad.w;
        if r > 0.0 {
            aniso += coeff * (rad.phi2 - rad.w) / (r * r);
        }
        // r = 0 means z = 0: the anisotropic part carries a zero factor.
    };
    match spec.family {
        Family::PPower { p } => add(a.eval(x) + spec.eps, &power_radial(p, m), m),
        Family::DoublePhase { p, q } => {
            add(1.0, &power_radial(p, m), m);
            add(a.eval(x) + spec.eps, &power_radial(q, m), m);
        }
        Family::LogMultiphase { q, s } => {
            let r = norm(z);
            add(1.0, &loglin_radial(m), m);
            add(a.eval(x) + spec.eps, &power_radial(q, r), r);
            add(b.eval(x) + spec.eps, &power_radial(s, r), r);
        }
    }
    Ok(SymMat2 {
        xx: aniso * z[0] * z[0] + iso,
        xy: aniso * z[0] * z[1],
        yy: aniso * z[1] * z[1] + iso,
    })
}

/// Ellipticity ratio at `(x, z)`: the largest Hessian eigenvalue divided by
/// the smallest eigenvalue of the coercive base phase at the same `z`.
///
/// The base phase is the term that survives where the modulating
/// coefficients vanish: the p-power term for `DoublePhase`, the log-linear
/// term for `LogMultiphase`, and the full (single-term) density for
/// `PPower`, where the ratio reduces to the plain eigenvalue ratio. This is
/// the pointwise analogue of comparing the most and least elliptic spatial
/// points, which is what degrades as the coefficient crosses zero; for a
/// double-phase density with positive coefficient it grows like `|z|^(q-p)`.
pub fn ellipticity_ratio(
    spec: &IntegrandSpec,
    a: &CoefficientField,
    b: &CoefficientField,
    x: Vec2,
    z: Vec2,
) -> Result<f64> {
    const DEGENERATE_TOL: f64 = 1e-12;
    let h = hess_density(spec, a, b, x, z)?;
    let (lmin_full, lmax) = h.eigenvalues();
    if !(lmin_full > DEGENERATE_TOL) {
        return Err(Error::DegenerateHessian(lmin_full));
    }
    let m = (z[0] * z[0] + z[1] * z[1] + spec.mu * spec.mu).sqrt();
    let floor = match spec.family {
        Family::PPower { .. } => lmin_full,
        Family::DoublePhase { p, .. } => {
            let rad = power_radial(p, m);
            rad.w.min(rad.phi2)
        }
        Family::LogMultiphase { .. } => {
            let rad = loglin_radial(m);
            rad.w.min(rad.phi2)
        }
    };
    if !(floor > DEGENERATE_TOL) {
        return Err(Error::DegenerateHessian(floor));
    }
    Ok(lmax / floor)
}
