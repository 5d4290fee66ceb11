//! Empirical regularity measurements on cell gradient fields: normalized
//! difference-quotient energies of the V_p map, fractional-order fits of
//! their decay under shrinking lattice translations, and local Hoelder
//! exponents of the gradient read off oscillation decay.
//!
//! Balls are realized as concentric axis-aligned squares of cell centers,
//! which makes membership exact on the lattice. The Caccioppoli windows
//! are fixed: inner half-width 0.25, outer half-width 0.45, both about
//! (0.5, 0.5).

use crate::fit::fit_log_log;
use crate::grid::CellGradientField;
use crate::vec2::Vec2;
use crate::{Error, Result};

/// Inner window half-width (difference-quotient side).
pub const INNER_HALF_WIDTH: f64 = 0.25;
/// Outer window half-width (energy side).
pub const OUTER_HALF_WIDTH: f64 = 0.45;
/// Common center of both windows.
pub const WINDOW_CENTER: Vec2 = [0.5, 0.5];

/// Power-law fit of difference-quotient energies against translation
/// length.
#[derive(Debug, Clone, PartialEq)]
pub struct CaccioppoliFit {
    /// Multiplicative constant, normalized by the outer energy so it is
    /// dimensionless; zero under the exact-regularity sentinel.
    pub c: f64,
    /// Fitted fractional order (half the log-log slope); `+inf` when every
    /// difference-quotient energy vanished.
    pub s_order: f64,
    /// RMS residual of the log-log regression.
    pub residual: f64,
    /// Translation lengths used, in domain units.
    pub h_values: Vec<f64>,
}

/// Local gradient-regularity estimate from oscillation decay.
#[derive(Debug, Clone, PartialEq)]
pub struct HolderEstimate {
    /// Fitted oscillation-decay rate, clamped to [0, 1.5]; 1.5 is the
    /// "smoother than measurable at this resolution" sentinel.
    pub exponent: f64,
    /// Coefficient of determination of the log-log fit.
    pub fit_quality: f64,
    /// Ball radii used, strictly decreasing.
    pub radii: Vec<f64>,
}

/// The map `V_p(z) = |z|^{(p-2)/2} z`, which linearizes p-growth energies:
/// `|V_p(z)| = |z|^{p/2}`.
pub fn vp_map(z: Vec2, p: f64) -> Result<Vec2> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::invalid(format!("p = {p} must be finite and exceed 1")));
    }
    let r = z[0].hypot(z[1]);
    if r == 0.0 {
        if p >= 2.0 {
            return Ok([0.0, 0.0]);
        }
        return Err(Error::SingularAtZero { family: "vp_map", mu: 0.0 });
    }
    let w = r.powf((p - 2.0) / 2.0);
    Ok([w * z[0], w * z[1]])
}

fn offset_magnitude(offset: (i64, i64)) -> f64 {
    (offset.0 as f64).hypot(offset.1 as f64)
}

/// Lattice translation difference: entry at cell `c` becomes
/// `field(c + offset) - field(c)`, on the index set where both exist. The
/// returned field keeps honest absolute coordinates via its origin.
pub fn tau_h(field: &CellGradientField, offset: (i64, i64)) -> Result<CellGradientField> {
    if offset == (0, 0) {
        return Err(Error::OffsetOutOfRange(0, 0));
    }
    let (ox, oy) = offset;
    let nx = field.nx() as i64;
    let ny = field.ny() as i64;
    if ox.abs() >= nx || oy.abs() >= ny {
        return Err(Error::OffsetOutOfRange(ox, oy));
    }
    let start_x = (-ox).max(0) as usize;
    let start_y = (-oy).max(0) as usize;
    let new_nx = (nx - ox.abs()) as usize;
    let new_ny = (ny - oy.abs()) as usize;
    let mut data = Vec::with_capacity(new_nx * new_ny);
    for j in 0..new_ny {
        for i in 0..new_nx {
            let base_i = start_x + i;
            let base_j = start_y + j;
            let shifted_i = (base_i as i64 + ox) as usize;
            let shifted_j = (base_j as i64 + oy) as usize;
            let f0 = field.get(base_i, base_j);
            let f1 = field.get(shifted_i, shifted_j);
            data.push([f1[0] - f0[0], f1[1] - f0[1]]);
        }
    }
    let origin = (field.origin().0 + start_x, field.origin().1 + start_y);
    CellGradientField::new(field.spacing(), origin, new_nx, new_ny, data)
}

fn in_window(point: Vec2, half_width: f64) -> bool {
    let slack = 1e-12;
    (point[0] - WINDOW_CENTER[0]).abs() <= half_width + slack
        && (point[1] - WINDOW_CENTER[1]).abs() <= half_width + slack
}

/// Area-weighted difference-quotient energy of the V_p image:
/// `sum over window cells of h^2 |tau_offset V_p(Du)|^2`.
pub fn vp_difference_energy(
    grads: &CellGradientField,
    p: f64,
    offset: (i64, i64),
    half_width: f64,
) -> Result<f64> {
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::invalid(format!("half_width = {half_width} must be positive")));
    }
    let mut vdata = Vec::with_capacity(grads.data().len());
    for g in grads.data() {
        vdata.push(vp_map(*g, p)?);
    }
    let vfield = CellGradientField::new(
        grads.spacing(),
        grads.origin(),
        grads.nx(),
        grads.ny(),
        vdata,
    )?;
    let diff = tau_h(&vfield, offset)?;
    let weight = diff.spacing() * diff.spacing();
    let mut total = 0.0;
    for j in 0..diff.ny() {
        for i in 0..diff.nx() {
            if in_window(diff.center(i, j), half_width) {
                let d = diff.get(i, j);
                total += weight * (d[0] * d[0] + d[1] * d[1]);
            }
        }
    }
    Ok(total)
}

/// Area-weighted growth energy `sum over window cells of h^2 (1 + |Du|^q)`.
pub fn energy_density_sum(grads: &CellGradientField, q: f64, half_width: f64) -> f64 {
    let weight = grads.spacing() * grads.spacing();
    let mut total = 0.0;
    for j in 0..grads.ny() {
        for i in 0..grads.nx() {
            if in_window(grads.center(i, j), half_width) {
                let g = grads.get(i, j);
                total += weight * (1.0 + g[0].hypot(g[1]).powf(q));
            }
        }
    }
    total
}

/// Ratio of the inner difference-quotient energy to the translation-scaled
/// outer growth energy:
/// `sum_{inner} h^2 |tau V_p(Du)|^2  /  (t^{2 s_order} sum_{outer} h^2 (1 + |Du|^q))`
/// with `t` the physical translation length.
pub fn caccioppoli_ratio(
    grads: &CellGradientField,
    p: f64,
    q: f64,
    s_order: f64,
    offset: (i64, i64),
) -> Result<f64> {
    if !(s_order.is_finite() && s_order > 0.0) {
        return Err(Error::invalid(format!("s_order = {s_order} must be positive")));
    }
    if !(q.is_finite() && q > 1.0) {
        return Err(Error::invalid(format!("q = {q} must be finite and exceed 1")));
    }
    let t = offset_magnitude(offset) * grads.spacing();
    if !(t < 0.05) {
        return Err(Error::invalid(format!(
            "translation length {t} must stay below 0.05 for the fixed windows"
        )));
    }
    let lhs = vp_difference_energy(grads, p, offset, INNER_HALF_WIDTH)?;
    let rhs = t.powf(2.0 * s_order) * energy_density_sum(grads, q, OUTER_HALF_WIDTH);
    if !(rhs > 0.0) {
        return Err(Error::DegenerateHessian(rhs));
    }
    Ok(lhs / rhs)
}

/// Fits `log(inner difference energy)` against `log(translation length)`
/// over the given offsets. The fractional order is half the slope; the
/// constant is the exponentiated intercept normalized by the outer growth
/// energy, making it dimensionless. If every difference energy vanishes the
/// exact-regularity sentinel `(c = 0, s_order = +inf)` is returned.
pub fn fit_caccioppoli(
    grads: &CellGradientField,
    p: f64,
    q: f64,
    offsets: &[(i64, i64)],
) -> Result<CaccioppoliFit> {
    let h_values: Vec<f64> =
        offsets.iter().map(|&o| offset_magnitude(o) * grads.spacing()).collect();
    let mut distinct = h_values.clone();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(Error::invalid(format!(
            "need at least 4 distinct translation lengths, got {}",
            distinct.len()
        )));
    }
    let span = distinct.last().unwrap() / distinct.first().unwrap();
    if span < 4.0 - 1e-9 {
        return Err(Error::invalid(format!(
            "translation lengths must span a factor of 4, got {span}"
        )));
    }
    let mut ts = Vec::with_capacity(offsets.len());
    let mut lhs = Vec::with_capacity(offsets.len());
    for (&offset, &t) in offsets.iter().zip(&h_values) {
        let e = vp_difference_energy(grads, p, offset, INNER_HALF_WIDTH)?;
        if e > 0.0 {
            ts.push(t);
            lhs.push(e);
        }
    }
    if ts.len() < 2 {
        return Ok(CaccioppoliFit { c: 0.0, s_order: f64::INFINITY, residual: 0.0, h_values });
    }
    let line = fit_log_log(&ts, &lhs)
        .ok_or_else(|| Error::invalid("degenerate translation lengths in regression"))?;
    let outer = energy_density_sum(grads, q, OUTER_HALF_WIDTH);
    Ok(CaccioppoliFit {
        c: line.intercept.exp() / outer,
        s_order: line.slope / 2.0,
        residual: line.rms_residual,
        h_values,
    })
}

/// Estimates the local Hoelder exponent of the gradient at `center` from
/// the decay of component oscillations over shrinking square balls.
/// `radii` must be strictly decreasing, contain at least 4 entries, and
/// stay at or above two cell widths. Zero oscillation everywhere yields the
/// sentinel exponent 1.5 with perfect fit quality.
pub fn holder_exponent(
    grads: &CellGradientField,
    center: Vec2,
    radii: &[f64],
) -> Result<HolderEstimate> {
    if radii.len() < 4 {
        return Err(Error::invalid(format!("need at least 4 radii, got {}", radii.len())));
    }
    for w in radii.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::invalid(format!(
                "radii must decrease strictly, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    let min_radius = 2.0 * grads.spacing();
    for &r in radii {
        if !(r.is_finite() && r >= min_radius) {
            return Err(Error::invalid(format!(
                "radius {r} must be at least two cell widths ({min_radius})"
            )));
        }
    }
    let mut rs = Vec::with_capacity(radii.len());
    let mut oscs = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        let mut seen = false;
        for j in 0..grads.ny() {
            for i in 0..grads.nx() {
                let c = grads.center(i, j);
                if (c[0] - center[0]).abs() <= r && (c[1] - center[1]).abs() <= r {
                    let g = grads.get(i, j);
                    for k in 0..2 {
                        lo[k] = lo[k].min(g[k]);
                        hi[k] = hi[k].max(g[k]);
                    }
                    seen = true;
                }
            }
        }
        if !seen {
            return Err(Error::invalid(format!("radius {r} captures no cells")));
        }
        let osc = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        if osc > 0.0 {
            rs.push(r);
            oscs.push(osc);
        }
    }
    if rs.len() < 2 {
        return Ok(HolderEstimate { exponent: 1.5, fit_quality: 1.0, radii: radii.to_vec() });
    }
    let line = fit_log_log(&rs, &oscs)
        .ok_or_else(|| Error::invalid("degenerate radii in oscillation regression"))?;
    Ok(HolderEstimate {
        exponent: line.slope.clamp(0.0, 1.5),
        fit_quality: line.r_squared,
        radii: radii.to_vec(),
    })
}
