//! Ordinary least-squares line fits. Every exponent estimate in the crate
//! (ellipticity growth, difference-quotient order, oscillation decay,
//! quadrature convergence) reduces to fitting a line in log-log coordinates,
//! so the regression lives in one place.

/// Result of fitting `y = slope * x + intercept` by least squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination. Defined as 1 when the data has no
    /// vertical spread (a constant is an exact fit).
    pub r_squared: f64,
    /// Root-mean-square vertical residual.
    pub rms_residual: f64,
}

/// Fits a line through `(xs[i], ys[i])`. Returns `None` when fewer than two
/// points are given or all abscissae coincide.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    assert_eq!(xs.len(), ys.len(), "coordinate slices must pair up");
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ss_res = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let r = y - (slope * x + intercept);
        ss_res += r * r;
    }
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Some(LineFit {
        slope,
        intercept,
        r_squared,
        rms_residual: (ss_res / nf).sqrt(),
    })
}

/// Convenience wrapper: fit in log-log coordinates. All inputs must be
/// strictly positive.
pub fn fit_log_log(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    if lx.iter().chain(ly.iter()).any(|v| !v.is_finite()) {
        return None;
    }
    fit_line(&lx, &ly)
}
