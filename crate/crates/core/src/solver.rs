//! Minimization of discrete integral energies over nodal fields with fixed
//! boundary values.
//!
//! The objective is the midpoint-rule energy from [`crate::grid::integrate`].
//! Its gradient with respect to the interior node values is assembled cell
//! by cell: each cell contributes `(h/2) * (+-gx +- gy)` to its four
//! corners, where `(gx, gy)` is the density gradient at the cell center.
//!
//! Minimization is first-order descent: search directions come from a
//! small-memory quasi-Newton recursion on gradients only (no Hessians,
//! which degenerate where a modulating coefficient vanishes), and steps are
//! accepted under the Armijo condition with geometric backtracking, so the
//! energy history is strictly decreasing until the gradient tolerance is
//! met. The initial guess is the discrete harmonic extension of the
//! boundary data, computed by conjugate gradients on the five-point
//! Laplacian.
//!
//! [`ghost_continuation`] chains stages over the `(eps, mu)` schedule in
//! the config, warm-starting each stage from the previous minimizer.

use std::collections::VecDeque;

use crate::grid::{discrete_gradient, integrate, DiscreteField, Grid};
use crate::integrand::{
    eval_density, ghost_regularize, grad_density, CoefficientField, IntegrandSpec,
};
use crate::{Error, Result};

/// Descent and continuation parameters.
///
/// `continuation` is the ghost-regularization schedule: `(eps, mu)` pairs,
/// strictly decreasing in lexicographic order, ending at the target
/// regularization. Plain [`minimize`] ignores it and solves at the spec's
/// own regularization.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    tol_grad: f64,
    max_iters: u64,
    armijo_c: f64,
    backtrack_factor: f64,
    continuation: Vec<(f64, f64)>,
}

impl SolveConfig {
    pub fn new(
        tol_grad: f64,
        max_iters: u64,
        armijo_c: f64,
        backtrack_factor: f64,
        continuation: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if !(tol_grad.is_finite() && tol_grad > 0.0) {
            return Err(Error::invalid(format!("tol_grad = {tol_grad} must be positive")));
        }
        if max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if !(armijo_c > 0.0 && armijo_c < 1.0) {
            return Err(Error::invalid(format!("armijo_c = {armijo_c} must lie in (0, 1)")));
        }
        if !(backtrack_factor > 0.0 && backtrack_factor < 1.0) {
            return Err(Error::invalid(format!(
                "backtrack_factor = {backtrack_factor} must lie in (0, 1)"
            )));
        }
        validate_schedule(&continuation)?;
        Ok(SolveConfig { tol_grad, max_iters, armijo_c, backtrack_factor, continuation })
    }

    /// A single-stage config at regularization `(0, 0)` with standard line
    /// search constants.
    pub fn single_stage(tol_grad: f64, max_iters: u64) -> Result<Self> {
        SolveConfig::new(tol_grad, max_iters, 1e-4, 0.5, vec![(0.0, 0.0)])
    }

    pub fn tol_grad(&self) -> f64 {
        self.tol_grad
    }

    pub fn max_iters(&self) -> u64 {
        self.max_iters
    }

    pub fn armijo_c(&self) -> f64 {
        self.armijo_c
    }

    pub fn backtrack_factor(&self) -> f64 {
        self.backtrack_factor
    }

    pub fn continuation(&self) -> &[(f64, f64)] {
        &self.continuation
    }
}

fn validate_schedule(schedule: &[(f64, f64)]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::invalid("continuation schedule must contain at least one stage"));
    }
    for &(eps, mu) in schedule {
        if !(eps.is_finite() && eps >= 0.0 && mu.is_finite() && mu >= 0.0) {
            return Err(Error::invalid(format!(
                "schedule entries must be finite and nonnegative, got ({eps}, {mu})"
            )));
        }
    }
    for w in schedule.windows(2) {
        let (e0, m0) = w[0];
        let (e1, m1) = w[1];
        let lex_decreasing = e1 < e0 || (e1 == e0 && m1 < m0);
        if !lex_decreasing {
            return Err(Error::invalid(format!(
                "schedule must decrease strictly in lexicographic order, got ({e0}, {m0}) then ({e1}, {m1})"
            )));
        }
    }
    Ok(())
}

/// Outcome of one continuation stage: the regularization used and the final
/// energy reached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageRecord {
    pub eps: f64,
    pub mu: f64,
    pub energy: f64,
}

/// Minimization outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// Final nodal field, boundary values intact.
    pub field: DiscreteField,
    /// Energy after the initial guess and after every accepted step, across
    /// all stages.
    pub energy_history: Vec<f64>,
    /// Max-norm of the final objective gradient.
    pub grad_norm: f64,
    /// Total accepted descent steps.
    pub iterations: u64,
    /// Whether every stage reached its gradient tolerance.
    pub converged: bool,
    /// One record per started stage.
    pub per_stage: Vec<StageRecord>,
    /// Human-readable failure detail when a stage had to stop early.
    pub diagnostic: Option<String>,
}

fn energy_and_gradient(
    spec: &IntegrandSpec,
    a: &CoefficientField,
    b: &CoefficientField,
    field: &DiscreteField,
) -> Result<(f64, Vec<f64>)> {
    let grid = field.grid();
    let m = grid.m();
    let h = grid.h();
    let half_h = 0.5 * h;
    let weight = h * h;
    let mut energy = 0.0;
    let mut grad = vec![0.0f64; grid.node_count()];
    for j in 0..m {
        for i in 0..m {
            let v00 = field.get(i, j);
            let v10 = field.get(i + 1, j);
            let v01 = field.get(i, j + 1);
            let v11 = field.get(i + 1, j + 1);
            let gx = ((v10 - v00) + (v11 - v01)) / (2.0 * h);
            let gy = ((v01 - v00) + (v11 - v10)) / (2.0 * h);
            let center = grid.cell_center(i, j);
            energy += weight * eval_density(spec, a, b, center, [gx, gy])?;
            let dz = grad_density(spec, a, b, center, [gx, gy])?;
            grad[grid.node_index(i, j)] += half_h * (-dz[0] - dz[1]);
            grad[grid.node_index(i + 1, j)] += half_h * (dz[0] - dz[1]);
            grad[grid.node_index(i, j + 1)] += half_h * (-dz[0] + dz[1]);
            grad[grid.node_index(i + 1, j + 1)] += half_h * (dz[0] + dz[1]);
        }
    }
    for j in 0..=m {
        for i in 0..=m {
            if grid.is_boundary(i, j) {
                grad[grid.node_index(i, j)] = 0.0;
            }
        }
    }
    Ok((energy, grad))
}

/// Gradient of the discrete energy with respect to the node values, as a
/// nodal field; boundary entries are zero since boundary values are fixed.
pub fn assemble_objective_gradient(
    spec: &IntegrandSpec,
    a: &CoefficientField,
    b: &CoefficientField,
    field: &DiscreteField,
) -> Result<DiscreteField> {
    let (_, grad) = energy_and_gradient(spec, a, b, field)?;
    DiscreteField::from_values(field.grid(), grad)
}

/// Discrete harmonic extension: keeps the rim values of `boundary` and
/// fills the interior by solving the five-point Laplace equation with
/// conjugate gradients driven to near machine precision.
pub fn harmonic_extension(grid: Grid, boundary: &DiscreteField) -> Result<DiscreteField> {
    if boundary.grid() != grid {
        return Err(Error::grid("boundary field and grid sizes disagree"));
    }
    for v in boundary.values() {
        if !v.is_finite() {
            return Err(Error::invalid("boundary values must be finite"));
        }
    }
    let m = grid.m();
    let n = m - 1;
    let mut field = DiscreteField::zeros(grid);
    field.apply_boundary(|x| {
        let i = (x[0] * m as f64).round() as usize;
        let j = (x[1] * m as f64).round() as usize;
        boundary.get(i, j)
    });

    let idx = |i: usize, j: usize| (j - 1) * n + (i - 1);
    let mut rhs = vec![0.0f64; n * n];
    for j in 1..m {
        for i in 1..m {
            let mut s = 0.0;
            for (ni, nj) in [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)] {
                if grid.is_boundary(ni, nj) {
                    s += field.get(ni, nj);
                }
            }
            rhs[idx(i, j)] = s;
        }
    }

    let apply = |u: &[f64], out: &mut [f64]| {
        for j in 1..m {
            for i in 1..m {
                let mut v = 4.0 * u[idx(i, j)];
                if i > 1 {
                    v -= u[idx(i - 1, j)];
                }
                if i < m - 1 {
                    v -= u[idx(i + 1, j)];
                }
                if j > 1 {
                    v -= u[idx(i, j - 1)];
                }
                if j < m - 1 {
                    v -= u[idx(i, j + 1)];
                }
                out[idx(i, j)] = v;
            }
        }
    };

    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let rhs_norm = dot(&rhs, &rhs).sqrt();
    let mut x = vec![0.0f64; n * n];
    if rhs_norm > 0.0 {
        let tol = 1e-13 * rhs_norm;
        let mut r = rhs.clone();
        let mut p = r.clone();
        let mut ap = vec![0.0f64; n * n];
        let mut rr = dot(&r, &r);
        let max_cg = 40 * (m + 1);
        for _ in 0..max_cg {
            if rr.sqrt() <= tol {
                break;
            }
            apply(&p, &mut ap);
            let alpha = rr / dot(&p, &ap);
            for k in 0..x.len() {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            let rr_new = dot(&r, &r);
            let beta = rr_new / rr;
            rr = rr_new;
            for k in 0..p.len() {
                p[k] = r[k] + beta * p[k];
            }
        }
    }
    for j in 1..m {
        for i in 1..m {
            field.set(i, j, x[idx(i, j)]);
        }
    }
    Ok(field)
}

struct StageOutcome {
    energy: f64,
    grad_norm: f64,
    iterations: u64,
    converged: bool,
    diagnostic: Option<String>,
}

/// Small-memory quasi-Newton direction from stored (step, gradient change)
/// pairs; falls back to steepest descent with an empty memory.
struct DirectionMemory {
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
    capacity: usize,
}

impl DirectionMemory {
    fn new(capacity: usize) -> Self {
        DirectionMemory { pairs: VecDeque::new(), capacity }
    }

    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        let sy = dot(&s, &y);
        if sy > 0.0 && sy.is_finite() {
            if self.pairs.len() == self.capacity {
                self.pairs.pop_front();
            }
            self.pairs.push_back((s, y, 1.0 / sy));
        }
    }

    fn direction(&self, grad: &[f64]) -> Vec<f64> {
        let mut q: Vec<f64> = grad.iter().map(|g| -g).collect();
        if self.pairs.is_empty() {
            return q;
        }
        let mut alphas = vec![0.0f64; self.pairs.len()];
        for (k, (s, y, rho)) in self.pairs.iter().enumerate().rev() {
            let alpha = rho * dot(s, &q);
            alphas[k] = alpha;
            for i in 0..q.len() {
                q[i] -= alpha * y[i];
            }
        }
        let (s_last, y_last, _) = self.pairs.back().unwrap();
        let gamma = dot(s_last, y_last) / dot(y_last, y_last);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
        for (k, (s, y, rho)) in self.pairs.iter().enumerate() {
            let beta = rho * dot(y, &q);
            let coeff = alphas[k] - beta;
            for i in 0..q.len() {
                q[i] += coeff * s[i];
            }
        }
        q
    }

    fn reset(&mut self) {
        self.pairs.clear();
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// One descent stage on `field` in place, appending to `history`.
fn descend_stage(
    spec: &IntegrandSpec,
    a: &CoefficientField,
    b: &CoefficientField,
    field: &mut DiscreteField,
    config: &SolveConfig,
    history: &mut Vec<f64>,
) -> Result<StageOutcome> {
    const MAX_HALVINGS: u32 = 60;

    let (mut energy, mut grad) = energy_and_gradient(spec, a, b, field)?;
    history.push(energy);
    let mut grad_norm = max_abs(&grad);
    let mut memory = DirectionMemory::new(10);
    let mut iterations = 0u64;
    let mut trial = field.clone();

    while grad_norm > config.tol_grad {
        if iterations >= config.max_iters {
            return Ok(StageOutcome {
                energy,
                grad_norm,
                iterations,
                converged: false,
                diagnostic: Some(format!(
                    "iteration budget {} exhausted with gradient norm {grad_norm:e}",
                    config.max_iters
                )),
            });
        }
        let mut dir = memory.direction(&grad);
        let mut slope = dot(&grad, &dir);
        if !(slope < 0.0) {
            memory.reset();
            dir = grad.iter().map(|g| -g).collect();
            slope = -dot(&grad, &grad);
        }
        let mut t = 1.0f64;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let tv = trial.values_mut();
            let fv = field.values();
            for k in 0..fv.len() {
                tv[k] = fv[k] + t * dir[k];
            }
            let e_new = integrate(spec, a, b, &trial)?;
            // Written as a difference so a sub-ulp sufficient-decrease bound
            // is not absorbed into the energy, which would accept
            // zero-progress steps.
            if e_new - energy <= config.armijo_c * t * slope {
                accepted = true;
                break;
            }
            t *= config.backtrack_factor;
        }
        if !accepted {
            return Ok(StageOutcome {
                energy,
                grad_norm,
                iterations,
                converged: false,
                diagnostic: Some(format!(
                    "line search stalled after {iterations} steps at gradient norm {grad_norm:e}"
                )),
            });
        }
        std::mem::swap(field, &mut trial);
        let (e_new, grad_new) = energy_and_gradient(spec, a, b, field)?;
        history.push(e_new);
        energy = e_new;
        iterations += 1;

        let s: Vec<f64> = dir.iter().map(|d| t * d).collect();
        let y: Vec<f64> = grad_new.iter().zip(&grad).map(|(gn, go)| gn - go).collect();
        memory.push(s, y);
        grad = grad_new;
        grad_norm = max_abs(&grad);
    }
    Ok(StageOutcome { energy, grad_norm, iterations, converged: true, diagnostic: None })
}

/// Minimizes the energy starting from the given field, holding its boundary
/// values fixed. Solves at the spec's own regularization.
pub fn minimize_from(
    spec: &IntegrandSpec,
    a: &CoefficientField,
    b: &CoefficientField,
    initial: DiscreteField,
    config: &SolveConfig,
) -> Result<SolveResult> {
    let mut field = initial;
    let mut history = Vec::new();
    let outcome = descend_stage(spec, a, b, &mut field, config, &mut history)?;
    Ok(SolveResult {
        field,
        energy_history: history,
        grad_norm: outcome.grad_norm,
        iterations: outcome.iterations,
        converged: outcome.converged,
        per_stage: vec![StageRecord { eps: spec.eps(), mu: spec.mu(), energy: outcome.energy }],
        diagnostic: outcome.diagnostic,
    })
}

/// Minimizes the energy over fields that agree with `boundary` on the rim,
/// starting from its discrete harmonic extension. Solves at the spec's own
/// regularization; the continuation schedule in `config` is not consulted.
pub fn minimize(
    spec: &IntegrandSpec,
    a: &CoefficientField,
    b: &CoefficientField,
    grid: Grid,
    boundary: &DiscreteField,
    config: &SolveConfig,
) -> Result<SolveResult> {
    let initial = harmonic_extension(grid, boundary)?;
    minimize_from(spec, a, b, initial, config)
}

/// Runs one minimization stage per `(eps, mu)` entry of the continuation
/// schedule in `config`, warm-starting each stage from the previous
/// minimizer. Stops after the first stage that fails to converge;
/// `per_stage` then covers only the started stages.
pub fn ghost_continuation(
    spec: &IntegrandSpec,
    a: &CoefficientField,
    b: &CoefficientField,
    grid: Grid,
    boundary: &DiscreteField,
    config: &SolveConfig,
) -> Result<SolveResult> {
    let mut field = harmonic_extension(grid, boundary)?;
    let mut history = Vec::new();
    let mut per_stage = Vec::new();
    let mut iterations = 0u64;
    let mut grad_norm = f64::INFINITY;
    let mut converged = true;
    let mut diagnostic = None;
    for &(eps, mu) in config.continuation() {
        let stage_spec = ghost_regularize(spec, eps, mu)?;
        let outcome = descend_stage(&stage_spec, a, b, &mut field, config, &mut history)?;
        iterations += outcome.iterations;
        grad_norm = outcome.grad_norm;
        per_stage.push(StageRecord { eps, mu, energy: outcome.energy });
        if !outcome.converged {
            converged = false;
            diagnostic =
                outcome.diagnostic.map(|d| format!("stage (eps = {eps}, mu = {mu}): {d}"));
            break;
        }
    }
    Ok(SolveResult {
        field,
        energy_history: history,
        grad_norm,
        iterations,
        converged,
        per_stage,
        diagnostic,
    })
}

/// Occupancy of one gradient-magnitude band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientBand {
    /// Inclusive lower edge.
    pub lower: f64,
    /// Exclusive upper edge; infinite for the last band.
    pub upper: f64,
    /// Number of cells whose gradient magnitude falls in the band.
    pub count: usize,
    /// Midpoint-rule energy carried by those cells.
    pub energy: f64,
    /// Largest gradient magnitude seen in the band; zero when empty.
    pub max_grad: f64,
}

/// Partition of the cells of a field by gradient magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitBounds {
    /// Band edges as given, starting at 0.
    pub thresholds: Vec<f64>,
    /// One band per threshold; the last band is unbounded above.
    pub bands: Vec<GradientBand>,
}

/// Splits the cells of a field by gradient magnitude into the half-open
/// bands defined by `thresholds`, which must start at 0 and increase
/// strictly; the last band is unbounded. The per-band cell counts and
/// energy shares partition the totals.
pub fn split_gradient_bounds(
    spec: &IntegrandSpec,
    a: &CoefficientField,
    b: &CoefficientField,
    field: &DiscreteField,
    thresholds: &[f64],
) -> Result<SplitBounds> {
    if thresholds.first() != Some(&0.0) {
        return Err(Error::invalid("thresholds must start at 0"));
    }
    for w in thresholds.windows(2) {
        if !(w[1].is_finite() && w[1] > w[0]) {
            return Err(Error::invalid(format!(
                "thresholds must increase strictly, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    let grid = field.grid();
    let h = grid.h();
    let weight = h * h;
    let grads = discrete_gradient(field);
    let mut bands: Vec<GradientBand> = thresholds
        .iter()
        .enumerate()
        .map(|(k, &lo)| GradientBand {
            lower: lo,
            upper: thresholds.get(k + 1).copied().unwrap_or(f64::INFINITY),
            count: 0,
            energy: 0.0,
            max_grad: 0.0,
        })
        .collect();
    for j in 0..grid.m() {
        for i in 0..grid.m() {
            let g = grads.get(i, j);
            let mag = g[0].hypot(g[1]);
            let band = match thresholds.binary_search_by(|t| t.partial_cmp(&mag).unwrap()) {
                Ok(k) => k,
                Err(k) => k - 1,
            };
            bands[band].count += 1;
            bands[band].max_grad = bands[band].max_grad.max(mag);
            bands[band].energy +=
                weight * eval_density(spec, a, b, grid.cell_center(i, j), g)?;
        }
    }
    Ok(SplitBounds { thresholds: thresholds.to_vec(), bands })
}
