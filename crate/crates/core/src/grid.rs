//! Uniform grids on the closed unit square, nodal scalar fields, and the
//! piecewise-constant gradient and midpoint quadrature built on cells.
//!
//! A grid of size `m` has `(m+1)^2` nodes at spacing `h = 1/m` and `m^2`
//! square cells. Per cell the four corner values define one average
//! gradient (the exact gradient of the bilinear interpolant at the cell
//! center), and energies are integrated by the midpoint rule
//! `sum over cells of h^2 rho(center, cell gradient)`, which is second
//! order accurate for smooth data. Summation is sequential in row-major
//! cell order, so results are reproducible bit for bit.

use crate::integrand::{eval_density, CoefficientField, IntegrandSpec};
use crate::vec2::Vec2;
use crate::{Error, Result};

/// Uniform grid on the unit square with `m >= 4` cells per side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    m: usize,
}

impl Grid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 4 {
            return Err(Error::grid(format!("grid needs at least 4 cells per side, got {m}")));
        }
        Ok(Grid { m })
    }

    /// Cells per side.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Mesh width `1/m`.
    pub fn h(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn nodes_per_side(&self) -> usize {
        self.m + 1
    }

    pub fn node_count(&self) -> usize {
        (self.m + 1) * (self.m + 1)
    }

    pub fn cell_count(&self) -> usize {
        self.m * self.m
    }

    /// Row-major node index of `(i, j)` with `0 <= i, j <= m`.
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.m + 1) + i
    }

    pub fn node_point(&self, i: usize, j: usize) -> Vec2 {
        let h = self.h();
        [i as f64 * h, j as f64 * h]
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Vec2 {
        let h = self.h();
        [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.m || j == self.m
    }
}

/// Scalar field given by one value per grid node, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField {
    grid: Grid,
    values: Vec<f64>,
}

impl DiscreteField {
    pub fn zeros(grid: Grid) -> Self {
        DiscreteField { grid, values: vec![0.0; grid.node_count()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(Vec2) -> f64) -> Self {
        let n = grid.nodes_per_side();
        let mut values = Vec::with_capacity(grid.node_count());
        for j in 0..n {
            for i in 0..n {
                values.push(f(grid.node_point(i, j)));
            }
        }
        DiscreteField { grid, values }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::grid(format!(
                "expected {} node values, got {}",
                grid.node_count(),
                values.len()
            )));
        }
        Ok(DiscreteField { grid, values })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.node_index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.grid.node_index(i, j);
        self.values[idx] = v;
    }

    /// Overwrites every boundary node with `f` at that node.
    pub fn apply_boundary(&mut self, f: impl Fn(Vec2) -> f64) {
        let m = self.grid.m();
        for j in 0..=m {
            for i in 0..=m {
                if self.grid.is_boundary(i, j) {
                    self.set(i, j, f(self.grid.node_point(i, j)));
                }
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Bilinear interpolation at `x` in the closed unit square.
    pub fn eval(&self, x: Vec2) -> Result<f64> {
        if !(x[0] >= 0.0 && x[0] <= 1.0 && x[1] >= 0.0 && x[1] <= 1.0) {
            return Err(Error::OutsideDomain(x[0], x[1]));
        }
        let m = self.grid.m();
        let h = self.grid.h();
        let ci = ((x[0] / h) as usize).min(m - 1);
        let cj = ((x[1] / h) as usize).min(m - 1);
        let s = x[0] / h - ci as f64;
        let t = x[1] / h - cj as f64;
        let v00 = self.get(ci, cj);
        let v10 = self.get(ci + 1, cj);
        let v01 = self.get(ci, cj + 1);
        let v11 = self.get(ci + 1, cj + 1);
        Ok(v00 * (1.0 - s) * (1.0 - t) + v10 * s * (1.0 - t) + v01 * (1.0 - s) * t + v11 * s * t)
    }
}

/// One gradient vector per cell of a (sub)grid, row-major.
///
/// `origin` locates the first cell inside the full grid it was cut from, so
/// shifted and restricted fields keep honest spatial coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGradientField {
    spacing: f64,
    origin: (usize, usize),
    nx: usize,
    ny: usize,
    data: Vec<[f64; 2]>,
}

impl CellGradientField {
    pub fn new(
        spacing: f64,
        origin: (usize, usize),
        nx: usize,
        ny: usize,
        data: Vec<[f64; 2]>,
    ) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::grid(format!("cell spacing must be positive, got {spacing}")));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::grid("gradient field must contain at least one cell"));
        }
        if data.len() != nx * ny {
            return Err(Error::grid(format!(
                "expected {} gradient entries, got {}",
                nx * ny,
                data.len()
            )));
        }
        Ok(CellGradientField { spacing, origin, nx, ny, data })
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> (usize, usize) {
        self.origin
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn data(&self) -> &[[f64; 2]] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Vec2 {
        self.data[j * self.nx + i]
    }

    /// Center of local cell `(i, j)` in absolute coordinates.
    pub fn center(&self, i: usize, j: usize) -> Vec2 {
        [
            (self.origin.0 + i) as f64 * self.spacing + 0.5 * self.spacing,
            (self.origin.1 + j) as f64 * self.spacing + 0.5 * self.spacing,
        ]
    }

    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, g| acc.max(g[0].hypot(g[1])))
    }
}

/// Cell-centered gradient of a nodal field: per cell the averaged edge
/// differences, which equal the gradient of the bilinear interpolant at the
/// cell center. Exact for affine nodal data.
pub fn discrete_gradient(field: &DiscreteField) -> CellGradientField {
    let grid = field.grid();
    let m = grid.m();
    let h = grid.h();
    let mut data = Vec::with_capacity(grid.cell_count());
    for j in 0..m {
        for i in 0..m {
            let v00 = field.get(i, j);
            let v10 = field.get(i + 1, j);
            let v01 = field.get(i, j + 1);
            let v11 = field.get(i + 1, j + 1);
            let gx = ((v10 - v00) + (v11 - v01)) / (2.0 * h);
            let gy = ((v01 - v00) + (v11 - v10)) / (2.0 * h);
            data.push([gx, gy]);
        }
    }
    CellGradientField { spacing: h, origin: (0, 0), nx: m, ny: m, data }
}

/// Midpoint-rule energy of a nodal field: the density is sampled at each
/// cell center with the cell gradient, weighted by cell area, and summed in
/// row-major order.
pub fn integrate(
    spec: &IntegrandSpec,
    a: &CoefficientField,
    b: &CoefficientField,
    field: &DiscreteField,
) -> Result<f64> {
    let grid = field.grid();
    let m = grid.m();
    let h = grid.h();
    let weight = h * h;
    let mut total = 0.0;
    for j in 0..m {
        for i in 0..m {
            let v00 = field.get(i, j);
            let v10 = field.get(i + 1, j);
            let v01 = field.get(i, j + 1);
            let v11 = field.get(i + 1, j + 1);
            let gx = ((v10 - v00) + (v11 - v01)) / (2.0 * h);
            let gy = ((v01 - v00) + (v11 - v10)) / (2.0 * h);
            total += weight * eval_density(spec, a, b, grid.cell_center(i, j), [gx, gy])?;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::fit_log_log;
    use std::f64::consts::PI;

    #[test]
    fn grid_validation_and_geometry() {
        assert!(Grid::new(3).is_err());
        let g = Grid::new(8).unwrap();
        assert_eq!(g.m(), 8);
        assert_eq!(g.h(), 0.125);
        assert_eq!(g.node_count(), 81);
        assert_eq!(g.cell_count(), 64);
        assert_eq!(g.node_point(8, 0), [1.0, 0.0]);
        assert_eq!(g.cell_center(0, 0), [0.0625, 0.0625]);
        assert!(g.is_boundary(0, 3) && g.is_boundary(3, 8) && !g.is_boundary(4, 4));
    }

    #[test]
    fn field_construction_checks_length() {
        let g = Grid::new(4).unwrap();
        assert!(DiscreteField::from_values(g, vec![0.0; 24]).is_err());
        assert!(DiscreteField::from_values(g, vec![0.0; 25]).is_ok());
    }

    #[test]
    fn bilinear_eval_reproduces_nodes_and_affine_functions() {
        let g = Grid::new(16).unwrap();
        let f = DiscreteField::from_fn(g, |x| 1.0 + 2.0 * x[0] - 3.0 * x[1]);
        for j in 0..=16 {
            for i in 0..=16 {
                let x = g.node_point(i, j);
                assert_eq!(f.eval(x).unwrap(), f.get(i, j));
            }
        }
        for x in [[0.31, 0.77], [0.0, 0.0], [1.0, 1.0], [0.999, 0.001]] {
            let want = 1.0 + 2.0 * x[0] - 3.0 * x[1];
            assert!((f.eval(x).unwrap() - want).abs() < 1e-14);
        }
        assert!(f.eval([1.2, 0.5]).is_err());
    }

    #[test]
    fn bilinear_eval_converges_quadratically() {
        let u = |x: Vec2| (PI * x[0]).sin() * (PI * x[1]).sin();
        let g = Grid::new(32).unwrap();
        let f = DiscreteField::from_fn(g, u);
        let mut worst = 0.0f64;
        for k in 0..200 {
            let x = [(k as f64 * 0.617) % 1.0, (k as f64 * 0.317) % 1.0];
            worst = worst.max((f.eval(x).unwrap() - u(x)).abs());
        }
        assert!(worst < 5e-3, "interpolation error {worst}");
    }

    #[test]
    fn cell_gradient_is_exact_for_affine_and_bilinear_data() {
        let g = Grid::new(16).unwrap();
        let affine = DiscreteField::from_fn(g, |x| 1.0 + 2.0 * x[0] - 3.0 * x[1]);
        let grad = discrete_gradient(&affine);
        for gv in grad.data() {
            assert_eq!(*gv, [2.0, -3.0]);
        }
        let product = DiscreteField::from_fn(g, |x| x[0] * x[1]);
        let grad = discrete_gradient(&product);
        for j in 0..16 {
            for i in 0..16 {
                let c = g.cell_center(i, j);
                assert_eq!(grad.get(i, j), [c[1], c[0]]);
            }
        }
        let square = DiscreteField::from_fn(g, |x| x[0] * x[0]);
        let grad = discrete_gradient(&square);
        for j in 0..16 {
            for i in 0..16 {
                let c = g.cell_center(i, j);
                assert_eq!(grad.get(i, j), [2.0 * c[0], 0.0]);
            }
        }
    }

    #[test]
    fn gradient_field_metadata() {
        let g = Grid::new(8).unwrap();
        let f = DiscreteField::zeros(g);
        let grad = discrete_gradient(&f);
        assert_eq!((grad.nx(), grad.ny()), (8, 8));
        assert_eq!(grad.origin(), (0, 0));
        assert_eq!(grad.spacing(), g.h());
        assert_eq!(grad.center(0, 0), g.cell_center(0, 0));
        let shifted =
            CellGradientField::new(g.h(), (2, 3), 4, 4, vec![[0.0, 0.0]; 16]).unwrap();
        assert_eq!(shifted.center(0, 0), g.cell_center(2, 3));
        assert_eq!(shifted.center(3, 3), g.cell_center(5, 6));
        assert!(CellGradientField::new(g.h(), (0, 0), 4, 4, vec![[0.0, 0.0]; 15]).is_err());
        assert!(CellGradientField::new(0.0, (0, 0), 4, 4, vec![[0.0, 0.0]; 16]).is_err());
    }

    #[test]
    fn dirichlet_energy_matches_the_analytic_integral() {
        // For u = sin(pi x1) sin(pi x2) the exact Dirichlet energy is
        // pi^2 / 2; the midpoint value at m = 64 must sit within O(h^2).
        let spec = IntegrandSpec::p_power(2.0).unwrap();
        let a = CoefficientField::one();
        let b = CoefficientField::zero();
        let g = Grid::new(64).unwrap();
        let f = DiscreteField::from_fn(g, |x| (PI * x[0]).sin() * (PI * x[1]).sin());
        let energy = integrate(&spec, &a, &b, &f).unwrap();
        assert!((energy - PI * PI / 2.0).abs() < 0.01, "energy {energy}");
    }

    #[test]
    fn quadrature_refinement_converges_at_second_order() {
        let spec = IntegrandSpec::double_phase(2.0, 3.0).unwrap();
        let a = CoefficientField::smoothed_step(0.5, 1.0, 0.5, 0.2).unwrap();
        let b = CoefficientField::zero();
        let u = |x: Vec2| (PI * x[0]).sin() * (2.0 * PI * x[1]).cos() + 0.3 * x[0] * x[1];
        let levels = [16usize, 32, 64, 128];
        let mut energies = Vec::new();
        for &m in &levels {
            let g = Grid::new(m).unwrap();
            let f = DiscreteField::from_fn(g, u);
            energies.push(integrate(&spec, &a, &b, &f).unwrap());
        }
        let hs: Vec<f64> = levels[..3].iter().map(|&m| 1.0 / m as f64).collect();
        let diffs: Vec<f64> =
            (0..3).map(|k| (energies[k] - energies[k + 1]).abs()).collect();
        let fitted = fit_log_log(&hs, &diffs).unwrap();
        assert!(
            (fitted.slope - 2.0).abs() <= 0.3,
            "refinement slope {} should be near 2",
            fitted.slope
        );
    }

    #[test]
    fn integration_is_deterministic() {
        let spec = IntegrandSpec::double_phase(2.0, 3.0).unwrap();
        let a = CoefficientField::distance_power(0.5, 1.0, 0.5).unwrap();
        let b = CoefficientField::zero();
        let g = Grid::new(32).unwrap();
        let f = DiscreteField::from_fn(g, |x| (x[0] - x[1]).powi(3) + x[1]);
        let e1 = integrate(&spec, &a, &b, &f).unwrap();
        let e2 = integrate(&spec, &a, &b, &f).unwrap();
        assert_eq!(e1.to_bits(), e2.to_bits());
        assert!(e1.is_finite() && e1 >= 0.0);
    }

    #[test]
    fn boundary_assignment_touches_exactly_the_rim() {
        let g = Grid::new(8).unwrap();
        let mut f = DiscreteField::zeros(g);
        f.apply_boundary(|_| 1.0);
        let mut rim = 0;
        for j in 0..=8 {
            for i in 0..=8 {
                if g.is_boundary(i, j) {
                    assert_eq!(f.get(i, j), 1.0);
                    rim += 1;
                } else {
                    assert_eq!(f.get(i, j), 0.0);
                }
            }
        }
        assert_eq!(rim, 32);
        assert_eq!(f.max_abs(), 1.0);
    }
}
