//! Declarative run configuration. One TOML file describes one run; each
//! subcommand reads its own section and ignores the others' absence. Unknown
//! keys are rejected everywhere so that typos fail loudly instead of
//! silently falling back to defaults.

use serde::Deserialize;

use crate::grid::{DiscreteField, Grid};
use crate::integrand::CoefficientField;
use crate::solver::SolveConfig;
use crate::threshold::GrowthParams;
use crate::vec2::Vec2;
use crate::{Error, Result};

/// Parsed contents of a run configuration file.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub classify: Option<ClassifySection>,
    pub sweep: Option<SweepSection>,
    pub moser: Option<MoserSection>,
    pub metrics: Option<MetricsSection>,
    pub colimit: Option<ColimitSection>,
    /// Output directory; the `--out` flag overrides it.
    pub out_dir: Option<String>,
}

impl ExperimentConfig {
    /// Parses and cross-validates a TOML document.
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        if let Some(section) = &config.classify {
            section.validate()?;
        }
        if let Some(section) = &config.sweep {
            section.validate()?;
        }
        if let Some(section) = &config.moser {
            section.validate()?;
        }
        if let Some(section) = &config.metrics {
            section.validate()?;
        }
        if let Some(section) = &config.colimit {
            section.validate()?;
        }
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }
}

/// Parameter grid for the classifier: either explicit `(p, q, alpha, n)`
/// tuples or the cartesian product of per-axis lists, but not both.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ClassifySection {
    pub tuples: Option<Vec<(f64, f64, f64, u32)>>,
    pub p: Option<Vec<f64>>,
    pub q: Option<Vec<f64>>,
    pub alpha: Option<Vec<f64>>,
    pub n: Option<Vec<u32>>,
}

impl ClassifySection {
    fn validate(&self) -> Result<()> {
        let has_product =
            self.p.is_some() || self.q.is_some() || self.alpha.is_some() || self.n.is_some();
        match (&self.tuples, has_product) {
            (Some(_), true) => {
                Err(Error::config("classify: give either tuples or a product grid, not both"))
            }
            (Some(t), false) if t.is_empty() => {
                Err(Error::config("classify: tuples list is empty"))
            }
            (Some(_), false) => Ok(()),
            (None, true) => {
                for (name, missing) in [
                    ("p", self.p.is_none()),
                    ("q", self.q.is_none()),
                    ("alpha", self.alpha.is_none()),
                    ("n", self.n.is_none()),
                ] {
                    if missing {
                        return Err(Error::config(format!(
                            "classify: product grid needs `{name}`"
                        )));
                    }
                }
                for (name, empty) in [
                    ("p", self.p.as_ref().unwrap().is_empty()),
                    ("q", self.q.as_ref().unwrap().is_empty()),
                    ("alpha", self.alpha.as_ref().unwrap().is_empty()),
                    ("n", self.n.as_ref().unwrap().is_empty()),
                ] {
                    if empty {
                        return Err(Error::config(format!("classify: axis `{name}` is empty")));
                    }
                }
                Ok(())
            }
            (None, false) => Err(Error::config("classify: no parameter grid given")),
        }
    }

    /// The parameter tuples in deterministic emission order, validated.
    pub fn params(&self) -> Result<Vec<GrowthParams>> {
        self.validate()?;
        let mut out = Vec::new();
        if let Some(tuples) = &self.tuples {
            for &(p, q, alpha, n) in tuples {
                out.push(GrowthParams::new(p, q, alpha, n).map_err(to_config)?);
            }
            return Ok(out);
        }
        for &p in self.p.as_ref().unwrap() {
            for &q in self.q.as_ref().unwrap() {
                for &alpha in self.alpha.as_ref().unwrap() {
                    for &n in self.n.as_ref().unwrap() {
                        out.push(GrowthParams::new(p, q, alpha, n).map_err(to_config)?);
                    }
                }
            }
        }
        Ok(out)
    }
}

fn to_config(e: Error) -> Error {
    Error::config(e.to_string())
}

/// Coefficient field description.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientSection {
    Constant { value: f64 },
    DistancePower { alpha: f64, amplitude: f64, offset: f64 },
    SmoothedStep { alpha: f64, amplitude: f64, center: f64, width: f64 },
}

impl CoefficientSection {
    pub fn build(&self) -> Result<CoefficientField> {
        match *self {
            CoefficientSection::Constant { value } => {
                CoefficientField::constant(value).map_err(to_config)
            }
            CoefficientSection::DistancePower { alpha, amplitude, offset } => {
                CoefficientField::distance_power(alpha, amplitude, offset).map_err(to_config)
            }
            CoefficientSection::SmoothedStep { alpha, amplitude, center, width } => {
                CoefficientField::smoothed_step(alpha, amplitude, center, width)
                    .map_err(to_config)
            }
        }
    }
}

/// Named boundary-data fixtures for the unit square.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryFixture {
    /// `gx x1 + gy x2`.
    Affine { gx: f64, gy: f64 },
    /// `x1^2 - x2^2`, the classic harmonic saddle.
    Saddle,
    /// `slope (x1 - 1/2) + wobble sin(2 pi x2)`: a tilt crossing the
    /// coefficient's dead zone plus a nonlinearity that keeps the minimizer
    /// off the affine sentinel.
    RampWave { slope: f64, wobble: f64 },
    /// `|x - (1/2, 1/2)|^exponent` with `exponent` in (1, 2).
    Cusp { exponent: f64 },
}

impl BoundaryFixture {
    pub fn eval(&self, x: Vec2) -> f64 {
        match *self {
            BoundaryFixture::Affine { gx, gy } => gx * x[0] + gy * x[1],
            BoundaryFixture::Saddle => x[0] * x[0] - x[1] * x[1],
            BoundaryFixture::RampWave { slope, wobble } => {
                slope * (x[0] - 0.5) + wobble * (2.0 * std::f64::consts::PI * x[1]).sin()
            }
            BoundaryFixture::Cusp { exponent } => {
                (x[0] - 0.5).hypot(x[1] - 0.5).powf(exponent)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = match *self {
            BoundaryFixture::Affine { gx, gy } => gx.is_finite() && gy.is_finite(),
            BoundaryFixture::Saddle => true,
            BoundaryFixture::RampWave { slope, wobble } => {
                slope.is_finite() && wobble.is_finite()
            }
            BoundaryFixture::Cusp { exponent } => {
                if !(exponent > 1.0 && exponent < 2.0) {
                    return Err(Error::config(format!(
                        "boundary: cusp exponent {exponent} must lie in (1, 2)"
                    )));
                }
                true
            }
        };
        if !finite {
            return Err(Error::config("boundary: coefficients must be finite"));
        }
        Ok(())
    }

    /// Samples the fixture on every node of `grid`.
    pub fn sample(&self, grid: Grid) -> DiscreteField {
        DiscreteField::from_fn(grid, |x| self.eval(x))
    }
}

/// Line-search and continuation settings. Every field has a default, so a
/// config may give only what it wants to change.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveSection {
    pub tol_grad: f64,
    pub max_iters: u64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub continuation: Vec<(f64, f64)>,
}

impl Default for SolveSection {
    fn default() -> Self {
        SolveSection {
            tol_grad: 1e-7,
            max_iters: 20_000,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            continuation: vec![(0.1, 0.01), (0.01, 0.001), (0.0, 0.0)],
        }
    }
}

impl SolveSection {
    pub fn build(&self) -> Result<SolveConfig> {
        SolveConfig::new(
            self.tol_grad,
            self.max_iters,
            self.armijo_c,
            self.backtrack_factor,
            self.continuation.clone(),
        )
        .map_err(to_config)
    }
}

/// The threshold-sweep experiment: double-phase solves across a q grid that
/// straddles `q* = p (1 + alpha / 2)`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub p: f64,
    pub alpha: f64,
    pub q_grid: Vec<f64>,
    pub m: usize,
    pub coefficient: CoefficientSection,
    pub boundary: BoundaryFixture,
    #[serde(default)]
    pub solve: SolveSection,
    /// Translation offsets for the difference-quotient fit.
    #[serde(default = "default_offsets")]
    pub offsets: Vec<(i64, i64)>,
    /// Ball radii for the oscillation fit, strictly decreasing.
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
}

fn default_offsets() -> Vec<(i64, i64)> {
    vec![(1, 0), (2, 0), (4, 0), (8, 0)]
}

fn default_radii() -> Vec<f64> {
    vec![0.25, 0.177, 0.125, 0.088, 0.0625]
}

impl SweepSection {
    /// The sharp threshold for this section's `(p, alpha)` in dimension 2.
    pub fn q_star(&self) -> f64 {
        self.p * (1.0 + self.alpha / 2.0)
    }

    fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(Error::config(format!("sweep: p = {} must exceed 1", self.p)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config(format!(
                "sweep: alpha = {} must lie in (0, 1]",
                self.alpha
            )));
        }
        if self.q_grid.is_empty() {
            return Err(Error::config("sweep: q_grid is empty"));
        }
        let q_star = self.q_star();
        for &q in &self.q_grid {
            if !(q.is_finite() && q >= self.p) {
                return Err(Error::config(format!(
                    "sweep: q = {q} must be finite and at least p = {}",
                    self.p
                )));
            }
        }
        let below = self.q_grid.iter().any(|&q| q < q_star);
        let above = self.q_grid.iter().any(|&q| q > q_star);
        if !(below && above) {
            return Err(Error::config(format!(
                "sweep: q_grid must straddle the threshold q* = {q_star}"
            )));
        }
        self.coefficient.build()?;
        self.boundary.validate()?;
        self.solve.build()?;
        Ok(())
    }
}

/// Exponent-recurrence parameters.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoserSection {
    pub t0: f64,
    pub sigma: f64,
    pub p: f64,
    pub gamma: f64,
    pub q: f64,
    pub max_iters: usize,
    pub target: Option<f64>,
}

impl MoserSection {
    fn validate(&self) -> Result<()> {
        crate::threshold::moser_sequence(
            self.t0,
            self.sigma,
            self.p,
            self.gamma,
            self.q,
            self.max_iters,
            self.target,
        )
        .map(|_| ())
        .map_err(to_config)
    }
}

/// Regularity measurements over a stored field file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    /// Path to a `node,x1,x2,value` CSV, relative to the config file's use
    /// site.
    pub field: String,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    #[serde(default = "default_offsets")]
    pub offsets: Vec<(i64, i64)>,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    #[serde(default = "default_center")]
    pub center: (f64, f64),
}

fn default_center() -> (f64, f64) {
    (0.5, 0.5)
}

impl MetricsSection {
    fn validate(&self) -> Result<()> {
        GrowthParams::new(self.p, self.q, self.alpha, 2).map(|_| ()).map_err(to_config)
    }
}

/// Colimit assembly over an imported claim diagram.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColimitSection {
    /// Path to a line-oriented diagram file.
    pub dag: String,
    /// Claim ids the validation pass rejects; everything else passes.
    #[serde(default)]
    pub reject: Vec<String>,
}

impl ColimitSection {
    fn validate(&self) -> Result<()> {
        if self.dag.is_empty() {
            return Err(Error::config("colimit: dag path is empty"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_product_grid_expands_in_order() {
        let config = ExperimentConfig::from_toml(
            "[classify]\np = [2.0, 3.0]\nq = [4.0, 5.0]\nalpha = [0.5]\nn = [2]\n",
        )
        .unwrap();
        let params = config.classify.unwrap().params().unwrap();
        assert_eq!(params.len(), 4);
        assert_eq!((params[0].p(), params[0].q()), (2.0, 4.0));
        assert_eq!((params[1].p(), params[1].q()), (2.0, 5.0));
        assert_eq!((params[3].p(), params[3].q()), (3.0, 5.0));

        // A grid whose expansion contains an invalid pair is rejected as a
        // config error.
        let config = ExperimentConfig::from_toml(
            "[classify]\np = [2.0, 3.0]\nq = [2.5]\nalpha = [0.5]\nn = [2]\n",
        )
        .unwrap();
        assert!(config.classify.unwrap().params().is_err());
    }

    #[test]
    fn classify_tuples_parse() {
        let config = ExperimentConfig::from_toml(
            "[classify]\ntuples = [[2.0, 2.2, 0.5, 2], [2.0, 2.0, 1.0, 3]]\n",
        )
        .unwrap();
        let params = config.classify.unwrap().params().unwrap();
        assert_eq!(params.len(), 2);
    }

    #[test]
    fn classify_rejects_empty_and_mixed_grids() {
        assert!(ExperimentConfig::from_toml("[classify]\ntuples = []\n").is_err());
        assert!(ExperimentConfig::from_toml("[classify]\n").is_err());
        assert!(ExperimentConfig::from_toml(
            "[classify]\ntuples = [[2.0, 2.2, 0.5, 2]]\np = [2.0]\nq = [2.2]\nalpha = [0.5]\nn = [2]\n"
        )
        .is_err());
        assert!(ExperimentConfig::from_toml("[classify]\np = [2.0]\n").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml("[classify]\ntuples = [[2.0,2.2,0.5,2]]\nfrobnicate = 1\n").is_err());
        assert!(ExperimentConfig::from_toml("[mystery]\nx = 1\n").is_err());
        assert!(ExperimentConfig::from_toml(
            "[sweep]\np = 2.0\nalpha = 0.5\nq_grid = [2.1, 2.9]\nm = 16\nextra = true\ncoefficient = { kind = \"constant\", value = 1.0 }\nboundary = { kind = \"saddle\" }\n"
        )
        .is_err());
    }

    fn sweep_toml(q_grid: &str) -> String {
        format!(
            "[sweep]\np = 2.0\nalpha = 0.5\nq_grid = {q_grid}\nm = 16\n\
             coefficient = {{ kind = \"distance_power\", alpha = 0.5, amplitude = 1.0, offset = 0.5 }}\n\
             boundary = {{ kind = \"ramp_wave\", slope = 3.0, wobble = 0.5 }}\n"
        )
    }

    #[test]
    fn sweep_requires_a_straddling_q_grid() {
        let config = ExperimentConfig::from_toml(&sweep_toml("[2.1, 2.9]")).unwrap();
        let sweep = config.sweep.unwrap();
        assert_eq!(sweep.q_star(), 2.5);
        assert_eq!(sweep.solve.tol_grad, 1e-7);
        assert!(ExperimentConfig::from_toml(&sweep_toml("[2.1, 2.2]")).is_err());
        assert!(ExperimentConfig::from_toml(&sweep_toml("[2.7, 2.9]")).is_err());
        assert!(ExperimentConfig::from_toml(&sweep_toml("[]")).is_err());
        assert!(ExperimentConfig::from_toml(&sweep_toml("[1.5, 2.9]")).is_err());
    }

    #[test]
    fn sweep_solve_overrides_apply() {
        let text = format!(
            "{}[sweep.solve]\ntol_grad = 1e-6\nmax_iters = 500\ncontinuation = [[0.1, 0.1], [0.0, 0.0]]\n",
            sweep_toml("[2.1, 2.9]")
        );
        let config = ExperimentConfig::from_toml(&text).unwrap();
        let solve = config.sweep.unwrap().solve.build().unwrap();
        assert_eq!(solve.tol_grad(), 1e-6);
        assert_eq!(solve.max_iters(), 500);
        assert_eq!(solve.continuation(), [(0.1, 0.1), (0.0, 0.0)]);
    }

    #[test]
    fn boundary_fixtures_evaluate() {
        let affine = BoundaryFixture::Affine { gx: 2.0, gy: -1.0 };
        assert_eq!(affine.eval([0.5, 0.25]), 0.75);
        let saddle = BoundaryFixture::Saddle;
        assert_eq!(saddle.eval([0.5, 0.5]), 0.0);
        let ramp = BoundaryFixture::RampWave { slope: 3.0, wobble: 0.5 };
        assert!((ramp.eval([0.5, 0.25]) - 0.5).abs() < 1e-15);
        let cusp = BoundaryFixture::Cusp { exponent: 1.5 };
        assert_eq!(cusp.eval([0.5, 0.5]), 0.0);
        assert!(ExperimentConfig::from_toml(&sweep_toml("[2.1, 2.9]")
            .replace("ramp_wave\", slope = 3.0, wobble = 0.5", "cusp\", exponent = 2.5"))
        .is_err());
    }

    #[test]
    fn moser_and_colimit_sections_validate() {
        let config = ExperimentConfig::from_toml(
            "[moser]\nt0 = 2.0\nsigma = 0.5\np = 2.0\ngamma = 1.0\nq = 2.2\nmax_iters = 20\n",
        )
        .unwrap();
        assert!(config.moser.is_some());
        assert!(ExperimentConfig::from_toml(
            "[moser]\nt0 = 0.5\nsigma = 0.5\np = 2.0\ngamma = 1.0\nq = 2.2\nmax_iters = 20\n"
        )
        .is_err());
        let config = ExperimentConfig::from_toml(
            "[colimit]\ndag = \"diagram.txt\"\nreject = [\"b\"]\n",
        )
        .unwrap();
        assert_eq!(config.colimit.unwrap().reject, ["b"]);
        assert!(ExperimentConfig::from_toml("[colimit]\ndag = \"\"\n").is_err());
    }

    #[test]
    fn metrics_section_defaults() {
        let config = ExperimentConfig::from_toml(
            "[metrics]\nfield = \"field.csv\"\np = 2.0\nq = 2.2\nalpha = 0.5\n",
        )
        .unwrap();
        let metrics = config.metrics.unwrap();
        assert_eq!(metrics.offsets, default_offsets());
        assert_eq!(metrics.center, (0.5, 0.5));
        assert!(ExperimentConfig::from_toml(
            "[metrics]\nfield = \"f.csv\"\np = 2.0\nq = 1.5\nalpha = 0.5\n"
        )
        .is_err());
    }
}
