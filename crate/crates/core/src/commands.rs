//! Run orchestration behind the CLI subcommands. Every command takes its
//! config section plus [`RunOptions`], writes its output files into the run
//! directory, and returns the written paths. Data files are byte-identical
//! across repeated runs of the same config; wall-clock information goes
//! only into the `run.log` sidecar.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::{
    ClassifySection, ColimitSection, MetricsSection, MoserSection, SweepSection,
};
use crate::dag::{format_classes, parse_dag};
use crate::grid::{discrete_gradient, Grid};
use crate::integrand::{CoefficientField, IntegrandSpec};
use crate::io::{
    parse_field, render_metrics, render_moser, render_svg_chart, render_sweep,
    render_verdicts, render_xy, MetricsRow, SweepRow, VerdictRow,
};
use crate::metrics::{fit_caccioppoli, holder_exponent};
use crate::solver::ghost_continuation;
use crate::threshold::{classify, moser_sequence, GrowthParams};
use crate::{Error, Result};

/// Where and how a run executes.
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Directory all output files land in; created if missing.
    pub out_dir: PathBuf,
    /// Recorded in the sidecar log for provenance; reserved for randomized
    /// experiment variants.
    pub seed: u64,
    /// Worker threads for sweep points; at least 1.
    pub threads: usize,
}

impl RunOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        RunOptions { out_dir: out_dir.into(), seed: 0, threads: 1 }
    }
}

fn write_output(dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, content)?;
    Ok(path)
}

fn log_run(opts: &RunOptions, command: &str, paths: &[PathBuf]) -> Result<()> {
    fs::create_dir_all(&opts.out_dir)?;
    let stamp =
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let names: Vec<String> =
        paths.iter().map(|p| p.file_name().unwrap_or_default().to_string_lossy().into()).collect();
    let mut log = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(opts.out_dir.join("run.log"))?;
    writeln!(
        log,
        "[{stamp}] {command} seed={} threads={} wrote {}",
        opts.seed,
        opts.threads,
        names.join(" ")
    )?;
    Ok(())
}

/// Classifies every parameter tuple of the section and writes
/// `verdicts.csv`.
pub fn cmd_classify(section: &ClassifySection, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let params = section.params().map_err(|e| Error::config(e.to_string()))?;
    let rows: Vec<VerdictRow> = params
        .iter()
        .map(|gp| {
            let verdict = classify(gp);
            VerdictRow {
                p: gp.p(),
                q: gp.q(),
                alpha: gp.alpha(),
                n: gp.n(),
                regime: verdict.regime,
                margin: verdict.margin,
            }
        })
        .collect();
    let paths = vec![write_output(&opts.out_dir, "verdicts.csv", &render_verdicts(&rows))?];
    log_run(opts, "classify", &paths)?;
    Ok(paths)
}

fn sweep_point(section: &SweepSection, q: f64) -> Result<SweepRow> {
    let spec = IntegrandSpec::double_phase(section.p, q)?;
    let a = section.coefficient.build()?;
    let b = CoefficientField::zero();
    let grid = Grid::new(section.m)?;
    let boundary = section.boundary.sample(grid);
    let solve = section.solve.build()?;
    let result = ghost_continuation(&spec, &a, &b, grid, &boundary, &solve)?;
    let grads = discrete_gradient(&result.field);
    let (holder_val, holder_fit) = match holder_exponent(&grads, [0.5, 0.5], &section.radii) {
        Ok(est) => (est.exponent, est.fit_quality),
        Err(_) => (f64::NAN, f64::NAN),
    };
    let (s_order, c, residual) =
        match fit_caccioppoli(&grads, section.p, q, &section.offsets) {
            Ok(fit) => (fit.s_order, fit.c, fit.residual),
            Err(_) => (f64::NAN, f64::NAN, f64::NAN),
        };
    let energy = result.per_stage.last().map(|s| s.energy).unwrap_or(f64::NAN);
    Ok(SweepRow {
        q,
        converged: result.converged,
        iterations: result.iterations,
        energy,
        holder_exponent: holder_val,
        holder_fit,
        s_order,
        c,
        residual,
    })
}

/// Runs the threshold sweep: one regularized double-phase solve per q,
/// regularity measurements on each minimizer, and four output files:
/// `sweep.csv`, `holder_vs_q.dat`, `s_order_vs_q.dat`, `sweep.svg`.
/// Solves that stop short of tolerance become `converged=false` rows; the
/// sweep always covers the whole grid.
pub fn cmd_sweep(section: &SweepSection, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let qs = &section.q_grid;
    let threads = opts.threads.max(1).min(qs.len().max(1));
    let mut slots: Vec<Option<Result<SweepRow>>> = Vec::new();
    slots.resize_with(qs.len(), || None);
    if threads <= 1 {
        for (k, &q) in qs.iter().enumerate() {
            slots[k] = Some(sweep_point(section, q));
        }
    } else {
        let chunks: Vec<Vec<usize>> = (0..threads)
            .map(|w| (w..qs.len()).step_by(threads).collect())
            .collect();
        let mut computed: Vec<(usize, Result<SweepRow>)> = Vec::with_capacity(qs.len());
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .into_iter()
                .map(|chunk| {
                    scope.spawn(move || {
                        chunk
                            .into_iter()
                            .map(|k| (k, sweep_point(section, qs[k])))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for handle in handles {
                computed.extend(handle.join().expect("sweep worker panicked"));
            }
        });
        for (k, row) in computed {
            slots[k] = Some(row);
        }
    }
    let mut rows = Vec::with_capacity(qs.len());
    for slot in slots {
        rows.push(slot.expect("sweep point not computed")?);
    }

    let holder_pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.q, r.holder_exponent)).collect();
    let s_pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.q, r.s_order)).collect();
    let svg = render_svg_chart(
        "gradient regularity across the growth threshold",
        &[("holder exponent", holder_pts.clone()), ("fractional order", s_pts.clone())],
    );
    let paths = vec![
        write_output(&opts.out_dir, "sweep.csv", &render_sweep(&rows))?,
        write_output(&opts.out_dir, "holder_vs_q.dat", &render_xy(&holder_pts))?,
        write_output(&opts.out_dir, "s_order_vs_q.dat", &render_xy(&s_pts))?,
        write_output(&opts.out_dir, "sweep.svg", &svg)?,
    ];
    log_run(opts, "sweep", &paths)?;
    Ok(paths)
}

/// Materializes the exponent recurrence and writes `moser.csv`.
pub fn cmd_moser(section: &MoserSection, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let seq = moser_sequence(
        section.t0,
        section.sigma,
        section.p,
        section.gamma,
        section.q,
        section.max_iters,
        section.target,
    )
    .map_err(|e| Error::config(e.to_string()))?;
    let paths = vec![write_output(&opts.out_dir, "moser.csv", &render_moser(&seq.t))?];
    log_run(opts, "moser", &paths)?;
    Ok(paths)
}

/// Measures a stored field file and writes a one-row `metrics.csv`.
pub fn cmd_metrics(section: &MetricsSection, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let text = fs::read_to_string(&section.field)?;
    let field = parse_field(&text)?;
    let grads = discrete_gradient(&field);
    let params = GrowthParams::new(section.p, section.q, section.alpha, 2)
        .map_err(|e| Error::config(e.to_string()))?;
    let verdict = classify(&params);
    let fit = fit_caccioppoli(&grads, section.p, section.q, &section.offsets)?;
    let center = [section.center.0, section.center.1];
    let holder = holder_exponent(&grads, center, &section.radii)?;
    let row = MetricsRow {
        p: section.p,
        q: section.q,
        alpha: section.alpha,
        regime: verdict.regime,
        s_order: fit.s_order,
        c: fit.c,
        holder_exponent: holder.exponent,
        fit_quality: holder.fit_quality,
    };
    let paths = vec![write_output(&opts.out_dir, "metrics.csv", &render_metrics(&[row]))?];
    log_run(opts, "metrics", &paths)?;
    Ok(paths)
}

/// Imports a claim diagram, validates it (rejecting the section's listed
/// ids), and writes the colimit classes to `classes.txt`.
pub fn cmd_colimit(section: &ColimitSection, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let text = fs::read_to_string(&section.dag)?;
    let mut dag = parse_dag(&text)?;
    dag.validate(|node| !section.reject.iter().any(|r| r == node.id()))?;
    let result = dag.colimit()?;
    let paths =
        vec![write_output(&opts.out_dir, "classes.txt", &format_classes(&result))?];
    log_run(opts, "colimit", &paths)?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;
    use crate::grid::DiscreteField;
    use crate::io::{parse_metrics, parse_moser, parse_sweep, parse_verdicts, render_field};

    fn opts(dir: &Path) -> RunOptions {
        RunOptions::new(dir)
    }

    #[test]
    fn classify_writes_a_parseable_verdict_table() {
        let dir = tempfile::tempdir().unwrap();
        let config = ExperimentConfig::from_toml(
            "[classify]\ntuples = [[2.0, 2.0, 0.5, 3], [2.0, 2.9, 1.0, 2], [2.0, 2.4, 0.5, 3], [2.0, 3.2, 1.0, 2]]\n",
        )
        .unwrap();
        let paths = cmd_classify(config.classify.as_ref().unwrap(), &opts(dir.path())).unwrap();
        assert_eq!(paths.len(), 1);
        let rows = parse_verdicts(&fs::read_to_string(&paths[0]).unwrap()).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].regime.as_str(), "uniform_schauder");
        assert!(dir.path().join("run.log").exists());
    }

    fn sweep_section(threads_hint: &str) -> ExperimentConfig {
        let _ = threads_hint;
        ExperimentConfig::from_toml(
            "[sweep]\np = 2.0\nalpha = 0.5\nq_grid = [2.2, 2.8]\nm = 16\n\
             coefficient = { kind = \"distance_power\", alpha = 0.5, amplitude = 1.0, offset = 0.5 }\n\
             boundary = { kind = \"ramp_wave\", slope = 2.0, wobble = 0.3 }\n\
             offsets = [[1, 0], [2, 0], [3, 0], [4, 0]]\n\
             radii = [0.3, 0.25, 0.2, 0.15]\n\
             [sweep.solve]\ntol_grad = 1e-5\nmax_iters = 4000\ncontinuation = [[0.01, 0.001], [0.0, 0.0]]\n",
        )
        .unwrap()
    }

    #[test]
    fn sweep_outputs_are_deterministic_across_thread_counts() {
        let config = sweep_section("");
        let section = config.sweep.as_ref().unwrap();

        let dir1 = tempfile::tempdir().unwrap();
        let mut o1 = opts(dir1.path());
        o1.threads = 1;
        let paths1 = cmd_sweep(section, &o1).unwrap();

        let dir2 = tempfile::tempdir().unwrap();
        let mut o2 = opts(dir2.path());
        o2.threads = 2;
        let paths2 = cmd_sweep(section, &o2).unwrap();

        assert_eq!(paths1.len(), 4);
        for (a, b) in paths1.iter().zip(&paths2) {
            assert_eq!(a.file_name(), b.file_name());
            let ba = fs::read(a).unwrap();
            let bb = fs::read(b).unwrap();
            assert_eq!(ba, bb, "{:?} differs across thread counts", a.file_name());
        }
        let rows = parse_sweep(&fs::read_to_string(&paths1[0]).unwrap()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].q, 2.2);
        assert_eq!(rows[1].q, 2.8);
    }

    #[test]
    fn moser_writes_the_sequence() {
        let dir = tempfile::tempdir().unwrap();
        let config = ExperimentConfig::from_toml(
            "[moser]\nt0 = 2.0\nsigma = 0.5\np = 2.0\ngamma = 1.0\nq = 2.2\nmax_iters = 10\n",
        )
        .unwrap();
        let paths = cmd_moser(config.moser.as_ref().unwrap(), &opts(dir.path())).unwrap();
        let t = parse_moser(&fs::read_to_string(&paths[0]).unwrap()).unwrap();
        assert_eq!(t.len(), 11);
        assert_eq!(t[0], 2.0);
        assert!((t[1] - 2.4).abs() < 1e-12);
    }

    #[test]
    fn metrics_on_an_affine_field_reports_the_sentinels() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid::new(32).unwrap();
        let field = DiscreteField::from_fn(grid, |x| 2.0 * x[0] - x[1]);
        let field_path = dir.path().join("field.csv");
        fs::write(&field_path, render_field(&field)).unwrap();
        let toml = format!(
            "[metrics]\nfield = {:?}\np = 2.0\nq = 2.2\nalpha = 0.5\n\
             offsets = [[1, 0], [2, 0], [3, 0], [4, 0]]\nradii = [0.3, 0.25, 0.2, 0.15]\n",
            field_path
        );
        let config = ExperimentConfig::from_toml(&toml).unwrap();
        let paths = cmd_metrics(config.metrics.as_ref().unwrap(), &opts(dir.path())).unwrap();
        let rows = parse_metrics(&fs::read_to_string(&paths[0]).unwrap()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].s_order, f64::INFINITY);
        assert_eq!(rows[0].c, 0.0);
        assert_eq!(rows[0].holder_exponent, 1.5);
        assert_eq!(rows[0].regime.as_str(), "sharp_schauder_holds");
    }

    #[test]
    fn metrics_missing_field_file_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let config = ExperimentConfig::from_toml(
            "[metrics]\nfield = \"nowhere/field.csv\"\np = 2.0\nq = 2.2\nalpha = 0.5\n",
        )
        .unwrap();
        let err = cmd_metrics(config.metrics.as_ref().unwrap(), &opts(dir.path())).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn colimit_of_the_span_file_prints_three_classes() {
        let dir = tempfile::tempdir().unwrap();
        let dag_path = dir.path().join("span.txt");
        fs::write(
            &dag_path,
            "node a a0,a1\nnode b b0,b1\nnode c c0\nedge c a c0=a0\nedge c b c0=b0\n",
        )
        .unwrap();
        let toml = format!("[colimit]\ndag = {dag_path:?}\n");
        let config = ExperimentConfig::from_toml(&toml).unwrap();
        let paths = cmd_colimit(config.colimit.as_ref().unwrap(), &opts(dir.path())).unwrap();
        let text = fs::read_to_string(&paths[0]).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains("a:a0 b:b0 c:c0"));

        // Rejecting leaf b removes its payload and the gluing through it:
        // survivors are {a0, c0} and {a1}.
        let toml = format!("[colimit]\ndag = {dag_path:?}\nreject = [\"b\"]\n");
        let config = ExperimentConfig::from_toml(&toml).unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        let paths = cmd_colimit(config.colimit.as_ref().unwrap(), &opts(dir2.path())).unwrap();
        let text = fs::read_to_string(&paths[0]).unwrap();
        assert_eq!(text, "class 0: a:a0 c:c0\nclass 1: a:a1\n");

        // Rejecting the apex rejects both descendants with it, so the
        // validated subdiagram is empty and the colimit is refused.
        let toml = format!("[colimit]\ndag = {dag_path:?}\nreject = [\"c\"]\n");
        let config = ExperimentConfig::from_toml(&toml).unwrap();
        let dir3 = tempfile::tempdir().unwrap();
        assert!(cmd_colimit(config.colimit.as_ref().unwrap(), &opts(dir3.path())).is_err());
    }

    #[test]
    fn run_log_keeps_timestamps_out_of_data_files() {
        let dir = tempfile::tempdir().unwrap();
        let config = ExperimentConfig::from_toml("[classify]\ntuples = [[2.0, 2.2, 0.5, 2]]\n")
            .unwrap();
        let paths = cmd_classify(config.classify.as_ref().unwrap(), &opts(dir.path())).unwrap();
        let log = fs::read_to_string(dir.path().join("run.log")).unwrap();
        assert!(log.contains("classify"));
        assert!(log.contains("verdicts.csv"));
        let data = fs::read_to_string(&paths[0]).unwrap();
        assert!(!data.contains('['));
    }
}
