//! End-to-end checks over the public API and the command layer: classifier
//! regimes and margins, the exponent recurrence, solver-versus-oracle
//! agreement, gradient assembly, ellipticity growth, the regularity
//! estimators, the threshold sweep, colimits, and byte-level determinism.
//! Every test prints one PASS line with its wall-clock time and asserts a
//! runtime budget, so a full run doubles as a performance smoke test.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fs;
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use varlab::commands::{cmd_classify, cmd_sweep, RunOptions};
use varlab::config::ExperimentConfig;
use varlab::dag::{ClaimDag, ClaimEdge, ClaimNode, ClaimStatus};
use varlab::fit::fit_log_log;
use varlab::grid::{discrete_gradient, integrate, DiscreteField, Grid};
use varlab::integrand::{ellipticity_ratio, ghost_regularize, CoefficientField, IntegrandSpec};
use varlab::io::{parse_sweep, parse_verdicts};
use varlab::metrics::{fit_caccioppoli, holder_exponent};
use varlab::solver::{assemble_objective_gradient, minimize, SolveConfig};
use varlab::threshold::{classify, moser_sequence, GrowthParams};

fn pass(name: &str, start: Instant, budget_seconds: f64) {
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < budget_seconds,
        "{name} took {elapsed:.2}s, over the {budget_seconds}s budget"
    );
    println!("{name}: PASS ({elapsed:.2}s, budget {budget_seconds}s)");
}

#[test]
fn a01_classifier_separates_four_regimes() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let config = ExperimentConfig::from_toml(
        "[classify]\ntuples = [[2.0, 2.0, 0.5, 3], [2.0, 2.9, 1.0, 2], [2.0, 2.4, 0.5, 3], [2.0, 3.2, 1.0, 2]]\n",
    )
    .unwrap();
    let paths =
        cmd_classify(config.classify.as_ref().unwrap(), &RunOptions::new(dir.path())).unwrap();
    let rows = parse_verdicts(&fs::read_to_string(&paths[0]).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    let names: Vec<&str> = rows.iter().map(|r| r.regime.as_str()).collect();
    assert_eq!(
        names,
        ["uniform_schauder", "sharp_schauder_holds", "double_phase_bounded", "counterexample_region"]
    );
    assert_eq!(names.iter().collect::<BTreeSet<_>>().len(), 4);
    pass("a01 classifier separates four regimes", start, 1.0);
}

#[test]
fn a02_margin_matches_threshold_formula_on_random_draws() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xa02);
    for _ in 0..10_000 {
        let p = rng.random_range(1.01..6.0);
        let q = p * rng.random_range(1.0..1.8);
        let alpha = 1.0 - rng.random::<f64>();
        let n: u32 = rng.random_range(2..=6);
        let params = GrowthParams::new(p, q, alpha, n).unwrap();
        let verdict = classify(&params);
        let expected = 1.0 + alpha / n as f64 - q / p;
        assert_eq!(verdict.margin.to_bits(), expected.to_bits(), "p={p} q={q} alpha={alpha} n={n}");
    }
    for _ in 0..200 {
        let p = rng.random_range(1.01..4.0);
        let alpha = 1.0 - rng.random::<f64>();
        let n: u32 = rng.random_range(2..=6);
        let mut qs: Vec<f64> = (0..8).map(|_| p * rng.random_range(1.0..2.2)).collect();
        qs.sort_by(f64::total_cmp);
        let ranks: Vec<u8> = qs
            .iter()
            .map(|&q| classify(&GrowthParams::new(p, q, alpha, n).unwrap()).regime.rank())
            .collect();
        assert!(ranks.windows(2).all(|w| w[0] <= w[1]), "ranks {ranks:?} not monotone in q");
    }
    pass("a02 margin formula and q-monotonicity over 10000 draws", start, 1.0);
}

#[test]
fn a03_moser_increments_reconstruct_bit_exactly() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xa03);
    for round in 0..1_000 {
        let t0 = rng.random_range(1.0..4.0);
        let sigma = rng.random_range(1e-3..2.0);
        let p = rng.random_range(1.5..4.0);
        let gamma = rng.random_range(0.0..2.0);
        let q = if round % 4 == 0 { p + gamma } else { rng.random_range(0.5..p + gamma + 1.5) };
        let iters = rng.random_range(1..64usize);
        let seq = moser_sequence(t0, sigma, p, gamma, q, iters, None).unwrap();
        assert_eq!(seq.t.len(), iters + 1);
        assert_eq!(seq.t[0].to_bits(), t0.to_bits());
        for i in 0..iters {
            let expected = seq.t[i] + sigma * (p + gamma - q);
            assert_eq!(seq.t[i + 1].to_bits(), expected.to_bits());
        }
        assert_eq!(seq.diverges, sigma > 0.0 && p + gamma - q > 0.0);
        if round % 4 == 0 {
            assert_eq!(seq.t[iters].to_bits(), t0.to_bits());
            assert!(!seq.diverges);
        }
    }
    pass("a03 exponent recurrence is bit-exact over 1000 draws", start, 1.0);
}

fn saddle(x: [f64; 2]) -> f64 {
    x[0] * x[0] - x[1] * x[1]
}

/// Reference minimizer for a quadratic energy: conjugate gradients on the
/// interior unknowns, with the operator applied through the assembled
/// objective gradient (affine in the field when the exponent is 2).
fn cg_reference_solution(
    spec: &IntegrandSpec,
    a: &CoefficientField,
    b: &CoefficientField,
    grid: Grid,
    boundary: &DiscreteField,
) -> DiscreteField {
    let side = grid.nodes_per_side();
    let mut interior = Vec::new();
    for j in 0..side {
        for i in 0..side {
            if !grid.is_boundary(i, j) {
                interior.push(grid.node_index(i, j));
            }
        }
    }
    let mut base = boundary.clone();
    for &k in &interior {
        base.values_mut()[k] = 0.0;
    }
    let g0: Vec<f64> = assemble_objective_gradient(spec, a, b, &base).unwrap().values().to_vec();
    let apply = |v: &[f64]| -> Vec<f64> {
        let mut w = base.clone();
        for (slot, &k) in interior.iter().enumerate() {
            w.values_mut()[k] = v[slot];
        }
        let g = assemble_objective_gradient(spec, a, b, &w).unwrap();
        interior.iter().map(|&k| g.values()[k] - g0[k]).collect()
    };

    let rhs: Vec<f64> = interior.iter().map(|&k| -g0[k]).collect();
    let mut x = vec![0.0f64; rhs.len()];
    let mut r = rhs;
    let mut p = r.clone();
    let mut rs: f64 = r.iter().map(|v| v * v).sum();
    let stop = 1e-13 * rs.sqrt();
    for _ in 0..40_000 {
        if rs.sqrt() <= stop {
            break;
        }
        let ap = apply(&p);
        let denom: f64 = p.iter().zip(&ap).map(|(u, w)| u * w).sum();
        let step = rs / denom;
        for k in 0..x.len() {
            x[k] += step * p[k];
            r[k] -= step * ap[k];
        }
        let rs_next: f64 = r.iter().map(|v| v * v).sum();
        let mix = rs_next / rs;
        rs = rs_next;
        for k in 0..p.len() {
            p[k] = r[k] + mix * p[k];
        }
    }
    assert!(rs.sqrt() <= stop, "reference conjugate gradients did not converge");

    let mut out = base;
    for (slot, &k) in interior.iter().enumerate() {
        out.values_mut()[k] = x[slot];
    }
    out
}

#[test]
fn a04_quadratic_solver_matches_linear_system_oracle() {
    let start = Instant::now();
    let spec = IntegrandSpec::p_power(2.0).unwrap();
    let a = CoefficientField::one();
    let b = CoefficientField::zero();
    for m in [16usize, 32, 64] {
        let grid = Grid::new(m).unwrap();
        let boundary = DiscreteField::from_fn(grid, saddle);
        let config = SolveConfig::single_stage(1e-9, 20_000).unwrap();
        let solve = minimize(&spec, &a, &b, grid, &boundary, &config).unwrap();
        assert!(solve.converged, "m={m} solve did not converge");
        let reference = cg_reference_solution(&spec, &a, &b, grid, &boundary);
        let worst = solve
            .field
            .values()
            .iter()
            .zip(reference.values())
            .map(|(u, v)| (u - v).abs())
            .fold(0.0f64, f64::max)
            ;
        assert!(worst < 1e-6, "m={m}: max nodal gap {worst:.3e} vs oracle");
    }
    pass("a04 quadratic minimizer matches conjugate-gradient oracle", start, 30.0);
}

#[test]
fn a05_assembled_gradient_matches_finite_differences() {
    let start = Instant::now();
    let grid = Grid::new(16).unwrap();
    let m = grid.m();
    let a = CoefficientField::constant(0.7).unwrap();
    let b = CoefficientField::constant(0.3).unwrap();
    let specs = [
        IntegrandSpec::p_power(2.0).unwrap(),
        IntegrandSpec::p_power(4.0).unwrap(),
        IntegrandSpec::double_phase(2.0, 3.0).unwrap(),
        ghost_regularize(&IntegrandSpec::log_multiphase(2.0, 2.0).unwrap(), 0.0, 0.01).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0xa05);
    let mut field = DiscreteField::from_fn(grid, |x| {
        0.4 * (2.0 * PI * x[0]).sin() * (PI * x[1]).cos() + 0.3 * x[0] * x[1]
    });
    for v in field.values_mut() {
        *v += 0.2 * (rng.random::<f64>() - 0.5);
    }
    let delta = 1e-6;
    for spec in &specs {
        let assembled = assemble_objective_gradient(spec, &a, &b, &field).unwrap();
        for _ in 0..50 {
            let i = rng.random_range(1..m);
            let j = rng.random_range(1..m);
            let k = grid.node_index(i, j);
            let mut plus = field.clone();
            plus.values_mut()[k] += delta;
            let mut minus = field.clone();
            minus.values_mut()[k] -= delta;
            let fd = (integrate(spec, &a, &b, &plus).unwrap()
                - integrate(spec, &a, &b, &minus).unwrap())
                / (2.0 * delta);
            let g = assembled.values()[k];
            let rel = (g - fd).abs() / g.abs().max(fd.abs()).max(1e-10);
            assert!(rel < 1e-4, "{:?} node ({i},{j}): assembled {g:.6e} vs fd {fd:.6e}", spec.family());
        }
    }
    pass("a05 assembled gradient matches central differences", start, 30.0);
}

#[test]
fn a06_ellipticity_ratio_grows_at_the_gap_rate() {
    let start = Instant::now();
    let a = CoefficientField::one();
    let b = CoefficientField::zero();
    let x = [0.25, 0.75];
    let direction = [0.3f64.cos(), 0.3f64.sin()];
    for (p, q) in [(2.0, 3.0), (2.0, 3.5)] {
        let spec = IntegrandSpec::double_phase(p, q).unwrap();
        let count = 40;
        let mut magnitudes = Vec::with_capacity(count);
        let mut ratios = Vec::with_capacity(count);
        for k in 0..count {
            let t = 10f64.powf(1.0 + 3.0 * k as f64 / (count - 1) as f64);
            let z = [t * direction[0], t * direction[1]];
            magnitudes.push(t);
            ratios.push(ellipticity_ratio(&spec, &a, &b, x, z).unwrap());
        }
        let fit = fit_log_log(&magnitudes, &ratios).unwrap();
        let gap = q - p;
        assert!(
            (fit.slope - gap).abs() <= 0.05 * gap,
            "q-p={gap}: fitted slope {} off by more than 5%",
            fit.slope
        );
    }
    pass("a06 ellipticity ratio grows like the exponent gap", start, 5.0);
}

#[test]
fn a07_holder_estimator_recovers_cusp_exponents() {
    let start = Instant::now();
    let grid = Grid::new(128).unwrap();
    let radii = [0.25, 0.177, 0.125, 0.088, 0.0625, 0.0442, 0.03125];
    for target in [0.3, 0.5, 0.7] {
        let field = DiscreteField::from_fn(grid, |x| {
            let dx = x[0] - 0.5;
            let dy = x[1] - 0.5;
            (dx * dx + dy * dy).sqrt().powf(1.0 + target)
        });
        let grads = discrete_gradient(&field);
        let estimate = holder_exponent(&grads, [0.5, 0.5], &radii).unwrap();
        assert!(
            (estimate.exponent - target).abs() <= 0.1,
            "target {target}: estimated {}",
            estimate.exponent
        );
    }
    pass("a07 oscillation-decay estimator recovers cusp exponents", start, 10.0);
}

#[test]
fn a08_difference_quotient_fit_on_harmonic_baseline() {
    let start = Instant::now();
    let spec = IntegrandSpec::p_power(2.0).unwrap();
    let a = CoefficientField::one();
    let b = CoefficientField::zero();
    let grid = Grid::new(64).unwrap();
    let boundary = DiscreteField::from_fn(grid, saddle);
    let config = SolveConfig::single_stage(1e-9, 20_000).unwrap();
    let solve = minimize(&spec, &a, &b, grid, &boundary, &config).unwrap();
    assert!(solve.converged);
    let grads = discrete_gradient(&solve.field);
    let fit = fit_caccioppoli(&grads, 2.0, 2.0, &[(1, 0), (2, 0), (4, 0), (8, 0)]).unwrap();
    assert!(
        (fit.s_order - 1.0).abs() <= 0.1,
        "smooth baseline fitted order {} away from 1",
        fit.s_order
    );
    assert!(fit.residual < 0.1, "log-log residual {} too large", fit.residual);
    pass("a08 difference-quotient fit is first order on a harmonic field", start, 60.0);
}

#[test]
fn a09_holder_exponent_drops_across_the_threshold() {
    let start = Instant::now();
    let toml = "[sweep]\np = 2.0\nalpha = 0.5\nq_grid = [2.1, 2.2, 2.3, 2.7, 2.8, 2.9]\nm = 64\n\
         coefficient = { kind = \"distance_power\", alpha = 0.5, amplitude = 1.0, offset = 0.5 }\n\
         boundary = { kind = \"ramp_wave\", slope = 3.0, wobble = 0.5 }\n\
         [sweep.solve]\ntol_grad = 1e-7\nmax_iters = 40000\n";
    let config = ExperimentConfig::from_toml(toml).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = cmd_sweep(config.sweep.as_ref().unwrap(), &RunOptions::new(dir.path())).unwrap();
    let rows = parse_sweep(&fs::read_to_string(&paths[0]).unwrap()).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.converged), "a sweep solve failed to converge");
    let mean = |lo: usize, hi: usize| -> f64 {
        rows[lo..hi].iter().map(|r| r.holder_exponent).sum::<f64>() / (hi - lo) as f64
    };
    let below = mean(0, 3);
    let above = mean(3, 6);
    assert!(
        below > above,
        "mean exponent below threshold {below:.3} does not exceed {above:.3} above it"
    );
    pass(
        &format!(
            "a09 mean exponent {below:.3} below threshold vs {above:.3} above"
        ),
        start,
        600.0,
    );
}

#[test]
fn a10_colimit_matches_merge_oracle_on_random_diagrams() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xa10);
    let mut nontrivial = 0usize;
    for round in 0..200 {
        let node_count = rng.random_range(1..=6usize);
        let mut dag = ClaimDag::new();
        let mut payloads: Vec<Vec<String>> = Vec::new();
        for k in 0..node_count {
            let size = rng.random_range(1..=8usize);
            let labels: Vec<String> = (0..size).map(|e| format!("e{e}")).collect();
            dag.add_claim(ClaimNode::new(format!("n{k}"), format!("claim {k}"), labels.clone()).unwrap())
                .unwrap();
            payloads.push(labels);
        }
        let mut edges: Vec<(usize, usize, Vec<(String, String)>)> = Vec::new();
        if node_count >= 2 {
            for _ in 0..rng.random_range(0..=10usize) {
                let s = rng.random_range(0..node_count - 1);
                let t = rng.random_range(s + 1..node_count);
                let pairs: Vec<(String, String)> = payloads[s]
                    .iter()
                    .map(|l| {
                        (l.clone(), payloads[t][rng.random_range(0..payloads[t].len())].clone())
                    })
                    .collect();
                let edge = ClaimEdge::new(format!("n{s}"), format!("n{t}"), pairs.clone()).unwrap();
                if dag.add_edge(edge).is_ok() {
                    edges.push((s, t, pairs));
                }
            }
        }
        let keep: Vec<bool> = (0..node_count).map(|_| rng.random::<f64>() < 0.8).collect();
        dag.validate(|node| keep[node.id()[1..].parse::<usize>().unwrap()]).unwrap();
        let validated: BTreeSet<usize> = (0..node_count)
            .filter(|&k| dag.node(&format!("n{k}")).unwrap().status() == ClaimStatus::Validated)
            .collect();
        for &(s, t, _) in &edges {
            if validated.contains(&t) {
                assert!(validated.contains(&s), "round {round}: target kept without its source");
            }
        }
        if validated.is_empty() {
            assert!(dag.colimit().is_err());
            continue;
        }
        let result = dag.colimit().unwrap();

        let mut classes: Vec<BTreeSet<(String, String)>> = Vec::new();
        for &k in &validated {
            for label in &payloads[k] {
                classes.push(BTreeSet::from([(format!("n{k}"), label.clone())]));
            }
        }
        let mut merged_any = false;
        loop {
            let mut changed = false;
            for (s, t, pairs) in &edges {
                if !(validated.contains(s) && validated.contains(t)) {
                    continue;
                }
                for (from, to) in pairs {
                    let one = (format!("n{s}"), from.clone());
                    let two = (format!("n{t}"), to.clone());
                    let i1 = classes.iter().position(|c| c.contains(&one)).unwrap();
                    let i2 = classes.iter().position(|c| c.contains(&two)).unwrap();
                    if i1 != i2 {
                        let moved = classes.remove(i1.max(i2));
                        classes[i1.min(i2)].extend(moved);
                        changed = true;
                        merged_any = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if merged_any {
            nontrivial += 1;
        }
        let mut oracle: Vec<Vec<(String, String)>> =
            classes.into_iter().map(|c| c.into_iter().collect()).collect();
        oracle.sort();
        assert_eq!(result.classes(), &oracle[..], "round {round}: partition mismatch");

        for (s, t, pairs) in &edges {
            if !(validated.contains(s) && validated.contains(t)) {
                continue;
            }
            for (from, to) in pairs {
                assert_eq!(
                    result.class_of(&format!("n{s}"), from),
                    result.class_of(&format!("n{t}"), to),
                    "round {round}: cocone does not commute on n{s} -> n{t}"
                );
            }
        }
    }
    assert!(nontrivial >= 50, "only {nontrivial} of 200 diagrams merged anything");
    pass("a10 colimit agrees with the fixpoint-merge oracle", start, 5.0);
}

#[test]
fn a11_identical_sweep_runs_are_byte_identical() {
    let start = Instant::now();
    let toml = "[sweep]\np = 2.0\nalpha = 0.5\nq_grid = [2.2, 2.8]\nm = 32\n\
         coefficient = { kind = \"distance_power\", alpha = 0.5, amplitude = 1.0, offset = 0.5 }\n\
         boundary = { kind = \"ramp_wave\", slope = 3.0, wobble = 0.5 }\n\
         [sweep.solve]\ntol_grad = 1e-6\nmax_iters = 8000\n";
    let config = ExperimentConfig::from_toml(toml).unwrap();
    let section = config.sweep.as_ref().unwrap();
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    let paths1 = cmd_sweep(section, &RunOptions::new(dir1.path())).unwrap();
    let paths2 = cmd_sweep(section, &RunOptions::new(dir2.path())).unwrap();
    assert_eq!(paths1.len(), paths2.len());
    for (one, two) in paths1.iter().zip(&paths2) {
        assert_eq!(one.file_name(), two.file_name());
        assert_eq!(
            fs::read(one).unwrap(),
            fs::read(two).unwrap(),
            "{:?} differs between identical runs",
            one.file_name()
        );
    }
    pass("a11 identical sweep runs write identical bytes", start, 120.0);
}
