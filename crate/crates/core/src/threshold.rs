//! Growth-parameter classification against the sharp threshold
//! `q/p < 1 + alpha/n`, plus the integrability bootstrap recurrence.
//!
//! Everything here is exact parameter arithmetic: no tolerances, no grids.
//! The classifier reports the signed margin `1 + alpha/n - q/p` and a regime
//! verdict; the recurrence materializes the exponent sequence
//! `t[i+1] = t[i] + sigma * (p + gamma - q)` and its divergence flag.

use crate::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// Growth and regularity parameters of an energy density.
///
/// Invariants (enforced at construction): `1 < p <= q`, `alpha` in `(0, 1]`,
/// `n >= 2`. The optional `beta` (second coefficient exponent, in `(0, 1]`)
/// and `s_exp` (third growth exponent, `> 1`) ride along for multi-phase
/// setups but do not enter the classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthParams {
    p: f64,
    q: f64,
    alpha: f64,
    n: u32,
    beta: Option<f64>,
    s_exp: Option<f64>,
}

impl GrowthParams {
    pub fn new(p: f64, q: f64, alpha: f64, n: u32) -> Result<Self> {
        if !(p.is_finite() && q.is_finite() && alpha.is_finite()) {
            return Err(Error::invalid("growth parameters must be finite"));
        }
        if p <= 1.0 {
            return Err(Error::invalid(format!("p = {p} must exceed 1")));
        }
        if q < p {
            return Err(Error::invalid(format!("q = {q} must not be below p = {p}")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!("alpha = {alpha} must lie in (0, 1]")));
        }
        if n < 2 {
            return Err(Error::invalid(format!("dimension n = {n} must be at least 2")));
        }
        Ok(GrowthParams { p, q, alpha, n, beta: None, s_exp: None })
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0 && beta <= 1.0) {
            return Err(Error::invalid(format!("beta = {beta} must lie in (0, 1]")));
        }
        self.beta = Some(beta);
        Ok(self)
    }

    pub fn with_s_exp(mut self, s_exp: f64) -> Result<Self> {
        if !(s_exp.is_finite() && s_exp > 1.0) {
            return Err(Error::invalid(format!("s_exp = {s_exp} must exceed 1")));
        }
        self.s_exp = Some(s_exp);
        Ok(self)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    pub fn s_exp(&self) -> Option<f64> {
        self.s_exp
    }
}

/// Outcome class of the growth-parameter classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `q = p`: uniformly elliptic, full gradient Hoelder regularity.
    UniformSchauder,
    /// Positive margin: the sharp nonuniform condition holds.
    SharpSchauderHolds,
    /// Negative margin but `q <= p + alpha`: gradient regularity may fail,
    /// bounded minimizers stay Hoelder continuous. Nonempty only for `p < n`.
    DoublePhaseBounded,
    /// Negative margin and `q > p + alpha`: counterexamples territory.
    CounterexampleRegion,
    /// Margin exactly zero.
    Borderline,
}

impl Regime {
    pub const ALL: [Regime; 5] = [
        Regime::UniformSchauder,
        Regime::SharpSchauderHolds,
        Regime::DoublePhaseBounded,
        Regime::CounterexampleRegion,
        Regime::Borderline,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::UniformSchauder => "uniform_schauder",
            Regime::SharpSchauderHolds => "sharp_schauder_holds",
            Regime::DoublePhaseBounded => "double_phase_bounded",
            Regime::CounterexampleRegion => "counterexample_region",
            Regime::Borderline => "borderline",
        }
    }

    /// Position along the q-axis at fixed `(p, alpha, n)`. Scanning q upward
    /// walks through these ranks without ever going back.
    pub fn rank(&self) -> u8 {
        match self {
            Regime::UniformSchauder => 0,
            Regime::SharpSchauderHolds => 1,
            Regime::Borderline => 2,
            Regime::DoublePhaseBounded => 3,
            Regime::CounterexampleRegion => 4,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Regime::ALL
            .iter()
            .copied()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown regime name {s:?}")))
    }
}

/// Classification result: the regime and the signed threshold margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityVerdict {
    pub regime: Regime,
    /// `1 + alpha/n - q/p`, evaluated in exactly that order. Positive inside
    /// the sharp region, zero on the borderline, negative beyond it.
    pub margin: f64,
}

/// Classifies growth parameters against the sharp threshold.
///
/// Decision order: `q = p` is uniformly elliptic regardless of margin (the
/// margin `alpha/n` is still reported); otherwise the sign of the margin
/// decides, with the negative side split by the double-phase bound
/// `q <= p + alpha` into [`Regime::DoublePhaseBounded`] and
/// [`Regime::CounterexampleRegion`]. A margin of exactly zero is reported as
/// [`Regime::Borderline`]; no tolerance is applied anywhere.
pub fn classify(params: &GrowthParams) -> RegularityVerdict {
    let margin = 1.0 + params.alpha / params.n as f64 - params.q / params.p;
    let regime = if params.q == params.p {
        Regime::UniformSchauder
    } else if margin > 0.0 {
        Regime::SharpSchauderHolds
    } else if margin == 0.0 {
        Regime::Borderline
    } else if params.q <= params.p + params.alpha {
        Regime::DoublePhaseBounded
    } else {
        Regime::CounterexampleRegion
    };
    RegularityVerdict { regime, margin }
}

/// Whether `(p, q, alpha)` satisfies the double-phase bound `q <= p + alpha`
/// under which bounded minimizers stay Hoelder continuous.
pub fn double_phase_bound(p: f64, q: f64, alpha: f64) -> Result<bool> {
    // Dimension does not enter the bound; validate the shared constraints
    // through a throwaway params value with the smallest legal n.
    GrowthParams::new(p, q, alpha, 2)?;
    Ok(q <= p + alpha)
}

/// Exponent sequence produced by [`moser_sequence`].
#[derive(Debug, Clone, PartialEq)]
pub struct MoserSequence {
    /// Achieved integrability exponents, `max_iters + 1` entries.
    pub t: Vec<f64>,
    pub sigma: f64,
    pub gamma: f64,
    /// True exactly when `sigma > 0` and `p + gamma - q > 0`.
    pub diverges: bool,
    /// Smallest `i` with `t0 + i * increment >= target`, reported only for
    /// diverging sequences with a target. Computed arithmetically from the
    /// recurrence, so it may exceed `max_iters`.
    pub steps_to_target: Option<u64>,
}

/// Materializes `t[i+1] = t[i] + sigma * (p + gamma - q)` from `t[0] = t0`.
///
/// Requires `t0 >= 1`, `sigma > 0`, `max_iters >= 1` and finite inputs.
/// `gamma` is the caller's choice of bootstrap gain; there is no default.
pub fn moser_sequence(
    t0: f64,
    sigma: f64,
    p: f64,
    gamma: f64,
    q: f64,
    max_iters: usize,
    target: Option<f64>,
) -> Result<MoserSequence> {
    for (name, v) in [("t0", t0), ("sigma", sigma), ("p", p), ("gamma", gamma), ("q", q)] {
        if !v.is_finite() {
            return Err(Error::invalid(format!("{name} = {v} must be finite")));
        }
    }
    if t0 < 1.0 {
        return Err(Error::invalid(format!("t0 = {t0} must be at least 1")));
    }
    if sigma <= 0.0 {
        return Err(Error::invalid(format!("sigma = {sigma} must be positive")));
    }
    if max_iters == 0 {
        return Err(Error::invalid("max_iters must be at least 1"));
    }
    if let Some(tg) = target {
        if !tg.is_finite() {
            return Err(Error::invalid(format!("target = {tg} must be finite")));
        }
    }

    let increment = sigma * (p + gamma - q);
    let mut t = Vec::with_capacity(max_iters + 1);
    t.push(t0);
    for i in 0..max_iters {
        t.push(t[i] + increment);
    }
    let diverges = sigma > 0.0 && p + gamma - q > 0.0;

    let steps_to_target = match target {
        Some(tg) if diverges => {
            if t0 >= tg {
                Some(0)
            } else {
                let mut i = ((tg - t0) / increment).ceil().max(1.0) as u64;
                while i > 0 && t0 + (i - 1) as f64 * increment >= tg {
                    i -= 1;
                }
                while t0 + i as f64 * increment < tg {
                    i += 1;
                }
                Some(i)
            }
        }
        _ => None,
    };

    Ok(MoserSequence { t, sigma, gamma, diverges, steps_to_target })
}

/// Gradient integrability prediction attached to a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrability {
    /// The gradient is locally integrable to every finite power.
    AllFiniteExponents,
    /// No such conclusion from the parameters alone.
    NotGuaranteed,
}

/// Predicts gradient integrability from the classification: every finite
/// exponent is reached exactly in the uniform and sharp regimes.
pub fn predicted_integrability(params: &GrowthParams) -> Integrability {
    match classify(params).regime {
        Regime::UniformSchauder | Regime::SharpSchauderHolds => Integrability::AllFiniteExponents,
        _ => Integrability::NotGuaranteed,
    }
}
