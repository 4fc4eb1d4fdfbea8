//! Exponents of error patterns, their envelope over pattern lengths, and
//! rate sweeps.
//!
//! A window of `K` codeword slots is cut by the delay into `2K` subblocks.
//! Subblock `k` carries weight `e_k = 1 - α` for odd `k` and `α` for even
//! `k`, where `α = d/n` is the fractional part of the delay. An error
//! pattern is summarized by the subblock sets `S1` (only sender 1 wrong),
//! `S2` (only sender 2 wrong) and `S12` (both wrong), and its exponent is the
//! case-split value for `β_i = Σ_{k ∈ S_i} e_k` at
//! `r = β1 R1 + β2 R2 + β12 (R1 + R2)`.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::MacChannel;
use crate::error::{Error, Result};
use crate::exponent::{BetaCoefficients, CaseSplit, ExponentEngine, Regime, SolverConfig};
use crate::exponent::MarginalConstraint;
use crate::prob::{Dist, InfoKind};

/// Which sender's codeword error opens the pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sender {
    One,
    Two,
}

impl Sender {
    pub fn index(self) -> u8 {
        match self {
            Sender::One => 1,
            Sender::Two => 2,
        }
    }

    pub fn from_index(j: u8) -> Result<Self> {
        match j {
            1 => Ok(Sender::One),
            2 => Ok(Sender::Two),
            other => Err(Error::Usage(format!("sender index must be 1 or 2, got {other}"))),
        }
    }
}

/// Irreducible error pattern of length `len` opened by sender `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct IrreduciblePattern {
    pub len: usize,
    pub j: Sender,
}

impl IrreduciblePattern {
    pub fn new(len: usize, j: u8) -> Result<Self> {
        if len == 0 {
            return Err(Error::Usage("pattern length must be at least 1".into()));
        }
        Ok(Self {
            len,
            j: Sender::from_index(j)?,
        })
    }
}

impl std::fmt::Display for IrreduciblePattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.len, self.j.index())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha {alpha} outside [0, 1]")));
    }
    Ok(())
}

/// β weights of an irreducible pattern.
pub fn beta_coefficients(len: usize, j: u8, alpha: f64) -> Result<BetaCoefficients> {
    let pattern = IrreduciblePattern::new(len, j)?;
    check_alpha(alpha)?;
    Ok(betas_of(pattern, alpha))
}

fn betas_of(p: IrreduciblePattern, alpha: f64) -> BetaCoefficients {
    let l = p.len as f64;
    let (b1, b2, b12) = match (p.len % 2 == 1, p.j) {
        (true, Sender::One) => (1.0, 0.0, (l - 1.0) / 2.0),
        (true, Sender::Two) => (0.0, 1.0, (l - 1.0) / 2.0),
        (false, Sender::One) => (1.0 - alpha, 1.0 - alpha, alpha + l / 2.0 - 1.0),
        (false, Sender::Two) => (alpha, alpha, l / 2.0 - alpha),
    };
    BetaCoefficients { b1, b2, b12 }
}

/// Subblock weight: `1 - α` for odd `k`, `α` for even `k` (1-based).
pub fn subblock_weight(k: usize, alpha: f64) -> f64 {
    if k % 2 == 1 {
        1.0 - alpha
    } else {
        alpha
    }
}

/// Subblock sets `(S1, S2, S12)` of the irreducible pattern with support
/// `{k0, ..., k0 + len}`.
pub fn irreducible_sets(k0: usize, len: usize) -> Result<[BTreeSet<usize>; 3]> {
    if k0 == 0 || len == 0 {
        return Err(Error::Usage("subblocks are numbered from 1 and patterns have length ≥ 1".into()));
    }
    let end = k0 + len;
    let mut s1 = BTreeSet::new();
    let mut s2 = BTreeSet::new();
    let s12: BTreeSet<usize> = (k0 + 1..end).collect();
    // an odd subblock opens an X block, an even one opens a Y block
    if k0 % 2 == 1 {
        s1.insert(k0);
    } else {
        s2.insert(k0);
    }
    // an even subblock closes an X block, an odd one closes a Y block
    if end.is_multiple_of(2) {
        s1.insert(end);
    } else {
        s2.insert(end);
    }
    Ok([s1, s2, s12])
}

/// The pattern (length and opening sender) of an irreducible support.
pub fn irreducible_pattern_at(k0: usize, len: usize) -> Result<IrreduciblePattern> {
    IrreduciblePattern::new(len, if k0 % 2 == 1 { 1 } else { 2 })
}

/// β weights of arbitrary disjoint subblock sets within `[2K]`.
pub fn betas_from_sets(
    s1: &BTreeSet<usize>,
    s2: &BTreeSet<usize>,
    s12: &BTreeSet<usize>,
    alpha: f64,
    k: usize,
) -> Result<BetaCoefficients> {
    check_alpha(alpha)?;
    let sets = [s1, s2, s12];
    for (a, sa) in sets.iter().enumerate() {
        if let Some(&bad) = sa.iter().find(|&&i| i == 0 || i > 2 * k) {
            return Err(Error::Usage(format!("subblock {bad} outside [1, {}]", 2 * k)));
        }
        for sb in &sets[a + 1..] {
            if let Some(i) = sa.intersection(sb).next() {
                return Err(Error::Usage(format!("subblock {i} appears in two sets")));
            }
        }
    }
    let weight = |s: &BTreeSet<usize>| s.iter().map(|&i| subblock_weight(i, alpha)).sum();
    Ok(BetaCoefficients {
        b1: weight(s1),
        b2: weight(s2),
        b12: weight(s12),
    })
}

/// Inputs shared by every pattern exponent at one operating point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentQuery {
    pub alpha: f64,
    pub px: Dist,
    pub py: Dist,
    pub w: MacChannel,
    pub r1: f64,
    pub r2: f64,
}

impl ExponentQuery {
    fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if !(self.r1 >= 0.0 && self.r2 >= 0.0) || !self.r1.is_finite() || !self.r2.is_finite() {
            return Err(Error::Domain(format!(
                "rates ({}, {}) must be finite and nonnegative",
                self.r1, self.r2
            )));
        }
        Ok(())
    }

    /// A solver engine for this query's reference joint.
    pub fn engine(&self, cfg: &SolverConfig) -> Result<ExponentEngine> {
        let p = self.w.joint(&self.px, &self.py)?;
        ExponentEngine::new(p, MarginalConstraint::new(self.px.clone(), self.py.clone()), *cfg)
    }
}

/// Exponent of the irreducible pattern `(len, j)`.
pub fn pattern_exponent(q: &ExponentQuery, pattern: IrreduciblePattern, cfg: &SolverConfig) -> Result<CaseSplit> {
    q.validate()?;
    let mut engine = q.engine(cfg)?;
    pattern_with(&mut engine, q, pattern)
}

fn pattern_with(engine: &mut ExponentEngine, q: &ExponentQuery, pattern: IrreduciblePattern) -> Result<CaseSplit> {
    let betas = betas_of(pattern, q.alpha);
    engine.case_split(&betas, betas.rate_combination(q.r1, q.r2))
}

/// Exponent of an arbitrary pattern given by its subblock sets.
pub fn general_pattern_exponent(
    sets: [&BTreeSet<usize>; 3],
    q: &ExponentQuery,
    k: usize,
    cfg: &SolverConfig,
) -> Result<CaseSplit> {
    q.validate()?;
    let betas = betas_from_sets(sets[0], sets[1], sets[2], q.alpha, k)?;
    q.engine(cfg)?.case_split(&betas, betas.rate_combination(q.r1, q.r2))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternValue {
    pub pattern: IrreduciblePattern,
    pub exponent: f64,
    pub regime: Regime,
}

/// Minimum over all irreducible patterns of length at most `M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub value: f64,
    /// Smallest-length (then sender 1) minimizer.
    pub dominant: IrreduciblePattern,
    /// Every pattern within [`ARGMIN_TOL`] of the minimum.
    pub argmins: Vec<IrreduciblePattern>,
    pub regime: Regime,
    pub values: Vec<PatternValue>,
}

/// Patterns whose exponents are this close to the minimum count as argmins.
pub const ARGMIN_TOL: f64 = 1e-9;

/// `min_{L ≤ M, j} E^α(L, j)`.
pub fn envelope_exponent(q: &ExponentQuery, m: usize, cfg: &SolverConfig) -> Result<Envelope> {
    q.validate()?;
    let mut engine = q.engine(cfg)?;
    envelope_with(&mut engine, q, m)
}

fn envelope_with(engine: &mut ExponentEngine, q: &ExponentQuery, m: usize) -> Result<Envelope> {
    if m == 0 {
        return Err(Error::Usage("the envelope needs M ≥ 1".into()));
    }
    let mut values = Vec::with_capacity(2 * m);
    for len in 1..=m {
        for j in [Sender::One, Sender::Two] {
            let pattern = IrreduciblePattern { len, j };
            let cs = pattern_with(engine, q, pattern)?;
            values.push(PatternValue {
                pattern,
                exponent: cs.exponent,
                regime: cs.regime,
            });
        }
    }
    let value = values.iter().map(|v| v.exponent).fold(f64::INFINITY, f64::min);
    let argmins: Vec<IrreduciblePattern> = values
        .iter()
        .filter(|v| v.exponent <= value + ARGMIN_TOL)
        .map(|v| v.pattern)
        .collect();
    let dominant = argmins[0];
    let regime = values.iter().find(|v| v.pattern == dominant).map(|v| v.regime).unwrap_or(Regime::Zero);
    Ok(Envelope {
        value,
        dominant,
        argmins,
        regime,
        values,
    })
}

/// Direction of a rate sweep: `R1 = d1 R`, `R2 = d2 R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRay {
    pub d1: f64,
    pub d2: f64,
}

impl Default for RateRay {
    fn default() -> Self {
        Self { d1: 1.0, d2: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub rate: f64,
    /// `None` when the solver failed at this rate; see `error`.
    pub envelope: Option<Envelope>,
    pub error: Option<String>,
}

impl SweepPoint {
    pub fn exponent(&self) -> Option<f64> {
        self.envelope.as_ref().map(|e| e.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub m: usize,
    pub ray: RateRay,
    pub points: Vec<SweepPoint>,
    /// Midpoint between the last grid rate with a positive exponent and the
    /// first grid rate after it with a zero exponent.
    pub r_sup_grid: Option<f64>,
    /// Exact positivity threshold along the ray.
    pub r_sup: f64,
}

/// Positive-exponent threshold: below this, a value counts as zero.
pub const ZERO_EXPONENT: f64 = 1e-12;

/// Envelope exponent at every rate of a monotone grid along `ray`.
///
/// Each rate starts from the same solver state, so the output does not depend
/// on how the rates are scheduled across threads.
pub fn rate_sweep(
    template: &ExponentQuery,
    ray: RateRay,
    rates: &[f64],
    m: usize,
    cfg: &SolverConfig,
) -> Result<SweepResult> {
    check_alpha(template.alpha)?;
    if rates.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Usage("rate grid must be strictly increasing".into()));
    }
    if rates.iter().any(|&r| !r.is_finite() || r < 0.0) || !(ray.d1 >= 0.0 && ray.d2 >= 0.0) {
        return Err(Error::Domain("rates and ray direction must be nonnegative".into()));
    }
    let mut base = template.engine(cfg)?;
    for kind in InfoKind::ALL {
        base.solution(kind, 0.0)?;
        base.solution(kind, 1.0)?;
    }
    let points: Vec<SweepPoint> = rates
        .par_iter()
        .map(|&rate| {
            let mut engine = base.fork();
            let q = ExponentQuery {
                r1: ray.d1 * rate,
                r2: ray.d2 * rate,
                ..template.clone()
            };
            match envelope_with(&mut engine, &q, m) {
                Ok(env) => SweepPoint {
                    rate,
                    envelope: Some(env),
                    error: None,
                },
                Err(e) => SweepPoint {
                    rate,
                    envelope: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let r_sup = positivity_threshold(&base, template.alpha, ray, m);
    let r_sup_grid = grid_zero_crossing(&points);
    Ok(SweepResult {
        m,
        ray,
        points,
        r_sup_grid,
        r_sup,
    })
}

fn grid_zero_crossing(points: &[SweepPoint]) -> Option<f64> {
    let last_pos = points
        .iter()
        .rposition(|p| p.exponent().is_some_and(|e| e > ZERO_EXPONENT))?;
    let next = points[last_pos + 1..]
        .iter()
        .find(|p| p.exponent().is_some_and(|e| e <= ZERO_EXPONENT))?;
    Some(0.5 * (points[last_pos].rate + next.rate))
}

/// Smallest `R` along the ray at which every pattern exponent up to length
/// `M` vanishes, i.e. `min_{L, j} Σ β_i I^i_P / (rate weight of β)`.
fn positivity_threshold(engine: &ExponentEngine, alpha: f64, ray: RateRay, m: usize) -> f64 {
    let p = engine.reference();
    let info = [p.info(InfoKind::I1), p.info(InfoKind::I2), p.info(InfoKind::I12)];
    let mut best = f64::INFINITY;
    for len in 1..=m {
        for j in [Sender::One, Sender::Two] {
            let b = betas_of(IrreduciblePattern { len, j }, alpha);
            let num = b.b1 * info[0] + b.b2 * info[1] + b.b12 * info[2];
            let den = b.rate_combination(ray.d1, ray.d2);
            if den > 0.0 {
                best = best.min(num / den);
            }
        }
    }
    best
}

/// Positivity threshold of the envelope along `ray`.
pub fn envelope_r_sup(template: &ExponentQuery, ray: RateRay, m: usize, cfg: &SolverConfig) -> Result<f64> {
    check_alpha(template.alpha)?;
    Ok(positivity_threshold(&template.engine(cfg)?, template.alpha, ray, m))
}

/// `R (1 - 1/K)`: the rate once the sync slot is paid for.
pub fn effective_rate(rate: f64, k: usize) -> f64 {
    rate * (1.0 - 1.0 / k as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayBounds {
    /// `min_α E^{α, 2K-2}`.
    pub worst: f64,
    pub worst_alpha: f64,
    /// `max_α E^{α, K}`.
    pub best: f64,
    pub best_alpha: f64,
}

/// Grid step for the α search before refinement.
pub const ALPHA_GRID_STEP: f64 = 0.01;

/// Worst delay (uncontrolled) and best delay (controlled) exponents.
pub fn best_worst_delay(template: &ExponentQuery, k: usize, cfg: &SolverConfig) -> Result<DelayBounds> {
    if k < 2 {
        return Err(Error::Usage("need K ≥ 2".into()));
    }
    template.validate()?;
    let mut engine = template.engine(cfg)?;
    let at = |alpha: f64, m: usize, engine: &mut ExponentEngine| -> Result<f64> {
        let q = ExponentQuery {
            alpha,
            ..template.clone()
        };
        Ok(envelope_with(engine, &q, m)?.value)
    };
    let (worst_alpha, worst) = optimize_alpha(|a| at(a, 2 * k - 2, &mut engine), false)?;
    let (best_alpha, best) = optimize_alpha(|a| at(a, k, &mut engine), true)?;
    Ok(DelayBounds {
        worst,
        worst_alpha,
        best,
        best_alpha,
    })
}

/// Grid search over `[0, 1]` followed by golden-section refinement on the
/// two cells around the grid winner.
fn optimize_alpha(mut f: impl FnMut(f64) -> Result<f64>, maximize: bool) -> Result<(f64, f64)> {
    let sign = if maximize { -1.0 } else { 1.0 };
    let n = (1.0 / ALPHA_GRID_STEP).round() as usize;
    let mut best = (0.0, f64::INFINITY);
    for i in 0..=n {
        let a = i as f64 / n as f64;
        let v = sign * f(a)?;
        if v < best.1 {
            best = (a, v);
        }
    }
    let (mut lo, mut hi) = ((best.0 - ALPHA_GRID_STEP).max(0.0), (best.0 + ALPHA_GRID_STEP).min(1.0));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let mut fc = sign * f(c)?;
    let mut fd = sign * f(d)?;
    for _ in 0..40 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = sign * f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = sign * f(d)?;
        }
    }
    for (a, v) in [(c, fc), (d, fd)] {
        if v < best.1 {
            best = (a, v);
        }
    }
    Ok((best.0, sign * best.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_tables() {
        assert_eq!(beta_coefficients(1, 1, 0.3).unwrap(), BetaCoefficients { b1: 1.0, b2: 0.0, b12: 0.0 });
        assert_eq!(beta_coefficients(2, 2, 0.5).unwrap(), BetaCoefficients { b1: 0.5, b2: 0.5, b12: 0.5 });
        assert_eq!(beta_coefficients(5, 1, 0.8).unwrap(), BetaCoefficients { b1: 1.0, b2: 0.0, b12: 2.0 });
        assert!(beta_coefficients(0, 1, 0.5).is_err());
        assert!(beta_coefficients(3, 3, 0.5).is_err());
        assert!(beta_coefficients(3, 1, 1.5).is_err());
    }

    #[test]
    fn sets_match_tables() {
        for k0 in 1..=6 {
            for len in 1..=10 {
                let [s1, s2, s12] = irreducible_sets(k0, len).unwrap();
                let pattern = irreducible_pattern_at(k0, len).unwrap();
                for alpha in [0.0, 0.25, 0.5, 1.0] {
                    let from_sets = betas_from_sets(&s1, &s2, &s12, alpha, 20).unwrap();
                    let table = betas_of(pattern, alpha);
                    assert!((from_sets.b1 - table.b1).abs() < 1e-12, "{k0} {len} {alpha}");
                    assert!((from_sets.b2 - table.b2).abs() < 1e-12, "{k0} {len} {alpha}");
                    assert!((from_sets.b12 - table.b12).abs() < 1e-12, "{k0} {len} {alpha}");
                }
            }
        }
    }

    #[test]
    fn figure_example_sets() {
        let s1: BTreeSet<usize> = [3].into();
        let s2: BTreeSet<usize> = [5, 6, 9].into();
        let s12: BTreeSet<usize> = [4, 7, 8].into();
        let alpha = 0.3;
        let b = betas_from_sets(&s1, &s2, &s12, alpha, 5).unwrap();
        let e = |k| subblock_weight(k, alpha);
        assert!((b.b1 - e(3)).abs() < 1e-15);
        assert!((b.b2 - (e(5) + e(6) + e(9))).abs() < 1e-15);
        assert!((b.b12 - (e(4) + e(7) + e(8))).abs() < 1e-15);
        let single: BTreeSet<usize> = [1].into();
        let empty = BTreeSet::new();
        let b = betas_from_sets(&single, &empty, &empty, alpha, 2).unwrap();
        assert_eq!((b.b1, b.b2, b.b12), (0.7, 0.0, 0.0));
        assert!(betas_from_sets(&s1, &s1, &empty, alpha, 5).is_err());
    }
}
