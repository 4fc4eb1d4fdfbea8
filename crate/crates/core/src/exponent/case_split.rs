//! Exponent of a β-weighted rate constraint, by the three-regime split.
//!
//! For weights `β = (β1, β2, β12)` and a rate combination `r`, the exponent is
//! the minimum of `Σ β_i [D(V_i ‖ P) + I^i_{V_i}] - r` clipped at zero, taken
//! jointly over `V_1, V_2, V_12` with fixed input marginals. Writing `V_i(λ)`
//! for the minimizer of `D + λ I^i` and `g(λ) = Σ β_i I^i_{V_i(λ)}`:
//!
//! * `r ≥ g(0) = Σ β_i I^i_P` gives exponent 0;
//! * `r ≤ g(1) = r̂` gives `Σ β_i [D + I]_{V_i(1)} - r`;
//! * otherwise the multiplier solving `g(λ) = r` yields `Σ β_i D(V_i(λ) ‖ P)`.
//!
//! `V_i(λ)` does not depend on `β` or `r`, so an [`ExponentEngine`] keeps the
//! solutions it has computed and reuses them as warm starts.

use std::collections::BTreeMap;

use serde::Serialize;

use super::solver::{solve, MarginalConstraint, SolverConfig, SubproblemSolution};
use crate::error::{Error, Result};
use crate::prob::{InfoKind, Joint3};

/// Nonnegative weights of `I^1`, `I^2` and `I^12`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaCoefficients {
    pub b1: f64,
    pub b2: f64,
    pub b12: f64,
}

impl BetaCoefficients {
    pub fn new(b1: f64, b2: f64, b12: f64) -> Result<Self> {
        for b in [b1, b2, b12] {
            if !b.is_finite() || b < 0.0 {
                return Err(Error::Domain(format!("weight {b} must be finite and nonnegative")));
            }
        }
        Ok(Self { b1, b2, b12 })
    }

    pub fn get(&self, kind: InfoKind) -> f64 {
        match kind {
            InfoKind::I1 => self.b1,
            InfoKind::I2 => self.b2,
            InfoKind::I12 => self.b12,
        }
    }

    /// `β1 R1 + β2 R2 + β12 (R1 + R2)`.
    pub fn rate_combination(&self, r1: f64, r2: f64) -> f64 {
        self.b1 * r1 + self.b2 * r2 + self.b12 * (r1 + r2)
    }

    fn active(&self) -> impl Iterator<Item = (InfoKind, f64)> + '_ {
        InfoKind::ALL
            .into_iter()
            .map(|k| (k, self.get(k)))
            .filter(|&(_, b)| b > 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Zero,
    Linear,
    Curved,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Zero => "zero",
            Regime::Linear => "linear",
            Regime::Curved => "curved",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseSplit {
    pub exponent: f64,
    pub regime: Regime,
    /// Multiplier at which the witnesses were computed.
    pub lambda: f64,
    /// `Σ β_i I^i_P`, the rate beyond which the exponent vanishes.
    pub r_max: f64,
    /// `Σ β_i I^i` at the `λ = 1` minimizers.
    pub r_hat: f64,
    /// Minimizers for every index with a positive weight.
    pub witnesses: Vec<(InfoKind, SubproblemSolution)>,
}

/// Reusable solver state for one reference joint `P^{XYZ}`.
#[derive(Debug, Clone)]
pub struct ExponentEngine {
    p: Joint3,
    constraint: MarginalConstraint,
    cfg: SolverConfig,
    memo: [BTreeMap<u64, SubproblemSolution>; 3],
}

/// Slack for the monotonicity check of `g` along the root search.
const MONOTONE_SLACK: f64 = 1e-7;

impl ExponentEngine {
    pub fn new(p: Joint3, constraint: MarginalConstraint, cfg: SolverConfig) -> Result<Self> {
        constraint.check(&p, cfg.marginal_tol)?;
        Ok(Self {
            p,
            constraint,
            cfg,
            memo: Default::default(),
        })
    }

    pub fn reference(&self) -> &Joint3 {
        &self.p
    }

    pub fn constraint(&self) -> &MarginalConstraint {
        &self.constraint
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// A copy holding only the `λ = 0` and `λ = 1` solutions, so that
    /// independent rate points start from identical state.
    pub fn fork(&self) -> Self {
        let mut memo: [BTreeMap<u64, SubproblemSolution>; 3] = Default::default();
        for (dst, src) in memo.iter_mut().zip(&self.memo) {
            for key in [0.0f64.to_bits(), 1.0f64.to_bits()] {
                if let Some(s) = src.get(&key) {
                    dst.insert(key, s.clone());
                }
            }
        }
        Self {
            p: self.p.clone(),
            constraint: self.constraint.clone(),
            cfg: self.cfg,
            memo,
        }
    }

    /// Solves (or recalls) the `D + λ I^kind` subproblem; any `λ ≥ 0`.
    pub fn solution(&mut self, kind: InfoKind, lambda: f64) -> Result<&SubproblemSolution> {
        let key = lambda.to_bits();
        let memo = &mut self.memo[kind.index()];
        if !memo.contains_key(&key) {
            let below = memo.range(..key).next_back().map(|(_, s)| s);
            let above = memo.range(key..).next().map(|(_, s)| s);
            let warm = match (below, above) {
                (Some(b), _) if lambda > 0.0 => Some(&b.v_star),
                (None, Some(a)) => Some(&a.v_star),
                _ => None,
            };
            let sol = solve(&self.p, &self.constraint, kind, lambda, &self.cfg, warm)?;
            memo.insert(key, sol);
        }
        Ok(&self.memo[kind.index()][&key])
    }

    /// `Σ β_i I^i_{V_i(λ)}`.
    pub fn weighted_info(&mut self, betas: &BetaCoefficients, lambda: f64) -> Result<f64> {
        let mut total = 0.0;
        for (kind, b) in betas.active() {
            total += b * self.solution(kind, lambda)?.info_term;
        }
        Ok(total)
    }

    fn witnesses(&mut self, betas: &BetaCoefficients, lambda: f64) -> Result<Vec<(InfoKind, SubproblemSolution)>> {
        let mut out = Vec::new();
        for (kind, _) in betas.active() {
            out.push((kind, self.solution(kind, lambda)?.clone()));
        }
        Ok(out)
    }

    /// Exponent for weights `betas` at rate combination `r`.
    pub fn case_split(&mut self, betas: &BetaCoefficients, r: f64) -> Result<CaseSplit> {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::Domain(format!("rate combination {r} must be finite and nonnegative")));
        }
        let r_max: f64 = betas.active().map(|(k, b)| b * self.p.info(k)).sum();
        let r_hat = self.weighted_info(betas, 1.0)?;
        if r >= r_max {
            return Ok(CaseSplit {
                exponent: 0.0,
                regime: Regime::Zero,
                lambda: 0.0,
                r_max,
                r_hat,
                witnesses: self.witnesses(betas, 0.0)?,
            });
        }
        if r <= r_hat {
            let witnesses = self.witnesses(betas, 1.0)?;
            let value: f64 = witnesses
                .iter()
                .map(|(k, s)| betas.get(*k) * s.objective(1.0))
                .sum();
            return Ok(CaseSplit {
                exponent: (value - r).max(0.0),
                regime: Regime::Linear,
                lambda: 1.0,
                r_max,
                r_hat,
                witnesses,
            });
        }
        let lambda = self.find_multiplier(betas, r, r_max, r_hat)?;
        let witnesses = self.witnesses(betas, lambda)?;
        let exponent = witnesses
            .iter()
            .map(|(k, s)| betas.get(*k) * s.divergence_term)
            .sum();
        Ok(CaseSplit {
            exponent,
            regime: Regime::Curved,
            lambda,
            r_max,
            r_hat,
            witnesses,
        })
    }

    /// Illinois-modified regula falsi for `g(λ) = r` on `(0, 1)`, where `g` is
    /// nonincreasing with `g(0) > r > g(1)`.
    fn find_multiplier(&mut self, betas: &BetaCoefficients, r: f64, g0: f64, g1: f64) -> Result<f64> {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let (mut f_lo, mut f_hi) = (g0 - r, g1 - r);
        // true values at the bracket ends; f_lo/f_hi get halved by Illinois steps
        let (mut t_lo, mut t_hi) = (f_lo, f_hi);
        let mut side = 0i8;
        let mut best = (f64::INFINITY, 0.5);
        for _ in 0..self.cfg.max_root_steps {
            let mut lambda = lo + f_lo * (hi - lo) / (f_lo - f_hi);
            if !(lambda > lo && lambda < hi) {
                lambda = 0.5 * (lo + hi);
            }
            let f = self.weighted_info(betas, lambda)? - r;
            if f > t_lo + MONOTONE_SLACK || f < t_hi - MONOTONE_SLACK {
                return Err(Error::Bracket {
                    lo,
                    hi,
                    f_lo: t_lo,
                    f_hi: t_hi,
                    detail: format!("weighted information not monotone at multiplier {lambda} (value {f:e})"),
                });
            }
            if f.abs() < best.0 {
                best = (f.abs(), lambda);
            }
            if f.abs() < self.cfg.r_tol || hi - lo < 1e-15 {
                return Ok(lambda);
            }
            if f > 0.0 {
                lo = lambda;
                f_lo = f;
                t_lo = f;
                if side == 1 {
                    f_hi *= 0.5;
                }
                side = 1;
            } else {
                hi = lambda;
                f_hi = f;
                t_hi = f;
                if side == -1 {
                    f_lo *= 0.5;
                }
                side = -1;
            }
        }
        Ok(best.1)
    }
}

/// One-shot version of [`ExponentEngine::case_split`].
pub fn solve_case_split(
    p: &Joint3,
    constraint: &MarginalConstraint,
    betas: &BetaCoefficients,
    r_target: f64,
    cfg: &SolverConfig,
) -> Result<CaseSplit> {
    ExponentEngine::new(p.clone(), constraint.clone(), *cfg)?.case_split(betas, r_target)
}
