//! Minimization of `D(V ‖ P) + λ I^i_V` over joints with fixed X and Y marginals.
//!
//! Each multi-information has a variational form
//!
//! ```text
//! I^1_V  = min_Q D(V ‖ P^X  ⊗ Q^{YZ})
//! I^2_V  = min_Q D(V ‖ P^Y  ⊗ Q^{XZ})
//! I^12_V = min_Q D(V ‖ P^X ⊗ P^Y ⊗ Q^Z)
//! ```
//!
//! valid whenever `V^X = P^X` and `V^Y = P^Y`, with the minimum at the
//! corresponding marginal of `V`. The objective is therefore a double
//! minimization over `(V, Q)` and we alternate:
//!
//! 1. `Q` ← marginal of the current `V`;
//! 2. `V` ← I-projection of `G ∝ P^{1/(1+λ)} R^{λ/(1+λ)}` onto the marginal
//!    constraints, where `R` is the product reference built from `Q`.
//!
//! Step 2 is exact: `D(V‖P) + λ D(V‖R) = (1+λ) D(V‖G) + const`, and the
//! I-projection of `G` has the form `a(x) b(y) G(x,y,z)`, found by Sinkhorn
//! scaling of `Σ_z G`. The objective never increases, cells with `P = 0`
//! stay at zero, and `λ = 0` returns `P` after one step.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::{neg_plogp, Dist, InfoKind, Joint3, Pmf};

/// Tolerances and caps for the exponent computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Stop once one sweep lowers the objective by less than this (bits).
    pub tol: f64,
    /// Largest allowed deviation of the X and Y marginals from the constraint.
    pub marginal_tol: f64,
    /// Stop only once no cell of `V` moves by more than this in one sweep.
    pub step_tol: f64,
    /// Iteration cap for the alternating minimization.
    pub max_iter: usize,
    /// Accuracy of the rate match when searching for the multiplier (bits).
    pub r_tol: f64,
    /// Step cap for the multiplier search.
    pub max_root_steps: usize,
    /// Grid step of the brute-force oracle.
    pub oracle_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            marginal_tol: 1e-9,
            step_tol: 1e-13,
            max_iter: 100_000,
            r_tol: 1e-8,
            max_root_steps: 60,
            oracle_step: 0.002,
        }
    }
}

/// The pair of input marginals every candidate `V` must reproduce.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalConstraint {
    pub px: Dist,
    pub py: Dist,
}

impl MarginalConstraint {
    pub fn new(px: Dist, py: Dist) -> Self {
        Self { px, py }
    }

    /// Checks that `p` has exactly these marginals (within `tol`).
    pub fn check(&self, p: &Joint3, tol: f64) -> Result<()> {
        let (nx, ny, _) = p.dims();
        if nx != self.px.len() || ny != self.py.len() {
            return Err(Error::Dimension(format!(
                "joint is {nx}x{ny}, constraint is {}x{}",
                self.px.len(),
                self.py.len()
            )));
        }
        let mx = p.marginal_x();
        let my = p.marginal_y();
        let dev = marginal_gap(mx.probs(), self.px.probs())
            .max(marginal_gap(my.probs(), self.py.probs()));
        if dev > tol {
            return Err(Error::Domain(format!(
                "reference joint marginals deviate from the constraint by {dev:e}"
            )));
        }
        Ok(())
    }
}

fn marginal_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

/// Minimizer and value split of one `D + λ I` subproblem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubproblemSolution {
    pub v_star: Joint3,
    /// `D(V* ‖ P)` in bits.
    pub divergence_term: f64,
    /// `I^i_{V*}` in bits.
    pub info_term: f64,
    pub iterations: usize,
    /// Largest marginal deviation of `V*` from the constraint.
    pub residual: f64,
}

impl SubproblemSolution {
    /// `D + λ I` at the minimizer.
    pub fn objective(&self, lambda: f64) -> f64 {
        self.divergence_term + lambda * self.info_term
    }
}

/// Minimizes `D(V ‖ p) + λ I^{which}_V` over `V` with `V^X = px`, `V^Y = py`,
/// for `λ ∈ [0, 1]`.
pub fn minimize_div_plus_info(
    p: &Joint3,
    constraint: &MarginalConstraint,
    which: InfoKind,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<SubproblemSolution> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("multiplier {lambda} outside [0, 1]")));
    }
    constraint.check(p, cfg.marginal_tol)?;
    solve(p, constraint, which, lambda, cfg, None)
}

/// Same as [`minimize_div_plus_info`] without the `λ ≤ 1` restriction and
/// without re-checking the reference marginals, optionally warm-started.
pub(crate) fn solve(
    p: &Joint3,
    constraint: &MarginalConstraint,
    which: InfoKind,
    lambda: f64,
    cfg: &SolverConfig,
    init: Option<&Joint3>,
) -> Result<SubproblemSolution> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::Domain(format!("multiplier {lambda} must be finite and nonnegative")));
    }
    let (nx, ny, nz) = p.dims();
    let px = constraint.px.probs();
    let py = constraint.py.probs();
    let pp = p.probs();
    let ln_p: Vec<f64> = pp.iter().map(|&q| if q > 0.0 { q.ln() } else { 0.0 }).collect();

    if lambda == 0.0 {
        return Ok(finish(p, which, p.clone(), 0, constraint));
    }

    let s = 1.0 / (1.0 + lambda);
    let t = lambda / (1.0 + lambda);
    let mut v: Vec<f64> = match init {
        Some(v0) if v0.dims() == p.dims() => v0.probs().to_vec(),
        _ => pp.to_vec(),
    };
    // keep the support of p even if the warm start lost some of it
    for (vi, &pi) in v.iter_mut().zip(pp) {
        if pi <= 0.0 {
            *vi = 0.0;
        } else if *vi <= 0.0 {
            *vi = pi * 1e-6;
        }
    }

    let mut scaling = Sinkhorn::new(nx, ny);
    let mut g = vec![0.0; nx * ny * nz];
    let mut prev_v = vec![0.0; nx * ny * nz];
    let mut q = vec![0.0; reference_len(which, nx, ny, nz)];
    let mut prev = objective(&v, pp, which, lambda, nx, ny, nz);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        iterations += 1;
        reference_marginal(&v, which, nx, ny, nz, &mut q);
        for x in 0..nx {
            for y in 0..ny {
                for z in 0..nz {
                    let c = (x * ny + y) * nz + z;
                    if pp[c] <= 0.0 {
                        g[c] = 0.0;
                        continue;
                    }
                    let r = match which {
                        InfoKind::I1 => px[x] * q[y * nz + z],
                        InfoKind::I2 => py[y] * q[x * nz + z],
                        InfoKind::I12 => px[x] * py[y] * q[z],
                    };
                    g[c] = if r > 0.0 { (s * ln_p[c] + t * r.ln()).exp() } else { 0.0 };
                }
            }
        }
        prev_v.copy_from_slice(&v);
        residual = scaling.project(&g, px, py, nz, &mut v);
        let cur = objective(&v, pp, which, lambda, nx, ny, nz);
        let drop = prev - cur;
        prev = cur;
        let moved = v.iter().zip(&prev_v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if drop < cfg.tol && residual < cfg.marginal_tol && moved < cfg.step_tol {
            let v_star = Joint3::from_computed(nx, ny, nz, v);
            return Ok(finish(p, which, v_star, iterations, constraint));
        }
    }
    Err(Error::Convergence {
        iterations,
        residual,
        detail: format!("D + {lambda} I^{which} did not settle"),
        best: Some(Box::new(Joint3::from_computed(nx, ny, nz, v))),
    })
}

fn finish(
    p: &Joint3,
    which: InfoKind,
    v_star: Joint3,
    iterations: usize,
    constraint: &MarginalConstraint,
) -> SubproblemSolution {
    let divergence_term =
        crate::prob::divergence_slices(v_star.probs(), p.probs());
    let info_term = v_star.info(which);
    let residual = marginal_gap(v_star.marginal_x().probs(), constraint.px.probs())
        .max(marginal_gap(v_star.marginal_y().probs(), constraint.py.probs()));
    SubproblemSolution {
        v_star,
        divergence_term,
        info_term,
        iterations,
        residual,
    }
}

fn reference_len(which: InfoKind, nx: usize, ny: usize, nz: usize) -> usize {
    match which {
        InfoKind::I1 => ny * nz,
        InfoKind::I2 => nx * nz,
        InfoKind::I12 => nz,
    }
}

fn reference_marginal(v: &[f64], which: InfoKind, nx: usize, ny: usize, nz: usize, q: &mut [f64]) {
    q.iter_mut().for_each(|e| *e = 0.0);
    for x in 0..nx {
        for y in 0..ny {
            for z in 0..nz {
                let m = v[(x * ny + y) * nz + z];
                match which {
                    InfoKind::I1 => q[y * nz + z] += m,
                    InfoKind::I2 => q[x * nz + z] += m,
                    InfoKind::I12 => q[z] += m,
                }
            }
        }
    }
}

/// `D(v ‖ p) + λ I^i_v` computed from entropies of `v`.
fn objective(v: &[f64], p: &[f64], which: InfoKind, lambda: f64, nx: usize, ny: usize, nz: usize) -> f64 {
    let d = crate::prob::divergence_slices(v, p);
    d + lambda * info_flat(v, which, nx, ny, nz)
}

pub(crate) fn info_flat(v: &[f64], which: InfoKind, nx: usize, ny: usize, nz: usize) -> f64 {
    let mut hx = vec![0.0; nx];
    let mut hy = vec![0.0; ny];
    let mut hz = vec![0.0; nz];
    let mut hyz = vec![0.0; ny * nz];
    let mut hxz = vec![0.0; nx * nz];
    let mut h_all = 0.0;
    for x in 0..nx {
        for y in 0..ny {
            for z in 0..nz {
                let m = v[(x * ny + y) * nz + z];
                hx[x] += m;
                hy[y] += m;
                hz[z] += m;
                hyz[y * nz + z] += m;
                hxz[x * nz + z] += m;
                h_all += neg_plogp(m);
            }
        }
    }
    let h = |w: &[f64]| w.iter().map(|&m| neg_plogp(m)).sum::<f64>();
    let val = match which {
        InfoKind::I1 => h(&hx) + h(&hyz) - h_all,
        InfoKind::I2 => h(&hy) + h(&hxz) - h_all,
        InfoKind::I12 => h(&hx) + h(&hy) + h(&hz) - h_all,
    };
    val.max(0.0)
}

/// Row/column scaling of a nonnegative `nx x ny` matrix to prescribed sums,
/// warm-started across calls.
struct Sinkhorn {
    a: Vec<f64>,
    b: Vec<f64>,
    m: Vec<f64>,
}

const SINKHORN_TOL: f64 = 1e-14;
const SINKHORN_MAX: usize = 100_000;

impl Sinkhorn {
    fn new(nx: usize, ny: usize) -> Self {
        Self {
            a: vec![1.0; nx],
            b: vec![1.0; ny],
            m: vec![0.0; nx * ny],
        }
    }

    /// Writes `a(x) b(y) g(x,y,z)` into `out` and returns the final marginal
    /// deviation.
    fn project(&mut self, g: &[f64], px: &[f64], py: &[f64], nz: usize, out: &mut [f64]) -> f64 {
        let (nx, ny) = (self.a.len(), self.b.len());
        for (cell, row) in self.m.iter_mut().zip(g.chunks(nz)) {
            *cell = row.iter().sum();
        }
        let m = &self.m;
        for _ in 0..SINKHORN_MAX {
            for x in 0..nx {
                let s: f64 = (0..ny).map(|y| m[x * ny + y] * self.b[y]).sum();
                self.a[x] = if s > 0.0 { px[x] / s } else { 0.0 };
            }
            let mut dev: f64 = 0.0;
            for y in 0..ny {
                let s: f64 = (0..nx).map(|x| m[x * ny + y] * self.a[x]).sum();
                let nb = if s > 0.0 { py[y] / s } else { 0.0 };
                dev = f64::max(dev, (s * self.b[y] - py[y]).abs());
                self.b[y] = nb;
            }
            if dev < SINKHORN_TOL {
                break;
            }
        }
        for x in 0..nx {
            for y in 0..ny {
                let f = self.a[x] * self.b[y];
                let base = (x * ny + y) * nz;
                for z in 0..nz {
                    out[base + z] = f * g[base + z];
                }
            }
        }
        let mut worst: f64 = 0.0;
        for x in 0..nx {
            let s: f64 = out[x * ny * nz..(x + 1) * ny * nz].iter().sum();
            worst = worst.max((s - px[x]).abs());
        }
        for y in 0..ny {
            let s: f64 = (0..nx)
                .map(|x| out[(x * ny + y) * nz..(x * ny + y + 1) * nz].iter().sum::<f64>())
                .sum();
            worst = worst.max((s - py[y]).abs());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{compose, ChannelMatrix, Joint2};
    use approx::assert_abs_diff_eq;

    fn xor_z(sigma: f64, p1: f64) -> (Joint3, MarginalConstraint) {
        let z = [vec![1.0, 0.0], vec![sigma, 1.0 - sigma]];
        let w = ChannelMatrix::new(
            2,
            2,
            vec![z[0].clone(), z[1].clone(), z[1].clone(), z[0].clone()],
        )
        .unwrap();
        let d = Dist::binary(p1).unwrap();
        let p = compose(&Joint2::product(&d, &d), &w).unwrap();
        (p, MarginalConstraint::new(d.clone(), d))
    }

    #[test]
    fn lambda_zero_returns_reference() {
        let (p, c) = xor_z(0.101, 0.351746);
        for which in InfoKind::ALL {
            let s = minimize_div_plus_info(&p, &c, which, 0.0, &SolverConfig::default()).unwrap();
            assert_eq!(s.v_star, p);
            assert_eq!(s.divergence_term, 0.0);
        }
    }

    #[test]
    fn objective_never_exceeds_reference_point() {
        let (p, c) = xor_z(0.101, 0.351746);
        for which in InfoKind::ALL {
            for lambda in [0.25, 0.5, 1.0] {
                let s =
                    minimize_div_plus_info(&p, &c, which, lambda, &SolverConfig::default()).unwrap();
                assert!(s.objective(lambda) <= lambda * p.info(which) + 1e-12);
                assert!(s.residual < 1e-9);
            }
        }
    }

    #[test]
    fn independent_output_keeps_reference() {
        let w = ChannelMatrix::new(2, 2, vec![vec![0.3, 0.7]; 4]).unwrap();
        let px = Dist::binary(0.4).unwrap();
        let py = Dist::binary(0.2).unwrap();
        let p = compose(&Joint2::product(&px, &py), &w).unwrap();
        let c = MarginalConstraint::new(px, py);
        for which in InfoKind::ALL {
            let s = minimize_div_plus_info(&p, &c, which, 1.0, &SolverConfig::default()).unwrap();
            assert_abs_diff_eq!(s.objective(1.0), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn rejects_bad_multiplier_and_marginals() {
        let (p, c) = xor_z(0.101, 0.351746);
        let cfg = SolverConfig::default();
        assert!(matches!(
            minimize_div_plus_info(&p, &c, InfoKind::I1, 1.5, &cfg),
            Err(Error::Domain(_))
        ));
        let other = MarginalConstraint::new(Dist::uniform(2).unwrap(), Dist::uniform(2).unwrap());
        assert!(minimize_div_plus_info(&p, &other, InfoKind::I1, 0.5, &cfg).is_err());
    }

    #[test]
    fn iteration_cap_reports_best_iterate() {
        let (p, c) = xor_z(0.101, 0.351746);
        let cfg = SolverConfig {
            max_iter: 2,
            ..SolverConfig::default()
        };
        match minimize_div_plus_info(&p, &c, InfoKind::I12, 1.0, &cfg) {
            Err(Error::Convergence { iterations, best, .. }) => {
                assert_eq!(iterations, 2);
                assert!(best.is_some());
            }
            other => panic!("expected a convergence error, got {other:?}"),
        }
    }
}
