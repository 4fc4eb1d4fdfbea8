//! Brute-force reference for the `D + λ I` subproblem on tiny alphabets.
//!
//! The feasible set is parametrized linearly by free cells: one coupling
//! entry `V(x,y)` per `(x,y)` with `x < |X|-1`, `y < |Y|-1`, and `V(x,y,z)`
//! for every supported `z` except the last supported one. The remaining
//! entries follow from the marginal constraints. The objective is convex in
//! these coordinates and is evaluated directly from entropies, independently
//! of the iterative solver.
//!
//! The search is a zooming grid: a full scan at a coarse step, then repeated
//! local scans around the incumbent with the step halved, until the step
//! reaches the requested resolution.

use super::solver::{info_flat, MarginalConstraint};
use crate::error::{Error, Result};
use crate::prob::{divergence_slices, InfoKind, Joint3, Pmf};

/// Largest `|X||Y||Z|` the oracle accepts.
pub const ORACLE_MAX_CELLS: usize = 12;

struct Layout {
    nx: usize,
    ny: usize,
    nz: usize,
    px: Vec<f64>,
    py: Vec<f64>,
    /// Supported `z` values per `(x, y)`.
    support: Vec<Vec<usize>>,
    dims: usize,
}

impl Layout {
    fn coupling_dims(&self) -> usize {
        (self.nx - 1) * (self.ny - 1)
    }

    /// Fills `v` from free coordinates; `false` when some entry is negative
    /// or mass is forced onto an unsupported cell.
    fn assemble(&self, theta: &[f64], v: &mut [f64]) -> bool {
        let (nx, ny, nz) = (self.nx, self.ny, self.nz);
        let mut u = vec![0.0; nx * ny];
        let mut k = 0;
        for x in 0..nx - 1 {
            for y in 0..ny - 1 {
                u[x * ny + y] = theta[k];
                k += 1;
            }
        }
        for x in 0..nx - 1 {
            let s: f64 = (0..ny - 1).map(|y| u[x * ny + y]).sum();
            u[x * ny + ny - 1] = self.px[x] - s;
        }
        for y in 0..ny {
            let s: f64 = (0..nx - 1).map(|x| u[x * ny + y]).sum();
            u[(nx - 1) * ny + y] = self.py[y] - s;
        }
        if u.iter().any(|&m| m < -1e-15) {
            return false;
        }
        v.iter_mut().for_each(|e| *e = 0.0);
        for cell in 0..nx * ny {
            let mass = u[cell].max(0.0);
            let sup = &self.support[cell];
            if sup.is_empty() {
                if mass > 1e-15 {
                    return false;
                }
                continue;
            }
            let mut rest = mass;
            for &z in &sup[..sup.len() - 1] {
                let m = theta[k];
                k += 1;
                v[cell * nz + z] = m;
                rest -= m;
            }
            if rest < -1e-15 {
                return false;
            }
            v[cell * nz + sup[sup.len() - 1]] = rest.max(0.0);
        }
        true
    }

    /// Upper bound of each free coordinate, used to size the initial scan.
    fn upper(&self, d: usize) -> f64 {
        if d < self.coupling_dims() {
            let x = d / (self.ny - 1);
            let y = d % (self.ny - 1);
            self.px[x].min(self.py[y])
        } else {
            1.0
        }
    }
}

/// Minimal `D(V ‖ p) + λ I^which_V` over the marginal-constrained polytope,
/// found by zooming grid search down to resolution `step`.
pub fn brute_force_oracle(
    p: &Joint3,
    constraint: &MarginalConstraint,
    which: InfoKind,
    lambda: f64,
    step: f64,
) -> Result<f64> {
    let (nx, ny, nz) = p.dims();
    if nx * ny * nz > ORACLE_MAX_CELLS {
        return Err(Error::Refused(format!(
            "oracle handles at most {ORACLE_MAX_CELLS} cells, got {}",
            nx * ny * nz
        )));
    }
    if !(step >= 1e-3) || !step.is_finite() {
        return Err(Error::Domain(format!("oracle step {step} must be at least 1e-3")));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::Domain(format!("multiplier {lambda} must be finite and nonnegative")));
    }
    constraint.check(p, 1e-9)?;
    let pp = p.probs();
    let support: Vec<Vec<usize>> = (0..nx * ny)
        .map(|c| (0..nz).filter(|&z| pp[c * nz + z] > 0.0).collect())
        .collect();
    let free_cells: usize = support.iter().map(|s| s.len().saturating_sub(1)).sum();
    let layout = Layout {
        nx,
        ny,
        nz,
        px: constraint.px.probs().to_vec(),
        py: constraint.py.probs().to_vec(),
        dims: (nx - 1) * (ny - 1) + free_cells,
        support,
    };
    let eval = |theta: &[f64], v: &mut [f64]| -> Option<f64> {
        if !layout.assemble(theta, v) {
            return None;
        }
        let d = divergence_slices(v, pp);
        Some(d + lambda * info_flat(v, which, nx, ny, nz))
    };

    let dims = layout.dims;
    let mut v = vec![0.0; nx * ny * nz];
    if dims == 0 {
        return eval(&[], &mut v).ok_or_else(|| Error::Infeasible("empty feasible set".into()));
    }

    let half_width: i64 = if dims > 6 { 2 } else { 3 };
    // coarse full scan
    let mut h = if dims > 6 { 0.25 } else { 0.1 };
    let axes: Vec<Vec<f64>> = (0..dims)
        .map(|d| {
            let hi = layout.upper(d);
            let n = (hi / h).floor() as usize;
            let mut pts: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
            if hi - n as f64 * h > 1e-12 {
                pts.push(hi);
            }
            pts
        })
        .collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    scan(&axes, &mut |theta| {
        if let Some(f) = eval(theta, &mut v) {
            if best.as_ref().is_none_or(|(b, _)| f < *b) {
                best = Some((f, theta.to_vec()));
            }
        }
    });
    let (mut best_f, mut center) =
        best.ok_or_else(|| Error::Infeasible("no feasible grid point".into()))?;

    while h > step {
        h = (h * 0.5).max(step);
        let axes: Vec<Vec<f64>> = (0..dims)
            .map(|d| {
                let hi = layout.upper(d);
                (-half_width..=half_width)
                    .map(|i| center[d] + i as f64 * h)
                    .filter(|&t| t >= 0.0 && t <= hi)
                    .collect()
            })
            .collect();
        scan(&axes, &mut |theta| {
            if let Some(f) = eval(theta, &mut v) {
                if f < best_f {
                    best_f = f;
                    center = theta.to_vec();
                }
            }
        });
    }
    Ok(best_f)
}

/// Calls `f` on every point of the Cartesian product of `axes`.
fn scan(axes: &[Vec<f64>], f: &mut dyn FnMut(&[f64])) {
    if axes.iter().any(|a| a.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; axes.len()];
    let mut theta: Vec<f64> = axes.iter().map(|a| a[0]).collect();
    loop {
        f(&theta);
        let mut d = axes.len();
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                theta[d] = axes[d][idx[d]];
                break;
            }
            idx[d] = 0;
            theta[d] = axes[d][0];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{compose, ChannelMatrix, Dist, Joint2};

    #[test]
    fn refuses_large_alphabets() {
        let w = ChannelMatrix::new(2, 2, vec![vec![0.25; 4]; 4]).unwrap();
        let d = Dist::uniform(2).unwrap();
        let p = compose(&Joint2::product(&d, &d), &w).unwrap();
        let c = MarginalConstraint::new(d.clone(), d);
        assert!(matches!(
            brute_force_oracle(&p, &c, InfoKind::I1, 1.0, 0.002),
            Err(Error::Refused(_))
        ));
    }

    #[test]
    fn zero_multiplier_gives_zero() {
        let w = ChannelMatrix::new(
            2,
            2,
            vec![vec![0.9, 0.1], vec![0.3, 0.7], vec![0.6, 0.4], vec![0.2, 0.8]],
        )
        .unwrap();
        let px = Dist::binary(0.3).unwrap();
        let py = Dist::binary(0.6).unwrap();
        let p = compose(&Joint2::product(&px, &py), &w).unwrap();
        let c = MarginalConstraint::new(px, py);
        let v = brute_force_oracle(&p, &c, InfoKind::I12, 0.0, 0.002).unwrap();
        assert!(v.abs() < 1e-3, "{v}");
    }
}
