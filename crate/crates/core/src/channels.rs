//! Concrete channels, single-user capacity and the sphere-packing exponent.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::{solve, MarginalConstraint, SolverConfig};
use crate::prob::{compose, ChannelMatrix, Dist, InfoKind, Joint2, Joint3};

/// A single-user channel `W(z | x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleUserChannel(ChannelMatrix);

impl SingleUserChannel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        ChannelMatrix::single_user(rows).map(Self)
    }

    pub fn matrix(&self) -> &ChannelMatrix {
        &self.0
    }

    pub fn inputs(&self) -> usize {
        self.0.dims().0
    }

    pub fn outputs(&self) -> usize {
        self.0.dims().2
    }

    pub fn row(&self, x: usize) -> &[f64] {
        self.0.row(x, 0)
    }

    /// `P ∘ W` as a joint on `X x {0} x Z`.
    pub fn joint(&self, p: &Dist) -> Result<Joint3> {
        let trivial = Dist::point_mass(1, 0)?;
        compose(&Joint2::product(p, &trivial), &self.0)
    }

    /// `I(P, W)`.
    pub fn mutual_information(&self, p: &Dist) -> Result<f64> {
        Ok(self.joint(p)?.info(InfoKind::I1))
    }
}

/// A two-input channel `W(z | x, y)` with a note on how it was built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacChannel {
    matrix: ChannelMatrix,
    pub construction: String,
}

impl MacChannel {
    pub fn new(matrix: ChannelMatrix, construction: impl Into<String>) -> Self {
        Self {
            matrix,
            construction: construction.into(),
        }
    }

    pub fn matrix(&self) -> &ChannelMatrix {
        &self.matrix
    }

    /// `P^X(x) P^Y(y) W(z | x, y)`.
    pub fn joint(&self, px: &Dist, py: &Dist) -> Result<Joint3> {
        compose(&Joint2::product(px, py), &self.matrix)
    }
}

/// Z-channel: input 0 is received intact, input 1 flips to 0 with
/// probability `sigma`.
pub fn z_channel(sigma: f64) -> Result<SingleUserChannel> {
    if !(0.0..=1.0).contains(&sigma) {
        return Err(Error::Domain(format!("crossover {sigma} outside [0, 1]")));
    }
    SingleUserChannel::new(vec![vec![1.0, 0.0], vec![sigma, 1.0 - sigma]])
}

/// Binary symmetric channel with crossover `p`.
pub fn bsc(p: f64) -> Result<SingleUserChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("crossover {p} outside [0, 1]")));
    }
    SingleUserChannel::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
}

/// `W(z | x, y) = w1(z | x ⊕ y)` for a binary-input `w1`.
pub fn xor_mac(w1: &SingleUserChannel) -> Result<MacChannel> {
    if w1.inputs() != 2 {
        return Err(Error::Domain(format!(
            "xor construction needs binary inputs, got {}",
            w1.inputs()
        )));
    }
    let rows = (0..2)
        .flat_map(|x| (0..2).map(move |y| x ^ y))
        .map(|s| w1.row(s).to_vec())
        .collect();
    Ok(MacChannel::new(ChannelMatrix::new(2, 2, rows)?, "xor-then-single-user"))
}

/// Noiseless channel revealing both inputs: `z = x |Y| + y`.
pub fn pair_output_mac(nx: usize, ny: usize) -> Result<MacChannel> {
    let nz = nx * ny;
    let rows = (0..nz)
        .map(|z| (0..nz).map(|o| if o == z { 1.0 } else { 0.0 }).collect())
        .collect();
    Ok(MacChannel::new(ChannelMatrix::new(nx, ny, rows)?, "pair-output"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Capacity {
    pub capacity: f64,
    pub input: Dist,
    /// `I(p, W)` at the returned input.
    pub lower: f64,
    /// `max_x D(W_x ‖ pW)` at the returned input.
    pub upper: f64,
    pub iterations: usize,
}

const CAPACITY_MAX_ITER: usize = 1_000_000;

/// Capacity by alternating maximization, stopped when the bracket
/// `[I(p,W), max_x D(W_x ‖ pW)]` is narrower than `tol`.
pub fn capacity(w: &SingleUserChannel, tol: f64) -> Result<Capacity> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    let nx = w.inputs();
    let nz = w.outputs();
    let mut p = vec![1.0 / nx as f64; nx];
    let mut dx = vec![0.0; nx];
    let mut iterations = 0;
    loop {
        let mut q = vec![0.0; nz];
        for (x, &px) in p.iter().enumerate() {
            for (qz, &wz) in q.iter_mut().zip(w.row(x)) {
                *qz += px * wz;
            }
        }
        for (x, d) in dx.iter_mut().enumerate() {
            *d = crate::prob::divergence_slices(w.row(x), &q);
        }
        let lower: f64 = p.iter().zip(&dx).map(|(a, b)| a * b).sum::<f64>().max(0.0);
        let upper = dx.iter().cloned().fold(0.0, f64::max);
        if upper - lower < tol {
            return Ok(Capacity {
                capacity: lower,
                input: Dist::from_computed(p),
                lower,
                upper,
                iterations,
            });
        }
        if iterations >= CAPACITY_MAX_ITER {
            return Err(Error::Convergence {
                iterations,
                residual: upper - lower,
                detail: format!("capacity bracket [{lower}, {upper}]"),
                best: None,
            });
        }
        iterations += 1;
        let shift = upper;
        let mut total = 0.0;
        for (px, &d) in p.iter_mut().zip(&dx) {
            *px *= (d - shift).exp2();
            total += *px;
        }
        p.iter_mut().for_each(|px| *px /= total);
    }
}

/// The binary input whose XOR with an independent copy has law `q`.
pub fn xor_preimage_input(q: &Dist) -> Result<Dist> {
    if q.len() != 2 {
        return Err(Error::Dimension(format!("expected a binary law, got {} entries", q.len())));
    }
    let q1 = q.get(1);
    if q1 > 0.5 {
        return Err(Error::Infeasible(format!(
            "2p(1-p) = {q1} has no solution with p in [0, 1]"
        )));
    }
    let p1 = 0.5 * (1.0 - (1.0 - 2.0 * q1).max(0.0).sqrt());
    Dist::binary(p1)
}

/// `E_sp(R) = max_P min_{V: I(P,V) ≤ R} D(V ‖ W | P)`, with the outer
/// maximum over a grid of binary inputs with spacing `grid_step`.
pub fn sphere_packing_exponent(w: &SingleUserChannel, r: f64, grid_step: f64) -> Result<f64> {
    Ok(sphere_packing_with(w, r, grid_step, &SolverConfig::default())?.0)
}

/// Like [`sphere_packing_exponent`], also returning the maximizing input.
pub fn sphere_packing_with(
    w: &SingleUserChannel,
    r: f64,
    grid_step: f64,
    cfg: &SolverConfig,
) -> Result<(f64, Dist)> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::Domain(format!("rate {r} must be finite and nonnegative")));
    }
    if w.inputs() != 2 {
        return Err(Error::Refused("input grid implemented for binary inputs only".into()));
    }
    if !(grid_step > 0.0 && grid_step <= 0.5) {
        return Err(Error::Domain(format!("grid step {grid_step} outside (0, 0.5]")));
    }
    let n = (1.0 / grid_step).round() as usize;
    let mut best = (0.0, Dist::binary(0.0)?);
    for i in 0..=n {
        let p = Dist::binary((i as f64 / n as f64).min(1.0))?;
        let e = sphere_packing_at(w, &p, r, cfg)?;
        if e > best.0 {
            best = (e, p);
        }
    }
    Ok(best)
}

/// `min_{V: I(P,V) ≤ R} D(V ‖ W | P)` for a fixed input `P`.
pub fn sphere_packing_at(w: &SingleUserChannel, p: &Dist, r: f64, cfg: &SolverConfig) -> Result<f64> {
    let joint = w.joint(p)?;
    if r >= joint.info(InfoKind::I1) {
        return Ok(0.0);
    }
    if r == 0.0 {
        return Ok(zero_rate_sphere_packing(w, p));
    }
    let constraint = MarginalConstraint::new(p.clone(), Dist::point_mass(1, 0)?);
    let info = |lambda: f64| -> Result<(f64, f64)> {
        let s = solve(&joint, &constraint, InfoKind::I1, lambda, cfg, None)?;
        Ok((s.info_term, s.divergence_term))
    };
    // bracket the multiplier: information at the minimizer falls with λ
    let mut lo = 0.0;
    let mut f_lo = joint.info(InfoKind::I1) - r;
    let mut hi = 1.0;
    let (mut i_hi, mut d_hi) = info(hi)?;
    while i_hi > r {
        lo = hi;
        f_lo = i_hi - r;
        hi *= 2.0;
        if hi > 1e6 {
            // give up on the bracket and return the Lagrangian bound at the
            // largest multiplier tried
            return Ok((d_hi + lo * (i_hi - r)).max(0.0));
        }
        (i_hi, d_hi) = info(hi)?;
    }
    let mut f_hi = i_hi - r;
    let mut best = (f64::NEG_INFINITY, 0.0);
    let mut side = 0i8;
    for _ in 0..cfg.max_root_steps {
        let mut lambda = lo + f_lo * (hi - lo) / (f_lo - f_hi);
        if !(lambda > lo && lambda < hi) {
            lambda = 0.5 * (lo + hi);
        }
        let (i, d) = info(lambda)?;
        let f = i - r;
        // Lagrangian value is a lower bound at every multiplier
        let dual = d + lambda * f;
        if dual > best.0 {
            best = (dual, lambda);
        }
        if f.abs() < cfg.r_tol {
            break;
        }
        if f > 0.0 {
            lo = lambda;
            f_lo = f;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = lambda;
            f_hi = f;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
    }
    Ok(best.0.max(0.0))
}

/// `-log2 Σ_z Π_x W(z|x)^{P(x)}`, the value at rate zero.
fn zero_rate_sphere_packing(w: &SingleUserChannel, p: &Dist) -> f64 {
    let s: f64 = (0..w.outputs())
        .map(|z| {
            (0..w.inputs())
                .filter(|&x| p.get(x) > 0.0)
                .map(|x| w.row(x)[z].powf(p.get(x)))
                .product::<f64>()
        })
        .sum();
    if s <= 0.0 {
        f64::INFINITY
    } else {
        (-s.log2()).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn z_channel_rows() {
        let z = z_channel(0.101).unwrap();
        assert_eq!(z.row(0), &[1.0, 0.0]);
        assert_eq!(z.row(1), &[0.101, 0.899]);
        assert_eq!(z_channel(1.0).unwrap().row(1), &[1.0, 0.0]);
        assert!(z_channel(1.2).is_err());
    }

    #[test]
    fn xor_rows() {
        let w = xor_mac(&z_channel(0.0).unwrap()).unwrap();
        assert_eq!(w.matrix().row(0, 1), &[0.0, 1.0]);
        let w = xor_mac(&z_channel(0.101).unwrap()).unwrap();
        assert_eq!(w.matrix().row(1, 1), &[1.0, 0.0]);
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(w.matrix().row(x, y), w.matrix().row(y, x));
            }
        }
        let ternary = SingleUserChannel::new(vec![vec![1.0]; 3]).unwrap();
        assert!(xor_mac(&ternary).is_err());
    }

    #[test]
    fn capacity_of_bsc() {
        let c = capacity(&bsc(0.0).unwrap(), 1e-9).unwrap();
        assert_abs_diff_eq!(c.capacity, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c.input.get(0), 0.5, epsilon = 1e-9);
        let c = capacity(&bsc(0.5).unwrap(), 1e-9).unwrap();
        assert_abs_diff_eq!(c.capacity, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn preimage_examples() {
        assert_eq!(xor_preimage_input(&Dist::new(vec![1.0, 0.0]).unwrap()).unwrap().get(1), 0.0);
        assert_abs_diff_eq!(
            xor_preimage_input(&Dist::uniform(2).unwrap()).unwrap().get(1),
            0.5
        );
        assert!(matches!(
            xor_preimage_input(&Dist::new(vec![0.4, 0.6]).unwrap()),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn sphere_packing_vanishes_at_capacity() {
        let z = z_channel(0.101).unwrap();
        let c = capacity(&z, 1e-9).unwrap().capacity;
        assert!(sphere_packing_exponent(&z, c, 1e-2).unwrap() < 1e-6);
        assert!(sphere_packing_exponent(&z, 0.0, 1e-2).unwrap().is_finite());
    }
}
