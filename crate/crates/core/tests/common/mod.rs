#![allow(dead_code)]

use amac_core::prob::{compose, couple_to_marginals, ChannelMatrix, Dist, Joint2, Joint3};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strictly positive random weights, normalized.
pub fn weights(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub fn dist(rng: &mut impl Rng, k: usize) -> Dist {
    Dist::normalized(weights(rng, k)).unwrap()
}

pub fn joint2(rng: &mut impl Rng, nx: usize, ny: usize) -> Joint2 {
    Joint2::normalized(nx, ny, weights(rng, nx * ny)).unwrap()
}

pub fn joint3(rng: &mut impl Rng, nx: usize, ny: usize, nz: usize) -> Joint3 {
    Joint3::normalized(nx, ny, nz, weights(rng, nx * ny * nz)).unwrap()
}

pub fn channel(rng: &mut impl Rng, nx: usize, ny: usize, nz: usize) -> ChannelMatrix {
    let rows = (0..nx * ny).map(|_| weights(rng, nz)).collect();
    ChannelMatrix::new(nx, ny, rows).unwrap()
}

/// Reference joint `(px x py) ∘ w` with random inputs and channel.
pub struct Instance {
    pub px: Dist,
    pub py: Dist,
    pub w: ChannelMatrix,
    pub p: Joint3,
}

pub fn instance(rng: &mut impl Rng, nx: usize, ny: usize, nz: usize) -> Instance {
    let px = dist(rng, nx);
    let py = dist(rng, ny);
    let w = channel(rng, nx, ny, nz);
    let p = compose(&Joint2::product(&px, &py), &w).unwrap();
    Instance { px, py, w, p }
}

/// A joint with XY-marginals `px`, `py` and a random conditional of `z`.
pub fn feasible_joint(rng: &mut impl Rng, px: &Dist, py: &Dist, nz: usize) -> Joint3 {
    let vxy = couple_to_marginals(&joint2(rng, px.len(), py.len()), px, py).unwrap();
    compose(&vxy, &channel(rng, px.len(), py.len(), nz)).unwrap()
}
