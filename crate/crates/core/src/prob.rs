//! Finite-alphabet distributions, channel matrices and information measures.
//!
//! Alphabets are index sets `0..k`. Every exposed information quantity is in
//! bits. `0 log 0 = 0`, and a divergence with `p(a) > 0 = q(a)` is
//! `f64::INFINITY`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance on the total mass of a distribution at construction.
pub const PROB_TOL: f64 = 1e-12;

/// Anything that is a probability mass function over a finite product set.
pub trait Pmf {
    fn probs(&self) -> &[f64];
    fn shape(&self) -> Vec<usize>;
}

/// `-p log2 p`, with the `0 log 0 = 0` convention.
#[inline]
pub(crate) fn neg_plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

fn check_probs(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution("empty alphabet".into()));
    }
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} is {p}, expected a nonnegative finite value"
            )));
        }
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidDistribution(format!(
            "entries sum to {total}, expected 1"
        )));
    }
    Ok(())
}

fn normalize_weights(mut w: Vec<f64>) -> Result<Vec<f64>> {
    if w.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(Error::InvalidDistribution(
            "weights must be nonnegative and finite".into(),
        ));
    }
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidDistribution("weights sum to zero".into()));
    }
    w.iter_mut().for_each(|x| *x /= total);
    Ok(w)
}

/// A distribution on `0..k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dist {
    probs: Vec<f64>,
}

impl Dist {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_probs(&probs)?;
        Ok(Self { probs })
    }

    /// Builds a distribution proportional to `weights`.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        Ok(Self {
            probs: normalize_weights(weights)?,
        })
    }

    /// `{1 - p1, p1}`.
    pub fn binary(p1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p1) {
            return Err(Error::InvalidDistribution(format!(
                "binary parameter {p1} outside [0, 1]"
            )));
        }
        Ok(Self {
            probs: vec![1.0 - p1, p1],
        })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        Ok(Self {
            probs: vec![1.0 / k as f64; k],
        })
    }

    pub fn point_mass(k: usize, at: usize) -> Result<Self> {
        if at >= k {
            return Err(Error::Dimension(format!("point {at} outside alphabet of size {k}")));
        }
        let mut probs = vec![0.0; k];
        probs[at] = 1.0;
        Ok(Self { probs })
    }

    /// Empirical distribution of integer counts.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        Self::normalized(counts.iter().map(|&c| c as f64).collect())
    }

    pub(crate) fn from_computed(probs: Vec<f64>) -> Self {
        debug_assert!(check_probs(&probs).is_ok(), "computed pmf invalid: {probs:?}");
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn entropy(&self) -> f64 {
        entropy(self)
    }
}

impl Pmf for Dist {
    fn probs(&self) -> &[f64] {
        &self.probs
    }
    fn shape(&self) -> Vec<usize> {
        vec![self.probs.len()]
    }
}

/// A joint distribution on `X x Y`, stored row-major (`x * ny + y`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Joint2 {
    nx: usize,
    ny: usize,
    probs: Vec<f64>,
}

impl Joint2 {
    pub fn new(nx: usize, ny: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != nx * ny {
            return Err(Error::Dimension(format!(
                "{} entries for a {nx}x{ny} table",
                probs.len()
            )));
        }
        check_probs(&probs)?;
        Ok(Self { nx, ny, probs })
    }

    pub fn normalized(nx: usize, ny: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != nx * ny {
            return Err(Error::Dimension(format!(
                "{} entries for a {nx}x{ny} table",
                weights.len()
            )));
        }
        Ok(Self {
            nx,
            ny,
            probs: normalize_weights(weights)?,
        })
    }

    /// `P^X(x) P^Y(y)`.
    pub fn product(px: &Dist, py: &Dist) -> Self {
        let (nx, ny) = (px.len(), py.len());
        let mut probs = Vec::with_capacity(nx * ny);
        for x in 0..nx {
            for y in 0..ny {
                probs.push(px.get(x) * py.get(y));
            }
        }
        Self { nx, ny, probs }
    }

    pub(crate) fn from_computed(nx: usize, ny: usize, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), nx * ny);
        Self { nx, ny, probs }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.ny + y]
    }

    pub fn marginal_x(&self) -> Dist {
        let m = (0..self.nx)
            .map(|x| (0..self.ny).map(|y| self.get(x, y)).sum())
            .collect();
        Dist::from_computed(m)
    }

    pub fn marginal_y(&self) -> Dist {
        let m = (0..self.ny)
            .map(|y| (0..self.nx).map(|x| self.get(x, y)).sum())
            .collect();
        Dist::from_computed(m)
    }

    pub fn to_table(&self) -> JointTable {
        JointTable {
            shape: vec![self.nx, self.ny],
            probs: self.probs.clone(),
        }
    }

    pub fn mutual_information(&self) -> f64 {
        entropy(&self.marginal_x()) + entropy(&self.marginal_y()) - entropy(self)
    }
}

impl Pmf for Joint2 {
    fn probs(&self) -> &[f64] {
        &self.probs
    }
    fn shape(&self) -> Vec<usize> {
        vec![self.nx, self.ny]
    }
}

/// Selects one of the multi-informations that enter the exponents:
/// `I1 = I(X ∧ YZ)`, `I2 = I(Y ∧ XZ)`, `I12 = I(X ∧ Y ∧ Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum InfoKind {
    I1,
    I2,
    I12,
}

impl InfoKind {
    pub const ALL: [InfoKind; 3] = [InfoKind::I1, InfoKind::I2, InfoKind::I12];

    pub fn index(self) -> usize {
        match self {
            InfoKind::I1 => 0,
            InfoKind::I2 => 1,
            InfoKind::I12 => 2,
        }
    }
}

impl std::fmt::Display for InfoKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InfoKind::I1 => "1",
            InfoKind::I2 => "2",
            InfoKind::I12 => "12",
        })
    }
}

impl std::str::FromStr for InfoKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(InfoKind::I1),
            "2" => Ok(InfoKind::I2),
            "12" => Ok(InfoKind::I12),
            other => Err(Error::Usage(format!("unknown information index {other:?}"))),
        }
    }
}

/// A joint distribution on `X x Y x Z`, stored as `(x * ny + y) * nz + z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Joint3 {
    nx: usize,
    ny: usize,
    nz: usize,
    probs: Vec<f64>,
}

impl Joint3 {
    pub fn new(nx: usize, ny: usize, nz: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != nx * ny * nz {
            return Err(Error::Dimension(format!(
                "{} entries for a {nx}x{ny}x{nz} table",
                probs.len()
            )));
        }
        check_probs(&probs)?;
        Ok(Self { nx, ny, nz, probs })
    }

    pub fn normalized(nx: usize, ny: usize, nz: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != nx * ny * nz {
            return Err(Error::Dimension(format!(
                "{} entries for a {nx}x{ny}x{nz} table",
                weights.len()
            )));
        }
        Ok(Self {
            nx,
            ny,
            nz,
            probs: normalize_weights(weights)?,
        })
    }

    pub(crate) fn from_computed(nx: usize, ny: usize, nz: usize, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), nx * ny * nz);
        Self { nx, ny, nz, probs }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nz)
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (x * self.ny + y) * self.nz + z
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.probs[self.index(x, y, z)]
    }

    pub fn marginal_xy(&self) -> Joint2 {
        let probs = self
            .probs
            .chunks(self.nz)
            .map(|row| row.iter().sum())
            .collect();
        Joint2::from_computed(self.nx, self.ny, probs)
    }

    pub fn marginal_x(&self) -> Dist {
        self.marginal_xy().marginal_x()
    }

    pub fn marginal_y(&self) -> Dist {
        self.marginal_xy().marginal_y()
    }

    pub fn marginal_z(&self) -> Dist {
        let mut m = vec![0.0; self.nz];
        for row in self.probs.chunks(self.nz) {
            for (acc, p) in m.iter_mut().zip(row) {
                *acc += p;
            }
        }
        Dist::from_computed(m)
    }

    pub fn to_table(&self) -> JointTable {
        JointTable {
            shape: vec![self.nx, self.ny, self.nz],
            probs: self.probs.clone(),
        }
    }

    /// `I(X ∧ Y)`.
    pub fn info0(&self) -> f64 {
        self.marginal_xy().mutual_information()
    }

    /// `I^1`, `I^2` or `I^12` of this distribution.
    pub fn info(&self, kind: InfoKind) -> f64 {
        let t = self.to_table();
        let groups: &[&[usize]] = match kind {
            InfoKind::I1 => &[&[0], &[1, 2]],
            InfoKind::I2 => &[&[1], &[0, 2]],
            InfoKind::I12 => &[&[0], &[1], &[2]],
        };
        // groups are always a valid partition here
        multi_information(&t, groups).unwrap_or(f64::NAN)
    }
}

impl Pmf for Joint3 {
    fn probs(&self) -> &[f64] {
        &self.probs
    }
    fn shape(&self) -> Vec<usize> {
        vec![self.nx, self.ny, self.nz]
    }
}

/// A joint distribution of any number of finite variables, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointTable {
    shape: Vec<usize>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn new(shape: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let cells: usize = shape.iter().product();
        if shape.is_empty() || cells != probs.len() {
            return Err(Error::Dimension(format!(
                "{} entries for shape {shape:?}",
                probs.len()
            )));
        }
        check_probs(&probs)?;
        Ok(Self { shape, probs })
    }

    /// Empirical joint distribution of equal-length symbol sequences.
    /// `alphabets[i]` is the alphabet size of `seqs[i]`.
    pub fn joint_type(seqs: &[&[u8]], alphabets: &[usize]) -> Result<Self> {
        if seqs.is_empty() || seqs.len() != alphabets.len() {
            return Err(Error::Dimension("one alphabet size per sequence".into()));
        }
        let n = seqs[0].len();
        if n == 0 || seqs.iter().any(|s| s.len() != n) {
            return Err(Error::Dimension("sequences must be nonempty and equal-length".into()));
        }
        let cells: usize = alphabets.iter().product();
        let mut counts = vec![0.0; cells];
        for t in 0..n {
            let mut idx = 0;
            for (s, &a) in seqs.iter().zip(alphabets) {
                let sym = s[t] as usize;
                if sym >= a {
                    return Err(Error::Dimension(format!("symbol {sym} outside alphabet {a}")));
                }
                idx = idx * a + sym;
            }
            counts[idx] += 1.0;
        }
        counts.iter_mut().for_each(|c| *c /= n as f64);
        Ok(Self {
            shape: alphabets.to_vec(),
            probs: counts,
        })
    }

    pub fn shape_ref(&self) -> &[usize] {
        &self.shape
    }

    /// Marginal on the listed axes, in the listed order.
    pub fn marginal(&self, axes: &[usize]) -> Result<JointTable> {
        let rank = self.shape.len();
        if axes.is_empty() || axes.iter().any(|&a| a >= rank) {
            return Err(Error::Dimension(format!("bad axes {axes:?} for rank {rank}")));
        }
        let mut seen = vec![false; rank];
        for &a in axes {
            if seen[a] {
                return Err(Error::Dimension(format!("axis {a} repeated")));
            }
            seen[a] = true;
        }
        let out_shape: Vec<usize> = axes.iter().map(|&a| self.shape[a]).collect();
        let mut out = vec![0.0; out_shape.iter().product()];
        let mut digits = vec![0usize; rank];
        for &p in &self.probs {
            let mut idx = 0;
            for &a in axes {
                idx = idx * self.shape[a] + digits[a];
            }
            out[idx] += p;
            for ax in (0..rank).rev() {
                digits[ax] += 1;
                if digits[ax] < self.shape[ax] {
                    break;
                }
                digits[ax] = 0;
            }
        }
        Ok(JointTable {
            shape: out_shape,
            probs: out,
        })
    }
}

impl Pmf for JointTable {
    fn probs(&self) -> &[f64] {
        &self.probs
    }
    fn shape(&self) -> Vec<usize> {
        self.shape.clone()
    }
}

/// A stochastic matrix `W(z | x, y)`; single-user channels use `ny = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelMatrix {
    nx: usize,
    ny: usize,
    nz: usize,
    w: Vec<f64>,
}

impl ChannelMatrix {
    /// `rows[x * ny + y]` is the output distribution for input `(x, y)`.
    pub fn new(nx: usize, ny: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if nx == 0 || ny == 0 || rows.len() != nx * ny {
            return Err(Error::Dimension(format!(
                "{} rows for a {nx}x{ny} input alphabet",
                rows.len()
            )));
        }
        let nz = rows[0].len();
        if nz == 0 || rows.iter().any(|r| r.len() != nz) {
            return Err(Error::Dimension("ragged or empty channel rows".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            check_probs(r).map_err(|e| Error::InvalidChannel(format!("row {i}: {e}")))?;
        }
        Ok(Self {
            nx,
            ny,
            nz,
            w: rows.concat(),
        })
    }

    /// Single-user channel `W(z | x)` as a matrix with a trivial second input.
    pub fn single_user(rows: Vec<Vec<f64>>) -> Result<Self> {
        let nx = rows.len();
        Self::new(nx, 1, rows)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nz)
    }

    pub fn row(&self, x: usize, y: usize) -> &[f64] {
        let start = (x * self.ny + y) * self.nz;
        &self.w[start..start + self.nz]
    }

    pub fn get(&self, z: usize, x: usize, y: usize) -> f64 {
        self.row(x, y)[z]
    }
}

/// Shannon entropy in bits.
pub fn entropy<P: Pmf + ?Sized>(p: &P) -> f64 {
    p.probs().iter().map(|&q| neg_plogp(q)).sum()
}

/// `D(p ‖ q)` in bits; `f64::INFINITY` when `p` is not absolutely continuous
/// with respect to `q`.
pub fn divergence<P: Pmf + ?Sized>(p: &P, q: &P) -> Result<f64> {
    if p.shape() != q.shape() {
        return Err(Error::Dimension(format!(
            "shapes {:?} and {:?} differ",
            p.shape(),
            q.shape()
        )));
    }
    Ok(divergence_slices(p.probs(), q.probs()))
}

pub(crate) fn divergence_slices(p: &[f64], q: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            d += a * (a / b).log2();
        }
    }
    d.max(0.0)
}

/// `‖p - q‖ = Σ |p - q|`.
pub fn variational_distance<P: Pmf + ?Sized>(p: &P, q: &P) -> Result<f64> {
    if p.shape() != q.shape() {
        return Err(Error::Dimension(format!(
            "shapes {:?} and {:?} differ",
            p.shape(),
            q.shape()
        )));
    }
    Ok(p.probs().iter().zip(q.probs()).map(|(a, b)| (a - b).abs()).sum())
}

/// `(V ∘ W)(x, y, z) = V(x, y) W(z | x, y)`.
pub fn compose(v: &Joint2, w: &ChannelMatrix) -> Result<Joint3> {
    let (nx, ny, nz) = w.dims();
    if v.nx() != nx || v.ny() != ny {
        return Err(Error::Dimension(format!(
            "joint is {}x{}, channel inputs are {nx}x{ny}",
            v.nx(),
            v.ny()
        )));
    }
    let mut probs = Vec::with_capacity(nx * ny * nz);
    for x in 0..nx {
        for y in 0..ny {
            let vxy = v.get(x, y);
            probs.extend(w.row(x, y).iter().map(|&wz| vxy * wz));
        }
    }
    Ok(Joint3::from_computed(nx, ny, nz, probs))
}

/// Multi-information `Σ_i H(group_i) - H(all)` of a joint distribution,
/// where `groups` partitions the axes of `v`.
pub fn multi_information(v: &JointTable, groups: &[&[usize]]) -> Result<f64> {
    if groups.len() < 2 {
        return Err(Error::Usage("multi-information needs at least two groups".into()));
    }
    let rank = v.shape.len();
    let mut covered = vec![false; rank];
    for g in groups {
        if g.is_empty() {
            return Err(Error::Usage("empty variable group".into()));
        }
        for &a in *g {
            if a >= rank || covered[a] {
                return Err(Error::Usage(format!(
                    "groups {groups:?} do not partition {rank} axes"
                )));
            }
            covered[a] = true;
        }
    }
    if covered.iter().any(|c| !c) {
        return Err(Error::Usage(format!(
            "groups {groups:?} do not partition {rank} axes"
        )));
    }
    let mut sum = 0.0;
    for g in groups {
        sum += entropy(&v.marginal(g)?);
    }
    Ok((sum - entropy(v)).max(0.0))
}

/// A joint distribution with the prescribed marginals within the distance
/// budget `‖px - v^X‖ + ‖py - v^Y‖` of `v`, built by shifting mass first
/// along the X marginal, then along the Y marginal.
pub fn couple_to_marginals(v: &Joint2, px: &Dist, py: &Dist) -> Result<Joint2> {
    if v.nx() != px.len() || v.ny() != py.len() {
        return Err(Error::Dimension(format!(
            "joint is {}x{}, marginals have sizes {} and {}",
            v.nx(),
            v.ny(),
            px.len(),
            py.len()
        )));
    }
    let first = shift_rows(v.nx(), v.ny(), &v.probs, px.probs());
    // second stage works on the transpose
    let (nx, ny) = (v.nx(), v.ny());
    let transposed: Vec<f64> = (0..ny)
        .flat_map(|y| (0..nx).map(move |x| (x, y)))
        .map(|(x, y)| first[x * ny + y])
        .collect();
    let second = shift_rows(ny, nx, &transposed, py.probs());
    let probs = (0..nx)
        .flat_map(|x| (0..ny).map(move |y| (x, y)))
        .map(|(x, y)| second[y * nx + x])
        .collect();
    Ok(Joint2::from_computed(nx, ny, probs))
}

/// Moves row mass so the row marginal becomes `target` while keeping column
/// sums, changing the table by exactly `‖target - rows‖` in L1.
fn shift_rows(nr: usize, nc: usize, v: &[f64], target: &[f64]) -> Vec<f64> {
    let rows: Vec<f64> = (0..nr).map(|r| v[r * nc..(r + 1) * nc].iter().sum()).collect();
    let deficit: f64 = (0..nr)
        .filter(|&r| rows[r] <= target[r])
        .map(|r| target[r] - rows[r])
        .sum();
    if deficit <= 0.0 {
        return v.to_vec();
    }
    // c_c: share of the removed mass that sat in column c
    let mut c = vec![0.0; nc];
    for r in (0..nr).filter(|&r| rows[r] > target[r]) {
        let frac = (rows[r] - target[r]) / rows[r];
        for (col, cc) in c.iter_mut().enumerate() {
            *cc += v[r * nc + col] * frac;
        }
    }
    c.iter_mut().for_each(|cc| *cc /= deficit);
    let mut out = v.to_vec();
    for r in 0..nr {
        for col in 0..nc {
            let i = r * nc + col;
            out[i] = if rows[r] > target[r] {
                v[i] * target[r] / rows[r]
            } else {
                v[i] + c[col] * (target[r] - rows[r])
            };
        }
    }
    out
}

/// Replaces the XY-marginal of `v` by `vxy_hat`, keeping the conditional
/// `v(z | x, y)` on cells with `v(x, y) ≥ η` and switching to the channel row
/// elsewhere, where `η = sqrt(‖vxy_hat - v^{XY}‖)`.
///
/// Requires `‖vxy_hat - v^{XY}‖ ≤ (|X||Y|)^{-2}`.
pub fn extend_coupling_to_channel(
    v: &Joint3,
    vxy_hat: &Joint2,
    w: &ChannelMatrix,
) -> Result<Joint3> {
    let (nx, ny, nz) = v.dims();
    if w.dims() != (nx, ny, nz) || vxy_hat.nx() != nx || vxy_hat.ny() != ny {
        return Err(Error::Dimension(
            "joint, target marginal and channel disagree on alphabets".into(),
        ));
    }
    let vxy = v.marginal_xy();
    let dist = variational_distance(vxy_hat, &vxy)?;
    let cap = 1.0 / ((nx * ny) as f64).powi(2);
    if dist > cap {
        return Err(Error::Domain(format!(
            "marginal shift {dist} exceeds (|X||Y|)^-2 = {cap}"
        )));
    }
    let eta = dist.sqrt();
    let mut probs = Vec::with_capacity(nx * ny * nz);
    for x in 0..nx {
        for y in 0..ny {
            let mass = vxy.get(x, y);
            let target = vxy_hat.get(x, y);
            if mass >= eta && mass > 0.0 {
                for z in 0..nz {
                    probs.push(target * v.get(x, y, z) / mass);
                }
            } else {
                probs.extend(w.row(x, y).iter().map(|&wz| target * wz));
            }
        }
    }
    Ok(Joint3::from_computed(nx, ny, nz, probs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(entropy(&Dist::new(vec![0.5, 0.5]).unwrap()), 1.0);
        assert_eq!(entropy(&Dist::new(vec![1.0, 0.0]).unwrap()), 0.0);
        // reference value from a 50-digit mpmath evaluation
        let h = entropy(&Dist::new(vec![0.351746, 0.648254]).unwrap());
        assert_abs_diff_eq!(h, 0.935_617_722_710_361_9, epsilon = 1e-14);
    }

    #[test]
    fn divergence_examples() {
        let p = Dist::new(vec![0.3, 0.7]).unwrap();
        assert_eq!(divergence(&p, &p).unwrap(), 0.0);
        let a = Dist::new(vec![1.0, 0.0]).unwrap();
        let u = Dist::uniform(2).unwrap();
        assert_abs_diff_eq!(divergence(&a, &u).unwrap(), 1.0);
        assert_eq!(divergence(&u, &a).unwrap(), f64::INFINITY);
        let three = Dist::uniform(3).unwrap();
        assert!(matches!(divergence(&u, &three), Err(Error::Dimension(_))));
    }

    #[test]
    fn variational_examples() {
        let a = Dist::new(vec![1.0, 0.0]).unwrap();
        let b = Dist::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(variational_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(variational_distance(&a, &b).unwrap(), 2.0);
        let c = Dist::new(vec![0.6, 0.4]).unwrap();
        let u = Dist::uniform(2).unwrap();
        assert_abs_diff_eq!(variational_distance(&c, &u).unwrap(), 0.2, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_distributions() {
        assert!(Dist::new(vec![0.5, 0.6]).is_err());
        assert!(Dist::new(vec![-0.1, 1.1]).is_err());
        assert!(Dist::new(vec![]).is_err());
        assert!(Dist::normalized(vec![0.0, 0.0]).is_err());
        assert_eq!(Dist::normalized(vec![1.0, 3.0]).unwrap().get(1), 0.75);
    }

    #[test]
    fn compose_xor_identity() {
        let u = Dist::uniform(2).unwrap();
        let v = Joint2::product(&u, &u);
        let xor = ChannelMatrix::new(
            2,
            2,
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
        )
        .unwrap();
        let j = compose(&v, &xor).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(j.get(x, y, x ^ y), 0.25);
                assert_eq!(j.get(x, y, 1 - (x ^ y)), 0.0);
            }
        }
        assert_eq!(j.marginal_xy(), v);
        let bad = ChannelMatrix::single_user(vec![vec![1.0], vec![1.0]]).unwrap();
        assert!(compose(&v, &bad).is_err());
    }

    #[test]
    fn multi_information_examples() {
        let u = Dist::uniform(2).unwrap();
        let indep = Joint2::product(&u, &u).to_table();
        assert_abs_diff_eq!(multi_information(&indep, &[&[0], &[1]]).unwrap(), 0.0);
        let diag = Joint2::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap().to_table();
        assert_abs_diff_eq!(multi_information(&diag, &[&[0], &[1]]).unwrap(), 1.0);
        assert!(matches!(
            multi_information(&diag, &[&[0, 1]]),
            Err(Error::Usage(_))
        ));
        assert!(multi_information(&diag, &[&[0], &[0]]).is_err());
    }

    #[test]
    fn marginal_and_joint_type() {
        let t = JointTable::joint_type(&[&[0, 1, 1, 0], &[0, 0, 1, 1]], &[2, 2]).unwrap();
        assert_eq!(t.probs(), &[0.25, 0.25, 0.25, 0.25]);
        let m = t.marginal(&[1]).unwrap();
        assert_eq!(m.probs(), &[0.5, 0.5]);
        let t3 = Joint3::normalized(2, 3, 2, (1..=12).map(|i| i as f64).collect()).unwrap();
        let swapped = t3.to_table().marginal(&[2, 0]).unwrap();
        let direct = t3.to_table().marginal(&[0, 2]).unwrap();
        for x in 0..2 {
            for z in 0..2 {
                assert_abs_diff_eq!(swapped.probs()[z * 2 + x], direct.probs()[x * 2 + z]);
            }
        }
    }

    #[test]
    fn coupling_no_shift_is_identity() {
        let v = Joint2::new(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let out = couple_to_marginals(&v, &v.marginal_x(), &v.marginal_y()).unwrap();
        for (a, b) in out.probs().iter().zip(v.probs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn coupling_uniform_example() {
        let v = Joint2::new(2, 2, vec![0.25; 4]).unwrap();
        let px = Dist::new(vec![0.75, 0.25]).unwrap();
        let py = Dist::uniform(2).unwrap();
        let out = couple_to_marginals(&v, &px, &py).unwrap();
        assert_abs_diff_eq!(out.marginal_x().get(0), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(out.marginal_y().get(0), 0.5, epsilon = 1e-15);
        assert!(variational_distance(&out, &v).unwrap() <= 0.5 + 1e-15);
    }

    #[test]
    fn extension_keeps_v_when_marginal_unchanged() {
        let v = Joint3::normalized(2, 2, 2, vec![1.0, 2.0, 3.0, 1.0, 2.0, 2.0, 1.0, 4.0]).unwrap();
        let w = ChannelMatrix::new(2, 2, vec![vec![0.5, 0.5]; 4]).unwrap();
        let out = extend_coupling_to_channel(&v, &v.marginal_xy(), &w).unwrap();
        for (a, b) in out.probs().iter().zip(v.probs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn extension_switches_small_cells_to_channel() {
        // v(1,1) = 0.01 sits below eta = sqrt(0.02) ≈ 0.141
        let v = Joint3::new(
            2,
            2,
            2,
            vec![0.30, 0.10, 0.20, 0.10, 0.20, 0.09, 0.005, 0.005],
        )
        .unwrap();
        let w = ChannelMatrix::new(
            2,
            2,
            vec![vec![0.9, 0.1], vec![0.8, 0.2], vec![0.7, 0.3], vec![0.25, 0.75]],
        )
        .unwrap();
        let hat = Joint2::new(2, 2, vec![0.39, 0.3, 0.29, 0.02]).unwrap();
        let out = extend_coupling_to_channel(&v, &hat, &w).unwrap();
        assert_abs_diff_eq!(out.get(1, 1, 0), 0.02 * 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(out.get(1, 1, 1), 0.02 * 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(out.get(0, 0, 0), 0.39 * 0.75, epsilon = 1e-15);

        let far = Joint2::new(2, 2, vec![0.1, 0.3, 0.3, 0.3]).unwrap();
        assert!(matches!(
            extend_coupling_to_channel(&v, &far, &w),
            Err(Error::Domain(_))
        ));
    }
}
