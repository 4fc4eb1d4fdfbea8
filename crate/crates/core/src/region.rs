//! Pentagon rate regions, their unions over inputs, and compound families.

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::MacChannel;
use crate::error::{Error, Result};
use crate::prob::{Dist, InfoKind};

/// `{(R1, R2): R1 ≤ i1, R2 ≤ i2, R1 + R2 ≤ i12}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pentagon {
    pub i1: f64,
    pub i2: f64,
    pub i12: f64,
}

impl Pentagon {
    pub fn contains(&self, r1: f64, r2: f64) -> Result<bool> {
        if !(r1 >= 0.0 && r2 >= 0.0) {
            return Err(Error::Domain(format!("rates ({r1}, {r2}) must be nonnegative")));
        }
        Ok(r1 <= self.i1 && r2 <= self.i2 && r1 + r2 <= self.i12)
    }

    /// Largest `R2` paired with `r1`, or `None` when `r1 > i1`.
    pub fn max_r2(&self, r1: f64) -> Option<f64> {
        (r1 <= self.i1).then(|| self.i2.min(self.i12 - r1).max(0.0))
    }

    /// Corner points of the boundary, counter-clockwise from the origin.
    pub fn vertices(&self) -> Vec<(f64, f64)> {
        let a = (self.i12 - self.i2).clamp(0.0, self.i1);
        let b = (self.i12 - self.i1).clamp(0.0, self.i2);
        vec![(0.0, 0.0), (self.i1, 0.0), (self.i1, b), (a, self.i2), (0.0, self.i2)]
    }
}

/// Pentagon of the inputs `px`, `py` over `w`.
pub fn pentagon(px: &Dist, py: &Dist, w: &MacChannel) -> Result<Pentagon> {
    let p = w.joint(px, py)?;
    Ok(Pentagon {
        i1: p.info(InfoKind::I1),
        i2: p.info(InfoKind::I2),
        i12: p.info(InfoKind::I12),
    })
}

/// Componentwise infimum of the pentagons of a finite channel family.
pub fn compound_region(px: &Dist, py: &Dist, channels: &[MacChannel]) -> Result<Pentagon> {
    if channels.is_empty() {
        return Err(Error::Usage("compound family must not be empty".into()));
    }
    let mut out = Pentagon {
        i1: f64::INFINITY,
        i2: f64::INFINITY,
        i12: f64::INFINITY,
    };
    for w in channels {
        let p = pentagon(px, py, w)?;
        out.i1 = out.i1.min(p.i1);
        out.i2 = out.i2.min(p.i2);
        out.i12 = out.i12.min(p.i12);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPentagon {
    pub px1: f64,
    pub py1: f64,
    pub pentagon: Pentagon,
}

/// Union of pentagons over a grid of binary input pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionUnion {
    pub step: f64,
    pub pentagons: Vec<GridPentagon>,
    /// Upper boundary `(R1, max R2)` sampled on an `R1` grid.
    pub boundary: Vec<(f64, f64)>,
}

impl RegionUnion {
    /// Grid entry with the largest sum-rate bound.
    pub fn best_sum_rate(&self) -> &GridPentagon {
        self.pentagons
            .iter()
            .fold(&self.pentagons[0], |b, g| if g.pentagon.i12 > b.pentagon.i12 { g } else { b })
    }
}

/// Default spacing of the binary input grid.
pub const INPUT_GRID_STEP: f64 = 0.005;

/// Pentagons for every `(P^X(1), P^Y(1))` on a grid of spacing `step`,
/// intersected over the family, and the boundary of their union.
pub fn union_over_inputs(channels: &[MacChannel], step: f64, boundary_points: usize) -> Result<RegionUnion> {
    if channels.is_empty() {
        return Err(Error::Usage("channel family must not be empty".into()));
    }
    if channels.iter().any(|w| {
        let (nx, ny, _) = w.matrix().dims();
        nx != 2 || ny != 2
    }) {
        return Err(Error::Refused("input grid implemented for binary inputs only".into()));
    }
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::Domain(format!("grid step {step} outside (0, 0.5]")));
    }
    let n = (1.0 / step).round() as usize;
    let grid: Vec<(usize, usize)> = (0..=n).flat_map(|i| (0..=n).map(move |j| (i, j))).collect();
    let pentagons = grid
        .par_iter()
        .map(|&(i, j)| {
            let a = i as f64 / n as f64;
            let b = j as f64 / n as f64;
            let pent = compound_region(&Dist::binary(a)?, &Dist::binary(b)?, channels)?;
            Ok(GridPentagon {
                px1: a,
                py1: b,
                pentagon: pent,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let r1_max = pentagons.iter().map(|g| g.pentagon.i1).fold(0.0, f64::max);
    let m = boundary_points.max(2);
    let boundary = (0..m)
        .map(|k| {
            let r1 = r1_max * k as f64 / (m - 1) as f64;
            let r2 = pentagons
                .iter()
                .filter_map(|g| g.pentagon.max_r2(r1))
                .fold(0.0, f64::max);
            (r1, r2)
        })
        .collect();
    Ok(RegionUnion {
        step,
        pentagons,
        boundary,
    })
}
