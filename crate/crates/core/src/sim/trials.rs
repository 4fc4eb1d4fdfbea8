//! Monte-Carlo trials: random messages, channel sampling, decoding and
//! tallying of error patterns.
//!
//! Trial `t` draws from `ChaCha8Rng` seeded with `seed` on stream `t`, so
//! the tally does not depend on how trials are scheduled across threads.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::classify::{classify_sets, ErrorPattern};
use super::code::AmacCode;
use super::decode::{x_window, y_window, MessageTuples, MmiDecoder};
use super::geometry::DelayGeometry;
use crate::channels::MacChannel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TallyParams {
    pub n: usize,
    #[serde(rename = "K")]
    pub blocks: usize,
    #[serde(rename = "D")]
    pub delay: usize,
    pub d: usize,
    pub l: usize,
    pub messages1: usize,
    pub messages2: usize,
    /// Realized rates `log2(M)/n`.
    pub r1: f64,
    pub r2: f64,
    pub channel: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternCount {
    #[serde(rename = "L1")]
    pub l1: Vec<usize>,
    #[serde(rename = "L2")]
    pub l2: Vec<usize>,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternTally {
    pub params: TallyParams,
    pub seed: u64,
    pub trials: u64,
    /// Proper patterns only, in increasing `(L1, L2)` order.
    pub patterns: Vec<PatternCount>,
    pub error_rate: f64,
}

impl PatternTally {
    pub fn errors(&self) -> u64 {
        self.patterns.iter().map(|p| p.count).sum()
    }

    pub fn correct(&self) -> u64 {
        self.trials - self.errors()
    }

    /// Wilson score interval for the error rate at normal quantile `z`.
    pub fn wilson(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.errors(), self.trials, z)
    }

    /// `-log2(error rate) / n`; infinite when no error was seen.
    pub fn empirical_exponent(&self) -> f64 {
        -self.error_rate.log2() / self.params.n as f64
    }
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Normal quantile for two-sided 95% intervals.
pub const Z95: f64 = 1.959_963_984_540_054;

fn sample_output(w: &MacChannel, x: &[u8], y: &[u8], rng: &mut ChaCha8Rng) -> Vec<u8> {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| {
            let row = w.matrix().row(a as usize, b as usize);
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for (z, &p) in row.iter().enumerate() {
                acc += p;
                if u < acc {
                    return z as u8;
                }
            }
            // rounding left u above the total; take the last supported symbol
            row.iter().rposition(|&p| p > 0.0).unwrap_or(0) as u8
        })
        .collect()
}

/// Runs `trials` independent transmissions through `w` at delay `delay`.
pub fn run_trials(
    code: &AmacCode,
    w: &MacChannel,
    delay: usize,
    trials: u64,
    seed: u64,
    decode_cap: u64,
) -> Result<PatternTally> {
    let geom = DelayGeometry::new(code.spec.n, code.spec.blocks, delay)?;
    let (nx, ny, nz) = w.matrix().dims();
    if nx != code.nx() || ny != code.ny() {
        return Err(Error::Dimension(format!(
            "channel inputs {nx}x{ny} do not match code alphabets {}x{}",
            code.nx(),
            code.ny()
        )));
    }
    if nz > u8::MAX as usize + 1 {
        return Err(Error::Refused(format!("output alphabet of size {nz} is too large")));
    }
    let decoder = MmiDecoder::new(geom, nz).with_cap(decode_cap);
    decoder.check_cap(code)?;
    let (m1, m2) = (code.messages1(), code.messages2());

    let one = |t: u64| -> Result<ErrorPattern> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t);
        let i: Vec<usize> = (1..=geom.blocks)
            .map(|s| if s == geom.l { 0 } else { rng.gen_range(1..=m1) })
            .collect();
        let j: Vec<usize> = (1..=geom.blocks)
            .map(|s| if s == geom.blocks { 0 } else { rng.gen_range(1..=m2) })
            .collect();
        let x = x_window(code, &i);
        let y = y_window(code, &geom, &j);
        let z = sample_output(w, &x, &y, &mut rng);
        let sent = MessageTuples { i, j };
        let hat = decoder.decode(code, &z)?.messages;
        ErrorPattern::between(&sent, &hat)
    };

    let counts: BTreeMap<ErrorPattern, u64> = (0..trials)
        .into_par_iter()
        .map(one)
        .try_fold(BTreeMap::new, |mut acc, p| {
            p.map(|p| {
                *acc.entry(p).or_insert(0) += 1;
                acc
            })
        })
        .try_reduce(BTreeMap::new, |mut a, b| {
            for (p, c) in b {
                *a.entry(p).or_insert(0) += c;
            }
            Ok(a)
        })?;

    let mut patterns = Vec::new();
    for (p, count) in counts {
        if p.is_improper() {
            continue;
        }
        // every tallied pattern must be a legal one at this delay
        classify_sets(&p, &geom)?;
        patterns.push(PatternCount {
            l1: p.l1.into_iter().collect(),
            l2: p.l2.into_iter().collect(),
            count,
        });
    }
    let errors: u64 = patterns.iter().map(|p| p.count).sum();
    let (r1, r2) = code.realized_rates();
    Ok(PatternTally {
        params: TallyParams {
            n: geom.n,
            blocks: geom.blocks,
            delay,
            d: geom.d,
            l: geom.l,
            messages1: m1,
            messages2: m2,
            r1,
            r2,
            channel: w.construction.clone(),
        },
        seed,
        trials,
        patterns,
        error_rate: if trials == 0 { 0.0 } else { errors as f64 / trials as f64 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // 10 of 100 at z = 1.96: (0.0552, 0.1744)
        let (lo, hi) = wilson_interval(10, 100, Z95);
        assert!((lo - 0.055_229).abs() < 1e-5, "{lo}");
        assert!((hi - 0.174_366).abs() < 1e-5, "{hi}");
        let (lo, hi) = wilson_interval(0, 1000, Z95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.004);
    }
}
