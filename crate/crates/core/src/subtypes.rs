//! Exact type-class combinatorics at small blocklengths.
//!
//! Covers type-class sizes, the Jensen-Shannon gap of a two-way split,
//! δ-balanced sequences with exhaustive counting, and an empirical check of
//! the packing inequality on tiny codes. Counts are exact (big integers or
//! exhaustive enumeration); only the bounds they are compared against are
//! floating point.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::{multi_information, JointTable};
use crate::sim::{classify_sets, x_window, y_window, AmacCode, DelayGeometry, ErrorPattern};

/// Largest blocklength accepted by [`TypeClassQuery`].
pub const MAX_TYPE_LEN: usize = 64;

/// Largest type class [`type_class_sequences`] will list.
pub const MAX_LISTED_CLASS: usize = 1 << 22;

/// Largest blocklength for exhaustive balance counting.
pub const MAX_BALANCE_LEN: usize = 20;

/// Slack on `J ≤ δ` absorbing rounding in the entropy form.
pub const BALANCE_SLACK: f64 = 1e-12;

/// A type given by integer symbol counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypeClassQuery {
    pub n: usize,
    pub counts: Vec<u64>,
}

impl TypeClassQuery {
    pub fn new(n: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Usage("alphabet must be nonempty".into()));
        }
        if n > MAX_TYPE_LEN {
            return Err(Error::Refused(format!("blocklength {n} above {MAX_TYPE_LEN}")));
        }
        let sum: u64 = counts.iter().sum();
        if sum != n as u64 {
            return Err(Error::Usage(format!("counts {counts:?} sum to {sum}, not {n}")));
        }
        Ok(Self { n, counts })
    }

    pub fn alphabet(&self) -> usize {
        self.counts.len()
    }

    /// Entropy of the type in bits.
    pub fn entropy(&self) -> f64 {
        counts_entropy(&self.counts)
    }
}

fn clog(c: u64) -> f64 {
    if c == 0 {
        0.0
    } else {
        c as f64 * (c as f64).log2()
    }
}

/// Entropy of the empirical distribution with the given counts.
fn counts_entropy(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    ((clog(n) - counts.iter().map(|&c| clog(c)).sum::<f64>()) / n as f64).max(0.0)
}

fn factorial(m: u64) -> BigUint {
    (1..=m).fold(BigUint::one(), |acc, k| acc * k)
}

/// `|T^n_P|`, the multinomial coefficient `n! / Π_a n(a)!`.
pub fn type_class_size(q: &TypeClassQuery) -> Result<BigUint> {
    let denom = q
        .counts
        .iter()
        .fold(BigUint::one(), |acc, &c| acc * factorial(c));
    Ok(factorial(q.n as u64) / denom)
}

/// `(2^{nH(P)} / (n+1)^{|X|}, 2^{nH(P)})`, the standard bounds on `|T^n_P|`.
pub fn type_class_bounds(q: &TypeClassQuery) -> (f64, f64) {
    let upper = (q.n as f64 * q.entropy()).exp2();
    (upper / ((q.n + 1) as f64).powi(q.alphabet() as i32), upper)
}

/// All sequences of the type, in lexicographic order.
pub fn type_class_sequences(q: &TypeClassQuery) -> Result<Vec<Vec<u8>>> {
    if q.alphabet() > u8::MAX as usize + 1 {
        return Err(Error::Refused("alphabet too large for byte symbols".into()));
    }
    let size = type_class_size(q)?;
    let size = size
        .to_usize()
        .filter(|&s| s <= MAX_LISTED_CLASS)
        .ok_or_else(|| Error::Refused(format!("type class of size {size} is too large to list")))?;
    let mut out = Vec::with_capacity(size);
    let mut remaining = q.counts.clone();
    let mut prefix = Vec::with_capacity(q.n);
    fill_sequences(&mut remaining, &mut prefix, q.n, &mut out);
    Ok(out)
}

fn fill_sequences(remaining: &mut [u64], prefix: &mut Vec<u8>, n: usize, out: &mut Vec<Vec<u8>>) {
    if prefix.len() == n {
        out.push(prefix.clone());
        return;
    }
    for a in 0..remaining.len() {
        if remaining[a] > 0 {
            remaining[a] -= 1;
            prefix.push(a as u8);
            fill_sequences(remaining, prefix, n, out);
            prefix.pop();
            remaining[a] += 1;
        }
    }
}

/// The two expressions of the Jensen-Shannon gap of a split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JsSplit {
    /// `H(P) - (d/n) H(V1) - ((n-d)/n) H(V2)`.
    pub entropy_form: f64,
    /// `(d/n) D(V1 ‖ P) + ((n-d)/n) D(V2 ‖ P)`.
    pub divergence_form: f64,
}

impl JsSplit {
    pub fn value(&self) -> f64 {
        self.entropy_form.max(0.0)
    }
}

/// Jensen-Shannon gap of splitting type `p` (over `n`) into a prefix type
/// `v1` (over `d`) and a suffix type `v2` (over `n - d`), all as counts.
pub fn jensen_shannon_split(p: &[u64], v1: &[u64], v2: &[u64]) -> Result<JsSplit> {
    if p.len() != v1.len() || p.len() != v2.len() {
        return Err(Error::Dimension("types over different alphabets".into()));
    }
    if p.iter().zip(v1).zip(v2).any(|((&a, &b), &c)| b + c != a) {
        return Err(Error::Domain(format!(
            "prefix {v1:?} and suffix {v2:?} do not mix to {p:?}"
        )));
    }
    let n: u64 = p.iter().sum();
    if n == 0 {
        return Err(Error::Domain("empty type".into()));
    }
    let d: u64 = v1.iter().sum();
    let (nf, df, ef) = (n as f64, d as f64, (n - d) as f64);
    let entropy_form = counts_entropy(p) - df / nf * counts_entropy(v1) - ef / nf * counts_entropy(v2);
    // D(V‖P) = Σ v(a)/m log(v(a)/m / (p(a)/n))
    let div = |v: &[u64], m: f64| -> f64 {
        if m == 0.0 {
            return 0.0;
        }
        v.iter()
            .zip(p)
            .filter(|(&c, _)| c > 0)
            .map(|(&c, &pc)| c as f64 / m * ((c as f64 / m) / (pc as f64 / nf)).log2())
            .sum()
    };
    let divergence_form = df / nf * div(v1, df) + ef / nf * div(v2, ef);
    Ok(JsSplit {
        entropy_form,
        divergence_form,
    })
}

/// `J` of the split after `d` symbols, for every `0 < d < n`.
pub fn split_gaps(seq: &[u8], alphabet: usize) -> Result<Vec<f64>> {
    let n = seq.len();
    let mut total = vec![0u64; alphabet];
    for &s in seq {
        if s as usize >= alphabet {
            return Err(Error::Usage(format!("symbol {s} outside alphabet of size {alphabet}")));
        }
        total[s as usize] += 1;
    }
    let h = counts_entropy(&total);
    let mut prefix = vec![0u64; alphabet];
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    for d in 1..n {
        prefix[seq[d - 1] as usize] += 1;
        let suffix: Vec<u64> = total.iter().zip(&prefix).map(|(t, p)| t - p).collect();
        let (df, nf) = (d as f64, n as f64);
        out.push(h - df / nf * counts_entropy(&prefix) - (nf - df) / nf * counts_entropy(&suffix));
    }
    Ok(out)
}

/// Whether every split of `seq` has gap at most `delta`.
pub fn is_balanced(seq: &[u8], alphabet: usize, delta: f64) -> Result<bool> {
    Ok(split_gaps(seq, alphabet)?.iter().all(|&j| j <= delta + BALANCE_SLACK))
}

/// `3 |X| log2(n) / n`, the balance threshold guaranteeing that at least half
/// of every type class is balanced.
pub fn delta_n(n: usize, alphabet: usize) -> f64 {
    3.0 * alphabet as f64 * (n as f64).log2() / n as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalancedCount {
    pub n: usize,
    pub counts: Vec<u64>,
    pub delta: f64,
    pub balanced: u64,
    pub total: u64,
}

impl BalancedCount {
    pub fn ratio(&self) -> f64 {
        self.balanced as f64 / self.total as f64
    }

    /// `|T(δ)| ≥ |T| / 2`.
    pub fn at_least_half(&self) -> bool {
        2 * self.balanced >= self.total
    }
}

/// Exhaustive count of `delta`-balanced sequences in a binary type class.
pub fn count_balanced(counts: &[u64], delta: f64) -> Result<BalancedCount> {
    if counts.len() != 2 {
        return Err(Error::Refused(format!(
            "exhaustive balance counting is implemented for binary types, got alphabet {}",
            counts.len()
        )));
    }
    let n = (counts[0] + counts[1]) as usize;
    if n == 0 || n > MAX_BALANCE_LEN {
        return Err(Error::Refused(format!("blocklength {n} outside [1, {MAX_BALANCE_LEN}]")));
    }
    let ones = counts[1] as u32;
    let h = counts_entropy(counts);
    let nf = n as f64;
    let logs: Vec<f64> = (0..=n as u64).map(clog).collect();
    // d H(V) for a binary prefix of length d with a ones
    let dh = |d: usize, a: usize| logs[d] - logs[a] - logs[d - a];
    // bit t of the mask is symbol t of the sequence
    let masks: Vec<u32> = (0u32..(1u32 << n)).filter(|m| m.count_ones() == ones).collect();
    let balanced = masks
        .par_iter()
        .filter(|&&m| {
            let mut a = 0usize;
            for d in 1..n {
                a += (m >> (d - 1) & 1) as usize;
                let j = h - (dh(d, a) + dh(n - d, ones as usize - a)) / nf;
                if j > delta + BALANCE_SLACK {
                    return false;
                }
            }
            true
        })
        .count() as u64;
    Ok(BalancedCount {
        n,
        counts: counts.to_vec(),
        delta,
        balanced,
        total: masks.len() as u64,
    })
}

/// Balance counts at `δ_n` for every binary type with `2 ≤ n ≤ n_max`.
pub fn verify_expurgation(n_max: usize) -> Result<Vec<BalancedCount>> {
    let mut out = Vec::new();
    for n in 2..=n_max {
        let delta = delta_n(n, 2);
        for ones in 0..=n as u64 {
            out.push(count_balanced(&[n as u64 - ones, ones], delta)?);
        }
    }
    Ok(out)
}

/// Number of `y ∈ Y^n` whose joint type with `x` has the given counts
/// (`|X| × |Y|`, row-major), by enumeration of `Y^n`.
pub fn conditional_count_by_enumeration(x: &[u8], joint: &[u64], nx: usize, ny: usize) -> Result<u64> {
    let n = x.len();
    if joint.len() != nx * ny {
        return Err(Error::Dimension(format!("{} joint counts for {nx}x{ny}", joint.len())));
    }
    let space = (ny as f64).powi(n as i32);
    if space > (1u64 << 24) as f64 {
        return Err(Error::Refused(format!("{ny}^{n} sequences are too many to enumerate")));
    }
    let mut y = vec![0usize; n];
    let mut count = 0u64;
    let mut cells = vec![0u64; nx * ny];
    loop {
        cells.iter_mut().for_each(|c| *c = 0);
        for (&a, &b) in x.iter().zip(&y) {
            cells[a as usize * ny + b] += 1;
        }
        if cells == joint {
            count += 1;
        }
        let mut p = n;
        loop {
            if p == 0 {
                return Ok(count);
            }
            p -= 1;
            y[p] += 1;
            if y[p] < ny {
                break;
            }
            y[p] = 0;
        }
    }
}

/// `2^{n H(Y|X)}` for joint counts over `n` symbols.
pub fn conditional_count_bound(joint: &[u64], nx: usize, ny: usize) -> f64 {
    let rows: Vec<u64> = (0..nx).map(|x| joint[x * ny..(x + 1) * ny].iter().sum()).collect();
    let n: u64 = rows.iter().sum();
    // n H(Y|X) = n H(X,Y) - n H(X)
    let nh_xy = clog(n) - joint.iter().map(|&c| clog(c)).sum::<f64>();
    let nh_x = clog(n) - rows.iter().map(|&c| clog(c)).sum::<f64>();
    (nh_xy - nh_x).exp2()
}

/// Joint subtypes of a quadruple `(x, x̂, y, ŷ)` of window sequences: one
/// count table over `X × X × Y × Y` per subblock.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubtypeSequence {
    pub nx: usize,
    pub ny: usize,
    /// Counts indexed `((x nx + x̂) ny + y) ny + ŷ`, one vector per subblock.
    pub counts: Vec<Vec<u32>>,
}

impl SubtypeSequence {
    pub fn new(geom: &DelayGeometry, nx: usize, ny: usize, counts: Vec<Vec<u32>>) -> Result<Self> {
        if counts.len() != geom.subblocks() {
            return Err(Error::Dimension(format!(
                "{} subtypes for {} subblocks",
                counts.len(),
                geom.subblocks()
            )));
        }
        for (k, c) in counts.iter().enumerate() {
            if c.len() != nx * nx * ny * ny {
                return Err(Error::Dimension(format!("subtype {} has {} cells", k + 1, c.len())));
            }
            let sum: u32 = c.iter().sum();
            if sum as usize != geom.subblock_len(k + 1) {
                return Err(Error::Usage(format!(
                    "subtype {} counts {sum} symbols, subblock has {}",
                    k + 1,
                    geom.subblock_len(k + 1)
                )));
            }
        }
        Ok(Self { nx, ny, counts })
    }

    pub fn of_quadruple(
        geom: &DelayGeometry,
        nx: usize,
        ny: usize,
        rows: [&[u8]; 4],
    ) -> Result<Self> {
        if rows.iter().any(|r| r.len() != geom.window_len()) {
            return Err(Error::Dimension("window sequences of the wrong length".into()));
        }
        let mut counts = Vec::with_capacity(geom.subblocks());
        for k in 1..=geom.subblocks() {
            let mut c = vec![0u32; nx * nx * ny * ny];
            for t in geom.subblock_range(k) {
                let idx = ((rows[0][t] as usize * nx + rows[1][t] as usize) * ny + rows[2][t] as usize) * ny
                    + rows[3][t] as usize;
                c[idx] += 1;
            }
            counts.push(c);
        }
        Ok(Self { nx, ny, counts })
    }

    fn table(&self, k: usize) -> Option<JointTable> {
        let c = &self.counts[k - 1];
        let total: u32 = c.iter().sum();
        if total == 0 {
            return None;
        }
        let probs = c.iter().map(|&m| m as f64 / total as f64).collect();
        JointTable::new(vec![self.nx, self.nx, self.ny, self.ny], probs).ok()
    }
}

/// Outcome of one packing-inequality probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingCheck {
    /// Number of quadruples of the pattern with the given subtypes.
    pub lhs: u64,
    /// Base-2 log of the bound without its polynomial factor.
    pub log2_rhs: f64,
    /// `log2(lhs) - log2_rhs`; `-inf` when `lhs = 0`.
    pub log2_ratio: f64,
    /// Base-2 log of the reference polynomial `4 (n+1)^{2K(|X|+|Y|)}`.
    pub log2_reference_poly: f64,
    /// `log2_ratio ≤ log2_reference_poly`.
    pub within_reference: bool,
}

/// Message tuple pairs `(m, m̂)` differing exactly on `errs`, with `m` fixed
/// to 0 on `sync`.
fn tuple_pairs(blocks: usize, sync: usize, messages: usize, errs: &[usize]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = vec![(vec![0usize; blocks], vec![0usize; blocks])];
    for t in 1..=blocks {
        if t == sync {
            continue;
        }
        let wrong = errs.contains(&t);
        let mut next = Vec::new();
        for (m, mh) in &out {
            for a in 1..=messages {
                let hats: Vec<usize> = if wrong {
                    (1..=messages).filter(|&b| b != a).collect()
                } else {
                    vec![a]
                };
                for b in hats {
                    let (mut m2, mut mh2) = (m.clone(), mh.clone());
                    m2[t - 1] = a;
                    mh2[t - 1] = b;
                    next.push((m2, mh2));
                }
            }
        }
        out = next;
    }
    out
}

/// Exact left side of the packing inequality and the exponential part of
/// its right side, for a tiny code (`n ≤ 6`, `K = 2`, at most 4 messages).
pub fn check_packing_inequality(
    code: &AmacCode,
    delay: usize,
    pattern: &ErrorPattern,
    v: &SubtypeSequence,
) -> Result<PackingCheck> {
    let n = code.spec.n;
    if n > 6 || code.spec.blocks != 2 || code.messages1() > 4 || code.messages2() > 4 {
        return Err(Error::Refused(
            "packing check limited to n ≤ 6, K = 2 and at most 4 messages per sender".into(),
        ));
    }
    let geom = DelayGeometry::new(n, code.spec.blocks, delay)?;
    let (nx, ny) = (code.nx(), code.ny());
    if v.nx != nx || v.ny != ny || v.counts.len() != geom.subblocks() {
        return Err(Error::Dimension("subtype sequence does not match the code".into()));
    }
    let cls = classify_sets(pattern, &geom)?;

    let l1: Vec<usize> = pattern.l1.iter().copied().collect();
    let l2: Vec<usize> = pattern.l2.iter().copied().collect();
    let xs = tuple_pairs(geom.blocks, geom.l, code.messages1(), &l1);
    let ys = tuple_pairs(geom.blocks, geom.blocks, code.messages2(), &l2);
    let xw: Vec<(Vec<u8>, Vec<u8>)> = xs.iter().map(|(i, ih)| (x_window(code, i), x_window(code, ih))).collect();
    let yw: Vec<(Vec<u8>, Vec<u8>)> = ys
        .iter()
        .map(|(j, jh)| (y_window(code, &geom, j), y_window(code, &geom, jh)))
        .collect();
    let mut lhs = 0u64;
    for (x, xh) in &xw {
        for (y, yh) in &yw {
            if SubtypeSequence::of_quadruple(&geom, nx, ny, [x, xh, y, yh])? == *v {
                lhs += 1;
            }
        }
    }

    let (r1, r2) = code.realized_rates();
    let nf = n as f64;
    let mut log2_rhs = nf * (geom.blocks as f64 - 1.0) * (r1 + r2);
    for k in 1..=geom.subblocks() {
        let nk = geom.subblock_len(k) as f64;
        let Some(t) = v.table(k) else { continue };
        let term = if cls.s1.contains(&k) {
            multi_information(&t.marginal(&[0, 1, 2])?, &[&[0], &[1], &[2]])? - r1
        } else if cls.s2.contains(&k) {
            multi_information(&t.marginal(&[0, 2, 3])?, &[&[0], &[1], &[2]])? - r2
        } else if cls.s12.contains(&k) {
            multi_information(&t, &[&[0], &[1], &[2], &[3]])? - r1 - r2
        } else {
            multi_information(&t.marginal(&[0, 2])?, &[&[0], &[1]])?
        };
        log2_rhs -= nk * term;
    }
    let log2_ratio = if lhs == 0 { f64::NEG_INFINITY } else { (lhs as f64).log2() - log2_rhs };
    let log2_reference_poly = 2.0 + 2.0 * geom.blocks as f64 * (nx + ny) as f64 * (nf + 1.0).log2();
    Ok(PackingCheck {
        lhs,
        log2_rhs,
        log2_ratio,
        log2_reference_poly,
        within_reference: log2_ratio <= log2_reference_poly,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingProbe {
    pub delay: usize,
    pub pattern: ErrorPattern,
    pub check: PackingCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingSurvey {
    pub probes: Vec<PackingProbe>,
    /// Probes whose ratio exceeded the reference polynomial.
    pub violations: usize,
    pub violation_rate: f64,
    pub max_log2_ratio: f64,
}

/// Random probes: a delay, a random quadruple of message tuples, and the
/// subtype sequence of that quadruple (so every probe has `lhs ≥ 1`).
pub fn packing_survey(code: &AmacCode, probes: usize, seed: u64) -> Result<PackingSurvey> {
    let n = code.spec.n;
    let blocks = code.spec.blocks;
    let (m1, m2) = (code.messages1(), code.messages2());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(probes);
    for _ in 0..probes {
        let delay = rng.gen_range(0..n * blocks);
        let geom = DelayGeometry::new(n, blocks, delay)?;
        let mut draw = |sync: usize, m: usize| -> (Vec<usize>, Vec<usize>) {
            let mut a = vec![0usize; blocks];
            let mut b = vec![0usize; blocks];
            for t in 1..=blocks {
                if t == sync {
                    continue;
                }
                a[t - 1] = rng.gen_range(1..=m);
                b[t - 1] = if m > 1 && rng.gen_bool(0.5) {
                    let s = rng.gen_range(1..m);
                    if s >= a[t - 1] { s + 1 } else { s }
                } else {
                    a[t - 1]
                };
            }
            (a, b)
        };
        let (i, ih) = draw(geom.l, m1);
        let (j, jh) = draw(blocks, m2);
        let rows = [
            x_window(code, &i),
            x_window(code, &ih),
            y_window(code, &geom, &j),
            y_window(code, &geom, &jh),
        ];
        let v = SubtypeSequence::of_quadruple(&geom, code.nx(), code.ny(), [&rows[0], &rows[1], &rows[2], &rows[3]])?;
        let pattern = ErrorPattern::between(
            &crate::sim::MessageTuples { i, j },
            &crate::sim::MessageTuples { i: ih, j: jh },
        )?;
        let check = check_packing_inequality(code, delay, &pattern, &v)?;
        out.push(PackingProbe { delay, pattern, check });
    }
    let violations = out.iter().filter(|p| !p.check.within_reference).count();
    let max_log2_ratio = out.iter().map(|p| p.check.log2_ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(PackingSurvey {
        violation_rate: if probes == 0 { 0.0 } else { violations as f64 / probes as f64 },
        probes: out,
        violations,
        max_log2_ratio,
    })
}

/// Outcome of a batch of exact checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub checks: u64,
    pub failures: u64,
    /// First failure, or a one-line summary when all checks passed.
    pub detail: String,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// `|T^n_P(δ_n)| ≥ |T^n_P| / 2` for every binary type with `2 ≤ n ≤ n_max`.
pub fn expurgation_suite(n_max: usize) -> Result<SuiteReport> {
    let counts = verify_expurgation(n_max)?;
    let bad = counts.iter().find(|c| !c.at_least_half());
    let min = counts
        .iter()
        .min_by(|a, b| a.ratio().total_cmp(&b.ratio()))
        .ok_or_else(|| Error::Usage("n_max must be at least 2".into()))?;
    Ok(SuiteReport {
        name: "balanced-half".into(),
        checks: counts.len() as u64,
        failures: counts.iter().filter(|c| !c.at_least_half()).count() as u64,
        detail: match bad {
            Some(c) => format!("n={} counts={:?}: {} of {} balanced", c.n, c.counts, c.balanced, c.total),
            None => format!(
                "smallest balanced fraction {:.6} at n={} counts={:?}",
                min.ratio(),
                min.n,
                min.counts
            ),
        },
    })
}

/// Entropy and divergence forms of the split gap agree, and are
/// nonnegative, on random splits of random sequences.
pub fn split_identity_suite(instances: usize, seed: u64, tol: f64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0u64;
    let mut first = None;
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let alphabet = rng.gen_range(2..=4usize);
        let n = rng.gen_range(2..=40usize);
        let seq: Vec<u8> = (0..n).map(|_| rng.gen_range(0..alphabet) as u8).collect();
        let d = rng.gen_range(1..n);
        let mut v1 = vec![0u64; alphabet];
        let mut v2 = vec![0u64; alphabet];
        seq[..d].iter().for_each(|&s| v1[s as usize] += 1);
        seq[d..].iter().for_each(|&s| v2[s as usize] += 1);
        let p: Vec<u64> = v1.iter().zip(&v2).map(|(a, b)| a + b).collect();
        let s = jensen_shannon_split(&p, &v1, &v2)?;
        let gap = (s.entropy_form - s.divergence_form).abs();
        worst = worst.max(gap);
        if gap > tol || s.entropy_form < -tol {
            failures += 1;
            first.get_or_insert_with(|| format!("p={p:?} v1={v1:?} v2={v2:?}: {s:?}"));
        }
    }
    Ok(SuiteReport {
        name: "split-identity".into(),
        checks: instances as u64,
        failures,
        detail: first.unwrap_or_else(|| format!("largest form difference {worst:e}")),
    })
}

/// For random `x` with `n ≤ n_max`, every joint type `V` of `(x, y)` has at
/// most `2^{n H_V(Y|X)}` sequences `y`, counted by enumerating `Y^n`.
pub fn conditional_bound_suite(n_max: usize, instances: usize, seed: u64) -> Result<SuiteReport> {
    if n_max > 10 {
        return Err(Error::Refused(format!("enumeration limited to n ≤ 10, got {n_max}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = 0u64;
    let mut failures = 0u64;
    let mut first = None;
    for _ in 0..instances {
        let nx = rng.gen_range(2..=3usize);
        let ny = rng.gen_range(2..=3usize);
        let n = rng.gen_range(1..=n_max);
        let x: Vec<u8> = (0..n).map(|_| rng.gen_range(0..nx) as u8).collect();
        let mut by_type: std::collections::BTreeMap<Vec<u64>, u64> = Default::default();
        for code in 0..ny.pow(n as u32) {
            let mut cells = vec![0u64; nx * ny];
            let mut rest = code;
            for &a in &x {
                cells[a as usize * ny + rest % ny] += 1;
                rest /= ny;
            }
            *by_type.entry(cells).or_insert(0) += 1;
        }
        for (joint, count) in by_type {
            checks += 1;
            let bound = conditional_count_bound(&joint, nx, ny);
            if count as f64 > bound * (1.0 + 1e-12) {
                failures += 1;
                first.get_or_insert_with(|| format!("x={x:?} joint={joint:?}: {count} > {bound}"));
            }
        }
    }
    Ok(SuiteReport {
        name: "conditional-bound".into(),
        checks,
        failures,
        detail: first.unwrap_or_else(|| "all joint types within the bound".into()),
    })
}
