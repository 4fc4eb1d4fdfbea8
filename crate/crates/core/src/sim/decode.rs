//! Window assembly and the maximal multi-information decoder.
//!
//! The decoder scores a candidate `(i, j)` by `Σ_k n_k Î(x_k ∧ y_k ∧ z_k)`,
//! the subblock-weighted empirical multi-information, and searches all
//! candidates exhaustively. Subblock `k` only involves sender 1's block
//! `t1(k)` and sender 2's block `t2(k)`, so each term comes from a small
//! per-subblock table indexed by the two words in play.

use serde::Serialize;

use super::code::AmacCode;
use super::geometry::DelayGeometry;
use crate::error::{Error, Result};

/// Default cap on the number of candidate message tuples.
pub const DEFAULT_DECODE_CAP: u64 = 1 << 20;

/// Scores closer than this count as ties; the earlier candidate is kept.
pub const TIE_TOL: f64 = 1e-9;

/// Message tuples with the sync slots set to 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MessageTuples {
    /// `i_1..i_K`, with `i_l = 0`.
    pub i: Vec<usize>,
    /// `j_1..j_K`, with `j_K = 0`.
    pub j: Vec<usize>,
}

impl MessageTuples {
    pub fn check(&self, code: &AmacCode, geom: &DelayGeometry) -> Result<()> {
        let k = geom.blocks;
        if self.i.len() != k || self.j.len() != k {
            return Err(Error::Usage(format!("message tuples must have length {k}")));
        }
        for (t, &a) in self.i.iter().enumerate() {
            let sync = t + 1 == geom.l;
            if sync != (a == 0) || a > code.messages1() {
                return Err(Error::Usage(format!(
                    "i_{} = {a} invalid (sync slot {}, {} messages)",
                    t + 1,
                    geom.l,
                    code.messages1()
                )));
            }
        }
        for (t, &b) in self.j.iter().enumerate() {
            let sync = t + 1 == k;
            if sync != (b == 0) || b > code.messages2() {
                return Err(Error::Usage(format!(
                    "j_{} = {b} invalid ({} messages)",
                    t + 1,
                    code.messages2()
                )));
            }
        }
        Ok(())
    }
}

/// Sender 1's input over the window: `x(i_1) ... x(i_K)`.
pub fn x_window(code: &AmacCode, i: &[usize]) -> Vec<u8> {
    i.iter().flat_map(|&a| code.x_words[a].iter().copied()).collect()
}

/// Sender 2's input over the window: the last `n - d` symbols of `y(0)`,
/// then `y(j_1) ... y(j_{K-1})`, then the first `d` symbols of `y(0)`.
pub fn y_window(code: &AmacCode, geom: &DelayGeometry, j: &[usize]) -> Vec<u8> {
    let sync = &code.y_words[0];
    let mut out = Vec::with_capacity(geom.window_len());
    out.extend_from_slice(&sync[geom.d..]);
    for &b in &j[..geom.blocks - 1] {
        out.extend_from_slice(&code.y_words[b]);
    }
    out.extend_from_slice(&sync[..geom.d]);
    out
}

/// Portion of a sender 1 word falling in subblock `k`.
fn x_part<'a>(word: &'a [u8], geom: &DelayGeometry, k: usize) -> &'a [u8] {
    let cut = geom.n - geom.d;
    if k % 2 == 1 {
        &word[..cut]
    } else {
        &word[cut..]
    }
}

/// Portion of a sender 2 word falling in subblock `k`.
fn y_part<'a>(word: &'a [u8], geom: &DelayGeometry, k: usize) -> &'a [u8] {
    if k % 2 == 1 {
        &word[geom.d..]
    } else {
        &word[..geom.d]
    }
}

/// `m log2 m` for `m = 0..=n`.
struct CountLogs(Vec<f64>);

impl CountLogs {
    fn new(n: usize) -> Self {
        Self((0..=n).map(|m| if m == 0 { 0.0 } else { m as f64 * (m as f64).log2() }).collect())
    }

    fn sum(&self, counts: &[u32]) -> f64 {
        counts.iter().map(|&c| self.0[c as usize]).sum()
    }
}

struct Scratch {
    xyz: Vec<u32>,
    x: Vec<u32>,
    y: Vec<u32>,
    z: Vec<u32>,
}

impl Scratch {
    fn new(nx: usize, ny: usize, nz: usize) -> Self {
        Self {
            xyz: vec![0; nx * ny * nz],
            x: vec![0; nx],
            y: vec![0; ny],
            z: vec![0; nz],
        }
    }

    fn fill(&mut self, x: &[u8], y: &[u8], z: &[u8], ny: usize, nz: usize) {
        for v in [&mut self.xyz, &mut self.x, &mut self.y, &mut self.z] {
            v.iter_mut().for_each(|c| *c = 0);
        }
        for ((&a, &b), &c) in x.iter().zip(y).zip(z) {
            let (a, b, c) = (a as usize, b as usize, c as usize);
            self.xyz[(a * ny + b) * nz + c] += 1;
            self.x[a] += 1;
            self.y[b] += 1;
            self.z[c] += 1;
        }
    }
}

/// Exhaustive MMI decoder for one delay.
#[derive(Debug, Clone, Copy)]
pub struct MmiDecoder {
    pub geom: DelayGeometry,
    pub nz: usize,
    pub cap: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decoded {
    pub messages: MessageTuples,
    /// `Σ_k n_k Î` of the chosen candidate, in bits.
    pub score: f64,
    pub candidates: u64,
}

impl MmiDecoder {
    pub fn new(geom: DelayGeometry, nz: usize) -> Self {
        Self {
            geom,
            nz,
            cap: DEFAULT_DECODE_CAP,
        }
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    /// Number of candidate `(i, j)` pairs, `(M1 M2)^{K-1}`.
    pub fn candidate_count(&self, code: &AmacCode) -> Option<u64> {
        let per_block = (code.messages1() as u64).checked_mul(code.messages2() as u64)?;
        per_block.checked_pow(self.geom.blocks as u32 - 1)
    }

    pub fn check_cap(&self, code: &AmacCode) -> Result<u64> {
        match self.candidate_count(code) {
            Some(c) if c <= self.cap => Ok(c),
            other => Err(Error::Refused(format!(
                "{} candidate message tuples exceed the decoding cap {}",
                other.map_or("more than 2^64".to_string(), |c| c.to_string()),
                self.cap
            ))),
        }
    }

    /// Words that may occupy sender 1's block `t`.
    fn x_choices(&self, code: &AmacCode, t: usize) -> Vec<usize> {
        if t == self.geom.l {
            vec![0]
        } else {
            (1..=code.messages1()).collect()
        }
    }

    fn y_choices(&self, code: &AmacCode, t: usize) -> Vec<usize> {
        if t == self.geom.blocks {
            vec![0]
        } else {
            (1..=code.messages2()).collect()
        }
    }

    /// `n_k Î(x_k ∧ y_k ∧ z_k)` for every word pair meeting in subblock `k`,
    /// row-major over (sender 1 word, sender 2 word), both in increasing order.
    fn subblock_table(&self, code: &AmacCode, z: &[u8], k: usize, logs: &CountLogs, s: &mut Scratch) -> Vec<f64> {
        let g = &self.geom;
        let nk = g.subblock_len(k);
        let xs = self.x_choices(code, g.t1(k));
        let ys = self.y_choices(code, g.t2(k));
        if nk == 0 {
            return vec![0.0; xs.len() * ys.len()];
        }
        let zk = &z[g.subblock_range(k)];
        let base = 2.0 * logs.0[nk];
        let z_term = {
            let mut zc = vec![0u32; self.nz];
            zk.iter().for_each(|&c| zc[c as usize] += 1);
            logs.sum(&zc)
        };
        let (ny, nz) = (code.ny(), self.nz);
        let mut table = Vec::with_capacity(xs.len() * ys.len());
        for &a in &xs {
            let xk = x_part(&code.x_words[a], g, k);
            for &b in &ys {
                let yk = y_part(&code.y_words[b], g, k);
                s.fill(xk, yk, zk, ny, nz);
                let v = logs.sum(&s.xyz) - logs.sum(&s.x) - logs.sum(&s.y) - z_term + base;
                table.push(v);
            }
        }
        table
    }

    /// Decodes `z`, returning the first candidate in lexicographic order of
    /// `(i, j)` whose score is maximal up to [`TIE_TOL`].
    pub fn decode(&self, code: &AmacCode, z: &[u8]) -> Result<Decoded> {
        let g = self.geom;
        if z.len() != g.window_len() {
            return Err(Error::Dimension(format!(
                "output has length {}, window is {}",
                z.len(),
                g.window_len()
            )));
        }
        if let Some(&bad) = z.iter().find(|&&c| c as usize >= self.nz) {
            return Err(Error::Usage(format!("output symbol {bad} outside alphabet of size {}", self.nz)));
        }
        let candidates = self.check_cap(code)?;
        let logs = CountLogs::new(g.n);
        let mut scratch = Scratch::new(code.nx(), code.ny(), self.nz);
        let kk = g.subblocks();
        let tables: Vec<Vec<f64>> = (1..=kk)
            .map(|k| self.subblock_table(code, z, k, &logs, &mut scratch))
            .collect();
        let widths: Vec<usize> = (1..=kk).map(|k| self.y_choices(code, g.t2(k)).len()).collect();

        // free slots in lexicographic significance: i_1..i_K then j_1..j_{K-1}
        let m1 = code.messages1();
        let m2 = code.messages2();
        let mut slots: Vec<(bool, usize)> = (1..=g.blocks)
            .filter(|&t| t != g.l)
            .map(|t| (true, t))
            .collect();
        slots.extend((1..g.blocks).map(|t| (false, t)));
        let radix: Vec<usize> = slots.iter().map(|&(x, _)| if x { m1 } else { m2 }).collect();
        let mut digits = vec![0usize; slots.len()];
        let mut i = vec![0usize; g.blocks];
        let mut j = vec![0usize; g.blocks];
        let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None;
        loop {
            for (&(x, t), &dg) in slots.iter().zip(&digits) {
                if x {
                    i[t - 1] = dg + 1;
                } else {
                    j[t - 1] = dg + 1;
                }
            }
            let mut score = 0.0;
            for k in 1..=kk {
                let a = if g.t1(k) == g.l { 0 } else { i[g.t1(k) - 1] - 1 };
                let b = if g.t2(k) == g.blocks { 0 } else { j[g.t2(k) - 1] - 1 };
                score += tables[k - 1][a * widths[k - 1] + b];
            }
            if best.as_ref().is_none_or(|(s, _, _)| score > s + TIE_TOL) {
                best = Some((score, i.clone(), j.clone()));
            }
            // odometer, last slot fastest
            let mut p = digits.len();
            loop {
                if p == 0 {
                    let (score, i, j) = best.expect("at least one candidate");
                    return Ok(Decoded {
                        messages: MessageTuples { i, j },
                        score,
                        candidates,
                    });
                }
                p -= 1;
                digits[p] += 1;
                if digits[p] < radix[p] {
                    break;
                }
                digits[p] = 0;
            }
        }
    }

    /// Score of a specific candidate, computed directly from the windows.
    pub fn score(&self, code: &AmacCode, msgs: &MessageTuples, z: &[u8]) -> Result<f64> {
        msgs.check(code, &self.geom)?;
        let g = &self.geom;
        let x = x_window(code, &msgs.i);
        let y = y_window(code, g, &msgs.j);
        let logs = CountLogs::new(g.n);
        let mut s = Scratch::new(code.nx(), code.ny(), self.nz);
        let mut total = 0.0;
        for k in 1..=g.subblocks() {
            let r = g.subblock_range(k);
            let nk = r.len();
            if nk == 0 {
                continue;
            }
            s.fill(&x[r.clone()], &y[r.clone()], &z[r], code.ny(), self.nz);
            total += logs.sum(&s.xyz) - logs.sum(&s.x) - logs.sum(&s.y) - logs.sum(&s.z) + 2.0 * logs.0[nk];
        }
        Ok(total)
    }
}

/// Synchronous (`d = 0`) decoder choosing, block by block, the word pair
/// of least empirical conditional entropy `Ĥ(x, y | z)`.
pub fn min_conditional_entropy_decode(code: &AmacCode, geom: &DelayGeometry, nz: usize, z: &[u8]) -> Result<MessageTuples> {
    if geom.d != 0 {
        return Err(Error::Usage("blockwise decoding needs a delay that is a multiple of n".into()));
    }
    if z.len() != geom.window_len() {
        return Err(Error::Dimension("output length does not match the window".into()));
    }
    let dec = MmiDecoder::new(*geom, nz);
    let logs = CountLogs::new(geom.n);
    let mut s = Scratch::new(code.nx(), code.ny(), nz);
    let mut i = vec![0usize; geom.blocks];
    let mut j = vec![0usize; geom.blocks];
    for t in 1..=geom.blocks {
        // subblock 2t-1 holds sender 1's block t and sender 2's block t-1
        let k = 2 * t - 1;
        let zk = &z[geom.subblock_range(k)];
        let mut best: Option<(f64, usize, usize)> = None;
        for a in dec.x_choices(code, t) {
            for b in dec.y_choices(code, geom.t2(k)) {
                s.fill(&code.x_words[a], y_part(&code.y_words[b], geom, k), zk, code.ny(), nz);
                // n Ĥ(xy|z) = Σ_z c log c - Σ_xyz c log c
                let h = logs.sum(&s.z) - logs.sum(&s.xyz);
                if best.is_none_or(|(hb, _, _)| h < hb - TIE_TOL) {
                    best = Some((h, a, b));
                }
            }
        }
        let (_, a, b) = best.expect("nonempty choice sets");
        i[t - 1] = a;
        if geom.t2(k) != geom.blocks {
            j[geom.t2(k) - 1] = b;
        }
    }
    Ok(MessageTuples { i, j })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::code::CodeSpec;

    fn small_code() -> AmacCode {
        let spec = CodeSpec {
            n: 4,
            blocks: 3,
            r1: 0.25,
            r2: 0.25,
            px_type: vec![2, 2],
            py_type: vec![2, 2],
        };
        AmacCode::build(spec, 5).unwrap()
    }

    #[test]
    fn y_window_wraps_the_sync_word() {
        let code = small_code();
        let g = DelayGeometry::new(4, 3, 5).unwrap();
        let y = y_window(&code, &g, &[1, 2, 0]);
        let s = &code.y_words[0];
        assert_eq!(&y[..3], &s[1..]);
        assert_eq!(&y[3..7], &code.y_words[1][..]);
        assert_eq!(&y[7..11], &code.y_words[2][..]);
        assert_eq!(&y[11..], &s[..1]);
    }

    #[test]
    fn table_scores_match_direct_scores() {
        let code = small_code();
        let g = DelayGeometry::new(4, 3, 6).unwrap();
        let dec = MmiDecoder::new(g, 2);
        let z: Vec<u8> = (0..12).map(|t| ((t * 7 + 3) % 5 % 2) as u8).collect();
        let out = dec.decode(&code, &z).unwrap();
        let direct = dec.score(&code, &out.messages, &z).unwrap();
        assert!((out.score - direct).abs() < 1e-9);
        // no candidate beats the decoder's choice
        for i1 in 1..=2 {
            for i3 in 1..=2 {
                for j1 in 1..=2 {
                    for j2 in 1..=2 {
                        let m = MessageTuples {
                            i: vec![i1, 0, i3],
                            j: vec![j1, j2, 0],
                        };
                        assert!(dec.score(&code, &m, &z).unwrap() <= out.score + TIE_TOL);
                    }
                }
            }
        }
    }

    #[test]
    fn refuses_beyond_cap() {
        let code = small_code();
        let g = DelayGeometry::new(4, 3, 6).unwrap();
        let dec = MmiDecoder::new(g, 2).with_cap(8);
        assert!(matches!(dec.decode(&code, &[0; 12]), Err(Error::Refused(_))));
    }
}
