//! Error patterns of decoded message tuples and their irreducible parts.
//!
//! Subblock `k` is an error index of sender 1 when `t1(k) ∈ L1` and of
//! sender 2 when `t2(k) ∈ L2`. Within every maximal run of consecutive error
//! indices, the indices that are not shared by both senders come in pairs,
//! and each consecutive pair bounds one irreducible component whose interior
//! is shared.

use std::collections::BTreeSet;

use serde::Serialize;

use super::decode::MessageTuples;
use super::geometry::DelayGeometry;
use crate::error::{Error, Result};
use crate::patterns::{irreducible_pattern_at, IrreduciblePattern};

/// Block indices (1-based) at which each sender's message was decoded wrongly.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ErrorPattern {
    #[serde(rename = "L1")]
    pub l1: BTreeSet<usize>,
    #[serde(rename = "L2")]
    pub l2: BTreeSet<usize>,
}

impl ErrorPattern {
    pub fn new(l1: impl IntoIterator<Item = usize>, l2: impl IntoIterator<Item = usize>) -> Self {
        Self {
            l1: l1.into_iter().collect(),
            l2: l2.into_iter().collect(),
        }
    }

    /// Pattern of the decoded tuples `hat` relative to the sent `sent`.
    pub fn between(sent: &MessageTuples, hat: &MessageTuples) -> Result<Self> {
        if sent.i.len() != hat.i.len() || sent.j.len() != hat.j.len() {
            return Err(Error::Usage("message tuples of different lengths".into()));
        }
        let diff = |a: &[usize], b: &[usize]| -> BTreeSet<usize> {
            a.iter()
                .zip(b)
                .enumerate()
                .filter(|(_, (u, v))| u != v)
                .map(|(t, _)| t + 1)
                .collect()
        };
        Ok(Self {
            l1: diff(&sent.i, &hat.i),
            l2: diff(&sent.j, &hat.j),
        })
    }

    pub fn is_improper(&self) -> bool {
        self.l1.is_empty() && self.l2.is_empty()
    }

    /// `|L1| + |L2|`.
    pub fn len(&self) -> usize {
        self.l1.len() + self.l2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.is_improper()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IrreducibleComponent {
    /// First subblock of the support.
    pub start: usize,
    /// The support is `start..=start + pattern.len`.
    pub pattern: IrreduciblePattern,
}

impl IrreducibleComponent {
    pub fn support(&self) -> BTreeSet<usize> {
        (self.start..=self.start + self.pattern.len).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub pattern: ErrorPattern,
    pub s1: BTreeSet<usize>,
    pub s2: BTreeSet<usize>,
    pub s12: BTreeSet<usize>,
    pub components: Vec<IrreducibleComponent>,
}

impl Classification {
    /// `S1 ∪ S2 ∪ S12`.
    pub fn support(&self) -> BTreeSet<usize> {
        self.s1.iter().chain(&self.s2).chain(&self.s12).copied().collect()
    }

    pub fn is_irreducible(&self) -> bool {
        self.components.len() == 1
    }
}

/// Subblock sets and irreducible decomposition of an error pattern.
pub fn classify_sets(pattern: &ErrorPattern, geom: &DelayGeometry) -> Result<Classification> {
    let k_max = geom.blocks;
    if pattern.l1.contains(&geom.l) {
        return Err(Error::Usage(format!("sync slot {} cannot be in error for sender 1", geom.l)));
    }
    if pattern.l2.contains(&k_max) {
        return Err(Error::Usage(format!("sync slot {k_max} cannot be in error for sender 2")));
    }
    if let Some(&t) = pattern.l1.iter().chain(&pattern.l2).find(|&&t| t == 0 || t > k_max) {
        return Err(Error::Usage(format!("block index {t} outside [1, {k_max}]")));
    }
    let (mut s1, mut s2, mut s12) = (BTreeSet::new(), BTreeSet::new(), BTreeSet::new());
    for k in 1..=geom.subblocks() {
        let e1 = pattern.l1.contains(&geom.t1(k));
        let e2 = pattern.l2.contains(&geom.t2(k));
        match (e1, e2) {
            (true, false) => s1.insert(k),
            (false, true) => s2.insert(k),
            (true, true) => s12.insert(k),
            (false, false) => false,
        };
    }
    let mut components = Vec::new();
    let mut run_ends: Vec<usize> = Vec::new();
    let flush = |ends: &mut Vec<usize>, out: &mut Vec<IrreducibleComponent>| -> Result<()> {
        if ends.len() % 2 == 1 {
            return Err(Error::Domain(format!(
                "run with unpaired boundary subblocks {ends:?}"
            )));
        }
        for pair in ends.chunks(2) {
            out.push(IrreducibleComponent {
                start: pair[0],
                pattern: irreducible_pattern_at(pair[0], pair[1] - pair[0])?,
            });
        }
        ends.clear();
        Ok(())
    };
    for k in 1..=geom.subblocks() + 1 {
        let shared = s12.contains(&k);
        let single = s1.contains(&k) || s2.contains(&k);
        if single {
            run_ends.push(k);
        } else if !shared {
            flush(&mut run_ends, &mut components)?;
        }
    }
    Ok(Classification {
        pattern: pattern.clone(),
        s1,
        s2,
        s12,
        components,
    })
}

/// Classifies the outcome of one decoding.
pub fn classify_pattern(sent: &MessageTuples, hat: &MessageTuples, geom: &DelayGeometry) -> Result<Classification> {
    for (m, which) in [(sent, "sent"), (hat, "decoded")] {
        if m.i.len() != geom.blocks || m.j.len() != geom.blocks {
            return Err(Error::Usage(format!("{which} tuples must have length {}", geom.blocks)));
        }
        if m.i[geom.l - 1] != 0 || m.j[geom.blocks - 1] != 0 {
            return Err(Error::Usage(format!("{which} tuples must carry 0 in the sync slots")));
        }
    }
    classify_sets(&ErrorPattern::between(sent, hat)?, geom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn figure_example() {
        // K = 5 with sender 1's sync in slot 1
        let g = DelayGeometry::new(4, 5, 2).unwrap();
        let c = classify_sets(&ErrorPattern::new([2, 4], [2, 3, 4]), &g).unwrap();
        assert_eq!(c.s1, set(&[3]));
        assert_eq!(c.s2, set(&[5, 6, 9]));
        assert_eq!(c.s12, set(&[4, 7, 8]));
        assert_eq!(c.support(), (3..=9).collect());
        assert_eq!(c.components.len(), 2);
        assert_eq!(c.components[0].support(), set(&[3, 4, 5]));
        assert_eq!(c.components[0].pattern.len, 2);
        assert_eq!(c.components[1].support(), set(&[6, 7, 8, 9]));
        assert_eq!(c.components[1].pattern.len, 3);
        let total: usize = c.components.iter().map(|x| x.pattern.len).sum();
        assert_eq!(total, c.pattern.len());
    }

    #[test]
    fn no_error_is_improper() {
        let g = DelayGeometry::new(4, 3, 5).unwrap();
        let m = MessageTuples {
            i: vec![1, 0, 2],
            j: vec![1, 1, 0],
        };
        let c = classify_pattern(&m, &m, &g).unwrap();
        assert!(c.pattern.is_improper());
        assert!(c.support().is_empty());
        assert!(c.components.is_empty());
    }

    #[test]
    fn synchronous_single_error() {
        let g = DelayGeometry::new(4, 3, 0).unwrap();
        let c = classify_sets(&ErrorPattern::new([2], []), &g).unwrap();
        assert_eq!(c.s1, set(&[3, 4]));
        assert_eq!(c.components.len(), 1);
        assert_eq!(c.components[0].pattern.len, 1);
    }

    #[test]
    fn sync_slots_rejected() {
        let g = DelayGeometry::new(4, 3, 5).unwrap();
        assert!(classify_sets(&ErrorPattern::new([2], []), &g).is_err());
        assert!(classify_sets(&ErrorPattern::new([], [3]), &g).is_err());
    }

    #[test]
    fn all_patterns_decompose() {
        for k_blocks in 2..=5usize {
            for l in 1..=k_blocks {
                let g = DelayGeometry::new(3, k_blocks, (l - 1) * 3 + 1).unwrap();
                let free1: Vec<usize> = (1..=k_blocks).filter(|&t| t != l).collect();
                let free2: Vec<usize> = (1..k_blocks).collect();
                for m1 in 0u32..(1 << free1.len()) {
                    for m2 in 0u32..(1 << free2.len()) {
                        let l1 = free1.iter().enumerate().filter(|(b, _)| m1 >> b & 1 == 1).map(|(_, &t)| t);
                        let l2 = free2.iter().enumerate().filter(|(b, _)| m2 >> b & 1 == 1).map(|(_, &t)| t);
                        let c = classify_sets(&ErrorPattern::new(l1, l2), &g).unwrap();
                        let total: usize = c.components.iter().map(|x| x.pattern.len).sum();
                        assert_eq!(total, c.pattern.len());
                        for comp in &c.components {
                            assert!(comp.pattern.len <= g.max_irreducible_len());
                        }
                    }
                }
            }
        }
    }
}
