//! Constant-composition codebooks with sync words.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::subtypes::{type_class_sequences, type_class_size, TypeClassQuery};

/// Type classes up to this size are listed and sampled by index; larger ones
/// by rejection of repeated shuffles.
const ENUMERATION_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodeSpec {
    pub n: usize,
    pub blocks: usize,
    pub r1: f64,
    pub r2: f64,
    /// Symbol counts of the sender 1 type, summing to `n`.
    pub px_type: Vec<u64>,
    pub py_type: Vec<u64>,
}

/// Codebooks of both senders. Word 0 of each side is the sync word, words
/// `1..=M` carry messages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmacCode {
    pub spec: CodeSpec,
    pub x_words: Vec<Vec<u8>>,
    pub y_words: Vec<Vec<u8>>,
}

/// `⌊2^{nR}⌋`, robust to rates given as `log2(M)/n` in floating point.
pub fn message_count(n: usize, rate: f64) -> Result<usize> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::Domain(format!("rate {rate} must be finite and nonnegative")));
    }
    let m = (n as f64 * rate).exp2();
    if m > (1u64 << 40) as f64 {
        return Err(Error::Refused(format!("2^(nR) = {m:e} messages is beyond simulation scale")));
    }
    Ok((m + 1e-9).floor() as usize)
}

impl AmacCode {
    pub fn messages1(&self) -> usize {
        self.x_words.len() - 1
    }

    pub fn messages2(&self) -> usize {
        self.y_words.len() - 1
    }

    pub fn nx(&self) -> usize {
        self.spec.px_type.len()
    }

    pub fn ny(&self) -> usize {
        self.spec.py_type.len()
    }

    /// `log2(M1)/n` and `log2(M2)/n`, the rates actually realized.
    pub fn realized_rates(&self) -> (f64, f64) {
        let n = self.spec.n as f64;
        (
            (self.messages1() as f64).log2() / n,
            (self.messages2() as f64).log2() / n,
        )
    }

    /// Builds a code whose words are drawn uniformly without replacement
    /// from the type classes. Deterministic in `seed`.
    pub fn build(spec: CodeSpec, seed: u64) -> Result<Self> {
        if spec.blocks < 2 {
            return Err(Error::Usage(format!("need at least 2 blocks, got {}", spec.blocks)));
        }
        let m1 = message_count(spec.n, spec.r1)?;
        let m2 = message_count(spec.n, spec.r2)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x_words = draw_words(spec.n, &spec.px_type, m1 + 1, &mut rng)?;
        let y_words = draw_words(spec.n, &spec.py_type, m2 + 1, &mut rng)?;
        Ok(Self { spec, x_words, y_words })
    }

    /// Builds a code from explicit words, sync words first.
    pub fn from_words(spec: CodeSpec, x_words: Vec<Vec<u8>>, y_words: Vec<Vec<u8>>) -> Result<Self> {
        for (words, counts) in [(&x_words, &spec.px_type), (&y_words, &spec.py_type)] {
            if words.len() < 2 {
                return Err(Error::Usage("each side needs a sync word and at least one codeword".into()));
            }
            for (a, w) in words.iter().enumerate() {
                if w.len() != spec.n || type_counts(w, counts.len())? != *counts {
                    return Err(Error::Usage(format!("word {a} is not of the prescribed type")));
                }
                if words[..a].contains(w) {
                    return Err(Error::Usage(format!("word {a} repeats an earlier word")));
                }
            }
        }
        Ok(Self { spec, x_words, y_words })
    }
}

pub(crate) fn type_counts(word: &[u8], alphabet: usize) -> Result<Vec<u64>> {
    let mut c = vec![0u64; alphabet];
    for &s in word {
        let s = s as usize;
        if s >= alphabet {
            return Err(Error::Usage(format!("symbol {s} outside alphabet of size {alphabet}")));
        }
        c[s] += 1;
    }
    Ok(c)
}

fn draw_words(n: usize, counts: &[u64], how_many: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<u8>>> {
    let query = TypeClassQuery::new(n, counts.to_vec())?;
    let size = type_class_size(&query)?;
    let size_f = size.to_f64().unwrap_or(f64::INFINITY);
    if (how_many as f64) > size_f {
        return Err(Error::Infeasible(format!(
            "{how_many} distinct words requested from a type class of size {size}"
        )));
    }
    match size.to_usize().filter(|&s| s <= ENUMERATION_LIMIT) {
        Some(s) => {
            let all = type_class_sequences(&query)?;
            Ok(sample(rng, s, how_many).into_iter().map(|i| all[i].clone()).collect())
        }
        None => {
            let mut base: Vec<u8> = Vec::with_capacity(n);
            for (a, &c) in counts.iter().enumerate() {
                base.extend(std::iter::repeat_n(a as u8, c as usize));
            }
            let mut words: Vec<Vec<u8>> = Vec::with_capacity(how_many);
            while words.len() < how_many {
                let mut w = base.clone();
                w.shuffle(rng);
                if !words.contains(&w) {
                    words.push(w);
                }
            }
            Ok(words)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, r: f64, t: Vec<u64>) -> CodeSpec {
        CodeSpec {
            n,
            blocks: 3,
            r1: r,
            r2: r,
            px_type: t.clone(),
            py_type: t,
        }
    }

    #[test]
    fn message_counts() {
        assert_eq!(message_count(8, 0.0).unwrap(), 1);
        assert_eq!(message_count(8, 0.25).unwrap(), 4);
        assert_eq!(message_count(6, 1.0 / 6.0).unwrap(), 2);
        assert_eq!(message_count(12, 1.0 / 6.0).unwrap(), 4);
        assert_eq!(message_count(3, (5f64).log2() / 3.0).unwrap(), 5);
    }

    #[test]
    fn zero_rate_gives_one_codeword_and_sync() {
        let c = AmacCode::build(spec(8, 0.0, vec![4, 4]), 1).unwrap();
        assert_eq!((c.x_words.len(), c.y_words.len()), (2, 2));
    }

    #[test]
    fn words_are_distinct_and_typed() {
        let c = AmacCode::build(spec(8, 0.25, vec![4, 4]), 7).unwrap();
        assert_eq!(c.x_words.len(), 5);
        for words in [&c.x_words, &c.y_words] {
            for (a, w) in words.iter().enumerate() {
                assert_eq!(type_counts(w, 2).unwrap(), vec![4, 4]);
                assert!(!words[..a].contains(w));
            }
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let a = AmacCode::build(spec(8, 0.25, vec![4, 4]), 11).unwrap();
        let b = AmacCode::build(spec(8, 0.25, vec![4, 4]), 11).unwrap();
        let c = AmacCode::build(spec(8, 0.25, vec![4, 4]), 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn infeasible_rate() {
        // 2^3 + 1 words from a class of size 4
        let err = AmacCode::build(spec(4, 0.75, vec![3, 1]), 0).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn large_classes_use_shuffles() {
        let c = AmacCode::build(spec(24, 0.25, vec![12, 12]), 3).unwrap();
        assert_eq!(c.messages1(), 64);
        for (a, w) in c.x_words.iter().enumerate() {
            assert_eq!(type_counts(w, 2).unwrap(), vec![12, 12]);
            assert!(!c.x_words[..a].contains(w));
        }
    }
}
