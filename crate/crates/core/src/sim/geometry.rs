//! Subblock layout of the decoding window for a given delay.
//!
//! The window holds `K` blocks of length `n` for each sender. Sender 1's
//! blocks are aligned with the window; sender 2's are shifted so that the
//! window opens with the last `n - d` symbols of its sync word and closes with
//! the first `d`. Block boundaries of both senders cut the window into `2K`
//! subblocks: odd ones of length `n - d`, even ones of length `d`.

use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DelayGeometry {
    pub n: usize,
    pub blocks: usize,
    pub delay: usize,
    /// `D mod n`.
    pub d: usize,
    /// Slot of sender 1's sync word, `1 ≤ l ≤ K`.
    pub l: usize,
}

impl DelayGeometry {
    pub fn new(n: usize, blocks: usize, delay: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Usage("blocklength must be positive".into()));
        }
        if blocks < 2 {
            return Err(Error::Usage(format!("need at least 2 blocks, got {blocks}")));
        }
        if delay >= n * blocks {
            return Err(Error::Usage(format!(
                "delay {delay} outside [0, {}]",
                n * blocks - 1
            )));
        }
        let d = delay % n;
        Ok(Self {
            n,
            blocks,
            delay,
            d,
            l: (delay - d) / n + 1,
        })
    }

    pub fn window_len(&self) -> usize {
        self.n * self.blocks
    }

    pub fn subblocks(&self) -> usize {
        2 * self.blocks
    }

    /// `n_k` for 1-based `k`.
    pub fn subblock_len(&self, k: usize) -> usize {
        if k % 2 == 1 {
            self.n - self.d
        } else {
            self.d
        }
    }

    /// Window positions of subblock `k` (1-based).
    pub fn subblock_range(&self, k: usize) -> Range<usize> {
        let t = k.div_ceil(2);
        let start = (t - 1) * self.n + if k % 2 == 1 { 0 } else { self.n - self.d };
        start..start + self.subblock_len(k)
    }

    /// Sender 1 block containing subblock `k`.
    pub fn t1(&self, k: usize) -> usize {
        k.div_ceil(2)
    }

    /// Sender 2 block containing subblock `k`; the split sync word is block `K`.
    pub fn t2(&self, k: usize) -> usize {
        match k / 2 {
            0 => self.blocks,
            t => t,
        }
    }

    /// Longest irreducible error pattern possible at this delay.
    pub fn max_irreducible_len(&self) -> usize {
        2 * (self.l - 1).max(self.blocks - self.l)
    }
}
