//! Simulator invariants on small codes.

mod common;

use amac_core::channels::{pair_output_mac, xor_mac, z_channel};
use amac_core::sim::{
    classify_sets, min_conditional_entropy_decode, run_trials, x_window, y_window, AmacCode, CodeSpec,
    DelayGeometry, ErrorPattern, MmiDecoder, DEFAULT_DECODE_CAP,
};
use common::rng;
use rand::Rng;

fn spec(n: usize, blocks: usize, r: f64, tx: &[u64], ty: &[u64]) -> CodeSpec {
    CodeSpec {
        n,
        blocks,
        r1: r,
        r2: r,
        px_type: tx.to_vec(),
        py_type: ty.to_vec(),
    }
}

#[test]
fn tally_is_complete_and_legal() {
    let code = AmacCode::build(spec(6, 3, 1.0 / 6.0, &[4, 2], &[4, 2]), 3).unwrap();
    let w = xor_mac(&z_channel(0.101).unwrap()).unwrap();
    for delay in [0, 2, 7, 11] {
        let t = run_trials(&code, &w, delay, 2000, 5, DEFAULT_DECODE_CAP).unwrap();
        let geom = DelayGeometry::new(6, 3, delay).unwrap();
        assert_eq!(t.correct() + t.patterns.iter().map(|p| p.count).sum::<u64>(), t.trials);
        assert_eq!(t.error_rate, t.errors() as f64 / t.trials as f64);
        assert!(t.errors() > 0);
        for p in &t.patterns {
            assert!(!p.l1.contains(&geom.l) && !p.l2.contains(&geom.blocks));
            let c = classify_sets(&ErrorPattern::new(p.l1.clone(), p.l2.clone()), &geom).unwrap();
            for comp in &c.components {
                assert!(comp.pattern.len <= geom.max_irreducible_len());
            }
        }
    }
}

#[test]
fn tally_is_deterministic_in_seed() {
    let code = AmacCode::build(spec(6, 2, 1.0 / 6.0, &[4, 2], &[4, 2]), 0).unwrap();
    let w = xor_mac(&z_channel(0.101).unwrap()).unwrap();
    let a = run_trials(&code, &w, 3, 3000, 9, DEFAULT_DECODE_CAP).unwrap();
    let b = run_trials(&code, &w, 3, 3000, 9, DEFAULT_DECODE_CAP).unwrap();
    assert_eq!(a, b);
    let c = run_trials(&code, &w, 3, 3000, 10, DEFAULT_DECODE_CAP).unwrap();
    assert_ne!(a.patterns, c.patterns);
}

#[test]
fn subblock_types_reassemble_the_window_type() {
    let mut r = rng(4);
    for (n, blocks, delay) in [(4, 5, 2), (6, 3, 0), (5, 2, 7), (7, 4, 27)] {
        let geom = DelayGeometry::new(n, blocks, delay).unwrap();
        let z: Vec<u8> = (0..geom.window_len()).map(|_| r.gen_range(0..3)).collect();
        let mut total = [0usize; 3];
        for k in 1..=geom.subblocks() {
            let range = geom.subblock_range(k);
            assert_eq!(range.len(), geom.subblock_len(k));
            for &s in &z[range] {
                total[s as usize] += 1;
            }
        }
        let mut direct = [0usize; 3];
        z.iter().for_each(|&s| direct[s as usize] += 1);
        assert_eq!(total, direct);
    }
}

#[test]
fn synchronous_windowed_decoder_is_per_block_conditional_entropy() {
    let code = AmacCode::build(spec(6, 3, 1.0 / 6.0, &[4, 2], &[3, 3]), 1).unwrap();
    let geom = DelayGeometry::new(6, 3, 0).unwrap();
    let decoder = MmiDecoder::new(geom, 2);
    let mut r = rng(11);
    for _ in 0..100 {
        let z: Vec<u8> = (0..geom.window_len()).map(|_| r.gen_range(0..2)).collect();
        let windowed = decoder.decode(&code, &z).unwrap().messages;
        let per_block = min_conditional_entropy_decode(&code, &geom, 2, &z).unwrap();
        // both maximize the same objective, so any disagreement must be a tie
        let a = decoder.score(&code, &windowed, &z).unwrap();
        let b = decoder.score(&code, &per_block, &z).unwrap();
        assert!((a - b).abs() < 1e-9, "{windowed:?} scored {a}, {per_block:?} scored {b}");
    }
}

#[test]
fn single_hypothesis_never_errs() {
    let code = AmacCode::build(spec(6, 2, 0.0, &[3, 3], &[3, 3]), 0).unwrap();
    let w = xor_mac(&z_channel(0.3).unwrap()).unwrap();
    let t = run_trials(&code, &w, 2, 500, 1, DEFAULT_DECODE_CAP).unwrap();
    assert_eq!(t.errors(), 0);
}

#[test]
fn noiseless_pair_channel_decodes_a_synchronous_code() {
    let code = AmacCode::build(spec(8, 3, 1.0 / 8.0, &[5, 3], &[6, 2]), 0).unwrap();
    let w = pair_output_mac(2, 2).unwrap();
    for delay in [0, 8] {
        let t = run_trials(&code, &w, delay, 500, 2, DEFAULT_DECODE_CAP).unwrap();
        assert_eq!(t.errors(), 0, "delay {delay}");
    }
}

#[test]
fn noiseless_pair_channel_can_tie_on_complementary_words() {
    // relabeling symbols leaves every empirical multi-information unchanged
    let s = spec(6, 2, 1.0 / 6.0, &[3, 3], &[3, 3]);
    let x = vec![vec![0, 0, 0, 1, 1, 1], vec![0, 1, 0, 1, 0, 1], vec![1, 0, 1, 0, 1, 0]];
    let y = vec![vec![1, 1, 0, 0, 1, 0], vec![0, 0, 1, 1, 0, 1], vec![1, 1, 1, 0, 0, 0]];
    let code = AmacCode::from_words(s, x, y).unwrap();
    let geom = DelayGeometry::new(6, 2, 0).unwrap();
    let decoder = MmiDecoder::new(geom, 4);
    let truth = amac_core::sim::MessageTuples { i: vec![0, 2], j: vec![2, 0] };
    let z: Vec<u8> = x_window(&code, &truth.i)
        .iter()
        .zip(y_window(&code, &geom, &truth.j))
        .map(|(a, b)| a * 2 + b)
        .collect();
    let rival = amac_core::sim::MessageTuples { i: vec![0, 1], j: vec![2, 0] };
    let a = decoder.score(&code, &truth, &z).unwrap();
    let b = decoder.score(&code, &rival, &z).unwrap();
    assert!((a - b).abs() < 1e-12);
}
