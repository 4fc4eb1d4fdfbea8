//! Randomized checks of the information identities and coupling lemmas.

mod common;

use amac_core::prob::{
    compose, couple_to_marginals, divergence, entropy, extend_coupling_to_channel, multi_information,
    variational_distance, InfoKind, Joint2, Pmf,
};
use amac_core::subtypes::jensen_shannon_split;
use common::*;
use rand::Rng;

const INSTANCES: u64 = 1000;

#[test]
fn divergence_exchange() {
    for seed in 0..INSTANCES {
        let mut r = rng(seed);
        let inst = instance(&mut r, 2, 3, 2);
        let v = feasible_joint(&mut r, &inst.px, &inst.py, 2);
        let own = compose(&v.marginal_xy(), &inst.w).unwrap();
        let lhs = divergence(&v, &own).unwrap() + v.info0();
        let rhs = divergence(&v, &inst.p).unwrap();
        assert!((lhs - rhs).abs() < 1e-10, "seed {seed}: {lhs} vs {rhs}");
    }
}

#[test]
fn multi_information_decomposition() {
    for seed in 0..INSTANCES {
        let mut r = rng(seed);
        let v = joint3(&mut r, 2, 3, 3);
        let t = v.to_table();
        let yz = multi_information(&t.marginal(&[1, 2]).unwrap(), &[&[0], &[1]]).unwrap();
        let xz = multi_information(&t.marginal(&[0, 2]).unwrap(), &[&[0], &[1]]).unwrap();
        let i12 = v.info(InfoKind::I12);
        assert!((i12 - (v.info(InfoKind::I1) + yz)).abs() < 1e-10);
        assert!((i12 - (v.info(InfoKind::I2) + xz)).abs() < 1e-10);
    }
}

#[test]
fn pinsker_inequality() {
    for seed in 0..INSTANCES {
        let mut r = rng(seed);
        let p = joint2(&mut r, 3, 3);
        let q = joint2(&mut r, 3, 3);
        let bound = (2.0 * std::f64::consts::LN_2 * divergence(&p, &q).unwrap()).sqrt();
        assert!(variational_distance(&p, &q).unwrap() <= bound + 1e-12);
    }
}

#[test]
fn entropy_chain_rule() {
    for seed in 0..INSTANCES {
        let mut r = rng(seed);
        let v = joint2(&mut r, 3, 4);
        let px = v.marginal_x();
        let conditional: f64 = (0..3)
            .map(|x| {
                let row: Vec<f64> = (0..4).map(|y| v.get(x, y) / px.get(x)).collect();
                px.get(x) * row.iter().map(|&q| -q * q.log2()).sum::<f64>()
            })
            .sum();
        assert!((entropy(&v) - entropy(&px) - conditional).abs() < 1e-10);
        let direct = entropy(&px) + entropy(&v.marginal_y()) - entropy(&v);
        assert_eq!(v.mutual_information(), direct.max(0.0));
    }
}

#[test]
fn split_forms_agree() {
    for seed in 0..INSTANCES {
        let mut r = rng(seed);
        let n: u64 = r.gen_range(2..40);
        let alphabet = r.gen_range(2..5);
        // a random type of length n and a random sub-count vector inside it
        let mut p = vec![0u64; alphabet];
        for _ in 0..n {
            p[r.gen_range(0..alphabet)] += 1;
        }
        let v1: Vec<u64> = p.iter().map(|&c| r.gen_range(0..=c)).collect();
        let v2: Vec<u64> = p.iter().zip(&v1).map(|(a, b)| a - b).collect();
        if v1.iter().sum::<u64>() == 0 || v2.iter().sum::<u64>() == 0 {
            continue;
        }
        let s = jensen_shannon_split(&p, &v1, &v2).unwrap();
        assert!((s.entropy_form - s.divergence_form).abs() < 1e-10, "seed {seed}");
        assert!(s.value() >= -1e-12);
    }
}

#[test]
fn marginal_coupling_postconditions() {
    for seed in 0..INSTANCES {
        let mut r = rng(seed);
        let v = joint2(&mut r, 3, 3);
        let px = dist(&mut r, 3);
        let py = dist(&mut r, 3);
        let out = couple_to_marginals(&v, &px, &py).unwrap();
        assert!(variational_distance(&out.marginal_x(), &px).unwrap() < 1e-10);
        assert!(variational_distance(&out.marginal_y(), &py).unwrap() < 1e-10);
        let budget = variational_distance(&px, &v.marginal_x()).unwrap()
            + variational_distance(&py, &v.marginal_y()).unwrap();
        assert!(variational_distance(&out, &v).unwrap() <= budget + 1e-10);
        assert!(out.probs().iter().all(|&q| q >= 0.0));
    }
}

#[test]
fn channel_extension_postconditions() {
    for seed in 0..INSTANCES {
        let mut r = rng(seed);
        let (nx, ny, nz) = (2, 2, 2);
        let v = joint3(&mut r, nx, ny, nz);
        let w = channel(&mut r, nx, ny, nz);
        let vxy = v.marginal_xy();
        // perturbation of total variation at most 2t, within the (|X||Y|)^-2 budget
        let t = r.gen_range(0.0..1.0 / 32.0);
        let noise = joint2(&mut r, nx, ny);
        let hat_probs: Vec<f64> = vxy.probs().iter().zip(noise.probs()).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        let hat = Joint2::normalized(nx, ny, hat_probs).unwrap();
        let out = extend_coupling_to_channel(&v, &hat, &w).unwrap();
        assert!(variational_distance(&out.marginal_xy(), &hat).unwrap() < 1e-10);
        let shift = variational_distance(&hat, &vxy).unwrap();
        let cells = (nx * ny * nz) as f64;
        assert!(variational_distance(&out, &v).unwrap() <= cells * shift.sqrt() + 1e-10);
        let before = divergence(&v, &compose(&vxy, &w).unwrap()).unwrap();
        let after = divergence(&out, &compose(&hat, &w).unwrap()).unwrap();
        assert!(after <= before * (1.0 + shift.sqrt()) + 1e-9, "seed {seed}: {after} > {before}");
    }
}
