#![allow(dead_code)]

use num_complex::Complex64;
use qdiscrim::ensemble::{
    generate, random_density_from, random_pure_vector, GeneratorKind, GeneratorSpec,
};
use qdiscrim::linalg::HermitianOperator;
use qdiscrim::seed::{derive_seed, rng_from_seed, Rng};
use qdiscrim::WeightedEnsemble;
use rand::Rng as _;

pub fn rng(task: &str, index: u64) -> Rng {
    rng_from_seed(derive_seed(2024, task, index))
}

/// Priors drawn uniformly from the simplex, kept away from zero.
pub fn random_priors(rng: &mut Rng, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| 0.05 + rng.random::<f64>()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// Random ensemble with mixed ranks and random priors.
pub fn random_ensemble(task: &str, index: u64, m: usize, dim: usize) -> WeightedEnsemble {
    let mut r = rng(task, index);
    let priors = random_priors(&mut r, m);
    let states = (0..m)
        .map(|_| {
            let rank = r.random_range(1..=dim);
            random_density_from(&mut r, dim, rank).unwrap()
        })
        .collect();
    WeightedEnsemble::new(priors, states).unwrap()
}

/// Block-orthogonal ensemble with random priors and block contents.
pub fn random_block_ensemble(task: &str, index: u64, m: usize, dim: usize) -> WeightedEnsemble {
    let mut r = rng(task, index);
    let priors = random_priors(&mut r, m);
    let seed = r.random::<u64>();
    generate(&GeneratorSpec::new(GeneratorKind::BlockOrthogonal, dim, m, seed).with_priors(priors))
        .unwrap()
}

/// Unnormalized PSD operator: a random density of random rank times a weight in (0.05, 1].
pub fn random_psd(r: &mut Rng, dim: usize) -> HermitianOperator {
    let rank = r.random_range(1..=dim);
    let w = 0.05 + 0.95 * r.random::<f64>();
    random_density_from(r, dim, rank).unwrap().scale(w)
}

/// Pair of PSD operators supported on complementary coordinate blocks.
pub fn orthogonal_psd_pair(r: &mut Rng, dim: usize) -> (HermitianOperator, HermitianOperator) {
    let split = r.random_range(1..dim);
    let a = embed(&random_psd(r, split), dim, 0);
    let b = embed(&random_psd(r, dim - split), dim, split);
    (a, b)
}

pub fn embed(h: &HermitianOperator, dim: usize, offset: usize) -> HermitianOperator {
    let mut m = qdiscrim::ComplexMatrix::zeros(dim, dim);
    for r in 0..h.dim() {
        for c in 0..h.dim() {
            m[(offset + r, offset + c)] = h.matrix()[(r, c)];
        }
    }
    HermitianOperator::from_hermitian_part(&m)
}

pub fn pure_state(r: &mut Rng, dim: usize) -> Vec<Complex64> {
    random_pure_vector(r, dim)
}

/// Equiprobable trine: real qubit states at angles `2 pi k / 3`.
pub fn trine() -> WeightedEnsemble {
    let states = (0..3)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            HermitianOperator::pure(&[Complex64::new(t.cos(), 0.0), Complex64::new(t.sin(), 0.0)])
        })
        .collect();
    WeightedEnsemble::uniform(states).unwrap()
}

/// Deterministic proptest configuration.
pub fn config(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..Default::default()
    }
}
