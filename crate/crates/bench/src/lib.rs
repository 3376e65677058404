//! Fixtures shared by the benchmarks in `benches/`.

use qdiscrim::ensemble::random_density;
use qdiscrim::{
    generate, GeneratorKind, GeneratorSpec, HermitianOperator, QuantumChannel, WeightedEnsemble,
};

pub fn full_rank_ensemble(dim: usize, m: usize, seed: u64) -> WeightedEnsemble {
    generate(&GeneratorSpec::new(
        GeneratorKind::GinibreFullRank,
        dim,
        m,
        seed,
    ))
    .expect("valid spec")
}

pub fn block_ensemble(dim: usize, m: usize, seed: u64) -> WeightedEnsemble {
    generate(&GeneratorSpec::new(
        GeneratorKind::BlockOrthogonal,
        dim,
        m,
        seed,
    ))
    .expect("valid spec")
}

pub fn density(dim: usize, seed: u64) -> HermitianOperator {
    random_density(dim, dim, seed).expect("valid rank")
}

/// Identity and a qubit dephasing channel.
pub fn qubit_channels() -> Vec<QuantumChannel> {
    let p: f64 = 0.3;
    let k0 = qdiscrim::ComplexMatrix::from_diagonal(&[(1.0 - p).sqrt(), (1.0 - p).sqrt()]);
    let k1 = qdiscrim::ComplexMatrix::from_diagonal(&[p.sqrt(), -p.sqrt()]);
    vec![
        QuantumChannel::identity(2),
        QuantumChannel::new(vec![k0, k1]).expect("trace preserving"),
    ]
}
