mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use qdiscrim::bounds::{helstrom_value, pairwise_lower_bound, upper_bound_theorem3};
use qdiscrim::channels::{
    apply, channel_bound, channel_bound_on_samples, ChannelBoundOptions, QuantumChannel,
};
use qdiscrim::ensemble::{random_density_from, random_unitary};
use qdiscrim::linalg::{min_eigenvalue, HermitianOperator};
use qdiscrim::measurement::success_probability;
use qdiscrim::oracle::{optimize_min_error, OracleOptions};
use qdiscrim::seed::{rng_from_seed, Rng};
use qdiscrim::{ComplexMatrix, WeightedEnsemble};
use rand::Rng as _;

/// Channel from a random isometry `C^dim_in -> C^(dim_out * kraus)`; `kraus`
/// is raised until the isometry fits.
fn random_channel(r: &mut Rng, dim_in: usize, dim_out: usize, kraus: usize) -> QuantumChannel {
    let kraus = kraus.max(dim_in.div_ceil(dim_out));
    let big = dim_out * kraus;
    let n = big.max(dim_in);
    let u = random_unitary(r, n);
    let ops = (0..kraus)
        .map(|a| {
            let mut k = ComplexMatrix::zeros(dim_out, dim_in);
            for row in 0..dim_out {
                for col in 0..dim_in {
                    k[(row, col)] = u[(a * dim_out + row, col)];
                }
            }
            k
        })
        .collect();
    QuantumChannel::new(ops).unwrap()
}

/// Diagonal design in which only the prior identity can fail, rotated by a
/// random unitary.
fn certified_instance(r: &mut Rng) -> WeightedEnsemble {
    let eta1 = 0.3 + 0.4 * r.random::<f64>();
    let eta2 = (1.0 - eta1) * (0.2 + 0.6 * r.random::<f64>());
    let eta3 = 1.0 - eta1 - eta2;
    let a = (eta1 / eta2).min(1.0) * r.random::<f64>() * 0.99;
    let u = random_unitary(r, 3);
    let states = [[1.0, 0.0, 0.0], [a, 1.0 - a, 0.0], [0.0, 0.0, 1.0]]
        .iter()
        .map(|d| HermitianOperator::from_diagonal(d).conjugate_by(&u))
        .collect();
    WeightedEnsemble::new(vec![eta1, eta2, eta3], states).unwrap()
}

proptest! {
    #![proptest_config(common::config(32))]

    #[test]
    fn oracle_sandwiched_by_bounds(seed in any::<u64>(), m in 2usize..=4, dim in 2usize..=5) {
        let e = common::random_ensemble("sandwich", seed, m, dim);
        let r = optimize_min_error(&e, &OracleOptions { restarts: 3, seed, ..Default::default() }).unwrap();
        prop_assert!(r.q_star >= pairwise_lower_bound(&e).unwrap() - 1e-7);
        let ub = upper_bound_theorem3(&e).unwrap();
        if ub.certified {
            prop_assert!(r.q_star <= ub.value + 1e-7);
        }
        prop_assert!((1.0 - success_probability(&e, &r.povm).unwrap() - r.q_star).abs() <= 1e-10);
        prop_assert!(r.povm.completeness_residual() <= 1e-8);
        if m == 2 {
            prop_assert!((r.q_star - helstrom_value(&e).unwrap()).abs() <= 1e-6);
        }
    }

    #[test]
    fn oracle_below_certified_upper_bound(seed in any::<u64>()) {
        let mut r = rng_from_seed(seed);
        let e = certified_instance(&mut r);
        let ub = upper_bound_theorem3(&e).unwrap();
        prop_assert!(ub.certified, "{:?}", ub.conditions);
        let q = optimize_min_error(&e, &OracleOptions { restarts: 3, seed, ..Default::default() }).unwrap().q_star;
        prop_assert!(q >= pairwise_lower_bound(&e).unwrap() - 1e-7);
        prop_assert!(q <= ub.value + 1e-7);
    }

    #[test]
    fn channels_preserve_states(seed in any::<u64>(), dim_in in 1usize..=4, dim_out in 1usize..=4, kraus in 1usize..=3) {
        let mut r = rng_from_seed(seed);
        let c = random_channel(&mut r, dim_in, dim_out, kraus);
        let rank = r.random_range(1..=dim_in);
        let rho = random_density_from(&mut r, dim_in, rank).unwrap();
        let out = apply(&c, &rho).unwrap();
        prop_assert!((out.trace() - 1.0).abs() <= 1e-9);
        prop_assert!(min_eigenvalue(&out).unwrap() >= -1e-9);
    }

    #[test]
    fn sampled_minimum_below_every_sample(seed in any::<u64>(), dim in 2usize..=3) {
        let mut r = rng_from_seed(seed);
        let chans = [random_channel(&mut r, dim, dim, 2), random_channel(&mut r, dim, dim, 1)];
        let samples: Vec<Vec<Complex64>> = (0..40).map(|_| common::pure_state(&mut r, dim)).collect();
        let best = channel_bound_on_samples(&chans, &[0.4, 0.6], &samples, true).unwrap().bound;
        for s in &samples {
            let v = channel_bound_on_samples(&chans, &[0.4, 0.6], std::slice::from_ref(s), false).unwrap().bound;
            prop_assert!(v >= best);
        }
    }

    #[test]
    fn bound_invariant_under_common_rotation(seed in any::<u64>(), dim in 2usize..=3) {
        let mut r = rng_from_seed(seed);
        let chans = [random_channel(&mut r, dim, dim, 2), random_channel(&mut r, dim, dim, 1)];
        let v = random_unitary(&mut r, dim);
        let rotated: Vec<QuantumChannel> = chans.iter().map(|c| c.conjugated_by(&v)).collect();
        let samples: Vec<Vec<Complex64>> = (0..200).map(|_| common::pure_state(&mut r, dim)).collect();
        let turned: Vec<Vec<Complex64>> = samples.iter().map(|s| v.matvec(s)).collect();
        let a = channel_bound_on_samples(&chans, &[0.5, 0.5], &samples, false).unwrap().bound;
        let b = channel_bound_on_samples(&rotated, &[0.5, 0.5], &turned, false).unwrap().bound;
        prop_assert!((a - b).abs() <= 1e-6);
    }
}

#[test]
fn two_channel_bound_is_helstrom_minimum() {
    let mut r = rng_from_seed(3);
    let chans = [
        random_channel(&mut r, 2, 2, 2),
        random_channel(&mut r, 2, 2, 2),
    ];
    let samples: Vec<Vec<Complex64>> = (0..100).map(|_| common::pure_state(&mut r, 2)).collect();
    let bound = channel_bound_on_samples(&chans, &[0.3, 0.7], &samples, false)
        .unwrap()
        .bound;
    let direct = samples
        .iter()
        .map(|s| {
            let rho = HermitianOperator::pure(s);
            let e = WeightedEnsemble::new(
                vec![0.3, 0.7],
                vec![
                    apply(&chans[0], &rho).unwrap(),
                    apply(&chans[1], &rho).unwrap(),
                ],
            )
            .unwrap();
            helstrom_value(&e).unwrap()
        })
        .fold(f64::INFINITY, f64::min);
    assert!((bound - direct).abs() <= 1e-12);
    let _ = channel_bound(
        &chans,
        &[0.3, 0.7],
        &ChannelBoundOptions {
            samples: 100,
            refine: false,
            seed: 1,
        },
    )
    .unwrap();
}
