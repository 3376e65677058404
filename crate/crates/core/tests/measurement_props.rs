mod common;

use proptest::prelude::*;
use qdiscrim::measurement::{
    attainment_residual, check_theorem2_conditions, compute_subspaces, error_probability,
    helstrom_povm, random_povm, success_probability, theorem2_povm, Povm,
};
use qdiscrim::oracle::{optimize_min_error, square_root_measurement, OracleOptions};
use qdiscrim::seed::rng_from_seed;

fn assert_valid(p: &Povm) -> Result<(), TestCaseError> {
    prop_assert!(p.completeness_residual() <= 1e-8);
    prop_assert!(p.min_eigenvalue().unwrap() >= -1e-8);
    Ok(())
}

proptest! {
    #![proptest_config(common::config(48))]

    #[test]
    fn constructed_povms_are_valid(seed in any::<u64>(), m in 2usize..=4, dim in 2usize..=5) {
        let e = common::random_ensemble("povms", seed, m, dim);
        assert_valid(&square_root_measurement(&e).unwrap())?;
        let mut r = rng_from_seed(seed);
        assert_valid(&random_povm(&mut r, dim, m).unwrap())?;
        if m == 2 {
            assert_valid(&helstrom_povm(&e).unwrap())?;
        }
        let b = common::random_block_ensemble("povms-block", seed, m, dim.max(m));
        assert_valid(&theorem2_povm(&b).unwrap())?;
    }

    #[test]
    fn error_and_success_sum_to_one(seed in any::<u64>(), m in 2usize..=5, dim in 2usize..=5) {
        let e = common::random_ensemble("sum", seed, m, dim);
        let mut r = rng_from_seed(seed);
        let p = random_povm(&mut r, dim, m).unwrap();
        let s: f64 = (0..m).map(|i| e.priors()[i] * e.states()[i].trace_product(&p.elements()[i])).sum();
        prop_assert!((error_probability(&e, &p).unwrap() + s - 1.0).abs() <= 1e-12);
        prop_assert!((success_probability(&e, &p).unwrap() - s).abs() <= 1e-12);
    }

    #[test]
    fn theorem2_elements_are_the_subspace_projectors(seed in any::<u64>(), m in 2usize..=4, extra in 0usize..=3) {
        let e = common::random_block_ensemble("dominance", seed, m, m + extra);
        let p = theorem2_povm(&e).unwrap();
        let sub = compute_subspaces(&e, None).unwrap();
        for k in 1..m {
            let diff = p.elements()[k].sub(&sub.s(k).projector);
            prop_assert!(qdiscrim::linalg::min_eigenvalue(&diff).unwrap() >= -1e-9);
        }
    }
}

/// When the orthogonality conditions fail, no POVM in the battery reaches
/// the attainment identity. Evidence, not proof.
#[test]
fn failing_conditions_prevent_attainment() {
    let mut tested = 0;
    let mut k = 0u64;
    while tested < 100 {
        let m = 3 + (k % 2) as usize;
        let dim = 3 + (k / 2 % 3) as usize;
        let e = common::random_ensemble("only-if", k, m, dim);
        k += 1;
        if check_theorem2_conditions(&e).unwrap().theorem2_holds() {
            continue;
        }
        tested += 1;
        let mut battery = vec![square_root_measurement(&e).unwrap()];
        battery.push(
            optimize_min_error(
                &e,
                &OracleOptions {
                    restarts: 2,
                    seed: k,
                    ..Default::default()
                },
            )
            .unwrap()
            .povm,
        );
        let mut r = rng_from_seed(k);
        for _ in 0..5 {
            battery.push(random_povm(&mut r, dim, m).unwrap());
        }
        for p in &battery {
            let gap = attainment_residual(&e, p).unwrap();
            assert!(gap > 1e-6, "ensemble {k}: attainment residual {gap:e}");
        }
    }
}
