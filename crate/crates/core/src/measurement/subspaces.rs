//! Positive/negative eigenspaces of the pairwise differences, the subspaces
//! `S_k`, the exact-attainment conditions and the construction they enable.

use num_complex::Complex64;
use serde::Serialize;

use super::Povm;
use crate::ensemble::WeightedEnsemble;
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, jordan_decompose, jordan_decompose_with, orthonormalize, projector_onto,
    support_projector, trace_norm, HermitianOperator,
};

/// Orthogonality threshold on Frobenius norms of projector products.
pub const ORTHO_TOL: f64 = 1e-8;
/// Relative drop tolerance when orthonormalizing the union of eigenspaces.
pub const S_K_DROP_TOL: f64 = 1e-10;

/// Eigenspace projectors of `Lambda_ij` (0-based `i < j`).
#[derive(Clone, Debug)]
pub struct PairSubspaces {
    pub i: usize,
    pub j: usize,
    pub pos_projector: HermitianOperator,
    pub neg_projector: HermitianOperator,
    pub pos_dim: usize,
    pub neg_dim: usize,
    pub trace_norm: f64,
    pos_basis: Vec<Vec<Complex64>>,
}

/// Projector onto `S_k`, the span of the positive eigenspaces of
/// `Lambda_ik` over all `i < k`.
#[derive(Clone, Debug)]
pub struct SubspaceProjector {
    pub k: usize,
    pub projector: HermitianOperator,
    pub dim: usize,
}

#[derive(Clone, Debug)]
pub struct SubspaceReport {
    m: usize,
    pairs: Vec<PairSubspaces>,
    s: Vec<SubspaceProjector>,
}

impl SubspaceReport {
    pub fn pair(&self, i: usize, j: usize) -> &PairSubspaces {
        assert!(i < j && j < self.m);
        // row-major over i < j
        let idx = i * (2 * self.m - i - 1) / 2 + (j - i - 1);
        &self.pairs[idx]
    }

    pub fn pairs(&self) -> &[PairSubspaces] {
        &self.pairs
    }

    /// `S_k` for `k >= 1`.
    pub fn s(&self, k: usize) -> &SubspaceProjector {
        &self.s[k - 1]
    }

    pub fn subspaces(&self) -> &[SubspaceProjector] {
        &self.s
    }
}

/// `eig_threshold = None` uses the default relative threshold per operator.
pub fn compute_subspaces(
    e: &WeightedEnsemble,
    eig_threshold: Option<f64>,
) -> Result<SubspaceReport> {
    let m = e.len();
    let mut pairs = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in i + 1..m {
            let lambda = e.lambda(i, j);
            let jd = match eig_threshold {
                Some(t) => jordan_decompose_with(&lambda, t)?,
                None => jordan_decompose(&lambda)?,
            };
            pairs.push(PairSubspaces {
                i,
                j,
                trace_norm: jd.trace_norm(),
                pos_dim: jd.pos_basis.len(),
                neg_dim: jd.neg_basis.len(),
                pos_projector: jd.pos_projector,
                neg_projector: jd.neg_projector,
                pos_basis: jd.pos_basis,
            });
        }
    }
    let mut report = SubspaceReport {
        m,
        pairs,
        s: Vec::new(),
    };
    for k in 1..m {
        let stacked: Vec<Vec<Complex64>> = (0..k)
            .flat_map(|i| report.pair(i, k).pos_basis.iter().cloned())
            .collect();
        let basis = orthonormalize(&stacked, S_K_DROP_TOL);
        report.s.push(SubspaceProjector {
            k,
            dim: basis.len(),
            projector: projector_onto(&basis, e.dim()),
        });
    }
    Ok(report)
}

/// One condition: whether it holds and the worst residual behind the verdict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub holds: bool,
    pub residual: f64,
}

impl ConditionCheck {
    fn new(residual: f64, tol: f64) -> Self {
        Self {
            holds: residual <= tol,
            residual,
        }
    }
}

/// Exact-attainment conditions. `cond_i` and `cond_ii` are the two-part
/// orthogonality condition for the lower bound; `cond_s1` additionally makes
/// the upper bound valid; `cond_eta` makes the two bounds coincide.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    /// `max ||P^+_{i1 j} P^-_{i2 j}||_F` over `i1, i2 < j`.
    pub cond_i: ConditionCheck,
    /// `max ||P_i P_j||_F` over `1 <= i < j` (0-based).
    pub cond_ii: ConditionCheck,
    /// `max ||P_{S(rho_1)} P_j||_F` over `j >= 1` (0-based).
    pub cond_s1: ConditionCheck,
    /// `max |eta_i + eta_1 - Tr|Lambda_1i||` over `1 <= i <= m - 2` (0-based).
    pub cond_eta: ConditionCheck,
    pub tolerance: f64,
}

impl ConditionReport {
    pub fn theorem2_holds(&self) -> bool {
        self.cond_i.holds && self.cond_ii.holds
    }

    /// Whether the conditional upper bound is certified.
    pub fn upper_bound_certified(&self) -> bool {
        self.theorem2_holds() && self.cond_s1.holds
    }

    pub fn corollary1_holds(&self) -> bool {
        self.upper_bound_certified() && self.cond_eta.holds
    }
}

pub fn check_theorem2_conditions(e: &WeightedEnsemble) -> Result<ConditionReport> {
    check_conditions_with(e, ORTHO_TOL)
}

pub fn check_corollary1_conditions(e: &WeightedEnsemble) -> Result<ConditionReport> {
    check_conditions_with(e, ORTHO_TOL)
}

/// Evaluates all four conditions; the orthogonality ones use `tol`, and so
/// does the prior identity.
pub fn check_conditions_with(e: &WeightedEnsemble, tol: f64) -> Result<ConditionReport> {
    let sub = compute_subspaces(e, None)?;
    conditions_from(e, &sub, tol)
}

fn product_norm(a: &HermitianOperator, b: &HermitianOperator) -> f64 {
    (a.matrix() * b.matrix()).frobenius_norm()
}

fn conditions_from(
    e: &WeightedEnsemble,
    sub: &SubspaceReport,
    tol: f64,
) -> Result<ConditionReport> {
    let m = e.len();
    let mut r_i = 0.0f64;
    for j in 1..m {
        for i1 in 0..j {
            for i2 in 0..j {
                r_i = r_i.max(product_norm(
                    &sub.pair(i1, j).pos_projector,
                    &sub.pair(i2, j).neg_projector,
                ));
            }
        }
    }
    let mut r_ii = 0.0f64;
    for i in 1..m {
        for j in i + 1..m {
            r_ii = r_ii.max(product_norm(&sub.s(i).projector, &sub.s(j).projector));
        }
    }
    let s1 = support_projector(&e.states()[0])?;
    let r_s1 = (1..m)
        .map(|j| product_norm(&s1, &sub.s(j).projector))
        .fold(0.0, f64::max);
    let eta = e.priors();
    let r_eta = (1..m.saturating_sub(1))
        .map(|i| (eta[i] + eta[0] - sub.pair(0, i).trace_norm).abs())
        .fold(0.0, f64::max);
    Ok(ConditionReport {
        cond_i: ConditionCheck::new(r_i, tol),
        cond_ii: ConditionCheck::new(r_ii, tol),
        cond_s1: ConditionCheck::new(r_s1, tol),
        cond_eta: ConditionCheck::new(r_eta, tol),
        tolerance: tol,
    })
}

pub fn theorem2_povm(e: &WeightedEnsemble) -> Result<Povm> {
    theorem2_povm_with(e, ORTHO_TOL)
}

/// `Pi_j = P_j` for `j >= 2` and `Pi_1 = I - sum_j P_j`; refused unless the
/// orthogonality conditions hold.
pub fn theorem2_povm_with(e: &WeightedEnsemble, ortho_tol: f64) -> Result<Povm> {
    let sub = compute_subspaces(e, None)?;
    let report = conditions_from(e, &sub, ortho_tol)?;
    if !report.theorem2_holds() {
        return Err(Error::ConditionsFail(Box::new(report)));
    }
    let d = e.dim();
    let rest: Vec<HermitianOperator> = (1..e.len()).map(|k| sub.s(k).projector.clone()).collect();
    let first = rest
        .iter()
        .fold(HermitianOperator::identity(d), |acc, p| acc.sub(p));
    let min = hermitian_eig(&first)?.min_eigenvalue();
    if min < -1e-8 {
        return Err(Error::NotPsd { min_eig: min });
    }
    let mut elements = vec![first];
    elements.extend(rest);
    Povm::new(elements)
}

/// `|LHS - RHS|` of the attainment identity
/// `(1/(m-1)) sum_{i<j} [eta_i + Tr(Lambda_ij Pi_j)] = 1/2 (1 + (1/(m-1)) sum_{i<j} Tr|Lambda_ij|)`.
pub fn attainment_residual(e: &WeightedEnsemble, p: &Povm) -> Result<f64> {
    let m = e.len();
    if p.len() != m {
        return Err(Error::CountMismatch {
            states: m,
            outcomes: p.len(),
        });
    }
    if p.dim() != e.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found: p.dim(),
        });
    }
    let scale = 1.0 / (m as f64 - 1.0);
    let mut lhs = 0.0;
    let mut norms = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            let lambda = e.lambda(i, j);
            lhs += e.priors()[i] + lambda.trace_product(&p.elements()[j]);
            norms += trace_norm(&lambda)?;
        }
    }
    Ok((scale * lhs - 0.5 * (1.0 + scale * norms)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{generate, GeneratorKind, GeneratorSpec};
    use crate::measurement::{error_probability, helstrom_povm, hykl_certificate};

    fn block(dim: usize, m: usize, seed: u64) -> WeightedEnsemble {
        generate(&GeneratorSpec::new(
            GeneratorKind::BlockOrthogonal,
            dim,
            m,
            seed,
        ))
        .unwrap()
    }

    fn idempotency(p: &HermitianOperator) -> f64 {
        (&(p.matrix() * p.matrix()) - p.matrix()).frobenius_norm()
    }

    fn check_report_invariants(e: &WeightedEnsemble, sub: &SubspaceReport) {
        for pair in sub.pairs() {
            assert!(idempotency(&pair.pos_projector) < 1e-9);
            assert!(idempotency(&pair.neg_projector) < 1e-9);
        }
        for k in 1..e.len() {
            let pk = &sub.s(k).projector;
            assert!(idempotency(pk) < 1e-9);
            for i in 0..k {
                let pp = &sub.pair(i, k).pos_projector;
                assert!((&(pk.matrix() * pp.matrix()) - pp.matrix()).frobenius_norm() < 1e-8);
            }
        }
    }

    #[test]
    fn block_orthogonal_subspaces_are_supports() {
        let e = block(6, 3, 4);
        let sub = compute_subspaces(&e, None).unwrap();
        check_report_invariants(&e, &sub);
        for k in 1..3 {
            let supp = support_projector(&e.states()[k]).unwrap();
            assert!((sub.s(k).projector.matrix() - supp.matrix()).frobenius_norm() < 1e-9);
        }
    }

    #[test]
    fn two_state_subspaces() {
        let e = generate(&GeneratorSpec::new(GeneratorKind::GinibreFullRank, 3, 2, 8)).unwrap();
        let sub = compute_subspaces(&e, None).unwrap();
        assert_eq!(sub.pairs().len(), 1);
        assert_eq!(sub.subspaces().len(), 1);
        assert!(
            (sub.s(1).projector.matrix() - sub.pair(0, 1).pos_projector.matrix()).frobenius_norm()
                < 1e-12
        );
    }

    #[test]
    fn s_k_dimension_matches_stacked_rank() {
        let e = generate(&GeneratorSpec::new(
            GeneratorKind::GinibreFullRank,
            3,
            3,
            13,
        ))
        .unwrap();
        let sub = compute_subspaces(&e, None).unwrap();
        check_report_invariants(&e, &sub);
        for k in 1..3 {
            // rank of the stacked positive projectors, read off their sum
            let sum = (0..k).fold(HermitianOperator::zeros(3), |acc, i| {
                acc.add(&sub.pair(i, k).pos_projector)
            });
            let es = hermitian_eig(&sum).unwrap();
            let rank = es.eigenvalues.iter().filter(|&&l| l > 1e-9).count();
            assert_eq!(sub.s(k).dim, rank);
        }
    }

    #[test]
    fn block_orthogonal_passes_everything() {
        for (d, m) in [(2, 2), (3, 3), (5, 3), (8, 4), (8, 8)] {
            let r = check_corollary1_conditions(&block(d, m, d as u64)).unwrap();
            assert!(r.corollary1_holds(), "{d} {m}: {r:?}");
        }
    }

    #[test]
    fn generic_triples_fail_cond_ii() {
        for seed in [1, 2] {
            let e = generate(&GeneratorSpec::new(
                GeneratorKind::GinibreFullRank,
                3,
                3,
                seed,
            ))
            .unwrap();
            let r = check_theorem2_conditions(&e).unwrap();
            assert!(!r.cond_ii.holds, "seed {seed}: {r:?}");
        }
    }

    #[test]
    fn two_states_satisfy_theorem2_but_not_s1() {
        let e = generate(&GeneratorSpec::new(
            GeneratorKind::GinibreFullRank,
            3,
            2,
            21,
        ))
        .unwrap();
        let r = check_corollary1_conditions(&e).unwrap();
        assert!(r.theorem2_holds());
        assert_eq!(r.cond_ii.residual, 0.0);
        assert_eq!(r.cond_eta.residual, 0.0);
        assert!(!r.cond_s1.holds);
        assert!(!r.corollary1_holds());
    }

    #[test]
    fn only_prior_identity_fails() {
        // rho_1 = |0><0|, rho_2 overlaps it, rho_3 on its own block
        let a = 0.2;
        let e = WeightedEnsemble::new(
            vec![0.5, 0.3, 0.2],
            vec![
                HermitianOperator::from_diagonal(&[1.0, 0.0, 0.0]),
                HermitianOperator::from_diagonal(&[a, 1.0 - a, 0.0]),
                HermitianOperator::from_diagonal(&[0.0, 0.0, 1.0]),
            ],
        )
        .unwrap();
        let r = check_corollary1_conditions(&e).unwrap();
        assert!(
            r.cond_i.holds && r.cond_ii.holds && r.cond_s1.holds,
            "{r:?}"
        );
        assert!(!r.cond_eta.holds);
        // Tr|Lambda_12| = (0.5 - 0.06) + 0.24 = 0.68
        assert!((r.cond_eta.residual - 0.12).abs() < 1e-12);
    }

    #[test]
    fn theorem2_povm_on_blocks() {
        let e = block(3, 3, 2);
        let p = theorem2_povm(&e).unwrap();
        assert!(error_probability(&e, &p).unwrap().abs() < 1e-12);
        assert!(attainment_residual(&e, &p).unwrap() < 1e-12);
        assert!(hykl_certificate(&e, &p).unwrap().optimal);

        let e =
            WeightedEnsemble::new(vec![0.5, 0.3, 0.2], block(6, 3, 9).states().to_vec()).unwrap();
        let p = theorem2_povm(&e).unwrap();
        assert!(attainment_residual(&e, &p).unwrap() <= 1e-8);
    }

    #[test]
    fn theorem2_povm_matches_helstrom_for_two_states() {
        for seed in 0..5 {
            let e = generate(&GeneratorSpec::new(
                GeneratorKind::GinibreFullRank,
                4,
                2,
                seed,
            ))
            .unwrap();
            let a = theorem2_povm(&e).unwrap();
            let b = helstrom_povm(&e).unwrap();
            for (x, y) in a.elements().iter().zip(b.elements()) {
                assert!((x.matrix() - y.matrix()).frobenius_norm() < 1e-12);
            }
        }
    }

    #[test]
    fn theorem2_povm_refused_when_conditions_fail() {
        let e = generate(&GeneratorSpec::new(GeneratorKind::GinibreFullRank, 3, 3, 1)).unwrap();
        assert!(matches!(theorem2_povm(&e), Err(Error::ConditionsFail(_))));
    }
}
