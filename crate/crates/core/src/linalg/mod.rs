//! Dense complex linear algebra and the operator functionals the bounds are
//! built from.

pub mod codec;
mod eigen;
mod functionals;
mod matrix;

pub use eigen::{
    hermitian_eig, hermitian_eig_with, EigenSystem, HermitianOperator, HERMITICITY_TOL, MAX_SWEEPS,
};
pub use functionals::{
    default_eig_threshold, fact1_gap, fidelity, fidelity_asymmetry, fidelity_eigenbasis,
    jordan_decompose, jordan_decompose_with, jordan_from_eigensystem, matrix_sqrt, min_eigenvalue,
    pinv_sqrt, support_projector, support_projector_with, trace_distance, trace_norm,
    EigenbasisFidelity, JordanDecomposition, SingularPolicy, EIG_THRESHOLD_REL,
    FIDELITY_ASYMMETRY_WARN, PSD_TOL, RANK_TOL, REGULARIZATION_EPS,
};
pub use matrix::{inner, norm, ComplexMatrix};

/// Modified Gram-Schmidt with one re-orthogonalization pass. Vectors whose
/// residual norm falls below `drop_tol` times their input norm are dropped.
pub fn orthonormalize(
    vectors: &[Vec<num_complex::Complex64>],
    drop_tol: f64,
) -> Vec<Vec<num_complex::Complex64>> {
    let mut basis: Vec<Vec<num_complex::Complex64>> = Vec::new();
    for v in vectors {
        let input_norm = norm(v);
        if input_norm == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _pass in 0..2 {
            for b in &basis {
                let c = inner(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let n = norm(&w);
        if n > drop_tol * input_norm {
            basis.push(w.into_iter().map(|z| z / n).collect());
        }
    }
    basis
}

/// Orthogonal projector onto the span of an orthonormal family.
pub fn projector_onto(basis: &[Vec<num_complex::Complex64>], dim: usize) -> HermitianOperator {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for v in basis {
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] += v[r] * v[c].conj();
            }
        }
    }
    HermitianOperator::from_hermitian_part(&m)
}
