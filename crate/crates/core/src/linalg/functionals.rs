//! Operator functionals on Hermitian and positive semidefinite operators:
//! trace norm, Jordan decomposition, square roots, fidelity, trace distance
//! and support projectors.

use num_complex::Complex64;
use serde::Serialize;

use super::eigen::{hermitian_eig, EigenSystem, HermitianOperator};
use crate::error::{Error, Result};

/// Relative threshold below which an eigenvalue counts as zero.
pub const EIG_THRESHOLD_REL: f64 = 1e-10;
/// Relative PSD tolerance: a minimum eigenvalue below `-PSD_TOL * max|lambda|` is an error.
pub const PSD_TOL: f64 = 1e-8;
/// Minimum eigenvalue a state must exceed to count as invertible.
pub const RANK_TOL: f64 = 1e-10;
/// Mixing weight of the maximally mixed state used by [`SingularPolicy::Regularize`].
pub const REGULARIZATION_EPS: f64 = 1e-8;
/// Asymmetry of `F(A, B)` vs `F(B, A)` above which a health warning is due.
pub const FIDELITY_ASYMMETRY_WARN: f64 = 1e-8;

/// The zero-eigenvalue cut shared by Jordan decompositions and support projectors:
/// `1e-10 * max(1, max_k |lambda_k|)`.
pub fn default_eig_threshold(es: &EigenSystem) -> f64 {
    EIG_THRESHOLD_REL * es.max_abs_eigenvalue().max(1.0)
}

/// Eigenvalues at or below this level are roundoff; used before taking square
/// roots so that `sqrt(1e-17)` noise does not leak into traces.
fn roundoff_floor(es: &EigenSystem) -> f64 {
    es.dim() as f64 * f64::EPSILON * es.max_abs_eigenvalue()
}

fn check_psd(es: &EigenSystem, rel_tol: f64) -> Result<()> {
    let min = es.min_eigenvalue();
    if min < -rel_tol * es.max_abs_eigenvalue() {
        return Err(Error::NotPsd { min_eig: min });
    }
    Ok(())
}

/// Minimum eigenvalue of a Hermitian operator.
pub fn min_eigenvalue(h: &HermitianOperator) -> Result<f64> {
    Ok(hermitian_eig(h)?.min_eigenvalue())
}

/// `Tr|H| = sum_k |lambda_k|`.
pub fn trace_norm(h: &HermitianOperator) -> Result<f64> {
    Ok(hermitian_eig(h)?.eigenvalues.iter().map(|l| l.abs()).sum())
}

/// Split `H = A - B` with `A, B >= 0` on orthogonal supports.
#[derive(Clone, Debug)]
pub struct JordanDecomposition {
    pub positive_part: HermitianOperator,
    pub negative_part: HermitianOperator,
    pub pos_projector: HermitianOperator,
    pub neg_projector: HermitianOperator,
    /// Positive eigenvalues `a_k`, descending.
    pub pos_eigenvalues: Vec<f64>,
    /// Magnitudes `b_l` of the negative eigenvalues, descending.
    pub neg_eigenvalues: Vec<f64>,
    /// Orthonormal basis of the positive eigenspace, aligned with `pos_eigenvalues`.
    pub pos_basis: Vec<Vec<Complex64>>,
    /// Orthonormal basis of the negative eigenspace, aligned with `neg_eigenvalues`.
    pub neg_basis: Vec<Vec<Complex64>>,
    pub threshold: f64,
}

impl JordanDecomposition {
    /// `Tr A + Tr B`, which equals the trace norm of the input up to the
    /// eigenvalues discarded by the threshold.
    pub fn trace_norm(&self) -> f64 {
        self.pos_eigenvalues.iter().sum::<f64>() + self.neg_eigenvalues.iter().sum::<f64>()
    }
}

pub fn jordan_decompose(h: &HermitianOperator) -> Result<JordanDecomposition> {
    let es = hermitian_eig(h)?;
    let threshold = default_eig_threshold(&es);
    Ok(jordan_from_eigensystem(&es, threshold))
}

pub fn jordan_decompose_with(
    h: &HermitianOperator,
    eig_threshold: f64,
) -> Result<JordanDecomposition> {
    let es = hermitian_eig(h)?;
    Ok(jordan_from_eigensystem(&es, eig_threshold.max(0.0)))
}

/// Eigenvalues with `|lambda| <= threshold` go to neither part.
pub fn jordan_from_eigensystem(es: &EigenSystem, threshold: f64) -> JordanDecomposition {
    let positive_part = es.spectral_map(|l| (l > threshold).then_some(l));
    let negative_part = es.spectral_map(|l| (l < -threshold).then_some(-l));
    let pos_projector = es.spectral_map(|l| (l > threshold).then_some(1.0));
    let neg_projector = es.spectral_map(|l| (l < -threshold).then_some(1.0));
    let mut pos_eigenvalues = Vec::new();
    let mut neg_eigenvalues = Vec::new();
    let mut pos_basis = Vec::new();
    let mut neg_basis = Vec::new();
    for (l, v) in es.eigenvalues.iter().zip(&es.eigenvectors) {
        if *l > threshold {
            pos_eigenvalues.push(*l);
            pos_basis.push(v.clone());
        }
    }
    // Walk from the most negative end so magnitudes come out descending.
    for (l, v) in es.eigenvalues.iter().zip(&es.eigenvectors).rev() {
        if *l < -threshold {
            neg_eigenvalues.push(-*l);
            neg_basis.push(v.clone());
        }
    }
    JordanDecomposition {
        positive_part,
        negative_part,
        pos_projector,
        neg_projector,
        pos_eigenvalues,
        neg_eigenvalues,
        pos_basis,
        neg_basis,
        threshold,
    }
}

/// Square root of a PSD operator. Eigenvalues in `[-psd_tol * max|lambda|, 0)`
/// are clamped to zero; anything more negative is an error.
pub fn matrix_sqrt(h: &HermitianOperator) -> Result<HermitianOperator> {
    let es = hermitian_eig(h)?;
    sqrt_from_eigensystem(&es)
}

fn sqrt_from_eigensystem(es: &EigenSystem) -> Result<HermitianOperator> {
    check_psd(es, PSD_TOL)?;
    let floor = roundoff_floor(es);
    Ok(es.spectral_map(|l| (l > floor).then(|| l.sqrt())))
}

/// `F(A, B) = Tr sqrt(A^{1/2} B A^{1/2})` for PSD `A`, `B`.
pub fn fidelity(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    a.check_dim(b)?;
    check_psd(&hermitian_eig(b)?, PSD_TOL)?;
    let sa = matrix_sqrt(a)?;
    let inner = b.sandwich_by(&sa);
    let es = hermitian_eig(&inner)?;
    let floor = roundoff_floor(&es);
    Ok(es
        .eigenvalues
        .iter()
        .filter(|&&l| l > floor)
        .map(|l| l.sqrt())
        .sum())
}

/// `|F(A, B) - F(B, A)|`; exceeds [`FIDELITY_ASYMMETRY_WARN`] only when the
/// numerics are unhealthy.
pub fn fidelity_asymmetry(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    Ok((fidelity(a, b)? - fidelity(b, a)?).abs())
}

/// `D(A, B) = Tr|A - B| / 2`.
pub fn trace_distance(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    a.check_dim(b)?;
    Ok(0.5 * trace_norm(&a.sub(b))?)
}

/// Projector onto the span of eigenvectors with eigenvalue above the threshold.
pub fn support_projector(h: &HermitianOperator) -> Result<HermitianOperator> {
    let es = hermitian_eig(h)?;
    let threshold = default_eig_threshold(&es);
    support_from_eigensystem(&es, threshold)
}

pub fn support_projector_with(
    h: &HermitianOperator,
    eig_threshold: f64,
) -> Result<HermitianOperator> {
    let es = hermitian_eig(h)?;
    support_from_eigensystem(&es, eig_threshold)
}

fn support_from_eigensystem(es: &EigenSystem, threshold: f64) -> Result<HermitianOperator> {
    check_psd(es, PSD_TOL)?;
    Ok(es.spectral_map(|l| (l > threshold).then_some(1.0)))
}

/// Pseudo-inverse square root of a PSD operator on its support, returned with
/// the support projector. Eigenvalues at or below the shared threshold count
/// as zero.
pub fn pinv_sqrt(h: &HermitianOperator) -> Result<(HermitianOperator, HermitianOperator)> {
    let es = hermitian_eig(h)?;
    check_psd(&es, PSD_TOL)?;
    let threshold = default_eig_threshold(&es);
    let inv = es.spectral_map(|l| (l > threshold).then(|| 1.0 / l.sqrt()));
    let proj = es.spectral_map(|l| (l > threshold).then_some(1.0));
    Ok((inv, proj))
}

/// How [`fidelity_eigenbasis`] treats a singular second argument.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SingularPolicy {
    #[default]
    Refuse,
    /// Replace `rho_j` by `(1 - eps) rho_j + eps I / d` with `eps = 1e-8`.
    Regularize,
}

/// Fidelity evaluated as a classical Bhattacharyya sum in a measurement basis.
#[derive(Clone, Debug, Serialize)]
pub struct EigenbasisFidelity {
    pub value: f64,
    /// `e_l = <l| rho_i |l>`.
    pub e: Vec<f64>,
    /// `f_l = <l| rho_j |l>`.
    pub f: Vec<f64>,
    #[serde(skip)]
    pub basis: Vec<Vec<Complex64>>,
    pub regularized: bool,
}

/// Evaluates `F(rho_i, rho_j)` as `sum_l sqrt(e_l f_l)` in the eigenbasis of
/// `M = rho_j^{-1/2} (rho_j^{1/2} rho_i rho_j^{1/2})^{1/2} rho_j^{-1/2}`.
///
/// `M rho_j M = rho_i`, so `e_l = m_l^2 f_l` and the sum collapses to
/// `Tr(M rho_j) = F(rho_i, rho_j)`.
pub fn fidelity_eigenbasis(
    rho_i: &HermitianOperator,
    rho_j: &HermitianOperator,
    policy: SingularPolicy,
) -> Result<EigenbasisFidelity> {
    rho_i.check_dim(rho_j)?;
    let d = rho_j.dim();
    let mut es_j = hermitian_eig(rho_j)?;
    let mut regularized = false;
    let mut sigma = rho_j.clone();
    if es_j.min_eigenvalue() < RANK_TOL {
        match policy {
            SingularPolicy::Refuse => {
                return Err(Error::SingularState {
                    min_eig: es_j.min_eigenvalue(),
                })
            }
            SingularPolicy::Regularize => {
                let mixed = HermitianOperator::identity(d).scale(REGULARIZATION_EPS / d as f64);
                sigma = rho_j.scale(1.0 - REGULARIZATION_EPS).add(&mixed);
                es_j = hermitian_eig(&sigma)?;
                regularized = true;
            }
        }
    }
    check_psd(&es_j, PSD_TOL)?;
    let sqrt_j = es_j.spectral_map(|l| Some(l.sqrt()));
    let inv_sqrt_j = es_j.spectral_map(|l| Some(1.0 / l.sqrt()));
    let middle = matrix_sqrt(&rho_i.sandwich_by(&sqrt_j))?;
    let m = middle.sandwich_by(&inv_sqrt_j);
    let basis = hermitian_eig(&m)?.eigenvectors;

    let e: Vec<f64> = basis
        .iter()
        .map(|v| rho_i.matrix().sandwich(v, v).re.max(0.0))
        .collect();
    let f: Vec<f64> = basis
        .iter()
        .map(|v| sigma.matrix().sandwich(v, v).re.max(0.0))
        .collect();
    let value = e.iter().zip(&f).map(|(x, y)| (x * y).sqrt()).sum();
    Ok(EigenbasisFidelity {
        value,
        e,
        f,
        basis,
        regularized,
    })
}

/// `D(A, B) - [(Tr A + Tr B)/2 - F(A, B)]`, non-negative for PSD inputs.
pub fn fact1_gap(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    let f = fidelity(a, b)?;
    let d = trace_distance(a, b)?;
    Ok(d - (0.5 * (a.trace() + b.trace()) - f))
}
