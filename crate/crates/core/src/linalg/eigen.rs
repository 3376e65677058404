//! Hermitian operators and their eigendecomposition by cyclic complex Jacobi.
//!
//! Each rotation first removes the phase of the pivot `a_pq = r e^{i phi}` with a
//! diagonal unitary and then applies the classical real Jacobi rotation to the
//! resulting real symmetric 2x2 block. Sweeps visit `(p, q)` in row-major order
//! so the result depends only on the input.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Default entrywise Hermiticity tolerance for user-supplied operators.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Default sweep budget for the Jacobi solver.
pub const MAX_SWEEPS: usize = 100;

/// A square complex matrix that is Hermitian within [`HERMITICITY_TOL`].
///
/// The stored matrix is always exactly Hermitian: construction replaces the
/// input by its Hermitian part once the tolerance check passes.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, HERMITICITY_TOL)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let residual = matrix.hermiticity_residual();
        if residual.is_nan() || residual > tol {
            return Err(Error::NonHermitian { residual });
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
        })
    }

    /// Takes the Hermitian part of a matrix that is Hermitian up to roundoff
    /// (products such as `A^{1/2} B A^{1/2}`).
    pub fn from_hermitian_part(matrix: &ComplexMatrix) -> Self {
        Self {
            matrix: matrix.hermitian_part(),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self {
            matrix: ComplexMatrix::from_diagonal(diag),
        }
    }

    /// Rank-one projector `|v><v| / <v|v>`.
    pub fn pure(v: &[Complex64]) -> Self {
        let n = super::matrix::norm(v);
        let scaled: Vec<Complex64> = v.iter().map(|z| z / n).collect();
        Self::from_hermitian_part(&ComplexMatrix::outer(&scaled))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            matrix: self.matrix.scale(s),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix - &other.matrix,
        }
    }

    /// `Re Tr(self * other)`; exact trace for a Hermitian pair.
    pub fn trace_product(&self, other: &Self) -> f64 {
        self.matrix.trace_product(&other.matrix).re
    }

    /// `U self U^dagger`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self::from_hermitian_part(&(&(u * &self.matrix) * &u.adjoint()))
    }

    /// `X self X` for Hermitian `X`.
    pub fn sandwich_by(&self, x: &Self) -> Self {
        Self::from_hermitian_part(&(&(&x.matrix * &self.matrix) * &x.matrix))
    }

    pub fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

/// Eigenvalues sorted descending with matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` is the unit eigenvector for `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<Complex64>>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `sum_k f(lambda_k) |v_k><v_k|` over eigenpairs where `f` returns `Some`.
    pub fn spectral_map(&self, mut f: impl FnMut(f64) -> Option<f64>) -> HermitianOperator {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            let Some(w) = f(*lambda) else { continue };
            if w == 0.0 {
                continue;
            }
            for r in 0..n {
                let vr = v[r] * w;
                for c in 0..n {
                    out[(r, c)] += vr * v[c].conj();
                }
            }
        }
        HermitianOperator::from_hermitian_part(&out)
    }

    pub fn reconstruct(&self) -> HermitianOperator {
        self.spectral_map(Some)
    }
}

/// Full eigendecomposition of a Hermitian operator.
pub fn hermitian_eig(h: &HermitianOperator) -> Result<EigenSystem> {
    hermitian_eig_with(h, MAX_SWEEPS)
}

pub fn hermitian_eig_with(h: &HermitianOperator, max_sweeps: usize) -> Result<EigenSystem> {
    let n = h.dim();
    let mut a = h.matrix().clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();

    if n > 1 && scale > 0.0 {
        let target = f64::EPSILON * scale;
        let mut converged = false;
        for _ in 0..max_sweeps {
            let off = off_diagonal_norm(&a);
            if off <= target {
                converged = true;
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
        if !converged {
            let off = off_diagonal_norm(&a);
            if off > target {
                return Err(Error::NoConvergence {
                    sweeps: max_sweeps,
                    off_norm: off,
                });
            }
        }
    }

    let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..n)
        .map(|k| {
            let mut col = v.column(k);
            fix_phase(&mut col);
            (a[(k, k)].re, col)
        })
        .collect();
    // Stable sort keeps ties in column order, so the output is reproducible.
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let (eigenvalues, eigenvectors) = pairs.into_iter().unzip();
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                s += a[(r, c)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation annihilating `a[p][q]`; accumulates the rotation into `v`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Skip pivots that are negligible against both diagonal entries.
    if app.abs() + 100.0 * r == app.abs() && aqq.abs() + 100.0 * r == aqq.abs() {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = apq / r; // e^{i phi}
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // J = diag-phase * real rotation, restricted to the (p, q) plane:
    // [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
    let ph = phase.conj();
    let jpp = Complex64::new(c, 0.0);
    let jpq = Complex64::new(s, 0.0);
    let jqp = ph * (-s);
    let jqq = ph * c;

    let n = a.rows();
    // A <- A J
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    // A <- J^dagger A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
    // V <- V J
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

/// Rotates `v` so its first non-negligible component is real and positive.
fn fix_phase(v: &mut [Complex64]) {
    const NONZERO: f64 = 1e-12;
    if let Some(first) = v.iter().copied().find(|z| z.norm() > NONZERO) {
        let rot = first.conj() / first.norm();
        for z in v.iter_mut() {
            *z *= rot;
        }
        if let Some(z) = v.iter_mut().find(|z| z.norm() > NONZERO) {
            z.im = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::inner;
    use crate::seed::rng_from_seed;
    use rand_distr::{Distribution, StandardNormal};

    fn random_hermitian(n: usize, seed: u64) -> HermitianOperator {
        let mut rng = rng_from_seed(seed);
        let mut m = ComplexMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                m[(r, c)] = Complex64::new(re, im);
            }
        }
        HermitianOperator::from_hermitian_part(&m)
    }

    fn check_invariants(h: &HermitianOperator, es: &EigenSystem) {
        let recon = es.reconstruct();
        let err = (h.matrix() - recon.matrix()).frobenius_norm();
        assert!(
            err <= 1e-9 * h.matrix().frobenius_norm().max(1.0),
            "reconstruction {err}"
        );
        for j in 0..es.dim() {
            for k in 0..es.dim() {
                let ip = inner(&es.eigenvectors[j], &es.eigenvectors[k]);
                let target = if j == k { 1.0 } else { 0.0 };
                assert!((ip - Complex64::new(target, 0.0)).norm() <= 1e-9);
            }
        }
        for w in es.eigenvalues.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn diagonal_input() {
        let h = HermitianOperator::from_diagonal(&[3.0, 1.0]);
        let es = hermitian_eig(&h).unwrap();
        assert_eq!(es.eigenvalues, vec![3.0, 1.0]);
        assert_eq!(
            es.eigenvectors[0],
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
        );
        assert_eq!(
            es.eigenvectors[1],
            vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
        );
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = HermitianOperator::new(
            ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap(),
        )
        .unwrap();
        let es = hermitian_eig(&x).unwrap();
        assert!((es.eigenvalues[0] - 1.0).abs() < 1e-15);
        assert!((es.eigenvalues[1] + 1.0).abs() < 1e-15);
        check_invariants(&x, &es);
    }

    #[test]
    fn pauli_y_has_complex_eigenvectors() {
        let i = Complex64::new(0.0, 1.0);
        let y = ComplexMatrix::from_rows(&[vec![0.0.into(), -i], vec![i, 0.0.into()]]).unwrap();
        let y = HermitianOperator::new(y).unwrap();
        let es = hermitian_eig(&y).unwrap();
        assert!((es.eigenvalues[0] - 1.0).abs() < 1e-15);
        check_invariants(&y, &es);
    }

    #[test]
    fn random_five_by_five_seed_42() {
        let h = random_hermitian(5, 42);
        let es = hermitian_eig(&h).unwrap();
        check_invariants(&h, &es);
    }

    #[test]
    fn deterministic_and_sign_convention() {
        let h = random_hermitian(6, 3);
        let a = hermitian_eig(&h).unwrap();
        let b = hermitian_eig(&h).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.eigenvectors, b.eigenvectors);
        for v in &a.eigenvectors {
            let first = v.iter().find(|z| z.norm() > 1e-12).unwrap();
            assert_eq!(first.im, 0.0);
            assert!(first.re > 0.0);
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let h = HermitianOperator::identity(4).scale(2.5);
        let es = hermitian_eig(&h).unwrap();
        assert!(es.eigenvalues.iter().all(|&l| l == 2.5));
        check_invariants(&h, &es);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::NonHermitian { .. })
        ));
    }

    #[test]
    fn sweep_budget_exhaustion() {
        let h = random_hermitian(6, 9);
        assert!(matches!(
            hermitian_eig_with(&h, 1),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn many_random_sizes() {
        for (seed, n) in (0..40).zip((1..=12).cycle()) {
            let h = random_hermitian(n, seed);
            let es = hermitian_eig(&h).unwrap();
            check_invariants(&h, &es);
        }
    }
}
