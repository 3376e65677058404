//! POVMs, their evaluation, the explicit constructions and optimality checks.

mod subspaces;

pub use subspaces::{
    attainment_residual, check_conditions_with, check_corollary1_conditions,
    check_theorem2_conditions, compute_subspaces, theorem2_povm, theorem2_povm_with,
    ConditionCheck, ConditionReport, PairSubspaces, SubspaceProjector, SubspaceReport, ORTHO_TOL,
    S_K_DROP_TOL,
};

use serde::{Deserialize, Serialize};

use crate::ensemble::{random_density_from, WeightedEnsemble};
use crate::error::{Error, Result};
use crate::linalg::codec::{self, EncodedMatrix};
use crate::linalg::{
    hermitian_eig, jordan_decompose, pinv_sqrt, ComplexMatrix, HermitianOperator, PSD_TOL,
};
use crate::seed::Rng;

/// Allowed `||sum Pi_i - I||_F`.
pub const COMPLETENESS_TOL: f64 = 1e-8;
/// Default slack for the optimality certificate.
pub const CERT_TOL: f64 = 1e-7;
/// `||M - M^dagger||_F` above this means the POVM is not optimal.
pub const CERT_ASYMMETRY_TOL: f64 = 1e-6;

/// Positive operators `Pi_i` resolving the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    dim: usize,
    elements: Vec<HermitianOperator>,
}

impl Povm {
    /// Checks positivity (absolute slack `1e-8`) and completeness.
    pub fn new(elements: Vec<HermitianOperator>) -> Result<Self> {
        let p = Self::new_unchecked(elements);
        p.check(PSD_TOL)?;
        Ok(p)
    }

    pub fn new_unchecked(elements: Vec<HermitianOperator>) -> Self {
        let dim = elements.first().map_or(0, HermitianOperator::dim);
        Self { dim, elements }
    }

    /// Verifies the POVM invariants with the given positivity slack.
    pub fn check(&self, psd_tol: f64) -> Result<()> {
        if self.elements.is_empty() {
            return Err(Error::InvalidPovm("no elements".into()));
        }
        for (i, el) in self.elements.iter().enumerate() {
            if el.dim() != self.dim {
                return Err(Error::InvalidPovm(format!(
                    "element {i} dim {} ≠ {}",
                    el.dim(),
                    self.dim
                )));
            }
            let min = hermitian_eig(el)?.min_eigenvalue();
            if min < -psd_tol {
                return Err(Error::InvalidPovm(format!(
                    "element {i} not PSD, min eig {min}"
                )));
            }
        }
        let r = self.completeness_residual();
        if r > COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity only within {r:e}"
            )));
        }
        Ok(())
    }

    /// `||sum Pi_i - I||_F`.
    pub fn completeness_residual(&self) -> f64 {
        let sum = self
            .elements
            .iter()
            .fold(HermitianOperator::zeros(self.dim), |acc, el| acc.add(el));
        (sum.matrix() - &ComplexMatrix::identity(self.dim)).frobenius_norm()
    }

    /// Smallest eigenvalue over all elements.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        self.elements
            .iter()
            .map(|el| hermitian_eig(el).map(|es| es.min_eigenvalue()))
            .try_fold(f64::INFINITY, |acc, m| m.map(|m| acc.min(m)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<HermitianOperator> {
        self.elements
    }

    pub fn to_json(&self) -> String {
        let file = PovmFile {
            dim: self.dim,
            elements: self
                .elements
                .iter()
                .map(|el| codec::encode(el.matrix()))
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("POVM serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PovmFile = serde_json::from_str(text).map_err(|e| {
            Error::parse(
                format!("line {} column {}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        let elements = file
            .elements
            .iter()
            .enumerate()
            .map(|(k, enc)| {
                let m = codec::decode_square(enc, file.dim, &format!("elements[{k}]"))?;
                HermitianOperator::new(m)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut p = Self::new_unchecked(elements);
        p.dim = file.dim;
        p.check(PSD_TOL)?;
        Ok(p)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PovmFile {
    dim: usize,
    elements: Vec<EncodedMatrix>,
}

fn check_compatible(e: &WeightedEnsemble, p: &Povm) -> Result<()> {
    if e.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found: p.dim(),
        });
    }
    if e.len() != p.len() {
        return Err(Error::CountMismatch {
            states: e.len(),
            outcomes: p.len(),
        });
    }
    Ok(())
}

/// `sum_i eta_i Tr(rho_i Pi_i)`.
pub fn success_probability(e: &WeightedEnsemble, p: &Povm) -> Result<f64> {
    check_compatible(e, p)?;
    Ok(e.priors()
        .iter()
        .zip(e.states())
        .zip(p.elements())
        .map(|((eta, rho), pi)| eta * rho.trace_product(pi))
        .sum())
}

/// `1 - sum_i eta_i Tr(rho_i Pi_i)`, unclamped.
pub fn error_probability(e: &WeightedEnsemble, p: &Povm) -> Result<f64> {
    Ok(1.0 - success_probability(e, p)?)
}

/// Two-state optimum: `Pi_2` projects onto the positive eigenspace of
/// `eta_2 rho_2 - eta_1 rho_1`, `Pi_1 = I - Pi_2`.
pub fn helstrom_povm(e: &WeightedEnsemble) -> Result<Povm> {
    if e.len() != 2 {
        return Err(Error::WrongStateCount { found: e.len() });
    }
    let pi2 = jordan_decompose(&e.lambda(0, 1))?.pos_projector;
    let pi1 = HermitianOperator::identity(e.dim()).sub(&pi2);
    Povm::new(vec![pi1, pi2])
}

/// Outcome of [`hykl_certificate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub optimal: bool,
    /// Smallest eigenvalue of `M - eta_j rho_j` over all `j`.
    pub worst_min_eig: f64,
    /// `||M - M^dagger||_F` before symmetrization.
    pub asymmetry: f64,
}

pub fn hykl_certificate(e: &WeightedEnsemble, p: &Povm) -> Result<Certificate> {
    hykl_certificate_with(e, p, CERT_TOL)
}

/// Optimality test: with `M = sum_i eta_i rho_i Pi_i`, the POVM is optimal iff
/// `M` is Hermitian and `M - eta_j rho_j >= 0` for every `j`.
pub fn hykl_certificate_with(e: &WeightedEnsemble, p: &Povm, cert_tol: f64) -> Result<Certificate> {
    check_compatible(e, p)?;
    let d = e.dim();
    let mut m = ComplexMatrix::zeros(d, d);
    for (i, pi) in p.elements().iter().enumerate() {
        m = &m + &(e.weighted(i).matrix() * pi.matrix());
    }
    let asymmetry = (&m - &m.adjoint()).frobenius_norm();
    let sym = HermitianOperator::from_hermitian_part(&m);
    let mut worst = f64::INFINITY;
    for j in 0..e.len() {
        worst = worst.min(hermitian_eig(&sym.sub(&e.weighted(j)))?.min_eigenvalue());
    }
    Ok(Certificate {
        optimal: asymmetry <= CERT_ASYMMETRY_TOL && worst >= -cert_tol,
        worst_min_eig: worst,
        asymmetry,
    })
}

/// Random full-rank POVM: `Pi_i = S^{-1/2} A_i S^{-1/2}` for Ginibre `A_i`
/// with `S = sum A_i`.
pub fn random_povm(rng: &mut Rng, dim: usize, m: usize) -> Result<Povm> {
    let a: Vec<HermitianOperator> = (0..m)
        .map(|_| random_density_from(rng, dim, dim))
        .collect::<Result<_>>()?;
    let s = a
        .iter()
        .fold(HermitianOperator::zeros(dim), |acc, x| acc.add(x));
    let (inv, _) = pinv_sqrt(&s)?;
    Povm::new(a.iter().map(|x| x.sandwich_by(&inv)).collect())
}
