//! Weighted state ensembles: construction, validation, the `.ens.json` file
//! format and seeded random generation.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::codec::{self, EncodedMatrix};
use crate::linalg::{hermitian_eig, inner, norm, ComplexMatrix, HermitianOperator, PSD_TOL};
use crate::seed::{rng_from_seed, Rng};

/// Allowed `|sum eta - 1|` for a valid ensemble.
pub const PRIOR_SUM_TOL: f64 = 1e-10;
/// Explicit priors within this distance of summing to one are renormalized;
/// anything further is rejected.
pub const PRIOR_RENORMALIZE_WINDOW: f64 = 1e-6;
/// Allowed `|Tr rho - 1|` for each state.
pub const STATE_TRACE_TOL: f64 = 1e-9;

/// Priors `eta_i` with density matrices `rho_i` on a common space.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedEnsemble {
    dim: usize,
    priors: Vec<f64>,
    states: Vec<HermitianOperator>,
}

impl WeightedEnsemble {
    /// Validating constructor. Priors that sum to within `1e-6` of one are
    /// renormalized; every other invariant violation is an error.
    pub fn new(priors: Vec<f64>, states: Vec<HermitianOperator>) -> Result<Self> {
        if priors.len() != states.len() {
            return Err(Error::InvalidPriors(format!(
                "{} priors for {} states",
                priors.len(),
                states.len()
            )));
        }
        let priors = normalize_priors(priors)?;
        let dim = states.first().map_or(0, HermitianOperator::dim);
        let e = Self {
            dim,
            priors,
            states,
        };
        let report = e.validate();
        if !report.is_valid() {
            return Err(Error::Validation(report));
        }
        Ok(e)
    }

    /// Builds without checks; pair with [`WeightedEnsemble::validate`].
    pub fn new_unchecked(priors: Vec<f64>, states: Vec<HermitianOperator>) -> Self {
        let dim = states.first().map_or(0, HermitianOperator::dim);
        Self {
            dim,
            priors,
            states,
        }
    }

    /// Equal priors.
    pub fn uniform(states: Vec<HermitianOperator>) -> Result<Self> {
        let m = states.len();
        Self::new(vec![1.0 / m as f64; m], states)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of states `m`.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn states(&self) -> &[HermitianOperator] {
        &self.states
    }

    /// `eta_i rho_i`.
    pub fn weighted(&self, i: usize) -> HermitianOperator {
        self.states[i].scale(self.priors[i])
    }

    /// `Lambda_ij = eta_j rho_j - eta_i rho_i`.
    pub fn lambda(&self, i: usize, j: usize) -> HermitianOperator {
        self.weighted(j).sub(&self.weighted(i))
    }

    /// Same ensemble with state `first` moved to the front; the others keep
    /// their relative order.
    pub fn with_first(&self, first: usize) -> Self {
        let mut order = vec![first];
        order.extend((0..self.len()).filter(|&k| k != first));
        Self {
            dim: self.dim,
            priors: order.iter().map(|&k| self.priors[k]).collect(),
            states: order.iter().map(|&k| self.states[k].clone()).collect(),
        }
    }

    /// Restricts every state to the span of all supports, `V^dagger rho V`
    /// with `V` an orthonormal basis of the support of `sum rho_i`. The
    /// ensemble is unchanged when the supports already span the space.
    pub fn project_to_joint_support(&self) -> Result<Self> {
        let total = self
            .states
            .iter()
            .skip(1)
            .fold(self.states[0].clone(), |acc, s| acc.add(s));
        let es = hermitian_eig(&total)?;
        let cutoff = crate::linalg::default_eig_threshold(&es);
        let basis: Vec<&Vec<Complex64>> = es
            .eigenvalues
            .iter()
            .zip(&es.eigenvectors)
            .filter(|(l, _)| **l > cutoff)
            .map(|(_, v)| v)
            .collect();
        let k = basis.len();
        if k == self.dim {
            return Ok(self.clone());
        }
        let mut v = ComplexMatrix::zeros(self.dim, k);
        for (c, col) in basis.iter().enumerate() {
            for r in 0..self.dim {
                v[(r, c)] = col[r];
            }
        }
        let vh = v.adjoint();
        let states = self
            .states
            .iter()
            .map(|s| HermitianOperator::from_hermitian_part(&(&(&vh * s.matrix()) * &v)))
            .collect();
        Ok(Self::new_unchecked(self.priors.clone(), states))
    }

    /// Non-fatal observations about the ensemble.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.len() > self.dim {
            w.push(format!(
                "m = {} exceeds dim = {}; the bounds remain evaluable but the setting assumes m <= dim",
                self.len(),
                self.dim
            ));
        }
        w
    }

    /// Lists every violated invariant with its measured residual.
    pub fn validate(&self) -> ValidationReport {
        self.validate_with(PSD_TOL)
    }

    /// As [`WeightedEnsemble::validate`] with a custom relative PSD slack.
    pub fn validate_with(&self, psd_tol: f64) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.states.is_empty() {
            report.push("ensemble has no states", f64::NAN);
            return report;
        }
        if self.priors.len() != self.states.len() {
            report.push(
                format!(
                    "{} priors for {} states",
                    self.priors.len(),
                    self.states.len()
                ),
                (self.priors.len() as f64 - self.states.len() as f64).abs(),
            );
        }
        for (i, &p) in self.priors.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                report.push(format!("prior {i} negative ({p})"), p);
            }
        }
        let sum: f64 = self.priors.iter().sum();
        if sum.is_nan() || (sum - 1.0).abs() > PRIOR_SUM_TOL {
            report.push(format!("priors sum {sum} ≠ 1"), sum - 1.0);
        }
        for (i, s) in self.states.iter().enumerate() {
            if s.dim() != self.dim {
                report.push(
                    format!("state {i} dim {} ≠ {}", s.dim(), self.dim),
                    s.dim() as f64,
                );
                continue;
            }
            let tr = s.trace();
            if tr.is_nan() || (tr - 1.0).abs() > STATE_TRACE_TOL {
                report.push(format!("state {i} trace {tr} ≠ 1"), tr - 1.0);
            }
            match hermitian_eig(s) {
                Ok(es) => {
                    let min = es.min_eigenvalue();
                    if min < -psd_tol * es.max_abs_eigenvalue() {
                        report.push(format!("state {i} not PSD, min eig {min}"), min);
                    }
                }
                Err(e) => report.push(format!("state {i}: {e}"), f64::NAN),
            }
        }
        report
    }

    pub fn to_json(&self) -> String {
        let file = EnsembleFile {
            dim: self.dim,
            priors: self.priors.clone(),
            states: self
                .states
                .iter()
                .map(|s| codec::encode(s.matrix()))
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("ensemble serialization cannot fail")
    }

    /// Parses an `.ens.json` document; shape problems are `Parse` errors and
    /// invariant violations are a `Validation` error listing the residuals.
    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_json_with(text, PSD_TOL)
    }

    pub fn from_json_with(text: &str, psd_tol: f64) -> Result<Self> {
        let file: EnsembleFile = serde_json::from_str(text).map_err(|e| {
            Error::parse(
                format!("line {} column {}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        let mut report = ValidationReport::default();
        let mut states = Vec::with_capacity(file.states.len());
        for (k, enc) in file.states.iter().enumerate() {
            let m = codec::decode_square(enc, file.dim, &format!("states[{k}]"))?;
            match HermitianOperator::new(m.clone()) {
                Ok(h) => states.push(h),
                Err(Error::NonHermitian { residual }) => {
                    report.push(
                        format!("state {k} not Hermitian, residual {residual:e}"),
                        residual,
                    );
                    states.push(HermitianOperator::from_hermitian_part(&m));
                }
                Err(e) => return Err(e),
            }
        }
        let sum: f64 = file.priors.iter().sum();
        let priors = if (sum - 1.0).abs() <= PRIOR_RENORMALIZE_WINDOW
            && file.priors.iter().all(|p| *p >= 0.0)
        {
            normalize_priors(file.priors)?
        } else {
            file.priors
        };
        let mut e = Self::new_unchecked(priors, states);
        e.dim = file.dim;
        report
            .violations
            .extend(e.validate_with(psd_tol).violations);
        if !report.is_valid() {
            return Err(Error::Validation(report));
        }
        Ok(e)
    }
}

pub(crate) fn normalize_priors(priors: Vec<f64>) -> Result<Vec<f64>> {
    if let Some((i, p)) = priors
        .iter()
        .enumerate()
        .find(|(_, p)| !p.is_finite() || **p < 0.0)
    {
        return Err(Error::InvalidPriors(format!("prior {i} negative ({p})")));
    }
    let sum: f64 = priors.iter().sum();
    if sum.is_nan() || (sum - 1.0).abs() > PRIOR_RENORMALIZE_WINDOW {
        return Err(Error::InvalidPriors(format!("priors sum {sum} ≠ 1")));
    }
    // Leave already-normalized priors bit-for-bit alone.
    if (sum - 1.0).abs() <= 1e-14 {
        return Ok(priors);
    }
    Ok(priors.into_iter().map(|p| p / sum).collect())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleFile {
    dim: usize,
    priors: Vec<f64>,
    states: Vec<EncodedMatrix>,
}

/// One violated invariant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub message: String,
    pub residual: f64,
}

/// Result of [`WeightedEnsemble::validate`]; empty means valid.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, message: impl Into<String>, residual: f64) {
        self.violations.push(Violation {
            message: message.into(),
            residual,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msgs: Vec<&str> = self.violations.iter().map(|v| v.message.as_str()).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

fn complex_gaussian(rng: &mut Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// `G G^dagger / Tr(G G^dagger)` for a `dim x rank` complex Ginibre matrix `G`.
pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<HermitianOperator> {
    random_density_from(&mut rng_from_seed(seed), dim, rank)
}

pub fn random_density_from(rng: &mut Rng, dim: usize, rank: usize) -> Result<HermitianOperator> {
    if rank == 0 || rank > dim {
        return Err(Error::InvalidRank { rank, dim });
    }
    let mut g = ComplexMatrix::zeros(dim, rank);
    for r in 0..dim {
        for c in 0..rank {
            g[(r, c)] = complex_gaussian(rng);
        }
    }
    let w = HermitianOperator::from_hermitian_part(&(&g * &g.adjoint()));
    Ok(w.scale(1.0 / w.trace()))
}

/// Haar-random unit vector.
pub fn random_pure_vector(rng: &mut Rng, dim: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
        let n = norm(&v);
        if n > 1e-300 {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

/// Haar-random unitary: Gram-Schmidt on the columns of a Ginibre matrix.
/// Gram-Schmidt produces the QR factor with positive diagonal `R`, which is
/// exactly the Haar measure.
pub fn random_unitary(rng: &mut Rng, dim: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<Complex64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
        for _ in 0..2 {
            for b in &cols {
                let c = inner(b, &v);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= c * bi;
                }
            }
        }
        let n = norm(&v);
        if n > 1e-8 {
            cols.push(v.into_iter().map(|z| z / n).collect());
        }
    }
    let mut u = ComplexMatrix::zeros(dim, dim);
    for (c, col) in cols.iter().enumerate() {
        for r in 0..dim {
            u[(r, c)] = col[r];
        }
    }
    u
}

/// Families of random ensembles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    GinibreFullRank,
    GinibreRankR,
    Pure,
    /// Each state lives on its own coordinate block; satisfies every
    /// exact-attainment condition by construction.
    BlockOrthogonal,
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ginibre_full_rank" => Ok(Self::GinibreFullRank),
            "ginibre_rank_r" => Ok(Self::GinibreRankR),
            "pure" => Ok(Self::Pure),
            "block_orthogonal" => Ok(Self::BlockOrthogonal),
            other => Err(Error::InvalidSpec(format!(
                "unknown generator kind '{other}'"
            ))),
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::GinibreFullRank => "ginibre_full_rank",
            Self::GinibreRankR => "ginibre_rank_r",
            Self::Pure => "pure",
            Self::BlockOrthogonal => "block_orthogonal",
        })
    }
}

/// Prior specification: `"uniform"` or an explicit list.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum PriorSpec {
    #[default]
    Uniform,
    Explicit(Vec<f64>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PriorSpecRepr {
    Named(String),
    Explicit(Vec<f64>),
}

impl Serialize for PriorSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Uniform => PriorSpecRepr::Named("uniform".into()).serialize(s),
            Self::Explicit(v) => PriorSpecRepr::Explicit(v.clone()).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for PriorSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match PriorSpecRepr::deserialize(d)? {
            PriorSpecRepr::Named(n) if n == "uniform" => Ok(Self::Uniform),
            PriorSpecRepr::Named(n) => Err(serde::de::Error::custom(format!(
                "unknown prior spec '{n}'"
            ))),
            PriorSpecRepr::Explicit(v) => Ok(Self::Explicit(v)),
        }
    }
}

impl FromStr for PriorSpec {
    type Err = Error;

    /// `uniform` or a comma-separated list such as `0.5,0.3,0.2`.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "uniform" {
            return Ok(Self::Uniform);
        }
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidPriors(format!("'{t}': {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::Explicit)
    }
}

/// Recipe for a seeded random ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub dim: usize,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default)]
    pub priors: PriorSpec,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, dim: usize, m: usize, seed: u64) -> Self {
        Self {
            kind,
            dim,
            m,
            rank: None,
            priors: PriorSpec::Uniform,
            seed,
        }
    }

    pub fn with_rank(mut self, rank: usize) -> Self {
        self.rank = Some(rank);
        self
    }

    pub fn with_priors(mut self, priors: Vec<f64>) -> Self {
        self.priors = PriorSpec::Explicit(priors);
        self
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut s = self.clone();
        s.seed = seed;
        s
    }

    fn check(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::InvalidSpec(format!("m = {} < 2", self.m)));
        }
        if self.dim == 0 {
            return Err(Error::InvalidSpec("dim = 0".into()));
        }
        if let Some(r) = self.rank {
            if r == 0 || r > self.dim {
                return Err(Error::InvalidRank {
                    rank: r,
                    dim: self.dim,
                });
            }
        }
        Ok(())
    }
}

/// Generates the ensemble described by `spec`; a pure function of `spec`.
pub fn generate(spec: &GeneratorSpec) -> Result<WeightedEnsemble> {
    spec.check()?;
    let mut rng = rng_from_seed(spec.seed);
    let (dim, m) = (spec.dim, spec.m);
    let states = match spec.kind {
        GeneratorKind::GinibreFullRank => (0..m)
            .map(|_| random_density_from(&mut rng, dim, dim))
            .collect::<Result<Vec<_>>>()?,
        GeneratorKind::GinibreRankR => {
            let rank = spec
                .rank
                .ok_or_else(|| Error::InvalidSpec("ginibre_rank_r needs a rank".into()))?;
            (0..m)
                .map(|_| random_density_from(&mut rng, dim, rank))
                .collect::<Result<Vec<_>>>()?
        }
        GeneratorKind::Pure => (0..m)
            .map(|_| random_density_from(&mut rng, dim, 1))
            .collect::<Result<Vec<_>>>()?,
        GeneratorKind::BlockOrthogonal => block_orthogonal_states(&mut rng, dim, m, spec.rank)?,
    };
    let priors = match &spec.priors {
        PriorSpec::Uniform => vec![1.0 / m as f64; m],
        PriorSpec::Explicit(p) => p.clone(),
    };
    WeightedEnsemble::new(priors, states)
}

/// Blocks of size `floor(dim / m)`, the remainder appended to the last block.
fn block_orthogonal_states(
    rng: &mut Rng,
    dim: usize,
    m: usize,
    rank: Option<usize>,
) -> Result<Vec<HermitianOperator>> {
    if dim < m {
        return Err(Error::BlockTooSmall { dim, m });
    }
    let base = dim / m;
    let mut states = Vec::with_capacity(m);
    for i in 0..m {
        let start = i * base;
        let size = if i + 1 == m { dim - start } else { base };
        let r = rank.unwrap_or(size).min(size);
        let block = random_density_from(rng, size, r)?;
        let mut full = ComplexMatrix::zeros(dim, dim);
        for r in 0..size {
            for c in 0..size {
                full[(start + r, start + c)] = block.matrix()[(r, c)];
            }
        }
        states.push(HermitianOperator::from_hermitian_part(&full));
    }
    Ok(states)
}
