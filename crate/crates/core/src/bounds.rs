//! Closed-form bounds on the minimum-error probability and the identities
//! behind them, assembled into a single report.

use serde::Serialize;

use crate::ensemble::WeightedEnsemble;
use crate::error::{Error, Result};
use crate::linalg::{fidelity, fidelity_asymmetry, jordan_decompose, FIDELITY_ASYMMETRY_WARN};
use crate::measurement::{
    attainment_residual, check_conditions_with, ConditionReport, Povm, ORTHO_TOL,
};

/// Negativity of the raw lower bound beyond this is reported, not just clamped.
pub const LOWER_BOUND_CLAMP_TOL: f64 = 1e-9;
/// Tolerance for the internal eigenvalue identity check.
pub const EIGEN_IDENTITY_TOL: f64 = 1e-9;
/// Tolerance for the prior identity check.
pub const PRIOR_IDENTITY_TOL: f64 = 1e-12;
/// Slack for the unambiguous-discrimination inequality.
pub const INEQ122_TOL: f64 = 1e-8;

/// `Tr|Lambda_ij|` for one pair (0-based `i < j`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairTraceNorm {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

pub fn pairwise_trace_norms(e: &WeightedEnsemble) -> Result<Vec<PairTraceNorm>> {
    Ok(pair_data(e)?.into_iter().map(|p| p.norm).collect())
}

struct PairData {
    norm: PairTraceNorm,
    pos_sum: f64,
}

fn pair_data(e: &WeightedEnsemble) -> Result<Vec<PairData>> {
    let m = e.len();
    let mut out = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in i + 1..m {
            let jd = jordan_decompose(&e.lambda(i, j))?;
            out.push(PairData {
                norm: PairTraceNorm {
                    i,
                    j,
                    value: jd.trace_norm(),
                },
                pos_sum: jd.pos_eigenvalues.iter().sum(),
            });
        }
    }
    Ok(out)
}

fn check_m(e: &WeightedEnsemble) -> Result<()> {
    if e.len() < 2 {
        return Err(Error::InvalidSpec(format!(
            "need at least 2 states, got {}",
            e.len()
        )));
    }
    Ok(())
}

/// Raw value `1/2 (1 - (1/(m-1)) sum_{i<j} Tr|Lambda_ij|)`.
fn lower_from_norms(norms: &[PairTraceNorm], m: usize) -> f64 {
    let s: f64 = norms.iter().map(|p| p.value).sum();
    0.5 * (1.0 - s / (m as f64 - 1.0))
}

fn clamp_lower(raw: f64, warnings: &mut Vec<String>) -> f64 {
    if raw < -LOWER_BOUND_CLAMP_TOL {
        warnings.push(format!(
            "pairwise lower bound negative ({raw:e}) beyond roundoff; clamped to 0"
        ));
    }
    raw.max(0.0)
}

/// Lower bound on the minimum-error probability, clamped at zero.
pub fn pairwise_lower_bound(e: &WeightedEnsemble) -> Result<f64> {
    check_m(e)?;
    let norms = pairwise_trace_norms(e)?;
    Ok(lower_from_norms(&norms, e.len()).max(0.0))
}

/// `1/2 (1 - Tr|eta_2 rho_2 - eta_1 rho_1|)`.
pub fn helstrom_value(e: &WeightedEnsemble) -> Result<f64> {
    if e.len() != 2 {
        return Err(Error::WrongStateCount { found: e.len() });
    }
    pairwise_lower_bound(e)
}

/// Conditional upper bound with the conditions that certify it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpperBound {
    pub value: f64,
    pub certified: bool,
    /// Index (0-based, in the caller's ordering) of the state treated as `rho_1`.
    pub first: usize,
    pub conditions: ConditionReport,
}

pub fn upper_bound_theorem3(e: &WeightedEnsemble) -> Result<UpperBound> {
    upper_bound_with(e, ORTHO_TOL)
}

/// `q_lower + (1/(2(m-1))) sum_{2<=i<j<=m} (eta_i + eta_1 - Tr|Lambda_1i|)`,
/// with state `0` as `rho_1`. Returned even when uncertified.
pub fn upper_bound_with(e: &WeightedEnsemble, ortho_tol: f64) -> Result<UpperBound> {
    check_m(e)?;
    let norms = pairwise_trace_norms(e)?;
    let conditions = check_conditions_with(e, ortho_tol)?;
    Ok(UpperBound {
        value: upper_from_norms(e, &norms),
        certified: conditions.upper_bound_certified(),
        first: 0,
        conditions,
    })
}

fn upper_from_norms(e: &WeightedEnsemble, norms: &[PairTraceNorm]) -> f64 {
    let m = e.len();
    let eta = e.priors();
    let lower = lower_from_norms(norms, m).max(0.0);
    // norms[i - 1] is the (0, i) pair; the term for i appears once per j > i
    let correction: f64 = (1..m.saturating_sub(1))
        .map(|i| (m - 1 - i) as f64 * (eta[i] + eta[0] - norms[i - 1].value))
        .sum();
    lower + correction / (2.0 * (m as f64 - 1.0))
}

/// Tries every choice of distinguished state and keeps the smallest certified
/// bound; if none certifies, returns the bound for the original ordering.
pub fn upper_bound_best_first(e: &WeightedEnsemble, ortho_tol: f64) -> Result<UpperBound> {
    let mut best: Option<UpperBound> = None;
    for k in 0..e.len() {
        let mut ub = upper_bound_with(&e.with_first(k), ortho_tol)?;
        ub.first = k;
        if ub.certified && best.as_ref().is_none_or(|b| ub.value < b.value) {
            best = Some(ub);
        }
    }
    match best {
        Some(b) => Ok(b),
        None => upper_bound_with(e, ortho_tol),
    }
}

/// Fidelity-based lower bounds on the unambiguous failure probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UnambiguousBounds {
    /// `sqrt((m/(m-1)) sum_{i!=j} eta_i eta_j F_ij^2)`.
    pub feng: f64,
    /// `(2/(m-1)) sum_{i<j} sqrt(eta_i eta_j) F_ij`.
    pub pairwise: f64,
}

pub fn unambiguous_lower_bounds(e: &WeightedEnsemble) -> Result<UnambiguousBounds> {
    check_m(e)?;
    let (b, _) = unambiguous_with_warnings(e)?;
    Ok(b)
}

fn unambiguous_with_warnings(e: &WeightedEnsemble) -> Result<(UnambiguousBounds, Vec<String>)> {
    let m = e.len();
    let eta = e.priors();
    let mut sq = 0.0;
    let mut lin = 0.0;
    let mut warnings = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let (a, b) = (&e.states()[i], &e.states()[j]);
            let f = fidelity(a, b)?;
            let asym = fidelity_asymmetry(a, b)?;
            if asym > FIDELITY_ASYMMETRY_WARN {
                warnings.push(format!("fidelity of states {i},{j} asymmetric by {asym:e}"));
            }
            sq += 2.0 * eta[i] * eta[j] * f * f;
            lin += (eta[i] * eta[j]).sqrt() * f;
        }
    }
    let k = m as f64 - 1.0;
    Ok((
        UnambiguousBounds {
            feng: (m as f64 / k * sq).sqrt(),
            pairwise: 2.0 / k * lin,
        },
        warnings,
    ))
}

/// Relation between the unambiguous bound and twice the ambiguous one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Theorem4Check {
    /// `(1/(m-1)) sum Tr|Lambda_ij| + (2/(m-1)) sum sqrt(eta_i eta_j) F_ij`.
    pub lhs122: f64,
    pub holds: bool,
    pub two_qa: f64,
    pub qu_pairwise: f64,
}

pub fn theorem4_check(e: &WeightedEnsemble) -> Result<Theorem4Check> {
    check_m(e)?;
    let norms = pairwise_trace_norms(e)?;
    let ub = unambiguous_lower_bounds(e)?;
    Ok(theorem4_from(&norms, e.len(), &ub))
}

fn theorem4_from(norms: &[PairTraceNorm], m: usize, ub: &UnambiguousBounds) -> Theorem4Check {
    let s: f64 = norms.iter().map(|p| p.value).sum();
    let lhs122 = s / (m as f64 - 1.0) + ub.pairwise;
    Theorem4Check {
        lhs122,
        holds: lhs122 >= 1.0 - INEQ122_TOL,
        two_qa: 2.0 * lower_from_norms(norms, m).max(0.0),
        qu_pairwise: ub.pairwise,
    }
}

/// Every bound and identity for one ensemble.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsReport {
    pub m: usize,
    pub dim: usize,
    pub pairwise_trace_norms: Vec<PairTraceNorm>,
    pub q_lower: f64,
    pub helstrom: Option<f64>,
    pub q_upper_t3: Option<UpperBound>,
    pub qu_lower_feng: f64,
    pub qu_lower_pairwise: f64,
    pub ineq122_lhs: f64,
    pub ineq122_holds: bool,
    /// Attainment identity residual for the supplied POVM.
    pub attainment_gap: Option<f64>,
    /// Minimum-error probability from the numerical oracle, when run.
    pub oracle_q: Option<f64>,
    pub eigen_identity_residual: f64,
    pub prior_identity_residual: f64,
    pub warnings: Vec<String>,
}

/// Options for [`full_report_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReportOptions {
    pub ortho_tol: f64,
    pub best_first: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            ortho_tol: ORTHO_TOL,
            best_first: false,
        }
    }
}

pub fn full_report(e: &WeightedEnsemble, povm: Option<&Povm>) -> Result<BoundsReport> {
    full_report_with(e, povm, ReportOptions::default())
}

pub fn full_report_with(
    e: &WeightedEnsemble,
    povm: Option<&Povm>,
    opts: ReportOptions,
) -> Result<BoundsReport> {
    check_m(e)?;
    let m = e.len();
    let scale = 1.0 / (m as f64 - 1.0);
    let eta = e.priors();
    let mut warnings = e.warnings();

    let pairs = pair_data(e)?;
    let norms: Vec<PairTraceNorm> = pairs.iter().map(|p| p.norm).collect();
    for p in &norms {
        let ceiling = eta[p.i] + eta[p.j];
        if p.value > ceiling + 1e-9 {
            warnings.push(format!(
                "Tr|Lambda_{},{}| = {} exceeds eta_i + eta_j = {}",
                p.i, p.j, p.value, ceiling
            ));
        }
    }
    let q_lower = clamp_lower(lower_from_norms(&norms, m), &mut warnings);

    let prior_sum: f64 = norms.iter().map(|p| eta[p.i] + eta[p.j]).sum();
    let prior_identity_residual = (scale * prior_sum - 1.0).abs();
    if prior_identity_residual > PRIOR_IDENTITY_TOL {
        warnings.push(format!(
            "prior identity residual {prior_identity_residual:e}"
        ));
    }
    let norm_sum: f64 = norms.iter().map(|p| p.value).sum();
    let eig_side: f64 = pairs.iter().map(|p| eta[p.norm.i] + p.pos_sum).sum();
    let eigen_identity_residual = (0.5 * (1.0 + scale * norm_sum) - scale * eig_side).abs();
    if eigen_identity_residual > EIGEN_IDENTITY_TOL {
        warnings.push(format!(
            "eigenvalue identity residual {eigen_identity_residual:e}"
        ));
    }

    let helstrom = (m == 2).then_some(q_lower);
    let q_upper_t3 = Some(if opts.best_first {
        upper_bound_best_first(e, opts.ortho_tol)?
    } else {
        let conditions = check_conditions_with(e, opts.ortho_tol)?;
        UpperBound {
            value: upper_from_norms(e, &norms),
            certified: conditions.upper_bound_certified(),
            first: 0,
            conditions,
        }
    });

    let (ub, fid_warnings) = unambiguous_with_warnings(e)?;
    warnings.extend(fid_warnings);
    let t4 = theorem4_from(&norms, m, &ub);
    if !t4.holds {
        warnings.push(format!("unambiguous inequality fails: lhs {}", t4.lhs122));
    }
    let attainment_gap = povm.map(|p| attainment_residual(e, p)).transpose()?;

    Ok(BoundsReport {
        m,
        dim: e.dim(),
        pairwise_trace_norms: norms,
        q_lower,
        helstrom,
        q_upper_t3,
        qu_lower_feng: ub.feng,
        qu_lower_pairwise: ub.pairwise,
        ineq122_lhs: t4.lhs122,
        ineq122_holds: t4.holds,
        attainment_gap,
        oracle_q: None,
        eigen_identity_residual,
        prior_identity_residual,
        warnings,
    })
}

/// Column names of the flat CSV form of a report.
pub const CSV_COLUMNS: [&str; 12] = [
    "id",
    "m",
    "dim",
    "q_lower",
    "helstrom",
    "q_upper_t3",
    "cond_pass",
    "qu_feng",
    "qu_pairwise",
    "ineq122_lhs",
    "oracle_q",
    "attainment_gap",
];

impl BoundsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// One CSV record aligned with [`CSV_COLUMNS`]; absent values are empty.
    /// `cond_pass` is whether the upper bound is certified.
    pub fn csv_record(&self, id: &str) -> Vec<String> {
        fn opt(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        vec![
            id.to_string(),
            self.m.to_string(),
            self.dim.to_string(),
            self.q_lower.to_string(),
            opt(self.helstrom),
            opt(self.q_upper_t3.as_ref().map(|u| u.value)),
            self.q_upper_t3
                .as_ref()
                .is_some_and(|u| u.certified)
                .to_string(),
            self.qu_lower_feng.to_string(),
            self.qu_lower_pairwise.to_string(),
            self.ineq122_lhs.to_string(),
            opt(self.oracle_q),
            opt(self.attainment_gap),
        ]
    }
}
