//! Numerical minimum-error optimum, independent of the closed-form bounds.
//!
//! The optimizer is the fixed-point iteration
//! `Pi_i <- M^{-1/2} G_i Pi_i G_i M^{-1/2}` with `G_i = eta_i rho_i` and
//! `M = sum_j G_j Pi_j G_j`. The inverse square root acts on the support of
//! `M`; the complement is shared equally among the outcomes so the identity
//! stays resolved.

use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::{generate, GeneratorSpec, WeightedEnsemble};
use crate::error::{Error, Result};
use crate::linalg::codec::{self, EncodedMatrix};
use crate::linalg::{pinv_sqrt, HermitianOperator};
use crate::measurement::{
    attainment_residual, check_corollary1_conditions, error_probability, hykl_certificate_with,
    random_povm, theorem2_povm, Certificate, ConditionReport, Povm, CERT_TOL,
};
use crate::seed::{derive_seed, rng_from_seed};

/// Success-probability drops larger than this abort the iteration.
pub const PROGRESS_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleOptions {
    pub max_iters: usize,
    /// Stop once the success probability changes by less than this.
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Slack passed to the optimality certificate.
    pub cert_tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            tol: 1e-9,
            restarts: 8,
            seed: 0,
            cert_tol: CERT_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub q_star: f64,
    pub povm: Povm,
    /// Iterations spent by the winning restart.
    pub iterations: usize,
    pub certificate: Certificate,
    pub restarts_used: usize,
    /// Index of the winning restart.
    pub best_restart: usize,
}

#[derive(Serialize)]
struct OracleResultJson<'a> {
    q_star: f64,
    iterations: usize,
    certificate: &'a Certificate,
    restarts_used: usize,
    best_restart: usize,
    povm: PovmJson,
}

#[derive(Serialize)]
struct PovmJson {
    dim: usize,
    elements: Vec<EncodedMatrix>,
}

impl OracleResult {
    pub fn to_json(&self) -> String {
        let j = OracleResultJson {
            q_star: self.q_star,
            iterations: self.iterations,
            certificate: &self.certificate,
            restarts_used: self.restarts_used,
            best_restart: self.best_restart,
            povm: PovmJson {
                dim: self.povm.dim(),
                elements: self
                    .povm
                    .elements()
                    .iter()
                    .map(|e| codec::encode(e.matrix()))
                    .collect(),
            },
        };
        serde_json::to_string_pretty(&j).expect("oracle result serialization cannot fail")
    }
}

struct Run {
    success: f64,
    povm: Povm,
    iterations: usize,
}

fn success(weighted: &[HermitianOperator], elements: &[HermitianOperator]) -> f64 {
    weighted
        .iter()
        .zip(elements)
        .map(|(g, p)| g.trace_product(p))
        .sum()
}

/// Once the objective has settled, the certificate is re-checked at most this
/// often; the iteration stops only when both agree.
const CERT_CHECK_EVERY: usize = 25;

fn iterate(
    e: &WeightedEnsemble,
    weighted: &[HermitianOperator],
    start: Vec<HermitianOperator>,
    opts: &OracleOptions,
) -> Result<Run> {
    let m = weighted.len();
    let d = weighted[0].dim();
    let mut elements = start;
    let mut p = success(weighted, &elements);
    let mut iterations = 0;
    let mut last_cert = 0;
    while iterations < opts.max_iters {
        iterations += 1;
        let t: Vec<HermitianOperator> = elements
            .iter()
            .zip(weighted)
            .map(|(pi, g)| pi.sandwich_by(g))
            .collect();
        let big_m = t
            .iter()
            .fold(HermitianOperator::zeros(d), |acc, x| acc.add(x));
        let (inv, support) = pinv_sqrt(&big_m)?;
        let fill = HermitianOperator::identity(d)
            .sub(&support)
            .scale(1.0 / m as f64);
        let next: Vec<HermitianOperator> =
            t.iter().map(|x| x.sandwich_by(&inv).add(&fill)).collect();
        let q = success(weighted, &next);
        let change = q - p;
        if change < -PROGRESS_TOL {
            return Err(Error::NoProgress {
                iteration: iterations,
                drop: -change,
            });
        }
        if change < 0.0 {
            // roundoff-level decrease: already at the fixed point
            break;
        }
        elements = next;
        p = q;
        if change < opts.tol && (iterations == 1 || iterations - last_cert >= CERT_CHECK_EVERY) {
            last_cert = iterations;
            let p = Povm::new_unchecked(elements.clone());
            if hykl_certificate_with(e, &p, opts.cert_tol)?.optimal {
                break;
            }
        }
    }
    Ok(Run {
        success: p,
        povm: Povm::new_unchecked(elements),
        iterations,
    })
}

/// Best fixed point over `opts.restarts` starts. Restart 0 begins at
/// `Pi_i = I/m`; the others at seeded random full-rank POVMs. Restarts run
/// in parallel and are merged by value, ties going to the lower index.
pub fn optimize_min_error(e: &WeightedEnsemble, opts: &OracleOptions) -> Result<OracleResult> {
    let m = e.len();
    let d = e.dim();
    let weighted: Vec<HermitianOperator> = (0..m).map(|i| e.weighted(i)).collect();
    let restarts = opts.restarts.max(1);
    let runs: Vec<Result<Run>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                vec![HermitianOperator::identity(d).scale(1.0 / m as f64); m]
            } else {
                let mut rng = rng_from_seed(derive_seed(opts.seed, "oracle", r as u64));
                random_povm(&mut rng, d, m)?.into_elements()
            };
            iterate(e, &weighted, start, opts)
        })
        .collect();
    let mut best: Option<(usize, Run)> = None;
    for (r, run) in runs.into_iter().enumerate() {
        let run = run?;
        if best.as_ref().is_none_or(|(_, b)| run.success > b.success) {
            best = Some((r, run));
        }
    }
    let (best_restart, run) = best.expect("at least one restart");
    run.povm.check(1e-8)?;
    let q_star = error_probability(e, &run.povm)?.clamp(0.0, 1.0);
    let certificate = hykl_certificate_with(e, &run.povm, opts.cert_tol)?;
    Ok(OracleResult {
        q_star,
        povm: run.povm,
        iterations: run.iterations,
        certificate,
        restarts_used: restarts,
        best_restart,
    })
}

/// `Pi_i = S^{-1/2} eta_i rho_i S^{-1/2}` with `S = sum_j eta_j rho_j`; the
/// complement of the support of `S` goes to the first outcome.
pub fn square_root_measurement(e: &WeightedEnsemble) -> Result<Povm> {
    let d = e.dim();
    let weighted: Vec<HermitianOperator> = (0..e.len()).map(|i| e.weighted(i)).collect();
    let s = weighted
        .iter()
        .fold(HermitianOperator::zeros(d), |acc, x| acc.add(x));
    let (inv, support) = pinv_sqrt(&s)?;
    let mut elements: Vec<HermitianOperator> =
        weighted.iter().map(|g| g.sandwich_by(&inv)).collect();
    elements[0] = elements[0].add(&HermitianOperator::identity(d).sub(&support));
    Povm::new(elements)
}

/// An ensemble meeting every exact-attainment condition.
#[derive(Clone, Debug)]
pub struct Cor1Hit {
    pub trial: usize,
    pub seed: u64,
    pub ensemble: WeightedEnsemble,
    pub conditions: ConditionReport,
    /// Attainment identity residual of the orthogonality-based POVM.
    pub attainment_gap: f64,
}

#[derive(Serialize)]
struct Cor1HitJson<'a> {
    trial: usize,
    seed: u64,
    conditions: &'a ConditionReport,
    attainment_gap: f64,
    ensemble: serde_json::Value,
}

impl Cor1Hit {
    pub fn to_json_value(&self) -> serde_json::Value {
        let ensemble: serde_json::Value =
            serde_json::from_str(&self.ensemble.to_json()).expect("ensemble JSON is valid");
        serde_json::to_value(Cor1HitJson {
            trial: self.trial,
            seed: self.seed,
            conditions: &self.conditions,
            attainment_gap: self.attainment_gap,
            ensemble,
        })
        .expect("hit serialization cannot fail")
    }
}

/// Generates `trials` ensembles from `spec` (trial `t` uses
/// `derive_seed(spec.seed, "search-cor1", t)`) and returns those passing
/// every condition, in trial order.
pub fn search_cor1(spec: &GeneratorSpec, trials: usize) -> Result<Vec<Cor1Hit>> {
    let found: Vec<Result<Option<Cor1Hit>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = derive_seed(spec.seed, "search-cor1", t as u64);
            let ensemble = generate(&spec.with_seed(seed))?;
            let conditions = check_corollary1_conditions(&ensemble)?;
            if !conditions.corollary1_holds() {
                return Ok(None);
            }
            let povm = theorem2_povm(&ensemble)?;
            let attainment_gap = attainment_residual(&ensemble, &povm)?;
            Ok(Some(Cor1Hit {
                trial: t,
                seed,
                ensemble,
                conditions,
                attainment_gap,
            }))
        })
        .collect();
    found.into_iter().filter_map(Result::transpose).collect()
}
