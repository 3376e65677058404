//! Lower bound on the error of discriminating quantum channels, obtained by
//! minimizing the state-level pairwise bound over the input state.
//!
//! For a fixed input `rho` the bound is
//! `f(rho) = 1/2 (1 - (1/(m-1)) sum_{i<j} Tr|eta_j E_j(rho) - eta_i E_i(rho)|)`.
//! Each `rho -> eta_j E_j(rho) - eta_i E_i(rho)` is affine and the trace norm
//! is convex, so `f` is concave. A concave function on the convex set of
//! states attains its minimum at an extreme point, so the search runs over
//! pure inputs only. Inputs are states of the channels' own input space; no
//! ancilla is attached.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{normalize_priors, random_pure_vector};
use crate::error::{Error, Result};
use crate::linalg::codec::{self, EncodedMatrix};
use crate::linalg::{norm, trace_norm, ComplexMatrix, HermitianOperator};
use crate::seed::rng_from_seed;

/// Allowed `||sum K^dagger K - I||_F`.
pub const TRACE_PRESERVATION_TOL: f64 = 1e-8;

/// Completely positive trace-preserving map in Kraus form.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        for (a, k) in kraus.iter().enumerate() {
            if (k.rows(), k.cols()) != (dim_out, dim_in) {
                return Err(Error::InvalidChannel(format!(
                    "Kraus operator {a} is {}x{}, expected {dim_out}x{dim_in}",
                    k.rows(),
                    k.cols()
                )));
            }
        }
        let c = Self {
            dim_in,
            dim_out,
            kraus,
        };
        let r = c.trace_preservation_residual();
        if r.is_nan() || r > TRACE_PRESERVATION_TOL {
            return Err(Error::InvalidChannel(format!(
                "not trace preserving, residual {r:e}"
            )));
        }
        Ok(c)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim_in: dim,
            dim_out: dim,
            kraus: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// `rho -> U rho U^dagger`.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    /// `||sum_a K_a^dagger K_a - I||_F`.
    pub fn trace_preservation_residual(&self) -> f64 {
        let mut s = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            s = &s + &(&k.adjoint() * k);
        }
        (&s - &ComplexMatrix::identity(self.dim_in)).frobenius_norm()
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// Kraus operators `V K_a V^dagger`; needs `dim_in == dim_out`.
    pub fn conjugated_by(&self, v: &ComplexMatrix) -> Self {
        Self {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            kraus: self.kraus.iter().map(|k| &(v * k) * &v.adjoint()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let file = ChannelFile {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            kraus: self.kraus.iter().map(codec::encode).collect(),
        };
        serde_json::to_string_pretty(&file).expect("channel serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ChannelFile = serde_json::from_str(text).map_err(|e| {
            Error::parse(
                format!("line {} column {}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        let kraus = file
            .kraus
            .iter()
            .enumerate()
            .map(|(a, enc)| codec::decode(enc, file.dim_out, file.dim_in, &format!("kraus[{a}]")))
            .collect::<Result<Vec<_>>>()?;
        Self::new(kraus)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<EncodedMatrix>,
}

/// `sum_a K_a rho K_a^dagger`.
pub fn apply(c: &QuantumChannel, rho: &HermitianOperator) -> Result<HermitianOperator> {
    if rho.dim() != c.dim_in {
        return Err(Error::DimensionMismatch {
            expected: c.dim_in,
            found: rho.dim(),
        });
    }
    let mut out = ComplexMatrix::zeros(c.dim_out, c.dim_out);
    for k in &c.kraus {
        out = &out + &(&(k * rho.matrix()) * &k.adjoint());
    }
    Ok(HermitianOperator::from_hermitian_part(&out))
}

/// Output `sum_a K_a |psi><psi| K_a^dagger` for a pure input.
fn apply_pure(c: &QuantumChannel, psi: &[Complex64]) -> HermitianOperator {
    let mut out = ComplexMatrix::zeros(c.dim_out, c.dim_out);
    for k in &c.kraus {
        out = &out + &ComplexMatrix::outer(&k.matvec(psi));
    }
    HermitianOperator::from_hermitian_part(&out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelBoundOptions {
    pub samples: usize,
    pub refine: bool,
    pub seed: u64,
}

impl Default for ChannelBoundOptions {
    fn default() -> Self {
        Self {
            samples: 20000,
            refine: true,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelBoundResult {
    pub bound: f64,
    /// Minimizing input as a unit vector.
    pub argmin_vector: Vec<Complex64>,
    pub argmin_state: HermitianOperator,
    pub samples: usize,
    pub refined: bool,
    pub seed: u64,
}

#[derive(Serialize)]
struct ChannelBoundJson {
    bound: f64,
    samples: usize,
    refined: bool,
    seed: u64,
    argmin_vector: Vec<[f64; 2]>,
    argmin_state: EncodedMatrix,
}

impl ChannelBoundResult {
    pub fn to_json(&self) -> String {
        let j = ChannelBoundJson {
            bound: self.bound,
            samples: self.samples,
            refined: self.refined,
            seed: self.seed,
            argmin_vector: self.argmin_vector.iter().map(|z| [z.re, z.im]).collect(),
            argmin_state: codec::encode(self.argmin_state.matrix()),
        };
        serde_json::to_string_pretty(&j).expect("channel bound serialization cannot fail")
    }
}

struct Problem<'a> {
    channels: &'a [QuantumChannel],
    priors: Vec<f64>,
}

impl Problem<'_> {
    fn new<'a>(channels: &'a [QuantumChannel], priors: &[f64]) -> Result<Problem<'a>> {
        let first = channels.first().ok_or(Error::EmptyChannelList)?;
        if channels.len() < 2 {
            return Err(Error::InvalidChannel("need at least 2 channels".into()));
        }
        for c in channels {
            if c.dim_in != first.dim_in {
                return Err(Error::DimensionMismatch {
                    expected: first.dim_in,
                    found: c.dim_in,
                });
            }
            if c.dim_out != first.dim_out {
                return Err(Error::DimensionMismatch {
                    expected: first.dim_out,
                    found: c.dim_out,
                });
            }
        }
        if priors.len() != channels.len() {
            return Err(Error::InvalidPriors(format!(
                "{} priors for {} channels",
                priors.len(),
                channels.len()
            )));
        }
        Ok(Problem {
            channels,
            priors: normalize_priors(priors.to_vec())?,
        })
    }

    fn dim_in(&self) -> usize {
        self.channels[0].dim_in
    }

    fn value(&self, psi: &[Complex64]) -> Result<f64> {
        let m = self.channels.len();
        let outputs: Vec<HermitianOperator> = self
            .channels
            .iter()
            .zip(&self.priors)
            .map(|(c, eta)| apply_pure(c, psi).scale(*eta))
            .collect();
        let mut s = 0.0;
        for i in 0..m {
            for j in i + 1..m {
                s += trace_norm(&outputs[j].sub(&outputs[i]))?;
            }
        }
        Ok((0.5 * (1.0 - s / (m as f64 - 1.0))).max(0.0))
    }

    /// Coordinate descent on the real and imaginary part of each amplitude,
    /// renormalizing after every step; the step halves from 0.1 to 1e-4.
    fn refine(&self, mut psi: Vec<Complex64>, mut best: f64) -> Result<(Vec<Complex64>, f64)> {
        let mut step = 0.1;
        while step >= 1e-4 {
            let mut improved = true;
            while improved {
                improved = false;
                for k in 0..psi.len() {
                    for dir in [
                        Complex64::new(step, 0.0),
                        Complex64::new(-step, 0.0),
                        Complex64::new(0.0, step),
                        Complex64::new(0.0, -step),
                    ] {
                        let mut cand = psi.clone();
                        cand[k] += dir;
                        let n = norm(&cand);
                        cand.iter_mut().for_each(|z| *z /= n);
                        let v = self.value(&cand)?;
                        if v < best {
                            best = v;
                            psi = cand;
                            improved = true;
                        }
                    }
                }
            }
            step /= 2.0;
        }
        Ok((psi, best))
    }
}

/// Minimum of the pairwise bound over Haar-random pure inputs, optionally
/// refined from the best sample.
pub fn channel_bound(
    channels: &[QuantumChannel],
    priors: &[f64],
    opts: &ChannelBoundOptions,
) -> Result<ChannelBoundResult> {
    let problem = Problem::new(channels, priors)?;
    let mut rng = rng_from_seed(opts.seed);
    let samples: Vec<Vec<Complex64>> = (0..opts.samples.max(1))
        .map(|_| random_pure_vector(&mut rng, problem.dim_in()))
        .collect();
    let mut r = bound_on(&problem, &samples, opts.refine)?;
    r.seed = opts.seed;
    Ok(r)
}

/// Same minimization over caller-supplied unit vectors.
pub fn channel_bound_on_samples(
    channels: &[QuantumChannel],
    priors: &[f64],
    samples: &[Vec<Complex64>],
    refine: bool,
) -> Result<ChannelBoundResult> {
    let problem = Problem::new(channels, priors)?;
    if samples.is_empty() {
        return Err(Error::InvalidSpec("no input samples".into()));
    }
    if let Some(s) = samples.iter().find(|s| s.len() != problem.dim_in()) {
        return Err(Error::DimensionMismatch {
            expected: problem.dim_in(),
            found: s.len(),
        });
    }
    bound_on(&problem, samples, refine)
}

fn bound_on(
    problem: &Problem<'_>,
    samples: &[Vec<Complex64>],
    refine: bool,
) -> Result<ChannelBoundResult> {
    let values: Vec<Result<f64>> = samples.par_iter().map(|psi| problem.value(psi)).collect();
    let mut best = (f64::INFINITY, 0usize);
    for (idx, v) in values.into_iter().enumerate() {
        let v = v?;
        // strict comparison keeps the lowest index among ties
        if v < best.0 {
            best = (v, idx);
        }
    }
    let (mut value, idx) = best;
    let mut psi = samples[idx].clone();
    if refine {
        (psi, value) = problem.refine(psi, value)?;
    }
    Ok(ChannelBoundResult {
        bound: value.clamp(0.0, 0.5),
        argmin_state: HermitianOperator::pure(&psi),
        argmin_vector: psi,
        samples: samples.len(),
        refined: refine,
        seed: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{random_density_from, random_unitary};
    use crate::seed::rng_from_seed;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    fn depolarizing() -> QuantumChannel {
        let y = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, -1.0)],
            vec![c(0.0, 1.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let z = ComplexMatrix::from_diagonal(&[1.0, -1.0]);
        QuantumChannel::new(
            [ComplexMatrix::identity(2), pauli_x(), y, z]
                .iter()
                .map(|k| k.scale(0.5))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn apply_examples() {
        let mut rng = rng_from_seed(1);
        let rho = random_density_from(&mut rng, 2, 2).unwrap();
        assert_eq!(apply(&QuantumChannel::identity(2), &rho).unwrap(), rho);

        let x = QuantumChannel::unitary(pauli_x()).unwrap();
        let out = apply(&x, &HermitianOperator::from_diagonal(&[1.0, 0.0])).unwrap();
        assert!(
            (out.matrix() - HermitianOperator::from_diagonal(&[0.0, 1.0]).matrix())
                .frobenius_norm()
                < 1e-15
        );

        let out = apply(&depolarizing(), &rho).unwrap();
        assert!((out.matrix() - &ComplexMatrix::identity(2).scale(0.5)).frobenius_norm() < 1e-9);

        assert!(matches!(
            apply(&x, &HermitianOperator::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rectangular_channel() {
        // isometry C^2 -> C^3
        let v = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0], &[0.0, 1.0]]).unwrap();
        let ch = QuantumChannel::new(vec![v]).unwrap();
        let out = apply(&ch, &HermitianOperator::from_diagonal(&[0.25, 0.75])).unwrap();
        assert_eq!(out.dim(), 3);
        assert!((out.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_trace_preserving_rejected() {
        assert!(matches!(
            QuantumChannel::new(vec![ComplexMatrix::identity(2).scale(0.9)]),
            Err(Error::InvalidChannel(_))
        ));
        assert!(matches!(
            QuantumChannel::new(vec![]),
            Err(Error::InvalidChannel(_))
        ));
    }

    #[test]
    fn bound_examples() {
        let id = QuantumChannel::identity(2);
        let x = QuantumChannel::unitary(pauli_x()).unwrap();
        let r = channel_bound(
            &[id.clone(), x],
            &[0.5, 0.5],
            &ChannelBoundOptions::default(),
        )
        .unwrap();
        assert!(r.bound <= 1e-6, "{}", r.bound);

        let r = channel_bound(
            &[id.clone(), id.clone()],
            &[0.3, 0.7],
            &ChannelBoundOptions {
                samples: 200,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((r.bound - 0.3).abs() < 1e-9);

        assert!(matches!(
            channel_bound(&[], &[], &ChannelBoundOptions::default()),
            Err(Error::EmptyChannelList)
        ));
        assert!(matches!(
            channel_bound(
                &[id, QuantumChannel::identity(3)],
                &[0.5, 0.5],
                &ChannelBoundOptions::default()
            ),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn orthogonal_input_gives_zero() {
        let id = QuantumChannel::identity(2);
        let x = QuantumChannel::unitary(pauli_x()).unwrap();
        let r = channel_bound_on_samples(
            &[id, x],
            &[0.5, 0.5],
            &[vec![c(1.0, 0.0), c(0.0, 0.0)]],
            false,
        )
        .unwrap();
        assert!(r.bound.abs() < 1e-15);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let mut rng = rng_from_seed(2);
        let u = random_unitary(&mut rng, 3);
        let chans = [
            QuantumChannel::identity(3),
            QuantumChannel::unitary(u).unwrap(),
        ];
        let opts = ChannelBoundOptions {
            samples: 500,
            refine: true,
            seed: 9,
        };
        assert_eq!(
            channel_bound(&chans, &[0.4, 0.6], &opts).unwrap(),
            channel_bound(&chans, &[0.4, 0.6], &opts).unwrap()
        );
    }

    #[test]
    fn json_round_trip() {
        let ch = depolarizing();
        assert_eq!(QuantumChannel::from_json(&ch.to_json()).unwrap(), ch);
        let bad = r#"{"dim_in": 2, "dim_out": 2, "kraus": [[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]]}"#;
        assert!(matches!(
            QuantumChannel::from_json(bad),
            Err(Error::InvalidChannel(_))
        ));
    }
}
