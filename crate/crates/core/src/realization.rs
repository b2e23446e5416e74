//! Ancilla-assisted realization of the optimal two-element operation.
//!
//! The ancilla `A` starts in `|0>`, a controlled rotation entangles it with
//! the source qubit `Q`, and measuring the ancilla tells which element of
//! the pair acted. The joint basis order is `|0_A 0_Q>, |0_A 1_Q>,
//! |1_A 0_Q>, |1_A 1_Q>`, so the ancilla is the most significant qubit.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::quantum::{self, DensityMatrix, ANNIHILATION_TOL};
use crate::ratedistortion::{self, KrausPair, SourceSpec, DEFAULT_TOL};
use crate::record;
use crate::verify::trial_rng;

/// Unitarity required of the assembled circuit.
pub const UNITARITY_TOL: f64 = 1e-12;
/// Samples drawn from one random stream in [`simulate_stream`].
pub const STREAM_CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct RealizationCircuit {
    pub alpha: f64,
    pub delta: f64,
    pub unitary: ComplexMatrix,
    pub kraus_pair: KrausPair,
}

/// Circuit for the optimal pair at `delta`.
pub fn build_circuit(delta: f64, src: &SourceSpec) -> Result<RealizationCircuit> {
    if !(delta > 0.0 && delta < FRAC_PI_2) {
        return Err(Error::Domain(format!("delta = {delta} must lie in (0, pi/2)")));
    }
    let alpha = ratedistortion::solve_alpha(delta, src, DEFAULT_TOL)?;
    RealizationCircuit::with_alpha(alpha, delta)
}

impl RealizationCircuit {
    /// Circuit for an arbitrary diagonal pair, `delta` in `[0, pi/2]`.
    pub fn with_alpha(alpha: f64, delta: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&delta) || !alpha.is_finite() {
            return Err(Error::Domain(format!("need finite alpha and delta in [0, pi/2], got ({alpha}, {delta})")));
        }
        let (sa, ca) = alpha.sin_cos();
        let (sb, cb) = (alpha + delta).sin_cos();
        let unitary = ComplexMatrix::from_real_rows(&[
            &[ca, 0.0, -sa, 0.0],
            &[0.0, cb, 0.0, -sb],
            &[sa, 0.0, ca, 0.0],
            &[0.0, sb, 0.0, cb],
        ])?;
        let defect = unitary.unitarity_defect();
        if defect > UNITARITY_TOL {
            return Err(Error::Contract(format!("circuit is not unitary (defect {defect:e})")));
        }
        Ok(Self { alpha, delta, unitary, kraus_pair: KrausPair::diagonal(alpha, delta) })
    }

    /// `U (|0><0|_A (x) rho) U^†`.
    pub fn joint_state(&self, rho: &DensityMatrix) -> Result<ComplexMatrix> {
        if rho.dim() != 2 {
            return Err(Error::DimensionMismatch { left: 2, right: rho.dim() });
        }
        let xi = ComplexMatrix::unit(2, 0, 0).kron(rho.matrix())?;
        self.unitary.conjugate(&xi)
    }

    /// The 2x2 block `(a, b)` of the joint state in the ancilla index.
    pub fn ancilla_block(joint: &ComplexMatrix, a: usize, b: usize) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                out[(i, j)] = joint[(2 * a + i, 2 * b + j)];
            }
        }
        out
    }

    /// Source output after measuring and discarding the ancilla.
    pub fn induced_output(&self, rho: &DensityMatrix) -> Result<ComplexMatrix> {
        self.joint_state(rho)?.partial_trace(&[1])
    }
}

/// Ancilla measurement statistics. Post-measurement states are `None` when
/// the outcome probability is at most [`ANNIHILATION_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct AncillaMeasurement {
    pub p_type1: f64,
    pub p_type2: f64,
    pub post1: Option<DensityMatrix>,
    pub post2: Option<DensityMatrix>,
}

pub fn measure_ancilla(circ: &RealizationCircuit, src: &SourceSpec) -> Result<AncillaMeasurement> {
    let joint = circ.joint_state(&src.rho())?;
    let outcome = |a: usize| -> Result<(f64, Option<DensityMatrix>)> {
        let block = RealizationCircuit::ancilla_block(&joint, a, a);
        let p = block.trace().re;
        if p <= ANNIHILATION_TOL {
            return Ok((p.max(0.0), None));
        }
        Ok((p, Some(DensityMatrix::new(block.scale_real(1.0 / p))?)))
    };
    let (p_type1, post1) = outcome(0)?;
    let (p_type2, post2) = outcome(1)?;
    Ok(AncillaMeasurement { p_type1, p_type2, post1, post2 })
}

/// Monte Carlo type labels for a stream of source qubits, with analytic
/// rate accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamResult {
    pub p0: f64,
    pub delta: f64,
    pub alpha: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub type1_count: u64,
    pub empirical_lambda1: f64,
    pub analytic_lambda1: f64,
    pub empirical_classical_rate: f64,
    pub analytic_classical_rate: f64,
    pub quantum_rate: f64,
    pub analytic_distortion: f64,
}

impl StreamResult {
    pub fn to_text(&self) -> String {
        let f = record::fmt_f64;
        let pairs = [
            ("p0", f(self.p0)),
            ("delta", f(self.delta)),
            ("alpha", f(self.alpha)),
            ("n_samples", self.n_samples.to_string()),
            ("seed", self.seed.to_string()),
            ("type1_count", self.type1_count.to_string()),
            ("empirical_lambda1", f(self.empirical_lambda1)),
            ("analytic_lambda1", f(self.analytic_lambda1)),
            ("empirical_classical_rate", f(self.empirical_classical_rate)),
            ("analytic_classical_rate", f(self.analytic_classical_rate)),
            ("quantum_rate", f(self.quantum_rate)),
            ("analytic_distortion", f(self.analytic_distortion)),
        ];
        let pairs: Vec<(String, String)> = pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        record::key_value_text(&pairs)
    }

    /// Binomial standard deviation of `empirical_lambda1`.
    pub fn lambda1_sigma(&self) -> f64 {
        (self.analytic_lambda1 * (1.0 - self.analytic_lambda1) / self.n_samples as f64).sqrt()
    }
}

/// Draws `n_samples` ancilla outcomes. Samples are split into chunks of
/// [`STREAM_CHUNK`], chunk `c` using the random stream `(seed, c)`.
pub fn simulate_stream(circ: &RealizationCircuit, src: &SourceSpec, n_samples: u64, seed: u64) -> Result<StreamResult> {
    if n_samples == 0 {
        return Err(Error::Domain("n_samples must be at least 1".into()));
    }
    let rho = src.rho();
    let m = measure_ancilla(circ, src)?;
    let p = m.p_type1;
    let n_chunks = n_samples.div_ceil(STREAM_CHUNK);
    let type1_count: u64 = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = trial_rng(seed, c);
            let len = STREAM_CHUNK.min(n_samples - c * STREAM_CHUNK);
            (0..len).filter(|_| rng.random::<f64>() < p).count() as u64
        })
        .sum();
    let empirical = type1_count as f64 / n_samples as f64;
    Ok(StreamResult {
        p0: src.p0(),
        delta: circ.delta,
        alpha: circ.alpha,
        n_samples,
        seed,
        type1_count,
        empirical_lambda1: empirical,
        analytic_lambda1: p,
        empirical_classical_rate: quantum::h2(empirical),
        analytic_classical_rate: quantum::h2(p),
        quantum_rate: quantum::average_entropy(&circ.kraus_pair.channel(), &rho)?,
        analytic_distortion: src.distortion_at(circ.delta),
    })
}
