//! SwapTest distances.
//!
//! A SwapTest on two registers holding `|x⟩` and `|y⟩` leaves the ancilla in
//! `|0⟩` with probability `½ + ½|⟨x|y⟩|²`. The distance reported here is
//! `D(x, y) = √(2 − 2|⟨x|y⟩|)`, with `|⟨x|y⟩|²` estimated as `2·P(0) − 1`
//! clamped to `[0, 1]`. Only the overlap magnitude is observable this way.
//! Internally the estimate is computed from `P(1) = 1 − P(0)` in a form that
//! avoids cancellation for nearly identical states.
//!
//! Circuits are executed in jobs of at most `max_circuits_per_job` circuits.
//! Sampled execution seeds each circuit from the batch seed and the request
//! index, so results do not depend on how requests are split into jobs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::{EncodedPoint, Payload};
use crate::seed;
use crate::simulator::{exact_probability, measure_ancilla, GateOp, StateVector};
use crate::{Error, Result};

/// Circuits per job accepted by the hardware queue the cost model assumes.
pub const DEFAULT_MAX_CIRCUITS_PER_JOB: usize = 900;
pub const DEFAULT_SHOTS_PER_CIRCUIT: u64 = 1024;

/// A SwapTest circuit: ancilla on qubit 0, left register on qubits `1..=m`,
/// right register on `m+1..=2m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapTestCircuit {
    pub num_qubits: usize,
    pub ops: Vec<GateOp>,
    pub ancilla: usize,
}

impl SwapTestCircuit {
    pub fn run(&self) -> Result<StateVector> {
        self.ops
            .iter()
            .try_fold(StateVector::zero(self.num_qubits)?, |s, op| s.apply(op))
    }

    /// Exact probability of reading 0 on the ancilla.
    pub fn p_zero(&self) -> Result<f64> {
        exact_probability(&self.run()?, self.ancilla, 0)
    }

    /// Exact probability of reading 1 on the ancilla.
    pub fn p_one(&self) -> Result<f64> {
        exact_probability(&self.run()?, self.ancilla, 1)
    }
}

fn check_compatible(left: &EncodedPoint, right: &EncodedPoint) -> Result<()> {
    if left.strategy() != right.strategy() {
        return Err(Error::IncompatibleEncoding(format!(
            "{:?} vs {:?}",
            left.strategy(),
            right.strategy()
        )));
    }
    if let (Payload::Amplitude(a), Payload::Amplitude(b)) = (left.payload(), right.payload()) {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                actual: b.len(),
            });
        }
    }
    Ok(())
}

pub fn build_swaptest(left: &EncodedPoint, right: &EncodedPoint) -> Result<SwapTestCircuit> {
    check_compatible(left, right)?;
    let m = left.num_qubits();
    let ancilla = 0;
    let left_qubits: Vec<usize> = (1..=m).collect();
    let right_qubits: Vec<usize> = (m + 1..=2 * m).collect();

    let mut ops = left.preparation(&left_qubits);
    ops.extend(right.preparation(&right_qubits));
    ops.push(GateOp::h(ancilla));
    ops.extend(
        left_qubits
            .iter()
            .zip(&right_qubits)
            .map(|(&l, &r)| GateOp::cswap(ancilla, l, r)),
    );
    ops.push(GateOp::h(ancilla));
    Ok(SwapTestCircuit {
        num_qubits: 2 * m + 1,
        ops,
        ancilla,
    })
}

/// Squared overlap `clamp(2·P(0) − 1, 0, 1)`, written in terms of `P(1)`.
pub fn overlap_sqr_from_p_one(p_one: f64) -> f64 {
    (1.0 - 2.0 * p_one).clamp(0.0, 1.0)
}

/// `√(2 − 2|⟨x|y⟩|)` from the ancilla's probability of reading 1.
pub fn distance_from_p_one(p_one: f64) -> f64 {
    let overlap = overlap_sqr_from_p_one(p_one).sqrt();
    // 2 − 2o = 2(1 − o²)/(1 + o), and 1 − o² = 2·P(1) after clamping.
    let p_one = p_one.clamp(0.0, 0.5);
    (4.0 * p_one / (1.0 + overlap)).sqrt()
}

#[derive(Debug, Clone, Copy)]
pub struct DistanceRequest<'a> {
    pub left: &'a EncodedPoint,
    pub right: &'a EncodedPoint,
    pub shots: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Infinite-shot limit: uses the exact ancilla probability.
    Exact,
    Sampled { seed: u64 },
}

pub fn estimate_distance(request: &DistanceRequest<'_>, backend: Backend) -> Result<f64> {
    let circuit = build_swaptest(request.left, request.right)?;
    let state = circuit.run()?;
    let p_one = match backend {
        Backend::Exact => exact_probability(&state, circuit.ancilla, 1)?,
        Backend::Sampled { seed } => {
            measure_ancilla(&state, circuit.ancilla, request.shots, seed)?.frequency(1)
        }
    };
    Ok(distance_from_p_one(p_one))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecutionMode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchConfig {
    pub max_circuits_per_job: usize,
    pub shots_per_circuit: u64,
    pub seed: u64,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            max_circuits_per_job: DEFAULT_MAX_CIRCUITS_PER_JOB,
            shots_per_circuit: DEFAULT_SHOTS_PER_CIRCUIT,
            seed: 0,
        }
    }
}

impl BatchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_circuits_per_job == 0 {
            return Err(Error::InvalidConfig("max_circuits_per_job must be >= 1".into()));
        }
        if self.shots_per_circuit == 0 {
            return Err(Error::ZeroShots);
        }
        Ok(())
    }

    /// Seed of the `index`-th circuit in a batch.
    pub fn circuit_seed(&self, index: usize) -> u64 {
        seed::derive(self.seed, index as u64)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchStats {
    pub jobs_submitted: usize,
    pub circuits_executed: usize,
}

/// Evaluates `requests` in jobs of at most `config.max_circuits_per_job` circuits.
///
/// Distances are positionally aligned with `requests`.
pub fn batch_distances(
    requests: &[DistanceRequest<'_>],
    config: &BatchConfig,
    mode: ExecutionMode,
) -> Result<(Vec<f64>, BatchStats)> {
    config.validate()?;
    let mut distances = Vec::with_capacity(requests.len());
    let mut stats = BatchStats::default();
    for (job, chunk) in requests.chunks(config.max_circuits_per_job).enumerate() {
        let offset = job * config.max_circuits_per_job;
        let job_results = chunk
            .par_iter()
            .enumerate()
            .map(|(i, request)| {
                let backend = match mode {
                    ExecutionMode::Exact => Backend::Exact,
                    ExecutionMode::Sampled => Backend::Sampled {
                        seed: config.circuit_seed(offset + i),
                    },
                };
                estimate_distance(request, backend)
            })
            .collect::<Result<Vec<_>>>()?;
        distances.extend(job_results);
        stats.jobs_submitted += 1;
        stats.circuits_executed += chunk.len();
    }
    Ok((distances, stats))
}

/// `⌈circuits / per_job⌉`.
pub fn expected_jobs(circuits: usize, per_job: usize) -> usize {
    circuits.div_ceil(per_job)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{amplitude_encode, angle_encode};
    use std::f64::consts::SQRT_2;

    fn amp(v: &[f64]) -> EncodedPoint {
        amplitude_encode(v).unwrap()
    }

    #[test]
    fn swaptest_probabilities() {
        let x = amp(&[1.0, 0.0]);
        let c = build_swaptest(&x, &x).unwrap();
        assert_eq!(c.num_qubits, 3);
        assert!((c.p_zero().unwrap() - 1.0).abs() < 1e-12);

        let (a, b) = (angle_encode(&[1.0, 0.0]).unwrap(), angle_encode(&[0.0, 1.0]).unwrap());
        assert!((build_swaptest(&a, &b).unwrap().p_zero().unwrap() - 0.5).abs() < 1e-12);

        // |⟨x|y⟩|² = 0.5 for (1,0) and (1,1)/√2
        let y = amp(&[1.0, 1.0]);
        assert!((build_swaptest(&x, &y).unwrap().p_zero().unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn swaptest_rejects_mismatch() {
        assert!(matches!(
            build_swaptest(&amp(&[1.0, 0.0]), &amp(&[1.0, 0.0, 0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            build_swaptest(&amp(&[1.0, 0.0]), &angle_encode(&[1.0, 0.0]).unwrap()),
            Err(Error::IncompatibleEncoding(_))
        ));
    }

    #[test]
    fn exact_distances() {
        let d = |x: &EncodedPoint, y: &EncodedPoint| {
            estimate_distance(&DistanceRequest { left: x, right: y, shots: 1 }, Backend::Exact).unwrap()
        };
        let x = amp(&[1.0, 0.0]);
        assert_eq!(d(&x, &x), 0.0);
        assert!((d(&x, &amp(&[0.0, 1.0])) - SQRT_2).abs() < 1e-12);
        let expected = (2.0 - 2.0 / SQRT_2).sqrt();
        assert!((d(&x, &amp(&[1.0, 1.0])) - expected).abs() < 1e-9);
        assert!((expected - 0.76537).abs() < 1e-5);
    }

    #[test]
    fn clamping_keeps_noise_real() {
        assert_eq!(overlap_sqr_from_p_one(0.6), 0.0);
        assert!((distance_from_p_one(0.6) - SQRT_2).abs() < 1e-15);
        assert_eq!(distance_from_p_one(-0.2), 0.0);
        // agrees with the direct form away from the cancellation regime
        for p in [0.01f64, 0.1, 0.25, 0.4, 0.5] {
            let direct = (2.0 - 2.0 * (1.0 - 2.0 * p).sqrt()).sqrt();
            assert!((distance_from_p_one(p) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn job_accounting() {
        let points: Vec<_> = (0..10).map(|i| amp(&[1.0 + i as f64, 2.0])).collect();
        let requests: Vec<_> = (0..1800)
            .map(|i| DistanceRequest {
                left: &points[i % 10],
                right: &points[(i / 10) % 10],
                shots: 64,
            })
            .collect();
        let config = BatchConfig::default();
        let (d, stats) = batch_distances(&requests, &config, ExecutionMode::Exact).unwrap();
        assert_eq!(d.len(), 1800);
        assert_eq!(stats.jobs_submitted, 2);
        assert_eq!(stats.circuits_executed, 1800);

        let (_, stats) = batch_distances(&requests[..1], &config, ExecutionMode::Exact).unwrap();
        assert_eq!(stats.jobs_submitted, 1);
        let (_, stats) = batch_distances(&requests[..200], &config, ExecutionMode::Exact).unwrap();
        assert_eq!(stats.jobs_submitted, expected_jobs(100 * 2, 900));
        assert_eq!(stats.jobs_submitted, 1);
    }

    #[test]
    fn batching_is_transparent() {
        let points: Vec<_> = (0..7).map(|i| amp(&[1.0, i as f64 * 0.3])).collect();
        let requests: Vec<_> = (0..49)
            .map(|i| DistanceRequest {
                left: &points[i % 7],
                right: &points[i / 7],
                shots: 256,
            })
            .collect();
        let base = BatchConfig {
            seed: 99,
            ..BatchConfig::default()
        };
        let (one_job, _) = batch_distances(&requests, &base, ExecutionMode::Sampled).unwrap();
        let small = BatchConfig {
            max_circuits_per_job: 5,
            ..base
        };
        let (many_jobs, stats) = batch_distances(&requests, &small, ExecutionMode::Sampled).unwrap();
        assert_eq!(stats.jobs_submitted, 10);
        assert_eq!(one_job, many_jobs);
        for (i, r) in requests.iter().enumerate() {
            let single = estimate_distance(r, Backend::Sampled { seed: base.circuit_seed(i) }).unwrap();
            assert_eq!(single, one_job[i]);
        }
    }

    #[test]
    fn invalid_batch_config() {
        let x = amp(&[1.0, 0.0]);
        let r = [DistanceRequest { left: &x, right: &x, shots: 1 }];
        let bad = BatchConfig {
            max_circuits_per_job: 0,
            ..BatchConfig::default()
        };
        assert!(batch_distances(&r, &bad, ExecutionMode::Exact).is_err());
    }
}
