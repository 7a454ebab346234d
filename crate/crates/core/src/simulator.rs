//! Pure-state simulator for the handful of gates a SwapTest needs.
//!
//! Qubit 0 is the least-significant bit of the amplitude index. The rotation
//! convention is `Ry(θ) = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand_distr::{Binomial, Distribution};

use crate::seed;
use crate::{Error, Result};

/// Tolerance used when checking that injected or constructed amplitudes are unit norm.
pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The all-zero computational basis state on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidConfig("a register needs at least one qubit".into()));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            num_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::from_amplitudes(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amplitudes.len(),
                actual: other.amplitudes.len(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Applies `op`, consuming the state.
    pub fn apply(mut self, op: &GateOp) -> Result<Self> {
        op.validate(self.num_qubits)?;
        match &op.gate {
            Gate::H => self.apply_single(op.targets[0], |a, b| {
                ((a + b) * FRAC_1_SQRT_2, (a - b) * FRAC_1_SQRT_2)
            }),
            Gate::Ry(theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                self.apply_single(op.targets[0], |a, b| (a * c - b * s, a * s + b * c))
            }
            Gate::Cswap => self.apply_cswap(op.targets[0], op.targets[1], op.targets[2]),
            Gate::PrepareAmplitudes(payload) => self.inject(&op.targets, payload)?,
        }
        Ok(self)
    }

    fn apply_single<F>(&mut self, qubit: usize, f: F)
    where
        F: Fn(Complex64, Complex64) -> (Complex64, Complex64),
    {
        let mask = 1usize << qubit;
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let j = i | mask;
                let (a, b) = f(self.amplitudes[i], self.amplitudes[j]);
                self.amplitudes[i] = a;
                self.amplitudes[j] = b;
            }
        }
    }

    fn apply_cswap(&mut self, control: usize, first: usize, second: usize) {
        let (c, m1, m2) = (1usize << control, 1usize << first, 1usize << second);
        for i in 0..self.amplitudes.len() {
            // visit each swapped pair once: control set, first set, second clear
            if i & c != 0 && i & m1 != 0 && i & m2 == 0 {
                self.amplitudes.swap(i, i ^ m1 ^ m2);
            }
        }
    }

    fn inject(&mut self, targets: &[usize], payload: &[f64]) -> Result<()> {
        let target_mask: usize = targets.iter().map(|&t| 1usize << t).sum();
        if self
            .amplitudes
            .iter()
            .enumerate()
            .any(|(i, a)| i & target_mask != 0 && a.norm_sqr() > 1e-24)
        {
            return Err(Error::TargetsNotReset);
        }
        let offsets: Vec<usize> = (0..payload.len())
            .map(|k| {
                targets
                    .iter()
                    .enumerate()
                    .filter(|(bit, _)| k >> bit & 1 == 1)
                    .map(|(_, &t)| 1usize << t)
                    .sum()
            })
            .collect();
        for base in 0..self.amplitudes.len() {
            if base & target_mask != 0 {
                continue;
            }
            let amp = self.amplitudes[base];
            for (offset, &p) in offsets.iter().zip(payload) {
                self.amplitudes[base | offset] = amp * p;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    H,
    /// Rotation about Y by the given angle in radians.
    Ry(f64),
    /// Controlled swap; targets are `[control, first, second]`.
    Cswap,
    /// Injects a real unit-norm amplitude vector onto the targets, which must be in `|0…0⟩`.
    /// Bit `b` of the payload index addresses `targets[b]`.
    PrepareAmplitudes(Vec<f64>),
}

impl Gate {
    fn name(&self) -> &'static str {
        match self {
            Gate::H => "H",
            Gate::Ry(_) => "Ry",
            Gate::Cswap => "CSWAP",
            Gate::PrepareAmplitudes(_) => "PrepareAmplitudes",
        }
    }

    /// The inverse gate, when it is unitary on the whole space.
    pub fn inverse(&self) -> Option<Gate> {
        match self {
            Gate::H => Some(Gate::H),
            Gate::Ry(theta) => Some(Gate::Ry(-theta)),
            Gate::Cswap => Some(Gate::Cswap),
            Gate::PrepareAmplitudes(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub gate: Gate,
    pub targets: Vec<usize>,
}

impl GateOp {
    pub fn h(qubit: usize) -> Self {
        Self {
            gate: Gate::H,
            targets: vec![qubit],
        }
    }

    pub fn ry(qubit: usize, theta: f64) -> Self {
        Self {
            gate: Gate::Ry(theta),
            targets: vec![qubit],
        }
    }

    pub fn cswap(control: usize, first: usize, second: usize) -> Self {
        Self {
            gate: Gate::Cswap,
            targets: vec![control, first, second],
        }
    }

    pub fn prepare(targets: Vec<usize>, amplitudes: Vec<f64>) -> Self {
        Self {
            gate: Gate::PrepareAmplitudes(amplitudes),
            targets,
        }
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        let expected = match &self.gate {
            Gate::H | Gate::Ry(_) => 1,
            Gate::Cswap => 3,
            Gate::PrepareAmplitudes(payload) => {
                if !payload.len().is_power_of_two() || payload.len() < 2 {
                    return Err(Error::NotPowerOfTwo(payload.len()));
                }
                let norm = payload.iter().map(|p| p * p).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > NORM_TOLERANCE {
                    return Err(Error::NotNormalized { norm });
                }
                payload.len().trailing_zeros() as usize
            }
        };
        if self.targets.len() != expected {
            return Err(Error::TargetArity {
                gate: self.gate.name(),
                expected,
                actual: self.targets.len(),
            });
        }
        if let Some(&index) = self.targets.iter().find(|&&t| t >= num_qubits) {
            return Err(Error::QubitOutOfRange { index, num_qubits });
        }
        for (i, t) in self.targets.iter().enumerate() {
            if self.targets[..i].contains(t) {
                return Err(Error::DuplicateQubits(self.targets.clone()));
            }
        }
        Ok(())
    }
}

/// Applies `op` to a copy of `state`.
pub fn apply_gate(state: &StateVector, op: &GateOp) -> Result<StateVector> {
    state.clone().apply(op)
}

/// Ancilla measurement statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotResult {
    counts: [u64; 2],
}

impl ShotResult {
    pub fn new(zeros: u64, ones: u64) -> Result<Self> {
        if zeros + ones == 0 {
            return Err(Error::ZeroShots);
        }
        Ok(Self {
            counts: [zeros, ones],
        })
    }

    pub fn count(&self, outcome: u8) -> u64 {
        self.counts[usize::from(outcome != 0)]
    }

    pub fn shots(&self) -> u64 {
        self.counts[0] + self.counts[1]
    }

    pub fn frequency(&self, outcome: u8) -> f64 {
        self.count(outcome) as f64 / self.shots() as f64
    }
}

/// Exact marginal probability of reading `outcome` on `qubit`.
pub fn exact_probability(state: &StateVector, qubit: usize, outcome: u8) -> Result<f64> {
    if qubit >= state.num_qubits {
        return Err(Error::QubitOutOfRange {
            index: qubit,
            num_qubits: state.num_qubits,
        });
    }
    let mask = 1usize << qubit;
    let want = if outcome == 0 { 0 } else { mask };
    let p: f64 = state
        .amplitudes
        .iter()
        .enumerate()
        .filter(|(i, _)| i & mask == want)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    Ok(p.clamp(0.0, 1.0))
}

/// Samples `shots` measurements of `qubit` from its exact marginal distribution.
pub fn measure_ancilla(state: &StateVector, qubit: usize, shots: u64, seed: u64) -> Result<ShotResult> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let p1 = exact_probability(state, qubit, 1)?;
    let ones = Binomial::new(shots, p1)
        .expect("probability clamped to [0, 1]")
        .sample(&mut seed::rng(seed));
    ShotResult::new(shots - ones, ones)
}
