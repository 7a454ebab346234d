//! Classical-to-quantum encodings.
//!
//! Amplitude encoding normalizes a feature vector and zero-pads it to the next
//! power of two (at least 2). Angle encoding stores `θ = atan2(a₁, a₀)` for a
//! 2-feature vector; the state is prepared with `Ry(2θ)` so that its amplitudes
//! are `(cos θ, sin θ)`.

use serde::{Deserialize, Serialize};

use crate::simulator::{GateOp, StateVector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[default]
    Amplitude,
    Angle,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    /// Unit-norm amplitudes, length a power of two.
    Amplitude(Vec<f64>),
    /// Rotation angle in radians.
    Angle(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedPoint {
    payload: Payload,
    source_norm: f64,
}

impl EncodedPoint {
    pub fn strategy(&self) -> Strategy {
        match self.payload {
            Payload::Amplitude(_) => Strategy::Amplitude,
            Payload::Angle(_) => Strategy::Angle,
        }
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    /// Euclidean norm of the vector before encoding.
    pub fn source_norm(&self) -> f64 {
        self.source_norm
    }

    /// Number of qubits the prepared state occupies.
    pub fn num_qubits(&self) -> usize {
        match &self.payload {
            Payload::Amplitude(a) => a.len().trailing_zeros() as usize,
            Payload::Angle(_) => 1,
        }
    }

    /// Real amplitudes of the prepared state.
    pub fn amplitudes(&self) -> Vec<f64> {
        match &self.payload {
            Payload::Amplitude(a) => a.clone(),
            Payload::Angle(theta) => vec![theta.cos(), theta.sin()],
        }
    }

    /// Gates preparing this point on `qubits` (little-endian), starting from `|0…0⟩`.
    pub fn preparation(&self, qubits: &[usize]) -> Vec<GateOp> {
        match &self.payload {
            Payload::Amplitude(a) => vec![GateOp::prepare(qubits.to_vec(), a.clone())],
            Payload::Angle(theta) => vec![GateOp::ry(qubits[0], 2.0 * theta)],
        }
    }
}

fn check_finite(vector: &[f64]) -> Result<f64> {
    if vector.is_empty() {
        return Err(Error::Empty("feature vector"));
    }
    if let Some((index, &value)) = vector.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { index, value });
    }
    let norm = vector.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(norm)
}

/// Number of amplitudes used for `features` features: `2^⌈log₂ max(F, 2)⌉`.
pub fn padded_len(features: usize) -> usize {
    features.max(2).next_power_of_two()
}

pub fn amplitude_encode(vector: &[f64]) -> Result<EncodedPoint> {
    let norm = check_finite(vector)?;
    let mut amplitudes: Vec<f64> = vector.iter().map(|v| v / norm).collect();
    amplitudes.resize(padded_len(vector.len()), 0.0);
    Ok(EncodedPoint {
        payload: Payload::Amplitude(amplitudes),
        source_norm: norm,
    })
}

pub fn angle_encode(vector: &[f64]) -> Result<EncodedPoint> {
    if vector.len() != 2 {
        return Err(Error::AngleDimension(vector.len()));
    }
    let norm = check_finite(vector)?;
    Ok(EncodedPoint {
        payload: Payload::Angle(vector[1].atan2(vector[0])),
        source_norm: norm,
    })
}

pub fn encode(strategy: Strategy, vector: &[f64]) -> Result<EncodedPoint> {
    match strategy {
        Strategy::Amplitude => amplitude_encode(vector),
        Strategy::Angle => angle_encode(vector),
    }
}

pub fn prepare_state(point: &EncodedPoint) -> Result<StateVector> {
    let qubits: Vec<usize> = (0..point.num_qubits()).collect();
    point
        .preparation(&qubits)
        .iter()
        .try_fold(StateVector::zero(qubits.len())?, |s, op| s.apply(op))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, proptest};
    use proptest::strategy::Strategy as _;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn amps(p: &EncodedPoint) -> Vec<f64> {
        match p.payload() {
            Payload::Amplitude(a) => a.clone(),
            Payload::Angle(_) => panic!("expected amplitudes"),
        }
    }

    fn angle(p: &EncodedPoint) -> f64 {
        match p.payload() {
            Payload::Angle(t) => *t,
            Payload::Amplitude(_) => panic!("expected angle"),
        }
    }

    #[test]
    fn amplitude_examples() {
        let p = amplitude_encode(&[3.0, 4.0]).unwrap();
        assert_eq!(amps(&p), vec![0.6, 0.8]);
        assert_eq!(p.source_norm(), 5.0);
        assert_eq!(amps(&amplitude_encode(&[1.0, 0.0, 0.0]).unwrap()), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(amps(&amplitude_encode(&[1.0; 4]).unwrap()), vec![0.5; 4]);
        assert_eq!(amps(&amplitude_encode(&[2.0]).unwrap()), vec![1.0, 0.0]);
    }

    #[test]
    fn angle_examples() {
        assert!((angle(&angle_encode(&[1.0, 1.0]).unwrap()) - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(angle(&angle_encode(&[1.0, 0.0]).unwrap()), 0.0);
        assert!((angle(&angle_encode(&[0.0, 1.0]).unwrap()) - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(matches!(amplitude_encode(&[0.0, 0.0]), Err(Error::ZeroVector)));
        assert!(matches!(angle_encode(&[0.0, 0.0]), Err(Error::ZeroVector)));
        assert!(matches!(
            amplitude_encode(&[1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1, .. })
        ));
        assert!(matches!(angle_encode(&[1.0, 2.0, 3.0]), Err(Error::AngleDimension(3))));
        assert!(amplitude_encode(&[]).is_err());
    }

    #[test]
    fn prepared_states() {
        let s = prepare_state(&amplitude_encode(&[0.6, 0.8]).unwrap()).unwrap();
        assert_eq!(s.num_qubits(), 1);
        assert!((s.amplitudes()[0].re - 0.6).abs() < 1e-15);
        assert!((s.amplitudes()[1].re - 0.8).abs() < 1e-15);

        let s = prepare_state(&angle_encode(&[1.0, 1.0]).unwrap()).unwrap();
        let h = FRAC_PI_4.cos();
        assert!((s.amplitudes()[0].re - h).abs() < 1e-12);
        assert!((s.amplitudes()[1].re - FRAC_PI_4.sin()).abs() < 1e-12);

        let s = prepare_state(&amplitude_encode(&[0.5; 4]).unwrap()).unwrap();
        assert_eq!(s.num_qubits(), 2);
        assert!(s.amplitudes().iter().all(|a| (a.re - 0.5).abs() < 1e-15));
    }

    fn cosine(v: &[f64], w: &[f64]) -> f64 {
        let dot: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
        let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let nw = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        dot / (nv * nw)
    }

    fn nonzero_vec(len: usize) -> impl proptest::strategy::Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-10.0f64..10.0, len)
            .prop_filter("nonzero", |v| v.iter().map(|a| a * a).sum::<f64>() > 1e-6)
    }

    proptest! {
        #[test]
        fn scale_invariant(v in nonzero_vec(5), c in 1e-3f64..1e3) {
            let scaled: Vec<f64> = v.iter().map(|a| a * c).collect();
            let a = amps(&amplitude_encode(&v).unwrap());
            let b = amps(&amplitude_encode(&scaled).unwrap());
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn overlap_is_cosine_similarity(f in 1usize..9, seed in any::<u64>()) {
            use rand::Rng;
            let mut rng = crate::seed::rng(seed);
            let mut draw = || -> Vec<f64> { (0..f).map(|_| rng.random_range(-5.0..5.0)).collect() };
            let (v, w) = (draw(), draw());
            let sv = prepare_state(&amplitude_encode(&v).unwrap()).unwrap();
            let sw = prepare_state(&amplitude_encode(&w).unwrap()).unwrap();
            prop_assert!((sv.inner(&sw).unwrap().re - cosine(&v, &w)).abs() < 1e-9);
        }

        #[test]
        fn angle_and_amplitude_agree(a0 in 1e-3f64..10.0, a1 in -10.0f64..10.0,
                                     b0 in 1e-3f64..10.0, b1 in -10.0f64..10.0) {
            let amp = |v: &[f64]| prepare_state(&amplitude_encode(v).unwrap()).unwrap();
            let ang = |v: &[f64]| prepare_state(&angle_encode(v).unwrap()).unwrap();
            let (x, y) = ([a0, a1], [b0, b1]);
            let o1 = amp(&x).inner(&amp(&y)).unwrap().norm();
            let o2 = ang(&x).inner(&ang(&y)).unwrap().norm();
            prop_assert!((o1 - o2).abs() < 1e-9);
        }
    }
}
