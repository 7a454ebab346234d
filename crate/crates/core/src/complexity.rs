//! Cost model for classical k-means, `N·K·F·I`, against qk-means,
//! `N·K·log₂(F)·I / C`, plus a check of the jobs actually submitted per iteration.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::distance::{expected_jobs, BatchStats};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityParams {
    pub n: usize,
    pub k: usize,
    pub f: usize,
    pub i: usize,
    pub c: usize,
}

impl ComplexityParams {
    pub fn new(n: usize, k: usize, f: usize, i: usize, c: usize) -> Result<Self> {
        for (name, v) in [("N", n), ("K", k), ("F", f), ("I", i), ("C", c)] {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be >= 1")));
            }
        }
        Ok(Self { n, k, f, i, c })
    }
}

pub fn classical_cost(p: &ComplexityParams) -> f64 {
    p.n as f64 * p.k as f64 * p.f as f64 * p.i as f64
}

/// Feature count below 2 is clamped to 2, so the log factor is at least 1.
pub fn quantum_cost(p: &ComplexityParams) -> f64 {
    let log_f = (p.f.max(2) as f64).log2();
    p.n as f64 * p.k as f64 * log_f * p.i as f64 / p.c as f64
}

/// True iff every recorded iteration submitted exactly `⌈N·K / C⌉` jobs.
pub fn verify_job_counts(history: &[BatchStats], p: &ComplexityParams) -> bool {
    let expected = expected_jobs(p.n * p.k, p.c);
    history.iter().all(|s| s.jobs_submitted == expected)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Panel {
    Both,
    Classical,
    Quantum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Samples,
    Features,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub x: usize,
    pub classical: f64,
    pub quantum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub panel: Panel,
    pub axis: Axis,
    pub points: Vec<CurvePoint>,
}

impl Curve {
    pub fn file_stem(&self) -> String {
        let panel = match self.panel {
            Panel::Both => "both",
            Panel::Classical => "classical",
            Panel::Quantum => "quantum",
        };
        let axis = match self.axis {
            Axis::Samples => "samples",
            Axis::Features => "features",
        };
        format!("complexity_{panel}_{axis}")
    }

    /// Delimited text with a header; single-algorithm panels carry only their column.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let x = match self.axis {
            Axis::Samples => "n",
            Axis::Features => "f",
        };
        match self.panel {
            Panel::Both => w.write_record([x, "classical", "quantum"])?,
            Panel::Classical => w.write_record([x, "classical"])?,
            Panel::Quantum => w.write_record([x, "quantum"])?,
        }
        for p in &self.points {
            let x = p.x.to_string();
            match self.panel {
                Panel::Both => w.write_record([x, p.classical.to_string(), p.quantum.to_string()])?,
                Panel::Classical => w.write_record([x, p.classical.to_string()])?,
                Panel::Quantum => w.write_record([x, p.quantum.to_string()])?,
            }
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

/// Inputs for the six curve panels: samples sweep at fixed `f`, features sweep at fixed `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub n_values: Vec<usize>,
    pub f_values: Vec<usize>,
    pub fixed_n: usize,
    pub fixed_f: usize,
    pub k: usize,
    pub i: usize,
    pub c: usize,
}

impl Default for CurveSpec {
    fn default() -> Self {
        Self {
            n_values: log_range(10, 10_000, 31),
            f_values: (1..=64).collect(),
            fixed_n: 1000,
            fixed_f: 2,
            k: 2,
            i: 10,
            c: crate::distance::DEFAULT_MAX_CIRCUITS_PER_JOB,
        }
    }
}

/// `count` integers spaced evenly in log scale over `[lo, hi]`, deduplicated.
pub fn log_range(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    if count <= 1 || lo >= hi {
        return vec![lo];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut v: Vec<usize> = (0..count)
        .map(|t| (a + (b - a) * t as f64 / (count - 1) as f64).exp().round() as usize)
        .collect();
    v.dedup();
    v
}

pub fn generate_curves(spec: &CurveSpec) -> Result<Vec<Curve>> {
    if spec.n_values.is_empty() || spec.f_values.is_empty() {
        return Err(Error::Empty("curve range"));
    }
    let sweep = |axis: Axis| -> Result<Vec<CurvePoint>> {
        let xs = match axis {
            Axis::Samples => &spec.n_values,
            Axis::Features => &spec.f_values,
        };
        xs.iter()
            .map(|&x| {
                let (n, f) = match axis {
                    Axis::Samples => (x, spec.fixed_f),
                    Axis::Features => (spec.fixed_n, x),
                };
                let p = ComplexityParams::new(n, spec.k, f, spec.i, spec.c)?;
                Ok(CurvePoint {
                    x,
                    classical: classical_cost(&p),
                    quantum: quantum_cost(&p),
                })
            })
            .collect()
    };
    let mut curves = Vec::with_capacity(6);
    for panel in [Panel::Both, Panel::Classical, Panel::Quantum] {
        for axis in [Axis::Samples, Axis::Features] {
            curves.push(Curve {
                panel,
                axis,
                points: sweep(axis)?,
            });
        }
    }
    Ok(curves)
}
