//! Pearson-correlation crosstalk analysis of coupled qubit pairs.
//!
//! For a pair `(i, j)` eight feature arrays are formed, one per qubit, own
//! prepared state and quadrature, labeled `{state}_{qubit}_{real|imag}`. Each
//! concatenates the shots taken with the neighbor in ground and then excited.
//!
//! The named coefficients `r_s(ES_{q,X}, GS_{q,Y})` correlate qubit `q`'s
//! `X` quadrature with its neighbor excited (ES) against its `Y` quadrature
//! with the neighbor in ground (GS), `q`'s own state fixed to `s`. ES and GS
//! come from different schedules and are paired by shot index.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::iqdata::{IQShotTable, Schedule};
use crate::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.1;
pub const DEFAULT_FIDELITY_GAP: f64 = 0.02;
/// Text used for an undefined (zero-variance) coefficient in emitted tables.
pub const MISSING: &str = "NA";

/// Row labels of the named coefficients, in emission order: qubit `i` then
/// `i+1`, own state 0 then 1, `(I, Q)` then `(Q, I)`.
pub const NAMED_LABELS: [&str; 8] = [
    "r0(ES_i.I;GS_i.Q)",
    "r0(ES_i.Q;GS_i.I)",
    "r1(ES_i.I;GS_i.Q)",
    "r1(ES_i.Q;GS_i.I)",
    "r0(ES_i+1.I;GS_i+1.Q)",
    "r0(ES_i+1.Q;GS_i+1.I)",
    "r1(ES_i+1.I;GS_i+1.Q)",
    "r1(ES_i+1.Q;GS_i+1.I)",
];

/// Sample Pearson correlation, clamped to `[-1, 1]`. `None` when either
/// array has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<Option<f64>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            available: a.len(),
        });
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Ok(None);
    }
    Ok(Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0)))
}

/// The eight named coefficients of one pair.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedCoefficients {
    pub pair: (usize, usize),
    pub values: [Option<f64>; 8],
}

impl NamedCoefficients {
    /// Largest `|r|` and the index of its label, ignoring missing values.
    pub fn max_abs(&self) -> Option<(usize, f64)> {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(k, v)| v.map(|v| (k, v.abs())))
            .fold(None, |best, (k, v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((k, v)),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub pair: (usize, usize),
    pub labels: Vec<String>,
    /// Symmetric; `None` where an array has zero variance.
    pub matrix: Vec<Vec<Option<f64>>>,
    pub named: NamedCoefficients,
}

fn column(shots: &[(f64, f64)], imag: bool) -> impl Iterator<Item = f64> + '_ {
    shots.iter().map(move |p| if imag { p.1 } else { p.0 })
}

pub fn analyze_pair(table: &IQShotTable, pair: (usize, usize)) -> Result<CorrelationReport> {
    let shots = table.pair_shots(pair)?;
    let get = |qubit: usize, own: u8, neighbor: u8| &shots[&(qubit, Schedule::with_states(pair, qubit, own, neighbor).bits)];

    let mut labels = Vec::with_capacity(8);
    let mut arrays: Vec<Vec<f64>> = Vec::with_capacity(8);
    let mut named = [None; 8];
    for (qi, qubit) in [pair.0, pair.1].into_iter().enumerate() {
        for own in [0u8, 1] {
            for (quad, imag) in [("real", false), ("imag", true)] {
                labels.push(format!("{own}_{qubit}_{quad}"));
                arrays.push(column(get(qubit, own, 0), imag).chain(column(get(qubit, own, 1), imag)).collect());
            }
            let (es, gs) = (get(qubit, own, 1), get(qubit, own, 0));
            let base = qi * 4 + own as usize * 2;
            for (k, (x_imag, y_imag)) in [(false, true), (true, false)].into_iter().enumerate() {
                let x: Vec<f64> = column(es, x_imag).collect();
                let y: Vec<f64> = column(gs, y_imag).collect();
                named[base + k] = pearson(&x, &y)?;
            }
        }
    }

    let mut matrix = vec![vec![Some(1.0); 8]; 8];
    for a in 0..8 {
        for b in a + 1..8 {
            let r = pearson(&arrays[a], &arrays[b])?;
            matrix[a][b] = r;
            matrix[b][a] = r;
        }
        if pearson(&arrays[a], &arrays[a])?.is_none() {
            matrix[a][a] = None;
        }
    }
    Ok(CorrelationReport {
        pair,
        labels,
        matrix,
        named: NamedCoefficients { pair, values: named },
    })
}

fn fmt_value(v: Option<f64>) -> String {
    v.map_or_else(|| MISSING.to_string(), |v| v.to_string())
}

impl CorrelationReport {
    /// Delimited grid with the array labels as header row and first column.
    pub fn write_grid<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![String::new()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header)?;
        for (label, row) in self.labels.iter().zip(&self.matrix) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(|&v| fmt_value(v)));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

fn pair_label(pair: (usize, usize)) -> String {
    format!("{}-{}", pair.0, pair.1)
}

fn parse_pair(s: &str) -> Option<(usize, usize)> {
    let (a, b) = s.trim().split_once('-')?;
    Some((a.parse().ok()?, b.parse().ok()?))
}

/// Named coefficients as an 8-row block with one column per pair.
pub fn write_named_block<W: Write>(blocks: &[NamedCoefficients], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["coefficient".to_string()];
    header.extend(blocks.iter().map(|b| pair_label(b.pair)));
    w.write_record(&header)?;
    for (k, label) in NAMED_LABELS.iter().enumerate() {
        let mut rec = vec![label.to_string()];
        rec.extend(blocks.iter().map(|b| fmt_value(b.values[k])));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// Parses the block written by [`write_named_block`]. Rows must appear in
/// [`NAMED_LABELS`] order.
pub fn read_named_block<R: Read>(input: R) -> Result<Vec<NamedCoefficients>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut records = reader.records();
    let header = records.next().ok_or(Error::Empty("coefficient block"))??;
    let malformed = |line: u64, message: String| Error::MalformedRow { line, message };
    let pairs = header
        .iter()
        .skip(1)
        .map(|h| parse_pair(h).ok_or_else(|| malformed(1, format!("column {h:?} is not a pair i-j"))))
        .collect::<Result<Vec<_>>>()?;
    let mut blocks: Vec<NamedCoefficients> = pairs
        .iter()
        .map(|&pair| NamedCoefficients {
            pair,
            values: [None; 8],
        })
        .collect();
    let mut rows = 0;
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if rows == 8 {
            return Err(malformed(line, "more than 8 coefficient rows".into()));
        }
        if record.get(0).map(str::trim) != Some(NAMED_LABELS[rows]) {
            return Err(malformed(line, format!("expected row {}", NAMED_LABELS[rows])));
        }
        if record.len() != pairs.len() + 1 {
            return Err(malformed(line, format!("expected {} fields", pairs.len() + 1)));
        }
        for (b, field) in blocks.iter_mut().zip(record.iter().skip(1)) {
            let field = field.trim();
            b.values[rows] = if field == MISSING {
                None
            } else {
                let v: f64 = field
                    .parse()
                    .map_err(|_| malformed(line, format!("{field:?} is not a number")))?;
                if !(-1.0..=1.0).contains(&v) {
                    return Err(malformed(line, format!("{v} outside [-1, 1]")));
                }
                Some(v)
            };
        }
        rows += 1;
    }
    if rows != 8 {
        return Err(malformed(0, format!("expected 8 coefficient rows, got {rows}")));
    }
    Ok(blocks)
}

/// Mean single-dataset and both-dataset fidelity of one qubit of a pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityComparison {
    pub pair: (usize, usize),
    pub qubit: usize,
    pub single: f64,
    pub both: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlagThresholds {
    pub threshold: f64,
    pub fidelity_gap: f64,
}

impl Default for FlagThresholds {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            fidelity_gap: DEFAULT_FIDELITY_GAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Flag {
    pub pair: (usize, usize),
    pub evidence: Vec<String>,
}

/// Flags a pair when its largest named `|r|` reaches `threshold`, or when the
/// single/both mean fidelity gap of either qubit reaches `fidelity_gap`.
///
/// `fidelity` may be empty, in which case only correlations are used;
/// otherwise it must cover exactly the pairs of `coefficients`.
pub fn flag_crosstalk(
    coefficients: &[NamedCoefficients],
    fidelity: &[FidelityComparison],
    thresholds: FlagThresholds,
) -> Result<Vec<Flag>> {
    let mut by_pair: BTreeMap<(usize, usize), Vec<&FidelityComparison>> = BTreeMap::new();
    for f in fidelity {
        by_pair.entry(f.pair).or_default().push(f);
    }
    if !fidelity.is_empty() {
        let mut named: Vec<_> = coefficients.iter().map(|c| c.pair).collect();
        named.sort_unstable();
        named.dedup();
        let scored: Vec<_> = by_pair.keys().copied().collect();
        if named != scored {
            return Err(Error::PairMismatch(format!(
                "coefficients cover {named:?}, fidelity scores cover {scored:?}"
            )));
        }
    }
    let mut flags = Vec::new();
    for c in coefficients {
        let mut evidence = Vec::new();
        if let Some((k, r)) = c.max_abs() {
            if r >= thresholds.threshold {
                evidence.push(format!(
                    "correlation: max |r| = {r:.4} at {} >= {}",
                    NAMED_LABELS[k], thresholds.threshold
                ));
            }
        }
        for f in by_pair.get(&c.pair).into_iter().flatten() {
            let gap = (f.single - f.both).abs();
            if gap >= thresholds.fidelity_gap {
                evidence.push(format!(
                    "fidelity: qubit {} single {:.3} vs both {:.3}, gap {gap:.3} >= {}",
                    f.qubit, f.single, f.both, thresholds.fidelity_gap
                ));
            }
        }
        if !evidence.is_empty() {
            flags.push(Flag { pair: c.pair, evidence });
        }
    }
    Ok(flags)
}
