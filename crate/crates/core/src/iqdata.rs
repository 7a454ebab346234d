//! IQ readout shots: synthetic generation, the single/both datasets per qubit,
//! and delimited-text storage.
//!
//! A schedule prepares two coupled qubits `(i, j)` in one of `|00⟩…|11⟩`. It is
//! written `i-j:bb` with the least significant (rightmost) bit belonging to `i`,
//! so `1-2:10` means qubit 2 excited and qubit 1 ground. Keeping the pair in
//! the key lets one table hold every coupling of a device while `(qubit,
//! schedule, shot)` stays unique.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::path::Path;
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::DataSet;
use crate::seed;
use crate::{Error, Result};

/// Fraction of `‖excited − ground‖` by which a fully coupled (`κ = 1`)
/// neighbor moves a qubit's centers.
pub const CROSSTALK_SHIFT_SCALE: f64 = 0.25;
/// Variance fraction of the shared latent per unit `κ`; the induced
/// ES/GS correlation is about `CROSSTALK_CORRELATION_SCALE · κ`.
pub const CROSSTALK_CORRELATION_SCALE: f64 = 0.7;
pub const DEFAULT_SHOTS_PER_SCHEDULE: usize = 1024;
pub const TABLE_HEADER: [&str; 5] = ["qubit", "schedule", "shot", "i", "q"];

/// `(qubit, bits)` → IQ points.
pub type PairShots = BTreeMap<(usize, u8), Vec<(f64, f64)>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Schedule {
    pub pair: (usize, usize),
    /// Bit 0 is the state of `pair.0`, bit 1 the state of `pair.1`.
    pub bits: u8,
}

impl Schedule {
    pub fn new(pair: (usize, usize), bits: u8) -> Result<Self> {
        if pair.0 == pair.1 {
            return Err(Error::InvalidConfig(format!("pair ({}, {}) is reflexive", pair.0, pair.1)));
        }
        if bits > 3 {
            return Err(Error::InvalidConfig(format!("schedule bits {bits} out of range")));
        }
        Ok(Self { pair, bits })
    }

    /// All four schedules of a pair, `|00⟩, |01⟩, |10⟩, |11⟩`.
    pub fn all(pair: (usize, usize)) -> [Schedule; 4] {
        [0, 1, 2, 3].map(|bits| Schedule { pair, bits })
    }

    pub fn contains(&self, qubit: usize) -> bool {
        qubit == self.pair.0 || qubit == self.pair.1
    }

    /// Prepared state of `qubit`, which must belong to the pair.
    pub fn bit_of(&self, qubit: usize) -> u8 {
        if qubit == self.pair.0 {
            self.bits & 1
        } else {
            debug_assert_eq!(qubit, self.pair.1);
            self.bits >> 1
        }
    }

    pub fn neighbor_of(&self, qubit: usize) -> usize {
        if qubit == self.pair.0 {
            self.pair.1
        } else {
            self.pair.0
        }
    }

    /// The schedule of this pair with `qubit` in `own` and its neighbor in `neighbor`.
    pub fn with_states(pair: (usize, usize), qubit: usize, own: u8, neighbor: u8) -> Schedule {
        let bits = if qubit == pair.0 { own | neighbor << 1 } else { neighbor | own << 1 };
        Schedule { pair, bits }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}:{}{}", self.pair.0, self.pair.1, self.bits >> 1, self.bits & 1)
    }
}

impl FromStr for Schedule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let bad = || format!("schedule {s:?} is not of the form i-j:bb");
        let (pair, bits) = s.split_once(':').ok_or_else(bad)?;
        let (a, b) = pair.split_once('-').ok_or_else(bad)?;
        let a: usize = a.parse().map_err(|_| bad())?;
        let b: usize = b.parse().map_err(|_| bad())?;
        let bits = match bits {
            "00" => 0,
            "01" => 1,
            "10" => 2,
            "11" => 3,
            _ => return Err(bad()),
        };
        Schedule::new((a, b), bits).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotRow {
    pub qubit: usize,
    pub schedule: Schedule,
    pub shot: usize,
    pub i: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IQShotTable {
    pub device: String,
    rows: Vec<ShotRow>,
}

impl IQShotTable {
    /// Validates finiteness, key uniqueness and that each qubit belongs to its schedule's pair.
    pub fn new(device: impl Into<String>, rows: Vec<ShotRow>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(rows.len());
        for (n, r) in rows.iter().enumerate() {
            let line = n as u64 + 2;
            check_row(r, line)?;
            if !seen.insert((r.qubit, r.schedule, r.shot)) {
                return Err(duplicate(r, line));
            }
        }
        Ok(Self {
            device: device.into(),
            rows,
        })
    }

    pub fn rows(&self) -> &[ShotRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct pairs referenced by the table, sorted.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let set: BTreeSet<_> = self.rows.iter().map(|r| r.schedule.pair).collect();
        set.into_iter().collect()
    }

    /// `(I, Q)` of `qubit` under `schedule`, ordered by shot index.
    pub fn shots(&self, qubit: usize, schedule: Schedule) -> Vec<(f64, f64)> {
        let mut found: Vec<&ShotRow> = self
            .rows
            .iter()
            .filter(|r| r.qubit == qubit && r.schedule == schedule)
            .collect();
        found.sort_by_key(|r| r.shot);
        found.into_iter().map(|r| (r.i, r.q)).collect()
    }

    /// Shots of both qubits for all four schedules of `pair`, keyed by
    /// `(qubit, bits)`. Errors on a missing schedule or unequal shot counts.
    pub fn pair_shots(&self, pair: (usize, usize)) -> Result<PairShots> {
        let mut groups: BTreeMap<(usize, u8), Vec<&ShotRow>> = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.schedule.pair == pair) {
            groups.entry((r.qubit, r.schedule.bits)).or_default().push(r);
        }
        let mut out = BTreeMap::new();
        let mut count = None;
        for qubit in [pair.0, pair.1] {
            for schedule in Schedule::all(pair) {
                let mut rows = groups.remove(&(qubit, schedule.bits)).ok_or_else(|| Error::MissingSchedule {
                    qubit,
                    schedule: schedule.to_string(),
                })?;
                rows.sort_by_key(|r| r.shot);
                if *count.get_or_insert(rows.len()) != rows.len() {
                    return Err(Error::UnequalShots {
                        pair: format!("{}-{}", pair.0, pair.1),
                    });
                }
                out.insert((qubit, schedule.bits), rows.into_iter().map(|r| (r.i, r.q)).collect());
            }
        }
        Ok(out)
    }
}

fn check_row(r: &ShotRow, line: u64) -> Result<()> {
    if !r.schedule.contains(r.qubit) {
        return Err(Error::MalformedRow {
            line,
            message: format!("qubit {} is not part of schedule {}", r.qubit, r.schedule),
        });
    }
    for (name, v) in [("i", r.i), ("q", r.q)] {
        if !v.is_finite() {
            return Err(Error::MalformedRow {
                line,
                message: format!("non-finite {name} value {v}"),
            });
        }
    }
    Ok(())
}

fn duplicate(r: &ShotRow, line: u64) -> Error {
    Error::DuplicateKey {
        line,
        qubit: r.qubit,
        schedule: r.schedule.to_string(),
        shot: r.shot,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitReadout {
    pub index: usize,
    pub ground: [f64; 2],
    pub excited: [f64; 2],
    pub stddev: f64,
}

/// `kappa` couples `target`'s readout to the state of `source`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Crosstalk {
    pub target: usize,
    pub source: usize,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutModel {
    pub device: String,
    pub qubits: Vec<QubitReadout>,
    #[serde(default)]
    pub crosstalk: Vec<Crosstalk>,
}

impl ReadoutModel {
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for q in &self.qubits {
            if !seen.insert(q.index) {
                return Err(Error::InvalidConfig(format!("qubit {} listed twice", q.index)));
            }
            if !(q.stddev.is_finite() && q.stddev > 0.0) {
                return Err(Error::InvalidConfig(format!("qubit {} stddev must be > 0", q.index)));
            }
            if q.ground.iter().chain(&q.excited).any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig(format!("qubit {} has a non-finite center", q.index)));
            }
        }
        let mut links = HashSet::new();
        for c in &self.crosstalk {
            if !(0.0..=1.0).contains(&c.kappa) {
                return Err(Error::InvalidConfig(format!("kappa {} outside [0, 1]", c.kappa)));
            }
            if c.target == c.source || !seen.contains(&c.target) || !seen.contains(&c.source) {
                return Err(Error::InvalidConfig(format!(
                    "crosstalk {} <- {} does not name two known qubits",
                    c.target, c.source
                )));
            }
            if !links.insert((c.target, c.source)) {
                return Err(Error::InvalidConfig(format!("crosstalk {} <- {} listed twice", c.target, c.source)));
            }
        }
        Ok(())
    }

    pub fn qubit(&self, index: usize) -> Option<&QubitReadout> {
        self.qubits.iter().find(|q| q.index == index)
    }

    /// Coupling of `target` to `source`; 0 when not listed.
    pub fn kappa(&self, target: usize, source: usize) -> f64 {
        self.crosstalk
            .iter()
            .find(|c| c.target == target && c.source == source)
            .map_or(0.0, |c| c.kappa)
    }

    /// The same device with every coupling removed.
    pub fn without_crosstalk(&self) -> Self {
        Self {
            crosstalk: Vec::new(),
            ..self.clone()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let model: Self = toml::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("readout model serializes")
    }
}

impl Default for ReadoutModel {
    /// Five qubits whose ground/excited separations give optimal single-qubit
    /// fidelities of roughly 0.97, 0.96, 0.978, 0.99 and 0.985, with qubit 2
    /// coupled to both neighbors.
    fn default() -> Self {
        let q = |index, ground, excited, stddev| QubitReadout {
            index,
            ground,
            excited,
            stddev,
        };
        Self {
            device: "synthetic-5q-chain".into(),
            qubits: vec![
                q(0, [-0.020, 0.015], [0.01456, -0.01400], 0.012),
                q(1, [-0.018, 0.021], [0.01350, -0.01654], 0.014),
                q(2, [-0.024, 0.012], [0.00735, -0.01935], 0.011),
                q(3, [-0.016, 0.018], [0.02209, -0.00867], 0.010),
                q(4, [-0.021, 0.019], [0.01136, -0.02722], 0.013),
            ],
            crosstalk: vec![
                Crosstalk {
                    target: 2,
                    source: 1,
                    kappa: 0.3,
                },
                Crosstalk {
                    target: 2,
                    source: 3,
                    kappa: 0.25,
                },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitInfo {
    pub index: usize,
    pub frequency_ghz: Option<f64>,
    pub readout_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingMap {
    pub edges: Vec<(usize, usize)>,
    /// Informational only.
    #[serde(default)]
    pub qubits: Vec<QubitInfo>,
}

impl CouplingMap {
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for &(a, b) in &self.edges {
            if a == b {
                return Err(Error::InvalidConfig(format!("edge ({a}, {b}) is reflexive")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidConfig(format!("edge ({a}, {b}) listed twice")));
            }
        }
        Ok(())
    }

    pub fn qubits_used(&self) -> BTreeSet<usize> {
        self.edges.iter().flat_map(|&(a, b)| [a, b]).collect()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let map: Self = toml::from_str(text)?;
        map.validate()?;
        Ok(map)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("coupling map serializes")
    }
}

impl Default for CouplingMap {
    /// Linear chain 0–1–2–3–4.
    fn default() -> Self {
        Self {
            edges: vec![(0, 1), (1, 2), (2, 3), (3, 4)],
            qubits: vec![QubitInfo {
                index: 1,
                frequency_ghz: None,
                readout_error: Some(0.084),
            }],
        }
    }
}

/// Draws `shots_per_schedule` shots of both qubits for every schedule of
/// every coupled pair.
///
/// Each qubit's shot is Gaussian around the center of its own prepared state.
/// With `κ = model.kappa(q, neighbor) > 0`, the neighbor being excited moves
/// both centers by `κ · CROSSTALK_SHIFT_SCALE · ‖excited − ground‖` along the
/// ground→excited direction, and a latent shared by shot index across all
/// schedules of the pair carries variance fraction `CROSSTALK_CORRELATION_SCALE · κ`.
pub fn synthesize(
    model: &ReadoutModel,
    coupling: &CouplingMap,
    shots_per_schedule: usize,
    seed: u64,
) -> Result<IQShotTable> {
    model.validate()?;
    coupling.validate()?;
    if let Some(q) = coupling.qubits_used().into_iter().find(|&q| model.qubit(q).is_none()) {
        return Err(Error::InvalidConfig(format!("readout model lacks qubit {q}")));
    }
    let mut rows = Vec::with_capacity(coupling.edges.len() * 8 * shots_per_schedule);
    for (p, &pair) in coupling.edges.iter().enumerate() {
        let mut rng = seed::rng(seed::derive(seed, p as u64));
        let latent: Vec<f64> = (0..shots_per_schedule).map(|_| StandardNormal.sample(&mut rng)).collect();
        for schedule in Schedule::all(pair) {
            for qubit in [pair.0, pair.1] {
                let readout = model.qubit(qubit).expect("checked above");
                let kappa = model.kappa(qubit, schedule.neighbor_of(qubit));
                let center = if schedule.bit_of(qubit) == 1 {
                    readout.excited
                } else {
                    readout.ground
                };
                let delta = [readout.excited[0] - readout.ground[0], readout.excited[1] - readout.ground[1]];
                let shift = if schedule.bit_of(schedule.neighbor_of(qubit)) == 1 {
                    kappa * CROSSTALK_SHIFT_SCALE
                } else {
                    0.0
                };
                let w = (CROSSTALK_CORRELATION_SCALE * kappa).sqrt();
                let own = (1.0 - w * w).sqrt();
                for (shot, &xi) in latent.iter().enumerate() {
                    let ni: f64 = StandardNormal.sample(&mut rng);
                    let nq: f64 = StandardNormal.sample(&mut rng);
                    rows.push(ShotRow {
                        qubit,
                        schedule,
                        shot,
                        i: center[0] + shift * delta[0] + readout.stddev * (own * ni + w * xi),
                        q: center[1] + shift * delta[1] + readout.stddev * (own * nq + w * xi),
                    });
                }
            }
        }
    }
    Ok(IQShotTable {
        device: model.device.clone(),
        rows,
    })
}

/// The two per-qubit datasets of a pair, standardized and shifted nonnegative.
/// `single` holds the two schedules with the neighbor in ground; `both` holds
/// all four. Labels are the qubit's own prepared bit.
pub fn assemble_datasets(table: &IQShotTable, qubit: usize, pair: (usize, usize)) -> Result<(DataSet, DataSet)> {
    if qubit != pair.0 && qubit != pair.1 {
        return Err(Error::InvalidConfig(format!("qubit {qubit} is not in pair ({}, {})", pair.0, pair.1)));
    }
    let shots = table.pair_shots(pair)?;
    let build = |neighbor_states: &[u8]| -> Result<DataSet> {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for &neighbor in neighbor_states {
            for own in [0u8, 1] {
                let s = Schedule::with_states(pair, qubit, own, neighbor);
                for &(i, q) in &shots[&(qubit, s.bits)] {
                    rows.push([i, q]);
                    labels.push(own as usize);
                }
            }
        }
        Ok(DataSet::from_rows(&rows)?.with_labels(labels)?.standardized_nonnegative())
    };
    Ok((build(&[0])?, build(&[0, 1])?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableFormat {
    #[default]
    Csv,
    Tsv,
}

impl TableFormat {
    fn delimiter(self) -> u8 {
        match self {
            TableFormat::Csv => b',',
            TableFormat::Tsv => b'\t',
        }
    }
}

/// Writes the header and one row per shot; floats use the shortest
/// representation that parses back to the same value.
pub fn write_table<W: std::io::Write>(table: &IQShotTable, out: W, format: TableFormat) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(format.delimiter()).from_writer(out);
    w.write_record(TABLE_HEADER)?;
    for r in &table.rows {
        w.write_record([
            r.qubit.to_string(),
            r.schedule.to_string(),
            r.shot.to_string(),
            r.i.to_string(),
            r.q.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn read_table<R: std::io::Read>(input: R, format: TableFormat, device: &str) -> Result<IQShotTable> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter())
        .has_headers(false)
        .from_reader(input);
    let mut records = reader.records();
    match records.next() {
        None => {
            return Ok(IQShotTable {
                device: device.into(),
                rows: Vec::new(),
            })
        }
        Some(header) => {
            let header = header?;
            if header.iter().map(str::trim).ne(TABLE_HEADER) {
                return Err(Error::MalformedRow {
                    line: 1,
                    message: format!("expected header {}", TABLE_HEADER.join(",")),
                });
            }
        }
    }
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let malformed = |message: String| Error::MalformedRow { line, message };
        if record.len() != TABLE_HEADER.len() {
            return Err(malformed(format!("expected 5 fields, got {}", record.len())));
        }
        let field = |k: usize| record[k].trim();
        let int = |k: usize| -> Result<usize> {
            field(k)
                .parse()
                .map_err(|_| malformed(format!("{} {:?} is not an index", TABLE_HEADER[k], field(k))))
        };
        let float = |k: usize| -> Result<f64> {
            field(k)
                .parse()
                .map_err(|_| malformed(format!("{} {:?} is not a number", TABLE_HEADER[k], field(k))))
        };
        let row = ShotRow {
            qubit: int(0)?,
            schedule: field(1).parse().map_err(malformed)?,
            shot: int(2)?,
            i: float(3)?,
            q: float(4)?,
        };
        check_row(&row, line)?;
        if !seen.insert((row.qubit, row.schedule, row.shot)) {
            return Err(duplicate(&row, line));
        }
        rows.push(row);
    }
    Ok(IQShotTable {
        device: device.into(),
        rows,
    })
}

/// Reads a table file; the device name is taken from the file stem.
pub fn load_table(path: &Path, format: TableFormat) -> Result<IQShotTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let device = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    read_table(std::io::BufReader::new(file), format, &device)
}

pub fn save_table(table: &IQShotTable, path: &Path, format: TableFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_table(table, std::io::BufWriter::new(file), format)
}
