//! qk-means and its classical counterpart.
//!
//! Each iteration computes the distance from every point to every center (one
//! SwapTest circuit per pair in the quantum modes, submitted as a batch),
//! assigns each point to its nearest center, and replaces each center by the
//! mean of its points in the original feature space. Iteration stops when the
//! L1 sum of center coordinate changes drops below `tol`, or after `max_iter`
//! iterations.
//!
//! Rules shared by every mode:
//! - ties go to the lowest center index;
//! - an empty cluster takes the point farthest from its own assigned center;
//! - qk-means++ seeding is greedy: after a uniformly drawn first center, each
//!   new center is the unchosen point with the largest distance to its closest
//!   chosen center (ties to the lowest index).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::DataSet;
use crate::distance::{batch_distances, BatchConfig, BatchStats, DistanceRequest, ExecutionMode};
use crate::encoding::{self, EncodedPoint, Strategy};
use crate::seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMode {
    QuantumExact,
    QuantumSampled,
    ClassicalEuclidean,
}

impl DistanceMode {
    pub fn is_quantum(self) -> bool {
        !matches!(self, DistanceMode::ClassicalEuclidean)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    #[default]
    QkMeansPlusPlus,
    RandomSample,
}

/// How distances are evaluated: mode, encoding for the quantum modes, and batching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistanceSettings {
    pub mode: DistanceMode,
    pub encoding: Strategy,
    pub batch: BatchConfig,
}

impl DistanceSettings {
    pub fn classical() -> Self {
        Self {
            mode: DistanceMode::ClassicalEuclidean,
            encoding: Strategy::Amplitude,
            batch: BatchConfig::default(),
        }
    }

    pub fn quantum_exact() -> Self {
        Self {
            mode: DistanceMode::QuantumExact,
            ..Self::classical()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub n_clusters: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub init: Init,
    pub distance_mode: DistanceMode,
    pub encoding: Strategy,
    pub batch: BatchConfig,
    pub seed: u64,
}

impl FitConfig {
    pub fn new(n_clusters: usize) -> Self {
        Self {
            n_clusters,
            max_iter: 30,
            tol: 1e-4,
            init: Init::QkMeansPlusPlus,
            distance_mode: DistanceMode::QuantumExact,
            encoding: Strategy::Amplitude,
            batch: BatchConfig::default(),
            seed: 0,
        }
    }

    pub fn with_mode(mut self, mode: DistanceMode) -> Self {
        self.distance_mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.batch.seed = seed::derive(seed, 0xBA7C);
        self
    }

    pub fn distance_settings(&self) -> DistanceSettings {
        DistanceSettings {
            mode: self.distance_mode,
            encoding: self.encoding,
            batch: self.batch,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_clusters == 0 {
            return Err(Error::InvalidConfig("n_clusters must be >= 1".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be >= 1".into()));
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig(format!("tol must be finite and >= 0, got {}", self.tol)));
        }
        self.batch.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub cluster_centers: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    /// L1 center shift of each iteration.
    pub inertia_history: Vec<f64>,
    pub n_iter: usize,
    pub converged: bool,
    pub encoding: Strategy,
    /// Batch statistics of each iteration's distance evaluation (quantum modes only).
    pub job_history: Vec<BatchStats>,
    /// Batch statistics of the seeding rounds (quantum qk-means++ only).
    pub init_job_history: Vec<BatchStats>,
}

impl ClusterModel {
    pub fn n_clusters(&self) -> usize {
        self.cluster_centers.len()
    }

    pub fn n_features(&self) -> usize {
        self.cluster_centers[0].len()
    }

    /// Assigns each row of `data` to its nearest center.
    pub fn predict(&self, data: &DataSet, mode: DistanceMode, batch: &BatchConfig) -> Result<Vec<usize>> {
        if data.n_features() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                actual: data.n_features(),
            });
        }
        let settings = DistanceSettings {
            mode,
            encoding: self.encoding,
            batch: *batch,
        };
        let engine = Engine::new(data, &settings)?;
        let (dist, _) = engine.to_centers(&self.cluster_centers, batch.seed)?;
        Ok(argmin_rows(&dist, self.n_clusters()))
    }
}

/// Distance evaluation between the rows of a dataset and a set of centers.
struct Engine<'a> {
    data: &'a DataSet,
    settings: DistanceSettings,
    encoded: Vec<EncodedPoint>,
}

impl<'a> Engine<'a> {
    fn new(data: &'a DataSet, settings: &DistanceSettings) -> Result<Self> {
        let encoded = if settings.mode.is_quantum() {
            data.rows()
                .map(|row| encoding::encode(settings.encoding, row))
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        Ok(Self {
            data,
            settings: *settings,
            encoded,
        })
    }

    /// Row-major `N × centers.len()` distance matrix; batch stats in the quantum modes.
    fn to_centers(&self, centers: &[Vec<f64>], batch_seed: u64) -> Result<(Vec<f64>, Option<BatchStats>)> {
        let k = centers.len();
        if !self.settings.mode.is_quantum() {
            let dist = self
                .data
                .rows()
                .flat_map(|row| centers.iter().map(move |c| euclidean(row, c)))
                .collect();
            return Ok((dist, None));
        }
        let encoded_centers = centers
            .iter()
            .map(|c| encoding::encode(self.settings.encoding, c))
            .collect::<Result<Vec<_>>>()?;
        let shots = self.settings.batch.shots_per_circuit;
        let mut requests = Vec::with_capacity(self.encoded.len() * k);
        for point in &self.encoded {
            for center in &encoded_centers {
                requests.push(DistanceRequest {
                    left: point,
                    right: center,
                    shots,
                });
            }
        }
        let mode = match self.settings.mode {
            DistanceMode::QuantumSampled => ExecutionMode::Sampled,
            _ => ExecutionMode::Exact,
        };
        let batch = BatchConfig {
            seed: batch_seed,
            ..self.settings.batch
        };
        let (dist, stats) = batch_distances(&requests, &batch, mode)?;
        Ok((dist, Some(stats)))
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn argmin_rows(dist: &[f64], k: usize) -> Vec<usize> {
    dist.chunks_exact(k)
        .map(|row| {
            let mut best = 0;
            for (j, &d) in row.iter().enumerate().skip(1) {
                if d < row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

fn check_sizes(data: &DataSet, k: usize) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    if k == 0 {
        return Err(Error::InvalidConfig("n_clusters must be >= 1".into()));
    }
    if data.len() < k {
        return Err(Error::TooFewSamples {
            needed: k,
            available: data.len(),
        });
    }
    Ok(())
}

fn seeding_round_seed(batch_seed: u64, round: usize) -> u64 {
    seed::derive(seed::derive(batch_seed, u64::MAX), round as u64)
}

fn iteration_seed(batch_seed: u64, iteration: usize) -> u64 {
    seed::derive(batch_seed, iteration as u64 + 1)
}

/// Greedy farthest-point seeding starting from row `first`.
///
/// Returns the chosen row indices and the batch statistics of each round.
pub fn farthest_point_init(
    data: &DataSet,
    k: usize,
    first: usize,
    settings: &DistanceSettings,
) -> Result<(Vec<usize>, Vec<BatchStats>)> {
    check_sizes(data, k)?;
    if first >= data.len() {
        return Err(Error::TooFewSamples {
            needed: first + 1,
            available: data.len(),
        });
    }
    let engine = Engine::new(data, settings)?;
    let mut chosen = vec![first];
    let mut stats = Vec::new();
    let mut min_dist = vec![f64::INFINITY; data.len()];
    while chosen.len() < k {
        let newest = data.row(*chosen.last().unwrap()).to_vec();
        let round_seed = seeding_round_seed(settings.batch.seed, chosen.len());
        let (dist, round_stats) = engine.to_centers(std::slice::from_ref(&newest), round_seed)?;
        stats.extend(round_stats);
        for (m, d) in min_dist.iter_mut().zip(dist) {
            *m = m.min(d);
        }
        let mut best: Option<usize> = None;
        for (i, &d) in min_dist.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            if best.is_none_or(|b| d > min_dist[b]) {
                best = Some(i);
            }
        }
        chosen.push(best.expect("N >= K leaves an unchosen point"));
    }
    Ok((chosen, stats))
}

/// qk-means++ seeding: the first center is drawn uniformly using `seed`.
pub fn qkmeans_plusplus_init(
    data: &DataSet,
    k: usize,
    settings: &DistanceSettings,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    check_sizes(data, k)?;
    let first = seed::rng(seed).random_range(0..data.len());
    let (chosen, _) = farthest_point_init(data, k, first, settings)?;
    Ok(chosen.iter().map(|&i| data.row(i).to_vec()).collect())
}

/// New centers as cluster means; empty clusters take the point farthest from
/// its own center (distinct points when several clusters are empty).
fn update_centers(data: &DataSet, labels: &[usize], dist: &[f64], k: usize) -> Vec<Vec<f64>> {
    let f = data.n_features();
    let mut sums = vec![vec![0.0; f]; k];
    let mut counts = vec![0usize; k];
    for (row, &l) in data.rows().zip(labels) {
        counts[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(row) {
            *s += x;
        }
    }
    let mut taken: Vec<usize> = Vec::new();
    for c in 0..k {
        if counts[c] > 0 {
            let n = counts[c] as f64;
            sums[c].iter_mut().for_each(|s| *s /= n);
            continue;
        }
        let mut far: Option<usize> = None;
        for (i, &l) in labels.iter().enumerate() {
            if taken.contains(&i) {
                continue;
            }
            let d = dist[i * k + l];
            if far.is_none_or(|b| d > dist[b * k + labels[b]]) {
                far = Some(i);
            }
        }
        let i = far.expect("more points than empty clusters");
        taken.push(i);
        sums[c] = data.row(i).to_vec();
    }
    sums
}

fn l1_shift(old: &[Vec<f64>], new: &[Vec<f64>]) -> f64 {
    old.iter()
        .zip(new)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .sum()
}

pub fn fit(data: &DataSet, config: &FitConfig) -> Result<ClusterModel> {
    config.validate()?;
    check_sizes(data, config.n_clusters)?;
    let k = config.n_clusters;
    let settings = config.distance_settings();
    let engine = Engine::new(data, &settings)?;

    let (mut centers, init_job_history) = match config.init {
        Init::QkMeansPlusPlus => {
            let first = seed::rng(config.seed).random_range(0..data.len());
            let (chosen, stats) = farthest_point_init(data, k, first, &settings)?;
            (chosen.iter().map(|&i| data.row(i).to_vec()).collect::<Vec<_>>(), stats)
        }
        Init::RandomSample => {
            let picked = rand::seq::index::sample(&mut seed::rng(config.seed), data.len(), k);
            (picked.iter().map(|i| data.row(i).to_vec()).collect(), Vec::new())
        }
    };

    let mut labels = Vec::new();
    let mut inertia_history = Vec::new();
    let mut job_history = Vec::new();
    let mut converged = false;
    for iteration in 0..config.max_iter {
        let (dist, stats) = engine.to_centers(&centers, iteration_seed(config.batch.seed, iteration))?;
        job_history.extend(stats);
        labels = argmin_rows(&dist, k);
        let new_centers = update_centers(data, &labels, &dist, k);
        let shift = l1_shift(&centers, &new_centers);
        inertia_history.push(shift);
        centers = new_centers;
        if shift < config.tol {
            converged = true;
            break;
        }
    }

    Ok(ClusterModel {
        cluster_centers: centers,
        labels,
        n_iter: inertia_history.len(),
        inertia_history,
        converged,
        encoding: config.encoding,
        job_history,
        init_job_history,
    })
}

/// Plain Lloyd iteration with Euclidean distances, written independently of
/// [`fit`] and used to cross-check it. Seeding, tie-breaking, empty-cluster and
/// stopping rules match `fit` with [`Init::QkMeansPlusPlus`].
pub fn classical_kmeans_oracle(
    data: &DataSet,
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<ClusterModel> {
    check_sizes(data, k)?;
    if max_iter == 0 {
        return Err(Error::InvalidConfig("max_iter must be >= 1".into()));
    }
    let n = data.len();
    let sq = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum() };

    let first = seed::rng(seed).random_range(0..n);
    let mut chosen = vec![first];
    let mut closest = vec![f64::INFINITY; n];
    while chosen.len() < k {
        let c = data.row(*chosen.last().unwrap());
        for i in 0..n {
            closest[i] = closest[i].min(sq(data.row(i), c));
        }
        let next = (0..n)
            .filter(|i| !chosen.contains(i))
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if closest[b] >= closest[i] => Some(b),
                _ => Some(i),
            })
            .unwrap();
        chosen.push(next);
    }
    let mut centers: Vec<Vec<f64>> = chosen.iter().map(|&i| data.row(i).to_vec()).collect();

    let mut labels = vec![0; n];
    let mut history = Vec::new();
    let mut converged = false;
    for _ in 0..max_iter {
        let mut own = vec![0.0; n];
        for i in 0..n {
            let mut best = 0;
            let mut best_d = sq(data.row(i), &centers[0]);
            for (j, c) in centers.iter().enumerate().skip(1) {
                let d = sq(data.row(i), c);
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            labels[i] = best;
            own[i] = best_d;
        }
        let mut next = vec![vec![0.0; data.n_features()]; k];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            for (s, x) in next[labels[i]].iter_mut().zip(data.row(i)) {
                *s += x;
            }
        }
        let mut used = Vec::new();
        for j in 0..k {
            if counts[j] == 0 {
                let far = (0..n)
                    .filter(|i| !used.contains(i))
                    .fold(None, |best: Option<usize>, i| match best {
                        Some(b) if own[b] >= own[i] => Some(b),
                        _ => Some(i),
                    })
                    .unwrap();
                used.push(far);
                next[j] = data.row(far).to_vec();
            } else {
                let c = counts[j] as f64;
                next[j].iter_mut().for_each(|s| *s /= c);
            }
        }
        let mut shift = 0.0;
        for (a, b) in centers.iter().zip(&next) {
            for (x, y) in a.iter().zip(b) {
                shift += (x - y).abs();
            }
        }
        history.push(shift);
        centers = next;
        if shift < tol {
            converged = true;
            break;
        }
    }
    Ok(ClusterModel {
        cluster_centers: centers,
        labels,
        n_iter: history.len(),
        inertia_history: history,
        converged,
        encoding: Strategy::Amplitude,
        job_history: Vec::new(),
        init_job_history: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexity::{verify_job_counts, ComplexityParams};
    use crate::metrics::assignment_fidelity;
    use crate::encoding::Strategy as Encoding;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    /// Fits and checks the per-iteration job accounting of quantum runs.
    fn checked_fit(data: &DataSet, config: &FitConfig) -> ClusterModel {
        let model = fit(data, config).unwrap();
        if config.distance_mode.is_quantum() {
            let p = ComplexityParams::new(data.len(), config.n_clusters, data.n_features(), model.n_iter, config.batch.max_circuits_per_job).unwrap();
            assert!(!model.job_history.is_empty());
            assert!(verify_job_counts(&model.job_history, &p));
        }
        model
    }

    /// Two isotropic blobs separated along the anti-diagonal, `sep` stddevs apart.
    fn blobs(n_per: usize, sep: f64, seed: u64) -> DataSet {
        let mut rng = seed::rng(seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let half = sep / 2.0 / std::f64::consts::SQRT_2;
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (label, sign) in [(0usize, -1.0), (1, 1.0)] {
            for _ in 0..n_per {
                rows.push([
                    5.0 + sign * half + noise.sample(&mut rng),
                    3.0 - sign * half + noise.sample(&mut rng),
                ]);
                labels.push(label);
            }
        }
        DataSet::from_rows(&rows).unwrap().with_labels(labels).unwrap()
    }

    #[test]
    fn classical_recovers_separated_blobs() {
        let data = blobs(100, 12.0, 1);
        let model = checked_fit(&data, &FitConfig::new(2).with_mode(DistanceMode::ClassicalEuclidean).with_seed(3));
        assert!(model.converged);
        assert!(assignment_fidelity(&model.labels, data.labels().unwrap()).unwrap() >= 0.99);
    }

    #[test]
    fn quantum_exact_matches_classical_on_standardized_blobs() {
        let data = blobs(100, 10.0, 2).standardized_nonnegative();
        let classical = checked_fit(&data, &FitConfig::new(2).with_mode(DistanceMode::ClassicalEuclidean).with_seed(5));
        let quantum = checked_fit(&data, &FitConfig::new(2).with_mode(DistanceMode::QuantumExact).with_seed(5));
        let agreement = assignment_fidelity(&quantum.labels, &classical.labels).unwrap();
        assert!(agreement >= 0.99, "agreement {agreement}");
        assert!(assignment_fidelity(&quantum.labels, data.labels().unwrap()).unwrap() >= 0.99);
    }

    #[test]
    fn quantum_sampled_and_angle_modes_run() {
        let data = blobs(40, 10.0, 4).standardized_nonnegative();
        let mut config = FitConfig::new(2).with_mode(DistanceMode::QuantumSampled).with_seed(1);
        config.batch.shots_per_circuit = 512;
        config.batch.max_circuits_per_job = 50;
        let sampled = checked_fit(&data, &config);
        assert!(assignment_fidelity(&sampled.labels, data.labels().unwrap()).unwrap() >= 0.95);
        assert_eq!(sampled, fit(&data, &config).unwrap());

        config.distance_mode = DistanceMode::QuantumExact;
        config.encoding = Encoding::Angle;
        let angle = checked_fit(&data, &config);
        config.encoding = Encoding::Amplitude;
        let amplitude = checked_fit(&data, &config);
        assert_eq!(angle.labels, amplitude.labels);
    }

    #[test]
    fn distinct_points_are_their_own_centers() {
        let data = DataSet::from_rows(&[[0.0, 1.0], [4.0, 0.5], [2.0, 7.0]]).unwrap();
        for mode in [DistanceMode::ClassicalEuclidean, DistanceMode::QuantumExact] {
            let model = checked_fit(&data, &FitConfig::new(3).with_mode(mode));
            assert!(model.converged && model.n_iter <= 2);
            assert_eq!(*model.inertia_history.last().unwrap(), 0.0);
            let mut centers = model.cluster_centers.clone();
            centers.sort_by(|a, b| a[0].total_cmp(&b[0]));
            assert_eq!(centers, vec![vec![0.0, 1.0], vec![2.0, 7.0], vec![4.0, 0.5]]);
        }
    }

    #[test]
    fn farthest_point_seeding_example() {
        let data = DataSet::from_rows(&[[0.0, 1.0], [1.0, 0.0], [0.99, 0.01]]).unwrap();
        // candidate min-distances from (0,1): √2 for (1,0) versus √1.9602 for (0.99,0.01)
        assert!(euclidean(data.row(1), data.row(0)) > euclidean(data.row(2), data.row(0)));
        for settings in [DistanceSettings::classical(), DistanceSettings::quantum_exact()] {
            let (chosen, _) = farthest_point_init(&data, 2, 0, &settings).unwrap();
            assert_eq!(chosen, vec![0, 1]);
        }
        let one = qkmeans_plusplus_init(&data, 1, &DistanceSettings::classical(), 9).unwrap();
        assert_eq!(one.len(), 1);
        let all = qkmeans_plusplus_init(&data, 3, &DistanceSettings::classical(), 9).unwrap();
        let mut all_sorted = all.clone();
        all_sorted.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(all_sorted, vec![vec![0.0, 1.0], vec![0.99, 0.01], vec![1.0, 0.0]]);
        assert!(qkmeans_plusplus_init(&data, 4, &DistanceSettings::classical(), 9).is_err());
    }

    #[test]
    fn seeding_exhausts_duplicates() {
        let data = DataSet::from_rows(&[[1.0, 1.0]; 4]).unwrap();
        let (chosen, stats) = farthest_point_init(&data, 4, 2, &DistanceSettings::quantum_exact()).unwrap();
        assert_eq!(chosen, vec![2, 0, 1, 3]);
        assert_eq!(stats.len(), 3);
    }

    #[test]
    fn predict_rules() {
        let model = ClusterModel {
            cluster_centers: vec![vec![0.0, 0.0], vec![2.0, 0.0]],
            labels: vec![],
            inertia_history: vec![],
            n_iter: 0,
            converged: false,
            encoding: Encoding::Amplitude,
            job_history: vec![],
            init_job_history: vec![],
        };
        let data = DataSet::from_rows(&[[2.0, 0.0], [0.0, 0.0], [1.0, 5.0]]).unwrap();
        let labels = model
            .predict(&data, DistanceMode::ClassicalEuclidean, &BatchConfig::default())
            .unwrap();
        assert_eq!(labels, vec![1, 0, 0]);
        let wrong = DataSet::from_rows(&[[1.0, 2.0, 3.0]]).unwrap();
        assert!(model.predict(&wrong, DistanceMode::ClassicalEuclidean, &BatchConfig::default()).is_err());
    }

    #[test]
    fn held_out_blobs_predict_well() {
        let all = blobs(300, 8.0, 11).standardized_nonnegative();
        let train: Vec<usize> = (0..600).filter(|i| i % 3 != 0).collect();
        let test: Vec<usize> = (0..600).filter(|i| i % 3 == 0).collect();
        let (train, test) = (all.subset(&train), all.subset(&test));
        for mode in [DistanceMode::ClassicalEuclidean, DistanceMode::QuantumExact] {
            let model = checked_fit(&train, &FitConfig::new(2).with_mode(mode).with_seed(2));
            let predicted = model.predict(&test, mode, &BatchConfig::default()).unwrap();
            assert!(assignment_fidelity(&predicted, test.labels().unwrap()).unwrap() >= 0.97);
        }
    }

    #[test]
    fn size_errors() {
        let data = DataSet::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert!(matches!(fit(&data, &FitConfig::new(3)), Err(Error::TooFewSamples { .. })));
        assert!(classical_kmeans_oracle(&data, 3, 0, 10, 1e-4).is_err());
        let mut bad = FitConfig::new(1);
        bad.max_iter = 0;
        assert!(fit(&data, &bad).is_err());
        let zero = DataSet::from_rows(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
        assert!(matches!(fit(&zero, &FitConfig::new(1)), Err(Error::ZeroVector)));
    }

    /// Minimal weighted within-cluster sum of squares over every 2-partition of
    /// 1-D points, returning the sorted optimal centers.
    fn brute_force_1d(points: &[(f64, f64)]) -> Vec<f64> {
        let n = points.len();
        let mut best = (f64::INFINITY, vec![]);
        for mask in 1..(1u32 << n) - 1 {
            let mut sse = 0.0;
            let mut centers = vec![];
            for side in [0, 1] {
                let members: Vec<_> = (0..n).filter(|&i| (mask >> i & 1) as usize == side).collect();
                let w: f64 = members.iter().map(|&i| points[i].1).sum();
                let c = members.iter().map(|&i| points[i].0 * points[i].1).sum::<f64>() / w;
                sse += members.iter().map(|&i| points[i].1 * (points[i].0 - c).powi(2)).sum::<f64>();
                centers.push(c);
            }
            if sse < best.0 {
                centers.sort_by(f64::total_cmp);
                best = (sse, centers);
            }
        }
        best.1
    }

    fn sorted_centers_1d(model: &ClusterModel) -> Vec<f64> {
        let mut c: Vec<f64> = model.cluster_centers.iter().map(|c| c[0]).collect();
        c.sort_by(f64::total_cmp);
        c
    }

    #[test]
    fn oracle_finds_optimal_1d_split() {
        let expected = brute_force_1d(&[(0.0, 1.0), (1.0, 1.0), (10.0, 1.0), (11.0, 1.0)]);
        assert_eq!(expected, vec![0.5, 10.5]);
        let data = DataSet::from_rows(&[[0.0], [1.0], [10.0], [11.0]]).unwrap();
        for seed in 0..4 {
            let model = classical_kmeans_oracle(&data, 2, seed, 30, 1e-4).unwrap();
            assert_eq!(sorted_centers_1d(&model), expected);
        }
    }

    #[test]
    fn oracle_single_cluster_is_column_mean() {
        let data = DataSet::from_rows(&[[1.0, 4.0], [3.0, 8.0], [5.0, 0.0]]).unwrap();
        let model = classical_kmeans_oracle(&data, 1, 0, 30, 1e-4).unwrap();
        assert_eq!(model.cluster_centers, vec![vec![3.0, 4.0]]);
    }

    #[test]
    fn duplicates_behave_like_weights() {
        let data = DataSet::from_rows(&[[0.0], [0.0], [0.0], [1.0], [10.0], [10.0], [11.0]]).unwrap();
        let expected = brute_force_1d(&[(0.0, 3.0), (1.0, 1.0), (10.0, 2.0), (11.0, 1.0)]);
        for seed in 0..7 {
            let model = classical_kmeans_oracle(&data, 2, seed, 30, 1e-4).unwrap();
            let got = sorted_centers_1d(&model);
            for (g, e) in got.iter().zip(&expected) {
                assert!((g - e).abs() < 1e-12, "{got:?} vs {expected:?}");
            }
        }
    }

    #[test]
    fn empty_cluster_takes_farthest_point() {
        // Centers (0,0) and (100,100) with all points near the origin: cluster 1 empties.
        let data = DataSet::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 3.0]]).unwrap();
        let labels = vec![0, 0, 0];
        let dist = vec![0.0, 141.0, 1.0, 140.0, 3.0, 139.0];
        let centers = update_centers(&data, &labels, &dist, 2);
        assert_eq!(centers[1], vec![0.0, 3.0]);
        assert!((centers[0][0] - 1.0 / 3.0).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn fit_matches_oracle_and_invariants(seed in any::<u64>(), n in 3usize..40, k in 1usize..5) {
            prop_assume!(n >= k);
            let mut rng = seed::rng(seed);
            let rows: Vec<[f64; 2]> = (0..n).map(|_| [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)]).collect();
            let data = DataSet::from_rows(&rows).unwrap();
            let mut config = FitConfig::new(k).with_mode(DistanceMode::ClassicalEuclidean).with_seed(seed);
            config.max_iter = 20;
            let model = checked_fit(&data, &config);
            let oracle = classical_kmeans_oracle(&data, k, seed, 20, config.tol).unwrap();
            prop_assert_eq!(&model.labels, &oracle.labels);
            prop_assert_eq!(model.n_iter, oracle.n_iter);
            for (a, b) in model.cluster_centers.iter().zip(&oracle.cluster_centers) {
                for (x, y) in a.iter().zip(b) {
                    prop_assert!((x - y).abs() < 1e-12);
                }
            }
            prop_assert!(model.n_iter <= 20 && model.inertia_history.len() == model.n_iter);
            prop_assert!(model.labels.iter().all(|&l| l < k));
            prop_assert!(model.cluster_centers.iter().flatten().all(|x| x.is_finite()));
            if model.converged {
                prop_assert!(*model.inertia_history.last().unwrap() < config.tol);
            }

            let shifted = data.standardized_nonnegative();
            let mut q = config.clone().with_mode(DistanceMode::QuantumExact);
            q.batch.max_circuits_per_job = 7;
            let qm = checked_fit(&shifted, &q);
            prop_assert!(qm.labels.iter().all(|&l| l < k));
        }
    }
}
