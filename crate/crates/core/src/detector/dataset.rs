//! Labeled corpus generation for the detector.
//!
//! The grid pairs 24 regular-overload cells (flat overloads of varying
//! power, ramp, and timing jitter — the things a legitimate traffic surge
//! or ordinary DDoS looks like) against 27 burst-attack cells (on/off
//! cycles across power, period, and ramp). Every cell is simulated
//! `runs_per_cell` times with per-run seeds derived from the master seed,
//! and each run is summarized into one 20-feature row.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ClusterConfig, ServiceModelConfig};
use crate::engine::run_simulation;
use crate::error::{Error, Result};
use crate::rng::{mix, shuffle};
use crate::workload::{Jitter, WorkloadSchedule};

use super::features::{extract_features, feature_names};

/// Flat-overload power factors for the regular half of the grid.
const REGULAR_POWERS: [f64; 4] = [1.0, 3.0, 5.0, 7.0];
/// Burst power factors for the attack half.
const ATTACK_POWERS: [f64; 3] = [15.0, 20.0, 30.0];
/// Ramp-up lengths (seconds) used by both halves.
const RAMPS: [u64; 3] = [30, 60, 120];
/// Burst on/off periods (seconds): 7/14, 10/20, and 12/24 minutes.
const ATTACK_PERIODS: [(u64, u64); 3] = [(420, 840), (600, 1200), (720, 1440)];
/// Regular runs cover the same horizon as the longest-period attacks.
const REGULAR_DURATION_SECS: u64 = 5400;
/// Attacks are simulated for exactly this many cycles.
const ATTACK_CYCLES: u32 = 3;

/// One cell of the generation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub name: String,
    /// `true` = burst attack.
    pub label: bool,
    pub schedule: WorkloadSchedule,
    pub duration_secs: u64,
}

/// The full grid at a given legitimate base rate.
pub fn detection_grid(base_rate: f64) -> Vec<GridCell> {
    let mut cells = Vec::new();
    for &k in &REGULAR_POWERS {
        for &ramp in &RAMPS {
            for (timing, jitter) in [
                ("steady", Jitter::None),
                ("jittered", Jitter::RandomUniform(0.8, 1.2)),
            ] {
                cells.push(GridCell {
                    name: format!("regular_k{k}_ramp{ramp}_{timing}"),
                    label: false,
                    schedule: WorkloadSchedule::flat_ddos(base_rate, k)
                        .with_ramp(ramp)
                        .with_jitter(jitter),
                    duration_secs: REGULAR_DURATION_SECS,
                });
            }
        }
    }
    for &k in &ATTACK_POWERS {
        for &(t_on, t_off) in &ATTACK_PERIODS {
            for &ramp in &RAMPS {
                cells.push(GridCell {
                    name: format!("attack_k{k}_on{t_on}_off{t_off}_ramp{ramp}"),
                    label: true,
                    schedule: WorkloadSchedule::yoyo(base_rate, k, t_on, t_off, ATTACK_CYCLES)
                        .with_ramp(ramp),
                    duration_secs: ATTACK_CYCLES as u64 * (t_on + t_off),
                });
            }
        }
    }
    cells
}

/// Corpus-generation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub runs_per_cell: usize,
    pub base_rate: f64,
    pub seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec {
            runs_per_cell: 3,
            base_rate: 30.0,
            seed: 7,
        }
    }
}

/// A feature matrix with labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Serializes as CSV: one column per feature, then a 0/1 `label`.
    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push("label");
        writer
            .write_record(&header)
            .map_err(|e| Error::Parse(format!("dataset CSV header: {e}")))?;
        for (row, &label) in self.features.iter().zip(&self.labels) {
            let mut record: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            record.push(if label { "1" } else { "0" }.to_string());
            writer
                .write_record(&record)
                .map_err(|e| Error::Parse(format!("dataset CSV row: {e}")))?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::Parse(format!("dataset CSV flush: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(format!("dataset CSV utf8: {e}")))
    }

    pub fn from_csv(text: &str) -> Result<Dataset> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| Error::Parse(format!("dataset CSV header: {e}")))?
            .clone();
        if header.len() < 2 || &header[header.len() - 1] != "label" {
            return Err(Error::Parse(
                "dataset CSV must end with a `label` column".into(),
            ));
        }
        let feature_names: Vec<String> =
            header.iter().take(header.len() - 1).map(String::from).collect();
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(format!("dataset CSV row {i}: {e}")))?;
            if record.len() != header.len() {
                return Err(Error::ArityMismatch {
                    expected: header.len(),
                    got: record.len(),
                });
            }
            let mut row = Vec::with_capacity(feature_names.len());
            for field in record.iter().take(feature_names.len()) {
                row.push(field.parse::<f64>().map_err(|e| {
                    Error::Parse(format!("dataset CSV row {i}: bad feature `{field}`: {e}"))
                })?);
            }
            let label_field = &record[record.len() - 1];
            labels.push(match label_field {
                "1" => true,
                "0" => false,
                other => {
                    return Err(Error::Parse(format!(
                        "dataset CSV row {i}: label must be 0 or 1, got `{other}`"
                    )))
                }
            });
            features.push(row);
        }
        if features.is_empty() {
            return Err(Error::EmptyInput("dataset CSV has no rows".into()));
        }
        Ok(Dataset {
            feature_names,
            features,
            labels,
        })
    }
}

/// Simulates the whole grid and extracts features. Runs fan out across
/// threads; output order is the deterministic (cell, repetition) order.
pub fn generate_dataset(
    spec: &DatasetSpec,
    cluster: &ClusterConfig,
    service: &ServiceModelConfig,
) -> Result<Dataset> {
    if spec.runs_per_cell == 0 {
        return Err(Error::InvalidConfig("runs_per_cell must be at least 1".into()));
    }
    cluster.validate()?;
    service.validate()?;
    let cells = detection_grid(spec.base_rate);
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..spec.runs_per_cell).map(move |r| (c, r)))
        .collect();
    let rows: Result<Vec<(Vec<f64>, bool)>> = jobs
        .par_iter()
        .map(|&(cell_idx, rep)| {
            let cell = &cells[cell_idx];
            let seed = mix(spec.seed, cell_idx as u64, rep as u64);
            let result =
                run_simulation(cluster, service, &cell.schedule, cell.duration_secs, seed)?;
            let features = extract_features(&result.trace, cell.duration_secs)?;
            Ok((features, cell.label))
        })
        .collect();
    let rows = rows?;
    Ok(Dataset {
        feature_names: feature_names(),
        features: rows.iter().map(|(f, _)| f.clone()).collect(),
        labels: rows.iter().map(|&(_, l)| l).collect(),
    })
}

/// Seeded shuffle split. `train_fraction` of the samples (rounded, but
/// always leaving at least one sample on each side) go to the first
/// returned dataset.
pub fn train_test_split(
    dataset: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    let n = dataset.len();
    if n < 2 {
        return Err(Error::EmptyInput(
            "splitting needs at least two samples".into(),
        ));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train_fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    shuffle(&mut indices, seed);
    let train_n = ((n as f64 * train_fraction).round() as usize).clamp(1, n - 1);
    let pick = |idx: &[usize]| Dataset {
        feature_names: dataset.feature_names.clone(),
        features: idx.iter().map(|&i| dataset.features[i].clone()).collect(),
        labels: idx.iter().map(|&i| dataset.labels[i]).collect(),
    };
    Ok((pick(&indices[..train_n]), pick(&indices[train_n..])))
}
