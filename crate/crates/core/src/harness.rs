//! Train/test experiment pipeline.
//!
//! The protocol: estimate the potential-pain matrix from the train days'
//! usage plus the train-period scans, let each configured solver pick an
//! allocation, freeze it, then score it on the test day. The sensing matrix
//! is estimated once from the train scans and reused for the test day (scan
//! coverage is sparse and who-senses-whom is stable over weeks); only the
//! co-usage matrix is rebuilt from test-day usage.
//!
//! Train pain is reported per day: one co-usage matrix per train day, the
//! frozen allocation scored on each day's pain matrix, then averaged. Test
//! pain pools all test-day usage into a single matrix.
//!
//! Reports are byte-identical across runs of the same spec: all randomness
//! comes from the spec seed fanned out per solver entry, and the report is
//! assembled in solver-name order.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::estimation::{
    binarize_sensing, build_usage_series, co_usage, potential_pain, snr_matrix, EstimationConfig,
    MacMap, ScanObservation, UsageSample,
};
use crate::io::{self, MatrixDocument};
use crate::pain::{Neighborhood, PainMatrix};
use crate::solver::{solve_with, SolverKind, SolverReportDocument};
use crate::{Error, Result};

/// Derives a named sub-seed from a master seed: the first eight bytes
/// (little-endian) of `SHA-256(master_le_bytes || label)`.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

/// One solver to run in the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverEntry {
    /// Report key; defaults to the solver name. Must be unique per spec.
    #[serde(default)]
    pub name: Option<String>,
    pub solver: SolverKind,
    /// Solver-specific configuration; missing fields take defaults. Unless
    /// the object carries an explicit `seed`, the solver seed is derived
    /// from the spec seed and this entry's name.
    #[serde(default)]
    pub config: serde_json::Value,
}

impl SolverEntry {
    pub fn key(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| self.solver.as_str().to_string())
    }
}

/// Experiment description, read from JSON.
///
/// Each train/test day entry is either a usage CSV path or a directory
/// containing exactly one `usage*.csv`. Relative paths are resolved against
/// the directory passed to [`run_pipeline`] (the CLI uses the spec file's
/// directory).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub train_day_dirs: Vec<String>,
    pub test_day_dirs: Vec<String>,
    pub scans: String,
    pub macmap: String,
    pub num_channels: usize,
    #[serde(default)]
    pub estimation: EstimationConfig,
    pub solvers: Vec<SolverEntry>,
    #[serde(default)]
    pub seed: u64,
    pub output_path: String,
}

/// Per-solver outcome: the frozen allocation and its train/test scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOutcome {
    pub solver: String,
    /// Solve-time objective on the pooled train matrix.
    pub train_objective: f64,
    /// Average per-train-day total pain of the frozen allocation.
    pub train_pain_per_day: f64,
    /// Total pain of the frozen allocation on the test matrix.
    pub test_pain: f64,
    pub allocation: MatrixDocument,
    /// SHA-256 of the serialized allocation; the test score provably used
    /// the train-time allocation.
    pub allocation_digest: String,
    pub report: SolverReportDocument,
}

/// SHA-256 digests of the emitted estimation matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDigests {
    pub u: String,
    pub s: String,
    pub s_b: String,
    pub p: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub home_ids: Vec<String>,
    pub num_channels: usize,
    pub train_days: Vec<String>,
    pub test_days: Vec<String>,
    pub seed: u64,
    pub digests: MatrixDigests,
    pub solvers: BTreeMap<String, SolverOutcome>,
}

/// The estimation chain's outputs for one window of usage data.
pub struct EstimatedMatrices {
    pub neighborhood: Neighborhood,
    pub u: PainMatrix,
    pub s: PainMatrix,
    pub s_b: PainMatrix,
    pub p: PainMatrix,
}

/// Runs the full chain over concatenated usage files.
///
/// The neighborhood is the lexicographically sorted union of home ids seen
/// in the usage files and in the MAC map.
pub fn estimate_from_files(
    usage_paths: &[PathBuf],
    scans_path: &Path,
    macmap_path: &Path,
    cfg: &EstimationConfig,
    num_channels: usize,
) -> Result<EstimatedMatrices> {
    let mut samples = Vec::new();
    for path in usage_paths {
        samples.extend(io::read_usage_csv(path)?);
    }
    let scans = io::read_scans_csv(scans_path)?;
    let mac_map = io::read_macmap_csv(macmap_path)?;
    let neighborhood = derive_neighborhood(&samples, &mac_map, num_channels)?;
    estimate(&samples, &scans, &mac_map, &neighborhood, cfg)
}

fn derive_neighborhood(
    samples: &[UsageSample],
    mac_map: &MacMap,
    num_channels: usize,
) -> Result<Neighborhood> {
    let mut ids: Vec<String> = samples
        .iter()
        .map(|s| s.home_id.clone())
        .chain(mac_map.home_ids().map(str::to_string))
        .collect();
    ids.sort();
    ids.dedup();
    Neighborhood::new(ids, num_channels)
}

fn estimate(
    samples: &[UsageSample],
    scans: &[ScanObservation],
    mac_map: &MacMap,
    neighborhood: &Neighborhood,
    cfg: &EstimationConfig,
) -> Result<EstimatedMatrices> {
    let series = build_usage_series(samples, cfg, neighborhood)?;
    let u = co_usage(&series);
    let s = snr_matrix(scans, mac_map, neighborhood)?;
    let s_b = binarize_sensing(&s, cfg)?;
    let p = potential_pain(&u, &s_b)?;
    Ok(EstimatedMatrices {
        neighborhood: neighborhood.clone(),
        u,
        s,
        s_b,
        p,
    })
}

/// Resolves a day entry to its usage CSV.
fn usage_csv_for_day(base: &Path, entry: &str) -> Result<PathBuf> {
    let path = resolve(base, entry);
    if path.is_dir() {
        let mut matches: Vec<PathBuf> = std::fs::read_dir(&path)
            .map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .map(|n| n.starts_with("usage") && n.ends_with(".csv"))
                    .unwrap_or(false)
            })
            .collect();
        matches.sort();
        match matches.len() {
            1 => Ok(matches.remove(0)),
            0 => Err(Error::invalid(
                "experiment spec",
                format!("day directory {} contains no usage*.csv", path.display()),
            )),
            n => Err(Error::invalid(
                "experiment spec",
                format!(
                    "day directory {} contains {n} usage*.csv files; list one file per day",
                    path.display()
                ),
            )),
        }
    } else {
        Ok(path)
    }
}

/// Joins a possibly relative spec path onto the base directory.
pub fn resolve(base: &Path, entry: &str) -> PathBuf {
    let p = Path::new(entry);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Runs the experiment and writes the report to the spec's `output_path`.
pub fn run_pipeline(spec: &ExperimentSpec, base: &Path) -> Result<ExperimentReport> {
    if spec.train_day_dirs.is_empty() || spec.test_day_dirs.is_empty() {
        return Err(Error::invalid(
            "experiment spec",
            "need at least one train day and one test day",
        ));
    }
    {
        let mut keys: Vec<String> = spec.solvers.iter().map(|s| s.key()).collect();
        keys.sort();
        keys.dedup();
        if keys.len() != spec.solvers.len() {
            return Err(Error::invalid("experiment spec", "duplicate solver names"));
        }
        if keys.is_empty() {
            return Err(Error::invalid("experiment spec", "no solvers listed"));
        }
    }
    spec.estimation.validate()?;

    let train_paths: Vec<PathBuf> = spec
        .train_day_dirs
        .iter()
        .map(|d| usage_csv_for_day(base, d))
        .collect::<Result<_>>()?;
    let test_paths: Vec<PathBuf> = spec
        .test_day_dirs
        .iter()
        .map(|d| usage_csv_for_day(base, d))
        .collect::<Result<_>>()?;

    let train_days: Vec<Vec<UsageSample>> = train_paths
        .iter()
        .map(|p| io::read_usage_csv(p))
        .collect::<Result<_>>()?;
    let test_days: Vec<Vec<UsageSample>> = test_paths
        .iter()
        .map(|p| io::read_usage_csv(p))
        .collect::<Result<_>>()?;
    let scans = io::read_scans_csv(&resolve(base, &spec.scans))?;
    let mac_map = io::read_macmap_csv(&resolve(base, &spec.macmap))?;

    let pooled_train: Vec<UsageSample> = train_days.iter().flatten().cloned().collect();
    let neighborhood = derive_neighborhood(&pooled_train, &mac_map, spec.num_channels)?;

    // Day counts come from the file lists; any n_days in the spec's
    // estimation config applies per estimation call, so override it.
    let cfg_for = |days: usize| EstimationConfig {
        n_days: Some(days),
        ..spec.estimation.clone()
    };

    let train = estimate(
        &pooled_train,
        &scans,
        &mac_map,
        &neighborhood,
        &cfg_for(train_days.len()),
    )?;

    // Per-train-day and pooled-test pain matrices reuse the train sensing.
    let day_cfg = cfg_for(1);
    let mut per_day_p = Vec::with_capacity(train_days.len());
    for day in &train_days {
        let series = build_usage_series(day, &day_cfg, &neighborhood)?;
        per_day_p.push(potential_pain(&co_usage(&series), &train.s_b)?);
    }
    let pooled_test: Vec<UsageSample> = test_days.iter().flatten().cloned().collect();
    let test_series = build_usage_series(&pooled_test, &cfg_for(test_days.len()), &neighborhood)?;
    let p_test = potential_pain(&co_usage(&test_series), &train.s_b)?;

    let digests = MatrixDigests {
        u: digest_matrix(&neighborhood, &train.u)?,
        s: digest_matrix(&neighborhood, &train.s)?,
        s_b: digest_matrix(&neighborhood, &train.s_b)?,
        p: digest_matrix(&neighborhood, &train.p)?,
    };

    let mut solvers = BTreeMap::new();
    for entry in &spec.solvers {
        let key = entry.key();
        let seed_override = if entry.config.get("seed").is_some() {
            None
        } else {
            Some(derive_seed(spec.seed, &format!("solver:{key}")))
        };
        let report = solve_with(
            entry.solver,
            &train.p,
            spec.num_channels,
            &entry.config,
            seed_override,
        )?;

        let mut day_pains = Vec::with_capacity(per_day_p.len());
        for p_day in &per_day_p {
            day_pains.push(p_day.total_pain(&report.allocation)?);
        }
        let train_pain_per_day = day_pains.iter().sum::<f64>() / day_pains.len() as f64;
        let test_pain = p_test.total_pain(&report.allocation)?;

        let allocation = MatrixDocument::from_allocation(&neighborhood, &report.allocation)?;
        let allocation_digest = io::sha256_hex(&io::to_json_bytes(&allocation)?);
        solvers.insert(
            key,
            SolverOutcome {
                solver: entry.solver.as_str().to_string(),
                train_objective: report.objective,
                train_pain_per_day,
                test_pain,
                allocation,
                allocation_digest,
                report: report.to_document(&neighborhood)?,
            },
        );
    }

    let report = ExperimentReport {
        home_ids: neighborhood.home_ids().to_vec(),
        num_channels: spec.num_channels,
        train_days: spec.train_day_dirs.clone(),
        test_days: spec.test_day_dirs.clone(),
        seed: spec.seed,
        digests,
        solvers,
    };
    io::write_json(&resolve(base, &spec.output_path), &report)?;
    Ok(report)
}

fn digest_matrix(neighborhood: &Neighborhood, m: &PainMatrix) -> Result<String> {
    let doc = MatrixDocument::from_pain(neighborhood, m)?;
    Ok(io::sha256_hex(&io::to_json_bytes(&doc)?))
}
