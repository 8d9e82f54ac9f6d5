//! Synthetic neighborhoods with known ground truth.
//!
//! Homes are placed on a grid or in an apartment building; pairs within the
//! sensing radius hear each other at an SNR drawn uniformly from [10, 30) dB
//! (always at or above the default 10 dB threshold, so the true sensing
//! graph equals the geometric graph exactly), and pairs outside the radius
//! produce no scan rows at all. Daily usage is a per-home 24-hour base
//! profile scaled by a per-home per-day log-normal factor and emitted as
//! quarter-hourly samples whose hourly means equal the generated values
//! exactly.
//!
//! `ground_truth_p.json` holds the potential pain of one noise-free day
//! under the default evening-window estimation config; with zero day noise,
//! estimating any single generated day reproduces it bit for bit.

use std::path::Path;

use chrono::{DateTime, Days, FixedOffset, TimeZone};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::estimation::{
    binarize_sensing, build_usage_series, co_usage, potential_pain, snr_matrix, EstimationConfig,
    MacMap, ScanObservation, UsageSample,
};
use crate::io;
use crate::pain::{Neighborhood, PainMatrix};
use crate::{Error, Result};

const HOURS_PER_DAY: usize = 24;

/// Physical arrangement of the homes; determines ids and pairwise distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Layout {
    /// City block of single-family homes on a unit-spaced grid; ids like
    /// `h03_12` (row, column).
    Grid { rows: usize, cols: usize },
    /// Apartment building; ids follow floor-unit numbering (`101` is floor
    /// 1, unit 1). Floors and units are both unit-spaced.
    Building { floors: usize, units_per_floor: usize },
}

impl Layout {
    pub fn capacity(&self) -> usize {
        match self {
            Layout::Grid { rows, cols } => rows * cols,
            Layout::Building {
                floors,
                units_per_floor,
            } => floors * units_per_floor,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Layout::Grid { rows, cols } => {
                *rows >= 1 && *cols >= 1 && *rows <= 100 && *cols <= 100
            }
            Layout::Building {
                floors,
                units_per_floor,
            } => *floors >= 1 && *units_per_floor >= 1 && *floors <= 9 && *units_per_floor <= 99,
        };
        if !ok {
            return Err(Error::invalid(
                "synth layout",
                format!("{self:?} outside the supported size range"),
            ));
        }
        Ok(())
    }

    /// Id of the `idx`-th home; ids sort lexicographically in layout order.
    pub fn home_id(&self, idx: usize) -> String {
        match self {
            Layout::Grid { cols, .. } => format!("h{:02}_{:02}", idx / cols, idx % cols),
            Layout::Building {
                units_per_floor, ..
            } => format!("{}{:02}", idx / units_per_floor + 1, idx % units_per_floor + 1),
        }
    }

    fn position(&self, idx: usize) -> (f64, f64) {
        match self {
            Layout::Grid { cols, .. } => ((idx / cols) as f64, (idx % cols) as f64),
            Layout::Building {
                units_per_floor, ..
            } => ((idx / units_per_floor) as f64, (idx % units_per_floor) as f64),
        }
    }
}

/// Generator configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_homes: usize,
    pub layout: Layout,
    /// Homes within this Euclidean distance sense each other.
    pub sensing_radius: f64,
    /// Mean hourly airtime percentage per home, `n_homes` rows of 24 values.
    pub base_usage_profile: Vec<Vec<f64>>,
    /// Sigma of the per-home per-day multiplicative log-normal jitter.
    pub day_noise_sigma: f64,
    pub n_train_days: usize,
    pub n_test_days: usize,
    /// Channel count recorded in the emitted documents.
    #[serde(default = "default_channels")]
    pub num_channels: usize,
    pub seed: u64,
}

fn default_channels() -> usize {
    2
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        self.layout.validate()?;
        if self.n_homes < 2 {
            return Err(Error::invalid("synth config", "n_homes must be at least 2"));
        }
        if self.n_homes != self.layout.capacity() {
            return Err(Error::invalid(
                "synth config",
                format!(
                    "n_homes = {} but the layout holds {} homes",
                    self.n_homes,
                    self.layout.capacity()
                ),
            ));
        }
        if !self.sensing_radius.is_finite() || self.sensing_radius <= 0.0 {
            return Err(Error::invalid("synth config", "sensing_radius must be positive"));
        }
        if !self.day_noise_sigma.is_finite() || self.day_noise_sigma < 0.0 {
            return Err(Error::invalid("synth config", "day_noise_sigma must be nonnegative"));
        }
        if self.n_train_days < 1 || self.n_test_days < 1 {
            return Err(Error::invalid(
                "synth config",
                "need at least one train day and one test day",
            ));
        }
        if self.num_channels < 2 {
            return Err(Error::invalid("synth config", "num_channels must be at least 2"));
        }
        if self.base_usage_profile.len() != self.n_homes
            || self.base_usage_profile.iter().any(|p| p.len() != HOURS_PER_DAY)
        {
            return Err(Error::invalid(
                "synth config",
                format!("base_usage_profile must be {} rows of 24 values", self.n_homes),
            ));
        }
        for row in &self.base_usage_profile {
            for &v in row {
                if !v.is_finite() || !(0.0..=100.0).contains(&v) {
                    return Err(Error::invalid(
                        "synth config",
                        format!("base usage value {v} outside [0, 100]"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Everything one experiment needs, in memory.
#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub neighborhood: Neighborhood,
    /// One sample vector per day: train days first, then test days.
    pub usage_days: Vec<Vec<UsageSample>>,
    pub scans: Vec<ScanObservation>,
    pub mac_map: MacMap,
    pub ground_truth: PainMatrix,
    pub n_train_days: usize,
}

impl SynthDataset {
    pub fn n_test_days(&self) -> usize {
        self.usage_days.len() - self.n_train_days
    }

    pub fn train_days(&self) -> &[Vec<UsageSample>] {
        &self.usage_days[..self.n_train_days]
    }

    pub fn test_days(&self) -> &[Vec<UsageSample>] {
        &self.usage_days[self.n_train_days..]
    }

    /// Writes `usage_day_<k>.csv` (train days first), `scans.csv`,
    /// `macmap.csv`, and `ground_truth_p.json` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
        for (k, day) in self.usage_days.iter().enumerate() {
            io::write_usage_csv(&dir.join(usage_file_name(k)), day)?;
        }
        io::write_scans_csv(&dir.join("scans.csv"), &self.scans)?;
        io::write_macmap_csv(&dir.join("macmap.csv"), &self.mac_map)?;
        let doc = io::MatrixDocument::from_pain(&self.neighborhood, &self.ground_truth)?;
        io::write_json(&dir.join("ground_truth_p.json"), &doc)?;
        Ok(())
    }
}

pub fn usage_file_name(day: usize) -> String {
    format!("usage_day_{day}.csv")
}

fn local_offset() -> FixedOffset {
    FixedOffset::west_opt(5 * 3600).expect("valid offset")
}

fn day_start(day: usize) -> DateTime<FixedOffset> {
    local_offset()
        .with_ymd_and_hms(2023, 3, 6, 0, 0, 0)
        .unwrap()
        .checked_add_days(Days::new(day as u64))
        .expect("date in range")
}

fn mac_for(idx: usize) -> String {
    format!("02:00:00:00:{:02x}:{:02x}", idx / 256, idx % 256)
}

/// Generates a dataset. Deterministic given the config; random draws happen
/// in a fixed order (pair SNRs in index order, then day factors day-major).
pub fn generate(cfg: &SynthConfig) -> Result<SynthDataset> {
    cfg.validate()?;
    let n = cfg.n_homes;
    let home_ids: Vec<String> = (0..n).map(|i| cfg.layout.home_id(i)).collect();
    let neighborhood = Neighborhood::new(home_ids.clone(), cfg.num_channels)?;
    let mac_map = MacMap::from_pairs((0..n).map(|i| (mac_for(i), home_ids[i].clone())))?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // Scan reports for every ordered pair within the sensing radius.
    let scan_time = day_start(0) + chrono::Duration::hours(12);
    let mut scans = Vec::new();
    for i in 0..n {
        let (xi, yi) = cfg.layout.position(i);
        for j in (i + 1)..n {
            let (xj, yj) = cfg.layout.position(j);
            let dist = ((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt();
            if dist <= cfg.sensing_radius {
                let snr_ij: f64 = rng.random_range(10.0..30.0);
                let snr_ji: f64 = rng.random_range(10.0..30.0);
                scans.push(ScanObservation::new(
                    home_ids[i].clone(),
                    mac_for(j),
                    snr_ij,
                    scan_time,
                )?);
                scans.push(ScanObservation::new(
                    home_ids[j].clone(),
                    mac_for(i),
                    snr_ji,
                    scan_time,
                )?);
            }
        }
    }

    // Per-day usage: base profile scaled by one log-normal factor per
    // (home, day), emitted as four identical quarter-hourly samples so the
    // hourly mean recovers the generated value exactly.
    let total_days = cfg.n_train_days + cfg.n_test_days;
    let mut usage_days = Vec::with_capacity(total_days);
    for day in 0..total_days {
        let start = day_start(day);
        let mut samples = Vec::with_capacity(n * HOURS_PER_DAY * 4);
        for (home, profile) in cfg.base_usage_profile.iter().enumerate() {
            let z: f64 = StandardNormal.sample(&mut rng);
            let factor = (cfg.day_noise_sigma * z).exp();
            for (hour, &base) in profile.iter().enumerate() {
                let value = (base * factor).min(100.0);
                for quarter in 0..4 {
                    let ts = start
                        + chrono::Duration::minutes(hour as i64 * 60 + quarter as i64 * 15);
                    samples.push(UsageSample::new(home_ids[home].clone(), ts, value)?);
                }
            }
        }
        usage_days.push(samples);
    }

    // Ground truth: one noise-free day through the estimation chain.
    let est_cfg = EstimationConfig::default();
    let start = day_start(0);
    let mut clean = Vec::with_capacity(n * HOURS_PER_DAY * 4);
    for (home, profile) in cfg.base_usage_profile.iter().enumerate() {
        for (hour, &base) in profile.iter().enumerate() {
            for quarter in 0..4 {
                let ts = start + chrono::Duration::minutes(hour as i64 * 60 + quarter as i64 * 15);
                clean.push(UsageSample::new(home_ids[home].clone(), ts, base)?);
            }
        }
    }
    let series = build_usage_series(&clean, &est_cfg, &neighborhood)?;
    let u = co_usage(&series);
    let s = snr_matrix(&scans, &mac_map, &neighborhood)?;
    let sb = binarize_sensing(&s, &est_cfg)?;
    let ground_truth = potential_pain(&u, &sb)?;

    Ok(SynthDataset {
        neighborhood,
        usage_days,
        scans,
        mac_map,
        ground_truth,
        n_train_days: cfg.n_train_days,
    })
}

/// Deterministic per-home diurnal profiles: a small daytime floor plus an
/// evening-centered bump with per-home amplitude, peak hour, and width.
pub fn random_base_profiles(n_homes: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_homes)
        .map(|_| {
            let floor: f64 = rng.random_range(0.0..5.0);
            let amplitude: f64 = rng.random_range(10.0..60.0);
            let peak: f64 = rng.random_range(17.0..22.0);
            let width: f64 = rng.random_range(1.5..4.0);
            (0..HOURS_PER_DAY)
                .map(|h| {
                    let d = h as f64 - peak;
                    let v = floor + amplitude * (-d * d / (2.0 * width * width)).exp();
                    v.clamp(0.0, 100.0)
                })
                .collect()
        })
        .collect()
}
