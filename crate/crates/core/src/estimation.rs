//! Telemetry-to-matrix estimation.
//!
//! Raw inputs are quarter-hourly airtime-usage samples, radio-scan reports
//! (which MACs an AP heard and at what SNR), and a MAC-to-home mapping. The
//! chain smooths usage to hourly series, computes the co-usage matrix
//! `U[i][j] = ln(1 + Σ_t u[t][i]·u[t][j])`, averages scan SNRs into the
//! sensing matrix `S`, symmetrizes and thresholds it into the binary `S^b`,
//! and multiplies elementwise into the potential-pain matrix `P = S^b ⊙ U`.
//!
//! Aggregation order is pinned (samples sorted by timestamp, then input
//! order) so results do not depend on how the telemetry files were
//! concatenated.

use std::collections::BTreeSet;

use chrono::{DateTime, FixedOffset, NaiveDate, Timelike};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::pain::{Neighborhood, PainMatrix};
use crate::{Error, Result};

/// One airtime measurement taken by a home's AP.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageSample {
    pub home_id: String,
    pub timestamp: DateTime<FixedOffset>,
    /// Percentage of airtime the AP occupied, in [0, 100].
    pub airtime_pct: f64,
}

impl UsageSample {
    pub fn new(
        home_id: impl Into<String>,
        timestamp: DateTime<FixedOffset>,
        airtime_pct: f64,
    ) -> Result<Self> {
        if !airtime_pct.is_finite() || !(0.0..=100.0).contains(&airtime_pct) {
            return Err(Error::invalid(
                "usage sample",
                format!("airtime_pct {airtime_pct} outside [0, 100]"),
            ));
        }
        Ok(UsageSample {
            home_id: home_id.into(),
            timestamp,
            airtime_pct,
        })
    }
}

/// One radio-scan record: the scanning home heard `sensed_mac` at `snr_db`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanObservation {
    pub scanner_home_id: String,
    pub sensed_mac: String,
    pub snr_db: f64,
    pub timestamp: DateTime<FixedOffset>,
}

impl ScanObservation {
    pub fn new(
        scanner_home_id: impl Into<String>,
        sensed_mac: impl Into<String>,
        snr_db: f64,
        timestamp: DateTime<FixedOffset>,
    ) -> Result<Self> {
        if !snr_db.is_finite() || snr_db < 0.0 {
            return Err(Error::invalid(
                "scan observation",
                format!("snr_db {snr_db} is not a finite nonnegative value"),
            ));
        }
        Ok(ScanObservation {
            scanner_home_id: scanner_home_id.into(),
            sensed_mac: sensed_mac.into(),
            snr_db,
            timestamp,
        })
    }
}

/// Partial mapping from sensed MAC addresses to neighborhood homes.
///
/// MACs absent from the map belong to external APs and are dropped during
/// sensing estimation. MAC strings are matched exactly as given.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MacMap {
    by_mac: std::collections::BTreeMap<String, String>,
}

impl MacMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a MAC; a MAC may map to at most one home.
    pub fn insert(&mut self, mac: impl Into<String>, home_id: impl Into<String>) -> Result<()> {
        let mac = mac.into();
        let home_id = home_id.into();
        if let Some(existing) = self.by_mac.get(&mac) {
            if *existing != home_id {
                return Err(Error::invalid(
                    "mac map",
                    format!("mac `{mac}` maps to both `{existing}` and `{home_id}`"),
                ));
            }
            return Ok(());
        }
        self.by_mac.insert(mac, home_id);
        Ok(())
    }

    pub fn from_pairs<I, M, H>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (M, H)>,
        M: Into<String>,
        H: Into<String>,
    {
        let mut map = MacMap::new();
        for (mac, home) in pairs {
            map.insert(mac, home)?;
        }
        Ok(map)
    }

    pub fn home_for(&self, mac: &str) -> Option<&str> {
        self.by_mac.get(mac).map(|s| s.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.by_mac.iter().map(|(m, h)| (m.as_str(), h.as_str()))
    }

    pub fn home_ids(&self) -> impl Iterator<Item = &str> {
        self.by_mac.values().map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.by_mac.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_mac.is_empty()
    }
}

/// Which daily hours feed the usage series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    WholeDay,
    Evening,
}

/// Knobs of the estimation chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimationConfig {
    pub window: Window,
    /// Half-open local-time hour interval used when `window` is `Evening`.
    pub evening_hours: (u32, u32),
    /// Expected number of distinct days in the usage data; when set,
    /// [`build_usage_series`] fails if the data disagrees.
    pub n_days: Option<usize>,
    /// SNR threshold (dB) for the binary sensing matrix; comparison is `>=`.
    pub snr_threshold_db: f64,
    /// Replace `S` with `0.5·(S + Sᵀ)` before thresholding.
    pub symmetrize: bool,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        EstimationConfig {
            window: Window::Evening,
            evening_hours: (19, 22),
            n_days: None,
            snr_threshold_db: 10.0,
            symmetrize: true,
        }
    }
}

impl EstimationConfig {
    pub fn validate(&self) -> Result<()> {
        let (start, end) = self.evening_hours;
        if start >= end || end > 24 {
            return Err(Error::invalid(
                "estimation config",
                format!("evening_hours [{start}, {end}) is not a valid hour interval"),
            ));
        }
        if !self.snr_threshold_db.is_finite() || self.snr_threshold_db <= 0.0 {
            return Err(Error::invalid(
                "estimation config",
                format!("snr_threshold_db must be positive, got {}", self.snr_threshold_db),
            ));
        }
        if self.n_days == Some(0) {
            return Err(Error::invalid("estimation config", "n_days must be at least 1"));
        }
        Ok(())
    }

    fn hours_in_window(&self) -> Vec<u32> {
        match self.window {
            Window::WholeDay => (0..24).collect(),
            Window::Evening => (self.evening_hours.0..self.evening_hours.1).collect(),
        }
    }
}

/// Hourly usage values per home over a shared time axis.
///
/// Row `i` corresponds to home `i` of the neighborhood the series was built
/// for; columns follow the `(local date, local hour)` axis in chronological
/// order. Evening windows contribute 3 hours per day, whole days 24.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageSeries {
    hours: Vec<(NaiveDate, u32)>,
    values: Array2<f64>,
}

impl UsageSeries {
    pub fn num_homes(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_hours(&self) -> usize {
        self.values.ncols()
    }

    pub fn hours(&self) -> &[(NaiveDate, u32)] {
        &self.hours
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }
}

/// Smooths quarter-hourly samples into hourly means on a shared axis.
///
/// The day axis is the set of distinct local dates present in the samples;
/// each day contributes the hours selected by the window. The hourly value
/// is the arithmetic mean of that hour's samples; hours without samples are
/// zero (no evidence of usage). Samples outside the window (for example
/// 18:45 under the default evening window) are dropped.
pub fn build_usage_series(
    samples: &[UsageSample],
    cfg: &EstimationConfig,
    neighborhood: &Neighborhood,
) -> Result<UsageSeries> {
    cfg.validate()?;
    let n = neighborhood.num_homes();

    let mut days = BTreeSet::new();
    for s in samples {
        if !s.airtime_pct.is_finite() || !(0.0..=100.0).contains(&s.airtime_pct) {
            return Err(Error::invalid(
                "usage sample",
                format!("airtime_pct {} outside [0, 100]", s.airtime_pct),
            ));
        }
        if neighborhood.index_of(&s.home_id).is_none() {
            return Err(Error::UnknownHome {
                home_id: s.home_id.clone(),
                context: format!("usage sample at {}", s.timestamp.to_rfc3339()),
            });
        }
        days.insert(s.timestamp.date_naive());
    }
    let days: Vec<NaiveDate> = days.into_iter().collect();
    if let Some(expected) = cfg.n_days {
        if !samples.is_empty() && days.len() != expected {
            return Err(Error::invalid(
                "usage data",
                format!("found {} distinct days, expected {expected}", days.len()),
            ));
        }
    }

    let window_hours = cfg.hours_in_window();
    let hours: Vec<(NaiveDate, u32)> = days
        .iter()
        .flat_map(|&d| window_hours.iter().map(move |&h| (d, h)))
        .collect();

    let bucket_of = |date: NaiveDate, hour: u32| -> Option<usize> {
        let day_idx = days.binary_search(&date).ok()?;
        let hour_idx = window_hours.iter().position(|&h| h == hour)?;
        Some(day_idx * window_hours.len() + hour_idx)
    };

    // Deterministic accumulation: timestamp order, then input order.
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by_key(|&k| samples[k].timestamp);

    let mut sums = Array2::<f64>::zeros((n, hours.len()));
    let mut counts = Array2::<u64>::zeros((n, hours.len()));
    for k in order {
        let s = &samples[k];
        let home = neighborhood.index_of(&s.home_id).expect("checked above");
        if let Some(bucket) = bucket_of(s.timestamp.date_naive(), s.timestamp.hour()) {
            sums[[home, bucket]] += s.airtime_pct;
            counts[[home, bucket]] += 1;
        }
    }

    let mut values = Array2::<f64>::zeros((n, hours.len()));
    for ((i, t), &c) in counts.indexed_iter() {
        if c > 0 {
            values[[i, t]] = sums[[i, t]] / c as f64;
        }
    }
    Ok(UsageSeries { hours, values })
}

/// Co-usage matrix `U[i][j] = ln(1 + Σ_t u[t][i]·u[t][j])`.
///
/// The diagonal is computed by the same formula; it is masked out later by
/// the zero diagonal of the binary sensing matrix.
pub fn co_usage(series: &UsageSeries) -> PainMatrix {
    let n = series.num_homes();
    let t = series.num_hours();
    let v = series.values();
    let mut u = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut dot = 0.0;
            for k in 0..t {
                dot += v[[i, k]] * v[[j, k]];
            }
            u[[i, j]] = (1.0 + dot).ln();
        }
    }
    PainMatrix::new(u).expect("log of 1 + nonnegative dot products is finite and nonnegative")
}

/// Average sensed SNR per ordered pair of homes, in dB.
///
/// Observations of MACs that are absent from the map, or that map to a home
/// outside this neighborhood, come from APs we do not control and are
/// dropped. Self-observations are dropped too; the diagonal is zero. Pairs
/// never observed stay at zero.
pub fn snr_matrix(
    scans: &[ScanObservation],
    mac_map: &MacMap,
    neighborhood: &Neighborhood,
) -> Result<PainMatrix> {
    let n = neighborhood.num_homes();

    let mut order: Vec<usize> = (0..scans.len()).collect();
    order.sort_by_key(|&k| scans[k].timestamp);

    let mut sums = Array2::<f64>::zeros((n, n));
    let mut counts = Array2::<u64>::zeros((n, n));
    for k in order {
        let obs = &scans[k];
        if !obs.snr_db.is_finite() || obs.snr_db < 0.0 {
            return Err(Error::invalid(
                "scan observation",
                format!("snr_db {} is not a finite nonnegative value", obs.snr_db),
            ));
        }
        let scanner = neighborhood
            .index_of(&obs.scanner_home_id)
            .ok_or_else(|| Error::UnknownHome {
                home_id: obs.scanner_home_id.clone(),
                context: format!("scan observation at {}", obs.timestamp.to_rfc3339()),
            })?;
        let Some(sensed_home) = mac_map.home_for(&obs.sensed_mac) else {
            continue; // external AP
        };
        let Some(sensed) = neighborhood.index_of(sensed_home) else {
            continue; // mapped, but not part of this neighborhood
        };
        if scanner == sensed {
            continue;
        }
        sums[[scanner, sensed]] += obs.snr_db;
        counts[[scanner, sensed]] += 1;
    }

    let mut values = Array2::<f64>::zeros((n, n));
    for ((i, j), &c) in counts.indexed_iter() {
        if c > 0 {
            values[[i, j]] = sums[[i, j]] / c as f64;
        }
    }
    PainMatrix::new(values)
}

/// Binary sensing matrix: optionally symmetrize `S <- 0.5(S + Sᵀ)`, then set
/// `S^b[i][j] = 1` iff the value meets the threshold (`>=`). The diagonal is
/// forced to zero.
pub fn binarize_sensing(s: &PainMatrix, cfg: &EstimationConfig) -> Result<PainMatrix> {
    cfg.validate()?;
    let n = s.num_homes();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = if cfg.symmetrize {
                0.5 * (s.get(i, j) + s.get(j, i))
            } else {
                s.get(i, j)
            };
            if v >= cfg.snr_threshold_db {
                out[[i, j]] = 1.0;
            }
        }
    }
    PainMatrix::new(out)
}

/// Potential-pain matrix `P = S^b ⊙ U` (elementwise).
pub fn potential_pain(u: &PainMatrix, sb: &PainMatrix) -> Result<PainMatrix> {
    let n = u.num_homes();
    if sb.num_homes() != n {
        return Err(Error::DimensionMismatch {
            left: format!("co-usage matrix is {n}x{n}"),
            right: format!("sensing matrix is {0}x{0}", sb.num_homes()),
        });
    }
    let mut values = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let b = sb.get(i, j);
            if b != 0.0 && b != 1.0 {
                return Err(Error::invalid(
                    "sensing matrix",
                    format!("entry ({i},{j}) = {b} is not binary"),
                ));
            }
            if i == j && b != 0.0 {
                return Err(Error::invalid(
                    "sensing matrix",
                    format!("diagonal entry ({i},{i}) must be zero"),
                ));
            }
            values[[i, j]] = b * u.get(i, j);
        }
    }
    PainMatrix::new(values)
}
