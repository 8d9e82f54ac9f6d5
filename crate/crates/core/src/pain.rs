//! Neighborhood data model and the pain objective.
//!
//! The potential-pain matrix `P` says how much pain home `j` would add to
//! home `i` if the two shared a channel. Given a channel allocation `C`
//! (one-hot rows for a hard allocation, row-stochastic for a soft one), the
//! total pain is the quadratic form
//!
//! ```text
//! total = Σ_c Σ_{i,j} P[i][j] · C[i][c] · C[j][c]  =  Tr(CᵀPC)
//! ```
//!
//! `P` is not required to be symmetric. Within each row the channel terms
//! are summed in value-sorted order, which makes the objective bit-exactly
//! invariant under channel relabeling even for soft allocations.

use std::collections::{HashMap, HashSet};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance for the row-sum-one check on soft allocations.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// The set of homes being optimized and how many channels they share.
#[derive(Debug, Clone)]
pub struct Neighborhood {
    home_ids: Vec<String>,
    index: HashMap<String, usize>,
    num_channels: usize,
}

impl Neighborhood {
    /// `home_ids` must be unique and non-empty; `num_channels` must be >= 2.
    pub fn new(home_ids: Vec<String>, num_channels: usize) -> Result<Self> {
        if home_ids.is_empty() {
            return Err(Error::invalid("neighborhood", "no homes"));
        }
        if num_channels < 2 {
            return Err(Error::invalid(
                "neighborhood",
                format!("num_channels must be at least 2, got {num_channels}"),
            ));
        }
        let mut index = HashMap::with_capacity(home_ids.len());
        for (i, id) in home_ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::invalid(
                    "neighborhood",
                    format!("duplicate home id `{id}`"),
                ));
            }
        }
        Ok(Neighborhood {
            home_ids,
            index,
            num_channels,
        })
    }

    pub fn num_homes(&self) -> usize {
        self.home_ids.len()
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    pub fn home_ids(&self) -> &[String] {
        &self.home_ids
    }

    /// Row/column index of a home, if it belongs to the neighborhood.
    pub fn index_of(&self, home_id: &str) -> Option<usize> {
        self.index.get(home_id).copied()
    }
}

/// Square nonnegative matrix of pairwise pain potential.
///
/// The same type carries the co-usage matrix `U`, the SNR matrix `S`, the
/// binary sensing matrix `S^b`, and the potential-pain matrix `P`; every
/// role requires finite nonnegative entries, while the zero diagonal and the
/// {0,1} range are per-role invariants enforced by the operations that
/// produce those matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct PainMatrix {
    values: Array2<f64>,
}

impl PainMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (rows, cols) = values.dim();
        if rows == 0 || rows != cols {
            return Err(Error::invalid(
                "pain matrix",
                format!("must be square and non-empty, got {rows}x{cols}"),
            ));
        }
        for ((i, j), &v) in values.indexed_iter() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(
                    "pain matrix",
                    format!("entry ({i},{j}) = {v} is not a finite nonnegative value"),
                ));
            }
        }
        Ok(PainMatrix { values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut flat = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::invalid(
                    "pain matrix",
                    format!("row of length {} in a {n}-home matrix", row.len()),
                ));
            }
            flat.extend_from_slice(row);
        }
        let values = Array2::from_shape_vec((n, n), flat)
            .map_err(|e| Error::invalid("pain matrix", e.to_string()))?;
        PainMatrix::new(values)
    }

    pub fn zeros(num_homes: usize) -> Result<Self> {
        PainMatrix::new(Array2::zeros((num_homes, num_homes)))
    }

    pub fn num_homes(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.values
            .rows()
            .into_iter()
            .map(|r| r.to_vec())
            .collect()
    }

    pub fn has_zero_diagonal(&self) -> bool {
        (0..self.num_homes()).all(|i| self.values[[i, i]] == 0.0)
    }

    pub fn max_entry(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn frobenius_distance(&self, other: &PainMatrix) -> Result<f64> {
        self.check_same_shape(other)?;
        let mut sum = 0.0;
        for (a, b) in self.values.iter().zip(other.values.iter()) {
            let d = a - b;
            sum += d * d;
        }
        Ok(sum.sqrt())
    }

    fn check_same_shape(&self, other: &PainMatrix) -> Result<()> {
        if self.num_homes() != other.num_homes() {
            return Err(Error::DimensionMismatch {
                left: format!("matrix is {0}x{0}", self.num_homes()),
                right: format!("other matrix is {0}x{0}", other.num_homes()),
            });
        }
        Ok(())
    }

    fn check_allocation(&self, alloc: &ChannelAllocation) -> Result<()> {
        if self.num_homes() != alloc.num_homes() {
            return Err(Error::DimensionMismatch {
                left: format!("pain matrix is {0}x{0}", self.num_homes()),
                right: format!("allocation has {} home rows", alloc.num_homes()),
            });
        }
        Ok(())
    }

    /// Total pain `Tr(CᵀPC)` for a hard or soft allocation.
    pub fn total_pain(&self, alloc: &ChannelAllocation) -> Result<f64> {
        Ok(self.per_home_pain(alloc)?.total)
    }

    /// Per-home pain `pain_i = Σ_c Σ_j P[i][j]·C[i][c]·C[j][c]` plus the total.
    pub fn per_home_pain(&self, alloc: &ChannelAllocation) -> Result<PainBreakdown> {
        self.check_allocation(alloc)?;
        let n = self.num_homes();
        let nc = alloc.num_channels();
        let c = &alloc.values;
        let mut per_home = Vec::with_capacity(n);
        let mut terms = vec![0.0; nc];
        for i in 0..n {
            for (ch, term) in terms.iter_mut().enumerate() {
                let mut m = 0.0;
                for j in 0..n {
                    m += self.values[[i, j]] * c[[j, ch]];
                }
                *term = c[[i, ch]] * m;
            }
            // Sorting before summing makes the row sum independent of the
            // channel order, so relabeling channels cannot perturb the value.
            terms.sort_by(|a, b| a.total_cmp(b));
            per_home.push(terms.iter().sum());
        }
        let total = per_home.iter().sum();
        Ok(PainBreakdown { per_home, total })
    }
}

/// Whether an allocation's rows are one-hot or merely row-stochastic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationMode {
    Hard,
    Soft,
}

/// Per-home channel assignment: an `n x n_c` matrix whose rows sum to one.
///
/// Hard mode means every row is exactly one-hot; soft mode allows any
/// distribution over the channels (the relaxation the annealing solver
/// descends on).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelAllocation {
    values: Array2<f64>,
    mode: AllocationMode,
}

impl ChannelAllocation {
    /// Hard allocation from one channel index per home.
    pub fn hard(channels: &[usize], num_channels: usize) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::invalid("allocation", "no homes"));
        }
        if num_channels < 2 {
            return Err(Error::invalid(
                "allocation",
                format!("num_channels must be at least 2, got {num_channels}"),
            ));
        }
        let mut values = Array2::zeros((channels.len(), num_channels));
        for (i, &ch) in channels.iter().enumerate() {
            if ch >= num_channels {
                return Err(Error::invalid(
                    "allocation",
                    format!("home {i} assigned channel {ch} of {num_channels}"),
                ));
            }
            values[[i, ch]] = 1.0;
        }
        Ok(ChannelAllocation {
            values,
            mode: AllocationMode::Hard,
        })
    }

    /// Soft allocation; rows must be entrywise in [0,1] and sum to one
    /// within [`ROW_SUM_TOLERANCE`].
    pub fn soft(values: Array2<f64>) -> Result<Self> {
        Self::from_matrix(values, AllocationMode::Soft)
    }

    pub fn from_matrix(values: Array2<f64>, mode: AllocationMode) -> Result<Self> {
        let (n, nc) = values.dim();
        if n == 0 {
            return Err(Error::invalid("allocation", "no homes"));
        }
        if nc < 2 {
            return Err(Error::invalid(
                "allocation",
                format!("num_channels must be at least 2, got {nc}"),
            ));
        }
        for i in 0..n {
            let mut sum = 0.0;
            let mut ones = 0;
            for c in 0..nc {
                let v = values[[i, c]];
                if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                    return Err(Error::invalid(
                        "allocation",
                        format!("entry ({i},{c}) = {v} outside [0,1]"),
                    ));
                }
                if mode == AllocationMode::Hard && v != 0.0 && v != 1.0 {
                    return Err(Error::invalid(
                        "allocation",
                        format!("hard allocation has fractional entry ({i},{c}) = {v}"),
                    ));
                }
                if v == 1.0 {
                    ones += 1;
                }
                sum += v;
            }
            if mode == AllocationMode::Hard && ones != 1 {
                return Err(Error::invalid(
                    "allocation",
                    format!("hard allocation row {i} has {ones} ones"),
                ));
            }
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::invalid(
                    "allocation",
                    format!("row {i} sums to {sum}, expected 1"),
                ));
            }
        }
        Ok(ChannelAllocation { values, mode })
    }

    pub fn mode(&self) -> AllocationMode {
        self.mode
    }

    pub fn num_homes(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_channels(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    /// Row argmax per home; for a hard allocation this is its channel vector.
    pub fn channels(&self) -> Vec<usize> {
        (0..self.num_homes()).map(|i| self.row_argmax(i)).collect()
    }

    fn row_argmax(&self, i: usize) -> usize {
        let mut best = 0;
        for c in 1..self.num_channels() {
            if self.values[[i, c]] > self.values[[i, best]] {
                best = c;
            }
        }
        best
    }

    /// Collapse a soft allocation to the one-hot allocation of its row
    /// argmaxes, ties broken to the lowest channel index.
    ///
    /// When the row maximum exceeds 0.5 this coincides with thresholding at
    /// 0.5; the argmax rule additionally yields a valid one-hot row when no
    /// entry clears 0.5 (possible for three or more channels). Hardening a
    /// hard allocation returns it unchanged.
    pub fn harden(&self) -> ChannelAllocation {
        let mut values = Array2::zeros(self.values.dim());
        for i in 0..self.num_homes() {
            values[[i, self.row_argmax(i)]] = 1.0;
        }
        ChannelAllocation {
            values,
            mode: AllocationMode::Hard,
        }
    }
}

/// Per-home pain vector plus the total over the neighborhood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PainBreakdown {
    pub per_home: Vec<f64>,
    pub total: f64,
}

/// True if the two home-id lists name the same homes in the same order.
pub fn same_homes(a: &[String], b: &[String]) -> bool {
    a == b
}

/// Checks that a list of home ids has no duplicates; used by document loaders.
pub(crate) fn check_unique_homes(ids: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::invalid(
                "home ids",
                format!("duplicate home id `{id}`"),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn hard(channels: &[usize], nc: usize) -> ChannelAllocation {
        ChannelAllocation::hard(channels, nc).unwrap()
    }

    #[test]
    fn neighborhood_rejects_duplicates_and_small_channel_counts() {
        assert!(Neighborhood::new(vec!["a".into(), "a".into()], 2).is_err());
        assert!(Neighborhood::new(vec!["a".into()], 1).is_err());
        assert!(Neighborhood::new(vec![], 2).is_err());
        let n = Neighborhood::new(vec!["a".into(), "b".into()], 3).unwrap();
        assert_eq!(n.index_of("b"), Some(1));
        assert_eq!(n.index_of("c"), None);
    }

    #[test]
    fn pain_matrix_rejects_bad_entries() {
        assert!(PainMatrix::from_rows(&[vec![0.0, -1.0], vec![0.0, 0.0]]).is_err());
        assert!(PainMatrix::from_rows(&[vec![0.0, f64::NAN], vec![0.0, 0.0]]).is_err());
        assert!(PainMatrix::from_rows(&[vec![0.0, 1.0]]).is_err());
        assert!(PainMatrix::from_rows(&[]).is_err());
    }

    #[test]
    fn total_pain_separated_pair_is_zero() {
        let p = PainMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let c = hard(&[0, 1], 2);
        assert_eq!(p.total_pain(&c).unwrap(), 0.0);
    }

    #[test]
    fn total_pain_shared_channel_sums_both_directions() {
        let p = PainMatrix::from_rows(&[vec![0.0, 2.0], vec![3.0, 0.0]]).unwrap();
        let c = hard(&[0, 0], 2);
        assert_eq!(p.total_pain(&c).unwrap(), 5.0);
    }

    #[test]
    fn total_pain_uniform_soft_rows() {
        let p = PainMatrix::from_rows(&[vec![0.0, 2.0], vec![3.0, 0.0]]).unwrap();
        let c = ChannelAllocation::soft(array![[0.5, 0.5], [0.5, 0.5]]).unwrap();
        assert_eq!(p.total_pain(&c).unwrap(), 2.5);
    }

    #[test]
    fn total_pain_single_home_is_zero() {
        let p = PainMatrix::from_rows(&[vec![0.0]]).unwrap();
        let c = hard(&[1], 2);
        assert_eq!(p.total_pain(&c).unwrap(), 0.0);
    }

    #[test]
    fn per_home_pain_shared_channel() {
        let p = PainMatrix::from_rows(&[vec![0.0, 2.0], vec![3.0, 0.0]]).unwrap();
        let b = p.per_home_pain(&hard(&[1, 1], 2)).unwrap();
        assert_eq!(b.per_home, vec![2.0, 3.0]);
        assert_eq!(b.total, 5.0);
    }

    #[test]
    fn per_home_pain_zero_matrix() {
        let p = PainMatrix::zeros(3).unwrap();
        let b = p.per_home_pain(&hard(&[0, 1, 0], 2)).unwrap();
        assert_eq!(b.per_home, vec![0.0, 0.0, 0.0]);
        assert_eq!(b.total, 0.0);
    }

    #[test]
    fn per_home_pain_separated_pair() {
        let p = PainMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let b = p.per_home_pain(&hard(&[0, 1], 2)).unwrap();
        assert_eq!(b.per_home, vec![0.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch_names_both_sides() {
        let p = PainMatrix::zeros(3).unwrap();
        let c = hard(&[0, 1], 2);
        let err = p.total_pain(&c).unwrap_err().to_string();
        assert!(err.contains("3x3"), "{err}");
        assert!(err.contains("2 home rows"), "{err}");
    }

    #[test]
    fn harden_picks_row_argmax() {
        let c = ChannelAllocation::soft(array![[0.9, 0.1], [0.49, 0.51]]).unwrap();
        let h = c.harden();
        assert_eq!(h.mode(), AllocationMode::Hard);
        assert_eq!(h.channels(), vec![0, 1]);
    }

    #[test]
    fn harden_breaks_ties_to_lowest_channel() {
        let c = ChannelAllocation::soft(array![[0.5, 0.5]]).unwrap();
        assert_eq!(c.harden().values()[[0, 0]], 1.0);
        assert_eq!(c.harden().values()[[0, 1]], 0.0);
    }

    #[test]
    fn harden_handles_rows_with_no_majority() {
        let c = ChannelAllocation::soft(array![[0.34, 0.33, 0.33]]).unwrap();
        assert_eq!(c.harden().channels(), vec![0]);
    }

    #[test]
    fn hard_allocation_validation() {
        assert!(ChannelAllocation::hard(&[0, 2], 2).is_err());
        assert!(ChannelAllocation::hard(&[], 2).is_err());
        assert!(ChannelAllocation::from_matrix(array![[0.5, 0.5]], AllocationMode::Hard).is_err());
        assert!(ChannelAllocation::soft(array![[0.7, 0.7]]).is_err());
        assert!(ChannelAllocation::soft(array![[1.2, -0.2]]).is_err());
    }

    fn total_for_channels(p: &PainMatrix, channels: &[usize], nc: usize) -> f64 {
        p.total_pain(&hard(channels, nc)).unwrap()
    }

    proptest! {
        #[test]
        fn channel_relabel_invariance_is_exact(
            seed in 0u64..500,
            n in 1usize..6,
            nc in 2usize..4,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut values = Array2::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        values[[i, j]] = rng.random::<f64>();
                    }
                }
            }
            let p = PainMatrix::new(values).unwrap();

            // Random soft rows.
            let mut c = Array2::zeros((n, nc));
            for i in 0..n {
                let raw: Vec<f64> = (0..nc).map(|_| rng.random::<f64>() + 1e-3).collect();
                let s: f64 = raw.iter().sum();
                for (ch, v) in raw.iter().enumerate() {
                    c[[i, ch]] = v / s;
                }
            }
            let soft = ChannelAllocation::soft(c.clone()).unwrap();

            // Rotate the channel labels.
            let mut rotated = Array2::zeros((n, nc));
            for i in 0..n {
                for ch in 0..nc {
                    rotated[[i, (ch + 1) % nc]] = c[[i, ch]];
                }
            }
            let soft_rot = ChannelAllocation::soft(rotated).unwrap();

            let a = p.total_pain(&soft).unwrap();
            let b = p.total_pain(&soft_rot).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn home_permutation_leaves_total_unchanged(
            seed in 0u64..500,
            n in 2usize..6,
        ) {
            use rand::{seq::SliceRandom, Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut values = Array2::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        values[[i, j]] = rng.random::<f64>();
                    }
                }
            }
            let channels: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
            let p = PainMatrix::new(values.clone()).unwrap();
            let before = total_for_channels(&p, &channels, 2);

            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let mut pv = Array2::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    pv[[i, j]] = values[[perm[i], perm[j]]];
                }
            }
            let pc: Vec<usize> = perm.iter().map(|&k| channels[k]).collect();
            let after = total_for_channels(&PainMatrix::new(pv).unwrap(), &pc, 2);
            prop_assert!((before - after).abs() <= 1e-12 * (1.0 + before.abs()));
        }

        #[test]
        fn per_home_sums_to_total_and_total_nonnegative(
            seed in 0u64..500,
            n in 1usize..7,
            nc in 2usize..4,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut values = Array2::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        values[[i, j]] = rng.random::<f64>();
                    }
                }
            }
            let p = PainMatrix::new(values).unwrap();
            let channels: Vec<usize> = (0..n).map(|_| rng.random_range(0..nc)).collect();
            let b = p.per_home_pain(&hard(&channels, nc)).unwrap();
            let sum: f64 = b.per_home.iter().sum();
            prop_assert!(b.total >= 0.0);
            prop_assert!((sum - b.total).abs() <= 1e-9 * (1.0 + b.total.abs()));
        }

        #[test]
        fn soft_hard_gap_is_bounded(
            seed in 0u64..300,
            n in 1usize..6,
            nc in 2usize..4,
            eps in 0.0f64..0.05,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut values = Array2::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        values[[i, j]] = rng.random::<f64>();
                    }
                }
            }
            let p = PainMatrix::new(values).unwrap();

            // Near-one-hot soft rows: the winner keeps mass 1-eps_i.
            let mut c = Array2::zeros((n, nc));
            for i in 0..n {
                let winner = rng.random_range(0..nc);
                let e = rng.random::<f64>() * eps;
                for ch in 0..nc {
                    c[[i, ch]] = if ch == winner {
                        1.0 - e
                    } else {
                        e / (nc as f64 - 1.0)
                    };
                }
            }
            let soft = ChannelAllocation::soft(c).unwrap();
            let gap = (p.total_pain(&soft).unwrap()
                - p.total_pain(&soft.harden()).unwrap())
            .abs();
            let bound = 4.0 * (n * n) as f64 * eps * p.max_entry();
            prop_assert!(gap <= bound + 1e-12, "gap {gap} > bound {bound}");
        }
    }
}
