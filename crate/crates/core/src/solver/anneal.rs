//! Softmax-annealed gradient-descent solver.
//!
//! The one-hot allocation is relaxed to a soft allocation
//! `C[i][c] = softmax_c(beta * W[i])` over a real parameter matrix `W`. Adam
//! descends the soft pain `Tr(CᵀPC)` (optionally plus `lambda * ||W||²`)
//! while the inverse temperature `beta` rises through a fixed phase
//! schedule, so early phases explore near-uniform allocations and late
//! phases sharpen toward a valid one-hot solution, which is finally read off
//! by row argmax.
//!
//! A solve is fully deterministic given `(seed, config, P)`: each restart
//! owns ChaCha8 stream `restart_index` of the seed and initializes `W` with
//! i.i.d. standard-normal draws in row-major order.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::pain::{ChannelAllocation, PainMatrix};
use crate::solver::{SolverKind, SolverReport, TraceSample};
use crate::{Error, Result};

/// Annealing-solver configuration.
///
/// The defaults are the reference schedule: four phases at inverse
/// temperatures 1, 10, 100, 1000 with 6400 Adam steps each at learning rate
/// 0.001. Every update uses the full gradient of the single neighborhood
/// instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealConfig {
    /// Strictly increasing positive inverse temperatures, one per phase.
    pub beta_schedule: Vec<f64>,
    pub steps_per_phase: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    /// L2 penalty weight on `W`; 0 disables regularization.
    pub l2_lambda: f64,
    /// Independent random restarts; the best hard objective wins.
    pub restarts: u32,
    pub seed: u64,
    /// Record a trace sample every this many steps.
    pub trace_stride: usize,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            beta_schedule: vec![1.0, 10.0, 100.0, 1000.0],
            steps_per_phase: 6400,
            learning_rate: 0.001,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            l2_lambda: 0.0,
            restarts: 1,
            seed: 0,
            trace_stride: 100,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beta_schedule.is_empty() {
            return Err(Error::invalid("anneal config", "empty beta schedule"));
        }
        let mut prev = 0.0;
        for &b in &self.beta_schedule {
            if !b.is_finite() || b <= prev {
                return Err(Error::invalid(
                    "anneal config",
                    format!("beta schedule must be strictly increasing and positive, got {:?}", self.beta_schedule),
                ));
            }
            prev = b;
        }
        if self.steps_per_phase == 0 {
            return Err(Error::invalid("anneal config", "steps_per_phase must be at least 1"));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::invalid("anneal config", "learning_rate must be positive"));
        }
        if !self.l2_lambda.is_finite() || self.l2_lambda < 0.0 {
            return Err(Error::invalid("anneal config", "l2_lambda must be nonnegative"));
        }
        if self.restarts == 0 {
            return Err(Error::invalid("anneal config", "restarts must be at least 1"));
        }
        if self.trace_stride == 0 {
            return Err(Error::invalid("anneal config", "trace_stride must be at least 1"));
        }
        Ok(())
    }
}

/// The solver's real-valued parameters `W` (one row per home, one column per
/// channel).
#[derive(Debug, Clone, PartialEq)]
pub struct SolverWeights {
    values: Array2<f64>,
}

impl SolverWeights {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() < 2 {
            return Err(Error::invalid(
                "solver weights",
                format!("shape {:?} needs at least 1 home and 2 channels", values.dim()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("solver weights", "non-finite entry"));
        }
        Ok(SolverWeights { values })
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
}

/// Row-wise softmax of `beta * W`, computed with per-row max subtraction so
/// extreme betas saturate instead of overflowing.
pub fn soft_allocation(w: &SolverWeights, beta: f64) -> Result<ChannelAllocation> {
    check_beta(beta)?;
    let mut c = Array2::zeros(w.values.dim());
    softmax_into(&w.values, beta, &mut c);
    ChannelAllocation::soft(c)
}

/// Soft pain `Tr(CᵀPC) + lambda * ||W||²` at inverse temperature `beta`.
pub fn soft_pain(p: &PainMatrix, w: &SolverWeights, beta: f64, l2_lambda: f64) -> Result<f64> {
    check_dims(p, w)?;
    let c = soft_allocation(w, beta)?;
    let pain = p.total_pain(&c)?;
    Ok(pain + l2_lambda * squared_norm(&w.values))
}

/// Exact gradient of [`soft_pain`] with respect to `W`.
///
/// With `C = softmax(beta*W)` row-wise and `G = (P + Pᵀ)C`, the chain rule
/// through the row-softmax Jacobian gives
/// `dL/dW[i][d] = beta * C[i][d] * (G[i][d] - Σ_c G[i][c]·C[i][c]) + 2·lambda·W[i][d]`.
pub fn loss_gradient(
    p: &PainMatrix,
    w: &SolverWeights,
    beta: f64,
    l2_lambda: f64,
) -> Result<Array2<f64>> {
    check_beta(beta)?;
    check_dims(p, w)?;
    let a = symmetrized(p);
    let (n, nc) = w.values.dim();
    let mut c = Array2::zeros((n, nc));
    let mut g = Array2::zeros((n, nc));
    let mut grad = Array2::zeros((n, nc));
    softmax_into(&w.values, beta, &mut c);
    gradient_into(&a, &c, &w.values, beta, l2_lambda, &mut g, &mut grad);
    Ok(grad)
}

/// Runs the annealing schedule from `restarts` random initializations and
/// returns the restart with the lowest hard objective (ties to the lowest
/// restart index).
pub fn solve(p: &PainMatrix, num_channels: usize, cfg: &AnnealConfig) -> Result<SolverReport> {
    cfg.validate()?;
    if num_channels < 2 {
        return Err(Error::invalid(
            "solve request",
            format!("num_channels must be at least 2, got {num_channels}"),
        ));
    }
    let a = symmetrized(p);

    let runs: Vec<Result<RestartOutcome>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|restart| run_restart(p, &a, num_channels, cfg, restart))
        .collect();

    let mut best: Option<RestartOutcome> = None;
    for run in runs {
        let run = run?;
        let better = match &best {
            None => true,
            Some(b) => run.objective < b.objective,
        };
        if better {
            best = Some(run);
        }
    }
    let best = best.expect("restarts >= 1");

    Ok(SolverReport {
        solver: SolverKind::Anneal,
        allocation: best.allocation,
        objective: best.objective,
        soft_objective_final: Some(best.soft_final),
        trace: best.trace,
        restarts_used: cfg.restarts,
        seed: Some(cfg.seed),
        config: serde_json::to_value(cfg).expect("config serializes"),
    })
}

struct RestartOutcome {
    allocation: ChannelAllocation,
    objective: f64,
    soft_final: f64,
    trace: Vec<TraceSample>,
}

fn run_restart(
    p: &PainMatrix,
    a: &Array2<f64>,
    num_channels: usize,
    cfg: &AnnealConfig,
    restart: u32,
) -> Result<RestartOutcome> {
    let n = p.num_homes();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64);

    let mut w = Array2::zeros((n, num_channels));
    for i in 0..n {
        for c in 0..num_channels {
            w[[i, c]] = StandardNormal.sample(&mut rng);
        }
    }

    let mut adam = Adam::new(n * num_channels, cfg);
    let mut c = Array2::zeros((n, num_channels));
    let mut g = Array2::zeros((n, num_channels));
    let mut grad = Array2::zeros((n, num_channels));
    let mut trace = Vec::new();
    let mut step = 0usize;

    for &beta in &cfg.beta_schedule {
        for _ in 0..cfg.steps_per_phase {
            softmax_into(&w, beta, &mut c);
            gradient_into(a, &c, &w, beta, cfg.l2_lambda, &mut g, &mut grad);
            adam.update(
                w.as_slice_mut().expect("standard layout"),
                grad.as_slice().expect("standard layout"),
            );
            step += 1;
            if step % cfg.trace_stride == 0 {
                softmax_into(&w, beta, &mut c);
                let soft = ChannelAllocation::soft(c.clone())?;
                let pain = p.total_pain(&soft)? + cfg.l2_lambda * squared_norm(&w);
                trace.push(TraceSample(beta, step, pain));
            }
        }
    }

    let beta_end = *cfg.beta_schedule.last().expect("non-empty schedule");
    softmax_into(&w, beta_end, &mut c);
    let soft = ChannelAllocation::soft(c)?;
    let soft_final = p.total_pain(&soft)?;
    let allocation = soft.harden();
    let objective = p.total_pain(&allocation)?;
    Ok(RestartOutcome {
        allocation,
        objective,
        soft_final,
        trace,
    })
}

fn check_beta(beta: f64) -> Result<()> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::invalid("beta", format!("must be positive, got {beta}")));
    }
    Ok(())
}

fn check_dims(p: &PainMatrix, w: &SolverWeights) -> Result<()> {
    if p.num_homes() != w.num_homes() {
        return Err(Error::DimensionMismatch {
            left: format!("pain matrix is {0}x{0}", p.num_homes()),
            right: format!("weights have {} home rows", w.num_homes()),
        });
    }
    Ok(())
}

fn symmetrized(p: &PainMatrix) -> Array2<f64> {
    let n = p.num_homes();
    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            a[[i, j]] = p.get(i, j) + p.get(j, i);
        }
    }
    a
}

fn squared_norm(w: &Array2<f64>) -> f64 {
    w.iter().map(|v| v * v).sum()
}

fn softmax_into(w: &Array2<f64>, beta: f64, c: &mut Array2<f64>) {
    let (n, nc) = w.dim();
    for i in 0..n {
        let mut max = f64::NEG_INFINITY;
        for ch in 0..nc {
            max = max.max(beta * w[[i, ch]]);
        }
        let mut sum = 0.0;
        for ch in 0..nc {
            let e = (beta * w[[i, ch]] - max).exp();
            c[[i, ch]] = e;
            sum += e;
        }
        for ch in 0..nc {
            c[[i, ch]] /= sum;
        }
    }
}

fn gradient_into(
    a: &Array2<f64>,
    c: &Array2<f64>,
    w: &Array2<f64>,
    beta: f64,
    l2_lambda: f64,
    g: &mut Array2<f64>,
    grad: &mut Array2<f64>,
) {
    let (n, nc) = c.dim();
    // g = (P + Pᵀ) · C
    for i in 0..n {
        for ch in 0..nc {
            g[[i, ch]] = 0.0;
        }
        for j in 0..n {
            let aij = a[[i, j]];
            if aij == 0.0 {
                continue;
            }
            for ch in 0..nc {
                g[[i, ch]] += aij * c[[j, ch]];
            }
        }
    }
    for i in 0..n {
        let mut s = 0.0;
        for ch in 0..nc {
            s += g[[i, ch]] * c[[i, ch]];
        }
        for ch in 0..nc {
            grad[[i, ch]] = beta * c[[i, ch]] * (g[[i, ch]] - s) + 2.0 * l2_lambda * w[[i, ch]];
        }
    }
}

/// Adam with bias correction over a flat parameter vector.
struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: i32,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    fn new(len: usize, cfg: &AnnealConfig) -> Self {
        Adam {
            lr: cfg.learning_rate,
            beta1: cfg.adam_beta1,
            beta2: cfg.adam_beta2,
            eps: cfg.adam_epsilon,
            t: 0,
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }

    fn update(&mut self, params: &mut [f64], grads: &[f64]) {
        debug_assert_eq!(params.len(), grads.len());
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for k in 0..params.len() {
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * grads[k];
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * grads[k] * grads[k];
            let m_hat = self.m[k] / bc1;
            let v_hat = self.v[k] / bc2;
            params[k] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::Rng;

    fn weights(rows: Vec<Vec<f64>>) -> SolverWeights {
        let n = rows.len();
        let nc = rows[0].len();
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        SolverWeights::new(Array2::from_shape_vec((n, nc), flat).unwrap()).unwrap()
    }

    fn random_pain(rng: &mut impl Rng, n: usize) -> PainMatrix {
        let mut values = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    values[[i, j]] = rng.random::<f64>();
                }
            }
        }
        PainMatrix::new(values).unwrap()
    }

    #[test]
    fn soft_allocation_uniform_for_zero_weights() {
        let w = weights(vec![vec![0.0, 0.0]]);
        for beta in [0.1, 1.0, 1000.0] {
            let c = soft_allocation(&w, beta).unwrap();
            assert_eq!(c.values()[[0, 0]], 0.5);
            assert_eq!(c.values()[[0, 1]], 0.5);
        }
    }

    #[test]
    fn soft_allocation_matches_softmax_formula() {
        let w = weights(vec![vec![1.0, 0.0]]);
        let c = soft_allocation(&w, 1.0).unwrap();
        assert_abs_diff_eq!(c.values()[[0, 0]], 0.7310585786300049, epsilon = 1e-12);
        assert_abs_diff_eq!(c.values()[[0, 1]], 0.2689414213699951, epsilon = 1e-12);
    }

    #[test]
    fn soft_allocation_saturates_without_overflow() {
        let w = weights(vec![vec![1.0, 0.0]]);
        let c = soft_allocation(&w, 1000.0).unwrap();
        assert!(c.values()[[0, 0]] >= 1.0 - 1e-12);
        let row_sum = c.values()[[0, 0]] + c.values()[[0, 1]];
        assert!((row_sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn soft_pain_of_zero_weights_is_mean_over_channels() {
        let p = PainMatrix::from_rows(&[vec![0.0, 2.0], vec![3.0, 0.0]]).unwrap();
        let w = weights(vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
        assert_abs_diff_eq!(soft_pain(&p, &w, 1.0, 0.0).unwrap(), 2.5, epsilon = 1e-12);
    }

    #[test]
    fn soft_pain_penalty_only_term() {
        let p = PainMatrix::zeros(2).unwrap();
        let w = weights(vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(soft_pain(&p, &w, 7.0, 0.0).unwrap(), 0.0);
        assert_eq!(soft_pain(&p, &w, 7.0, 0.5).unwrap(), 2.0);
    }

    #[test]
    fn gradient_zero_for_zero_pain_without_penalty() {
        let p = PainMatrix::zeros(3).unwrap();
        let w = weights(vec![vec![0.3, -0.2], vec![1.0, 0.5], vec![-0.1, 0.9]]);
        let grad = loss_gradient(&p, &w, 10.0, 0.0).unwrap();
        assert!(grad.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_rows_sum_to_zero_for_uniform_rows() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = random_pain(&mut rng, 4);
        let w = SolverWeights::new(Array2::zeros((4, 3))).unwrap();
        let grad = loss_gradient(&p, &w, 5.0, 0.0).unwrap();
        for i in 0..4 {
            let row_sum: f64 = (0..3).map(|c| grad[[i, c]]).sum();
            assert_abs_diff_eq!(row_sum, 0.0, epsilon = 1e-12);
        }
    }

    /// Central-difference oracle, independent of the analytic path.
    fn finite_difference(
        p: &PainMatrix,
        w: &SolverWeights,
        beta: f64,
        l2: f64,
        h: f64,
    ) -> Array2<f64> {
        let (n, nc) = w.values().dim();
        let mut fd = Array2::zeros((n, nc));
        for i in 0..n {
            for c in 0..nc {
                let mut up = w.values().clone();
                up[[i, c]] += h;
                let mut down = w.values().clone();
                down[[i, c]] -= h;
                let f_up = soft_pain(p, &SolverWeights::new(up).unwrap(), beta, l2).unwrap();
                let f_down = soft_pain(p, &SolverWeights::new(down).unwrap(), beta, l2).unwrap();
                fd[[i, c]] = (f_up - f_down) / (2.0 * h);
            }
        }
        fd
    }

    fn relative_gradient_error(analytic: &Array2<f64>, fd: &Array2<f64>) -> f64 {
        let diff: f64 = analytic
            .iter()
            .zip(fd.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = fd.iter().map(|v| v * v).sum::<f64>().sqrt();
        diff / norm.max(1e-12)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        use rand::SeedableRng;
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 2 + (seed as usize % 2);
            let p = random_pain(&mut rng, n);
            let mut wv = Array2::zeros((n, 2));
            for v in wv.iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
            let w = SolverWeights::new(wv).unwrap();
            for beta in [1.0, 10.0] {
                for l2 in [0.0, 0.01] {
                    let grad = loss_gradient(&p, &w, beta, l2).unwrap();
                    let fd = finite_difference(&p, &w, beta, l2, 1e-5);
                    let err = relative_gradient_error(&grad, &fd);
                    assert!(err <= 1e-4, "seed {seed} beta {beta} l2 {l2}: error {err}");
                }
            }
        }
    }

    fn quick_cfg(seed: u64) -> AnnealConfig {
        AnnealConfig {
            steps_per_phase: 400,
            seed,
            ..AnnealConfig::default()
        }
    }

    #[test]
    fn solve_separates_a_heavy_pair_with_defaults() {
        let p = PainMatrix::from_rows(&[vec![0.0, 5.0], vec![5.0, 0.0]]).unwrap();
        let report = solve(&p, 2, &AnnealConfig::default()).unwrap();
        assert_eq!(report.objective, 0.0);
        let ch = report.allocation.channels();
        assert_ne!(ch[0], ch[1]);
        assert_eq!(report.restarts_used, 1);
    }

    #[test]
    fn solve_on_zero_matrix_returns_valid_allocation() {
        let p = PainMatrix::zeros(4).unwrap();
        let report = solve(&p, 3, &quick_cfg(3)).unwrap();
        assert_eq!(report.objective, 0.0);
        assert_eq!(report.allocation.num_channels(), 3);
    }

    #[test]
    fn solve_triangle_reaches_enumerated_optimum() {
        // Three mutually-paining homes, two channels: some pair must share,
        // so the best achievable value over all 8 hard allocations is 2.
        let p = PainMatrix::from_rows(&[
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap();
        let cfg = AnnealConfig {
            restarts: 3,
            ..quick_cfg(11)
        };
        let report = solve(&p, 2, &cfg).unwrap();
        assert_eq!(report.objective, 2.0);
    }

    #[test]
    fn solve_is_deterministic() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = random_pain(&mut rng, 6);
        let cfg = AnnealConfig {
            restarts: 3,
            l2_lambda: 0.001,
            ..quick_cfg(9)
        };
        let a = solve(&p, 2, &cfg).unwrap();
        let b = solve(&p, 2, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(!a.trace.is_empty());
        assert_eq!(a.seed, Some(9));
    }

    #[test]
    fn saturation_is_monotone_in_beta() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut wv = Array2::zeros((5, 3));
        for v in wv.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        let w = SolverWeights::new(wv).unwrap();
        let mut prev_max = vec![0.0; 5];
        for beta in [1.0, 10.0, 100.0, 1000.0] {
            let c = soft_allocation(&w, beta).unwrap();
            for i in 0..5 {
                let row_max = (0..3).map(|ch| c.values()[[i, ch]]).fold(0.0, f64::max);
                assert!(row_max >= prev_max[i] - 1e-15);
                prev_max[i] = row_max;
            }
        }
    }

    #[test]
    fn hard_objective_invariant_under_row_shifts() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let p = random_pain(&mut rng, 5);
        let mut wv = Array2::zeros((5, 2));
        for v in wv.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        let shifted = {
            let mut s = wv.clone();
            for i in 0..5 {
                let k: f64 = rng.random::<f64>() * 10.0 - 5.0;
                for c in 0..2 {
                    s[[i, c]] += k;
                }
            }
            s
        };
        let w = SolverWeights::new(wv).unwrap();
        let ws = SolverWeights::new(shifted).unwrap();
        for beta in [1.0, 100.0] {
            let h1 = soft_allocation(&w, beta).unwrap().harden();
            let h2 = soft_allocation(&ws, beta).unwrap().harden();
            assert_eq!(h1, h2);
            assert_eq!(p.total_pain(&h1).unwrap(), p.total_pain(&h2).unwrap());
        }
    }

    #[test]
    fn config_validation_rejects_bad_schedules() {
        let mut cfg = AnnealConfig::default();
        cfg.beta_schedule = vec![1.0, 1.0];
        assert!(cfg.validate().is_err());
        cfg.beta_schedule = vec![-1.0, 10.0];
        assert!(cfg.validate().is_err());
        cfg.beta_schedule = vec![];
        assert!(cfg.validate().is_err());
        let cfg = AnnealConfig {
            steps_per_phase: 0,
            ..AnnealConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = PainMatrix::zeros(3).unwrap();
        let w = weights(vec![vec![0.0, 0.0]]);
        assert!(soft_pain(&p, &w, 1.0, 0.0).is_err());
        assert!(loss_gradient(&p, &w, 1.0, 0.0).is_err());
    }

    #[test]
    fn uniform_soft_example_row_w_one_zero() {
        let p = PainMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let w = weights(vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
        // 1/n_c * sum(P) with n_c = 2.
        assert_abs_diff_eq!(
            soft_pain(&p, &w, 3.0, 0.0).unwrap(),
            array![[0.0, 1.0], [1.0, 0.0]].sum() / 2.0,
            epsilon = 1e-12
        );
    }
}
