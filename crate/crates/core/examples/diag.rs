//! Temporary diagnostics for solver quality and the generalization trend.

use chanopt::estimation::{
    binarize_sensing, build_usage_series, co_usage, potential_pain, snr_matrix, EstimationConfig,
    UsageSample,
};
use chanopt::harness::derive_seed;
use chanopt::solver::{solve_anneal, solve_branch_and_bound, solve_exhaustive, AnnealConfig, ExactConfig};
use chanopt::synth::{self, Layout, SynthConfig};
use chanopt::PainMatrix;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_instance(seed: u64, n: usize, density: f64, symmetric: bool) -> PainMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i == j || (symmetric && j < i) {
                continue;
            }
            if rng.random::<f64>() < density {
                let v = rng.random::<f64>();
                values[[i, j]] = v;
                if symmetric {
                    values[[j, i]] = v;
                }
            }
        }
    }
    PainMatrix::new(values).unwrap()
}

fn anneal_quality() {
    let exact_cfg = ExactConfig::default();
    let mut hits = 0;
    let mut worst_ratio: f64 = 0.0;
    for seed in 0..50u64 {
        let span = 10 - 4 + 1;
        let n = 4 + (seed as usize % span);
        let nc = 2 + (seed as usize % 2);
        let symmetric = (seed / 2) % 2 == 0;
        let p = random_instance(seed, n, 0.5, symmetric);
        let optimum = solve_exhaustive(&p, nc, &exact_cfg).unwrap().objective;
        let cfg = AnnealConfig {
            restarts: 5,
            seed: derive_seed(seed, "acceptance:anneal"),
            ..AnnealConfig::default()
        };
        let a = solve_anneal(&p, nc, &cfg).unwrap().objective;
        let hit = (a - optimum).abs() <= 1e-9 * (1.0 + optimum);
        if hit {
            hits += 1;
        } else {
            let ratio = if optimum > 0.0 { a / optimum } else { f64::INFINITY };
            worst_ratio = worst_ratio.max(ratio);
            println!(
                "  miss seed {seed}: n={n} nc={nc} sym={symmetric} anneal={a:.6} opt={optimum:.6} ratio={ratio:.4}"
            );
        }
    }
    println!("anneal quality: {hits}/50 optimal, worst ratio {worst_ratio:.4}");
}

fn trend(profile_seed_base: u64, radius: f64, restarts: u32, diverse: bool) {
    let reps = 20u64;
    let mut a1 = 0.0;
    let mut a4 = 0.0;
    let mut e1 = 0.0;
    let mut e4 = 0.0;
    let mut flips = 0;
    for rep in 0..reps {
        let profiles = if diverse {
            diverse_profiles(20, profile_seed_base + rep)
        } else {
            synth::random_base_profiles(20, profile_seed_base + rep)
        };
        let cfg = SynthConfig {
            n_homes: 20,
            layout: Layout::Grid { rows: 4, cols: 5 },
            sensing_radius: radius,
            base_usage_profile: profiles,
            day_noise_sigma: 0.5,
            n_train_days: 4,
            n_test_days: 1,
            num_channels: 2,
            seed: profile_seed_base + rep,
        };
        let data = synth::generate(&cfg).unwrap();
        let est_cfg = EstimationConfig::default();
        let s = snr_matrix(&data.scans, &data.mac_map, &data.neighborhood).unwrap();
        let sb = binarize_sensing(&s, &est_cfg).unwrap();
        let p_of = |samples: &[UsageSample]| -> PainMatrix {
            let series = build_usage_series(samples, &est_cfg, &data.neighborhood).unwrap();
            potential_pain(&co_usage(&series), &sb).unwrap()
        };
        let pooled4: Vec<UsageSample> = data.train_days().iter().flatten().cloned().collect();
        let p_train = [p_of(&data.usage_days[3]), p_of(&pooled4)];
        let p_test = p_of(&data.usage_days[4]);

        let mut exact_pains = [0.0; 2];
        for (variant, p) in p_train.iter().enumerate() {
            let anneal_cfg = AnnealConfig {
                seed: derive_seed(rep, "trend:anneal"),
                restarts,
                ..AnnealConfig::default()
            };
            let an = solve_anneal(p, 2, &anneal_cfg).unwrap();
            let ap = p_test.total_pain(&an.allocation).unwrap();
            let bn = solve_branch_and_bound(p, 2, &ExactConfig::default()).unwrap();
            let bp = p_test.total_pain(&bn.allocation).unwrap();
            exact_pains[variant] = bp;
            if variant == 0 {
                a1 += ap;
                e1 += bp;
            } else {
                a4 += ap;
                e4 += bp;
            }
        }
        if (exact_pains[0] - exact_pains[1]).abs() > 1e-9 {
            flips += 1;
        }
    }
    let m = reps as f64;
    println!(
        "trend radius={radius} restarts={restarts} diverse={diverse}: anneal 1d {:.2} vs 4d {:.2} ({}), exact 1d {:.2} vs 4d {:.2} ({}), exact decision changed in {flips}/20 seeds",
        a1 / m,
        a4 / m,
        if a4 <= a1 { "ok" } else { "VIOLATION" },
        e1 / m,
        e4 / m,
        if e4 <= e1 { "ok" } else { "VIOLATION" },
    );
}

fn diverse_profiles(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    (0..n)
        .map(|_| {
            let floor: f64 = rng.random_range(0.0..2.0);
            let amplitude: f64 = rng.random_range(2.0..90.0);
            let peak: f64 = rng.random_range(15.0..24.0);
            let width: f64 = rng.random_range(0.7..2.5);
            (0..24)
                .map(|h| {
                    let d = h as f64 - peak;
                    let v = floor + amplitude * (-d * d / (2.0 * width * width)).exp();
                    v.clamp(0.0, 100.0)
                })
                .collect()
        })
        .collect()
}


#[allow(dead_code)]
fn basin_counts() {
    let exact_cfg = ExactConfig::default();
    for &(seed, n, nc, sym) in &[(25u64, 8usize, 3usize, true), (47, 9, 3, false), (46, 8, 2, false), (48, 10, 2, true)] {
        let p = random_instance(seed, n, 0.5, sym);
        let optimum = solve_exhaustive(&p, nc, &exact_cfg).unwrap().objective;
        let mut counts: std::collections::BTreeMap<i64, usize> = Default::default();
        for trial in 0..100u64 {
            let cfg = AnnealConfig {
                restarts: 1,
                seed: trial.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(seed),
                ..AnnealConfig::default()
            };
            let a = solve_anneal(&p, nc, &cfg).unwrap().objective;
            *counts.entry((a / optimum * 100.0).round() as i64).or_default() += 1;
        }
        // What did the exact acceptance streams produce?
        let acc_cfg = AnnealConfig {
            restarts: 5,
            seed: derive_seed(seed, "acceptance:anneal"),
            ..AnnealConfig::default()
        };
        let acc = solve_anneal(&p, nc, &acc_cfg).unwrap().objective;
        println!("seed {seed} (n={n}, nc={nc}, sym={sym}): opt={optimum:.4}, acceptance best-of-5 ratio {:.3}, basin %-of-opt counts {:?}", acc / optimum, counts);
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    match args.get(1).map(|s| s.as_str()) {
        Some("anneal") => anneal_quality(),
        Some("basin") => basin_probe(),
        Some("counts") => basin_counts(),
        Some("trend") => {
            trend(9000, 1.5, 1, false);
            trend(9000, 1.5, 5, false);
            trend(9000, 2.2, 5, false);
            trend(9000, 2.2, 5, true);
            trend(9000, 1.5, 5, true);
        }
        _ => {
            anneal_quality();
        }
    }
}

#[allow(dead_code)]
fn basin_probe() {
    let exact_cfg = ExactConfig::default();
    for &(seed, n, nc, sym) in &[(25u64, 8usize, 3usize, true), (47, 9, 3, false), (46, 8, 2, false), (48, 10, 2, true)] {
        let p = random_instance(seed, n, 0.5, sym);
        let optimum = solve_exhaustive(&p, nc, &exact_cfg).unwrap().objective;
        let mut values = Vec::new();
        for trial in 0..30u64 {
            let cfg = AnnealConfig {
                restarts: 1,
                seed: trial.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(seed),
                ..AnnealConfig::default()
            };
            let a = solve_anneal(&p, nc, &cfg).unwrap().objective;
            values.push(a);
        }
        let hits = values.iter().filter(|&&v| (v - optimum).abs() <= 1e-9 * (1.0 + optimum)).count();
        let mut uniq: Vec<f64> = values.clone();
        uniq.sort_by(f64::total_cmp);
        uniq.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        println!(
            "seed {seed} (n={n}, nc={nc}, sym={sym}): opt={optimum:.6}, single-restart hit rate {hits}/30, distinct local values {:?}",
            uniq.iter().map(|v| (v / optimum * 100.0).round() / 100.0).collect::<Vec<f64>>()
        );
    }
}
