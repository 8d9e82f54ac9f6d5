//! Shared helpers for the integration suites.

use chanopt::PainMatrix;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random pain instance: off-diagonal entries are uniform [0,1] with the
/// given density, the diagonal is zero, and symmetric instances mirror the
/// upper triangle.
pub fn random_instance(seed: u64, n: usize, density: f64, symmetric: bool) -> PainMatrix {
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
    PainMatrix::new(values).expect("generated entries are valid")
}

/// Instance mix used by the solver acceptance criteria: sizes cycle up to
/// `max_n`, channel counts alternate between 2 and 3, and symmetric and
/// asymmetric matrices alternate.
pub fn instance_suite(count: usize, min_n: usize, max_n: usize) -> Vec<(PainMatrix, usize, u64)> {
    (0..count as u64)
        .map(|seed| {
            let span = max_n - min_n + 1;
            let n = min_n + (seed as usize % span);
            let nc = 2 + (seed as usize % 2);
            let symmetric = (seed / 2) % 2 == 0;
            (random_instance(seed, n, 0.5, symmetric), nc, seed)
        })
        .collect()
}
