use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{symmetrize, RectMatrix, SymmetricMatrix};
use crate::Mat;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat {
    // row-major draw order so the stream layout is independent of storage
    let mut m = Mat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = StandardNormal.sample(rng);
        }
    }
    m
}

/// i.i.d. standard normal entries, then symmetrized.
pub fn random_symmetric(n: usize, seed: u64) -> SymmetricMatrix {
    let g = gaussian(n, n, &mut rng(seed));
    SymmetricMatrix::from_square(&symmetrize(&g)).expect("square by construction")
}

/// i.i.d. standard normal `n × k` matrix (`k ≤ n`).
pub fn random_rect(n: usize, k: usize, seed: u64) -> RectMatrix {
    assert!(k <= n, "random_rect needs k <= n");
    RectMatrix::new(gaussian(n, k, &mut rng(seed))).expect("tall by construction")
}

/// Haar-distributed orthogonal matrix: Q factor of a Gaussian matrix with the
/// signs of `diag(R)` absorbed.
pub fn random_orthogonal(n: usize, seed: u64) -> Mat {
    if n == 0 {
        return Mat::zeros(0, 0);
    }
    let g = gaussian(n, n, &mut rng(seed));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// First `k` columns of a random orthogonal matrix.
pub fn random_frame(n: usize, k: usize, seed: u64) -> Mat {
    random_orthogonal(n, seed).columns(0, k).into_owned()
}

/// Well-conditioned random symmetric positive definite `k × k` matrix
/// `G·Gᵀ/k + I`.
pub fn random_spd(k: usize, seed: u64) -> SymmetricMatrix {
    let g = gaussian(k, k, &mut rng(seed));
    let m = &g * g.transpose() / (k.max(1) as f64) + Mat::identity(k, k);
    SymmetricMatrix::from_square(&m).expect("square by construction")
}
