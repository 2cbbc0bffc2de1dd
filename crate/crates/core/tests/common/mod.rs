#![allow(dead_code)]

use affdim::SquareMatrix;
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    Plain,
    Jordan,
    Rotation,
}

/// `S·B·S⁻¹` with `B` upper block-triangular: random real parts drawn from
/// `parts`, optionally a leading Jordan or rotation block, and `S` a random
/// well-conditioned change of basis.
pub fn random_matrix(rng: &mut impl Rng, n: usize, parts: (f64, f64), block: Block) -> SquareMatrix {
    let mut b = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        b[(i, i)] = rng.random_range(parts.0..parts.1);
    }
    if n >= 2 {
        match block {
            Block::Plain => {}
            Block::Jordan => {
                b[(1, 1)] = b[(0, 0)];
                b[(0, 1)] = rng.random_range(0.5..2.0);
            }
            Block::Rotation => {
                b[(1, 1)] = b[(0, 0)];
                let w = rng.random_range(0.1..1.0);
                b[(0, 1)] = -w;
                b[(1, 0)] = w;
            }
        }
    }
    let s = DMatrix::<f64>::identity(n, n) + DMatrix::from_fn(n, n, |_, _| 0.3 * rng.random_range(-1.0..1.0));
    let s_inv = s.clone().try_inverse().expect("perturbed identity is invertible");
    SquareMatrix::from_dmatrix(&s * b * s_inv).unwrap()
}
