//! A small synthetic test image with exact low tubal rank.

use tnnr::Tensor;

pub const TEXTURE_DIMS: (usize, usize, usize) = (64, 64, 3);
pub const TEXTURE_RANK: usize = 4;

/// 64x64x3 texture `A * B` with nonnegative smooth factors of inner
/// dimension 4, scaled to `[0, 1]`. Fully determined by its formula.
pub fn bundled_texture() -> Tensor {
    let (n1, n2, n3) = TEXTURE_DIMS;
    let r = TEXTURE_RANK;
    let tau = std::f64::consts::TAU;
    let a = Tensor::from_fn((n1, r, n3), |i, l, k| {
        let freq = (l + 1) as f64;
        let phase = 0.7 * (l * 3 + k) as f64;
        1.0 + (tau * freq * i as f64 / n1 as f64 + phase).sin()
    });
    let b = Tensor::from_fn((r, n2, n3), |l, j, k| {
        let freq = (2 * l + 1) as f64;
        let phase = 1.3 * (l + 2 * k) as f64;
        1.0 + (tau * freq * j as f64 / n2 as f64 + phase).cos() * (0.5 + 0.5 * (tau * j as f64 / n2 as f64).sin())
    });
    let m = a.t_product(&b).expect("factor shapes agree");
    let lo = m.as_slice().iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = m.as_slice().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // an affine map would add a rank-one constant; only rescale
    debug_assert!(lo >= 0.0);
    m.scale(1.0 / hi)
}
