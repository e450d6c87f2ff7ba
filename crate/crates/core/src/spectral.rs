//! Mode-3 discrete Fourier transform and the conjugate-symmetric structure of
//! the transformed slices of a real tensor.
//!
//! The forward transform is unnormalized and the inverse carries the `1/n3`
//! factor. For real input, slice `0` is real and slice `k` equals the
//! conjugate of slice `n3 - k`, so only `n3 / 2 + 1` slices carry information.

use num_complex::Complex;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{shape_err, Error, Result};
use crate::matrix::CMatrix;
use crate::scalar::Scalar;
use crate::tensor::{Dims, Tensor3};

/// Fourier-domain frontal slices of a tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTensor<T> {
    dims: Dims,
    slices: Vec<CMatrix<T>>,
    origin_real: bool,
}

/// Number of leading slices that determine all others by conjugation.
#[inline]
pub fn unique_slice_count(n3: usize) -> usize {
    n3 / 2 + 1
}

/// Zero-based indices of the slices that must be computed explicitly; the
/// rest are conjugates of these.
pub fn unique_slice_range(n3: usize) -> std::ops::Range<usize> {
    0..unique_slice_count(n3).min(n3)
}

/// Index of the slice whose conjugate equals slice `k`.
#[inline]
pub fn mirror_index(k: usize, n3: usize) -> usize {
    (n3 - k) % n3
}

/// Imaginary residue below this (relative) is roundoff and dropped silently.
pub fn residue_drop_tol<T: Scalar>() -> f64 {
    1e-10f64.max(1e3 * T::epsilon().as_f64())
}

/// Imaginary residue above this (relative) is a logic error upstream.
pub fn residue_error_tol<T: Scalar>() -> f64 {
    1e-8f64.max(1e5 * T::epsilon().as_f64())
}

impl<T: Scalar> SpectralTensor<T> {
    /// Build from all `n3` slices.
    pub fn from_slices(dims: Dims, slices: Vec<CMatrix<T>>, origin_real: bool) -> Result<Self> {
        if slices.len() != dims.2 {
            return shape_err(format!("{} slices for n3 = {}", slices.len(), dims.2));
        }
        if slices.iter().any(|s| (s.rows(), s.cols()) != (dims.0, dims.1)) {
            return shape_err("spectral slice shape differs from dims");
        }
        Ok(Self { dims, slices, origin_real })
    }

    /// Build from the `unique_slice_count(n3)` leading slices, filling the
    /// remainder by conjugation.
    pub fn from_unique_slices(dims: Dims, unique: Vec<CMatrix<T>>, origin_real: bool) -> Result<Self> {
        let n3 = dims.2;
        if unique.len() != unique_slice_count(n3).min(n3) {
            return shape_err(format!(
                "{} unique slices for n3 = {n3}, expected {}",
                unique.len(),
                unique_slice_count(n3)
            ));
        }
        let mut slices = unique;
        for k in slices.len()..n3 {
            let m = slices[mirror_index(k, n3)].conj();
            slices.push(m);
        }
        Self::from_slices(dims, slices, origin_real)
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn origin_real(&self) -> bool {
        self.origin_real
    }

    #[inline]
    pub fn slice(&self, k: usize) -> &CMatrix<T> {
        &self.slices[k]
    }

    pub fn slices(&self) -> &[CMatrix<T>] {
        &self.slices
    }

    /// Largest deviation from conjugate symmetry: `|Im(slice 0)|` and
    /// `|conj(slice k) - slice(n3 - k)|` over all `k`.
    pub fn symmetry_residual(&self) -> T {
        let n3 = self.dims.2;
        let mut worst = self.slices[0]
            .as_slice()
            .iter()
            .map(|z| z.im.abs())
            .fold(T::zero(), T::max);
        for k in 1..n3 {
            let d = self.slices[k].conj().max_abs_diff(&self.slices[mirror_index(k, n3)]);
            worst = worst.max(d);
        }
        worst
    }

    /// Block-diagonal matrix `diag(slice 0, ..., slice n3-1)`.
    pub fn block_diag(&self) -> CMatrix<T> {
        let (n1, n2, n3) = self.dims;
        let mut out = CMatrix::zeros(n1 * n3, n2 * n3);
        for (k, s) in self.slices.iter().enumerate() {
            for j in 0..n2 {
                for i in 0..n1 {
                    out.set(k * n1 + i, k * n2 + j, s.get(i, j));
                }
            }
        }
        out
    }

    /// `sum_k ||slice k||_F^2`, which equals `n3 * ||A||_F^2` for the
    /// transform of a real tensor `A`.
    pub fn frobenius_norm_sqr(&self) -> T {
        crate::scalar::compensated_sum(self.slices.iter().map(|s| s.frobenius_norm_sqr()))
    }
}

fn transform_tubes<T: Scalar>(buffer: &mut [Complex<T>], n3: usize, direction: FftDirection) {
    if n3 == 1 {
        return;
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft(n3, direction);
    fft.process(buffer);
}

/// Forward unnormalized DFT along mode 3: `Abar(i, j, :) = F_n3 A(i, j, :)`.
pub fn dft_mode3<T: Scalar>(a: &Tensor3<T>) -> SpectralTensor<T> {
    let (n1, n2, n3) = a.dims();
    let plane = n1 * n2;
    let src = a.as_slice();
    let mut buffer = vec![Complex::new(T::zero(), T::zero()); plane * n3];
    for p in 0..plane {
        for k in 0..n3 {
            buffer[p * n3 + k] = Complex::new(src[p + plane * k], T::zero());
        }
    }
    transform_tubes(&mut buffer, n3, FftDirection::Forward);
    let slices = (0..n3)
        .map(|k| {
            let data = (0..plane).map(|p| buffer[p * n3 + k]).collect();
            CMatrix::from_column_major(n1, n2, data)
        })
        .collect();
    SpectralTensor {
        dims: (n1, n2, n3),
        slices,
        origin_real: true,
    }
}

/// Inverse DFT along mode 3 with `1/n3` normalization.
///
/// For spectra of real origin the imaginary part of the result must be
/// roundoff: it is dropped below [`residue_drop_tol`], dropped with a warning
/// up to [`residue_error_tol`], and rejected above it.
pub fn idft_mode3<T: Scalar>(s: &SpectralTensor<T>) -> Result<Tensor3<T>> {
    let (out, residue) = inverse_with_residue(s);
    if s.origin_real && residue > 0.0 {
        let limit = residue_error_tol::<T>();
        if residue > limit {
            return Err(Error::SpectralConsistency { residue, limit });
        }
        if residue > residue_drop_tol::<T>() {
            log::warn!("dropping imaginary residue {residue:e} after inverse transform");
        }
    }
    Ok(out)
}

/// Largest imaginary part of the inverse transform relative to the largest
/// real part.
pub fn imaginary_residue<T: Scalar>(s: &SpectralTensor<T>) -> f64 {
    inverse_with_residue(s).1
}

fn inverse_with_residue<T: Scalar>(s: &SpectralTensor<T>) -> (Tensor3<T>, f64) {
    let (n1, n2, n3) = s.dims;
    let plane = n1 * n2;
    let mut buffer = vec![Complex::new(T::zero(), T::zero()); plane * n3];
    for (k, slice) in s.slices.iter().enumerate() {
        for (p, &z) in slice.as_slice().iter().enumerate() {
            buffer[p * n3 + k] = z;
        }
    }
    transform_tubes(&mut buffer, n3, FftDirection::Inverse);
    let inv = T::one() / T::from_usize_lossy(n3);
    let mut data = vec![T::zero(); plane * n3];
    let mut max_re = T::zero();
    let mut max_im = T::zero();
    for p in 0..plane {
        for k in 0..n3 {
            let z = buffer[p * n3 + k] * inv;
            data[p + plane * k] = z.re;
            max_re = max_re.max(z.re.abs());
            max_im = max_im.max(z.im.abs());
        }
    }
    let residue = if max_im > T::zero() {
        (max_im / max_re.max(T::min_positive_value())).as_f64()
    } else {
        0.0
    };
    let out = Tensor3::new((n1, n2, n3), data).expect("buffer sized from dims");
    (out, residue)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_tensor(dims: Dims, seed: u64) -> Tensor3<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..dims.0 * dims.1 * dims.2)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        Tensor3::new(dims, data).unwrap()
    }

    fn tube(values: &[f64]) -> Tensor3<f64> {
        Tensor3::new((1, 1, values.len()), values.to_vec()).unwrap()
    }

    fn spectral_tube(s: &SpectralTensor<f64>) -> Vec<Complex<f64>> {
        s.slices().iter().map(|m| m.get(0, 0)).collect()
    }

    #[test]
    fn constant_tube_is_dc_impulse() {
        let c = 1.5;
        let s = dft_mode3(&tube(&[c, c, c, c]));
        let t = spectral_tube(&s);
        assert!((t[0] - Complex::new(4.0 * c, 0.0)).norm() < 1e-14);
        for z in &t[1..] {
            assert!(z.norm() < 1e-14);
        }
    }

    #[test]
    fn impulse_tube_is_flat() {
        let s = dft_mode3(&tube(&[1.0, 0.0, 0.0, 0.0]));
        for z in spectral_tube(&s) {
            assert!((z - Complex::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn real_input_is_conjugate_symmetric() {
        let s = dft_mode3(&rand_tensor((3, 3, 5), 1));
        assert!(s.symmetry_residual() < 1e-12);
        let s = dft_mode3(&rand_tensor((3, 2, 6), 2));
        assert!(s.symmetry_residual() < 1e-12);
    }

    #[test]
    fn roundtrip() {
        let a = rand_tensor((4, 3, 6), 3);
        let back = idft_mode3(&dft_mode3(&a)).unwrap();
        assert!(back.relative_error(&a).unwrap() < 1e-12);
    }

    #[test]
    fn all_identity_slices_invert_to_identity_tensor() {
        let (n, n3) = (3, 4);
        let s = SpectralTensor::<f64>::from_slices((n, n, n3), vec![CMatrix::identity(n); n3], true).unwrap();
        let t = idft_mode3(&s).unwrap();
        assert!(t.max_abs_diff(&Tensor3::identity(n, n3)).unwrap() < 1e-15);
    }

    #[test]
    fn symmetry_preserving_edit_stays_real() {
        let a = rand_tensor((3, 3, 5), 4);
        let s = dft_mode3(&a);
        let half: Vec<_> = unique_slice_range(5)
            .map(|k| {
                let mut m = s.slice(k).clone();
                for z in m.as_mut_slice() {
                    *z = *z * 0.5;
                }
                m
            })
            .collect();
        let edited = SpectralTensor::from_unique_slices((3, 3, 5), half, true).unwrap();
        let t = idft_mode3(&edited).unwrap();
        assert!(t.max_abs_diff(&a.scale(0.5)).unwrap() < 1e-12);
    }

    #[test]
    fn broken_symmetry_is_rejected() {
        let a = rand_tensor((2, 2, 4), 5);
        let mut slices = dft_mode3(&a).slices().to_vec();
        slices[1].set(0, 0, Complex::new(3.0, 2.0));
        let bad = SpectralTensor::from_slices((2, 2, 4), slices, true).unwrap();
        assert!(matches!(idft_mode3(&bad), Err(Error::SpectralConsistency { .. })));
    }

    #[test]
    fn unique_ranges() {
        assert_eq!(unique_slice_range(1), 0..1);
        assert_eq!(unique_slice_range(4), 0..3);
        assert_eq!(unique_slice_range(5), 0..3);
        assert_eq!(mirror_index(3, 4), 1);
        assert_eq!(mirror_index(4, 5), 1);
        assert_eq!(mirror_index(3, 5), 2);
        assert_eq!(mirror_index(0, 5), 0);
    }

    #[test]
    fn mirror_completion_reproduces_transform() {
        for &n3 in &[1usize, 2, 5, 6] {
            let s = dft_mode3(&rand_tensor((3, 2, n3), 6 + n3 as u64));
            let half = unique_slice_range(n3).map(|k| s.slice(k).clone()).collect();
            let rebuilt = SpectralTensor::from_unique_slices((3, 2, n3), half, true).unwrap();
            for k in 0..n3 {
                assert!(rebuilt.slice(k).max_abs_diff(s.slice(k)) < 1e-12);
            }
        }
    }

    #[test]
    fn block_diag_examples() {
        let a = rand_tensor((2, 3, 1), 7);
        let s = dft_mode3(&a);
        assert_eq!(s.block_diag(), *s.slice(0));

        let a = rand_tensor((4, 3, 5), 8);
        let s = dft_mode3(&a);
        let lhs = a.frobenius_norm_sqr();
        let rhs = s.block_diag().frobenius_norm_sqr() / 5.0;
        assert!((lhs - rhs).abs() / lhs < 1e-12);

        let i = dft_mode3(&Tensor3::<f64>::identity(2, 3)).block_diag();
        assert!(i.max_abs_diff(&CMatrix::identity(6)) < 1e-15);
    }
}
