//! Tensor SVD, multi-rank, tubal rank and the tubal nuclear norm.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::scalar::{compensated_sum, Scalar, ThinSvd};
use crate::spectral::{self, mirror_index, unique_slice_range, SpectralTensor};
use crate::tensor::{Dims, Tensor3};

/// Per-slice singular values of the Fourier-domain slices, each slice sorted
/// descending. Holds all `n3` slices (mirrored slices duplicated).
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum<T> {
    n3: usize,
    rank_bound: usize,
    values: Vec<T>,
}

impl<T: Scalar> SingularSpectrum<T> {
    /// `per_slice` must hold `n3` vectors of equal length.
    pub fn new(per_slice: Vec<Vec<T>>) -> Result<Self> {
        let n3 = per_slice.len();
        let r = per_slice.first().map_or(0, Vec::len);
        if n3 == 0 || per_slice.iter().any(|s| s.len() != r) {
            return Err(Error::Shape("ragged singular spectrum".into()));
        }
        Ok(Self {
            n3,
            rank_bound: r,
            values: per_slice.into_iter().flatten().collect(),
        })
    }

    pub(crate) fn from_unique(n3: usize, unique: Vec<Vec<T>>) -> Self {
        let r = unique.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(n3 * r);
        for k in 0..n3 {
            let src = if k < unique.len() { k } else { mirror_index(k, n3) };
            values.extend_from_slice(&unique[src]);
        }
        Self { n3, rank_bound: r, values }
    }

    pub fn zeros(n3: usize, rank_bound: usize) -> Self {
        Self {
            n3,
            rank_bound,
            values: vec![T::zero(); n3 * rank_bound],
        }
    }

    #[inline]
    pub fn n3(&self) -> usize {
        self.n3
    }

    /// `r = min(n1, n2)`.
    #[inline]
    pub fn rank_bound(&self) -> usize {
        self.rank_bound
    }

    #[inline]
    pub fn slice(&self, k: usize) -> &[T] {
        &self.values[k * self.rank_bound..(k + 1) * self.rank_bound]
    }

    pub fn iter_slices(&self) -> impl Iterator<Item = &[T]> {
        self.values.chunks(self.rank_bound.max(1)).take(self.n3)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }

    /// `sum_k sum_i sigma_i^k`.
    pub fn total(&self) -> T {
        compensated_sum(self.values.iter().copied())
    }
}

/// Thin SVDs of the unique Fourier-domain slices of a tensor.
#[derive(Debug, Clone)]
pub struct SpectralSvd<T> {
    dims: Dims,
    slices: Vec<ThinSvd<T>>,
}

impl<T: Scalar> SpectralSvd<T> {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Thin SVD of unique slice `k` (`k < n3 / 2 + 1`).
    pub fn slice(&self, k: usize) -> &ThinSvd<T> {
        &self.slices[k]
    }

    pub fn spectrum(&self) -> SingularSpectrum<T> {
        SingularSpectrum::from_unique(self.dims.2, self.slices.iter().map(|s| s.s.clone()).collect())
    }

    /// Rebuild a real tensor from the slice factors with replacement singular
    /// values `values[k]` (same length as the thin rank) for each unique slice.
    pub fn rebuild(&self, values: &[Vec<T>]) -> Result<Tensor3<T>> {
        spectral::idft_mode3(&self.rebuild_spectral(values)?)
    }

    /// The spectral tensor that [`SpectralSvd::rebuild`] inverts.
    pub fn rebuild_spectral(&self, values: &[Vec<T>]) -> Result<SpectralTensor<T>> {
        if values.len() != self.slices.len() || values.iter().zip(&self.slices).any(|(v, s)| v.len() != s.s.len()) {
            return Err(Error::Shape("replacement values do not match the factorization".into()));
        }
        let unique: Vec<CMatrix<T>> = self
            .slices
            .par_iter()
            .zip(values.par_iter())
            .map(|(svd, s)| CMatrix::from_svd(&svd.u, s, &svd.v))
            .collect();
        SpectralTensor::from_unique_slices(self.dims, unique, true)
    }
}

/// Whether slice `k` of an `n3`-slice transform of real data is real.
#[inline]
pub(crate) fn is_self_conjugate(k: usize, n3: usize) -> bool {
    mirror_index(k, n3) == k
}

fn realify<T: Scalar>(m: &CMatrix<T>) -> CMatrix<T> {
    let mut out = m.clone();
    for z in out.as_mut_slice() {
        z.im = T::zero();
    }
    out
}

/// Thin SVDs of the unique slices of `dft_mode3(a)`.
pub fn spectral_svd<T: Scalar>(a: &Tensor3<T>) -> Result<SpectralSvd<T>> {
    let spec = spectral::dft_mode3(a);
    spectral_svd_of(&spec)
}

pub(crate) fn spectral_svd_of<T: Scalar>(spec: &SpectralTensor<T>) -> Result<SpectralSvd<T>> {
    let n3 = spec.dims().2;
    let slices = unique_slice_range(n3)
        .into_par_iter()
        .map(|k| {
            let svd = if is_self_conjugate(k, n3) {
                T::thin_svd(&realify(spec.slice(k)))
            } else {
                T::thin_svd(spec.slice(k))
            };
            svd.ok_or(Error::SvdNonConvergence { slice: k })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralSvd { dims: spec.dims(), slices })
}

/// Singular values of every Fourier-domain slice.
pub fn spectral_singular_values<T: Scalar>(a: &Tensor3<T>) -> Result<SingularSpectrum<T>> {
    let spec = spectral::dft_mode3(a);
    let n3 = a.dims().2;
    let unique = unique_slice_range(n3)
        .into_par_iter()
        .map(|k| {
            let s = if is_self_conjugate(k, n3) {
                T::singular_values(&realify(spec.slice(k)))
            } else {
                T::singular_values(spec.slice(k))
            };
            s.ok_or(Error::SvdNonConvergence { slice: k })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SingularSpectrum::from_unique(n3, unique))
}

/// Factors of `A = U * S * V^*`.
#[derive(Debug, Clone)]
pub struct TsvdFactors<T> {
    pub u: Tensor3<T>,
    pub s: Tensor3<T>,
    pub v: Tensor3<T>,
    pub spectral_singular_values: SingularSpectrum<T>,
}

impl<T: Scalar> TsvdFactors<T> {
    /// `U * S * V^*`.
    pub fn reconstruct(&self) -> Result<Tensor3<T>> {
        self.u
            .t_product(&self.s)?
            .t_product(&self.v.conj_transpose())
    }
}

/// Full t-SVD with square orthogonal `U` (`n1 x n1 x n3`) and `V`
/// (`n2 x n2 x n3`).
pub fn t_svd<T: Scalar>(a: &Tensor3<T>) -> Result<TsvdFactors<T>> {
    let (n1, n2, n3) = a.dims();
    let thin = spectral_svd(a)?;
    let mut us = Vec::new();
    let mut ss = Vec::new();
    let mut vs = Vec::new();
    for k in unique_slice_range(n3) {
        let svd = thin.slice(k);
        us.push(T::complete_unitary(&svd.u));
        vs.push(T::complete_unitary(&svd.v));
        let mut s = CMatrix::zeros(n1, n2);
        for (i, &sigma) in svd.s.iter().enumerate() {
            s.set(i, i, Complex::new(sigma, T::zero()));
        }
        ss.push(s);
    }
    let u = spectral::idft_mode3(&SpectralTensor::from_unique_slices((n1, n1, n3), us, true)?)?;
    let s = spectral::idft_mode3(&SpectralTensor::from_unique_slices((n1, n2, n3), ss, true)?)?;
    let v = spectral::idft_mode3(&SpectralTensor::from_unique_slices((n2, n2, n3), vs, true)?)?;
    Ok(TsvdFactors {
        u,
        s,
        v,
        spectral_singular_values: thin.spectrum(),
    })
}

/// Ranks of the Fourier-domain slices and their maximum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiRank {
    pub ranks: Vec<usize>,
    pub tubal_rank: usize,
}

/// `r_k = #{ i : sigma_i^k > tol * sigma_max }` where `sigma_max` is the
/// largest singular value over all slices.
pub fn multi_rank<T: Scalar>(a: &Tensor3<T>, tol: T) -> Result<MultiRank> {
    if tol < T::zero() {
        return Err(Error::Domain("rank tolerance must be nonnegative".into()));
    }
    let spectrum = spectral_singular_values(a)?;
    Ok(multi_rank_of(&spectrum, tol))
}

pub fn multi_rank_of<T: Scalar>(spectrum: &SingularSpectrum<T>, tol: T) -> MultiRank {
    let cutoff = tol * spectrum.max();
    let ranks: Vec<usize> = spectrum
        .iter_slices()
        .map(|s| s.iter().filter(|&&v| v > cutoff).count())
        .collect();
    let tubal_rank = ranks.iter().copied().max().unwrap_or(0);
    MultiRank { ranks, tubal_rank }
}

/// Default relative rank tolerance.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// `||A||_* = (1/n3) sum_k ||Abar^(k)||_*`.
pub fn tubal_nuclear_norm<T: Scalar>(a: &Tensor3<T>) -> Result<T> {
    let spectrum = spectral_singular_values(a)?;
    Ok(spectrum.total() / T::from_usize_lossy(a.dims().2))
}
