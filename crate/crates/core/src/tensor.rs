//! Dense third-order tensors and the t-product algebra.
//!
//! Storage is `i`-fastest, then `j`, then `k`: each frontal slice `A(:,:,k)`
//! is a contiguous column-major `n1 x n2` block.

use std::ops::{Add, Sub};


use crate::error::{shape_err, Error, Result};
use crate::matrix::{CMatrix, RMatrix};
use crate::scalar::{compensated_sum, Scalar};
use crate::spectral::{self, SpectralTensor};

/// Tensor dimensions `(n1, n2, n3)`.
pub type Dims = (usize, usize, usize);

/// Dense real order-3 tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3<T> {
    dims: Dims,
    data: Vec<T>,
}

/// Read-only view of the frontal slice `A(:,:,k)`.
#[derive(Debug, Clone, Copy)]
pub struct FrontalSlice<'a, T> {
    parent: &'a Tensor3<T>,
    k: usize,
}

impl<'a, T: Scalar> FrontalSlice<'a, T> {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.parent.get(i, j, self.k)
    }

    pub fn index(&self) -> usize {
        self.k
    }

    pub fn as_slice(&self) -> &'a [T] {
        let (n1, n2, _) = self.parent.dims;
        &self.parent.data[self.k * n1 * n2..(self.k + 1) * n1 * n2]
    }

    pub fn to_matrix(&self) -> RMatrix<T> {
        let (n1, n2, _) = self.parent.dims;
        RMatrix::from_column_major(n1, n2, self.as_slice().to_vec())
    }
}

fn check_dims(dims: Dims) -> Result<()> {
    if dims.0 == 0 || dims.1 == 0 || dims.2 == 0 {
        return shape_err(format!("dimensions must be positive, got {dims:?}"));
    }
    Ok(())
}

impl<T: Scalar> Tensor3<T> {
    pub fn new(dims: Dims, data: Vec<T>) -> Result<Self> {
        check_dims(dims)?;
        let expected = dims.0 * dims.1 * dims.2;
        if data.len() != expected {
            return shape_err(format!(
                "buffer holds {} values, dims {dims:?} need {expected}",
                data.len()
            ));
        }
        Ok(Self { dims, data })
    }

    /// # Panics
    /// If any dimension is zero.
    pub fn zeros(dims: Dims) -> Self {
        check_dims(dims).expect("tensor dimensions");
        Self {
            dims,
            data: vec![T::zero(); dims.0 * dims.1 * dims.2],
        }
    }

    pub fn from_elem(dims: Dims, value: T) -> Self {
        let mut t = Self::zeros(dims);
        t.data.iter_mut().for_each(|v| *v = value);
        t
    }

    pub fn from_fn(dims: Dims, f: impl Fn(usize, usize, usize) -> T) -> Self {
        let mut t = Self::zeros(dims);
        let (n1, n2, n3) = dims;
        for k in 0..n3 {
            for j in 0..n2 {
                for i in 0..n1 {
                    t.data[i + n1 * (j + n2 * k)] = f(i, j, k);
                }
            }
        }
        t
    }

    /// Stack `n3` matrices of equal shape as frontal slices.
    pub fn from_slices(slices: &[RMatrix<T>]) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::Shape("no frontal slices".into()))?;
        let (n1, n2) = (first.rows(), first.cols());
        let mut data = Vec::with_capacity(n1 * n2 * slices.len());
        for s in slices {
            if (s.rows(), s.cols()) != (n1, n2) {
                return shape_err("frontal slices differ in shape");
            }
            data.extend_from_slice(s.as_slice());
        }
        Self::new((n1, n2, slices.len()), data)
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims.0 * (j + self.dims.1 * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.data[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: T) {
        let o = self.offset(i, j, k);
        self.data[o] = v;
    }

    pub fn frontal_slice(&self, k: usize) -> Result<FrontalSlice<'_, T>> {
        if k >= self.dims.2 {
            return shape_err(format!("slice {k} out of range for n3 = {}", self.dims.2));
        }
        Ok(FrontalSlice { parent: self, k })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn ensure_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return shape_err(format!("{:?} vs {:?}", self.dims, other.dims));
        }
        Ok(())
    }

    /// `<A, B> = sum_ijk a_ijk b_ijk`.
    pub fn inner_product(&self, other: &Self) -> Result<T> {
        self.ensure_same_dims(other)?;
        Ok(compensated_sum(
            self.data.iter().zip(&other.data).map(|(&a, &b)| a * b),
        ))
    }

    pub fn frobenius_norm_sqr(&self) -> T {
        compensated_sum(self.data.iter().map(|&v| v * v))
    }

    pub fn frobenius_norm(&self) -> T {
        self.frobenius_norm_sqr().sqrt()
    }

    /// `||self - other||_F`.
    pub fn distance(&self, other: &Self) -> Result<T> {
        self.ensure_same_dims(other)?;
        Ok(compensated_sum(self.data.iter().zip(&other.data).map(|(&a, &b)| {
            let d = a - b;
            d * d
        }))
        .sqrt())
    }

    /// `||self - reference|| / ||reference||`; the plain distance when the
    /// reference is zero.
    pub fn relative_error(&self, reference: &Self) -> Result<T> {
        let d = self.distance(reference)?;
        let r = reference.frobenius_norm();
        Ok(if r > T::zero() { d / r } else { d })
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.ensure_same_dims(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max))
    }

    pub fn scale(&self, a: T) -> Self {
        self.map(|v| v * a)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            dims: self.dims,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `self + a * (x - y)`, the inertial extrapolation kernel.
    pub fn extrapolate(&self, a: T, x: &Self, y: &Self) -> Result<Self> {
        self.ensure_same_dims(x)?;
        self.ensure_same_dims(y)?;
        let data = self
            .data
            .iter()
            .zip(x.data.iter().zip(&y.data))
            .map(|(&s, (&xv, &yv))| s + a * (xv - yv))
            .collect();
        Ok(Self { dims: self.dims, data })
    }

    /// `self + a * x`.
    pub fn axpy(&self, a: T, x: &Self) -> Result<Self> {
        self.ensure_same_dims(x)?;
        let data = self
            .data
            .iter()
            .zip(&x.data)
            .map(|(&s, &xv)| s + a * xv)
            .collect();
        Ok(Self { dims: self.dims, data })
    }

    /// `unfold(A) = [A^(1); A^(2); ...; A^(n3)]`, an `n1*n3 x n2` matrix.
    pub fn unfold(&self) -> RMatrix<T> {
        let (n1, n2, n3) = self.dims;
        RMatrix::from_fn(n1 * n3, n2, |row, j| self.get(row % n1, j, row / n1))
    }

    /// Inverse of [`Tensor3::unfold`].
    pub fn fold(m: &RMatrix<T>, dims: Dims) -> Result<Self> {
        check_dims(dims)?;
        let (n1, n2, n3) = dims;
        if m.rows() != n1 * n3 || m.cols() != n2 {
            return shape_err(format!(
                "cannot fold {}x{} into {dims:?}",
                m.rows(),
                m.cols()
            ));
        }
        Ok(Self::from_fn(dims, |i, j, k| m.get(i + n1 * k, j)))
    }

    /// Block-circulant matrix with block `(p, q) = A^((p - q) mod n3)`.
    ///
    /// Quadratic in `n3`; used only as a reference for the spectral fast path.
    pub fn bcirc(&self) -> RMatrix<T> {
        let (n1, n2, n3) = self.dims;
        RMatrix::from_fn(n1 * n3, n2 * n3, |row, col| {
            let (p, i) = (row / n1, row % n1);
            let (q, j) = (col / n2, col % n2);
            self.get(i, j, (p + n3 - q) % n3)
        })
    }

    /// The t-product `A * B`, computed slice-wise in the Fourier domain.
    pub fn t_product(&self, other: &Self) -> Result<Self> {
        let (n1, r, n3) = self.dims;
        let (r2, n2, n3b) = other.dims;
        if r != r2 || n3 != n3b {
            return shape_err(format!(
                "t-product of {:?} and {:?}",
                self.dims, other.dims
            ));
        }
        let a = spectral::dft_mode3(self);
        let b = spectral::dft_mode3(other);
        let unique = spectral::unique_slice_count(n3);
        let half: Vec<CMatrix<T>> = (0..unique)
            .map(|k| a.slice(k).matmul(b.slice(k)))
            .collect();
        let c = SpectralTensor::from_unique_slices((n1, n2, n3), half, true)?;
        spectral::idft_mode3(&c)
    }

    /// `A^*`: transpose every frontal slice and reverse the order of slices
    /// `2..n3`.
    pub fn conj_transpose(&self) -> Self {
        let (n1, n2, n3) = self.dims;
        Self::from_fn((n2, n1, n3), |i, j, k| self.get(j, i, (n3 - k) % n3))
    }

    /// Identity tensor: `I_n` as the first frontal slice, zeros elsewhere.
    pub fn identity(n: usize, n3: usize) -> Self {
        Self::from_fn((n, n, n3), |i, j, k| {
            if k == 0 && i == j {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    /// True when every frontal slice is diagonal up to `tol` in absolute value.
    pub fn is_f_diagonal(&self, tol: T) -> bool {
        let (n1, n2, n3) = self.dims;
        (0..n3).all(|k| {
            (0..n2).all(|j| (0..n1).all(|i| i == j || self.get(i, j, k).abs() <= tol))
        })
    }
}

impl<T: Scalar> Add for &Tensor3<T> {
    type Output = Tensor3<T>;

    /// # Panics
    /// On dimension mismatch.
    fn add(self, rhs: Self) -> Tensor3<T> {
        self.axpy(T::one(), rhs).expect("tensor dims")
    }
}

impl<T: Scalar> Sub for &Tensor3<T> {
    type Output = Tensor3<T>;

    /// # Panics
    /// On dimension mismatch.
    fn sub(self, rhs: Self) -> Tensor3<T> {
        self.axpy(-T::one(), rhs).expect("tensor dims")
    }
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

    #[test]
    fn inner_product_basics() {
        let ones = Tensor3::<f64>::from_elem((2, 2, 2), 1.0);
        assert_eq!(ones.inner_product(&ones).unwrap(), 8.0);
        let zero = Tensor3::<f64>::zeros((2, 2, 2));
        assert_eq!(ones.inner_product(&zero).unwrap(), 0.0);
        assert!(ones.inner_product(&Tensor3::zeros((2, 2, 3))).is_err());
    }

    #[test]
    fn inner_product_matches_flat_dot() {
        let a = rand_tensor((3, 3, 3), 1);
        let b = rand_tensor((3, 3, 3), 2);
        let flat: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum();
        assert!((a.inner_product(&b).unwrap() - flat).abs() < 1e-14);
    }

    #[test]
    fn frobenius_norm_examples() {
        let ones = Tensor3::<f64>::from_elem((2, 2, 2), 1.0);
        assert!((ones.frobenius_norm() - 8f64.sqrt()).abs() < 1e-15);
        assert_eq!(Tensor3::<f64>::zeros((3, 1, 2)).frobenius_norm(), 0.0);
    }

    #[test]
    fn storage_order_is_i_fastest() {
        let t = Tensor3::<f64>::from_fn((2, 3, 2), |i, j, k| (i + 10 * j + 100 * k) as f64);
        assert_eq!(&t.as_slice()[..4], &[0.0, 1.0, 10.0, 11.0]);
        assert_eq!(t.as_slice()[6], 100.0);
        assert_eq!(t.frontal_slice(1).unwrap().get(1, 2), 121.0);
        assert!(t.frontal_slice(2).is_err());
    }

    #[test]
    fn unfold_fold_examples() {
        let tube = Tensor3::new((1, 1, 2), vec![3.0, 5.0]).unwrap();
        let u = tube.unfold();
        assert_eq!((u.rows(), u.cols()), (2, 1));
        assert_eq!(u.as_slice(), &[3.0, 5.0]);

        let single = rand_tensor((2, 2, 1), 3);
        assert_eq!(single.unfold().as_slice(), single.as_slice());

        let a = rand_tensor((3, 2, 4), 4);
        assert_eq!(Tensor3::fold(&a.unfold(), a.dims()).unwrap(), a);

        let z = RMatrix::<f64>::zeros(6, 2);
        assert_eq!(Tensor3::fold(&z, (3, 2, 2)).unwrap(), Tensor3::zeros((3, 2, 2)));

        let stacked = RMatrix::from_fn(4, 2, |r, c| if r % 2 == c { 1.0 } else { 0.0 });
        let folded = Tensor3::fold(&stacked, (2, 2, 2)).unwrap();
        for k in 0..2 {
            assert_eq!(folded.frontal_slice(k).unwrap().to_matrix(), RMatrix::identity(2));
        }
        assert!(Tensor3::fold(&stacked, (2, 2, 3)).is_err());
    }

    #[test]
    fn bcirc_examples() {
        let a = rand_tensor((2, 3, 1), 5);
        assert_eq!(a.bcirc().as_slice(), a.as_slice());

        let tube = Tensor3::new((1, 1, 2), vec![1.0, 2.0]).unwrap();
        assert_eq!(tube.bcirc().as_slice(), &[1.0, 2.0, 2.0, 1.0]);

        let (a_, b_, c_) = (1.0, 2.0, 3.0);
        let tube = Tensor3::new((1, 1, 3), vec![a_, b_, c_]).unwrap();
        let m = tube.bcirc();
        // columns: [a b c], [c a b], [b c a]
        assert_eq!(m.as_slice(), &[a_, b_, c_, c_, a_, b_, b_, c_, a_]);
    }

    #[test]
    fn t_product_small_tubes() {
        let a = Tensor3::<f64>::new((1, 1, 2), vec![1.0, 2.0]).unwrap();
        let b = Tensor3::new((1, 1, 2), vec![3.0, 4.0]).unwrap();
        let c = a.t_product(&b).unwrap();
        assert!((c.get(0, 0, 0) - 11.0).abs() < 1e-12);
        assert!((c.get(0, 0, 1) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn t_product_identity_law() {
        let a = rand_tensor((3, 3, 4), 6);
        let i = Tensor3::identity(3, 4);
        assert!(a.t_product(&i).unwrap().max_abs_diff(&a).unwrap() < 1e-12);
        assert!(i.t_product(&a).unwrap().max_abs_diff(&a).unwrap() < 1e-12);
        assert!(a.t_product(&rand_tensor((2, 3, 4), 7)).is_err());
        assert!(a.t_product(&rand_tensor((3, 3, 5), 7)).is_err());
    }

    #[test]
    fn conj_transpose_examples() {
        let m = rand_tensor((3, 2, 1), 8);
        let t = m.conj_transpose();
        assert_eq!(t.dims(), (2, 3, 1));
        assert_eq!(t.frontal_slice(0).unwrap().to_matrix(), m.frontal_slice(0).unwrap().to_matrix().transpose());

        let a = rand_tensor((3, 2, 4), 9);
        assert_eq!(a.conj_transpose().conj_transpose(), a);
    }

    #[test]
    fn identity_is_orthogonal() {
        let i = Tensor3::<f64>::identity(3, 5);
        let ii = i.conj_transpose().t_product(&i).unwrap();
        assert!(ii.max_abs_diff(&i).unwrap() < 1e-14);
    }

    #[test]
    fn f_diagonal_detection() {
        assert!(Tensor3::<f64>::identity(3, 2).is_f_diagonal(0.0));
        assert!(!rand_tensor((2, 2, 2), 10).is_f_diagonal(1e-3));
    }

    #[test]
    fn new_rejects_bad_shapes() {
        assert!(Tensor3::<f64>::new((2, 2, 2), vec![0.0; 7]).is_err());
        assert!(Tensor3::<f64>::new((0, 2, 2), vec![]).is_err());
    }
}
