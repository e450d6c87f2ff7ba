//! Floating point scalar abstraction.
//!
//! All tensor algebra is written against [`Scalar`], which is implemented for
//! `f32` and `f64`. Dense complex SVD/QR kernels are dispatched per concrete
//! type to `nalgebra`.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::{Float, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

use crate::matrix::CMatrix;

/// Thin SVD `A = U diag(s) V^H` of one complex slice; `s` is descending.
#[derive(Debug, Clone)]
pub struct ThinSvd<T> {
    pub u: CMatrix<T>,
    pub s: Vec<T>,
    pub v: CMatrix<T>,
}

/// Real floating point type usable by the whole crate.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + FftNum + Sum + Default + Display + LowerExp + Debug + Send + Sync + 'static
{
    /// Thin SVD of a complex matrix, singular values sorted descending.
    /// `None` when the iteration does not converge.
    fn thin_svd(m: &CMatrix<Self>) -> Option<ThinSvd<Self>>;

    /// Singular values only, descending.
    fn singular_values(m: &CMatrix<Self>) -> Option<Vec<Self>>;

    /// Extend an `n x r` matrix with orthonormal columns to an `n x n`
    /// unitary matrix whose first `r` columns are the input.
    fn complete_unitary(q: &CMatrix<Self>) -> CMatrix<Self>;

    /// Lossy conversion from `f64` literals.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("representable literal")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("representable count")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn thin_svd(m: &CMatrix<$t>) -> Option<ThinSvd<$t>> {
                let (rows, cols) = (m.rows(), m.cols());
                let r = rows.min(cols);
                if r == 0 {
                    return Some(ThinSvd {
                        u: CMatrix::zeros(rows, 0),
                        s: Vec::new(),
                        v: CMatrix::zeros(cols, 0),
                    });
                }
                let dm = DMatrix::from_column_slice(rows, cols, m.as_slice());
                let svd = dm.try_svd(true, true, <$t>::EPSILON, 0)?;
                let u = svd.u?;
                let v = svd.v_t?.adjoint();
                let s: Vec<$t> = svd.singular_values.iter().copied().collect();
                let mut order: Vec<usize> = (0..r).collect();
                order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
                let mut uo = CMatrix::zeros(rows, r);
                let mut vo = CMatrix::zeros(cols, r);
                let mut so = Vec::with_capacity(r);
                for (dst, &src) in order.iter().enumerate() {
                    so.push(s[src].max(0.0));
                    for i in 0..rows {
                        uo.set(i, dst, u[(i, src)]);
                    }
                    for j in 0..cols {
                        vo.set(j, dst, v[(j, src)]);
                    }
                }
                Some(ThinSvd { u: uo, s: so, v: vo })
            }

            fn singular_values(m: &CMatrix<$t>) -> Option<Vec<$t>> {
                if m.rows().min(m.cols()) == 0 {
                    return Some(Vec::new());
                }
                let dm = DMatrix::from_column_slice(m.rows(), m.cols(), m.as_slice());
                let svd = dm.try_svd(false, false, <$t>::EPSILON, 0)?;
                let mut s: Vec<$t> = svd.singular_values.iter().map(|v| v.max(0.0)).collect();
                s.sort_by(|a, b| b.total_cmp(a));
                Some(s)
            }

            fn complete_unitary(q: &CMatrix<$t>) -> CMatrix<$t> {
                let (n, r) = (q.rows(), q.cols());
                if r >= n {
                    return q.clone();
                }
                // QR of [Q | I]: the trailing columns of the full Q factor span
                // the orthogonal complement of range(Q).
                let mut aug = DMatrix::<Complex<$t>>::zeros(n, r + n);
                for j in 0..r {
                    for i in 0..n {
                        aug[(i, j)] = q.get(i, j);
                    }
                }
                for i in 0..n {
                    aug[(i, r + i)] = Complex::new(1.0, 0.0);
                }
                let full = aug.qr().q();
                let mut out = CMatrix::zeros(n, n);
                for j in 0..n {
                    for i in 0..n {
                        let v = if j < r { q.get(i, j) } else { full[(i, j)] };
                        out.set(i, j, v);
                    }
                }
                out
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

/// Neumaier-compensated sum, used for norms that feed monotonicity checks.
pub fn compensated_sum<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut comp = T::zero();
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp = comp + ((sum - t) + v);
        } else {
            comp = comp + ((v - t) + sum);
        }
        sum = t;
    }
    sum + comp
}
