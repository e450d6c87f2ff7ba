//! Double-weighted spectral penalty `sum_k sum_i alpha_k beta_i^k rho(sigma_i^k)`,
//! its weight schemes, and the weighted tensor singular value thresholding
//! operator that solves
//! `argmin_X eta * ||X||_w + ||X - Y||_F^2 / 2`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::penalty::{AdmittedPenalty, Penalty, ScalarPenalty};
use crate::scalar::{compensated_sum, Scalar};
use crate::spectral::{mirror_index, unique_slice_range};
use crate::tensor::Tensor3;
use crate::tsvd::{spectral_singular_values, spectral_svd, SingularSpectrum};

/// Relaxations from the literature expressible as fixed weight schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset<T> {
    /// Tubal nuclear norm: `alpha = 1/n3`, `beta = 1`, identity penalty.
    Tnn,
    /// Partial sum: `alpha = 1`, the `n` largest values per slice unpenalized.
    /// `None` selects `ceil(0.05 r)`.
    Pstnn { n: Option<usize> },
    /// Reweighted nuclear norm, `beta = 1 / (sigma_ref + eps)`.
    WeightedTnn { eps: T },
    /// Truncated nuclear norm on the first Fourier slice only.
    Ttnn { n: Option<usize> },
    /// Weighted Schatten-p: `rho = t^p`,
    /// `beta = c / (max(0, sigma_i^2 - sigma_r^2)^(2p) + eps)`.
    WeightedSchattenP { p: T, c: T, eps: T },
}

/// Default truncation index `ceil(0.05 r)`.
pub fn default_truncation(rank_bound: usize) -> usize {
    (0.05 * rank_bound as f64).ceil() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    Static,
    Adaptive,
}

/// Intermediate quantities of the adaptive update, kept for the convergence
/// monitor: `h_i^k = rho(sigma_i^k)` and `g_k = sum_i rho(h_i^k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveTerms<T> {
    pub h: Vec<T>,
    pub g: Vec<T>,
}

/// Per-slice weights `alpha_k`, per-value weights `beta_i^k` and the penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightScheme<T> {
    kind: WeightKind,
    n3: usize,
    rank_bound: usize,
    alpha: Vec<T>,
    beta: Vec<T>,
    penalty: AdmittedPenalty<T>,
    preset: Option<Preset<T>>,
    adaptive: Option<AdaptiveTerms<T>>,
}

impl<T: Scalar> WeightScheme<T> {
    /// Static scheme from explicit weights. `beta` is `n3` rows of length
    /// `rank_bound`, each nondecreasing; conjugate-pair slices must carry
    /// equal weights so the thresholded tensor stays real.
    pub fn from_parts(alpha: Vec<T>, beta: Vec<Vec<T>>, penalty: AdmittedPenalty<T>) -> Result<Self> {
        let n3 = alpha.len();
        if n3 == 0 || beta.len() != n3 {
            return Err(Error::Shape(format!("{} alpha vs {} beta rows", n3, beta.len())));
        }
        let rank_bound = beta[0].len();
        if beta.iter().any(|row| row.len() != rank_bound) {
            return Err(Error::Shape("ragged beta".into()));
        }
        if alpha.iter().any(|&a| !(a >= T::zero() && a.is_finite())) || alpha.iter().all(|&a| a == T::zero()) {
            return Err(Error::Config("alpha must be nonnegative with a positive entry".into()));
        }
        for (k, row) in beta.iter().enumerate() {
            if row.iter().any(|&b| !(b >= T::zero() && b.is_finite())) {
                return Err(Error::Config(format!("beta in slice {k} must be finite and nonnegative")));
            }
            if row.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::Config(format!("beta in slice {k} is not nondecreasing")));
            }
            let m = mirror_index(k, n3);
            if alpha[k] != alpha[m] || beta[k] != beta[m] {
                return Err(Error::Config(format!("slices {k} and {m} are a conjugate pair but carry different weights")));
            }
        }
        Ok(Self {
            kind: WeightKind::Static,
            n3,
            rank_bound,
            alpha,
            beta: beta.into_iter().flatten().collect(),
            penalty,
            preset: None,
            adaptive: None,
        })
    }

    #[inline]
    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    #[inline]
    pub fn n3(&self) -> usize {
        self.n3
    }

    #[inline]
    pub fn rank_bound(&self) -> usize {
        self.rank_bound
    }

    #[inline]
    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    #[inline]
    pub fn beta(&self, k: usize) -> &[T] {
        &self.beta[k * self.rank_bound..(k + 1) * self.rank_bound]
    }

    pub fn penalty(&self) -> &AdmittedPenalty<T> {
        &self.penalty
    }

    pub fn preset(&self) -> Option<&Preset<T>> {
        self.preset.as_ref()
    }

    pub fn adaptive_terms(&self) -> Option<&AdaptiveTerms<T>> {
        self.adaptive.as_ref()
    }

    fn check_compatible(&self, dims: (usize, usize, usize)) -> Result<()> {
        let r = dims.0.min(dims.1);
        if dims.2 != self.n3 || r != self.rank_bound {
            return Err(Error::Shape(format!(
                "weights sized for n3 = {}, r = {} applied to {dims:?}",
                self.n3, self.rank_bound
            )));
        }
        Ok(())
    }

    /// `sum_k sum_i alpha_k beta_i^k rho(sigma_i^k)` for a given spectrum.
    pub fn norm_of_spectrum(&self, spectrum: &SingularSpectrum<T>) -> Result<T> {
        if spectrum.n3() != self.n3 || spectrum.rank_bound() != self.rank_bound {
            return Err(Error::Shape("spectrum does not match weight scheme".into()));
        }
        let mut terms = Vec::with_capacity(self.n3 * self.rank_bound);
        for k in 0..self.n3 {
            let a = self.alpha[k];
            for (&b, &s) in self.beta(k).iter().zip(spectrum.slice(k)) {
                if a * b != T::zero() {
                    terms.push(a * b * self.penalty.eval(s)?);
                }
            }
        }
        Ok(compensated_sum(terms))
    }
}

fn validate_truncation(n: Option<usize>, r: usize) -> Result<usize> {
    let n = n.unwrap_or_else(|| default_truncation(r));
    if n > r {
        return Err(Error::Config(format!("truncation {n} exceeds rank bound {r}")));
    }
    Ok(n)
}

fn positive<T: Scalar>(v: T, what: &str) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} must be positive, got {v}")))
    }
}

/// Build the static scheme of a preset for tensors of shape `dims`.
/// `reference` supplies the singular values that the reweighted presets
/// (`WeightedTnn`, `WeightedSchattenP`) freeze into `beta`.
pub fn table1_preset<T: Scalar>(
    preset: Preset<T>,
    dims: (usize, usize, usize),
    reference: Option<&SingularSpectrum<T>>,
) -> Result<WeightScheme<T>> {
    let (n1, n2, n3) = dims;
    let r = n1.min(n2);
    let inv_n3 = T::one() / T::from_usize_lossy(n3);
    let reference = || -> Result<&SingularSpectrum<T>> {
        let s = reference.ok_or_else(|| Error::Config("preset needs a reference spectrum".into()))?;
        if s.n3() != n3 || s.rank_bound() != r {
            return Err(Error::Shape("reference spectrum does not match dims".into()));
        }
        Ok(s)
    };
    let truncated = |n: usize| -> Vec<T> { (0..r).map(|i| if i < n { T::zero() } else { T::one() }).collect() };
    let identity = Penalty::Identity.admit()?;

    let (alpha, beta, penalty) = match preset {
        Preset::Tnn => (vec![inv_n3; n3], vec![vec![T::one(); r]; n3], identity),
        Preset::Pstnn { n } => {
            let n = validate_truncation(n, r)?;
            (vec![T::one(); n3], vec![truncated(n); n3], identity)
        }
        Preset::WeightedTnn { eps } => {
            positive(eps, "eps")?;
            let s = reference()?;
            let beta = s
                .iter_slices()
                .map(|row| row.iter().map(|&v| T::one() / (v + eps)).collect())
                .collect();
            (vec![inv_n3; n3], beta, identity)
        }
        Preset::Ttnn { n } => {
            let n = validate_truncation(n, r)?;
            let alpha = (0..n3).map(|k| if k == 0 { T::one() } else { T::zero() }).collect();
            (alpha, vec![truncated(n); n3], identity)
        }
        Preset::WeightedSchattenP { p, c, eps } => {
            positive(c, "c")?;
            positive(eps, "eps")?;
            let penalty = Penalty::power(p)?.admit()?;
            let s = reference()?;
            let two_p = p + p;
            let beta = s
                .iter_slices()
                .map(|row| {
                    let tail = row.last().copied().unwrap_or(T::zero());
                    row.iter()
                        .map(|&v| {
                            let gap = (v * v - tail * tail).max(T::zero());
                            c / (gap.powf(two_p) + eps)
                        })
                        .collect()
                })
                .collect();
            (vec![inv_n3; n3], beta, penalty)
        }
    };
    let mut scheme = WeightScheme::from_parts(alpha, beta, penalty)?;
    scheme.preset = Some(preset);
    Ok(scheme)
}

/// Supergradient weights at `x`:
/// `alpha_k = rho'(sum_i rho(rho(sigma_i^k)))`, `beta_i^k = rho'(rho(sigma_i^k))`.
pub fn adaptive_weights<T: Scalar>(x: &Tensor3<T>, penalty: AdmittedPenalty<T>) -> Result<WeightScheme<T>> {
    adaptive_weights_from_spectrum(&spectral_singular_values(x)?, penalty)
}

pub fn adaptive_weights_from_spectrum<T: Scalar>(
    spectrum: &SingularSpectrum<T>,
    penalty: AdmittedPenalty<T>,
) -> Result<WeightScheme<T>> {
    if !penalty.penalty().has_finite_grad() {
        return Err(Error::Config(format!(
            "adaptive weights need a penalty with finite derivative at 0, got {}",
            penalty.penalty()
        )));
    }
    let (n3, r) = (spectrum.n3(), spectrum.rank_bound());
    let mut alpha = Vec::with_capacity(n3);
    let mut beta = Vec::with_capacity(n3 * r);
    let mut h_all = Vec::with_capacity(n3 * r);
    let mut g_all = Vec::with_capacity(n3);
    for row in spectrum.iter_slices() {
        let h: Vec<T> = row.iter().map(|&s| penalty.eval(s)).collect::<Result<_>>()?;
        let g = compensated_sum(h.iter().map(|&v| penalty.eval(v)).collect::<Result<Vec<_>>>()?);
        alpha.push(penalty.grad(g)?);
        let mut floor = T::zero();
        for &hv in &h {
            // rho' is nonincreasing and h is nonincreasing along the slice, so
            // beta is nondecreasing; the running max only absorbs roundoff.
            let b = penalty.grad(hv)?.max(floor);
            floor = b;
            beta.push(b);
        }
        h_all.extend(h);
        g_all.push(g);
    }
    Ok(WeightScheme {
        kind: WeightKind::Adaptive,
        n3,
        rank_bound: r,
        alpha,
        beta,
        penalty,
        preset: None,
        adaptive: Some(AdaptiveTerms { h: h_all, g: g_all }),
    })
}

/// `||X||_w = sum_k sum_i alpha_k beta_i^k rho(sigma_i^k(X))`.
pub fn weighted_norm<T: Scalar>(x: &Tensor3<T>, w: &WeightScheme<T>) -> Result<T> {
    w.check_compatible(x.dims())?;
    w.norm_of_spectrum(&spectral_singular_values(x)?)
}

/// Result of [`weighted_tsvt_full`]: the minimizer and its singular spectrum.
#[derive(Debug, Clone)]
pub struct Thresholded<T> {
    pub x: Tensor3<T>,
    pub spectrum: SingularSpectrum<T>,
}

/// `argmin_X eta * ||X||_w + ||X - Y||_F^2 / 2`.
pub fn weighted_tsvt<T: Scalar>(y: &Tensor3<T>, eta: T, w: &WeightScheme<T>) -> Result<Tensor3<T>> {
    Ok(weighted_tsvt_full(y, eta, w)?.x)
}

/// [`weighted_tsvt`] that also returns the singular values of the output.
///
/// Because `||X||_F^2 = ||Xbar||_F^2 / n3`, the problem separates into one
/// scalar prox per Fourier-domain singular value with coefficient
/// `n3 * eta * alpha_k * beta_i^k`.
pub fn weighted_tsvt_full<T: Scalar>(y: &Tensor3<T>, eta: T, w: &WeightScheme<T>) -> Result<Thresholded<T>> {
    if !(eta > T::zero() && eta.is_finite()) {
        return Err(Error::Config(format!("eta must be positive, got {eta}")));
    }
    w.check_compatible(y.dims())?;
    let n3 = y.dims().2;
    let scale = T::from_usize_lossy(n3) * eta;
    let svd = spectral_svd(y)?;
    let shrunk = unique_slice_range(n3)
        .into_par_iter()
        .map(|k| {
            let sigma = &svd.slice(k).s;
            let a = w.alpha[k];
            let mut out = sigma
                .iter()
                .zip(w.beta(k))
                .map(|(&s, &b)| w.penalty.prox(scale * a * b, s))
                .collect::<Result<Vec<T>>>()?;
            let inversion = out
                .windows(2)
                .map(|p| p[1] - p[0])
                .fold(T::zero(), T::max);
            debug_assert!(
                inversion.as_f64() <= 1e-9 * out.first().map_or(1.0, |v| v.as_f64().max(1.0)),
                "thresholded values out of order by {inversion}"
            );
            out.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let x = svd.rebuild(&shrunk)?;
    Ok(Thresholded {
        x,
        spectrum: SingularSpectrum::from_unique(n3, shrunk),
    })
}

/// What the solver regularizes with: adaptive TNNR weights or a fixed preset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularizer<T> {
    Tnnr,
    Preset(Preset<T>),
}

impl<T: Scalar> fmt::Display for Preset<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Tnn => write!(f, "tnn"),
            Self::Pstnn { n: None } => write!(f, "pstnn"),
            Self::Pstnn { n: Some(n) } => write!(f, "pstnn:{n}"),
            Self::WeightedTnn { eps } => write!(f, "wtnn:{eps}"),
            Self::Ttnn { n: None } => write!(f, "ttnn"),
            Self::Ttnn { n: Some(n) } => write!(f, "ttnn:{n}"),
            Self::WeightedSchattenP { p, c, eps } => write!(f, "wsp:{p},{c},{eps}"),
        }
    }
}

impl<T: Scalar> fmt::Display for Regularizer<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Tnnr => write!(f, "tnnr"),
            Self::Preset(p) => p.fmt(f),
        }
    }
}

/// Parses `tnnr | tnn | pstnn[:N] | ttnn[:N] | wtnn:EPS | wsp:P,C,EPS`.
impl<T: Scalar> FromStr for Regularizer<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown preset '{s}'"));
        let num = |v: &str| -> Result<T> { v.trim().parse::<f64>().map(T::lit).map_err(|_| bad()) };
        let count = |v: &str| -> Result<usize> { v.trim().parse::<usize>().map_err(|_| bad()) };
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let preset = match (name, args) {
            ("tnnr", None) => return Ok(Self::Tnnr),
            ("tnn", None) => Preset::Tnn,
            ("pstnn", a) => Preset::Pstnn { n: a.map(count).transpose()? },
            ("ttnn", a) => Preset::Ttnn { n: a.map(count).transpose()? },
            ("wtnn", Some(a)) => Preset::WeightedTnn { eps: num(a)? },
            ("wsp", Some(a)) => {
                let parts: Vec<&str> = a.split(',').collect();
                if parts.len() != 3 {
                    return Err(bad());
                }
                Preset::WeightedSchattenP {
                    p: num(parts[0])?,
                    c: num(parts[1])?,
                    eps: num(parts[2])?,
                }
            }
            _ => return Err(bad()),
        };
        Ok(Self::Preset(preset))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tsvd::tubal_nuclear_norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_tensor(dims: (usize, usize, usize), seed: u64) -> Tensor3<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..dims.0 * dims.1 * dims.2)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        Tensor3::new(dims, data).unwrap()
    }

    fn smooth() -> AdmittedPenalty<f64> {
        Penalty::default_smoothed().admit().unwrap()
    }

    #[test]
    fn tnn_preset_is_tubal_nuclear_norm() {
        let x = rand_tensor((4, 3, 5), 1);
        let w = table1_preset(Preset::Tnn, x.dims(), None).unwrap();
        let a = weighted_norm(&x, &w).unwrap();
        let b = tubal_nuclear_norm(&x).unwrap();
        assert!((a - b).abs() < 1e-12 * b.max(1.0));
    }

    #[test]
    fn zero_tensor_has_zero_norm() {
        let x = Tensor3::<f64>::zeros((3, 3, 2));
        let w = table1_preset(Preset::Tnn, x.dims(), None).unwrap();
        assert_eq!(weighted_norm(&x, &w).unwrap(), 0.0);
    }

    #[test]
    fn full_truncation_pstnn_is_zero() {
        let x = rand_tensor((4, 3, 3), 2);
        let w = table1_preset(Preset::Pstnn { n: Some(3) }, x.dims(), None).unwrap();
        assert_eq!(weighted_norm(&x, &w).unwrap(), 0.0);
    }

    #[test]
    fn pstnn_without_truncation_is_scaled_tnn() {
        let x = rand_tensor((3, 4, 4), 3);
        let w = table1_preset(Preset::Pstnn { n: Some(0) }, x.dims(), None).unwrap();
        let tnn = tubal_nuclear_norm(&x).unwrap();
        assert!((weighted_norm(&x, &w).unwrap() - 4.0 * tnn).abs() < 1e-10);
    }

    #[test]
    fn ttnn_single_slice_is_truncated_nuclear_norm() {
        let x = rand_tensor((5, 4, 1), 4);
        let w = table1_preset(Preset::Ttnn { n: Some(2) }, x.dims(), None).unwrap();
        let s = spectral_singular_values(&x).unwrap();
        let expected: f64 = s.slice(0)[2..].iter().sum();
        assert!((weighted_norm(&x, &w).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn preset_parameter_validation() {
        let dims = (3, 3, 2);
        assert!(table1_preset(Preset::<f64>::Pstnn { n: Some(4) }, dims, None).is_err());
        assert!(table1_preset(Preset::<f64>::WeightedTnn { eps: 0.1 }, dims, None).is_err());
        let s = SingularSpectrum::zeros(2, 3);
        assert!(table1_preset(Preset::WeightedTnn { eps: -1.0 }, dims, Some(&s)).is_err());
        assert!(table1_preset(Preset::WeightedSchattenP { p: 1.5, c: 1.0, eps: 0.1 }, dims, Some(&s)).is_err());
        assert!(table1_preset(Preset::WeightedSchattenP { p: 0.5, c: 0.0, eps: 0.1 }, dims, Some(&s)).is_err());
        let w = table1_preset(Preset::WeightedSchattenP { p: 0.5, c: 1.0, eps: 0.1 }, dims, Some(&s)).unwrap();
        assert_eq!(w.beta(0), &[10.0, 10.0, 10.0]);
    }

    #[test]
    fn reweighted_presets_have_ordered_beta() {
        let x = rand_tensor((5, 4, 3), 5);
        let s = spectral_singular_values(&x).unwrap();
        for p in [Preset::WeightedTnn { eps: 1e-3 }, Preset::WeightedSchattenP { p: 0.5, c: 1.0, eps: 1e-3 }] {
            let w = table1_preset(p, x.dims(), Some(&s)).unwrap();
            for k in 0..3 {
                assert!(w.beta(k).windows(2).all(|b| b[0] <= b[1]));
            }
        }
    }

    #[test]
    fn default_truncation_rounds_up() {
        assert_eq!(default_truncation(1), 1);
        assert_eq!(default_truncation(20), 1);
        assert_eq!(default_truncation(21), 2);
        assert_eq!(default_truncation(0), 0);
    }

    #[test]
    fn adaptive_identity_weights_are_one() {
        let x = rand_tensor((3, 4, 3), 6);
        let w = adaptive_weights(&x, Penalty::Identity.admit().unwrap()).unwrap();
        assert!(w.alpha().iter().all(|&a| a == 1.0));
        for k in 0..3 {
            assert!(w.beta(k).iter().all(|&b| b == 1.0));
        }
    }

    #[test]
    fn adaptive_weights_of_zero_tensor() {
        let x = Tensor3::<f64>::zeros((3, 3, 4));
        let w = adaptive_weights(&x, smooth()).unwrap();
        let expected = (2.0 / 3.0) * 1e-6f64.powf(-1.0 / 3.0);
        for k in 0..4 {
            for &b in w.beta(k) {
                assert!((b - expected).abs() < 1e-9 * expected);
            }
        }
        let terms = w.adaptive_terms().unwrap();
        assert!(terms.g.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn adaptive_rejects_raw_power() {
        let x = rand_tensor((2, 2, 2), 7);
        let p = Penalty::power(2.0 / 3.0).unwrap().admit().unwrap();
        assert!(matches!(adaptive_weights(&x, p), Err(Error::Config(_))));
    }

    #[test]
    fn tsvt_matches_matrix_svt_for_single_slice() {
        let y = rand_tensor((4, 3, 1), 8);
        let w = table1_preset(Preset::Tnn, y.dims(), None).unwrap();
        let eta = 0.3;
        let x = weighted_tsvt(&y, eta, &w).unwrap();
        // independent matrix SVT through nalgebra
        let m = nalgebra::DMatrix::from_column_slice(4, 3, y.as_slice());
        let svd = m.svd(true, true);
        let s = svd.singular_values.map(|v| (v - eta).max(0.0));
        let expected = svd.u.unwrap() * nalgebra::DMatrix::from_diagonal(&s) * svd.v_t.unwrap();
        for (a, b) in x.as_slice().iter().zip(expected.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn tsvt_diag_example() {
        let y = Tensor3::new((2, 2, 1), vec![3.0, 0.0, 0.0, 1.0]).unwrap();
        let w = table1_preset(Preset::Tnn, y.dims(), None).unwrap();
        let x = weighted_tsvt(&y, 1.0, &w).unwrap();
        let expected = [2.0f64, 0.0, 0.0, 0.0];
        for (a, b) in x.as_slice().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn tsvt_vanishing_eta_is_identity() {
        let y = rand_tensor((4, 3, 5), 9);
        for w in [
            table1_preset(Preset::Tnn, y.dims(), None).unwrap(),
            adaptive_weights(&y, smooth()).unwrap(),
        ] {
            let x = weighted_tsvt(&y, 1e-15, &w).unwrap();
            assert!(x.max_abs_diff(&y).unwrap() < 1e-10);
        }
        let w = table1_preset(Preset::Tnn, y.dims(), None).unwrap();
        assert!(weighted_tsvt(&y, 0.0, &w).is_err());
        assert!(weighted_tsvt(&rand_tensor((4, 3, 4), 1), 1.0, &w).is_err());
    }

    #[test]
    fn tsvt_output_spectrum_matches_recomputation() {
        let y = rand_tensor((5, 4, 6), 10);
        let w = adaptive_weights(&y, smooth()).unwrap();
        let out = weighted_tsvt_full(&y, 0.05, &w).unwrap();
        let again = spectral_singular_values(&out.x).unwrap();
        for k in 0..6 {
            for (a, b) in out.spectrum.slice(k).iter().zip(again.slice(k)) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn regularizer_grammar() {
        let cases = ["tnnr", "tnn", "pstnn:3", "ttnn:2", "pstnn", "wtnn:0.001", "wsp:0.5,1,0.01"];
        for c in cases {
            let r: Regularizer<f64> = c.parse().unwrap();
            assert_eq!(r.to_string(), c);
        }
        for c in ["", "tnn:1", "wsp:1,2", "pstnn:x", "wtnn", "foo"] {
            assert!(c.parse::<Regularizer<f64>>().is_err(), "{c}");
        }
    }

    #[test]
    fn conjugate_pairs_must_share_weights() {
        let pen = Penalty::Identity.admit().unwrap();
        let beta = vec![vec![1.0, 1.0]; 3];
        assert!(WeightScheme::from_parts(vec![1.0, 2.0, 1.0], beta.clone(), pen).is_err());
        assert!(WeightScheme::from_parts(vec![1.0, 2.0, 2.0], beta.clone(), pen).is_ok());
        assert!(WeightScheme::from_parts(vec![0.0, 0.0, 0.0], beta, pen).is_err());
        assert!(WeightScheme::from_parts(vec![1.0], vec![vec![2.0, 1.0]], pen).is_err());
    }
}
