//! Observation masks, the projector onto observed entries, the squared
//! completion loss and synthetic problem generation.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::solver::Loss;
use crate::tensor::{Dims, Tensor3};

/// Which entries of a tensor are observed, in tensor storage order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObservationMask {
    dims: Dims,
    observed: Vec<bool>,
    count: usize,
}

impl ObservationMask {
    pub fn new(dims: Dims, observed: Vec<bool>) -> Result<Self> {
        let (n1, n2, n3) = dims;
        if n1 * n2 * n3 == 0 || observed.len() != n1 * n2 * n3 {
            return Err(Error::Shape(format!("{} indicators for dims {dims:?}", observed.len())));
        }
        let count = observed.iter().filter(|&&b| b).count();
        if count == 0 {
            return Err(Error::Config("mask observes no entries".into()));
        }
        Ok(Self { dims, observed, count })
    }

    pub fn full(dims: Dims) -> Result<Self> {
        Self::new(dims, vec![true; dims.0 * dims.1 * dims.2])
    }

    /// Exactly `round(sr * N)` entries drawn uniformly without replacement.
    pub fn uniform(dims: Dims, sr: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::uniform_with(dims, sr, &mut rng)
    }

    fn uniform_with(dims: Dims, sr: f64, rng: &mut ChaCha8Rng) -> Result<Self> {
        if !(sr > 0.0 && sr <= 1.0) {
            return Err(Error::Config(format!("sampling ratio must lie in (0, 1], got {sr}")));
        }
        let n = dims.0 * dims.1 * dims.2;
        let take = ((sr * n as f64).round() as usize).clamp(1, n.max(1));
        let mut observed = vec![false; n];
        for idx in sample(rng, n, take) {
            observed[idx] = true;
        }
        Self::new(dims, observed)
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn indicator(&self) -> &[bool] {
        &self.observed
    }

    #[inline]
    pub fn is_observed(&self, i: usize, j: usize, k: usize) -> bool {
        self.observed[i + self.dims.0 * (j + self.dims.1 * k)]
    }

    /// `|Omega|`.
    #[inline]
    pub fn observed_count(&self) -> usize {
        self.count
    }

    pub fn sampling_ratio(&self) -> f64 {
        self.count as f64 / self.observed.len() as f64
    }
}

/// Entrywise product with the mask indicator.
pub fn project<T: Scalar>(mask: &ObservationMask, x: &Tensor3<T>) -> Result<Tensor3<T>> {
    if mask.dims() != x.dims() {
        return Err(Error::Shape(format!("mask {:?} vs tensor {:?}", mask.dims(), x.dims())));
    }
    let data = x
        .as_slice()
        .iter()
        .zip(mask.indicator())
        .map(|(&v, &keep)| if keep { v } else { T::zero() })
        .collect();
    Tensor3::new(x.dims(), data)
}

/// `f(X) = ||P(X - M)||_F^2` for a masked observation of `M`.
#[derive(Debug, Clone)]
pub struct CompletionLoss<T> {
    mask: ObservationMask,
    observed: Tensor3<T>,
}

impl<T: Scalar> CompletionLoss<T> {
    /// `data` may hold arbitrary values off the mask; they are discarded.
    pub fn new(mask: ObservationMask, data: &Tensor3<T>) -> Result<Self> {
        let observed = project(&mask, data)?;
        Ok(Self { mask, observed })
    }

    pub fn mask(&self) -> &ObservationMask {
        &self.mask
    }

    /// Observed entries with zeros elsewhere; the default starting point.
    pub fn observed(&self) -> &Tensor3<T> {
        &self.observed
    }

    fn masked_residual(&self, x: &Tensor3<T>) -> Result<Tensor3<T>> {
        x.ensure_same_dims(&self.observed)?;
        let data = x
            .as_slice()
            .iter()
            .zip(self.observed.as_slice())
            .zip(self.mask.indicator())
            .map(|((&v, &m), &keep)| if keep { v - m } else { T::zero() })
            .collect();
        Tensor3::new(x.dims(), data)
    }
}

impl<T: Scalar> Loss<T> for CompletionLoss<T> {
    fn dims(&self) -> Dims {
        self.observed.dims()
    }

    fn value(&self, x: &Tensor3<T>) -> Result<T> {
        Ok(self.masked_residual(x)?.frobenius_norm_sqr())
    }

    fn grad(&self, x: &Tensor3<T>) -> Result<Tensor3<T>> {
        Ok(self.masked_residual(x)?.scale(T::lit(2.0)))
    }

    fn lipschitz(&self) -> T {
        T::lit(2.0)
    }
}

/// A synthetic completion problem: `M = A * B` with standard normal factors
/// of inner dimension `r`, observed on a uniform mask.
#[derive(Debug, Clone)]
pub struct SynthInstance<T> {
    pub m_true: Tensor3<T>,
    pub mask: ObservationMask,
}

pub fn synth_instance<T: Scalar>(n1: usize, n2: usize, n3: usize, r: usize, sr: f64, seed: u64) -> Result<SynthInstance<T>> {
    if n1 == 0 || n2 == 0 || n3 == 0 {
        return Err(Error::Config("dimensions must be positive".into()));
    }
    if r == 0 || r > n1.min(n2) {
        return Err(Error::Config(format!("rank {r} outside [1, {}]", n1.min(n2))));
    }
    if !(sr > 0.0 && sr <= 1.0) {
        return Err(Error::Config(format!("sampling ratio must lie in (0, 1], got {sr}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = |len: usize| -> Vec<T> {
        (0..len)
            .map(|_| T::lit(StandardNormal.sample(&mut rng)))
            .collect()
    };
    let a = Tensor3::new((n1, r, n3), normal(n1 * r * n3))?;
    let b = Tensor3::new((r, n2, n3), normal(r * n2 * n3))?;
    let m_true = a.t_product(&b)?;
    let mask = ObservationMask::uniform_with((n1, n2, n3), sr, &mut rng)?;
    Ok(SynthInstance { m_true, mask })
}

/// Geometry of the unobserved region of a mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaskKind {
    Uniform { sr: f64 },
    /// Box of `h` rows by `w` columns at `(i0, j0)`, missing in every slice.
    Rectangle { i0: usize, j0: usize, h: usize, w: usize },
    /// Rows and columns whose index modulo `period` is below `thickness`
    /// are missing.
    Grid { period: usize, thickness: usize },
}

pub fn structured_mask(kind: MaskKind, dims: Dims, seed: u64) -> Result<ObservationMask> {
    let (n1, n2, _) = dims;
    match kind {
        MaskKind::Uniform { sr } => ObservationMask::uniform(dims, sr, seed),
        MaskKind::Rectangle { i0, j0, h, w } => {
            if i0 + h > n1 || j0 + w > n2 {
                return Err(Error::Config(format!("rectangle ({i0},{j0},{h},{w}) exceeds {n1}x{n2}")));
            }
            let inside = |i: usize, j: usize| (i0..i0 + h).contains(&i) && (j0..j0 + w).contains(&j);
            ObservationMask::new(dims, mask_from_fn(dims, |i, j| !inside(i, j)))
        }
        MaskKind::Grid { period, thickness } => {
            if period == 0 || thickness > period {
                return Err(Error::Config(format!("grid period {period} with thickness {thickness}")));
            }
            let line = |v: usize| v % period < thickness;
            ObservationMask::new(dims, mask_from_fn(dims, |i, j| !(line(i) || line(j))))
        }
    }
}

fn mask_from_fn(dims: Dims, observed: impl Fn(usize, usize) -> bool) -> Vec<bool> {
    let (n1, n2, n3) = dims;
    let slice: Vec<bool> = (0..n2).flat_map(|j| (0..n1).map(move |i| (i, j))).map(|(i, j)| observed(i, j)).collect();
    slice.repeat(n3)
}

impl fmt::Display for MaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Uniform { sr } => write!(f, "uniform:{sr}"),
            Self::Rectangle { i0, j0, h, w } => write!(f, "rect:{i0},{j0},{h},{w}"),
            Self::Grid { period, thickness } => write!(f, "grid:{period},{thickness}"),
        }
    }
}

/// Parses `uniform:SR | rect:I,J,H,W | grid:P,T`.
impl FromStr for MaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad mask kind '{s}'"));
        let (name, args) = s.split_once(':').ok_or_else(bad)?;
        let ints = || -> Result<Vec<usize>> {
            args.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect()
        };
        match name {
            "uniform" => Ok(Self::Uniform { sr: args.trim().parse().map_err(|_| bad())? }),
            "rect" => match ints()?[..] {
                [i0, j0, h, w] => Ok(Self::Rectangle { i0, j0, h, w }),
                _ => Err(bad()),
            },
            "grid" => match ints()?[..] {
                [period, thickness] => Ok(Self::Grid { period, thickness }),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}
