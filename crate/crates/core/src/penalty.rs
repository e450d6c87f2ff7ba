//! Concave scalar penalties applied to singular values, with their
//! derivatives and the scalar proximal map
//! `argmin_{d >= 0} w * rho(d) + (d - sigma)^2 / 2`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Anything that can act as the scalar penalty of the weighted thresholding
/// operator.
pub trait ScalarPenalty<T: Scalar> {
    fn eval(&self, t: T) -> Result<T>;
    fn grad(&self, t: T) -> Result<T>;
    /// A global minimizer of `w * rho(d) + (d - sigma)^2 / 2` over `d >= 0`.
    fn prox(&self, w: T, sigma: T) -> Result<T>;
}

/// The built-in penalty family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty<T> {
    /// `rho(t) = t`.
    Identity,
    /// `rho(t) = t^p`, `0 < p <= 1`. Its derivative is unbounded at zero.
    Power { p: T },
    /// `rho(t) = (t + eps)^p - eps^p`, finite derivative everywhere.
    SmoothedPower { p: T, eps: T },
}

impl<T: Scalar> Penalty<T> {
    pub fn power(p: T) -> Result<Self> {
        check_exponent(p)?;
        Ok(Self::Power { p })
    }

    pub fn smoothed_power(p: T, eps: T) -> Result<Self> {
        check_exponent(p)?;
        if !(eps > T::zero() && eps.is_finite()) {
            return Err(Error::Config(format!("smoothing must be positive, got {eps}")));
        }
        Ok(Self::SmoothedPower { p, eps })
    }

    /// `x^(2/3)` smoothed with `eps = 1e-6`; the default production penalty.
    pub fn default_smoothed() -> Self {
        Self::SmoothedPower {
            p: T::lit(2.0 / 3.0),
            eps: T::lit(1e-6),
        }
    }

    /// Lipschitz constant of `rho'` on `[0, inf)`; infinite for raw powers
    /// with `p < 1`.
    pub fn lipschitz_grad(&self) -> T {
        match *self {
            Self::Identity => T::zero(),
            Self::Power { p } if p == T::one() => T::zero(),
            Self::Power { .. } => T::infinity(),
            Self::SmoothedPower { p, eps } => p * (T::one() - p) * eps.powf(p - T::lit(2.0)),
        }
    }

    /// True when `rho'` is finite on all of `[0, inf)`.
    pub fn has_finite_grad(&self) -> bool {
        self.lipschitz_grad().is_finite()
    }

    /// Exponent and shift for the power family (`rho(t) = (t + c)^p - c^p`).
    fn power_params(&self) -> Option<(T, T)> {
        match *self {
            Self::Identity => None,
            Self::Power { p } => Some((p, T::zero())),
            Self::SmoothedPower { p, eps } => Some((p, eps)),
        }
    }

    /// Run the monotonicity gate on the standard grid.
    pub fn admit(self) -> Result<AdmittedPenalty<T>> {
        let grid = standard_grid::<T>();
        for w in [0.1, 1.0, 10.0] {
            if !check_prox_monotone(&self, T::lit(w), &grid) {
                return Err(Error::Config(format!(
                    "penalty {self} fails the prox monotonicity check at w = {w}"
                )));
            }
        }
        Ok(AdmittedPenalty(self))
    }
}

fn check_exponent<T: Scalar>(p: T) -> Result<()> {
    if p > T::zero() && p <= T::one() {
        Ok(())
    } else {
        Err(Error::Config(format!("exponent must lie in (0, 1], got {p}")))
    }
}

fn check_arg<T: Scalar>(t: T, what: &str) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("{what} must be finite, got {t}")));
    }
    if t < T::zero() {
        return Err(Error::Domain(format!("{what} must be nonnegative, got {t}")));
    }
    Ok(())
}

impl<T: Scalar> ScalarPenalty<T> for Penalty<T> {
    fn eval(&self, t: T) -> Result<T> {
        check_arg(t, "penalty argument")?;
        Ok(match *self {
            Self::Identity => t,
            Self::Power { p } => t.powf(p),
            Self::SmoothedPower { p, eps } => (t + eps).powf(p) - eps.powf(p),
        })
    }

    fn grad(&self, t: T) -> Result<T> {
        check_arg(t, "penalty argument")?;
        Ok(match *self {
            Self::Identity => T::one(),
            Self::Power { p } if p == T::one() => T::one(),
            Self::Power { p } => {
                if t == T::zero() {
                    return Err(Error::Domain(format!(
                        "derivative of t^{p} is unbounded at 0; use the smoothed variant"
                    )));
                }
                p * t.powf(p - T::one())
            }
            Self::SmoothedPower { p, eps } => p * (t + eps).powf(p - T::one()),
        })
    }

    fn prox(&self, w: T, sigma: T) -> Result<T> {
        check_arg(w, "prox weight")?;
        check_arg(sigma, "prox argument")?;
        if w == T::zero() {
            return Ok(sigma);
        }
        if sigma == T::zero() {
            return Ok(T::zero());
        }
        match self.power_params() {
            None => Ok((sigma - w).max(T::zero())),
            Some((p, _)) if p == T::one() => Ok((sigma - w).max(T::zero())),
            Some((p, shift)) => Ok(power_prox(w, sigma, p, shift)),
        }
    }
}

/// Global minimizer of `w ((d + c)^p - c^p) + (d - sigma)^2 / 2` on `d >= 0`
/// for `0 < p < 1`.
///
/// The stationarity residual `h(d) = d - sigma + w p (d + c)^(p-1)` is convex,
/// so it has at most two roots; the larger one is the only interior local
/// minimum and lies in `[max(d_c, 0), sigma)` where `d_c` is the minimizer of
/// `h`. The result is the better of that root and `0`.
fn power_prox<T: Scalar>(w: T, sigma: T, p: T, shift: T) -> T {
    let one = T::one();
    let wp = w * p;
    let h = |d: T| d - sigma + wp * (d + shift).powf(p - one);
    let dh = |d: T| one - wp * (one - p) * (d + shift).powf(p - T::lit(2.0));
    let objective = |d: T| w * ((d + shift).powf(p) - shift.powf(p)) + (d - sigma) * (d - sigma) / T::lit(2.0);

    let inflection = (wp * (one - p)).powf(one / (T::lit(2.0) - p)) - shift;
    let lo = inflection.max(T::zero());
    if lo >= sigma {
        return T::zero();
    }
    let h_lo = if lo > T::zero() || shift > T::zero() {
        h(lo)
    } else {
        T::infinity()
    };
    if h_lo >= T::zero() {
        return T::zero();
    }

    // Bracket [a, b] with h(a) < 0 < h(b); Newton from the right end stays
    // inside the bracket for a convex increasing residual, bisection covers
    // roundoff excursions.
    let (mut a, mut b) = (lo, sigma);
    let mut d = sigma;
    let tol = T::lit(4.0) * T::epsilon();
    for _ in 0..200 {
        let hd = h(d);
        if hd == T::zero() {
            break;
        }
        if hd > T::zero() {
            b = d;
        } else {
            a = d;
        }
        let slope = dh(d);
        let mut next = if slope > T::zero() { d - hd / slope } else { T::nan() };
        if !(next > a && next < b) {
            next = (a + b) / T::lit(2.0);
        }
        let step = (next - d).abs();
        d = next;
        if step <= tol * d.max(one) || (b - a) <= tol * b.max(one) {
            break;
        }
    }
    if objective(d) < objective(T::zero()) {
        d
    } else {
        T::zero()
    }
}

/// `0, 0.01, ..., 10`.
pub fn standard_grid<T: Scalar>() -> Vec<T> {
    (0..=1000).map(|i| T::lit(i as f64 * 0.01)).collect()
}

/// True iff the prox outputs along the ascending `grid` are nondecreasing and
/// every evaluation succeeds.
pub fn check_prox_monotone<T: Scalar, P: ScalarPenalty<T> + ?Sized>(penalty: &P, w: T, grid: &[T]) -> bool {
    if grid.windows(2).any(|g| g[1] < g[0]) {
        return false;
    }
    let mut prev: Option<T> = None;
    for &sigma in grid {
        let d = match penalty.prox(w, sigma) {
            Ok(d) if d.is_finite() => d,
            _ => return false,
        };
        if let Some(q) = prev {
            let slack = T::lit(4.0) * T::epsilon() * q.abs().max(T::one());
            if d + slack < q {
                return false;
            }
        }
        prev = Some(d);
    }
    true
}

/// A penalty that passed [`Penalty::admit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmittedPenalty<T>(Penalty<T>);

impl<T: Scalar> AdmittedPenalty<T> {
    pub fn penalty(&self) -> &Penalty<T> {
        &self.0
    }
}

impl<T: Scalar> ScalarPenalty<T> for AdmittedPenalty<T> {
    fn eval(&self, t: T) -> Result<T> {
        self.0.eval(t)
    }
    fn grad(&self, t: T) -> Result<T> {
        self.0.grad(t)
    }
    fn prox(&self, w: T, sigma: T) -> Result<T> {
        self.0.prox(w, sigma)
    }
}

impl<T: Scalar> fmt::Display for Penalty<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => write!(f, "identity"),
            Self::Power { p } if (p.as_f64() - 2.0 / 3.0).abs() < 1e-12 => write!(f, "power23"),
            Self::Power { p } => write!(f, "power:{p}"),
            Self::SmoothedPower { p, eps } if (p.as_f64() - 2.0 / 3.0).abs() < 1e-12 => {
                write!(f, "smooth23:{eps:e}")
            }
            Self::SmoothedPower { p, eps } => write!(f, "smooth:{p},{eps:e}"),
        }
    }
}

/// Parses `identity`, `power23`, `power:P`, `smooth23:EPS`, `smooth:P,EPS`.
impl<T: Scalar> FromStr for Penalty<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = |v: &str| -> Result<T> {
            v.trim()
                .parse::<f64>()
                .map(T::lit)
                .map_err(|_| Error::Config(format!("bad number '{v}' in penalty '{s}'")))
        };
        let two_thirds = T::lit(2.0 / 3.0);
        match s.split_once(':') {
            None if s == "identity" => Ok(Self::Identity),
            None if s == "power23" => Self::power(two_thirds),
            Some(("power", p)) => Self::power(num(p)?),
            Some(("smooth23", eps)) => Self::smoothed_power(two_thirds, num(eps)?),
            Some(("smooth", rest)) => {
                let (p, eps) = rest
                    .split_once(',')
                    .ok_or_else(|| Error::Config(format!("expected smooth:P,EPS, got '{s}'")))?;
                Self::smoothed_power(num(p)?, num(eps)?)
            }
            _ => Err(Error::Config(format!("unknown penalty '{s}'"))),
        }
    }
}
