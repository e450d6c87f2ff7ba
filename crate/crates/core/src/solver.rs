//! Inertial proximal gradient loop for
//! `F(X) = lambda * sum_k rho(sum_i rho(rho(sigma_i^k(X)))) + f(X)`
//! together with its step-size rule, trace and convergence monitor.

use std::fmt;
use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::penalty::{Penalty, ScalarPenalty};
use crate::scalar::{compensated_sum, Scalar};
use crate::tensor::{Dims, Tensor3};
use crate::tsvd::{spectral_singular_values, SingularSpectrum};
use crate::wtsvt::{adaptive_weights_from_spectrum, weighted_tsvt_full, Thresholded, WeightKind, WeightScheme};

/// A smooth data-fidelity term with Lipschitz gradient.
pub trait Loss<T: Scalar>: Sync {
    fn dims(&self) -> Dims;
    fn value(&self, x: &Tensor3<T>) -> Result<T>;
    fn grad(&self, x: &Tensor3<T>) -> Result<Tensor3<T>>;
    /// Lipschitz constant of [`Loss::grad`].
    fn lipschitz(&self) -> T;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuMode<T> {
    /// Smallest step parameter allowed by the inertia bounds.
    Auto,
    Fixed(T),
}

/// Iteration-dependent inertia `t -> (theta1_t, theta2_t)`.
pub type ThetaSchedule<T> = Arc<dyn Fn(usize) -> (T, T) + Send + Sync>;

#[derive(Clone)]
pub struct SolverConfig<T> {
    pub lambda: T,
    pub theta1: T,
    pub theta2: T,
    pub epsilon: T,
    /// Lipschitz constant of the loss gradient used in the step rule.
    pub lf: T,
    pub mu_mode: MuMode<T>,
    pub max_iters: usize,
    pub tol_rel_change: T,
    /// Used only when the solver is handed the true tensor.
    pub tol_ground_truth: Option<T>,
    pub penalty: Penalty<T>,
    pub seed: u64,
    /// Optional inertia schedule; every value must stay within the bounds
    /// that `theta1`, `theta2` and the step parameter satisfy.
    pub theta_schedule: Option<ThetaSchedule<T>>,
}

impl<T: Scalar> fmt::Debug for SolverConfig<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SolverConfig")
            .field("lambda", &self.lambda)
            .field("theta1", &self.theta1)
            .field("theta2", &self.theta2)
            .field("epsilon", &self.epsilon)
            .field("lf", &self.lf)
            .field("mu_mode", &self.mu_mode)
            .field("max_iters", &self.max_iters)
            .field("tol_rel_change", &self.tol_rel_change)
            .field("tol_ground_truth", &self.tol_ground_truth)
            .field("penalty", &self.penalty)
            .field("seed", &self.seed)
            .field("theta_schedule", &self.theta_schedule.is_some())
            .finish()
    }
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            lambda: T::one(),
            theta1: T::zero(),
            theta2: T::zero(),
            epsilon: T::lit(0.01),
            lf: T::lit(2.0),
            mu_mode: MuMode::Auto,
            max_iters: 500,
            tol_rel_change: T::lit(1e-4),
            tol_ground_truth: Some(T::lit(1e-3)),
            penalty: Penalty::default_smoothed(),
            seed: 0,
            theta_schedule: None,
        }
    }
}

fn step_bound<T: Scalar>(lf: T, theta1: T, theta2: T, epsilon: T) -> T {
    let one = T::one();
    if theta1 > T::zero() {
        lf * (theta2 / theta1).max((one - theta2) / (one - theta1 - theta1 - epsilon))
    } else {
        lf * (one - theta2) / (one - epsilon)
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let (zero, one, half) = (T::zero(), T::one(), T::lit(0.5));
        if !(self.lambda > zero && self.lambda.is_finite()) {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        if !(self.epsilon > zero && self.epsilon < one) {
            return bad(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if !(self.lf > zero && self.lf.is_finite()) {
            return bad(format!("lf must be positive, got {}", self.lf));
        }
        if !(self.theta1 >= zero && self.theta1 < (one - self.epsilon) * half) {
            return bad(format!("theta1 must lie in [0, (1 - epsilon)/2), got {}", self.theta1));
        }
        if !(self.theta2 >= zero && self.theta2 <= half) {
            return bad(format!("theta2 must lie in [0, 1/2], got {}", self.theta2));
        }
        if self.theta1 == zero && self.theta2 > zero {
            return bad("theta2 > 0 requires theta1 > 0".into());
        }
        if let MuMode::Fixed(mu) = self.mu_mode {
            if !(mu > zero && mu.is_finite()) {
                return bad(format!("mu must be positive, got {mu}"));
            }
        }
        if !(self.tol_rel_change >= zero) {
            return bad("tol_rel_change must be nonnegative".into());
        }
        Ok(())
    }

    /// The step parameter `mu`.
    pub fn mu(&self) -> T {
        match self.mu_mode {
            MuMode::Auto => step_bound(self.lf, self.theta1, self.theta2, self.epsilon),
            MuMode::Fixed(mu) => mu,
        }
    }

    /// Whether `mu` satisfies the bounds that guarantee monotone decrease of H.
    pub fn conforms(&self) -> bool {
        let bound = step_bound(self.lf, self.theta1, self.theta2, self.epsilon);
        self.mu() >= bound * (T::one() - T::lit(1e-12)) && self.mu() >= self.lf
    }

    /// `delta = mu * theta1 / 2`, the weight of the step term in H.
    pub fn delta(&self) -> T {
        self.mu() * self.theta1 * T::lit(0.5)
    }

    fn thetas_at(&self, t: usize) -> Result<(T, T)> {
        let Some(schedule) = &self.theta_schedule else {
            return Ok((self.theta1, self.theta2));
        };
        let (t1, t2) = schedule(t);
        let within = t1 >= T::zero() && t1 <= self.theta1 && t2 >= T::zero() && t2 <= self.theta2;
        let admissible = !(t1 == T::zero() && t2 > T::zero())
            && (t1 == T::zero() || self.mu() >= step_bound(self.lf, t1, t2, self.epsilon) * (T::one() - T::lit(1e-12)));
        if !(within && admissible) {
            return Err(Error::Config(format!("scheduled inertia ({t1}, {t2}) at iteration {t} breaks the step bound")));
        }
        Ok((t1, t2))
    }
}

/// How the weights evolve: recomputed from each iterate, or held fixed.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightMode<T> {
    Adaptive,
    Static(WeightScheme<T>),
}

/// `X^t`, `X^{t-1}` and the weights used for the next step.
#[derive(Debug, Clone)]
pub struct IterState<T> {
    pub x_curr: Tensor3<T>,
    pub x_prev: Tensor3<T>,
    pub t: usize,
    pub weights: WeightScheme<T>,
}

impl<T: Scalar> IterState<T> {
    /// State at `t = 0` with `X^{-1} = X^0`.
    pub fn initial(x0: Tensor3<T>, weights: WeightScheme<T>) -> Self {
        Self {
            x_prev: x0.clone(),
            x_curr: x0,
            t: 0,
            weights,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    /// Objective at the iterate produced by this step.
    pub f: f64,
    /// `F(X^{t+1}) + delta * ||X^{t+1} - X^t||^2`.
    pub h: f64,
    pub step_norm: f64,
    pub rel_change: f64,
    pub loss: f64,
    pub seconds: f64,
}

/// Per-iteration records; row 0 describes the starting point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceTrace {
    pub records: Vec<TraceRecord>,
}

impl ConvergenceTrace {
    pub const CSV_HEADER: &'static str = "iter,F,H,step_norm,rel_change,loss,seconds";

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in &self.records {
            writeln!(
                out,
                "{},{:e},{:e},{:e},{:e},{:e},{:.6}",
                r.iter, r.f, r.h, r.step_norm, r.rel_change, r.loss, r.seconds
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    GroundTruth,
    RelChange,
    MaxIters,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::GroundTruth => "ground_truth",
            Self::RelChange => "rel_change",
            Self::MaxIters => "max_iters",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutput<T> {
    pub x: Tensor3<T>,
    pub trace: ConvergenceTrace,
    pub stop: StopReason,
    /// Number of proximal steps taken.
    pub iterations: usize,
    /// `||X - M|| / ||M||` when the true tensor was supplied.
    pub rel_error: Option<T>,
}

/// `sum_k rho(sum_i rho(rho(sigma_i^k)))`.
pub fn penalty_term<T: Scalar>(spectrum: &SingularSpectrum<T>, penalty: &Penalty<T>) -> Result<T> {
    let per_slice = spectrum
        .iter_slices()
        .map(|row| {
            let inner = row
                .iter()
                .map(|&s| penalty.eval(penalty.eval(s)?))
                .collect::<Result<Vec<T>>>()?;
            penalty.eval(compensated_sum(inner))
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(compensated_sum(per_slice))
}

/// `F(x) = lambda * sum_k rho(sum_i rho(rho(sigma_i^k))) + f(x)`.
pub fn objective<T: Scalar, L: Loss<T> + ?Sized>(x: &Tensor3<T>, cfg: &SolverConfig<T>, loss: &L) -> Result<T> {
    let spectrum = spectral_singular_values(x)?;
    Ok(cfg.lambda * penalty_term(&spectrum, &cfg.penalty)? + loss.value(x)?)
}

/// Objective minimized under a weight mode: the composite objective for
/// adaptive weights, `lambda * ||x||_w + f(x)` for static ones.
pub fn objective_for<T: Scalar, L: Loss<T> + ?Sized>(
    x: &Tensor3<T>,
    cfg: &SolverConfig<T>,
    mode: &WeightMode<T>,
    loss: &L,
) -> Result<T> {
    let spectrum = spectral_singular_values(x)?;
    objective_from_spectrum(&spectrum, loss.value(x)?, cfg, mode)
}

fn objective_from_spectrum<T: Scalar>(
    spectrum: &SingularSpectrum<T>,
    loss_value: T,
    cfg: &SolverConfig<T>,
    mode: &WeightMode<T>,
) -> Result<T> {
    let reg = match mode {
        WeightMode::Adaptive => penalty_term(spectrum, &cfg.penalty)?,
        WeightMode::Static(w) => w.norm_of_spectrum(spectrum)?,
    };
    Ok(cfg.lambda * reg + loss_value)
}

/// `Y = X^t + theta1 (X^t - X^{t-1})`, `Z = X^t + theta2 (X^t - X^{t-1})`.
pub fn extrapolate<T: Scalar>(state: &IterState<T>, cfg: &SolverConfig<T>) -> Result<(Tensor3<T>, Tensor3<T>)> {
    let (t1, t2) = cfg.thetas_at(state.t)?;
    Ok(extrapolate_with(&state.x_curr, &state.x_prev, t1, t2))
}

fn extrapolate_with<T: Scalar>(x: &Tensor3<T>, x_prev: &Tensor3<T>, t1: T, t2: T) -> (Tensor3<T>, Tensor3<T>) {
    let y = if t1 == T::zero() { x.clone() } else { x.extrapolate(t1, x, x_prev).expect("iterates share dims") };
    let z = if t2 == T::zero() { x.clone() } else { x.extrapolate(t2, x, x_prev).expect("iterates share dims") };
    (y, z)
}

/// Minimizer of
/// `lambda ||X||_w + <X - Y, grad f(Z)> + (mu/2) ||X - Y||^2`,
/// i.e. weighted thresholding of `Y - grad f(Z) / mu` at level `lambda / mu`.
pub fn prox_step<T: Scalar, L: Loss<T> + ?Sized>(
    y: &Tensor3<T>,
    z: &Tensor3<T>,
    cfg: &SolverConfig<T>,
    w: &WeightScheme<T>,
    loss: &L,
) -> Result<Tensor3<T>> {
    Ok(prox_step_full(y, z, cfg, w, loss)?.x)
}

fn prox_step_full<T: Scalar, L: Loss<T> + ?Sized>(
    y: &Tensor3<T>,
    z: &Tensor3<T>,
    cfg: &SolverConfig<T>,
    w: &WeightScheme<T>,
    loss: &L,
) -> Result<Thresholded<T>> {
    let mu = cfg.mu();
    let point = y.axpy(-T::one() / mu, &loss.grad(z)?)?;
    weighted_tsvt_full(&point, cfg.lambda / mu, w)
}

/// The surrogate minimized by [`prox_step`], evaluated at `x`.
pub fn surrogate_value<T: Scalar, L: Loss<T> + ?Sized>(
    x: &Tensor3<T>,
    y: &Tensor3<T>,
    z: &Tensor3<T>,
    cfg: &SolverConfig<T>,
    w: &WeightScheme<T>,
    loss: &L,
) -> Result<T> {
    let diff = x - y;
    let g = loss.grad(z)?;
    Ok(cfg.lambda * crate::wtsvt::weighted_norm(x, w)?
        + diff.inner_product(&g)?
        + cfg.mu() * T::lit(0.5) * diff.frobenius_norm_sqr())
}

/// Run the inertial proximal gradient method from `x0`.
///
/// With `ground_truth` the loop stops once the relative error drops below
/// `cfg.tol_ground_truth`; otherwise it stops on relative change. Either way
/// it stops after `cfg.max_iters` steps.
pub fn solve<T: Scalar, L: Loss<T> + ?Sized>(
    x0: Tensor3<T>,
    cfg: &SolverConfig<T>,
    mode: WeightMode<T>,
    loss: &L,
    ground_truth: Option<&Tensor3<T>>,
) -> Result<SolveOutput<T>> {
    cfg.validate()?;
    if x0.dims() != loss.dims() {
        return Err(Error::Shape(format!("initial point {:?} vs loss {:?}", x0.dims(), loss.dims())));
    }
    if let Some(m) = ground_truth {
        x0.ensure_same_dims(m)?;
    }
    if let WeightMode::Static(w) = &mode {
        if w.kind() != WeightKind::Static {
            return Err(Error::Config("static mode needs a static weight scheme".into()));
        }
    }
    let admitted = cfg.penalty.admit()?;
    let gt_norm = ground_truth.map(|m| m.frobenius_norm());
    let rel_error = |x: &Tensor3<T>| -> Option<T> {
        let m = ground_truth?;
        let d = x.distance(m).ok()?;
        let n = gt_norm?;
        Some(if n > T::zero() { d / n } else { d })
    };

    let start = Instant::now();
    let delta = cfg.delta();
    let spectrum0 = spectral_singular_values(&x0)?;
    let weights0 = match &mode {
        WeightMode::Adaptive => adaptive_weights_from_spectrum(&spectrum0, admitted)?,
        WeightMode::Static(w) => w.clone(),
    };
    let loss0 = loss.value(&x0)?;
    let f0 = objective_from_spectrum(&spectrum0, loss0, cfg, &mode)?;
    let mut trace = ConvergenceTrace::default();
    trace.records.push(TraceRecord {
        iter: 0,
        f: f0.as_f64(),
        h: f0.as_f64(),
        step_norm: 0.0,
        rel_change: 0.0,
        loss: loss0.as_f64(),
        seconds: start.elapsed().as_secs_f64(),
    });
    if !f0.is_finite() {
        return Err(Error::Divergence {
            iteration: 0,
            reason: "initial objective is not finite".into(),
            trace: Box::new(trace),
        });
    }
    let blowup = T::lit(1e6) * f0.abs().max(T::min_positive_value());

    let mut state = IterState::initial(x0, weights0);
    let mut stop = StopReason::MaxIters;
    while state.t < cfg.max_iters {
        let (y, z) = extrapolate(&state, cfg)?;
        let Thresholded { x, spectrum } = prox_step_full(&y, &z, cfg, &state.weights, loss)?;
        let step = x.distance(&state.x_curr)?;
        let rel_change = step / state.x_curr.frobenius_norm().max(T::one());
        let loss_value = loss.value(&x)?;
        let f = objective_from_spectrum(&spectrum, loss_value, cfg, &mode)?;
        let h = f + delta * step * step;
        state.t += 1;
        trace.records.push(TraceRecord {
            iter: state.t,
            f: f.as_f64(),
            h: h.as_f64(),
            step_norm: step.as_f64(),
            rel_change: rel_change.as_f64(),
            loss: loss_value.as_f64(),
            seconds: start.elapsed().as_secs_f64(),
        });
        if !f.is_finite() || f > blowup {
            let reason = if f.is_finite() {
                format!("objective {f} exceeds 1e6 times its initial value")
            } else {
                "objective is not finite".to_string()
            };
            return Err(Error::Divergence {
                iteration: state.t,
                reason,
                trace: Box::new(trace),
            });
        }
        log::trace!("iter {} F {} step {}", state.t, f, step);

        if let WeightMode::Adaptive = mode {
            // The thresholded values are the singular values of the new iterate.
            state.weights = adaptive_weights_from_spectrum(&spectrum, admitted)?;
        }
        state.x_prev = std::mem::replace(&mut state.x_curr, x);

        if ground_truth.is_some() {
            let tol = cfg.tol_ground_truth.unwrap_or(T::zero());
            if rel_error(&state.x_curr).is_some_and(|e| e < tol) {
                stop = StopReason::GroundTruth;
                break;
            }
        } else if rel_change < cfg.tol_rel_change {
            stop = StopReason::RelChange;
            break;
        }
    }
    log::debug!("stopped after {} iterations ({stop})", state.t);
    Ok(SolveOutput {
        rel_error: rel_error(&state.x_curr),
        iterations: state.t,
        x: state.x_curr,
        trace,
        stop,
    })
}

/// Findings of [`monitor_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorReport {
    /// Iterations whose H exceeded the previous value by more than the slack.
    pub h_increases: Vec<usize>,
    pub max_h_increase: f64,
    /// Iterations where the drop in H fell short of `(eps lf / 2) ||step||^2`.
    pub weak_decreases: Vec<usize>,
    /// Largest shortfall against the sufficient-decrease bound.
    pub max_decrease_shortfall: f64,
    /// Whether the last relative change is below the configured tolerance.
    pub stationary: bool,
    pub final_step: f64,
}

impl MonitorReport {
    pub fn monotone(&self) -> bool {
        self.h_increases.is_empty()
    }

    pub fn sufficient_decrease(&self) -> bool {
        self.weak_decreases.is_empty()
    }

    pub fn passed(&self) -> bool {
        self.monotone() && self.sufficient_decrease()
    }
}

/// Absolute slack of the H checks.
pub const MONITOR_SLACK: f64 = 1e-9;

/// Check a trace for monotone and sufficient decrease of H.
pub fn monitor_check<T: Scalar>(trace: &ConvergenceTrace, cfg: &SolverConfig<T>) -> MonitorReport {
    let c = (cfg.epsilon * cfg.lf).as_f64() / 2.0;
    let mut report = MonitorReport {
        h_increases: Vec::new(),
        max_h_increase: f64::NEG_INFINITY,
        weak_decreases: Vec::new(),
        max_decrease_shortfall: f64::NEG_INFINITY,
        stationary: false,
        final_step: trace.last().map_or(0.0, |r| r.step_norm),
    };
    for pair in trace.records.windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        let rise = cur.h - prev.h;
        report.max_h_increase = report.max_h_increase.max(rise);
        if !(rise <= MONITOR_SLACK) {
            report.h_increases.push(cur.iter);
        }
        let shortfall = rise + c * cur.step_norm * cur.step_norm;
        report.max_decrease_shortfall = report.max_decrease_shortfall.max(shortfall);
        if !(shortfall <= MONITOR_SLACK) {
            report.weak_decreases.push(cur.iter);
        }
    }
    report.stationary = match trace.records.len() {
        0 | 1 => true,
        _ => trace.last().is_some_and(|r| r.rel_change < cfg.tol_rel_change.as_f64()),
    };
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penalty::Penalty;
    use crate::wtsvt::{table1_preset, Preset};

    /// `||x - m||^2` on every entry.
    struct Dense(Tensor3<f64>);

    impl Loss<f64> for Dense {
        fn dims(&self) -> Dims {
            self.0.dims()
        }
        fn value(&self, x: &Tensor3<f64>) -> Result<f64> {
            Ok(x.distance(&self.0)?.powi(2))
        }
        fn grad(&self, x: &Tensor3<f64>) -> Result<Tensor3<f64>> {
            Ok((x - &self.0).scale(2.0))
        }
        fn lipschitz(&self) -> f64 {
            2.0
        }
    }

    fn cfg(theta: f64) -> SolverConfig<f64> {
        SolverConfig {
            lambda: 0.5,
            theta1: theta,
            theta2: theta,
            ..Default::default()
        }
    }

    #[test]
    fn auto_mu_rule() {
        let c = cfg(0.49);
        assert!((c.mu() - 102.0).abs() < 1e-9);
        assert!(c.conforms());
        let c = cfg(0.0);
        assert!((c.mu() - 2.0 / 0.99).abs() < 1e-12);
        let c = SolverConfig { theta1: 0.2, theta2: 0.4, ..cfg(0.0) };
        assert!((c.mu() - 2.0 * (0.6f64 / 0.59).max(2.0)).abs() < 1e-12);
        assert!(c.mu() >= c.lf);
    }

    #[test]
    fn config_validation() {
        assert!(cfg(0.49).validate().is_ok());
        assert!(cfg(0.5).validate().is_err());
        assert!(SolverConfig { theta1: 0.0, theta2: 0.3, ..cfg(0.0) }.validate().is_err());
        assert!(SolverConfig { lambda: 0.0, ..cfg(0.0) }.validate().is_err());
        assert!(SolverConfig { epsilon: 1.0, ..cfg(0.0) }.validate().is_err());
        assert!(SolverConfig { mu_mode: MuMode::Fixed(-1.0), ..cfg(0.0) }.validate().is_err());
        let loose = SolverConfig { mu_mode: MuMode::Fixed(0.2), ..cfg(0.0) };
        assert!(loose.validate().is_ok());
        assert!(!loose.conforms());
    }

    #[test]
    fn extrapolation_formulas() {
        let a = Tensor3::from_fn((2, 2, 2), |i, j, k| (i + 2 * j + 4 * k) as f64);
        let zero = Tensor3::zeros((2, 2, 2));
        let w = table1_preset(Preset::Tnn, a.dims(), None).unwrap();
        let state = IterState { x_curr: a.clone(), x_prev: zero, t: 3, weights: w.clone() };
        let c = SolverConfig { theta1: 0.49, theta2: 0.2, ..cfg(0.0) };
        let (y, z) = extrapolate(&state, &c).unwrap();
        for ((yv, zv), av) in y.as_slice().iter().zip(z.as_slice()).zip(a.as_slice()) {
            assert!((yv - 1.49 * av).abs() < 1e-14);
            assert!((zv - 1.2 * av).abs() < 1e-14);
        }
        let (y, z) = extrapolate(&state, &cfg(0.0)).unwrap();
        assert_eq!(y, a);
        assert_eq!(z, a);
        let first = IterState::initial(a.clone(), w);
        let (y, z) = extrapolate(&first, &cfg(0.49)).unwrap();
        assert_eq!((y, z), (a.clone(), a));
    }

    #[test]
    fn identity_penalty_objective_is_scaled_tnn() {
        let x = Tensor3::from_fn((3, 4, 3), |i, j, k| ((i * 7 + j * 3 + k * 5) % 11) as f64 - 5.0);
        let c = SolverConfig { penalty: Penalty::Identity, ..cfg(0.0) };
        let loss = Dense(x.clone());
        let f = objective(&x, &c, &loss).unwrap();
        let tnn = crate::tsvd::tubal_nuclear_norm(&x).unwrap();
        assert!((f - 0.5 * 3.0 * tnn).abs() < 1e-10 * f);
    }

    #[test]
    fn vanishing_lambda_is_gradient_step() {
        let m = Tensor3::from_fn((3, 3, 2), |i, j, k| (i as f64) - (j as f64) * 0.5 + k as f64);
        let y = Tensor3::from_fn((3, 3, 2), |i, j, k| ((i + j + k) % 3) as f64);
        let loss = Dense(m);
        let c = SolverConfig { lambda: 1e-15, ..cfg(0.0) };
        let w = table1_preset(Preset::Tnn, y.dims(), None).unwrap();
        let x = prox_step(&y, &y, &c, &w, &loss).unwrap();
        let expected = y.axpy(-1.0 / c.mu(), &loss.grad(&y).unwrap()).unwrap();
        assert!(x.max_abs_diff(&expected).unwrap() < 1e-10);
    }

    #[test]
    fn single_slice_step_matches_matrix_svt() {
        let m = Tensor3::new((2, 2, 1), vec![1.0, 2.0, -0.5, 3.0]).unwrap();
        let y = Tensor3::new((2, 2, 1), vec![0.3, -0.1, 0.7, 1.1]).unwrap();
        let loss = Dense(m.clone());
        let c = SolverConfig { lambda: 0.8, ..cfg(0.0) };
        let w = table1_preset(Preset::Tnn, y.dims(), None).unwrap();
        let x = prox_step(&y, &y, &c, &w, &loss).unwrap();
        let mu = c.mu();
        let g: Vec<f64> = y.as_slice().iter().zip(m.as_slice()).map(|(a, b)| a - 2.0 * (a - b) / mu).collect();
        let mat = nalgebra::DMatrix::from_column_slice(2, 2, &g);
        let svd = mat.svd(true, true);
        let s = svd.singular_values.map(|v| (v - 0.8 / mu).max(0.0));
        let expected = svd.u.unwrap() * nalgebra::DMatrix::from_diagonal(&s) * svd.v_t.unwrap();
        for (a, b) in x.as_slice().iter().zip(expected.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_csv_layout() {
        let trace = ConvergenceTrace {
            records: vec![TraceRecord { iter: 0, f: 1.5, h: 1.5, step_norm: 0.0, rel_change: 0.0, loss: 1.0, seconds: 0.25 }],
        };
        let csv = trace.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("iter,F,H,step_norm,rel_change,loss,seconds"));
        assert_eq!(lines.next().unwrap().split(',').count(), 7);
    }

    #[test]
    fn single_record_trace_passes_monitor() {
        let trace = ConvergenceTrace {
            records: vec![TraceRecord { iter: 0, f: 1.0, h: 1.0, step_norm: 0.0, rel_change: 0.0, loss: 1.0, seconds: 0.0 }],
        };
        let r = monitor_check(&trace, &cfg(0.0));
        assert!(r.passed());
        assert!(r.stationary);
    }

    #[test]
    fn theta_schedule_is_bounded() {
        let a = Tensor3::from_elem((2, 2, 1), 1.0);
        let w = table1_preset(Preset::Tnn, a.dims(), None).unwrap();
        let state = IterState::initial(a, w);
        let mut c = cfg(0.3);
        c.theta_schedule = Some(Arc::new(|t| if t == 0 { (0.1, 0.1) } else { (0.4, 0.4) }));
        assert!(extrapolate(&state, &c).is_ok());
        let later = IterState { t: 1, ..state };
        assert!(extrapolate(&later, &c).is_err());
    }
}
