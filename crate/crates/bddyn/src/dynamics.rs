//! Trajectory integration, attractor classification, the growth-rate sweep
//! and convergence experiments.
//!
//! The integrator is an embedded Dormand-Prince 5(4) pair with PI step
//! control and cubic-Hermite dense output streamed onto an evenly spaced
//! sample grid. The system is smooth and non-stiff at the scales studied
//! here, so tight tolerances keep classification integrator-independent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria;
use crate::error::{Error, Result};
use crate::linalg::{vec_norm, vec_sub};
use crate::model::{rhs_raw, Params, State};
use crate::scalar::Real;
use crate::stability::{boundedness_bounds, char_poly};
use crate::model::jacobian;

pub const DEFAULT_REL_TOL: f64 = 1e-8;
pub const DEFAULT_ABS_TOL: f64 = 1e-10;
pub const DEFAULT_T_END: f64 = 3000.0;
pub const DEFAULT_TRANSIENT_FRACTION: f64 = 0.5;
pub const DEFAULT_EXTINCTION_THRESHOLD: f64 = 1e-6;
pub const DEFAULT_N_SAMPLES: usize = 4000;
/// Steady/Periodic split: amplitude below this fraction of the reference
/// magnitude counts as steady.
pub const DEFAULT_AMPLITUDE_REL_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub t_end: T,
    /// Step ceiling; `None` leaves the controller free.
    pub max_step: Option<T>,
    /// Fraction of `[0, t_end]` discarded before attractor analysis.
    pub transient_fraction: T,
    /// Population level below which a species counts as extinct.
    pub extinction_threshold: T,
    /// Number of evenly spaced dense-output samples (>= 2000 for analysis).
    pub n_samples: usize,
    /// Relative amplitude separating Steady from Periodic.
    pub amplitude_rel_threshold: T,
    /// Any component beyond this level classifies as Diverged;
    /// `None` restricts divergence to non-finite states.
    pub divergence_threshold: Option<T>,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: T::lit(DEFAULT_REL_TOL),
            abs_tol: T::lit(DEFAULT_ABS_TOL),
            t_end: T::lit(DEFAULT_T_END),
            max_step: None,
            transient_fraction: T::lit(DEFAULT_TRANSIENT_FRACTION),
            extinction_threshold: T::lit(DEFAULT_EXTINCTION_THRESHOLD),
            n_samples: DEFAULT_N_SAMPLES,
            amplitude_rel_threshold: T::lit(DEFAULT_AMPLITUDE_REL_THRESHOLD),
            divergence_threshold: None,
        }
    }
}

impl<T: Real> IntegratorConfig<T> {
    /// Default configuration with the divergence level set to ten times the
    /// population ultimate bound for these parameters.
    pub fn for_params(p: &Params<T>) -> Self {
        let mut cfg = Self::default();
        if let Ok(b) = boundedness_bounds(p, None, None) {
            cfg.divergence_threshold = Some(T::lit(10.0) * b.ultimate_bound);
        }
        cfg
    }

    pub fn with_t_end(mut self, t_end: T, n_samples: usize) -> Self {
        self.t_end = t_end;
        self.n_samples = n_samples;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok_tol = |v: T| v > T::zero() && v < T::one();
        if !ok_tol(self.rel_tol) {
            return Err(Error::Usage(format!(
                "rel_tol must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if !ok_tol(self.abs_tol) {
            return Err(Error::Usage(format!(
                "abs_tol must lie in (0, 1), got {}",
                self.abs_tol
            )));
        }
        if !(self.t_end > T::zero()) || !self.t_end.is_finite() {
            return Err(Error::Usage(format!(
                "t_end must be positive and finite, got {}",
                self.t_end
            )));
        }
        if self.transient_fraction < T::zero() || self.transient_fraction >= T::one() {
            return Err(Error::Usage(format!(
                "transient_fraction must lie in [0, 1), got {}",
                self.transient_fraction
            )));
        }
        if !(self.extinction_threshold > T::zero()) {
            return Err(Error::Usage(format!(
                "extinction_threshold must be positive, got {}",
                self.extinction_threshold
            )));
        }
        if let Some(h) = self.max_step {
            if !(h > T::zero()) {
                return Err(Error::Usage(format!("max_step must be positive, got {h}")));
            }
        }
        if self.n_samples < 2 {
            return Err(Error::Usage(format!(
                "n_samples must be at least 2, got {}",
                self.n_samples
            )));
        }
        Ok(())
    }
}

/// Dense-output samples of one integration plus step statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    /// Strictly increasing sample times.
    pub times: Vec<T>,
    pub states: Vec<State<T>>,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
}

impl<T: Real> Trajectory<T> {
    /// Wrap externally produced samples (used by classifier tests).
    pub fn from_samples(times: Vec<T>, states: Vec<State<T>>) -> Self {
        assert_eq!(times.len(), states.len());
        Trajectory {
            times,
            states,
            accepted_steps: 0,
            rejected_steps: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> Option<&State<T>> {
        self.states.last()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureKind {
    /// Bad arguments; no integration was attempted.
    InvalidInput,
    /// The controller drove the step below the representable floor.
    StepSizeUnderflow,
    /// The state left the finite range.
    NonFiniteState,
    /// Step budget exhausted without reaching `t_end`.
    StepLimitExceeded,
}

/// Integration failure carrying whatever part of the trajectory exists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegrationFailure<T> {
    pub kind: FailureKind,
    pub message: String,
    pub t_reached: T,
    pub partial: Trajectory<T>,
}

impl<T: Real> std::fmt::Display for IntegrationFailure<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "integration failed ({:?}) at t = {}: {}",
            self.kind, self.t_reached, self.message
        )
    }
}

impl<T: Real> std::error::Error for IntegrationFailure<T> {}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// 5th-order weights minus 4th-order weights (error estimator), 7 stages.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

const MAX_STEPS: u64 = 20_000_000;

/// Integrate an autonomous 3-component field with dense output at the given
/// sample times (strictly increasing, within `[0, t_end]`).
fn dopri5<T: Real, F: Fn(&[T; 3]) -> [T; 3]>(
    f: F,
    y0: [T; 3],
    cfg: &IntegratorConfig<T>,
    sample_times: &[T],
) -> std::result::Result<Trajectory<T>, IntegrationFailure<T>> {
    let t_end = cfg.t_end;
    let mut times = Vec::with_capacity(sample_times.len());
    let mut states = Vec::with_capacity(sample_times.len());
    let mut sample_idx = 0usize;

    let mut t = T::zero();
    let mut y = y0;
    let mut dy = f(&y);

    // Emit any samples at t = 0.
    while sample_idx < sample_times.len() && sample_times[sample_idx] <= t {
        times.push(sample_times[sample_idx]);
        states.push(State::from_array(y));
        sample_idx += 1;
    }

    let fail = |kind: FailureKind,
                message: String,
                t: T,
                times: Vec<T>,
                states: Vec<State<T>>,
                acc: u64,
                rej: u64| {
        Err(IntegrationFailure {
            kind,
            message,
            t_reached: t,
            partial: Trajectory {
                times,
                states,
                accepted_steps: acc,
                rejected_steps: rej,
            },
        })
    };

    // Initial step from the scale of y and f.
    let y_scale = crate::linalg::vec_max_abs(&y) + cfg.abs_tol;
    let f_scale = crate::linalg::vec_max_abs(&dy) + cfg.abs_tol;
    let mut h = (T::lit(0.01) * y_scale / f_scale)
        .min(t_end)
        .max(T::lit(1e-8));
    if let Some(hm) = cfg.max_step {
        h = h.min(hm);
    }

    let mut acc: u64 = 0;
    let mut rej: u64 = 0;
    let mut err_old = T::lit(1e-4);
    let safety_expo = T::lit(0.17); // 1/5 - 0.75 * beta
    let beta = T::lit(0.04);

    let mut k = [[T::zero(); 3]; 7];

    while t < t_end {
        if acc + rej > MAX_STEPS {
            return fail(
                FailureKind::StepLimitExceeded,
                format!("more than {MAX_STEPS} steps"),
                t,
                times,
                states,
                acc,
                rej,
            );
        }
        let floor = T::lit(16.0) * T::epsilon() * t.abs().max(T::one());
        if h < floor {
            return fail(
                FailureKind::StepSizeUnderflow,
                format!("step {h} below floor {floor}"),
                t,
                times,
                states,
                acc,
                rej,
            );
        }
        let mut last = false;
        if t + h >= t_end {
            h = t_end - t;
            last = true;
        }

        // Stages (FSAL: k[0] is the derivative at the step start).
        k[0] = dy;
        for s in 0..6 {
            let mut ys = y;
            for (j, yj) in ys.iter_mut().enumerate() {
                let mut acc_s = T::zero();
                for (i, ki) in k.iter().enumerate().take(s + 1) {
                    let a = T::lit(A[s][i]);
                    if a != T::zero() {
                        acc_s = acc_s + a * ki[j];
                    }
                }
                *yj = *yj + h * acc_s;
            }
            k[s + 1] = f(&ys);
        }
        // 5th-order solution is stage 6's argument; recompute it directly.
        let mut y_new = y;
        for (j, yj) in y_new.iter_mut().enumerate() {
            let mut acc_s = T::zero();
            for (i, ki) in k.iter().enumerate().take(6) {
                let a = T::lit(A[5][i]);
                if a != T::zero() {
                    acc_s = acc_s + a * ki[j];
                }
            }
            *yj = *yj + h * acc_s;
        }

        // Error estimate via the embedded 4th-order weights.
        let mut err = T::zero();
        let mut finite = true;
        for j in 0..3 {
            let mut e = T::zero();
            for (i, ki) in k.iter().enumerate() {
                let w = T::lit(E[i]);
                if w != T::zero() {
                    e = e + w * ki[j];
                }
            }
            e = e * h;
            let tol = cfg.abs_tol + cfg.rel_tol * y[j].abs().max(y_new[j].abs());
            let ratio = (e / tol).abs();
            if !ratio.is_finite() || !y_new[j].is_finite() {
                finite = false;
            }
            err = err.max(ratio);
        }

        if !finite {
            // One halving retry; persistent non-finite states are divergence.
            if h > floor * T::lit(32.0) {
                h = h * T::lit(0.25);
                rej += 1;
                continue;
            }
            return fail(
                FailureKind::NonFiniteState,
                "state left the finite range".into(),
                t,
                times,
                states,
                acc,
                rej,
            );
        }

        if err <= T::one() {
            // Accept; emit dense output over (t, t + h].
            let t_new = if last { t_end } else { t + h };
            let dy_new = k[6]; // FSAL derivative at y_new
            while sample_idx < sample_times.len() && sample_times[sample_idx] <= t_new {
                let ts = sample_times[sample_idx];
                let s = ((ts - t) / h).max(T::zero()).min(T::one());
                let y_s = hermite(&y, &dy, &y_new, &dy_new, h, s);
                times.push(ts);
                states.push(State::from_array(y_s));
                sample_idx += 1;
            }
            t = t_new;
            y = y_new;
            dy = dy_new;
            acc += 1;
            err_old = err.max(T::lit(1e-4));
        } else {
            rej += 1;
        }

        // PI controller (applies after both accepted and rejected steps).
        let fac11 = err.max(T::lit(1e-16)).powf(safety_expo);
        let mut fac = fac11 / err_old.powf(beta);
        fac = (fac / T::lit(0.9)).max(T::lit(0.1)).min(T::lit(5.0));
        h = h / fac;
        if let Some(hm) = cfg.max_step {
            h = h.min(hm);
        }
    }

    // Pending samples at exactly t_end (guard against rounding).
    while sample_idx < sample_times.len() {
        times.push(sample_times[sample_idx]);
        states.push(State::from_array(y));
        sample_idx += 1;
    }

    Ok(Trajectory {
        times,
        states,
        accepted_steps: acc,
        rejected_steps: rej,
    })
}

fn hermite<T: Real>(y0: &[T; 3], f0: &[T; 3], y1: &[T; 3], f1: &[T; 3], h: T, s: T) -> [T; 3] {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = T::one() - T::lit(3.0) * s2 + T::lit(2.0) * s3;
    let h10 = s - T::lit(2.0) * s2 + s3;
    let h01 = T::lit(3.0) * s2 - T::lit(2.0) * s3;
    let h11 = s3 - s2;
    let mut out = [T::zero(); 3];
    for j in 0..3 {
        out[j] = h00 * y0[j] + h * h10 * f0[j] + h01 * y1[j] + h * h11 * f1[j];
    }
    out
}

fn uniform_samples<T: Real>(t_end: T, n: usize) -> Vec<T> {
    let nm1 = T::from_usize(n - 1).unwrap();
    (0..n)
        .map(|i| t_end * T::from_usize(i).unwrap() / nm1)
        .collect()
}

/// Integrate the model from `init` with dense output at `cfg.n_samples`
/// evenly spaced times.
pub fn integrate<T: Real>(
    p: &Params<T>,
    init: &State<T>,
    cfg: &IntegratorConfig<T>,
) -> std::result::Result<Trajectory<T>, IntegrationFailure<T>> {
    let invalid = |msg: String| IntegrationFailure {
        kind: FailureKind::InvalidInput,
        message: msg,
        t_reached: T::zero(),
        partial: Trajectory::from_samples(Vec::new(), Vec::new()),
    };
    if let Err(e) = cfg.validate() {
        return Err(invalid(e.to_string()));
    }
    if !init.is_finite() || init.x1 < T::zero() || init.x2 < T::zero() || init.x3 < T::zero() {
        return Err(invalid(format!(
            "initial state must be finite and in the closed positive octant, got {init:?}"
        )));
    }
    if let Err(e) = p.validate() {
        return Err(invalid(e.to_string()));
    }
    let samples = uniform_samples(cfg.t_end, cfg.n_samples);
    dopri5(|y| rhs_raw(p, y), init.as_array(), cfg, &samples)
}

/// Species indices (1-based) whose post-transient maximum stayed below the
/// extinction threshold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttractorClass {
    Steady,
    Periodic,
    Extinction { species: Vec<u8> },
    Diverged,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleEstimate<T> {
    /// Per-variable extremes over the post-transient window.
    pub minima: [T; 3],
    pub maxima: [T; 3],
    pub amplitude: [T; 3],
    /// Mean interval between successive refined maxima, when periodic.
    pub period: Option<T>,
    pub class: AttractorClass,
}

/// Classify the post-transient window of a trajectory.
///
/// Order of precedence: Diverged (non-finite or beyond the divergence
/// level), Extinction, Steady (every relative amplitude below threshold),
/// Periodic (at least 5 maxima whose intervals spread < 10%), else
/// Undetermined. The per-variable reference magnitude is the window mean,
/// floored by the extinction threshold.
pub fn detect_attractor<T: Real>(traj: &Trajectory<T>, cfg: &IntegratorConfig<T>) -> CycleEstimate<T> {
    let empty = CycleEstimate {
        minima: [T::zero(); 3],
        maxima: [T::zero(); 3],
        amplitude: [T::zero(); 3],
        period: None,
        class: AttractorClass::Undetermined,
    };
    if traj.len() < 4 {
        return empty;
    }
    let t_last = *traj.times.last().unwrap();
    let cutoff = t_last * cfg.transient_fraction;
    let start = traj.times.partition_point(|t| *t < cutoff);
    let window = &traj.states[start..];
    let times = &traj.times[start..];
    if window.len() < 4 {
        return empty;
    }

    let mut minima = [T::infinity(); 3];
    let mut maxima = [T::neg_infinity(); 3];
    let mut mean = [T::zero(); 3];
    let mut finite = true;
    for s in window {
        let a = s.as_array();
        for j in 0..3 {
            if !a[j].is_finite() {
                finite = false;
            }
            minima[j] = minima[j].min(a[j]);
            maxima[j] = maxima[j].max(a[j]);
            mean[j] = mean[j] + a[j];
        }
    }
    let n = T::from_usize(window.len()).unwrap();
    for m in mean.iter_mut() {
        *m = *m / n;
    }
    let amplitude = [
        maxima[0] - minima[0],
        maxima[1] - minima[1],
        maxima[2] - minima[2],
    ];

    let diverged = !finite
        || cfg
            .divergence_threshold
            .map(|lim| maxima.iter().any(|m| *m > lim))
            .unwrap_or(false);
    if diverged {
        return CycleEstimate {
            minima,
            maxima,
            amplitude,
            period: None,
            class: AttractorClass::Diverged,
        };
    }

    let extinct: Vec<u8> = (0..3)
        .filter(|&j| maxima[j] < cfg.extinction_threshold)
        .map(|j| j as u8 + 1)
        .collect();
    if !extinct.is_empty() {
        return CycleEstimate {
            minima,
            maxima,
            amplitude,
            period: None,
            class: AttractorClass::Extinction { species: extinct },
        };
    }

    let reference: Vec<T> = mean
        .iter()
        .map(|m| m.abs().max(cfg.extinction_threshold))
        .collect();
    let rel_amp: Vec<T> = (0..3).map(|j| amplitude[j] / reference[j]).collect();
    let threshold = cfg.amplitude_rel_threshold;

    if rel_amp.iter().all(|a| *a < threshold) {
        return CycleEstimate {
            minima,
            maxima,
            amplitude,
            period: None,
            class: AttractorClass::Steady,
        };
    }

    // Period from successive maxima of the variable with the largest
    // relative amplitude, peak times refined by parabolic interpolation.
    let var = (0..3)
        .max_by(|&a, &b| rel_amp[a].partial_cmp(&rel_amp[b]).unwrap())
        .unwrap();
    let series: Vec<T> = window.iter().map(|s| s.as_array()[var]).collect();
    let mut peaks: Vec<T> = Vec::new();
    for i in 1..series.len() - 1 {
        if series[i] >= series[i - 1] && series[i] > series[i + 1] {
            let denom = series[i - 1] - T::lit(2.0) * series[i] + series[i + 1];
            let dt = times[i + 1] - times[i];
            let offset = if denom.abs() > T::zero() {
                (T::lit(0.5) * (series[i - 1] - series[i + 1]) / denom).max(-T::one()).min(T::one())
            } else {
                T::zero()
            };
            peaks.push(times[i] + offset * dt);
        }
    }
    if peaks.len() < 5 {
        return CycleEstimate {
            minima,
            maxima,
            amplitude,
            period: None,
            class: AttractorClass::Undetermined,
        };
    }
    let intervals: Vec<T> = peaks.windows(2).map(|w| w[1] - w[0]).collect();
    let n_iv = T::from_usize(intervals.len()).unwrap();
    let mean_iv = intervals.iter().fold(T::zero(), |a, &b| a + b) / n_iv;
    let max_iv = intervals.iter().cloned().fold(T::neg_infinity(), T::max);
    let min_iv = intervals.iter().cloned().fold(T::infinity(), T::min);
    let spread = (max_iv - min_iv) / mean_iv;
    if spread < T::lit(0.10) {
        CycleEstimate {
            minima,
            maxima,
            amplitude,
            period: Some(mean_iv),
            class: AttractorClass::Periodic,
        }
    } else {
        CycleEstimate {
            minima,
            maxima,
            amplitude,
            period: None,
            class: AttractorClass::Undetermined,
        }
    }
}

/// One grid point of the growth-rate sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint<T> {
    pub r: T,
    /// Feasible interior equilibrium, when one exists.
    pub interior: Option<State<T>>,
    /// Sign of C2 = k1 k2 - k3 at the interior equilibrium.
    pub c2_sign: Option<i8>,
    pub cycle: Option<CycleEstimate<T>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult<T> {
    pub points: Vec<SweepPoint<T>>,
}

/// Fixed perturbation direction used by the sweep: (1,1,1)/sqrt(3) scaled
/// to 1% of |E*|.
pub fn sweep_init<T: Real>(estar: &State<T>) -> State<T> {
    let norm = vec_norm(&estar.as_array());
    let eps = T::lit(0.01) * norm / T::lit(3.0).sqrt();
    State::new(estar.x1 + eps, estar.x2 + eps, estar.x3 + eps)
}

/// Sweep the growth rate over `n_points` evenly spaced values, integrating
/// from a 1% perturbation of each interior equilibrium and classifying the
/// attractor. Grid points are independent and evaluated in parallel;
/// per-point failures are recorded in place.
pub fn sweep_r<T: Real>(
    p: &Params<T>,
    r_lo: T,
    r_hi: T,
    n_points: usize,
    cfg: &IntegratorConfig<T>,
) -> Result<SweepResult<T>> {
    if !(r_lo < r_hi) {
        return Err(Error::Usage(format!(
            "sweep requires r_lo < r_hi, got [{r_lo}, {r_hi}]"
        )));
    }
    if n_points < 2 {
        return Err(Error::Usage(format!(
            "sweep requires at least 2 points, got {n_points}"
        )));
    }
    cfg.validate()?;

    let nm1 = T::from_usize(n_points - 1).unwrap();
    let grid: Vec<T> = (0..n_points)
        .map(|i| r_lo + (r_hi - r_lo) * T::from_usize(i).unwrap() / nm1)
        .collect();

    let points: Vec<SweepPoint<T>> = grid
        .par_iter()
        .map(|&r| {
            let pr = p.with_r(r);
            let estar = match equilibria::feasible_interior(&pr) {
                Ok(e) => e,
                Err(e) => {
                    return SweepPoint {
                        r,
                        interior: None,
                        c2_sign: None,
                        cycle: None,
                        error: Some(e.to_string()),
                    }
                }
            };
            let c2_sign = jacobian(&pr, &estar.coords)
                .ok()
                .map(|j| {
                    let c2 = char_poly(&j).c2;
                    if c2 > T::zero() {
                        1i8
                    } else if c2 < T::zero() {
                        -1
                    } else {
                        0
                    }
                });
            let init = sweep_init(&estar.coords);
            match integrate(&pr, &init, cfg) {
                Ok(traj) => SweepPoint {
                    r,
                    interior: Some(estar.coords),
                    c2_sign,
                    cycle: Some(detect_attractor(&traj, cfg)),
                    error: None,
                },
                Err(f) => SweepPoint {
                    r,
                    interior: Some(estar.coords),
                    c2_sign,
                    cycle: None,
                    error: Some(f.to_string()),
                },
            }
        })
        .collect();

    Ok(SweepResult { points })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport<T> {
    pub init: State<T>,
    pub converged: bool,
    /// First sample time at which the state entered the tolerance ball.
    pub first_entry_time: Option<T>,
    /// Final distance from the target, relative to |target|.
    pub final_relative_distance: Option<T>,
    pub error: Option<String>,
}

/// Integrate each initial state and report whether it ends within
/// `tol * |target|` of the target, and when it first entered that ball.
pub fn convergence_test<T: Real>(
    p: &Params<T>,
    inits: &[State<T>],
    target: &State<T>,
    tol: T,
    cfg: &IntegratorConfig<T>,
) -> Vec<ConvergenceReport<T>> {
    let target_norm = vec_norm(&target.as_array());
    let ball = tol * target_norm;
    inits
        .par_iter()
        .map(|init| match integrate(p, init, cfg) {
            Ok(traj) => {
                let mut first_entry = None;
                for (t, s) in traj.times.iter().zip(&traj.states) {
                    let d = vec_norm(&vec_sub(&s.as_array(), &target.as_array()));
                    if d <= ball {
                        first_entry = Some(*t);
                        break;
                    }
                }
                let final_d = traj
                    .last_state()
                    .map(|s| vec_norm(&vec_sub(&s.as_array(), &target.as_array())) / target_norm);
                ConvergenceReport {
                    init: *init,
                    converged: final_d.map(|d| d <= tol).unwrap_or(false),
                    first_entry_time: first_entry,
                    final_relative_distance: final_d,
                    error: None,
                }
            }
            Err(f) => ConvergenceReport {
                init: *init,
                converged: false,
                first_entry_time: None,
                final_relative_distance: None,
                error: Some(f.to_string()),
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn base(r: f64) -> Params<f64> {
        presets::table2(r)
    }

    /// The integrator core against a closed-form solution: one decaying and
    /// one rotating pair, dy = (-y1, -w y3, w y2).
    #[test]
    fn integrator_matches_closed_form_linear_system() {
        let w = 1.3;
        let cfg = IntegratorConfig::<f64> {
            t_end: 25.0,
            n_samples: 500,
            ..Default::default()
        };
        let samples = uniform_samples(cfg.t_end, cfg.n_samples);
        let traj = dopri5(
            |y: &[f64; 3]| [-y[0], -w * y[2], w * y[1]],
            [1.0, 1.0, 0.0],
            &cfg,
            &samples,
        )
        .unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let exact = [(-t).exp(), (w * t).cos(), (w * t).sin()];
            let got = s.as_array();
            for j in 0..3 {
                assert!(
                    (got[j] - exact[j]).abs() < 2e-7,
                    "t={t}: {got:?} vs {exact:?}"
                );
            }
        }
        assert!(traj.accepted_steps > 10);
    }

    #[test]
    fn equilibrium_initial_state_stays_put() {
        // At a spectrally stable rate the fixed point is numerically inert;
        // at unstable rates float noise is amplified exponentially, so the
        // fixed-point check is only meaningful on the stable side.
        let p = base(1.6);
        let estar = equilibria::feasible_interior(&p).unwrap();
        let cfg = IntegratorConfig::for_params(&p);
        let traj = integrate(&p, &estar.coords, &cfg).unwrap();
        for s in &traj.states {
            let d = vec_norm(&vec_sub(&s.as_array(), &estar.coords.as_array()));
            assert!(d < 1e-6, "drifted {d} from the fixed point");
        }
    }

    #[test]
    fn prey_free_face_is_invariant_and_predators_starve() {
        let p = base(1.37);
        let cfg = IntegratorConfig {
            t_end: 80.0,
            n_samples: 2000,
            ..IntegratorConfig::for_params(&p)
        };
        let traj = integrate(&p, &State::new(0.0, 40.0, 30.0), &cfg).unwrap();
        for s in &traj.states {
            assert_eq!(s.x1, 0.0, "prey-free face must be exactly invariant");
        }
        let last = traj.last_state().unwrap();
        assert!(last.x2 < 1e-6 && last.x3 < 1e-6, "predators must starve");
        let est = detect_attractor(&traj, &cfg);
        assert!(matches!(est.class, AttractorClass::Extinction { .. }));
    }

    #[test]
    fn oscillation_below_critical_rate_is_periodic() {
        let p = base(1.37);
        let estar = equilibria::feasible_interior(&p).unwrap();
        let cfg = IntegratorConfig::for_params(&p);
        let traj = integrate(&p, &sweep_init(&estar.coords), &cfg).unwrap();
        let est = detect_attractor(&traj, &cfg);
        assert_eq!(est.class, AttractorClass::Periodic, "estimate {est:?}");
        let period = est.period.unwrap();
        assert!(period > 10.0 && period < 20.0, "period {period}");
        assert!(est.amplitude[0] > 1.0);
    }

    #[test]
    fn stable_rate_from_small_perturbation_is_steady() {
        let p = base(1.6);
        let estar = equilibria::feasible_interior(&p).unwrap();
        let coords = estar.coords;
        let init = State::new(
            coords.x1 * 1.005,
            coords.x2 * 1.005,
            coords.x3 * 1.005,
        );
        let cfg = IntegratorConfig::for_params(&p);
        let traj = integrate(&p, &init, &cfg).unwrap();
        let est = detect_attractor(&traj, &cfg);
        assert_eq!(est.class, AttractorClass::Steady, "estimate {est:?}");
        for j in 0..3 {
            assert!((est.maxima[j] - est.minima[j]) < 1e-2);
        }
    }

    #[test]
    fn synthetic_sinusoid_period_is_recovered_within_one_percent() {
        let true_period = 17.0;
        let w = 2.0 * std::f64::consts::PI / true_period;
        let n = 4000;
        let t_end = 3000.0;
        let times: Vec<f64> = (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect();
        let states: Vec<State<f64>> = times
            .iter()
            .map(|t| {
                State::new(
                    100.0 + 10.0 * (w * t).sin(),
                    50.0 + 5.0 * (w * t).cos(),
                    60.0 + 4.0 * (w * t + 0.3).sin(),
                )
            })
            .collect();
        let traj = Trajectory::from_samples(times, states);
        let cfg = IntegratorConfig::default();
        let est = detect_attractor(&traj, &cfg);
        assert_eq!(est.class, AttractorClass::Periodic);
        let period = est.period.unwrap();
        assert!(
            (period - true_period).abs() / true_period < 0.01,
            "period {period} vs {true_period}"
        );
    }

    #[test]
    fn constant_trajectory_is_steady_with_zero_amplitude() {
        let times: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let states = vec![State::new(10.0, 20.0, 30.0); 100];
        let traj = Trajectory::from_samples(times, states);
        let est = detect_attractor(&traj, &IntegratorConfig::default());
        assert_eq!(est.class, AttractorClass::Steady);
        assert_eq!(est.amplitude, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn prey_alone_grows_beyond_every_bound() {
        let p = base(1.37);
        let cfg = IntegratorConfig {
            t_end: 600.0,
            n_samples: 2000,
            ..IntegratorConfig::for_params(&p)
        };
        let traj = integrate(&p, &State::new(150.0, 0.0, 0.0), &cfg).unwrap();
        let est = detect_attractor(&traj, &cfg);
        assert_eq!(est.class, AttractorClass::Diverged, "estimate {est:?}");
    }

    #[test]
    fn halving_tolerances_barely_moves_the_final_state() {
        let p = base(1.47);
        let estar = equilibria::feasible_interior(&p).unwrap();
        let init = sweep_init(&estar.coords);
        let mut cfg = IntegratorConfig::for_params(&p);
        cfg.t_end = 500.0;
        cfg.n_samples = 100;
        let a = integrate(&p, &init, &cfg).unwrap();
        cfg.rel_tol /= 2.0;
        cfg.abs_tol /= 2.0;
        let b = integrate(&p, &init, &cfg).unwrap();
        let fa = a.last_state().unwrap().as_array();
        let fb = b.last_state().unwrap().as_array();
        for j in 0..3 {
            let rel = (fa[j] - fb[j]).abs() / fa[j].abs();
            assert!(rel < 10.0 * 1e-8, "component {j} moved by {rel}");
        }
    }

    #[test]
    fn positivity_of_sampled_states() {
        use rand::{Rng, SeedableRng};
        let p = base(1.47);
        let cfg = IntegratorConfig {
            t_end: 400.0,
            n_samples: 800,
            ..IntegratorConfig::for_params(&p)
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let init = State::new(
                rng.gen_range(1.0..300.0),
                rng.gen_range(1.0..150.0),
                rng.gen_range(1.0..150.0),
            );
            let traj = integrate(&p, &init, &cfg).unwrap();
            for s in &traj.states {
                for v in s.as_array() {
                    assert!(v >= -cfg.abs_tol, "negative component {v}");
                }
            }
        }
    }

    #[test]
    fn convergence_from_target_is_instant() {
        let p = base(1.6);
        let estar = equilibria::feasible_interior(&p).unwrap();
        let cfg = IntegratorConfig {
            t_end: 50.0,
            n_samples: 100,
            ..IntegratorConfig::for_params(&p)
        };
        let reports = convergence_test(&p, &[estar.coords], &estar.coords, 0.01, &cfg);
        assert!(reports[0].converged);
        assert_eq!(reports[0].first_entry_time, Some(0.0));
    }

    #[test]
    fn prey_free_start_never_converges_to_interior() {
        let p = base(1.6);
        let estar = equilibria::feasible_interior(&p).unwrap();
        let cfg = IntegratorConfig {
            t_end: 200.0,
            n_samples: 400,
            ..IntegratorConfig::for_params(&p)
        };
        let reports = convergence_test(
            &p,
            &[State::new(0.0, 50.0, 60.0)],
            &estar.coords,
            0.01,
            &cfg,
        );
        assert!(!reports[0].converged);
        assert_eq!(reports[0].first_entry_time, None);
    }

    #[test]
    fn convergence_flags_reported_below_critical_rate() {
        // The published convergence experiment at r = 1.29: the interior
        // point is weakly unstable there, so distant starts do not settle
        // onto it; the reports record whatever happens.
        let p = base(1.29);
        let estar = equilibria::feasible_interior(&p).unwrap();
        let cfg = IntegratorConfig {
            t_end: 1500.0,
            n_samples: 3000,
            ..IntegratorConfig::for_params(&p)
        };
        let inits = [
            State::new(100.0, 40.0, 50.0),
            State::new(200.0, 70.0, 80.0),
            State::new(150.0, 60.0, 50.0),
            State::new(120.0, 50.0, 70.0),
            State::new(180.0, 55.0, 65.0),
        ];
        let reports = convergence_test(&p, &inits, &estar.coords, 0.01, &cfg);
        assert_eq!(reports.len(), 5);
        for rep in &reports {
            assert!(rep.error.is_none());
            assert!(rep.final_relative_distance.is_some());
        }
    }

    #[test]
    fn sweep_with_two_points_has_two_entries() {
        let p = base(1.0);
        let cfg = IntegratorConfig {
            t_end: 50.0,
            n_samples: 100,
            ..IntegratorConfig::for_params(&p)
        };
        let sweep = sweep_r(&p, 1.0, 1.5, 2, &cfg).unwrap();
        assert_eq!(sweep.points.len(), 2);
        assert_eq!(sweep.points[0].r, 1.0);
        assert_eq!(sweep.points[1].r, 1.5);
        assert!(sweep.points.iter().all(|pt| pt.interior.is_some()));
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let p = base(1.0);
        let cfg = IntegratorConfig::default();
        assert!(sweep_r(&p, 2.0, 1.0, 10, &cfg).is_err());
        assert!(sweep_r(&p, 1.0, 2.0, 1, &cfg).is_err());
    }

    #[test]
    fn invalid_initial_state_is_reported_not_panicked() {
        let p = base(1.37);
        let cfg = IntegratorConfig::default();
        let err = integrate(&p, &State::new(-1.0, 2.0, 3.0), &cfg).unwrap_err();
        assert_eq!(err.kind, FailureKind::InvalidInput);
    }
}
