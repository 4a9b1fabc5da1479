//! Discontinuity-point identification for a piecewise one-dimensional map.
//!
//! True system `x' = f_sigma(x)`, model `y' = f_sigma_est(y~)` driven by the
//! convex mix `y~ = eps * y + (1 - eps) * x`. The estimate follows
//! `sigma_est' = sigma_est + 2 eta (x - y) p` where `p = dy/dsigma_est`
//! obeys the recurrence `p' = a p + b` with a smoothed delta at the switch.

use crate::error::{require, Error, Result};
use crate::kernels::{heaviside, seeded_rng, uniform, DeltaKernel};
use crate::report::{ConvergenceTracker, Decimator, RunOutcome, RunStatus, TraceRecord};

/// Orbits leaving `[-DIVERGENCE_LIMIT, DIVERGENCE_LIMIT]` are reported as diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// `f1(x)` when `g(x) <= sigma`, `f2(x)` otherwise; all pieces with analytic derivatives.
pub trait PiecewiseMap {
    fn f1(&self, x: f64) -> f64;
    fn df1(&self, x: f64) -> f64;
    fn f2(&self, x: f64) -> f64;
    fn df2(&self, x: f64) -> f64;
    fn g(&self, x: f64) -> f64;
    fn dg(&self, x: f64) -> f64;
}

/// `f1(x) = mu x`, `f2(x) = mu (1 - x)`, `g(x) = x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TentMap {
    pub mu: f64,
}

impl PiecewiseMap for TentMap {
    fn f1(&self, x: f64) -> f64 {
        self.mu * x
    }
    fn df1(&self, _x: f64) -> f64 {
        self.mu
    }
    fn f2(&self, x: f64) -> f64 {
        self.mu * (1.0 - x)
    }
    fn df2(&self, _x: f64) -> f64 {
        -self.mu
    }
    fn g(&self, x: f64) -> f64 {
        x
    }
    fn dg(&self, _x: f64) -> f64 {
        1.0
    }
}

#[inline]
pub fn eval_piecewise<M: PiecewiseMap + ?Sized>(map: &M, sigma: f64, x: f64) -> f64 {
    if map.g(x) <= sigma {
        map.f1(x)
    } else {
        map.f2(x)
    }
}

/// One iterate of the true system at threshold `sigma`.
pub fn step_true<M: PiecewiseMap + ?Sized>(map: &M, sigma: f64, x: f64) -> Result<f64> {
    let next = eval_piecewise(map, sigma, x);
    check(0, "x", next)?;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteGains {
    eps_couple: f64,
    eta: f64,
    kernel: DeltaKernel,
}

impl DiscreteGains {
    /// `eta = 0` is accepted and freezes the estimate.
    pub fn new(eps_couple: f64, eta: f64, kernel: DeltaKernel) -> Result<Self> {
        require(eps_couple > 0.0 && eps_couple < 1.0, "eps_couple", eps_couple, "must lie in (0, 1)")?;
        require(eta >= 0.0 && eta.is_finite(), "eta", eta, "must be non-negative")?;
        Ok(Self { eps_couple, eta, kernel })
    }

    pub fn eps_couple(&self) -> f64 {
        self.eps_couple
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn kernel(&self) -> &DeltaKernel {
        &self.kernel
    }
}

/// `eps * y + (1 - eps) * x`, evaluated as `x + eps * (y - x)` so that it
/// returns `x` bit-exactly when `y == x`.
#[inline]
pub fn coupled_input(x: f64, y: f64, gains: &DiscreteGains) -> f64 {
    x + gains.eps_couple * (y - x)
}

/// Coefficients of the sensitivity recurrence `p' = a p + b` at input `y_tilde`.
pub fn sensitivity_coefficients<M: PiecewiseMap + ?Sized>(
    map: &M,
    sigma_est: f64,
    y_tilde: f64,
    gains: &DiscreteGains,
) -> (f64, f64) {
    let u = sigma_est - map.g(y_tilde);
    let h = heaviside(u);
    let d = gains.kernel.eval(u);
    let (f1, f2) = (map.f1(y_tilde), map.f2(y_tilde));
    let a = gains.eps_couple
        * (map.df1(y_tilde) * h + map.df2(y_tilde) * (1.0 - h) + (f2 - f1) * d * map.dg(y_tilde));
    let b = (f1 - f2) * d;
    (a, b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteIdState {
    pub x: f64,
    pub y: f64,
    pub sigma_est: f64,
    pub p: f64,
    pub k: u64,
}

impl DiscreteIdState {
    /// Starts with zero sensitivity.
    pub fn new(x: f64, y: f64, sigma_est: f64) -> Self {
        Self { x, y, sigma_est, p: 0.0, k: 0 }
    }
}

/// Advances true system, model, estimate and sensitivity by one step.
///
/// Every right-hand side uses the step-`k` values. No clamping is applied.
pub fn step_identifier<M: PiecewiseMap + ?Sized>(
    state: &DiscreteIdState,
    map: &M,
    sigma_true: f64,
    gains: &DiscreteGains,
) -> Result<DiscreteIdState> {
    let s = state;
    let y_tilde = coupled_input(s.x, s.y, gains);
    let (a, b) = sensitivity_coefficients(map, s.sigma_est, y_tilde, gains);
    let h = heaviside(s.sigma_est - map.g(y_tilde));
    let y = map.f1(y_tilde) * h + map.f2(y_tilde) * (1.0 - h);
    let sigma_est = s.sigma_est + 2.0 * gains.eta * (s.x - s.y) * s.p;
    let p = a * s.p + b;
    let x = eval_piecewise(map, sigma_true, s.x);
    let k = s.k + 1;
    check(k, "x", x)?;
    check(k, "y", y)?;
    check(k, "p", p)?;
    check(k, "sigma_est", sigma_est)?;
    Ok(DiscreteIdState { x, y, sigma_est, p, k })
}

fn check(step: u64, quantity: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value.abs() <= DIVERGENCE_LIMIT {
        Ok(())
    } else {
        Err(Error::Diverged { step, quantity, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiscreteInit {
    /// `x0`, `y0` drawn uniformly from `[0, 1)`.
    Random,
    Given { x: f64, y: f64 },
}

/// A complete tent-map identification run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TentMapExperiment {
    pub map: TentMap,
    pub sigma: f64,
    pub gains: DiscreteGains,
    pub sigma0: f64,
    pub sigma_bounds: (f64, f64),
    /// Saturation bound on `|p|`.
    pub p_limit: f64,
    pub steps: u64,
    pub stride: u64,
    pub seed: u64,
    pub init: DiscreteInit,
    pub tol_param: f64,
    pub sync_tol: f64,
}

impl Default for TentMapExperiment {
    fn default() -> Self {
        Self {
            map: TentMap { mu: 1.4 },
            sigma: 0.6,
            gains: DiscreteGains::new(0.55, 1e-5, DeltaKernel::new(0.1).unwrap()).unwrap(),
            sigma0: 0.31,
            sigma_bounds: (0.0, 1.0),
            p_limit: 10.0,
            steps: 150_000,
            stride: 10,
            seed: 1,
            init: DiscreteInit::Random,
            tol_param: 0.02,
            sync_tol: 1e-2,
        }
    }
}

impl TentMapExperiment {
    pub fn validate(&self) -> Result<()> {
        require(self.map.mu.is_finite(), "mu", self.map.mu, "must be finite")?;
        require(self.sigma.is_finite(), "sigma", self.sigma, "must be finite")?;
        let (lo, hi) = self.sigma_bounds;
        require(lo < hi, "sigma_min", lo, "must be below sigma_max")?;
        require(self.sigma0 >= lo && self.sigma0 <= hi, "sigma0", self.sigma0, "outside the clamp interval")?;
        require(self.p_limit > 0.0, "p_limit", self.p_limit, "must be positive")?;
        require(self.steps > 0, "steps", 0.0, "must be positive")?;
        require(self.stride > 0, "stride", 0.0, "must be positive")?;
        require(self.tol_param > 0.0, "tol_param", self.tol_param, "must be positive")?;
        require(self.sync_tol > 0.0, "sync_tol", self.sync_tol, "must be positive")
    }
}

fn record(s: &DiscreteIdState, sigma: f64) -> TraceRecord {
    TraceRecord {
        time: s.k as f64,
        observed_true: s.x,
        observed_model: s.y,
        sync_error: (s.x - s.y).abs(),
        estimate: s.sigma_est,
        true_param: sigma,
        sensitivity: s.p,
    }
}

/// Runs the identifier for `cfg.steps` steps, emitting every `cfg.stride`-th
/// state (starting with step 0) to `sink`.
pub fn run_discrete_experiment<F>(cfg: &TentMapExperiment, mut sink: F) -> Result<RunOutcome>
where
    F: FnMut(&TraceRecord),
{
    cfg.validate()?;
    let (x0, y0) = match cfg.init {
        DiscreteInit::Random => {
            let mut rng = seeded_rng(cfg.seed);
            (uniform(&mut rng, 0.0, 1.0), uniform(&mut rng, 0.0, 1.0))
        }
        DiscreteInit::Given { x, y } => (x, y),
    };
    let mut state = DiscreteIdState::new(x0, y0, cfg.sigma0);
    let mut tracker = ConvergenceTracker::new(0.0, cfg.steps as f64, cfg.tol_param, cfg.sync_tol);
    let decimator = Decimator::new(cfg.stride);
    let (lo, hi) = cfg.sigma_bounds;
    let mut clamps = 0u64;

    loop {
        tracker.record(state.k as f64, state.sigma_est - cfg.sigma, (state.x - state.y).abs());
        if decimator.emits(state.k) {
            sink(&record(&state, cfg.sigma));
        }
        if state.k == cfg.steps {
            break;
        }
        match step_identifier(&state, &cfg.map, cfg.sigma, &cfg.gains) {
            Ok(mut next) => {
                if next.sigma_est < lo || next.sigma_est > hi {
                    next.sigma_est = next.sigma_est.clamp(lo, hi);
                    clamps += 1;
                }
                if next.p.abs() > cfg.p_limit {
                    next.p = next.p.clamp(-cfg.p_limit, cfg.p_limit);
                    clamps += 1;
                }
                state = next;
            }
            Err(e) => {
                return Ok(RunOutcome { report: tracker.finish(clamps, false), status: RunStatus::Aborted(e) });
            }
        }
    }
    Ok(RunOutcome { report: tracker.finish(clamps, true), status: RunStatus::Completed })
}
