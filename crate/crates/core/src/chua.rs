//! Breakpoint identification for the Chua circuit.
//!
//! The model `y` is driven by `gamma * (x1 - y1)` on its first component. The
//! estimate follows `sigma_est' = 2 zeta (x1 - y1) q1` and `q1 = dy1/dsigma_est`
//! obeys the scalar sensitivity ODE `q1' = c q1 + d`, whose coefficients switch
//! with the side of `+-sigma_est` that `y1` is on.

use crate::error::{require, Error, Result};
use crate::kernels::{heaviside, seeded_rng, uniform, Coupling, Observation};
use crate::report::{ConvergenceTracker, Decimator, RunOutcome, RunStatus, TraceRecord};
use crate::rk4::{integrate, rk4_step};

pub const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChuaParams {
    pub alpha: f64,
    pub beta_chua: f64,
    pub m0: f64,
    pub m1: f64,
    /// True breakpoint.
    pub sigma: f64,
}

impl Default for ChuaParams {
    /// The double-scroll parameter set with `sigma = 1`.
    fn default() -> Self {
        Self { alpha: 15.6, beta_chua: 25.58, m0: -8.0 / 7.0, m1: -5.0 / 7.0, sigma: 1.0 }
    }
}

impl ChuaParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta_chua", self.beta_chua), ("m0", self.m0), ("m1", self.m1)] {
            require(v.is_finite(), name, v, "must be finite")?;
        }
        require(self.sigma > 0.0 && self.sigma.is_finite(), "sigma", self.sigma, "must be positive")
    }

    /// Odd, continuous three-segment characteristic with breakpoints at `+-sigma`.
    #[inline]
    pub fn phi(&self, sigma: f64, x: f64) -> f64 {
        if x >= sigma {
            self.m1 * x + sigma * (self.m0 - self.m1)
        } else if x <= -sigma {
            self.m1 * x - sigma * (self.m0 - self.m1)
        } else {
            self.m0 * x
        }
    }

    #[inline]
    pub fn rhs(&self, sigma: f64, s: &[f64; 3]) -> [f64; 3] {
        [
            self.alpha * (s[1] - s[0] - self.phi(sigma, s[0])),
            s[0] - s[1] + s[2],
            -self.beta_chua * s[1],
        ]
    }
}

pub fn phi(params: &ChuaParams, sigma: f64, x: f64) -> f64 {
    params.phi(sigma, x)
}

pub fn chua_rhs(params: &ChuaParams, sigma: f64, state: &[f64; 3]) -> [f64; 3] {
    params.rhs(sigma, state)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousGains {
    coupling: Coupling,
    zeta: f64,
    dt: f64,
}

impl ContinuousGains {
    /// `zeta = 0` is accepted and freezes the estimate.
    pub fn new(gamma: f64, zeta: f64, dt: f64) -> Result<Self> {
        require(zeta >= 0.0 && zeta.is_finite(), "zeta", zeta, "must be non-negative")?;
        require(dt > 0.0 && dt.is_finite(), "dt", dt, "must be positive")?;
        Ok(Self { coupling: Coupling::new(gamma, 0, 3)?, zeta, dt })
    }

    pub fn gamma(&self) -> f64 {
        self.coupling.gain()
    }
    pub fn zeta(&self) -> f64 {
        self.zeta
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
}

const H: Observation = Observation::FIRST;

/// Coupled model field `F_sigma_est(y) + Gamma (x_obs - y1)`.
pub fn model_rhs(params: &ChuaParams, sigma_est: f64, y: &[f64; 3], x_obs: f64, gains: &ContinuousGains) -> [f64; 3] {
    let mut f = params.rhs(sigma_est, y);
    gains.coupling.apply(&mut f, x_obs - H.observe(y));
    f
}

/// `c q1 + d` with
/// `c = -gamma - alpha (1 + m0 + (m1 - m0) [H(-s - y1) + H(y1 - s)])` and
/// `d = -alpha (m1 - m0) [H(-s - y1) - H(y1 - s)]`.
pub fn q1_rhs(params: &ChuaParams, sigma_est: f64, y1: f64, q1: f64, gains: &ContinuousGains) -> f64 {
    let lower = heaviside(-sigma_est - y1);
    let upper = heaviside(y1 - sigma_est);
    let dm = params.m1 - params.m0;
    let c = -gains.gamma() - params.alpha * (1.0 + params.m0 + dm * (lower + upper));
    let d = -params.alpha * dm * (lower - upper);
    c * q1 + d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousIdState {
    pub x: [f64; 3],
    pub y: [f64; 3],
    pub sigma_est: f64,
    pub q1: f64,
    pub t: f64,
}

impl ContinuousIdState {
    pub fn new(x: [f64; 3], y: [f64; 3], sigma_est: f64) -> Self {
        Self { x, y, sigma_est, q1: 0.0, t: 0.0 }
    }

    fn pack(&self) -> [f64; 8] {
        let (x, y) = (self.x, self.y);
        [x[0], x[1], x[2], y[0], y[1], y[2], self.sigma_est, self.q1]
    }
}

fn joint_rhs(params: &ChuaParams, gains: &ContinuousGains, s: &[f64; 8]) -> [f64; 8] {
    let x = [s[0], s[1], s[2]];
    let y = [s[3], s[4], s[5]];
    let (sigma_est, q1) = (s[6], s[7]);
    let fx = params.rhs(params.sigma, &x);
    let err = H.observe(&x) - H.observe(&y);
    let fy = model_rhs(params, sigma_est, &y, H.observe(&x), gains);
    let dsigma = 2.0 * gains.zeta * err * q1;
    let dq1 = q1_rhs(params, sigma_est, y[0], q1, gains);
    [fx[0], fx[1], fx[2], fy[0], fy[1], fy[2], dsigma, dq1]
}

/// One RK4 step of the joint eight-dimensional system. No clamping is applied.
///
/// `t` is advanced by `dt`; callers that need an exact grid should overwrite it.
pub fn step_continuous_identifier(
    state: &ContinuousIdState,
    params: &ChuaParams,
    gains: &ContinuousGains,
) -> Result<ContinuousIdState> {
    let (s, _) = rk4_step(&state.pack(), gains.dt, |s| joint_rhs(params, gains, s));
    let next = ContinuousIdState {
        x: [s[0], s[1], s[2]],
        y: [s[3], s[4], s[5]],
        sigma_est: s[6],
        q1: s[7],
        t: state.t + gains.dt,
    };
    for (i, v) in s.iter().enumerate() {
        if !v.is_finite() || v.abs() > DIVERGENCE_LIMIT {
            const NAMES: [&str; 8] = ["x1", "x2", "x3", "y1", "y2", "y3", "sigma_est", "q1"];
            return Err(Error::Diverged { step: 0, quantity: NAMES[i], value: *v });
        }
    }
    Ok(next)
}

/// Endpoint of an uncoupled run of length `burn_in` from a seeded random
/// point in `[-0.1, 0.1]^3`. Unbounded runs are retried with a perturbed
/// seed, at most ten attempts in total.
pub fn sample_chua_attractor(params: &ChuaParams, seed: u64, burn_in: f64, dt: f64) -> Result<[f64; 3]> {
    require(burn_in > 0.0, "burn_in", burn_in, "must be positive")?;
    require(dt > 0.0, "dt", dt, "must be positive")?;
    const ATTEMPTS: u32 = 10;
    let steps = libm::round(burn_in / dt) as usize;
    for attempt in 0..ATTEMPTS {
        let mut rng = seeded_rng(seed.wrapping_add((attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)));
        let start = [
            uniform(&mut rng, -0.1, 0.1),
            uniform(&mut rng, -0.1, 0.1),
            uniform(&mut rng, -0.1, 0.1),
        ];
        let end = integrate(start, dt, steps, |s| params.rhs(params.sigma, s));
        if end.iter().all(|v| v.is_finite() && v.abs() < 100.0) {
            return Ok(end);
        }
    }
    Err(Error::BurnInFailed { attempts: ATTEMPTS })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChuaInit {
    /// Independent attractor samples for true system and model.
    Attractor { burn_in: f64 },
    Given { x: [f64; 3], y: [f64; 3] },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChuaExperiment {
    pub params: ChuaParams,
    pub gains: ContinuousGains,
    pub sigma0: f64,
    pub sigma_bounds: (f64, f64),
    pub q1_limit: f64,
    pub t_end: f64,
    pub stride: u64,
    pub seed: u64,
    pub init: ChuaInit,
    pub tol_param: f64,
    pub sync_tol: f64,
}

impl Default for ChuaExperiment {
    fn default() -> Self {
        Self {
            params: ChuaParams::default(),
            gains: ContinuousGains::new(15.0, 1.0, 0.005).unwrap(),
            sigma0: 2.5,
            sigma_bounds: (0.05, 10.0),
            q1_limit: 1e3,
            t_end: 500.0,
            stride: 20,
            seed: 1,
            init: ChuaInit::Attractor { burn_in: 200.0 },
            tol_param: 0.05,
            sync_tol: 1e-2,
        }
    }
}

impl ChuaExperiment {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let (lo, hi) = self.sigma_bounds;
        require(lo > 0.0 && lo < hi, "sigma_min", lo, "must be positive and below sigma_max")?;
        require(self.sigma0 >= lo && self.sigma0 <= hi, "sigma0", self.sigma0, "outside the clamp interval")?;
        require(self.q1_limit > 0.0, "q1_limit", self.q1_limit, "must be positive")?;
        require(self.t_end > 0.0 && self.t_end.is_finite(), "t_end", self.t_end, "must be positive")?;
        require(self.stride > 0, "stride", 0.0, "must be positive")?;
        require(self.tol_param > 0.0, "tol_param", self.tol_param, "must be positive")?;
        require(self.sync_tol > 0.0, "sync_tol", self.sync_tol, "must be positive")?;
        if let ChuaInit::Attractor { burn_in } = self.init {
            require(burn_in > 0.0, "burn_in", burn_in, "must be positive")?;
        }
        Ok(())
    }

    pub fn steps(&self) -> u64 {
        libm::round(self.t_end / self.gains.dt) as u64
    }
}

fn record(s: &ContinuousIdState, sigma: f64) -> TraceRecord {
    TraceRecord {
        time: s.t,
        observed_true: s.x[0],
        observed_model: s.y[0],
        sync_error: (s.x[0] - s.y[0]).abs(),
        estimate: s.sigma_est,
        true_param: sigma,
        sensitivity: s.q1,
    }
}

pub fn run_chua_experiment<F>(cfg: &ChuaExperiment, mut sink: F) -> Result<RunOutcome>
where
    F: FnMut(&TraceRecord),
{
    cfg.validate()?;
    let dt = cfg.gains.dt;
    let (x0, y0) = match cfg.init {
        ChuaInit::Attractor { burn_in } => (
            sample_chua_attractor(&cfg.params, cfg.seed, burn_in, dt)?,
            sample_chua_attractor(&cfg.params, cfg.seed ^ 0x5851_F42D_4C95_7F2D, burn_in, dt)?,
        ),
        ChuaInit::Given { x, y } => (x, y),
    };
    let steps = cfg.steps();
    let mut state = ContinuousIdState::new(x0, y0, cfg.sigma0);
    let mut tracker = ConvergenceTracker::new(0.0, steps as f64 * dt, cfg.tol_param, cfg.sync_tol);
    let decimator = Decimator::new(cfg.stride);
    let (lo, hi) = cfg.sigma_bounds;
    let mut clamps = 0u64;
    let sigma = cfg.params.sigma;

    let mut k = 0u64;
    loop {
        tracker.record(state.t, state.sigma_est - sigma, (state.x[0] - state.y[0]).abs());
        if decimator.emits(k) {
            sink(&record(&state, sigma));
        }
        if k == steps {
            break;
        }
        match step_continuous_identifier(&state, &cfg.params, &cfg.gains) {
            Ok(mut next) => {
                k += 1;
                next.t = k as f64 * dt;
                if next.sigma_est < lo || next.sigma_est > hi {
                    next.sigma_est = next.sigma_est.clamp(lo, hi);
                    clamps += 1;
                }
                if next.q1.abs() > cfg.q1_limit {
                    next.q1 = next.q1.clamp(-cfg.q1_limit, cfg.q1_limit);
                    clamps += 1;
                }
                state = next;
            }
            Err(Error::Diverged { quantity, value, .. }) => {
                let e = Error::Diverged { step: k + 1, quantity, value };
                return Ok(RunOutcome { report: tracker.finish(clamps, false), status: RunStatus::Aborted(e) });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(RunOutcome { report: tracker.finish(clamps, true), status: RunStatus::Completed })
}
