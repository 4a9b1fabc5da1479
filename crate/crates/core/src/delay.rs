//! Delay identification for delay differential equations.
//!
//! True system `x' = Phi(x, x(t - tau(t)))`, model
//! `y' = Phi(y, y(t - tau_est)) + Gamma (h(x) - h(y))`. The estimate follows
//! `tau_est' = 2 beta (h(x) - h(y)) Dh r` with `r = dy/dtau_est` obeying
//! `r' = (dPhi/dy - Gamma Dh) r - dPhi/dy_d * y'(t - tau_est)`.
//!
//! Delayed quantities are looked up once per step and held across the RK4
//! stages, which is accurate while every delay is much longer than `dt`.

use crate::error::{require, Error, Result};
use crate::history::HistoryBuffer;
use crate::kernels::{seeded_rng, uniform, Coupling, Observation};
use crate::report::{ConvergenceTracker, Decimator, RunOutcome, RunStatus, TraceRecord};
use crate::rk4::{rk4_step, OdeState};

pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// Right-hand side `Phi(y, y_d)` of an autonomous single-delay system with
/// its analytic Jacobians.
pub trait DelaySystem<const N: usize> {
    fn rhs(&self, y: &[f64; N], y_delayed: &[f64; N]) -> [f64; N];
    /// `dPhi/dy`
    fn jacobian_current(&self, y: &[f64; N], y_delayed: &[f64; N]) -> [[f64; N]; N];
    /// `dPhi/dy_d`
    fn jacobian_delayed(&self, y: &[f64; N], y_delayed: &[f64; N]) -> [[f64; N]; N];
}

/// `y' = -b y + a y_d / (1 + y_d^10)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MackeyGlass {
    pub a: f64,
    pub b: f64,
}

impl Default for MackeyGlass {
    fn default() -> Self {
        Self { a: 0.2, b: 0.1 }
    }
}

#[inline]
fn pow10(v: f64) -> f64 {
    let v2 = v * v;
    let v4 = v2 * v2;
    v4 * v4 * v2
}

#[inline]
pub fn mackey_glass_rhs(a: f64, b: f64, y: f64, y_d: f64) -> f64 {
    -b * y + a * y_d / (1.0 + pow10(y_d))
}

/// Derivative of `a y_d / (1 + y_d^10)` with respect to `y_d`.
#[inline]
pub fn mackey_glass_d_delayed(a: f64, y_d: f64) -> f64 {
    let p = pow10(y_d);
    a * (1.0 - 9.0 * p) / ((1.0 + p) * (1.0 + p))
}

impl DelaySystem<1> for MackeyGlass {
    fn rhs(&self, y: &[f64; 1], y_delayed: &[f64; 1]) -> [f64; 1] {
        [mackey_glass_rhs(self.a, self.b, y[0], y_delayed[0])]
    }
    fn jacobian_current(&self, _y: &[f64; 1], _y_delayed: &[f64; 1]) -> [[f64; 1]; 1] {
        [[-self.b]]
    }
    fn jacobian_delayed(&self, _y: &[f64; 1], y_delayed: &[f64; 1]) -> [[f64; 1]; 1] {
        [[mackey_glass_d_delayed(self.a, y_delayed[0])]]
    }
}

/// Delay of the true system as a function of time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauSchedule {
    Constant(f64),
    /// `base` up to `start`, then `base + amplitude * sin(2 pi frequency t)`.
    Sinusoid { base: f64, amplitude: f64, frequency: f64, start: f64 },
}

impl TauSchedule {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            TauSchedule::Constant(tau) => tau,
            TauSchedule::Sinusoid { base, .. } if t <= self.start() => base,
            TauSchedule::Sinusoid { base, amplitude, frequency, .. } => {
                base + amplitude * libm::sin(2.0 * core::f64::consts::PI * frequency * t)
            }
        }
    }

    fn start(&self) -> f64 {
        match *self {
            TauSchedule::Constant(_) => f64::INFINITY,
            TauSchedule::Sinusoid { start, .. } => start,
        }
    }

    /// Bounds of the delay over all time.
    pub fn range(&self) -> (f64, f64) {
        match *self {
            TauSchedule::Constant(tau) => (tau, tau),
            TauSchedule::Sinusoid { base, amplitude, .. } => {
                let a = amplitude.abs();
                (base - a, base + a)
            }
        }
    }
}

/// Which time derivative of the model trajectory the history stores and the
/// sensitivity equation uses for `y'(t - tau_est)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DelayedSlope {
    /// `Phi(y, y_d)` alone, without the coupling term.
    #[default]
    Intrinsic,
    /// Full model derivative including `Gamma (h(x) - h(y))`.
    Coupled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayGains {
    coupling: Coupling,
    observation: Observation,
    beta_gain: f64,
    dt: f64,
    pub tau_schedule: TauSchedule,
    pub delayed_slope: DelayedSlope,
}

impl DelayGains {
    /// Observation and coupling act on component `selector` of an `N`-vector.
    /// `beta_gain = 0` is accepted and freezes the estimate.
    pub fn new<const N: usize>(
        gamma: f64,
        beta_gain: f64,
        dt: f64,
        tau_schedule: TauSchedule,
        selector: usize,
    ) -> Result<Self> {
        require(beta_gain >= 0.0 && beta_gain.is_finite(), "beta_gain", beta_gain, "must be non-negative")?;
        require(dt > 0.0 && dt.is_finite(), "dt", dt, "must be positive")?;
        let (lo, hi) = tau_schedule.range();
        require(lo > 0.0 && hi.is_finite(), "tau", lo, "delay must stay positive and finite")?;
        Ok(Self {
            coupling: Coupling::new(gamma, selector, N)?,
            observation: Observation::new(selector, N)?,
            beta_gain,
            dt,
            tau_schedule,
            delayed_slope: DelayedSlope::default(),
        })
    }

    pub fn gamma(&self) -> f64 {
        self.coupling.gain()
    }
    pub fn beta_gain(&self) -> f64 {
        self.beta_gain
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn observation(&self) -> Observation {
        self.observation
    }
}

#[derive(Debug, Clone, Copy)]
struct Joint<const N: usize> {
    x: [f64; N],
    y: [f64; N],
    tau: f64,
    r: [f64; N],
}

impl<const N: usize> OdeState for Joint<N> {
    #[inline]
    fn add_scaled(&self, a: f64, k: &Self) -> Self {
        Joint {
            x: self.x.add_scaled(a, &k.x),
            y: self.y.add_scaled(a, &k.y),
            tau: self.tau + a * k.tau,
            r: self.r.add_scaled(a, &k.r),
        }
    }
}

/// Coupled true/model pair with their histories, the delay estimate and its
/// sensitivity.
#[derive(Debug, Clone)]
pub struct DelayIdState<const N: usize> {
    pub x: [f64; N],
    pub x_history: HistoryBuffer<N>,
    pub y: [f64; N],
    pub y_history: HistoryBuffer<N>,
    pub tau_est: f64,
    pub r: [f64; N],
    /// Current time is `step * dt`.
    pub step: i64,
}

impl<const N: usize> DelayIdState<N> {
    /// Both histories must end one step before `step`.
    pub fn new(
        (x, x_history): ([f64; N], HistoryBuffer<N>),
        (y, y_history): ([f64; N], HistoryBuffer<N>),
        tau_est: f64,
        step: i64,
    ) -> Self {
        Self { x, x_history, y, y_history, tau_est, r: [0.0; N], step }
    }

    pub fn time(&self, dt: f64) -> f64 {
        self.step as f64 * dt
    }
}

fn check<const N: usize>(step: i64, quantity: &'static str, v: &[f64; N]) -> Result<()> {
    match v.iter().find(|c| !c.is_finite() || c.abs() > DIVERGENCE_LIMIT) {
        None => Ok(()),
        Some(&value) => Err(Error::Diverged { step: step.max(0) as u64, quantity, value }),
    }
}

/// One RK4 step of the joint true/model/estimate/sensitivity system.
///
/// Appends the current samples and their derivatives to both histories and
/// advances the state. No clamping is applied.
pub fn step_delay_identifier<S: DelaySystem<N>, const N: usize>(
    state: &mut DelayIdState<N>,
    sys: &S,
    gains: &DelayGains,
) -> Result<()> {
    let dt = gains.dt;
    let t = state.time(dt);
    let tau_true = gains.tau_schedule.at(t);
    let (x_d, _) = state.x_history.lookup(t - tau_true)?;
    let (y_d, y_d_dot) = state.y_history.lookup(t - state.tau_est)?;
    let h = gains.observation;
    let sel = h.selector();

    let field = |s: &Joint<N>| {
        let fx = sys.rhs(&s.x, &x_d);
        let err = h.observe(&s.x) - h.observe(&s.y);
        let mut fy = sys.rhs(&s.y, &y_d);
        gains.coupling.apply(&mut fy, err);
        let dtau = 2.0 * gains.beta_gain * err * s.r[sel];
        let jc = sys.jacobian_current(&s.y, &y_d);
        let jd = sys.jacobian_delayed(&s.y, &y_d);
        let mut dr = [0.0; N];
        for i in 0..N {
            for j in 0..N {
                dr[i] += jc[i][j] * s.r[j] - jd[i][j] * y_d_dot[j];
            }
        }
        gains.coupling.apply(&mut dr, -s.r[sel]);
        Joint { x: fx, y: fy, tau: dtau, r: dr }
    };

    let start = Joint { x: state.x, y: state.y, tau: state.tau_est, r: state.r };
    let (next, k1) = rk4_step(&start, dt, field);
    let step = state.step + 1;
    check(step, "x", &next.x)?;
    check(step, "y", &next.y)?;
    check(step, "r", &next.r)?;
    check(step, "tau_est", &[next.tau])?;

    state.x_history.push(t, state.x, k1.x);
    let y_slope = match gains.delayed_slope {
        DelayedSlope::Coupled => k1.y,
        DelayedSlope::Intrinsic => sys.rhs(&state.y, &y_d),
    };
    state.y_history.push(t, state.y, y_slope);
    state.x = next.x;
    state.y = next.y;
    state.tau_est = next.tau;
    state.r = next.r;
    state.step = step;
    Ok(())
}

/// Integrates the uncoupled system with constant delay `tau` from a constant
/// history `start`, for `steps` steps ending at step index 0.
///
/// Returns the state at index 0 and a history ending at index -1.
pub fn burn_in<S: DelaySystem<N>, const N: usize>(
    sys: &S,
    tau: f64,
    start: [f64; N],
    dt: f64,
    span: f64,
    steps: i64,
) -> Result<([f64; N], HistoryBuffer<N>)> {
    let mut hist = HistoryBuffer::constant(span, dt, -steps - 1, start)?;
    let mut s = start;
    for i in -steps..0 {
        let t = i as f64 * dt;
        let (d, _) = hist.lookup(t - tau)?;
        let (next, k1) = rk4_step(&s, dt, |v| sys.rhs(v, &d));
        check(i + 1, "burn-in state", &next)?;
        hist.push(t, s, k1);
        s = next;
    }
    Ok((s, hist))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DelayInit<const N: usize> {
    /// Independent burn-ins from constant histories drawn uniformly in `range`.
    BurnIn { burn_in: f64, range: (f64, f64) },
    /// The model starts as an exact copy of the true system's burn-in.
    SharedBurnIn { burn_in: f64, range: (f64, f64) },
    /// Constant histories, no burn-in.
    Constant { x: [f64; N], y: [f64; N] },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayExperiment<S, const N: usize> {
    pub system: S,
    pub gains: DelayGains,
    pub tau0: f64,
    pub tau_bounds: (f64, f64),
    pub history_span: f64,
    pub t_end: f64,
    pub stride: u64,
    pub seed: u64,
    pub init: DelayInit<N>,
    pub tol_param: f64,
    pub sync_tol: f64,
}

pub type MackeyGlassExperiment = DelayExperiment<MackeyGlass, 1>;

/// Time at which the drifting phase of the two-phase schedule begins.
pub const PHASE_SWITCH: f64 = 1e4;

impl MackeyGlassExperiment {
    /// Constant delay 23 up to `PHASE_SWITCH`; with `drift` set, the delay
    /// then follows `23 + 3 sin(2 pi 1e-4 t)` up to `2 * PHASE_SWITCH`.
    pub fn two_phase(drift: bool) -> Self {
        let schedule = if drift {
            TauSchedule::Sinusoid { base: 23.0, amplitude: 3.0, frequency: 1e-4, start: PHASE_SWITCH }
        } else {
            TauSchedule::Constant(23.0)
        };
        Self {
            system: MackeyGlass::default(),
            gains: DelayGains::new::<1>(0.1, 1.0, 0.05, schedule, 0).unwrap(),
            tau0: 15.0,
            tau_bounds: (1.0, 38.0),
            history_span: 40.0,
            t_end: if drift { 2.0 * PHASE_SWITCH } else { PHASE_SWITCH },
            stride: 20,
            seed: 1,
            init: DelayInit::BurnIn { burn_in: 500.0, range: (0.5, 1.5) },
            // While the delay drifts the estimate lags by up to about one
            // time unit and the observer error stays near a few percent.
            tol_param: if drift { 1.0 } else { 0.5 },
            sync_tol: if drift { 0.1 } else { 1e-2 },
        }
    }
}

impl Default for MackeyGlassExperiment {
    fn default() -> Self {
        Self::two_phase(false)
    }
}

impl<S: DelaySystem<N>, const N: usize> DelayExperiment<S, N> {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.tau_bounds;
        let dt = self.gains.dt;
        require(lo >= dt && lo < hi, "tau_min", lo, "must be at least dt and below tau_max")?;
        require(hi + dt < self.history_span, "tau_max", hi, "must fit inside the history span")?;
        require(self.tau0 >= lo && self.tau0 <= hi, "tau0", self.tau0, "outside the clamp interval")?;
        let (tlo, thi) = self.gains.tau_schedule.range();
        require(tlo >= dt, "tau", tlo, "true delay must be at least dt")?;
        require(thi + dt < self.history_span, "tau", thi, "true delay must fit inside the history span")?;
        require(self.t_end > 0.0 && self.t_end.is_finite(), "t_end", self.t_end, "must be positive")?;
        require(self.stride > 0, "stride", 0.0, "must be positive")?;
        require(self.tol_param > 0.0, "tol_param", self.tol_param, "must be positive")?;
        require(self.sync_tol > 0.0, "sync_tol", self.sync_tol, "must be positive")?;
        match self.init {
            DelayInit::BurnIn { burn_in, range } | DelayInit::SharedBurnIn { burn_in, range } => {
                require(burn_in >= 0.0, "burn_in", burn_in, "must be non-negative")?;
                require(range.0 < range.1, "init range", range.0, "empty interval")
            }
            DelayInit::Constant { .. } => Ok(()),
        }
    }

    pub fn steps(&self) -> u64 {
        libm::round(self.t_end / self.gains.dt) as u64
    }

    /// Initial identifier state at step 0.
    pub fn initial_state(&self) -> Result<DelayIdState<N>> {
        let dt = self.gains.dt;
        let span = self.history_span;
        let tau = self.gains.tau_schedule.at(0.0);
        let draw = |seed: u64, (lo, hi): (f64, f64)| {
            let mut rng = seeded_rng(seed);
            let mut v = [0.0; N];
            for c in v.iter_mut() {
                *c = uniform(&mut rng, lo, hi);
            }
            v
        };
        let (x, y) = match self.init {
            DelayInit::BurnIn { burn_in: b, range } => {
                let n = libm::round(b / dt) as i64;
                let x = burn_in(&self.system, tau, draw(self.seed, range), dt, span, n)?;
                let y = burn_in(&self.system, tau, draw(self.seed ^ 0x5851_F42D_4C95_7F2D, range), dt, span, n)?;
                (x, y)
            }
            DelayInit::SharedBurnIn { burn_in: b, range } => {
                let n = libm::round(b / dt) as i64;
                let x = burn_in(&self.system, tau, draw(self.seed, range), dt, span, n)?;
                (x.clone(), x)
            }
            DelayInit::Constant { x, y } => (
                (x, HistoryBuffer::constant(span, dt, -1, x)?),
                (y, HistoryBuffer::constant(span, dt, -1, y)?),
            ),
        };
        Ok(DelayIdState::new(x, y, self.tau0, 0))
    }
}

fn record<const N: usize>(s: &DelayIdState<N>, gains: &DelayGains) -> TraceRecord {
    let t = s.time(gains.dt);
    let h = gains.observation;
    let (hx, hy) = (h.observe(&s.x), h.observe(&s.y));
    TraceRecord {
        time: t,
        observed_true: hx,
        observed_model: hy,
        sync_error: (hx - hy).abs(),
        estimate: s.tau_est,
        true_param: gains.tau_schedule.at(t),
        sensitivity: s.r[h.selector()],
    }
}

pub fn run_delay_experiment<S, const N: usize, F>(cfg: &DelayExperiment<S, N>, mut sink: F) -> Result<RunOutcome>
where
    S: DelaySystem<N>,
    F: FnMut(&TraceRecord),
{
    cfg.validate()?;
    let mut state = cfg.initial_state()?;
    let steps = cfg.steps();
    let dt = cfg.gains.dt;
    let mut tracker = ConvergenceTracker::new(0.0, steps as f64 * dt, cfg.tol_param, cfg.sync_tol);
    let decimator = Decimator::new(cfg.stride);
    let (lo, hi) = cfg.tau_bounds;
    let mut clamps = 0u64;

    loop {
        let rec = record(&state, &cfg.gains);
        tracker.record(rec.time, rec.estimate - rec.true_param, rec.sync_error);
        let k = state.step as u64;
        if decimator.emits(k) {
            sink(&rec);
        }
        if k == steps {
            break;
        }
        match step_delay_identifier(&mut state, &cfg.system, &cfg.gains) {
            Ok(()) => {
                if state.tau_est < lo || state.tau_est > hi {
                    state.tau_est = state.tau_est.clamp(lo, hi);
                    clamps += 1;
                }
            }
            Err(e @ Error::Diverged { .. }) | Err(e @ Error::OutOfSpan { .. }) => {
                return Ok(RunOutcome { report: tracker.finish(clamps, false), status: RunStatus::Aborted(e) });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(RunOutcome { report: tracker.finish(clamps, true), status: RunStatus::Completed })
}
