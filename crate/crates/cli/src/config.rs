//! Line-oriented `key = value` experiment configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use chaosid_core::chua::{ChuaExperiment, ChuaInit, ContinuousGains};
use chaosid_core::delay::{DelayGains, DelayInit, DelayedSlope, MackeyGlassExperiment, TauSchedule, PHASE_SWITCH};
use chaosid_core::discrete::{DiscreteGains, TentMapExperiment};
use chaosid_core::kernels::DeltaKernel;

/// Where a configuration value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Line(usize),
    Override,
    Default,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(n) => write!(f, "line {n}"),
            Location::Override => f.write_str("override"),
            Location::Default => f.write_str("default"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{at}: expected `key = value`, found `{text}`")]
    Syntax { at: Location, text: String },
    #[error("{at}: key `{key}` repeats the value set on {first}")]
    Duplicate { key: String, at: Location, first: Location },
    #[error("missing key `experiment` (one of tentmap, chua, mackeyglass)")]
    MissingExperiment,
    #[error("{at}: unknown key `{key}` for experiment {experiment}")]
    UnknownKey { key: String, at: Location, experiment: &'static str },
    #[error("{at}: bad value `{value}` for `{key}`: {reason}")]
    BadValue { key: String, value: String, at: Location, reason: String },
    #[error("{at}: `{key}`: {source}")]
    Invalid { key: String, at: Location, source: chaosid_core::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    TentMap(TentMapExperiment),
    Chua(ChuaExperiment),
    MackeyGlass(MackeyGlassExperiment),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn name(&self) -> &'static str {
        match self.experiment {
            Experiment::TentMap(_) => "tentmap",
            Experiment::Chua(_) => "chua",
            Experiment::MackeyGlass(_) => "mackeyglass",
        }
    }

    pub fn seed(&self) -> u64 {
        match &self.experiment {
            Experiment::TentMap(c) => c.seed,
            Experiment::Chua(c) => c.seed,
            Experiment::MackeyGlass(c) => c.seed,
        }
    }

    /// Whether the trace is indexed by integer step rather than time.
    pub fn is_discrete(&self) -> bool {
        matches!(self.experiment, Experiment::TentMap(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    key: String,
    value: String,
    at: Location,
}

/// Parsed but not yet interpreted configuration text.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: Vec<Entry>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let at = Location::Line(i + 1);
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .filter(|(k, v)| !k.is_empty() && !v.is_empty())
                .ok_or_else(|| ConfigError::Syntax { at, text: content.to_string() })?;
            if let Some(first) = raw.find(key) {
                return Err(ConfigError::Duplicate { key: key.to_string(), at, first: first.at });
            }
            raw.entries.push(Entry { key: key.to_string(), value: value.to_string(), at });
        }
        Ok(raw)
    }

    fn find(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.find(key).map(|e| e.value.as_str())
    }

    /// Sets or replaces `key`, as from the command line.
    pub fn set(&mut self, key: &str, value: &str) {
        let entry = Entry { key: key.to_string(), value: value.to_string(), at: Location::Override };
        match self.entries.iter_mut().find(|e| e.key == key) {
            Some(e) => *e = entry,
            None => self.entries.push(entry),
        }
    }

    /// Parses a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        let (k, v) = pair
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .filter(|(k, v)| !k.is_empty() && !v.is_empty())
            .ok_or_else(|| ConfigError::Syntax { at: Location::Override, text: pair.to_string() })?;
        self.set(k, v);
        Ok(())
    }

    pub fn build(&self) -> Result<ExperimentConfig, ConfigError> {
        let kind = self.find("experiment").ok_or(ConfigError::MissingExperiment)?;
        let experiment = match kind.value.as_str() {
            "tentmap" => Experiment::TentMap(self.build_with(TentBuilder::default())?),
            "chua" => Experiment::Chua(self.build_with(ChuaBuilder::default())?),
            "mackeyglass" => {
                let phase2 = match self.find("phase2") {
                    Some(e) => parse_value::<Switch>(e)?.0,
                    None => false,
                };
                Experiment::MackeyGlass(self.build_with(DelayBuilder::new(phase2))?)
            }
            other => {
                return Err(ConfigError::BadValue {
                    key: "experiment".into(),
                    value: other.into(),
                    at: kind.at,
                    reason: "expected tentmap, chua or mackeyglass".into(),
                })
            }
        };
        let output = self.get("output").map(PathBuf::from);
        Ok(ExperimentConfig { experiment, output })
    }

    fn build_with<B: Builder>(&self, mut b: B) -> Result<B::Output, ConfigError> {
        for e in &self.entries {
            if matches!(e.key.as_str(), "experiment" | "output" | "phase2") {
                continue;
            }
            if !b.apply(e)? {
                return Err(ConfigError::UnknownKey { key: e.key.clone(), at: e.at, experiment: B::NAME });
            }
        }
        b.finish().map_err(|source| {
            let key = match &source {
                chaosid_core::Error::InvalidParameter { name, .. } => name.to_string(),
                _ => String::from("experiment"),
            };
            let at = self.find(&key).map_or(Location::Default, |e| e.at);
            ConfigError::Invalid { key, at, source }
        })
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    RawConfig::parse(text)?.build()
}

struct Switch(bool);

impl FromStr for Switch {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "on" | "true" | "yes" | "1" => Ok(Switch(true)),
            "off" | "false" | "no" | "0" => Ok(Switch(false)),
            _ => Err("expected on or off".into()),
        }
    }
}

fn parse_value<T: FromStr>(e: &Entry) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    e.value.parse::<T>().map_err(|err| ConfigError::BadValue {
        key: e.key.clone(),
        value: e.value.clone(),
        at: e.at,
        reason: err.to_string(),
    })
}

trait Builder {
    type Output;
    const NAME: &'static str;
    /// Returns `Ok(false)` for keys this experiment does not have.
    fn apply(&mut self, e: &Entry) -> Result<bool, ConfigError>;
    fn finish(self) -> chaosid_core::Result<Self::Output>;
}

struct TentBuilder {
    cfg: TentMapExperiment,
    eps_couple: f64,
    eta: f64,
    kernel_width: f64,
    delta_normalized: bool,
}

impl Default for TentBuilder {
    fn default() -> Self {
        let cfg = TentMapExperiment::default();
        let g = cfg.gains;
        Self {
            eps_couple: g.eps_couple(),
            eta: g.eta(),
            kernel_width: g.kernel().width(),
            delta_normalized: g.kernel().is_normalized(),
            cfg,
        }
    }
}

impl Builder for TentBuilder {
    type Output = TentMapExperiment;
    const NAME: &'static str = "tentmap";

    fn apply(&mut self, e: &Entry) -> Result<bool, ConfigError> {
        let c = &mut self.cfg;
        match e.key.as_str() {
            "seed" => c.seed = parse_value(e)?,
            "stride" => c.stride = parse_value(e)?,
            "steps" => c.steps = parse_value(e)?,
            "mu" => c.map.mu = parse_value(e)?,
            "sigma" => c.sigma = parse_value(e)?,
            "sigma0" => c.sigma0 = parse_value(e)?,
            "sigma_min" => c.sigma_bounds.0 = parse_value(e)?,
            "sigma_max" => c.sigma_bounds.1 = parse_value(e)?,
            "p_limit" => c.p_limit = parse_value(e)?,
            "tol_param" => c.tol_param = parse_value(e)?,
            "sync_tol" => c.sync_tol = parse_value(e)?,
            "eps_couple" => self.eps_couple = parse_value(e)?,
            "eta" => self.eta = parse_value(e)?,
            "kernel_width" => self.kernel_width = parse_value(e)?,
            "delta_normalized" => self.delta_normalized = parse_value::<Switch>(e)?.0,
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn finish(self) -> chaosid_core::Result<TentMapExperiment> {
        let kernel = if self.delta_normalized {
            DeltaKernel::normalized(self.kernel_width)?
        } else {
            DeltaKernel::new(self.kernel_width)?
        };
        let gains = DiscreteGains::new(self.eps_couple, self.eta, kernel)?;
        let cfg = TentMapExperiment { gains, ..self.cfg };
        cfg.validate()?;
        Ok(cfg)
    }
}

struct ChuaBuilder {
    cfg: ChuaExperiment,
    gamma: f64,
    zeta: f64,
    dt: f64,
    burn_in: f64,
}

impl Default for ChuaBuilder {
    fn default() -> Self {
        let cfg = ChuaExperiment::default();
        let burn_in = match cfg.init {
            ChuaInit::Attractor { burn_in } => burn_in,
            ChuaInit::Given { .. } => 0.0,
        };
        Self { gamma: cfg.gains.gamma(), zeta: cfg.gains.zeta(), dt: cfg.gains.dt(), burn_in, cfg }
    }
}

impl Builder for ChuaBuilder {
    type Output = ChuaExperiment;
    const NAME: &'static str = "chua";

    fn apply(&mut self, e: &Entry) -> Result<bool, ConfigError> {
        let c = &mut self.cfg;
        match e.key.as_str() {
            "seed" => c.seed = parse_value(e)?,
            "stride" => c.stride = parse_value(e)?,
            "t_end" => c.t_end = parse_value(e)?,
            "alpha" => c.params.alpha = parse_value(e)?,
            "beta_chua" => c.params.beta_chua = parse_value(e)?,
            "m0" => c.params.m0 = parse_value(e)?,
            "m1" => c.params.m1 = parse_value(e)?,
            "sigma" => c.params.sigma = parse_value(e)?,
            "sigma0" => c.sigma0 = parse_value(e)?,
            "sigma_min" => c.sigma_bounds.0 = parse_value(e)?,
            "sigma_max" => c.sigma_bounds.1 = parse_value(e)?,
            "q1_limit" => c.q1_limit = parse_value(e)?,
            "tol_param" => c.tol_param = parse_value(e)?,
            "sync_tol" => c.sync_tol = parse_value(e)?,
            "gamma" => self.gamma = parse_value(e)?,
            "zeta" => self.zeta = parse_value(e)?,
            "dt" => self.dt = parse_value(e)?,
            "burn_in" => self.burn_in = parse_value(e)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn finish(self) -> chaosid_core::Result<ChuaExperiment> {
        let gains = ContinuousGains::new(self.gamma, self.zeta, self.dt)?;
        let cfg = ChuaExperiment { gains, init: ChuaInit::Attractor { burn_in: self.burn_in }, ..self.cfg };
        cfg.validate()?;
        Ok(cfg)
    }
}

struct DelayBuilder {
    cfg: MackeyGlassExperiment,
    phase2: bool,
    gamma: f64,
    beta_gain: f64,
    dt: f64,
    tau: f64,
    tau_amplitude: f64,
    tau_frequency: f64,
    delayed_slope: DelayedSlope,
    burn_in: f64,
}

impl DelayBuilder {
    fn new(phase2: bool) -> Self {
        let cfg = MackeyGlassExperiment::two_phase(phase2);
        let g = &cfg.gains;
        let burn_in = match cfg.init {
            DelayInit::BurnIn { burn_in, .. } | DelayInit::SharedBurnIn { burn_in, .. } => burn_in,
            DelayInit::Constant { .. } => 0.0,
        };
        Self {
            phase2,
            gamma: g.gamma(),
            beta_gain: g.beta_gain(),
            dt: g.dt(),
            tau: 23.0,
            tau_amplitude: 3.0,
            tau_frequency: 1e-4,
            delayed_slope: g.delayed_slope,
            burn_in,
            cfg,
        }
    }
}

struct Slope(DelayedSlope);

impl FromStr for Slope {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "intrinsic" => Ok(Slope(DelayedSlope::Intrinsic)),
            "coupled" => Ok(Slope(DelayedSlope::Coupled)),
            _ => Err("expected intrinsic or coupled".into()),
        }
    }
}

impl Builder for DelayBuilder {
    type Output = MackeyGlassExperiment;
    const NAME: &'static str = "mackeyglass";

    fn apply(&mut self, e: &Entry) -> Result<bool, ConfigError> {
        let c = &mut self.cfg;
        match e.key.as_str() {
            "seed" => c.seed = parse_value(e)?,
            "stride" => c.stride = parse_value(e)?,
            "t_end" => c.t_end = parse_value(e)?,
            "a" => c.system.a = parse_value(e)?,
            "b" => c.system.b = parse_value(e)?,
            "tau0" => c.tau0 = parse_value(e)?,
            "tau_min" => c.tau_bounds.0 = parse_value(e)?,
            "tau_max" => c.tau_bounds.1 = parse_value(e)?,
            "history_span" => c.history_span = parse_value(e)?,
            "tol_param" => c.tol_param = parse_value(e)?,
            "sync_tol" => c.sync_tol = parse_value(e)?,
            "gamma" => self.gamma = parse_value(e)?,
            "beta_gain" => self.beta_gain = parse_value(e)?,
            "dt" => self.dt = parse_value(e)?,
            "tau" => self.tau = parse_value(e)?,
            "tau_amplitude" => self.tau_amplitude = parse_value(e)?,
            "tau_frequency" => self.tau_frequency = parse_value(e)?,
            "delayed_slope" => self.delayed_slope = parse_value::<Slope>(e)?.0,
            "burn_in" => self.burn_in = parse_value(e)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn finish(self) -> chaosid_core::Result<MackeyGlassExperiment> {
        let schedule = if self.phase2 {
            TauSchedule::Sinusoid {
                base: self.tau,
                amplitude: self.tau_amplitude,
                frequency: self.tau_frequency,
                start: PHASE_SWITCH,
            }
        } else {
            TauSchedule::Constant(self.tau)
        };
        let mut gains = DelayGains::new::<1>(self.gamma, self.beta_gain, self.dt, schedule, 0)?;
        gains.delayed_slope = self.delayed_slope;
        let init = match self.cfg.init {
            DelayInit::BurnIn { range, .. } => DelayInit::BurnIn { burn_in: self.burn_in, range },
            other => other,
        };
        let cfg = MackeyGlassExperiment { gains, init, ..self.cfg };
        cfg.validate()?;
        Ok(cfg)
    }
}
