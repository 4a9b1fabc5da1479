//! Scalar kernels shared by every identifier.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{require, Result};

/// Name of the random generator behind [`seeded_rng`], recorded in trace headers.
pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.3)";

/// Unit step with `H(0) = 1`.
#[inline]
pub fn heaviside(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Triangular approximation of the Dirac delta.
///
/// `delta(u) = 2 / width * max(1 - |u / width|, 0)`, which has total mass 2.
/// With `normalized` set the value is halved to give a unit-mass kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaKernel {
    width: f64,
    normalized: bool,
}

impl DeltaKernel {
    pub fn new(width: f64) -> Result<Self> {
        require(width > 0.0 && width.is_finite(), "kernel_width", width, "must be positive")?;
        Ok(Self { width, normalized: false })
    }

    pub fn normalized(width: f64) -> Result<Self> {
        Ok(Self { normalized: true, ..Self::new(width)? })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        let v = 2.0 / self.width * (1.0 - (u / self.width).abs()).max(0.0);
        if self.normalized {
            0.5 * v
        } else {
            v
        }
    }
}

/// Free-function form of [`DeltaKernel::eval`].
#[inline]
pub fn delta_smoothed(u: f64, kernel: &DeltaKernel) -> f64 {
    kernel.eval(u)
}

/// Scalar observation `h(x) = x[selector]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    selector: usize,
}

impl Observation {
    /// `h(x) = x[0]`, valid for every state dimension.
    pub const FIRST: Observation = Observation { selector: 0 };

    /// Fails when `selector` does not address a component of a `dim`-vector.
    pub fn new(selector: usize, dim: usize) -> Result<Self> {
        require(selector < dim, "observation selector", selector as f64, "exceeds state dimension")?;
        Ok(Self { selector })
    }

    pub fn selector(&self) -> usize {
        self.selector
    }

    #[inline]
    pub fn observe(&self, state: &[f64]) -> f64 {
        state[self.selector]
    }
}

/// Free-function form of [`Observation::observe`].
#[inline]
pub fn observe(state: &[f64], obs: &Observation) -> f64 {
    obs.observe(state)
}

/// Single-component diffusive coupling `Gamma * (h(x) - h(y))` with
/// `Gamma = gain * e_target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    gain: f64,
    target: usize,
}

impl Coupling {
    pub fn new(gain: f64, target: usize, dim: usize) -> Result<Self> {
        require(gain.is_finite(), "gamma", gain, "must be finite")?;
        require(target < dim, "coupling target", target as f64, "exceeds state dimension")?;
        Ok(Self { gain, target })
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn target(&self) -> usize {
        self.target
    }

    /// Adds the coupling term for observation error `err = h(x) - h(y)` to `rhs`.
    #[inline]
    pub fn apply(&self, rhs: &mut [f64], err: f64) {
        rhs[self.target] += self.gain * err;
    }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample on `[lo, hi)`.
pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}
