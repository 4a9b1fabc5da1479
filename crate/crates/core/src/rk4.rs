//! Classical fixed-step fourth-order Runge-Kutta.

/// A state vector RK4 can combine with its stage derivatives.
pub trait OdeState: Copy {
    /// Returns `self + a * k`.
    fn add_scaled(&self, a: f64, k: &Self) -> Self;
}

impl<const N: usize> OdeState for [f64; N] {
    #[inline]
    fn add_scaled(&self, a: f64, k: &Self) -> Self {
        let mut out = *self;
        for (o, ki) in out.iter_mut().zip(k) {
            *o += a * ki;
        }
        out
    }
}

/// Advances `state` by one step of size `dt` under the autonomous field `rhs`.
///
/// Returns the new state together with the field evaluated at the start of the
/// step (the first stage), which callers reuse for history buffers.
pub fn rk4_step<S: OdeState, F>(state: &S, dt: f64, mut rhs: F) -> (S, S)
where
    F: FnMut(&S) -> S,
{
    let k1 = rhs(state);
    let k2 = rhs(&state.add_scaled(0.5 * dt, &k1));
    let k3 = rhs(&state.add_scaled(0.5 * dt, &k2));
    let k4 = rhs(&state.add_scaled(dt, &k3));
    let next = state
        .add_scaled(dt / 6.0, &k1)
        .add_scaled(dt / 3.0, &k2)
        .add_scaled(dt / 3.0, &k3)
        .add_scaled(dt / 6.0, &k4);
    (next, k1)
}

/// Integrates `steps` RK4 steps and returns the final state.
pub fn integrate<S: OdeState, F>(state: S, dt: f64, steps: usize, mut rhs: F) -> S
where
    F: FnMut(&S) -> S,
{
    let mut s = state;
    for _ in 0..steps {
        s = rk4_step(&s, dt, &mut rhs).0;
    }
    s
}
