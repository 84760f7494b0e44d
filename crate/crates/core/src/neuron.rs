//! Discrete-time leaky integrate-and-fire (LIF) and leaky integrator (LI)
//! neurons, explicit Euler with step `dt`.
//!
//! One step updates the synaptic current first (decay plus injection), then
//! the membrane, then checks the threshold:
//!
//! ```text
//! i <- i * (1 - dt/tau_s) + input
//! v <- (1 - dt/tau_m) * v + (dt/tau_m) * (v_r + i)
//! spike iff v >= v_th, then v <- v_r
//! ```
//!
//! The membrane line is the Euler step `v + dt/tau_m * ((v_r - v) + i)`
//! written as a convex combination, so `tau_m = dt` yields `v = v_r + i`
//! exactly. The synaptic current charges the membrane.

use serde::Serialize;

/// Constants of a LIF (or LI) neuron. Times in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LifParams {
    pub tau_m: f64,
    pub tau_s: f64,
    pub v_th: f64,
    pub v_r: f64,
    pub dt: f64,
}

impl Default for LifParams {
    fn default() -> Self {
        Self {
            tau_m: 1.0,
            tau_s: 1.0,
            v_th: 1.0,
            v_r: 0.0,
            dt: 1.0,
        }
    }
}

impl LifParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.tau_m >= self.dt && self.tau_s >= self.dt) {
            return Err(format!(
                "time constants must be at least dt = {} (tau_m = {}, tau_s = {})",
                self.dt, self.tau_m, self.tau_s
            ));
        }
        if !(self.v_th > self.v_r) {
            return Err(format!("v_th = {} must exceed v_r = {}", self.v_th, self.v_r));
        }
        Ok(())
    }

    /// Fraction `dt / tau_m` of the gap to the target closed per step.
    #[inline]
    pub fn membrane_rate(&self) -> f64 {
        self.dt / self.tau_m
    }

    /// Fraction `1 - dt / tau_s` of the synaptic current kept per step.
    #[inline]
    pub fn current_retention(&self) -> f64 {
        1.0 - self.dt / self.tau_s
    }

    /// True when neither state variable carries anything across steps.
    pub fn is_memoryless(&self) -> bool {
        self.membrane_rate() == 1.0 && self.current_retention() == 0.0
    }
}

/// Membrane potential and synaptic current of one LIF neuron.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LifState {
    pub v: f64,
    pub i: f64,
}

impl LifState {
    /// Resting state for `p`.
    pub fn rest(p: &LifParams) -> Self {
        Self { v: p.v_r, i: 0.0 }
    }

    /// Advances one step with the already weighted and summed input;
    /// returns whether the neuron spiked.
    #[inline]
    pub fn step(&mut self, p: &LifParams, weighted_input: f64) -> bool {
        let k = p.membrane_rate();
        self.i = self.i * p.current_retention() + weighted_input;
        self.v = (1.0 - k) * self.v + k * (p.v_r + self.i);
        if self.v >= p.v_th {
            self.v = p.v_r;
            true
        } else {
            false
        }
    }

    pub fn reset(&mut self, p: &LifParams) {
        *self = Self::rest(p);
    }
}

/// A LIF neuron with spiking disabled: a leaky memory.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LiState {
    pub v: f64,
    pub i: f64,
}

impl LiState {
    /// Advances one step and returns the new potential.
    #[inline]
    pub fn step(&mut self, p: &LifParams, input: f64) -> f64 {
        let k = p.membrane_rate();
        self.i = self.i * p.current_retention() + input;
        self.v = (1.0 - k) * self.v + k * self.i;
        self.v
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }
}

/// Free-function form of [`LifState::step`].
pub fn lif_step(state: LifState, p: &LifParams, weighted_input: f64) -> (LifState, bool) {
    let mut s = state;
    let spike = s.step(p, weighted_input);
    (s, spike)
}

/// Free-function form of [`LiState::step`].
pub fn li_step(state: LiState, p: &LifParams, input: f64) -> (LiState, f64) {
    let mut s = state;
    let v = s.step(p, input);
    (s, v)
}
