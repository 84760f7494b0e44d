//! Spiking check-node update units.
//!
//! One SCNU per directed check-to-variable edge `j -> i`. It sees the
//! extrinsic messages `L_{i' -> j}`, `i' != i`, and produces `L_{i <- j}`:
//!
//! * sign branch: `beta = prod sign(L)`, with `sign(0) = +1`;
//! * magnitude branch: each `|L|` drives one layer-1 LIF neuron with
//!   `gain * (theta1 - |L|)`; a combiner LIF sums the layer-1 spikes with unit
//!   weights and its spike gates the output, `alpha = theta2 * (1 - spike)`;
//! * an LI neuron integrates `alpha * beta` and its potential is the message.
//!
//! With memoryless LIF neurons a layer-1 neuron fires iff
//! `|L| <= theta1 - v_th / gain`, so the circuit computes `theta2` when the
//! extrinsic minimum exceeds that level and 0 otherwise. Between that level and
//! `theta1` (the dead band) it differs from the ideal comparator
//! [`alpha_approx`].
//!
//! The simplified unit drops the magnitude branch: the LI neuron integrates
//! the sign product alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::code::TannerGraph;
use crate::neuron::{LiState, LifParams, LifState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScnuError {
    #[error("SCNU for edge {edge} expects {expected} extrinsic inputs, got {got}")]
    Arity { edge: usize, expected: usize, got: usize },
    #[error("invalid SCNU parameters: {0}")]
    Params(String),
}

/// Constants shared by every SCNU of a decoder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScnuParams {
    /// Magnitude threshold (LLR units).
    pub theta1: f64,
    /// Output amplitude (LLR units).
    pub theta2: f64,
    /// Amplification in front of the layer-1 neurons.
    pub gain: f64,
    /// Membrane time constant of the LI memory (ms).
    pub li_tau_m: f64,
    /// Constants of every LIF neuron.
    pub lif: LifParams,
}

impl Default for ScnuParams {
    fn default() -> Self {
        Self {
            theta1: 2.0,
            theta2: 1.4,
            gain: 10.0,
            li_tau_m: 1.0,
            lif: LifParams::default(),
        }
    }
}

impl ScnuParams {
    pub fn validate(&self) -> Result<(), ScnuError> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ScnuError::Params(format!("{name} must be positive, got {v}")))
            }
        };
        // Zero is allowed: no layer-1 neuron can fire, so every message is zero.
        if !(self.theta1.is_finite() && self.theta1 >= 0.0) {
            return Err(ScnuError::Params(format!("theta1 must be nonnegative, got {}", self.theta1)));
        }
        pos("theta2", self.theta2)?;
        pos("gain", self.gain)?;
        self.lif.validate().map_err(ScnuError::Params)?;
        self.li_params().validate().map_err(ScnuError::Params)?;
        Ok(())
    }

    /// LI memory constants: the synapse is fixed at one step, only the
    /// membrane constant is free.
    pub fn li_params(&self) -> LifParams {
        LifParams {
            tau_m: self.li_tau_m,
            tau_s: self.lif.dt,
            v_th: f64::INFINITY,
            v_r: 0.0,
            dt: self.lif.dt,
        }
    }

    /// Input current of the layer-1 neuron fed by magnitude `mag`.
    #[inline]
    pub fn layer1_drive(&self, mag: f64) -> f64 {
        self.gain * (self.theta1 - mag)
    }

    /// Whether a memoryless layer-1 neuron fires for magnitude `mag`.
    #[inline]
    pub fn layer1_fires(&self, mag: f64) -> bool {
        self.lif.v_r + self.layer1_drive(mag) >= self.lif.v_th
    }

    /// Magnitudes where the spiking comparator and [`alpha_approx`] disagree:
    /// the layer-1 neuron stays silent although `mag <= theta1`.
    pub fn in_dead_band(&self, mag: f64) -> bool {
        mag <= self.theta1 && !self.layer1_fires(mag)
    }

    /// Lower edge `theta1 - v_th / gain` of the dead band (for `v_r = 0`).
    pub fn dead_band_floor(&self) -> f64 {
        self.theta1 - (self.lif.v_th - self.lif.v_r) / self.gain
    }
}

/// `sign` with `sign(0) = +1`.
#[inline]
pub fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Closed-form magnitude rule: `theta2` if `min(mags) > theta1`, else 0.
pub fn alpha_approx(mags: &[f64], theta1: f64, theta2: f64) -> f64 {
    let min = mags.iter().copied().fold(f64::INFINITY, f64::min);
    if min > theta1 {
        theta2
    } else {
        0.0
    }
}

/// Spike counters of a bank. Slots count one per neuron per step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SpikeStats {
    /// Spikes of all LIF neurons: layer-1 plus combiners.
    pub lif_spikes_total: u64,
    pub combiner_spikes: u64,
    /// Layer-1 spikes with the coincident copies merged: the `d_c - 1`
    /// layer-1 neurons fed by the same message always fire together, so this
    /// counts (edge, step) pairs whose message fired its neurons.
    pub edge_spikes: u64,
    /// SCNUs times steps.
    pub possible_scnu_slots: u64,
    /// LIF neurons times steps.
    pub possible_lif_slots: u64,
}

impl SpikeStats {
    pub fn merge(&mut self, other: &SpikeStats) {
        self.lif_spikes_total += other.lif_spikes_total;
        self.combiner_spikes += other.combiner_spikes;
        self.edge_spikes += other.edge_spikes;
        self.possible_scnu_slots += other.possible_scnu_slots;
        self.possible_lif_slots += other.possible_lif_slots;
    }

    /// Merged layer-1 spikes per SCNU slot.
    pub fn rate_scnu(&self) -> f64 {
        ratio(self.edge_spikes, self.possible_scnu_slots)
    }

    /// All LIF spikes per LIF slot.
    pub fn rate_lif(&self) -> f64 {
        ratio(self.lif_spikes_total, self.possible_lif_slots)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Which units a bank holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BankKind {
    /// Sign branch, spiking magnitude branch, LI memory.
    Elena,
    /// Sign branch and LI memory only.
    ElenaStar,
}

/// Neuron states of all SCNUs of one decoder instance.
#[derive(Debug, Clone)]
pub struct ScnuBank {
    kind: BankKind,
    /// Layer-1 states of edge `e` live at `layer1_ptr[e]..layer1_ptr[e + 1]`,
    /// one per other edge of the same check, in check order.
    layer1: Vec<LifState>,
    layer1_ptr: Vec<usize>,
    combiner: Vec<LifState>,
    memory: Vec<LiState>,
    stats: SpikeStats,
    fired: Vec<bool>,
    /// Layer-1 and combiner states were touched since the last reset.
    dirty: bool,
}

impl ScnuBank {
    pub fn new(graph: &TannerGraph, kind: BankKind) -> Self {
        let e = graph.n_edges();
        let mut layer1_ptr = Vec::with_capacity(e + 1);
        layer1_ptr.push(0);
        if kind == BankKind::Elena {
            for edge in 0..e {
                let d = graph.check_degree(graph.edge_check(edge));
                layer1_ptr.push(layer1_ptr[edge] + d - 1);
            }
        }
        let n_layer1 = *layer1_ptr.last().unwrap();
        let n_comb = if kind == BankKind::Elena { e } else { 0 };
        Self {
            kind,
            layer1: vec![LifState::default(); n_layer1],
            layer1_ptr,
            combiner: vec![LifState::default(); n_comb],
            memory: vec![LiState::default(); e],
            stats: SpikeStats::default(),
            fired: vec![false; graph.max_check_degree()],
            dirty: true,
        }
    }

    pub fn kind(&self) -> BankKind {
        self.kind
    }

    /// Number of SCNUs (directed edges).
    pub fn len(&self) -> usize {
        self.memory.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memory.is_empty()
    }

    pub fn lif_neurons(&self) -> usize {
        self.layer1.len() + self.combiner.len()
    }

    pub fn stats(&self) -> &SpikeStats {
        &self.stats
    }

    pub fn take_stats(&mut self) -> SpikeStats {
        std::mem::take(&mut self.stats)
    }

    /// Puts every neuron back to rest. Counters are kept.
    pub fn reset(&mut self, params: &ScnuParams) {
        if self.dirty {
            let rest = LifState::rest(&params.lif);
            self.layer1.iter_mut().for_each(|s| *s = rest);
            self.combiner.iter_mut().for_each(|s| *s = rest);
            self.dirty = false;
        }
        self.memory.iter_mut().for_each(LiState::reset);
    }

    /// LI memory of edge `e`.
    pub fn memory(&self, e: usize) -> &LiState {
        &self.memory[e]
    }

    /// Layer-1 states of the SCNU on edge `e`.
    pub fn layer1(&self, e: usize) -> &[LifState] {
        &self.layer1[self.layer1_ptr[e]..self.layer1_ptr[e + 1]]
    }

    /// One step of the full spiking SCNU on edge `edge`.
    pub fn step_elena(&mut self, edge: usize, params: &ScnuParams, extrinsic: &[f64]) -> Result<f64, ScnuError> {
        let expected = self.layer1_ptr.get(edge + 1).map(|end| end - self.layer1_ptr[edge]);
        if self.kind != BankKind::Elena || expected != Some(extrinsic.len()) {
            return Err(ScnuError::Arity {
                edge,
                expected: expected.unwrap_or(0),
                got: extrinsic.len(),
            });
        }
        let msg = self.step_elena_inner(edge, params, &params.li_params(), extrinsic, None);
        Ok(msg)
    }

    fn step_elena_inner(
        &mut self,
        edge: usize,
        params: &ScnuParams,
        li: &LifParams,
        extrinsic: &[f64],
        mut fired: Option<&mut [bool]>,
    ) -> f64 {
        self.dirty = true;
        let base = self.layer1_ptr[edge];
        let mut beta = 1.0;
        let mut count = 0u32;
        for (k, &l) in extrinsic.iter().enumerate() {
            beta *= sign(l);
            let spike = self.layer1[base + k].step(&params.lif, params.layer1_drive(l.abs()));
            count += u32::from(spike);
            if let Some(f) = fired.as_deref_mut() {
                f[k] = spike;
            }
        }
        let gate = self.combiner[edge].step(&params.lif, f64::from(count));
        self.stats.lif_spikes_total += u64::from(count) + u64::from(gate);
        self.stats.combiner_spikes += u64::from(gate);
        self.stats.possible_scnu_slots += 1;
        self.stats.possible_lif_slots += extrinsic.len() as u64 + 1;
        let alpha = params.theta2 * (1.0 - f64::from(u8::from(gate)));
        self.memory[edge].step(li, alpha * beta)
    }

    /// One step of the simplified SCNU on edge `edge`.
    pub fn step_elena_star(
        &mut self,
        edge: usize,
        params: &ScnuParams,
        extrinsic: &[f64],
        expected_arity: usize,
    ) -> Result<f64, ScnuError> {
        if extrinsic.len() != expected_arity || edge >= self.memory.len() {
            return Err(ScnuError::Arity {
                edge,
                expected: expected_arity,
                got: extrinsic.len(),
            });
        }
        let x: f64 = extrinsic.iter().map(|&l| sign(l)).product();
        self.stats.possible_scnu_slots += 1;
        Ok(self.memory[edge].step(&params.li_params(), x))
    }

    /// Updates every SCNU of check `j` from `v2c`, writing `c2v`.
    ///
    /// Uses the per-neuron path unless the LIF neurons are memoryless, in
    /// which case spikes are computed once per message; both paths produce
    /// identical messages and counters.
    pub fn update_check(
        &mut self,
        graph: &TannerGraph,
        j: usize,
        params: &ScnuParams,
        li: &LifParams,
        v2c: &[f64],
        c2v: &mut [f64],
        scratch: &mut Vec<f64>,
    ) {
        match self.kind {
            BankKind::ElenaStar => self.star_check(graph, j, li, v2c, c2v),
            BankKind::Elena if params.lif.is_memoryless() => self.fast_check(graph, j, params, li, v2c, c2v),
            BankKind::Elena => self.full_check(graph, j, params, li, v2c, c2v, scratch),
        }
    }

    /// Per-neuron path: every SCNU steps its own layer-1 neurons.
    pub fn full_check(
        &mut self,
        graph: &TannerGraph,
        j: usize,
        params: &ScnuParams,
        li: &LifParams,
        v2c: &[f64],
        c2v: &mut [f64],
        scratch: &mut Vec<f64>,
    ) {
        let edges = graph.check_edges(j);
        let d = edges.len();
        let mut fired = std::mem::take(&mut self.fired);
        let mut merged = 0u64;
        for (pos, e) in edges.clone().enumerate() {
            scratch.clear();
            scratch.extend(edges.clone().filter(|&o| o != e).map(|o| v2c[o]));
            c2v[e] = self.step_elena_inner(e, params, li, scratch, Some(&mut fired[..d - 1]));
            // The first SCNU sees every input except input 0; input 0's
            // neurons are read from the second SCNU.
            if pos == 0 {
                merged += fired[..d - 1].iter().filter(|&&f| f).count() as u64;
            } else if pos == 1 {
                merged += u64::from(fired[0]);
            }
        }
        self.stats.edge_spikes += merged;
        self.fired = fired;
    }

    /// Memoryless-LIF path.
    fn fast_check(&mut self, graph: &TannerGraph, j: usize, params: &ScnuParams, li: &LifParams, v2c: &[f64], c2v: &mut [f64]) {
        let edges = graph.check_edges(j);
        let d = edges.len() as u64;
        let mut spikes = 0u32;
        let mut parity = 1.0;
        for e in edges.clone() {
            let l = v2c[e];
            parity *= sign(l);
            spikes += u32::from(params.layer1_fires(l.abs()));
        }
        let mut gates = 0u64;
        for e in edges {
            let l = v2c[e];
            let own = u32::from(params.layer1_fires(l.abs()));
            let others = spikes - own;
            let gate = params.lif.v_r + f64::from(others) >= params.lif.v_th;
            gates += u64::from(gate);
            let alpha = params.theta2 * (1.0 - f64::from(u8::from(gate)));
            let beta = parity * sign(l);
            c2v[e] = self.memory[e].step(li, alpha * beta);
        }
        let layer1 = u64::from(spikes) * (d - 1);
        self.stats.lif_spikes_total += layer1 + gates;
        self.stats.combiner_spikes += gates;
        if d > 1 {
            self.stats.edge_spikes += u64::from(spikes);
        }
        self.stats.possible_scnu_slots += d;
        self.stats.possible_lif_slots += d * d;
    }

    fn star_check(&mut self, graph: &TannerGraph, j: usize, li: &LifParams, v2c: &[f64], c2v: &mut [f64]) {
        let edges = graph.check_edges(j);
        let parity: f64 = edges.clone().map(|e| sign(v2c[e])).product();
        for e in edges.clone() {
            c2v[e] = self.memory[e].step(li, parity * sign(v2c[e]));
        }
        self.stats.possible_scnu_slots += edges.len() as u64;
    }
}

/// Whether inputs in the dead band are drawn by [`snn_equivalence_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandPolicy {
    Include,
    Exclude,
}

/// Outcome of comparing the spiking SCNU against `alpha_approx` followed by
/// the same LI filter.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EquivalenceReport {
    pub trials: u64,
    pub steps: u64,
    /// Trials in which some input fell in the dead band.
    pub flagged_trials: u64,
    /// Largest deviation over trials without dead-band inputs.
    pub max_deviation: f64,
    /// Largest deviation over flagged trials.
    pub max_flagged_deviation: f64,
}

/// Drives one spiking SCNU and the closed-form reference with the same
/// random extrinsic sequences and reports the largest output difference.
///
/// Each trial draws an arity in `1..=max_arity` and runs `steps_per_trial`
/// consecutive steps from rest. Magnitudes are uniform on `[0, 2 theta1 + 1]`.
pub fn snn_equivalence_check(
    params: &ScnuParams,
    trials: u64,
    max_arity: usize,
    steps_per_trial: usize,
    policy: BandPolicy,
    seed: u64,
) -> EquivalenceReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let li = params.li_params();
    let arity_cap = max_arity.max(1);
    // Edge 0 of a single check over `arity + 1` variables has `arity` inputs.
    let mut banks: Vec<ScnuBank> = (0..=arity_cap)
        .map(|a| {
            let g = TannerGraph::from_rows(a + 1, &[(0..=a).collect()]).expect("single check graph");
            ScnuBank::new(&g, BankKind::Elena)
        })
        .collect();
    let mut report = EquivalenceReport::default();
    let mut inputs = Vec::with_capacity(arity_cap);
    let mut mags = Vec::with_capacity(arity_cap);
    let hi = 2.0 * params.theta1 + 1.0;
    for _ in 0..trials {
        let arity = rng.random_range(1..=arity_cap);
        let bank = &mut banks[arity];
        bank.reset(params);
        let mut reference = LiState::default();
        let mut flagged = false;
        let mut worst = 0.0f64;
        for _ in 0..steps_per_trial {
            inputs.clear();
            while inputs.len() < arity {
                let mag = rng.random_range(0.0..hi);
                if policy == BandPolicy::Exclude && params.in_dead_band(mag) {
                    continue;
                }
                let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                inputs.push(s * mag);
            }
            flagged |= inputs.iter().any(|l| params.in_dead_band(l.abs()));
            let got = bank.step_elena(0, params, &inputs).expect("arity matches");
            mags.clear();
            mags.extend(inputs.iter().map(|l| l.abs()));
            let beta: f64 = inputs.iter().map(|&l| sign(l)).product();
            let want = reference.step(&li, alpha_approx(&mags, params.theta1, params.theta2) * beta);
            worst = worst.max((got - want).abs());
            report.steps += 1;
        }
        report.trials += 1;
        if flagged {
            report.flagged_trials += 1;
            report.max_flagged_deviation = report.max_flagged_deviation.max(worst);
        } else {
            report.max_deviation = report.max_deviation.max(worst);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single_check(d: usize) -> TannerGraph {
        TannerGraph::from_rows(d, &[(0..d).collect()]).unwrap()
    }

    fn c1_params() -> ScnuParams {
        ScnuParams::default()
    }

    #[test]
    fn alpha_approx_examples() {
        assert_eq!(alpha_approx(&[2.5, 3.0], 2.0, 1.4), 1.4);
        assert_eq!(alpha_approx(&[1.5, 3.0], 2.0, 1.4), 0.0);
        assert_eq!(alpha_approx(&[2.0], 2.0, 1.4), 0.0);
    }

    #[test]
    fn elena_memoryless_example() {
        let g = single_check(4);
        let mut bank = ScnuBank::new(&g, BankKind::Elena);
        let p = c1_params();
        let msg = bank.step_elena(0, &p, &[2.5, -3.0, -2.2]).unwrap();
        assert_eq!(msg, 1.4);
        assert_eq!(bank.stats().lif_spikes_total, 0);
    }

    #[test]
    fn small_input_gates_output() {
        let g = single_check(3);
        let mut bank = ScnuBank::new(&g, BankKind::Elena);
        let p = c1_params();
        let msg = bank.step_elena(0, &p, &[1.85, 5.0]).unwrap();
        assert_eq!(msg, 0.0);
        assert_eq!(bank.stats().combiner_spikes, 1);
        assert_eq!(bank.stats().lif_spikes_total, 2);
    }

    #[test]
    fn li_memory_accumulates() {
        let g = single_check(3);
        let mut bank = ScnuBank::new(&g, BankKind::Elena);
        let p = ScnuParams { li_tau_m: 1.0 / 0.6, ..c1_params() };
        let m1 = bank.step_elena(0, &p, &[2.5, 3.0]).unwrap();
        let m2 = bank.step_elena(0, &p, &[2.5, 3.0]).unwrap();
        assert!((m1 - 0.6 * 1.4).abs() < 1e-12);
        assert!((m2 - 0.84 * 1.4).abs() < 1e-12);
        // 1.667 ms gives the same up to rounding.
        let mut bank = ScnuBank::new(&g, BankKind::Elena);
        let p = ScnuParams { li_tau_m: 1.667, ..c1_params() };
        let m1 = bank.step_elena(0, &p, &[2.5, 3.0]).unwrap();
        let m2 = bank.step_elena(0, &p, &[2.5, 3.0]).unwrap();
        assert!((m1 / 1.4 - 0.6).abs() < 1e-3 && (m2 / 1.4 - 0.84).abs() < 1e-3);
    }

    #[test]
    fn star_examples() {
        let g = single_check(4);
        let mut bank = ScnuBank::new(&g, BankKind::ElenaStar);
        let p = ScnuParams { li_tau_m: 1.0 / 0.61, ..c1_params() };
        let m = bank.step_elena_star(0, &p, &[1.0, 2.0, 0.5], 3).unwrap();
        assert!((m - 0.61).abs() < 1e-12);
        let mut bank = ScnuBank::new(&g, BankKind::ElenaStar);
        let a = bank.step_elena_star(0, &p, &[1.0, 2.0, 0.5], 3).unwrap();
        let b = bank.step_elena_star(0, &p, &[1.0, -2.0, 0.5], 3).unwrap();
        assert!((a - 0.61).abs() < 1e-12);
        assert!((b - (0.39 * 0.61 - 0.61)).abs() < 1e-12);
        assert!((b + 0.3721).abs() < 1e-12);
        let p = ScnuParams { li_tau_m: 1.0, ..c1_params() };
        let mut bank = ScnuBank::new(&g, BankKind::ElenaStar);
        assert_eq!(bank.step_elena_star(0, &p, &[3.0, -0.1, 7.0], 3).unwrap(), -1.0);
    }

    #[test]
    fn arity_is_checked() {
        let g = single_check(4);
        let mut bank = ScnuBank::new(&g, BankKind::Elena);
        assert!(matches!(
            bank.step_elena(0, &c1_params(), &[1.0, 2.0]),
            Err(ScnuError::Arity { expected: 3, got: 2, .. })
        ));
        let mut star = ScnuBank::new(&g, BankKind::ElenaStar);
        assert!(star.step_elena_star(0, &c1_params(), &[1.0], 3).is_err());
        assert!(star.step_elena(0, &c1_params(), &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn layer1_threshold_predicate() {
        let p = c1_params();
        assert!(p.layer1_fires(1.9));
        assert!(p.layer1_fires(0.0));
        assert!(!p.layer1_fires(1.95));
        assert!(p.in_dead_band(1.95));
        assert!(p.in_dead_band(2.0));
        assert!(!p.in_dead_band(2.0000001));
        assert!(!p.in_dead_band(1.9));
        assert!((p.dead_band_floor() - 1.9).abs() < 1e-15);
    }

    #[test]
    fn boundary_input_matches_reference() {
        let g = single_check(2);
        let mut bank = ScnuBank::new(&g, BankKind::Elena);
        let p = c1_params();
        let msg = bank.step_elena(0, &p, &[p.theta1 - 0.1]).unwrap();
        assert_eq!(msg, alpha_approx(&[p.theta1 - 0.1], p.theta1, p.theta2));
        assert_eq!(msg, 0.0);
        bank.reset(&p);
        let msg = bank.step_elena(0, &p, &[1.95]).unwrap();
        assert_eq!(msg, p.theta2);
        assert_eq!(alpha_approx(&[1.95], p.theta1, p.theta2), 0.0);
    }

    #[test]
    fn equivalence_outside_band_is_exact() {
        for li_tau_m in [1.0, 1.667, 4.167] {
            let p = ScnuParams { li_tau_m, ..c1_params() };
            let r = snn_equivalence_check(&p, 2000, 16, 4, BandPolicy::Exclude, 5);
            assert_eq!(r.flagged_trials, 0);
            assert_eq!(r.max_deviation, 0.0);
        }
    }

    #[test]
    fn band_inputs_are_flagged_with_theta2_deviation() {
        let p = c1_params();
        let r = snn_equivalence_check(&p, 3000, 16, 1, BandPolicy::Include, 9);
        assert!(r.flagged_trials > 0);
        assert_eq!(r.max_deviation, 0.0);
        assert_eq!(r.max_flagged_deviation, p.theta2);
    }

    #[test]
    fn fast_and_full_paths_agree_bitwise() {
        let g = TannerGraph::from_rows(9, &[(0..9).collect(), vec![0, 3, 5]]).unwrap();
        let p = ScnuParams { li_tau_m: 1.639, ..c1_params() };
        let li = p.li_params();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut full = ScnuBank::new(&g, BankKind::Elena);
        let mut fast = ScnuBank::new(&g, BankKind::Elena);
        let mut scratch = Vec::new();
        let (mut a, mut b) = (vec![0.0; g.n_edges()], vec![0.0; g.n_edges()]);
        for _ in 0..500 {
            let v2c: Vec<f64> = (0..g.n_edges()).map(|_| rng.random_range(-5.0..5.0)).collect();
            for j in 0..g.n_checks() {
                full.full_check(&g, j, &p, &li, &v2c, &mut a, &mut scratch);
                fast.update_check(&g, j, &p, &li, &v2c, &mut b, &mut scratch);
            }
            assert_eq!(a, b);
        }
        assert_eq!(full.stats(), fast.stats());
        assert!(full.stats().edge_spikes > 0);
    }

    #[test]
    fn merged_spikes_count_small_messages() {
        let g = single_check(4);
        let p = c1_params();
        let li = p.li_params();
        let mut bank = ScnuBank::new(&g, BankKind::Elena);
        let mut out = vec![0.0; 4];
        bank.update_check(&g, 0, &p, &li, &[0.5, -1.0, 3.0, 4.0], &mut out, &mut Vec::new());
        let s = bank.stats();
        assert_eq!(s.edge_spikes, 2);
        assert_eq!(s.lif_spikes_total - s.combiner_spikes, 2 * 3);
        // Edges 0 and 1 each see the other's small message; edges 2 and 3 see both.
        assert_eq!(s.combiner_spikes, 4);
        assert_eq!(out, vec![0.0; 4]);
        assert_eq!(s.possible_scnu_slots, 4);
        assert_eq!(s.possible_lif_slots, 16);
    }

    proptest! {
        #[test]
        fn combiner_fires_iff_any_layer1_fires(
            mags in proptest::collection::vec(0.0f64..5.0, 1..20)
        ) {
            let d = mags.len() + 1;
            let g = single_check(d);
            let p = c1_params();
            let mut bank = ScnuBank::new(&g, BankKind::Elena);
            bank.step_elena(0, &p, &mags).unwrap();
            let any = mags.iter().any(|&m| p.layer1_fires(m));
            prop_assert_eq!(bank.stats().combiner_spikes == 1, any);
        }

        #[test]
        fn message_magnitudes_are_bounded(
            seq in proptest::collection::vec(proptest::collection::vec(-6.0f64..6.0, 3), 1..30),
            tau in 1.0f64..8.0
        ) {
            let g = single_check(4);
            let p = ScnuParams { li_tau_m: tau, ..c1_params() };
            let mut elena = ScnuBank::new(&g, BankKind::Elena);
            let mut star = ScnuBank::new(&g, BankKind::ElenaStar);
            for x in &seq {
                let m = elena.step_elena(0, &p, x).unwrap();
                prop_assert!(m.abs() <= p.theta2 + 1e-12);
                let s = star.step_elena_star(0, &p, x, 3).unwrap();
                prop_assert!(s.abs() <= 1.0 + 1e-12);
            }
            let st = elena.stats();
            prop_assert!(st.combiner_spikes <= st.possible_scnu_slots);
            prop_assert!(st.lif_spikes_total <= st.possible_lif_slots);
        }
    }
}
