//! Flooding-schedule message passing over a Tanner graph.
//!
//! `c2v` starts at zero, so the first variable update sends the channel LLRs.
//! Each iteration then updates every check from the same `v2c` snapshot and
//! every variable from the resulting `c2v`. The output LLR of variable `i`
//! is `L_i + sum_j c2v`, and bit `i` is 0 iff that value is positive.

mod rules;

use serde::Serialize;
use thiserror::Error;

use crate::code::TannerGraph;
use crate::neuron::{LiState, LifParams};
use crate::scnu::{sign, BankKind, ScnuBank, ScnuError, ScnuParams, SpikeStats};

pub use rules::{
    apply_sr, cn_update_ddbmp, cn_update_minsum, cn_update_spa, ddbmp_check, ddbmp_vn_update, minsum_check, spa_check,
    vn_update, MinSumMode, SPA_CLAMP,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("length {got} does not match the graph (expected {expected})")]
    LengthMismatch { expected: usize, got: usize },
    #[error("channel LLR {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("invalid decoder configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Scnu(#[from] ScnuError),
}

/// Magnitude test of the non-spiking Elena reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparator {
    /// `min |L| > theta1`.
    Ideal,
    /// Passes exactly when no layer-1 neuron of the spiking unit would fire.
    Circuit,
}

/// Check-node rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum CheckRule {
    Spa,
    MinSum,
    Normalized { alpha: f64 },
    Offset { beta: f64 },
    DdBmp,
    Elena,
    ElenaStar,
    /// Closed-form Elena update without neurons: `alpha * beta` into an LI
    /// memory per edge.
    ElenaDirect { comparator: Comparator },
}

impl CheckRule {
    pub fn name(&self) -> &'static str {
        match self {
            CheckRule::Spa => "spa",
            CheckRule::MinSum => "ms",
            CheckRule::Normalized { .. } => "nms",
            CheckRule::Offset { .. } => "oms",
            CheckRule::DdBmp => "ddbmp",
            CheckRule::Elena => "elena",
            CheckRule::ElenaStar => "elena-star",
            CheckRule::ElenaDirect { comparator: Comparator::Ideal } => "elena-direct",
            CheckRule::ElenaDirect { comparator: Comparator::Circuit } => "elena-direct-circuit",
        }
    }

    /// Rules that carry SCNU parameters.
    pub fn uses_scnu(&self) -> bool {
        matches!(self, CheckRule::Elena | CheckRule::ElenaStar | CheckRule::ElenaDirect { .. })
    }

    pub fn is_spiking(&self) -> bool {
        matches!(self, CheckRule::Elena | CheckRule::ElenaStar)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoderConfig {
    pub rule: CheckRule,
    /// Relaxation factor applied to check messages, if any.
    pub sr_gamma: Option<f64>,
    pub iterations: usize,
    /// Stop once the hard decision satisfies every check.
    pub early_stop: bool,
    pub scnu: ScnuParams,
}

impl DecoderConfig {
    pub fn new(rule: CheckRule) -> Self {
        Self {
            rule,
            sr_gamma: None,
            iterations: 20,
            early_stop: false,
            scnu: ScnuParams::default(),
        }
    }

    pub fn with_scnu(mut self, scnu: ScnuParams) -> Self {
        self.scnu = scnu;
        self
    }

    pub fn with_sr(mut self, gamma: f64) -> Self {
        self.sr_gamma = Some(gamma);
        self
    }

    pub fn validate(&self) -> Result<(), DecodeError> {
        let bad = |s: String| Err(DecodeError::Config(s));
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        match self.rule {
            CheckRule::Normalized { alpha } if !(alpha > 0.0 && alpha <= 1.0) => {
                return bad(format!("normalization factor {alpha} outside (0, 1]"));
            }
            CheckRule::Offset { beta } if !(beta >= 0.0 && beta.is_finite()) => {
                return bad(format!("offset {beta} must be finite and nonnegative"));
            }
            _ => {}
        }
        if let Some(g) = self.sr_gamma {
            if !(g > 0.0 && g <= 1.0) {
                return bad(format!("relaxation factor {g} outside (0, 1]"));
            }
        }
        if self.rule.uses_scnu() {
            self.scnu.validate()?;
        }
        Ok(())
    }

    /// Short label, `sr-` prefixed when relaxation is on.
    pub fn label(&self) -> String {
        match self.sr_gamma {
            Some(_) => format!("sr-{}", self.rule.name()),
            None => self.rule.name().to_string(),
        }
    }
}

/// Outcome of decoding one word.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodeResult {
    pub bits: Vec<u8>,
    pub output_llrs: Vec<f64>,
    pub iterations_run: usize,
    pub syndrome_weight: usize,
    /// Spiking rules only.
    pub spike_stats: Option<SpikeStats>,
    /// Elena rules only: extrinsic magnitudes that fell in the dead band,
    /// counted per (edge, iteration).
    pub dead_band_hits: Option<u64>,
}

/// Per-word counters returned by [`Decoder::decode_in_place`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DecodeSummary {
    pub iterations_run: usize,
    pub syndrome_weight: usize,
    pub spikes: SpikeStats,
    pub dead_band_hits: u64,
}

/// Decoder state for one graph. Reusable across words; not shared between
/// threads.
#[derive(Debug, Clone)]
pub struct Decoder<'g> {
    graph: &'g TannerGraph,
    cfg: DecoderConfig,
    li: LifParams,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    prev: Vec<f64>,
    total: Vec<f64>,
    bits: Vec<u8>,
    memory: Vec<f64>,
    direct: Vec<LiState>,
    bank: Option<ScnuBank>,
    scratch: Vec<f64>,
}

impl<'g> Decoder<'g> {
    pub fn new(graph: &'g TannerGraph, cfg: DecoderConfig) -> Result<Self, DecodeError> {
        cfg.validate()?;
        let e = graph.n_edges();
        let n = graph.n_vars();
        let bank = match cfg.rule {
            CheckRule::Elena => Some(ScnuBank::new(graph, BankKind::Elena)),
            CheckRule::ElenaStar => Some(ScnuBank::new(graph, BankKind::ElenaStar)),
            _ => None,
        };
        let direct = match cfg.rule {
            CheckRule::ElenaDirect { .. } => vec![LiState::default(); e],
            _ => Vec::new(),
        };
        Ok(Self {
            graph,
            cfg,
            li: cfg.scnu.li_params(),
            v2c: vec![0.0; e],
            c2v: vec![0.0; e],
            prev: vec![0.0; e],
            total: vec![0.0; n],
            bits: vec![0; n],
            memory: vec![0.0; n],
            direct,
            bank,
            scratch: Vec::with_capacity(2 * graph.max_check_degree() + 1),
        })
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.cfg
    }

    pub fn graph(&self) -> &'g TannerGraph {
        self.graph
    }

    /// Decodes `llr` and returns an owned result.
    pub fn decode(&mut self, llr: &[f64]) -> Result<DecodeResult, DecodeError> {
        let s = self.decode_in_place(llr)?;
        Ok(DecodeResult {
            bits: self.bits.clone(),
            output_llrs: self.total.clone(),
            iterations_run: s.iterations_run,
            syndrome_weight: s.syndrome_weight,
            spike_stats: self.cfg.rule.is_spiking().then_some(s.spikes),
            dead_band_hits: matches!(self.cfg.rule, CheckRule::Elena | CheckRule::ElenaDirect { .. })
                .then_some(s.dead_band_hits),
        })
    }

    /// Hard decisions of the last decoded word.
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Output LLRs of the last decoded word.
    pub fn output_llrs(&self) -> &[f64] {
        &self.total
    }

    /// Decodes `llr`, leaving bits and output LLRs in the decoder.
    pub fn decode_in_place(&mut self, llr: &[f64]) -> Result<DecodeSummary, DecodeError> {
        let g = self.graph;
        if llr.len() != g.n_vars() {
            return Err(DecodeError::LengthMismatch { expected: g.n_vars(), got: llr.len() });
        }
        if let Some((index, &value)) = llr.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(DecodeError::NonFinite { index, value });
        }
        self.reset_state();
        let binary = self.cfg.rule == CheckRule::DdBmp;
        if binary {
            for e in 0..g.n_edges() {
                self.v2c[e] = sign(llr[g.edge_var(e)]);
            }
            self.total.copy_from_slice(llr);
        } else {
            rules::vn_update_unchecked(g, llr, &self.c2v, &mut self.v2c, &mut self.total);
        }
        let mut summary = DecodeSummary::default();
        for it in 0..self.cfg.iterations {
            summary.dead_band_hits += self.count_band_hits();
            self.check_pass();
            if let Some(gamma) = self.cfg.sr_gamma {
                rules::apply_sr(&mut self.prev, &mut self.c2v, gamma);
            }
            if binary {
                rules::ddbmp_vn_update(g, llr, &self.c2v, &mut self.memory, &mut self.v2c, &mut self.total);
            } else {
                rules::vn_update_unchecked(g, llr, &self.c2v, &mut self.v2c, &mut self.total);
            }
            summary.iterations_run = it + 1;
            if self.cfg.early_stop {
                self.harden();
                if g.syndrome_weight_unchecked(&self.bits) == 0 {
                    break;
                }
            }
        }
        self.harden();
        summary.syndrome_weight = g.syndrome_weight_unchecked(&self.bits);
        if let Some(bank) = self.bank.as_mut() {
            summary.spikes = bank.take_stats();
            bank.reset(&self.cfg.scnu);
        }
        Ok(summary)
    }

    fn reset_state(&mut self) {
        self.c2v.iter_mut().for_each(|v| *v = 0.0);
        self.prev.iter_mut().for_each(|v| *v = 0.0);
        self.memory.iter_mut().for_each(|v| *v = 0.0);
        self.direct.iter_mut().for_each(LiState::reset);
        if let Some(bank) = self.bank.as_mut() {
            bank.reset(&self.cfg.scnu);
            bank.take_stats();
        }
    }

    fn harden(&mut self) {
        for (b, &t) in self.bits.iter_mut().zip(&self.total) {
            *b = u8::from(t <= 0.0);
        }
    }

    fn count_band_hits(&self) -> u64 {
        match self.cfg.rule {
            CheckRule::Elena | CheckRule::ElenaDirect { .. } => {
                self.v2c.iter().filter(|l| self.cfg.scnu.in_dead_band(l.abs())).count() as u64
            }
            _ => 0,
        }
    }

    /// All checks from the current `v2c` snapshot.
    fn check_pass(&mut self) {
        let g = self.graph;
        for j in 0..g.n_checks() {
            self.update_check(j);
        }
    }

    fn update_check(&mut self, j: usize) {
        let g = self.graph;
        let (v2c, c2v) = (&self.v2c, &mut self.c2v);
        match self.cfg.rule {
            CheckRule::Spa => rules::spa_check(g, j, v2c, c2v, &mut self.scratch),
            CheckRule::MinSum => rules::minsum_check(g, j, v2c, c2v, MinSumMode::Plain),
            CheckRule::Normalized { alpha } => rules::minsum_check(g, j, v2c, c2v, MinSumMode::Normalized(alpha)),
            CheckRule::Offset { beta } => rules::minsum_check(g, j, v2c, c2v, MinSumMode::Offset(beta)),
            CheckRule::DdBmp => rules::ddbmp_check(g, j, v2c, c2v),
            CheckRule::Elena | CheckRule::ElenaStar => {
                let bank = self.bank.as_mut().expect("spiking rule has a bank");
                bank.update_check(g, j, &self.cfg.scnu, &self.li, v2c, c2v, &mut self.scratch);
            }
            CheckRule::ElenaDirect { comparator } => {
                direct_check(g, j, &self.cfg.scnu, &self.li, comparator, v2c, c2v, &mut self.direct)
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn direct_check(
    g: &TannerGraph,
    j: usize,
    p: &ScnuParams,
    li: &LifParams,
    comparator: Comparator,
    v2c: &[f64],
    c2v: &mut [f64],
    memory: &mut [LiState],
) {
    let edges = g.check_edges(j);
    let (mut min1, mut min2, mut arg) = (f64::INFINITY, f64::INFINITY, usize::MAX);
    let mut parity = 1.0;
    for e in edges.clone() {
        let l = v2c[e];
        parity *= sign(l);
        let m = l.abs();
        if m < min1 {
            min2 = min1;
            min1 = m;
            arg = e;
        } else if m < min2 {
            min2 = m;
        }
    }
    for e in edges {
        let min = if e == arg { min2 } else { min1 };
        let pass = match comparator {
            Comparator::Ideal => min > p.theta1,
            Comparator::Circuit => !p.layer1_fires(min),
        };
        let alpha = if pass { p.theta2 } else { 0.0 };
        let beta = parity * sign(v2c[e]);
        c2v[e] = memory[e].step(li, alpha * beta);
    }
}
