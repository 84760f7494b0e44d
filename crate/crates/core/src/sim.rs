//! Monte Carlo BER/FER estimation, parameter sweeps and spike counting.
//!
//! Frame `f` of a run with seed `s` always uses the same codeword and noise
//! (counter-based streams keyed by `(s, f)`), and frames are tallied in index
//! order up to the exact frame that reaches the error target. Results are
//! therefore identical for any worker count or batch size.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::channel::{llr_scale, transmit, ChannelError, ChannelPoint, LlrScaling, SnrAxis};
use crate::code::{NullSpace, TannerGraph};
use crate::decoder::{CheckRule, DecodeError, Decoder, DecoderConfig};
use crate::scnu::SpikeStats;

/// Frame errors needed before a point counts as statistically resolved.
pub const CONFIDENT_FRAME_ERRORS: u64 = 100;

/// Header of the CSV emitted by [`BerPoint::csv_row`].
pub const CSV_HEADER: &str =
    "ebn0_db,esn0_db,frames,bit_errors,frame_errors,ber,fer,ci95,spikes_per_cw,rate_scnu,rate_lif,decoder,code,seed";

#[derive(Debug, Error)]
pub enum SimError {
    #[error("stop rule needs min_frame_errors or max_frames")]
    NoStopBound,
    #[error("frame budget is zero")]
    ZeroBudget,
    #[error("{0} is not a spiking decoder")]
    NotSpiking(String),
    #[error("invalid sweep: {0}")]
    Sweep(String),
    #[error("could not start worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// A code together with what is needed to draw codewords from it.
#[derive(Debug, Clone)]
pub struct SimCode {
    pub graph: TannerGraph,
    pub space: NullSpace,
    pub name: String,
}

impl SimCode {
    pub fn new(graph: TannerGraph, name: impl Into<String>) -> Self {
        let space = graph.null_space();
        Self {
            graph,
            space,
            name: name.into(),
        }
    }

    /// `k / N`.
    pub fn rate(&self) -> f64 {
        self.space.dimension() as f64 / self.graph.n_vars() as f64
    }
}

/// When to stop simulating a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StopRule {
    pub min_frame_errors: Option<u64>,
    pub max_frames: Option<u64>,
}

impl StopRule {
    pub fn errors_or_cap(min_frame_errors: u64, max_frames: u64) -> Self {
        Self {
            min_frame_errors: Some(min_frame_errors),
            max_frames: Some(max_frames),
        }
    }

    pub fn frames(n: u64) -> Self {
        Self {
            min_frame_errors: None,
            max_frames: Some(n),
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        match (self.min_frame_errors, self.max_frames) {
            (None, None) => Err(SimError::NoStopBound),
            (_, Some(0)) | (Some(0), None) => Err(SimError::ZeroBudget),
            _ => Ok(()),
        }
    }
}

/// Which words are sent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Transmission {
    /// A uniformly random codeword per frame.
    #[default]
    Random,
    AllZero,
}

/// Settings shared by every point of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunSpec {
    pub scaling: LlrScaling,
    pub stop: StopRule,
    pub seed: u64,
    pub workers: usize,
    pub transmission: Transmission,
}

impl RunSpec {
    pub fn new(scaling: LlrScaling, stop: StopRule, seed: u64) -> Self {
        Self {
            scaling,
            stop,
            seed,
            workers: 1,
            transmission: Transmission::Random,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// Result of one operating point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerPoint {
    pub eb_n0_db: f64,
    pub es_n0_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    /// Relative half-width of the 95% binomial interval on `ber`; NaN
    /// without errors.
    pub ci95: f64,
    /// Spiking decoders only.
    pub spikes_per_codeword: Option<f64>,
    pub spike_rate_scnu: Option<f64>,
    pub spike_rate_lif: Option<f64>,
    pub spikes: SpikeStats,
    pub dead_band_hits: u64,
    /// `frame_errors >= 100` or the frame cap was reached.
    pub resolved: bool,
}

impl BerPoint {
    pub fn csv_row(&self, decoder: &str, code: &str, seed: u64) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.eb_n0_db,
            self.es_n0_db,
            self.frames,
            self.bit_errors,
            self.frame_errors,
            self.ber,
            self.fer,
            self.ci95,
            opt(self.spikes_per_codeword),
            opt(self.spike_rate_scnu),
            opt(self.spike_rate_lif),
            decoder,
            code,
            seed
        )
    }
}

/// CSV text for a list of points, header included.
pub fn to_csv(points: &[BerPoint], decoder: &str, code: &str, seed: u64) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(out, "{}", p.csv_row(decoder, code, seed));
    }
    out
}

#[derive(Debug, Clone, Copy, Default)]
struct FrameOutcome {
    bit_errors: u32,
    spikes: SpikeStats,
    band_hits: u64,
}

struct Worker<'g> {
    decoder: Decoder<'g>,
    x: Vec<u8>,
    y: Vec<f64>,
    llr: Vec<f64>,
}

struct FrameJob<'a> {
    code: &'a SimCode,
    point: ChannelPoint,
    spec: RunSpec,
}

impl<'g> Worker<'g> {
    fn new(code: &'g SimCode, cfg: DecoderConfig) -> Result<Self, DecodeError> {
        let n = code.graph.n_vars();
        Ok(Self {
            decoder: Decoder::new(&code.graph, cfg)?,
            x: vec![0; n],
            y: vec![0.0; n],
            llr: vec![0.0; n],
        })
    }

    fn frame(&mut self, job: &FrameJob<'_>, index: u64) -> Result<FrameOutcome, DecodeError> {
        match job.spec.transmission {
            Transmission::Random => job.code.space.sample(job.spec.seed, index, &mut self.x),
            Transmission::AllZero => self.x.iter_mut().for_each(|b| *b = 0),
        }
        transmit(&self.x, job.point.sigma2, job.spec.seed, index, &mut self.y);
        llr_scale(&self.y, job.spec.scaling, &job.point, &mut self.llr);
        let s = self.decoder.decode_in_place(&self.llr)?;
        let bit_errors = self.decoder.bits().iter().zip(&self.x).filter(|(a, b)| a != b).count() as u32;
        Ok(FrameOutcome {
            bit_errors,
            spikes: s.spikes,
            band_hits: s.dead_band_hits,
        })
    }
}

#[derive(Debug, Default)]
struct Tally {
    frames: u64,
    bit_errors: u64,
    frame_errors: u64,
    spikes: SpikeStats,
    band_hits: u64,
}

impl Tally {
    /// Adds outcomes in order; returns true once the stop rule is met.
    fn absorb(&mut self, outcomes: &[FrameOutcome], stop: &StopRule) -> bool {
        for o in outcomes {
            if self.done(stop) {
                return true;
            }
            self.frames += 1;
            self.bit_errors += u64::from(o.bit_errors);
            self.frame_errors += u64::from(o.bit_errors > 0);
            self.spikes.merge(&o.spikes);
            self.band_hits += o.band_hits;
        }
        self.done(stop)
    }

    fn done(&self, stop: &StopRule) -> bool {
        stop.min_frame_errors.is_some_and(|m| self.frame_errors >= m) || stop.max_frames.is_some_and(|m| self.frames >= m)
    }
}

const FIRST_BATCH_PER_WORKER: u64 = 16;
const MAX_BATCH_PER_WORKER: u64 = 2048;

/// Simulates one operating point, on `spec.workers` threads when the
/// `parallel` feature is on.
pub fn run_point(code: &SimCode, cfg: &DecoderConfig, point: ChannelPoint, spec: &RunSpec) -> Result<BerPoint, SimError> {
    run_point_on(code, cfg, point, spec, true)
}

/// [`run_point`] on the calling thread only. Gives the same result for any
/// `spec.workers`.
pub fn run_point_sequential(
    code: &SimCode,
    cfg: &DecoderConfig,
    point: ChannelPoint,
    spec: &RunSpec,
) -> Result<BerPoint, SimError> {
    run_point_on(code, cfg, point, spec, false)
}

fn run_point_on(
    code: &SimCode,
    cfg: &DecoderConfig,
    point: ChannelPoint,
    spec: &RunSpec,
    parallel: bool,
) -> Result<BerPoint, SimError> {
    spec.stop.validate()?;
    cfg.validate()?;
    let workers = spec.workers.max(1);
    let job = FrameJob { code, point, spec: *spec };
    let mut tally = Tally::default();
    let runner = Runner::new(workers, parallel)?;
    let decoders = if matches!(runner, Runner::Sequential) { 1 } else { workers };
    let mut pool = Vec::with_capacity(decoders);
    for _ in 0..decoders {
        pool.push(Worker::new(code, *cfg)?);
    }
    let mut next = 0u64;
    let mut batch = FIRST_BATCH_PER_WORKER * workers as u64;
    loop {
        let mut len = batch;
        if let Some(m) = spec.stop.max_frames {
            len = len.min(m - next);
        }
        let outcomes = runner.run(&mut pool, &job, next, len)?;
        next += len;
        if tally.absorb(&outcomes, &spec.stop) {
            break;
        }
        batch = (batch * 2).min(MAX_BATCH_PER_WORKER * workers as u64);
    }
    Ok(finish(code, cfg, point, spec, tally))
}

fn finish(code: &SimCode, cfg: &DecoderConfig, point: ChannelPoint, spec: &RunSpec, t: Tally) -> BerPoint {
    let n = code.graph.n_vars() as f64;
    let bits = t.frames as f64 * n;
    let ber = t.bit_errors as f64 / bits;
    let fer = t.frame_errors as f64 / t.frames as f64;
    let ci95 = if t.bit_errors == 0 {
        f64::NAN
    } else {
        1.96 * (ber * (1.0 - ber) / bits).sqrt() / ber
    };
    let spiking = cfg.rule.is_spiking();
    let resolved = t.frame_errors >= CONFIDENT_FRAME_ERRORS || spec.stop.max_frames.is_some_and(|m| t.frames >= m);
    BerPoint {
        eb_n0_db: point.eb_n0_db,
        es_n0_db: point.es_n0_db,
        frames: t.frames,
        bit_errors: t.bit_errors,
        frame_errors: t.frame_errors,
        ber,
        fer,
        ci95,
        spikes_per_codeword: spiking.then(|| t.spikes.edge_spikes as f64 / t.frames as f64),
        spike_rate_scnu: spiking.then(|| t.spikes.rate_scnu()),
        spike_rate_lif: spiking.then(|| t.spikes.rate_lif()),
        spikes: t.spikes,
        dead_band_hits: t.band_hits,
        resolved,
    }
}

enum Runner {
    Sequential,
    #[cfg(feature = "parallel")]
    Pool(rayon::ThreadPool),
}

impl Runner {
    fn new(workers: usize, parallel: bool) -> Result<Self, SimError> {
        #[cfg(feature = "parallel")]
        if parallel {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| SimError::Pool(e.to_string()))?;
            return Ok(Runner::Pool(pool));
        }
        let _ = (workers, parallel);
        Ok(Runner::Sequential)
    }

    /// Frames `start..start + len`, split into one contiguous chunk per worker.
    fn run(&self, workers: &mut [Worker<'_>], job: &FrameJob<'_>, start: u64, len: u64) -> Result<Vec<FrameOutcome>, SimError> {
        match self {
            Runner::Sequential => {
                let worker = &mut workers[0];
                (start..start + len).map(|f| worker.frame(job, f).map_err(SimError::from)).collect()
            }
            #[cfg(feature = "parallel")]
            Runner::Pool(pool) => {
                use rayon::prelude::*;
                let chunk = len.div_ceil(workers.len() as u64).max(1);
                let parts: Vec<Result<Vec<FrameOutcome>, DecodeError>> = pool.install(|| {
                    workers
                        .par_iter_mut()
                        .enumerate()
                        .map(|(w, worker)| {
                            let lo = start + (w as u64 * chunk).min(len);
                            let hi = start + ((w as u64 + 1) * chunk).min(len);
                            (lo..hi).map(|f| worker.frame(job, f)).collect()
                        })
                        .collect()
                });
                let mut out = Vec::with_capacity(len as usize);
                for p in parts {
                    out.extend(p?);
                }
                Ok(out)
            }
        }
    }
}

/// One [`run_point`] per SNR value on `axis`.
pub fn run_curve(
    code: &SimCode,
    cfg: &DecoderConfig,
    axis: SnrAxis,
    values: &[f64],
    spec: &RunSpec,
) -> Result<Vec<BerPoint>, SimError> {
    values
        .iter()
        .map(|&db| {
            let point = ChannelPoint::on_axis(axis, db, code.rate())?;
            run_point(code, cfg, point, spec)
        })
        .collect()
}

/// Decoder parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    LiTauM,
    Theta1,
    Theta2,
    AlphaNorm,
    SrGamma,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::LiTauM => "li_tau_m",
            SweepParam::Theta1 => "theta1",
            SweepParam::Theta2 => "theta2",
            SweepParam::AlphaNorm => "alpha_norm",
            SweepParam::SrGamma => "sr_gamma",
        }
    }

    /// `cfg` with this parameter set to `value`.
    pub fn apply(&self, cfg: &DecoderConfig, value: f64) -> Result<DecoderConfig, SimError> {
        let mut c = *cfg;
        match self {
            SweepParam::LiTauM if cfg.rule.uses_scnu() => c.scnu.li_tau_m = value,
            SweepParam::Theta1 if cfg.rule.uses_scnu() => c.scnu.theta1 = value,
            SweepParam::Theta2 if cfg.rule.uses_scnu() => c.scnu.theta2 = value,
            SweepParam::AlphaNorm => match cfg.rule {
                CheckRule::Normalized { .. } => c.rule = CheckRule::Normalized { alpha: value },
                _ => return Err(SimError::Sweep(format!("alpha_norm needs the nms rule, got {}", cfg.rule.name()))),
            },
            SweepParam::SrGamma => c.sr_gamma = Some(value),
            _ => {
                return Err(SimError::Sweep(format!("{} does not apply to {}", self.name(), cfg.rule.name())));
            }
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub grid: Vec<f64>,
    pub point: ChannelPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub param: SweepParam,
    pub rows: Vec<(f64, BerPoint)>,
    /// Row with the lowest BER; ties go to the earlier row.
    pub argmin: usize,
}

impl SweepTable {
    pub fn best_value(&self) -> f64 {
        self.rows[self.argmin].0
    }
}

/// One [`run_point`] per grid value at a fixed operating point.
pub fn run_sweep(code: &SimCode, base: &DecoderConfig, sweep: &SweepSpec, spec: &RunSpec) -> Result<SweepTable, SimError> {
    if sweep.grid.is_empty() {
        return Err(SimError::Sweep("empty grid".into()));
    }
    if sweep.grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(SimError::Sweep("grid must be strictly increasing".into()));
    }
    let mut rows = Vec::with_capacity(sweep.grid.len());
    for &v in &sweep.grid {
        let cfg = sweep.param.apply(base, v)?;
        rows.push((v, run_point(code, &cfg, sweep.point, spec)?));
    }
    let mut argmin = 0;
    for (k, (_, p)) in rows.iter().enumerate() {
        if p.ber < rows[argmin].1.ber {
            argmin = k;
        }
    }
    Ok(SweepTable {
        param: sweep.param,
        rows,
        argmin,
    })
}

/// Chains sweeps: each stage starts from the best value of the previous one.
pub fn line_search(
    code: &SimCode,
    start: &DecoderConfig,
    stages: &[(SweepParam, Vec<f64>)],
    point: ChannelPoint,
    spec: &RunSpec,
) -> Result<(DecoderConfig, Vec<SweepTable>), SimError> {
    let mut cfg = *start;
    let mut tables = Vec::with_capacity(stages.len());
    for (param, grid) in stages {
        let sweep = SweepSpec {
            param: *param,
            grid: grid.clone(),
            point,
        };
        let table = run_sweep(code, &cfg, &sweep, spec)?;
        cfg = param.apply(&cfg, table.best_value())?;
        tables.push(table);
    }
    Ok((cfg, tables))
}

/// Spike activity averaged over a fixed number of frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpikeReport {
    pub eb_n0_db: f64,
    pub es_n0_db: f64,
    pub frames: u64,
    /// Merged layer-1 spikes per codeword.
    pub spikes_per_codeword: f64,
    /// The same count over SCNU slots (`E * iterations`).
    pub rate_scnu: f64,
    /// All LIF spikes over all LIF slots.
    pub rate_lif: f64,
    pub lif_spikes_per_codeword: f64,
    pub combiner_spikes_per_codeword: f64,
    pub ber: f64,
}

pub fn measure_spikes(
    code: &SimCode,
    cfg: &DecoderConfig,
    point: ChannelPoint,
    scaling: LlrScaling,
    frames: u64,
    seed: u64,
    workers: usize,
) -> Result<SpikeReport, SimError> {
    if !cfg.rule.is_spiking() {
        return Err(SimError::NotSpiking(cfg.rule.name().into()));
    }
    let spec = RunSpec::new(scaling, StopRule::frames(frames), seed).with_workers(workers);
    let p = run_point(code, cfg, point, &spec)?;
    let f = p.frames as f64;
    Ok(SpikeReport {
        eb_n0_db: p.eb_n0_db,
        es_n0_db: p.es_n0_db,
        frames: p.frames,
        spikes_per_codeword: p.spikes.edge_spikes as f64 / f,
        rate_scnu: p.spikes.rate_scnu(),
        rate_lif: p.spikes.rate_lif(),
        lif_spikes_per_codeword: p.spikes.lif_spikes_total as f64 / f,
        combiner_spikes_per_codeword: p.spikes.combiner_spikes as f64 / f,
        ber: p.ber,
    })
}
