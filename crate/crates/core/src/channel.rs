//! BPSK over AWGN: SNR bookkeeping, noise generation, LLR scaling.
//!
//! Noise for frame `index` is drawn from its own ChaCha8 stream keyed by the
//! run seed, so a frame's noise never depends on which worker simulates it.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Identifier of the noise generator, recorded in run metadata.
pub const NOISE_GENERATOR: &str = "chacha8(seed ^ 0x6e6f697365, stream = frame index) + box-muller";

const NOISE_KEY: u64 = 0x006e_6f69_7365;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("code rate {0} outside (0, 1]")]
    RateOutOfRange(f64),
    #[error("channel reliability must be positive and finite, got {0}")]
    BadReliability(f64),
}

/// Which SNR axis a value was specified on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrAxis {
    EbN0,
    EsN0,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `Es/N0 = Eb/N0 + 10 log10(rate)` in dB.
pub fn ebn0_to_esn0(eb_n0_db: f64, rate: f64) -> Result<f64, ChannelError> {
    check_rate(rate)?;
    Ok(eb_n0_db + 10.0 * rate.log10())
}

pub fn esn0_to_ebn0(es_n0_db: f64, rate: f64) -> Result<f64, ChannelError> {
    check_rate(rate)?;
    Ok(es_n0_db - 10.0 * rate.log10())
}

fn check_rate(rate: f64) -> Result<(), ChannelError> {
    if rate > 0.0 && rate <= 1.0 {
        Ok(())
    } else {
        Err(ChannelError::RateOutOfRange(rate))
    }
}

/// One operating point of the channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelPoint {
    pub es_n0_db: f64,
    pub eb_n0_db: f64,
    pub rate: f64,
    /// Noise variance per real dimension, `1 / (2 Es/N0)`.
    pub sigma2: f64,
}

impl ChannelPoint {
    pub fn from_ebn0(eb_n0_db: f64, rate: f64) -> Result<Self, ChannelError> {
        let es_n0_db = ebn0_to_esn0(eb_n0_db, rate)?;
        Ok(Self::build(es_n0_db, eb_n0_db, rate))
    }

    pub fn from_esn0(es_n0_db: f64, rate: f64) -> Result<Self, ChannelError> {
        let eb_n0_db = esn0_to_ebn0(es_n0_db, rate)?;
        Ok(Self::build(es_n0_db, eb_n0_db, rate))
    }

    pub fn on_axis(axis: SnrAxis, db: f64, rate: f64) -> Result<Self, ChannelError> {
        match axis {
            SnrAxis::EbN0 => Self::from_ebn0(db, rate),
            SnrAxis::EsN0 => Self::from_esn0(db, rate),
        }
    }

    /// A channel with no noise at all.
    pub fn noiseless(rate: f64) -> Result<Self, ChannelError> {
        check_rate(rate)?;
        Ok(Self {
            es_n0_db: f64::INFINITY,
            eb_n0_db: f64::INFINITY,
            rate,
            sigma2: 0.0,
        })
    }

    fn build(es_n0_db: f64, eb_n0_db: f64, rate: f64) -> Self {
        Self {
            es_n0_db,
            eb_n0_db,
            rate,
            sigma2: 1.0 / (2.0 * db_to_linear(es_n0_db)),
        }
    }

    /// Channel reliability `4 Es/N0 = 2 / sigma^2` matched to this point.
    pub fn matched_lc(&self) -> f64 {
        4.0 * db_to_linear(self.es_n0_db)
    }
}

/// How received values are turned into LLRs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LlrScaling {
    /// `L_c` recomputed per point as `4 Es/N0`.
    Matched,
    /// `L_c` held constant regardless of the channel.
    Fixed { lc: f64 },
}

impl LlrScaling {
    /// Fixed reliability equal to the matched value at `es_n0_db`.
    pub fn fixed_at_esn0(es_n0_db: f64) -> Self {
        Self::Fixed {
            lc: 4.0 * db_to_linear(es_n0_db),
        }
    }

    pub fn fixed(lc: f64) -> Result<Self, ChannelError> {
        if lc.is_finite() && lc > 0.0 {
            Ok(Self::Fixed { lc })
        } else {
            Err(ChannelError::BadReliability(lc))
        }
    }

    pub fn lc(&self, point: &ChannelPoint) -> f64 {
        match *self {
            LlrScaling::Matched => point.matched_lc(),
            LlrScaling::Fixed { lc } => lc,
        }
    }
}

/// `L_i = y_i * L_c`.
pub fn llr_scale(y: &[f64], scaling: LlrScaling, point: &ChannelPoint, out: &mut [f64]) {
    let lc = scaling.lc(point);
    for (o, &v) in out.iter_mut().zip(y) {
        *o = v * lc;
    }
}

#[inline]
fn unit_open_closed(x: u64) -> f64 {
    // (0, 1]
    1.0 - (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn unit_closed_open(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Fills `out` with i.i.d. standard normal draws (Box-Muller on pairs).
pub fn standard_normals<R: RngCore>(rng: &mut R, out: &mut [f64]) {
    let mut chunks = out.chunks_exact_mut(2);
    for pair in &mut chunks {
        let (a, b) = box_muller(rng);
        pair[0] = a;
        pair[1] = b;
    }
    if let [last] = chunks.into_remainder() {
        *last = box_muller(rng).0;
    }
}

#[inline]
fn box_muller<R: RngCore>(rng: &mut R) -> (f64, f64) {
    let u1 = unit_open_closed(rng.next_u64());
    let u2 = unit_closed_open(rng.next_u64());
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    (r * c, r * s)
}

/// Noise generator for frame `index` of the run keyed by `seed`.
pub fn noise_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ NOISE_KEY);
    rng.set_stream(index);
    rng
}

/// BPSK + AWGN: `y_i = (-1)^{x_i} + n_i` with `n_i ~ N(0, sigma2)`.
///
/// `y` doubles as scratch for the unit normals.
pub fn transmit(x: &[u8], sigma2: f64, seed: u64, index: u64, y: &mut [f64]) {
    let sigma = sigma2.max(0.0).sqrt();
    if sigma > 0.0 {
        let mut rng = noise_rng(seed, index);
        standard_normals(&mut rng, y);
    } else {
        y.iter_mut().for_each(|v| *v = 0.0);
    }
    for (v, &b) in y.iter_mut().zip(x) {
        let s = if b & 1 == 0 { 1.0 } else { -1.0 };
        *v = s + sigma * *v;
    }
}
