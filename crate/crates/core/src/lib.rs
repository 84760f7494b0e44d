//! Belief-propagation decoding of finite-geometry LDPC codes with spiking
//! check-node units, benchmark decoders, and a reproducible Monte Carlo
//! harness.
//!
//! * [`fgcodes`]: GF(2^m) arithmetic and line incidence vectors of PG(2, 2^s)
//!   and EG(2, 2^s).
//! * [`code`]: Tanner graphs, alist I/O, GF(2) rank and codeword sampling.
//! * [`channel`]: BPSK over AWGN and LLR scaling.
//! * [`neuron`], [`scnu`]: LIF/LI neurons and the spiking check units.
//! * [`decoder`]: flooding message passing with pluggable check rules.
//! * [`sim`]: BER/FER curves, parameter sweeps, spike counting.

pub mod channel;
pub mod code;
pub mod decoder;
pub mod fgcodes;
pub mod neuron;
pub mod scnu;
pub mod sim;
