//! End-to-end runs through the public API on small codes.

use snnbp::channel::{ChannelPoint, LlrScaling, SnrAxis};
use snnbp::code::{parse_alist, serialize_alist, TannerGraph};
use snnbp::decoder::{CheckRule, DecoderConfig};
use snnbp::fgcodes::{line_incidence, Geometry};
use snnbp::sim::{measure_spikes, run_curve, run_point, to_csv, RunSpec, SimCode, StopRule, Transmission};

fn code(geometry: Geometry, s: u32) -> SimCode {
    let g = TannerGraph::circulant(&line_incidence(geometry, s).unwrap()).unwrap();
    // Go through the file format to exercise the same path as the CLI.
    let g = parse_alist(&serialize_alist(&g)).unwrap();
    SimCode::new(g, format!("{geometry:?}-{s}"))
}

fn spec(frames: u64, seed: u64) -> RunSpec {
    RunSpec::new(LlrScaling::Matched, StopRule::frames(frames), seed)
}

#[test]
fn every_decoder_clears_a_quiet_channel() {
    let c = code(Geometry::Projective, 3);
    let point = ChannelPoint::from_ebn0(9.0, c.rate()).unwrap();
    for rule in [
        CheckRule::Spa,
        CheckRule::MinSum,
        CheckRule::Normalized { alpha: 0.8 },
        CheckRule::Offset { beta: 0.5 },
        CheckRule::DdBmp,
        CheckRule::Elena,
        CheckRule::ElenaStar,
    ] {
        let p = run_point(&c, &DecoderConfig::new(rule), point, &spec(300, 1)).unwrap();
        assert_eq!(p.bit_errors, 0, "{}", rule.name());
    }
}

#[test]
fn ber_falls_with_snr() {
    let c = code(Geometry::Projective, 3);
    let points = run_curve(&c, &DecoderConfig::new(CheckRule::Spa), SnrAxis::EbN0, &[0.0, 2.0, 4.0], &spec(3000, 2)).unwrap();
    assert!(points[0].ber > points[1].ber && points[1].ber > points[2].ber);
    let csv = to_csv(&points, "spa", &c.name, 2);
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn spa_beats_min_sum_on_pg73() {
    let c = code(Geometry::Projective, 3);
    let point = ChannelPoint::from_ebn0(2.5, c.rate()).unwrap();
    let run = |rule| run_point(&c, &DecoderConfig::new(rule), point, &spec(20_000, 3)).unwrap().ber;
    assert!(run(CheckRule::Spa) < run(CheckRule::MinSum));
}

#[test]
fn all_zero_and_random_codewords_agree_statistically() {
    let c = code(Geometry::Euclidean, 3);
    let point = ChannelPoint::from_ebn0(3.0, c.rate()).unwrap();
    let mut zero = spec(4000, 4);
    zero.transmission = Transmission::AllZero;
    let cfg = DecoderConfig::new(CheckRule::MinSum);
    let a = run_point(&c, &cfg, point, &zero).unwrap();
    let b = run_point(&c, &cfg, point, &spec(4000, 4)).unwrap();
    // Equal in distribution only: flipping the codeword does not flip the noise.
    let (fa, fb) = (a.frame_errors as f64, b.frame_errors as f64);
    assert!(fa > 50.0 && fb > 50.0, "{fa} {fb}");
    assert!((fa - fb).abs() <= 4.0 * (fa + fb).sqrt(), "{fa} vs {fb}");
}

#[test]
fn spiking_activity_falls_with_snr() {
    let c = code(Geometry::Projective, 3);
    let cfg = DecoderConfig::new(CheckRule::Elena);
    let fixed = LlrScaling::fixed_at_esn0(3.5);
    let at = |db| {
        let p = ChannelPoint::from_ebn0(db, c.rate()).unwrap();
        measure_spikes(&c, &cfg, p, fixed, 500, 5, 2).unwrap()
    };
    let (low, high) = (at(0.0), at(5.0));
    assert!(low.spikes_per_codeword > high.spikes_per_codeword);
    assert!(low.rate_scnu > high.rate_scnu && high.rate_scnu >= 0.0 && low.rate_scnu <= 1.0);
    assert!(low.rate_lif > 0.0 && low.rate_lif <= 1.0);
}
