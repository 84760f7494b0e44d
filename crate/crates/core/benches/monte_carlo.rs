use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use snnbp::channel::{ChannelPoint, LlrScaling};
use snnbp::code::TannerGraph;
use snnbp::decoder::{CheckRule, DecoderConfig};
use snnbp::fgcodes::{line_incidence, Geometry};
use snnbp::sim::{run_point, run_point_sequential, RunSpec, SimCode, StopRule};

fn sequential_vs_parallel(c: &mut Criterion) {
    let graph = TannerGraph::circulant(&line_incidence(Geometry::Projective, 4).unwrap()).unwrap();
    let code = SimCode::new(graph, "pg2-s4");
    let point = ChannelPoint::from_ebn0(2.5, code.rate()).unwrap();
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let spec = RunSpec::new(LlrScaling::fixed_at_esn0(3.5), StopRule::frames(256), 1).with_workers(workers);

    let mut group = c.benchmark_group("c1_256_frames");
    group.sample_size(10);
    for rule in [CheckRule::Spa, CheckRule::Elena] {
        let cfg = DecoderConfig::new(rule);
        group.bench_with_input(BenchmarkId::new("sequential", rule.name()), &cfg, |b, cfg| {
            b.iter(|| run_point_sequential(&code, cfg, point, &spec).unwrap())
        });
        group.bench_with_input(BenchmarkId::new(format!("parallel_{workers}"), rule.name()), &cfg, |b, cfg| {
            b.iter(|| run_point(&code, cfg, point, &spec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sequential_vs_parallel);
criterion_main!(benches);
