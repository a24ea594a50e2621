use agethresh_core::sim::{AttemptSampling, EstimatorParams, PolicyKind, SimConfig, Simulator};
use agethresh_core::AsymptoticParams;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

const SLOTS: u64 = 10_000;

fn run(policy: PolicyKind, n: usize, sampling: AttemptSampling) -> u64 {
    let config = SimConfig::new(SLOTS, 1).warmup(0).sampling(sampling);
    let mut sim = Simulator::new(policy, n, &config).unwrap();
    for _ in 0..SLOTS {
        sim.step();
    }
    sim.slot()
}

fn steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("steps");
    group.throughput(Throughput::Elements(SLOTS));
    for n in [100usize, 1_000] {
        let p = AsymptoticParams {
            r: 2.21,
            alpha: 4.69,
        }
        .to_policy(n);
        let cases = [
            (
                "threshold-clock",
                PolicyKind::threshold(p.gamma, p.tau),
                AttemptSampling::Clock,
            ),
            (
                "threshold-per-slot",
                PolicyKind::threshold(p.gamma, p.tau),
                AttemptSampling::PerSlot,
            ),
            (
                "slotted-clock",
                PolicyKind::slotted(1.0 / n as f64),
                AttemptSampling::Clock,
            ),
            (
                "stabilized",
                PolicyKind::stabilized(p.gamma, EstimatorParams::default()),
                AttemptSampling::PerSlot,
            ),
        ];
        for (name, policy, sampling) in cases {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| run(policy, n, sampling))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, steps);
criterion_main!(benches);
