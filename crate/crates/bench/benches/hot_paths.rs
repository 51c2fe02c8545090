use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qpuf_core::adversary::{AdversarySpec, ForgingExperiment};
use qpuf_core::dynamics::{default_time, make_evolution};
use qpuf_core::ensembles::{sample_gue, sample_haar_unitary, EnsembleConfig};
use qpuf_core::probes::{probe_curve, ProbeKind, ProbeSpec};
use qpuf_core::protocol::{run_protocol, HonestProver, ProtocolConfig, Scheme};
use qpuf_core::spectral::{diagonalize, spectral_form_factor};
use qpuf_core::state::SwapRule;

fn bench_sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sampling");
    for dim in [64usize, 128, 256] {
        group.bench_with_input(BenchmarkId::new("gue_diagonalize", dim), &dim, |b, &dim| {
            let mut seed = 0u64;
            b.iter(|| {
                seed += 1;
                diagonalize(&sample_gue(dim, seed).unwrap()).unwrap()
            })
        });
        group.bench_with_input(BenchmarkId::new("haar_unitary", dim), &dim, |b, &dim| {
            let mut seed = 0u64;
            b.iter(|| {
                seed += 1;
                sample_haar_unitary(dim, seed).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_sff(c: &mut Criterion) {
    let times: Vec<f64> = (0..50).map(|i| 2.0 * i as f64).collect();
    c.bench_function("sff_gue_d64_20_samples", |b| {
        b.iter(|| spectral_form_factor(&EnsembleConfig::Gue { dim: 64 }, &times, 20, 1).unwrap())
    });
}

fn bench_protocol(c: &mut Criterion) {
    let dim = 32;
    let h = sample_gue(dim, 7).unwrap();
    let qpuf = make_evolution(&h, default_time(dim)).unwrap();
    c.bench_function("protocol_mb_honest_d32_m4", |b| {
        let cfg = ProtocolConfig::new(dim, 4, 1, default_time(dim), 9);
        b.iter(|| {
            let mut prover = HonestProver::new(&qpuf);
            run_protocol(Scheme::Mb, &qpuf, &mut prover, &cfg).unwrap()
        })
    });
    c.bench_function("forging_subspace_d16_50_runs", |b| {
        b.iter(|| {
            ForgingExperiment {
                scheme: Scheme::Mb,
                ensemble: EnsembleConfig::Gue { dim: 16 },
                adversary: AdversarySpec::Subspace { queries: 4 },
                trials: 4,
                rounds: 1,
                time: default_time(16),
                swap_rule: SwapRule::Physical,
                mc_samples: 50,
                seed: 11,
            }
            .run()
            .unwrap()
        })
    });
}

fn bench_probes(c: &mut Criterion) {
    c.bench_function("otoc_gue_n4_8_samples", |b| {
        b.iter(|| {
            probe_curve(&ProbeSpec {
                kind: ProbeKind::Otoc,
                ensemble: EnsembleConfig::Gue { dim: 16 },
                times: vec![0.0, 10.0, 20.0, 30.0],
                samples: 8,
                seed: 13,
            })
            .unwrap()
        })
    });
}

criterion_group!(benches, bench_sampling, bench_sff, bench_protocol, bench_probes);
criterion_main!(benches);
