use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use num_complex::Complex;
use tscn_core::dsp::{Analyzer, StreamSynthesizer};
use tscn_core::post::pp_frame;
use tscn_core::{ModelConfig, PpConfig, PpState, StftConfig, TscnModel};

fn test_frame(seed: u32) -> Vec<Complex<f32>> {
    (0..161)
        .map(|k| {
            let a = ((k as u32 * 2654435761u32) ^ seed) as f32 / u32::MAX as f32;
            Complex::new(a - 0.5, 0.25 - a * a)
        })
        .collect()
}

fn network(c: &mut Criterion) {
    let (model, _) = TscnModel::<f32>::seeded(&ModelConfig::default(), 1).unwrap();
    let frame = test_frame(1);
    let mut stream = model.stream();
    c.bench_function("tscn frame (both stages)", |b| b.iter(|| stream.step(&frame, true).unwrap()));
    let mut stream = model.stream();
    c.bench_function("cme frame", |b| b.iter(|| stream.step(&frame, false).unwrap()));

    let cfg = PpConfig::default();
    let mut stream = model.stream();
    let mut pp = PpState::new(161);
    c.bench_function("tscn-pp frame", |b| {
        b.iter(|| {
            let out = stream.step(&frame, true).unwrap();
            pp_frame(&mut pp, &out.refined, &frame, &cfg)
        })
    });
}

fn dsp(c: &mut Criterion) {
    let cfg = StftConfig::default();
    let samples: Vec<f32> = (0..320).map(|n| (n as f32 * 0.3).sin()).collect();
    let mut analyzer = Analyzer::new(&cfg);
    c.bench_function("stft analysis frame", |b| b.iter(|| analyzer.frame(&samples)));

    let frame = test_frame(2);
    c.bench_function("overlap-add synthesis frame", |b| {
        b.iter_batched_ref(
            || StreamSynthesizer::<f32>::new(&cfg),
            |s| s.push(&frame).unwrap(),
            BatchSize::SmallInput,
        )
    });

    let pcfg = PpConfig::default();
    let noisy = test_frame(3);
    let enhanced: Vec<Complex<f32>> = noisy.iter().map(|x| x * 0.6).collect();
    let mut state = PpState::new(161);
    c.bench_function("post-processing frame", |b| b.iter(|| pp_frame(&mut state, &enhanced, &noisy, &pcfg)));
}

criterion_group!(benches, network, dsp);
criterion_main!(benches);
