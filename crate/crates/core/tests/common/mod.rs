#![allow(dead_code)]

use spinboson::ensemble::EnsembleConfig;
use spinboson::exec::Execution;
use spinboson::kernels::KernelConfig;
use spinboson::momentum::{Dispersion, RadialProfile, SourceProfile};
use spinboson::state::{EquilibriumState, ModelParams, Numerics};

/// Composite Simpson on `[a, b]` with `2n` subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let m = 2 * n;
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

pub fn simpson_weights(m: usize) -> Vec<f64> {
    (0..=m)
        .map(|i| if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 })
        .collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn disp3() -> Dispersion {
    Dispersion::new(3, 1.0).unwrap()
}

pub fn gaussian_source() -> SourceProfile {
    SourceProfile::new(RadialProfile::gaussian(1.0), disp3()).unwrap()
}

pub fn numerics(samples: usize, seed: u64, exec: Execution) -> Numerics {
    Numerics {
        kernel: KernelConfig {
            nodes: 512,
            exec,
            ..KernelConfig::default()
        },
        ensemble: EnsembleConfig {
            samples,
            seed,
            chunk_size: 4096,
            exec,
        },
    }
}

pub fn state(beta: f64, epsilon: f64, n0: f64, source: SourceProfile, samples: usize) -> EquilibriumState {
    let params = ModelParams::new(beta, epsilon, n0, source).unwrap();
    EquilibriumState::build(params, numerics(samples, 7, Execution::default())).unwrap()
}
