//! Results are a function of the seed alone: the execution strategy and the
//! size of the worker pool must not change a single bit.

#![cfg(feature = "parallel")]

mod common;

use std::sync::Arc;

use common::*;
use spinboson::ensemble::{spin_factor, EnsembleConfig, TiltedEnsemble};
use spinboson::exec::Execution;
use spinboson::kernels::{FunctionKernel, KernelConfig, ThermalKernelTable};
use spinboson::momentum::TestFunction;
use spinboson::resolvent::{resolvent_onepoint, ResolventConfig};
use spinboson::spin::{oracle_checks, SpinMeasureParams};

#[derive(Debug, PartialEq)]
struct Fingerprint {
    kappa: Vec<u64>,
    log_w: Vec<u64>,
    spin: [u64; 3],
    resolvent: [u64; 2],
    oracles: Vec<u64>,
}

fn run(exec: Execution) -> Fingerprint {
    let kc = KernelConfig {
        nodes: 256,
        exec,
        ..KernelConfig::default()
    };
    let table = Arc::new(ThermalKernelTable::build(1.0, &gaussian_source(), &kc).unwrap());
    let params = SpinMeasureParams::new(1.0, 1.0).unwrap();
    let cfg = EnsembleConfig {
        samples: 20_000,
        seed: 42,
        chunk_size: 1000,
        exec,
    };
    let ens = TiltedEnsemble::build(params, table.clone(), &cfg).unwrap();
    let f = TestFunction::gaussian(3, 1.0).unwrap();
    let fk = FunctionKernel::build(&table, &f, &kc).unwrap();
    let s = spin_factor(&ens, &fk, 0.0).unwrap();
    let st = spinboson::state::EquilibriumState::build(
        spinboson::state::ModelParams::new(1.0, 1.0, 0.01, gaussian_source()).unwrap(),
        numerics(20_000, 42, exec),
    )
    .unwrap();
    let r = resolvent_onepoint(&st, 1.0, &f, &ResolventConfig::default()).unwrap();
    let oracles = oracle_checks(&params, &[0.1, 0.5], 20_000, 42, exec).unwrap();
    Fingerprint {
        kappa: table.psi_values().iter().map(|v| v.to_bits()).collect(),
        log_w: ens.samples().iter().map(|l| l.log_w.to_bits()).collect(),
        spin: [s.value.re.to_bits(), s.value.im.to_bits(), s.std_error.to_bits()],
        resolvent: [r.value.im.to_bits(), r.mc_error.to_bits()],
        oracles: oracles
            .iter()
            .flat_map(|c| [c.estimate.to_bits(), c.std_error.to_bits()])
            .collect(),
    }
}

fn in_pool(threads: usize) -> Fingerprint {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(|| run(Execution::Parallel))
}

#[test]
fn sequential_and_parallel_agree_bitwise() {
    assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
}

#[test]
fn pool_size_does_not_matter() {
    let one = in_pool(1);
    assert_eq!(one, in_pool(3));
    assert_eq!(one, in_pool(8));
}

#[test]
fn seeds_select_distinct_streams() {
    let params = SpinMeasureParams::new(1.0, 1.0).unwrap();
    let a = oracle_checks(&params, &[0.5], 5000, 1, Execution::Sequential).unwrap();
    let b = oracle_checks(&params, &[0.5], 5000, 2, Execution::Sequential).unwrap();
    assert_ne!(a[0].estimate, b[0].estimate);
}
