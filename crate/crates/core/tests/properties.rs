//! Structural invariants, checked over random inputs.

mod common;

use std::sync::{Arc, OnceLock};

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spinboson::ensemble::{log_weight, spin_factor, z_value, EnsembleConfig, TiltedEnsemble};
use spinboson::exec::Execution;
use spinboson::kernels::{FunctionKernel, KernelConfig, ThermalKernelTable};
use spinboson::momentum::{RadialProfile, SourceProfile, TestFunction};
use spinboson::resolvent::{resolvent_from_scaled, ResolventConfig};
use spinboson::spin::{sample_loop, transition_prob, SpinLoop, SpinMeasureParams};
use spinboson::state::EquilibriumState;

const BETA: f64 = 1.5;

fn kernel_cfg() -> KernelConfig {
    KernelConfig {
        nodes: 512,
        ..KernelConfig::default()
    }
}

fn table() -> &'static ThermalKernelTable {
    static T: OnceLock<ThermalKernelTable> = OnceLock::new();
    T.get_or_init(|| ThermalKernelTable::build(BETA, &gaussian_source(), &kernel_cfg()).unwrap())
}

fn test_functions() -> (TestFunction, TestFunction) {
    let f = TestFunction::gaussian(3, 1.0).unwrap();
    let g = TestFunction::from_profile(3, RadialProfile::gaussian(0.6)).unwrap();
    (f, g)
}

fn kernels() -> &'static (FunctionKernel, FunctionKernel) {
    static K: OnceLock<(FunctionKernel, FunctionKernel)> = OnceLock::new();
    K.get_or_init(|| {
        let (f, g) = test_functions();
        (
            FunctionKernel::build(table(), &f, &kernel_cfg()).unwrap(),
            FunctionKernel::build(table(), &g, &kernel_cfg()).unwrap(),
        )
    })
}

fn random_loop(seed: u64, epsilon: f64) -> SpinLoop {
    let params = SpinMeasureParams::new(BETA, epsilon).unwrap();
    sample_loop(&params, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn shared_state() -> &'static EquilibriumState {
    static S: OnceLock<EquilibriumState> = OnceLock::new();
    S.get_or_init(|| state(1.0, 1.0, 0.02, gaussian_source(), 20_000))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn z_is_linear_in_the_test_function(seed in any::<u64>(), eps in 0.2f64..3.0, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let (f, g) = test_functions();
        let h = f.scaled_real(a).plus(&g.scaled_real(b)).unwrap();
        let kh = FunctionKernel::build(table(), &h, &kernel_cfg()).unwrap();
        let (kf, kg) = kernels();
        let path = random_loop(seed, eps);
        let lhs = z_value(&path, &kh, 0.0);
        let rhs = z_value(&path, kf, 0.0) * a + z_value(&path, kg, 0.0) * b;
        prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()), "{lhs} vs {rhs}");
    }

    #[test]
    fn log_weight_is_rotation_and_reflection_invariant(seed in any::<u64>(), eps in 0.2f64..3.0, shift in -3.0f64..3.0) {
        let path = random_loop(seed, eps);
        let w = log_weight(&path, table());
        let rotated = log_weight(&path.rotated(shift), table());
        let reflected = log_weight(&path.reflected(), table());
        prop_assert!((w - rotated).abs() <= 1e-9 * (1.0 + w.abs()), "{w} vs {rotated}");
        prop_assert!((w - reflected).abs() <= 1e-9 * (1.0 + w.abs()), "{w} vs {reflected}");
    }

    #[test]
    fn interval_integrals_are_additive(t in -0.7f64..0.7, a in -0.75f64..0.0, mid in 0.0f64..0.3, b in 0.3f64..0.75) {
        let (kf, _) = kernels();
        let whole = kf.interval_integral(t, a, b);
        let split = kf.interval_integral(t, a, mid) + kf.interval_integral(t, mid, b);
        prop_assert!((whole - split).norm() <= 1e-12 * (1.0 + whole.norm()));
    }

    #[test]
    fn double_blocks_are_additive(a in -0.75f64..0.0, b in 0.0f64..0.75, c in -0.75f64..-0.2, mid in -0.2f64..0.2, d in 0.2f64..0.75) {
        let t = table();
        let whole = t.double_block(a, b, c, d);
        let split = t.double_block(a, b, c, mid) + t.double_block(a, b, mid, d);
        prop_assert!((whole - split).abs() <= 1e-12 * (1.0 + whole.abs()));
        prop_assert!((t.double_block(a, b, c, d) - t.double_block(c, d, a, b)).abs() <= 1e-12 * (1.0 + whole.abs()));
    }

    #[test]
    fn transition_kernel_is_a_semigroup(eps in 0.0f64..4.0, t1 in 0.0f64..2.0, t2 in 0.0f64..2.0, s1 in prop::bool::ANY, s2 in prop::bool::ANY) {
        let sign = |b: bool| if b { 1i8 } else { -1i8 };
        let (a, c) = (sign(s1), sign(s2));
        let composed: f64 = [-1i8, 1].iter().map(|&m| transition_prob(eps, t1, a, m) * transition_prob(eps, t2, m, c)).sum();
        prop_assert!((composed - transition_prob(eps, t1 + t2, a, c)).abs() <= 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn resolvent_star_and_scaling(lambda in 0.2f64..4.0, nu in 0.3f64..3.0) {
        let st = shared_state();
        let (f, _) = test_functions();
        let cfg = ResolventConfig::default();
        let sc = st.scaled(&f).unwrap();
        let plus = resolvent_from_scaled(&sc, lambda, &cfg).unwrap();
        let minus = resolvent_from_scaled(&sc, -lambda, &cfg).unwrap();
        prop_assert!((plus.value - minus.value.conj()).norm() <= plus.error() + minus.error() + 1e-12);
        prop_assert!(plus.value.norm() <= 1.0 / lambda + plus.error());
        let scaled = resolvent_from_scaled(&st.scaled(&f.scaled_real(nu)).unwrap(), nu * lambda, &cfg).unwrap();
        let lhs = scaled.value * nu;
        prop_assert!((lhs - plus.value).norm() <= nu * scaled.error() + plus.error() + 1e-10, "{lhs} vs {}", plus.value);
    }

    #[test]
    fn spin_factor_modulus_is_bounded(width in 0.3f64..2.5, eps in 0.1f64..3.0, beta in 0.3f64..3.0, amp in 0.1f64..2.0, seed in any::<u64>()) {
        let src = SourceProfile::new(RadialProfile::gaussian(1.0).with_amplitude(amp), disp3()).unwrap();
        let cfg = KernelConfig { nodes: 256, ..KernelConfig::default() };
        let table = Arc::new(ThermalKernelTable::build(beta, &src, &cfg).unwrap());
        let params = SpinMeasureParams::new(beta, eps).unwrap();
        let ens = TiltedEnsemble::build(params, table.clone(), &EnsembleConfig { samples: 4000, seed, chunk_size: 1024, exec: Execution::default() }).unwrap();
        let f = TestFunction::from_profile(3, RadialProfile::gaussian(width)).unwrap();
        let fk = FunctionKernel::build(&table, &f, &cfg).unwrap();
        let s = spin_factor(&ens, &fk, 0.0).unwrap();
        prop_assert!(s.value.norm() <= 1.0 + 3.0 * s.std_error, "{s:?}");
        prop_assert!(s.value.im.abs() <= 1e-12 || s.value.im.abs() <= 3.0 * s.std_error);
    }
}
