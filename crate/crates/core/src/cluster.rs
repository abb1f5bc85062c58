//! Time and space cluster criteria, moderateness, the no-go verdict and the
//! classical-limit scan.
//!
//! Clustering in the direction pair `(f, g)` holds iff
//! `S(f + Tg) / (S(f) S(g)) → exp(½ Re q₀(f,g))`; moderateness is the
//! statement that the same ratio tends to 1. Both limits are read off at
//! the last grid rung with 3-SE discrimination.

use num_complex::Complex64;

use crate::ensemble::{Estimate, TiltedEnsemble};
use crate::error::{invalid, Result};
use crate::state::{EquilibriumState, Transport};
use crate::momentum::TestFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterMode {
    Time,
    /// Translation along the first coordinate axis.
    Space,
}

impl ClusterMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClusterMode::Time => "time",
            ClusterMode::Space => "space",
        }
    }

    fn transport(&self, r: f64) -> Transport {
        match self {
            ClusterMode::Time => Transport::Time(r),
            ClusterMode::Space => Transport::Space([r, 0.0, 0.0]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterVerdict {
    Moderate,
    ClusterWithZeroMode,
    Neither,
    Inconclusive,
}

impl ClusterVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClusterVerdict::Moderate => "moderate",
            ClusterVerdict::ClusterWithZeroMode => "cluster_with_zero_mode",
            ClusterVerdict::Neither => "neither",
            ClusterVerdict::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for ClusterVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `u ∈ {1, 2, 4, …, 128}`.
pub fn default_grid() -> Vec<f64> {
    (0..8).map(|k| f64::from(1u32 << k)).collect()
}

/// Cross terms must fall below this fraction of their untransported value.
pub const CROSS_TERM_FLOOR: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterReport {
    pub mode: ClusterMode,
    pub grid: Vec<f64>,
    pub lhs: Vec<Estimate<Complex64>>,
    /// `ψ(W(f)) · ψ(W(g))`
    pub product: Estimate<Complex64>,
    /// `exp(½ Re q₀(f,g))`
    pub zero_mode_factor: f64,
    /// `Re q_{≠0}(f, g)` before transport.
    pub cross_term_origin: f64,
    /// `Re q_{≠0}(f, Tg)` per rung.
    pub cross_term: Vec<f64>,
    /// `S(f+Tg) / (S(f) S(g))` per rung.
    pub spin_ratio: Vec<Estimate<Complex64>>,
    pub cross_floor_reached: bool,
    pub verdict: ClusterVerdict,
}

struct SpinColumns {
    values: Vec<Complex64>,
}

fn phases(ens: &TiltedEnsemble, z: &[Complex64]) -> SpinColumns {
    let minus_i = Complex64::new(0.0, -1.0);
    SpinColumns {
        values: ens.exec().map_slice(z, |v| (minus_i * v).exp()),
    }
}

/// `E~[a] / (E~[b] E~[c])` with a delta-method standard error.
fn ratio_estimate(ens: &TiltedEnsemble, a: &SpinColumns, b: &SpinColumns, c: &SpinColumns) -> Estimate<Complex64> {
    let ma = ens.weighted_mean(|i| a.values[i]).value;
    let mb = ens.weighted_mean(|i| b.values[i]).value;
    let mc = ens.weighted_mean(|i| c.values[i]).value;
    let r = ma / (mb * mc);
    let w = ens.weights();
    let (sum_w, _) = ens.sum_w();
    let mut acc = 0.0;
    // influence function of the ratio, linearized about the three means
    for (i, wi) in w.iter().enumerate() {
        let psi = (a.values[i] - ma) / (mb * mc) - r * (b.values[i] - mb) / mb - r * (c.values[i] - mc) / mc;
        acc += wi * wi * psi.norm_sqr();
    }
    Estimate {
        value: r,
        std_error: acc.sqrt() / sum_w,
        ess: ens.ess(),
    }
}

fn unit_ratio() -> Estimate<Complex64> {
    Estimate {
        value: Complex64::new(1.0, 0.0),
        std_error: 0.0,
        ess: f64::NAN,
    }
}

pub fn cluster_scan(
    state: &EquilibriumState,
    f: &TestFunction,
    g: &TestFunction,
    mode: ClusterMode,
    grid: &[f64],
) -> Result<ClusterReport> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("grid", "must be non-empty and strictly increasing"));
    }
    if mode == ClusterMode::Space && f.dim() != 3 {
        return Err(invalid("mode", "spatial clustering is implemented for d = 3"));
    }
    let cf = state.charfun(f, 0.0)?;
    let cg = state.charfun(g, 0.0)?;
    let product = Estimate {
        value: cf.value * cg.value,
        std_error: cf.std_error * cg.value.norm() + cg.std_error * cf.value.norm(),
        ess: cf.ess,
    };
    let q0_fg = state.q_zero(f, g)?.re;
    let zero_mode_factor = (0.5 * q0_fg).exp();
    let cross_term_origin = state.q_nonzero(f, g)?.re;

    let trivial_spin = state.params().source.is_zero();
    let ens = state.ensemble().clone();
    let (col_f, col_g) = if trivial_spin {
        (None, None)
    } else {
        let zf = ens.z_column(&state.function_kernel(f)?, 0.0);
        let zg = ens.z_column(&state.function_kernel(g)?, 0.0);
        (Some(phases(&ens, &zf)), Some(phases(&ens, &zg)))
    };

    let rungs: Vec<Result<(Estimate<Complex64>, f64, Estimate<Complex64>)>> = ens.exec().map(grid.len(), |k| {
        let r = grid[k];
        let moved = state.transport(g, mode.transport(r))?;
        let lhs = state.two_point_charfun(f, g, mode.transport(r), false)?;
        let cross = state.q_nonzero(f, &moved)?.re;
        let ratio = match (&col_f, &col_g) {
            (Some(bf), Some(cg)) => {
                let h = f.plus(&moved)?;
                let zh = ens.z_column(&state.function_kernel(&h)?, 0.0);
                ratio_estimate(&ens, &phases(&ens, &zh), bf, cg)
            }
            _ => unit_ratio(),
        };
        Ok((lhs, cross, ratio))
    });
    let mut lhs = Vec::with_capacity(grid.len());
    let mut cross_term = Vec::with_capacity(grid.len());
    let mut spin_ratio = Vec::with_capacity(grid.len());
    for rung in rungs {
        let (l, c, s) = rung?;
        lhs.push(l);
        cross_term.push(c);
        spin_ratio.push(s);
    }
    let last_cross = *cross_term.last().expect("non-empty grid");
    let cross_floor_reached = last_cross.abs() <= CROSS_TERM_FLOOR * cross_term_origin.abs() || last_cross.abs() < 1e-12;
    if !cross_floor_reached {
        log::warn!(
            "cross term {last_cross:e} at {} = {} has not fallen below {CROSS_TERM_FLOOR} of {cross_term_origin:e}",
            if mode == ClusterMode::Time { "u" } else { "|x|" },
            grid[grid.len() - 1]
        );
    }
    let verdict = decide(*spin_ratio.last().expect("non-empty grid"), zero_mode_factor, cross_floor_reached);
    Ok(ClusterReport {
        mode,
        grid: grid.to_vec(),
        lhs,
        product,
        zero_mode_factor,
        cross_term_origin,
        cross_term,
        spin_ratio,
        cross_floor_reached,
        verdict,
    })
}

fn decide(last: Estimate<Complex64>, zero_mode_factor: f64, cross_floor_reached: bool) -> ClusterVerdict {
    if !cross_floor_reached {
        return ClusterVerdict::Inconclusive;
    }
    let tol = 1e-9;
    let allowance = 3.0 * last.std_error + tol;
    let gap = (zero_mode_factor - 1.0).abs();
    if gap > tol && last.std_error > 0.5 * gap {
        return ClusterVerdict::Inconclusive;
    }
    let one = Complex64::new(1.0, 0.0);
    if (last.value - one).norm() <= allowance {
        ClusterVerdict::Moderate
    } else if (last.value - zero_mode_factor).norm() <= allowance {
        ClusterVerdict::ClusterWithZeroMode
    } else {
        ClusterVerdict::Neither
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoGoStatus {
    /// Moderateness together with a condensate direction: the two-point
    /// functional fails to factorize by `gap`.
    Contradiction {
        gap: f64,
        observed_gap: f64,
        observed_se: f64,
    },
    Consistent {
        bec_empty: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoGoRecord {
    pub q0_f: f64,
    pub q0_g: f64,
    pub q0_fg: f64,
    pub verdict: ClusterVerdict,
    pub status: NoGoStatus,
}

pub fn nogo_verdict(state: &EquilibriumState, f: &TestFunction, g: &TestFunction, report: &ClusterReport) -> Result<NoGoRecord> {
    let tol = 1e-12;
    let q0_f = state.q_zero(f, f)?.re;
    let q0_g = state.q_zero(g, g)?.re;
    let q0_fg = state.q_zero(f, g)?.re;
    let bec_empty = q0_f <= tol && q0_g <= tol;
    let status = if report.verdict == ClusterVerdict::Moderate && q0_f > tol && q0_fg.abs() > tol {
        let last = report.spin_ratio.last().expect("non-empty grid");
        let zmf = (0.5 * q0_fg).exp();
        let r = last.value.norm();
        NoGoStatus::Contradiction {
            gap: zmf - 1.0,
            observed_gap: zmf / r - 1.0,
            observed_se: zmf * last.std_error / (r * r),
        }
    } else {
        NoGoStatus::Consistent { bec_empty }
    };
    Ok(NoGoRecord {
        q0_f,
        q0_g,
        q0_fg,
        verdict: report.verdict,
        status,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpPoint {
    pub s: f64,
    pub value: Complex64,
    pub std_error: f64,
    /// `|E~[e^{-isZ}] - e^{isa}|`
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpRung {
    pub index: usize,
    pub mean_z: f64,
    pub mean_se: f64,
    pub points: Vec<GpPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GpVerdict {
    Classical { a: f64 },
    NotClassical,
    Inconclusive,
}

impl GpVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            GpVerdict::Classical { .. } => "classical",
            GpVerdict::NotClassical => "not_classical",
            GpVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpReport {
    pub rungs: Vec<GpRung>,
    pub verdict: GpVerdict,
}

/// Characteristic functions of `Z_{f_L}` along a user-supplied sequence,
/// compared with the point mass at `a = -lim E~[Z]`.
pub fn gp_limit_scan(state: &EquilibriumState, sequence: &[TestFunction], s_grid: &[f64]) -> Result<GpReport> {
    if sequence.is_empty() {
        return Err(invalid("sequence", "need at least one test function"));
    }
    let ens = state.ensemble();
    let mut rungs = Vec::with_capacity(sequence.len());
    for (index, f) in sequence.iter().enumerate() {
        let sc = state.scaled(f)?;
        let (mean_z, mean_se) = if sc.z().is_empty() {
            (0.0, 0.0)
        } else {
            let e = ens.weighted_mean_real(|i| sc.z()[i].re);
            (e.value, e.std_error)
        };
        let a = -mean_z;
        let points = s_grid
            .iter()
            .map(|&s| {
                let v = sc.spin_part(s);
                GpPoint {
                    s,
                    value: v.value,
                    std_error: v.std_error,
                    gap: (v.value - Complex64::from_polar(1.0, s * a)).norm(),
                }
            })
            .collect();
        rungs.push(GpRung {
            index,
            mean_z,
            mean_se,
            points,
        });
    }
    let last = rungs.last().expect("non-empty sequence");
    let tol = 1e-9;
    let verdict = if ens.is_degenerate() {
        GpVerdict::Inconclusive
    } else if last.points.iter().all(|p| p.gap <= 3.0 * p.std_error + tol) {
        GpVerdict::Classical { a: -last.mean_z }
    } else if last.points.iter().any(|p| p.gap > 5.0 * p.std_error + tol) {
        GpVerdict::NotClassical
    } else {
        GpVerdict::Inconclusive
    };
    Ok(GpReport { rungs, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::EnsembleConfig;
    use crate::exec::Execution;
    use crate::kernels::KernelConfig;
    use crate::momentum::{Dispersion, RadialProfile, SourceProfile};
    use crate::state::{ModelParams, Numerics};
    use approx::assert_relative_eq;

    fn numerics(samples: usize) -> Numerics {
        Numerics {
            kernel: KernelConfig {
                nodes: 256,
                ..KernelConfig::default()
            },
            ensemble: EnsembleConfig {
                samples,
                seed: 3,
                chunk_size: 1024,
                exec: Execution::default(),
            },
        }
    }

    fn free_state(n0: f64) -> EquilibriumState {
        let disp = Dispersion::new(3, 1.0).unwrap();
        let params = ModelParams::new(1.0, 1.0, n0, SourceProfile::zero(disp)).unwrap();
        EquilibriumState::build(params, numerics(1000)).unwrap()
    }

    #[test]
    fn free_gas_without_condensate_is_moderate() {
        let st = free_state(0.0);
        let f = TestFunction::gaussian(3, 1.0).unwrap();
        let rep = cluster_scan(&st, &f, &f, ClusterMode::Time, &default_grid()).unwrap();
        assert!(rep.cross_floor_reached);
        assert_eq!(rep.verdict, ClusterVerdict::Moderate);
        assert_eq!(rep.zero_mode_factor, 1.0);
        let rec = nogo_verdict(&st, &f, &f, &rep).unwrap();
        assert_eq!(rec.status, NoGoStatus::Consistent { bec_empty: true });
    }

    #[test]
    fn condensate_breaks_factorization_by_zero_mode_factor() {
        let st = free_state(1e-3);
        let f = TestFunction::gaussian(3, 1.0).unwrap();
        let rep = cluster_scan(&st, &f, &f, ClusterMode::Time, &default_grid()).unwrap();
        assert_eq!(rep.verdict, ClusterVerdict::Moderate);
        let last = rep.lhs.last().unwrap().value / rep.product.value;
        let q0 = 2.0 * (2.0 * std::f64::consts::PI).powi(3) * 1e-3;
        let cross = rep.cross_term.last().unwrap();
        assert_relative_eq!(last.re, (-0.5 * q0 - 0.5 * cross).exp(), max_relative = 1e-12);
        let rec = nogo_verdict(&st, &f, &f, &rep).unwrap();
        match rec.status {
            NoGoStatus::Contradiction { gap, .. } => assert_relative_eq!(gap, 0.2815242803240695, max_relative = 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_mode_factor_is_grid_independent() {
        let st = free_state(1e-3);
        let f = TestFunction::gaussian(3, 1.0).unwrap();
        let g = TestFunction::from_profile(3, RadialProfile::gaussian(0.8)).unwrap();
        let rep = cluster_scan(&st, &f, &g, ClusterMode::Space, &[1.0, 10.0, 100.0]).unwrap();
        assert!(rep.cross_floor_reached, "{:?}", rep.cross_term);
        assert_eq!(rep.verdict, ClusterVerdict::Moderate);
    }

    #[test]
    fn verdict_logic() {
        let e = |re: f64, se: f64| Estimate {
            value: Complex64::new(re, 0.0),
            std_error: se,
            ess: 1.0,
        };
        assert_eq!(decide(e(1.0, 0.0), 1.3, true), ClusterVerdict::Moderate);
        assert_eq!(decide(e(1.3, 0.01), 1.3, true), ClusterVerdict::ClusterWithZeroMode);
        assert_eq!(decide(e(0.7, 0.01), 1.3, true), ClusterVerdict::Neither);
        assert_eq!(decide(e(1.0, 0.2), 1.3, true), ClusterVerdict::Inconclusive);
        assert_eq!(decide(e(1.0, 0.0), 1.3, false), ClusterVerdict::Inconclusive);
    }

    #[test]
    fn gp_scan_frozen_spin_is_classical() {
        let disp = Dispersion::new(3, 1.0).unwrap();
        let src = SourceProfile::new(RadialProfile::gaussian(1.0), disp).unwrap();
        let params = ModelParams::new(1.0, 0.5, 0.0, src).unwrap();
        let st = EquilibriumState::frozen_spin(params, numerics(1)).unwrap();
        let f = TestFunction::gaussian(3, 1.0).unwrap();
        let seq = vec![f.clone(), f.scaled_real(0.5)];
        let rep = gp_limit_scan(&st, &seq, &[0.5, 1.0, 2.0]).unwrap();
        match rep.verdict {
            GpVerdict::Classical { a } => assert_relative_eq!(a, -0.5 * 7.699520220101663, max_relative = 1e-7),
            other => panic!("{other:?}"),
        }
    }
}
