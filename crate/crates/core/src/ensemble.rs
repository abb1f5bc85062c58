//! The interacting spin-path measure by self-normalized importance sampling.
//!
//! Loops are drawn from the free spin-loop measure and weighted by
//! `W = exp(¼ ∬ X_t X_s κ(|t-s|) dt ds)`, the Gaussian integral of the
//! eliminated Bose field. All weights live in log space; estimates are
//! `Σ W F / Σ W` with delta-method standard errors and the effective sample
//! size `(Σ W)² / Σ W²` attached.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::exec::{Execution, REDUCTION_CHUNK};
use crate::kernels::{FunctionKernel, ThermalKernelTable};
use crate::seeds::substream;
use crate::spin::{LoopSampler, SpinLoop, SpinMeasureParams};

#[derive(Debug, Clone, Copy)]
pub struct EnsembleConfig {
    pub samples: usize,
    pub seed: u64,
    pub chunk_size: usize,
    pub exec: Execution,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            samples: 200_000,
            seed: 0,
            chunk_size: 4096,
            exec: Execution::default(),
        }
    }
}

/// A Monte Carlo estimate with its standard error and the effective sample size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub std_error: f64,
    pub ess: f64,
}

#[derive(Debug, Clone)]
pub struct WeightedLoop {
    pub path: SpinLoop,
    pub log_w: f64,
}

/// Handle of a registered test function; indexes the ensemble's Z cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ZHandle(usize);

#[derive(Debug, Clone)]
struct ZColumn {
    kernel: Arc<FunctionKernel>,
    t_offset: f64,
    values: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct TiltedEnsemble {
    params: SpinMeasureParams,
    kernels: Arc<ThermalKernelTable>,
    samples: Vec<WeightedLoop>,
    weights: Vec<f64>,
    max_log_w: f64,
    sum_w: f64,
    sum_w2: f64,
    master_seed: u64,
    exec: Execution,
    frozen: bool,
    z_cache: Vec<ZColumn>,
}

/// `log W = ¼ Σ_{i,j} X_i X_j ∬_{I_i×I_j} κ`.
pub fn log_weight(path: &SpinLoop, kernels: &ThermalKernelTable) -> f64 {
    let intervals: Vec<(f64, f64, f64)> = path.intervals().collect();
    let mut total = 0.0;
    for (i, &(a, b, x)) in intervals.iter().enumerate() {
        total += kernels.double_block(a, b, a, b);
        for &(c, d, y) in &intervals[i + 1..] {
            total += 2.0 * x * y * kernels.double_block(a, b, c, d);
        }
    }
    0.25 * total
}

/// `Z = ½ Σ_i X_i ∫_{I_i} K_{f,t}`.
pub fn z_value(path: &SpinLoop, kernel: &FunctionKernel, t_offset: f64) -> Complex64 {
    path.intervals()
        .map(|(a, b, x)| kernel.interval_integral(t_offset, a, b) * x)
        .sum::<Complex64>()
        * 0.5
}

impl TiltedEnsemble {
    pub fn build(params: SpinMeasureParams, kernels: Arc<ThermalKernelTable>, cfg: &EnsembleConfig) -> Result<Self> {
        if cfg.samples == 0 {
            return Err(invalid("samples", "need at least one loop"));
        }
        if cfg.chunk_size == 0 {
            return Err(invalid("chunk_size", "must be positive"));
        }
        if (kernels.beta() - params.beta).abs() > 1e-12 * params.beta {
            return Err(Error::Inconsistent(format!(
                "kernel table built at beta = {}, spin measure at beta = {}",
                kernels.beta(),
                params.beta
            )));
        }
        let sampler = LoopSampler::new(params);
        let n_chunks = cfg.samples.div_ceil(cfg.chunk_size);
        let chunks = cfg.exec.map(n_chunks, |c| {
            let mut rng = substream(cfg.seed, c as u64);
            let count = cfg.chunk_size.min(cfg.samples - c * cfg.chunk_size);
            (0..count)
                .map(|_| {
                    let path = sampler.sample(&mut rng);
                    let log_w = log_weight(&path, &kernels);
                    WeightedLoop { path, log_w }
                })
                .collect::<Vec<_>>()
        });
        let samples: Vec<WeightedLoop> = chunks.into_iter().flatten().collect();
        let ens = Self::from_samples(params, kernels, samples, cfg.seed, cfg.exec, false);
        if ens.ess() < 0.01 * ens.len() as f64 {
            log::warn!(
                "weight degeneracy: ESS {:.1} of {} loops (epsilon = {}, beta = {})",
                ens.ess(),
                ens.len(),
                params.epsilon,
                params.beta
            );
        }
        Ok(ens)
    }

    /// Diagnostic ensemble with the spin frozen at `X ≡ +1`.
    pub fn frozen(params: SpinMeasureParams, kernels: Arc<ThermalKernelTable>) -> Self {
        let path = SpinLoop::constant(1, params.beta);
        let log_w = log_weight(&path, &kernels);
        Self::from_samples(
            params,
            kernels,
            vec![WeightedLoop { path, log_w }],
            0,
            Execution::default(),
            true,
        )
    }

    fn from_samples(
        params: SpinMeasureParams,
        kernels: Arc<ThermalKernelTable>,
        samples: Vec<WeightedLoop>,
        master_seed: u64,
        exec: Execution,
        frozen: bool,
    ) -> Self {
        let max_log_w = samples.iter().map(|s| s.log_w).fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = samples.iter().map(|s| (s.log_w - max_log_w).exp()).collect();
        let (sum_w, sum_w2) = weights.iter().fold((0.0, 0.0), |(a, b), w| (a + w, b + w * w));
        TiltedEnsemble {
            params,
            kernels,
            samples,
            weights,
            max_log_w,
            sum_w,
            sum_w2,
            master_seed,
            exec,
            frozen,
            z_cache: Vec::new(),
        }
    }

    pub fn params(&self) -> &SpinMeasureParams {
        &self.params
    }

    pub fn kernels(&self) -> &Arc<ThermalKernelTable> {
        &self.kernels
    }

    pub fn samples(&self) -> &[WeightedLoop] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn exec(&self) -> Execution {
        self.exec
    }

    /// Normalized weights `exp(log W - max log W)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ exp(log W - max log W)` together with the shift `max log W`.
    pub fn sum_w(&self) -> (f64, f64) {
        (self.sum_w, self.max_log_w)
    }

    pub fn ess(&self) -> f64 {
        self.sum_w * self.sum_w / self.sum_w2
    }

    pub fn is_degenerate(&self) -> bool {
        self.ess() < 0.01 * self.len() as f64
    }

    /// `log(2cosh(εβ) · E[W])`, the log partition function of the spin part.
    pub fn log_partition(&self) -> f64 {
        let x = self.params.epsilon * self.params.beta;
        // ln(2 cosh x) = x + ln(1 + e^{-2x})
        let log_mass = x + (-2.0 * x).exp().ln_1p();
        log_mass + self.max_log_w + (self.sum_w / self.len() as f64).ln()
    }

    /// `Z` of every loop for the kernel of `f` at time offset `t`.
    pub fn z_column(&self, kernel: &FunctionKernel, t_offset: f64) -> Vec<Complex64> {
        self.exec.map_slice(&self.samples, |s| z_value(&s.path, kernel, t_offset))
    }

    /// Computes and caches the Z values of a test-function kernel.
    pub fn register(&mut self, kernel: Arc<FunctionKernel>, t_offset: f64) -> ZHandle {
        if let Some(i) = self
            .z_cache
            .iter()
            .position(|c| Arc::ptr_eq(&c.kernel, &kernel) && c.t_offset == t_offset)
        {
            return ZHandle(i);
        }
        let values = self.z_column(&kernel, t_offset);
        self.z_cache.push(ZColumn {
            kernel,
            t_offset,
            values,
        });
        ZHandle(self.z_cache.len() - 1)
    }

    pub fn cached(&self, handle: ZHandle) -> &[Complex64] {
        &self.z_cache[handle.0].values
    }

    pub fn registered(&self) -> impl Iterator<Item = (ZHandle, &FunctionKernel, f64)> {
        self.z_cache
            .iter()
            .enumerate()
            .map(|(i, c)| (ZHandle(i), c.kernel.as_ref(), c.t_offset))
    }

    /// Self-normalized weighted mean of `value(i)` over the loops.
    pub fn weighted_mean<F>(&self, value: F) -> Estimate<Complex64>
    where
        F: Fn(usize) -> Complex64 + Sync + Send,
    {
        let zero = Complex64::new(0.0, 0.0);
        let w = &self.weights;
        let values: Vec<Complex64> = if self.len() > REDUCTION_CHUNK {
            self.exec.map(self.len(), &value)
        } else {
            (0..self.len()).map(&value).collect()
        };
        let total = values.iter().zip(w).fold(zero, |acc, (v, wi)| acc + v * wi);
        let mean = total / self.sum_w;
        let spread = values
            .iter()
            .zip(w)
            .fold(0.0, |acc, (v, wi)| acc + wi * wi * (v - mean).norm_sqr());
        Estimate {
            value: mean,
            std_error: spread.sqrt() / self.sum_w,
            ess: self.ess(),
        }
    }

    /// Weighted mean of a real quantity.
    pub fn weighted_mean_real<F>(&self, value: F) -> Estimate<f64>
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let e = self.weighted_mean(|i| Complex64::new(value(i), 0.0));
        Estimate {
            value: e.value.re,
            std_error: e.std_error,
            ess: e.ess,
        }
    }

    /// `E~[e^{-i s Z}]` for a column of Z values.
    pub fn characteristic(&self, z: &[Complex64], s: f64) -> Estimate<Complex64> {
        let i_s = Complex64::new(0.0, -s);
        self.weighted_mean(|i| (i_s * z[i]).exp())
    }

    /// Weighted variance of a real column, with a delta-method standard error.
    pub fn weighted_variance(&self, z: &[f64]) -> (f64, f64, f64) {
        let mean = self.weighted_mean_real(|i| z[i]).value;
        let var = self.weighted_mean_real(|i| (z[i] - mean).powi(2));
        (mean, var.value, var.std_error)
    }
}

/// `S_{β,t}(f) = E~[exp(-i Z_{β,t,f})]`.
pub fn spin_factor(ens: &TiltedEnsemble, kernel: &FunctionKernel, t_offset: f64) -> Result<Estimate<Complex64>> {
    let z = ens.z_column(kernel, t_offset);
    spin_factor_from(ens, &z)
}

pub fn spin_factor_from(ens: &TiltedEnsemble, z: &[Complex64]) -> Result<Estimate<Complex64>> {
    let est = ens.characteristic(z, 1.0);
    let all_real = z.iter().all(|v| v.im == 0.0);
    if all_real && est.value.norm() > 1.0 + 3.0 * est.std_error + 1e-12 {
        return Err(Error::Inconsistent(format!(
            "|S| = {} exceeds 1 beyond 3 standard errors ({})",
            est.value.norm(),
            est.std_error
        )));
    }
    Ok(est)
}

/// `ℓ = -E~[Z]` for a real test function.
pub fn ell_shift(ens: &TiltedEnsemble, z: &[Complex64]) -> Estimate<f64> {
    let e = ens.weighted_mean_real(|i| z[i].re);
    Estimate {
        value: -e.value,
        std_error: e.std_error,
        ess: e.ess,
    }
}

fn real_column(z: &[Complex64]) -> Result<Vec<f64>> {
    if z.iter().any(|v| v.im.abs() > 1e-12 * (1.0 + v.re.abs())) {
        return Err(invalid("f", "fluctuation diagnostics need a real test function"));
    }
    Ok(z.iter().map(|v| v.re).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceRoutes {
    pub mean_z: f64,
    pub var_direct: f64,
    pub se_direct: f64,
    pub var_kernel: f64,
    pub se_kernel: f64,
    pub cells: usize,
    /// `var_kernel` on the doubled grid.
    pub var_kernel_refined: f64,
    /// False when doubling the grid moves `var_kernel` by more than 2 %.
    pub grid_converged: bool,
    pub ess: f64,
}

impl VarianceRoutes {
    /// Agreement within 5 % relative or within three combined standard errors.
    pub fn routes_agree(&self) -> bool {
        let diff = (self.var_direct - self.var_kernel).abs();
        let scale = self.var_direct.abs().max(self.var_kernel.abs());
        diff <= 0.05 * scale || diff <= 3.0 * self.se_direct.hypot(self.se_kernel) || scale == 0.0
    }
}

/// Exact cell averages of a piecewise-constant path on `cells` uniform cells.
fn cell_averages(path: &SpinLoop, cells: usize, out: &mut [f64]) {
    let beta = path.beta;
    let h = beta / cells as f64;
    let half = 0.5 * beta;
    out.iter_mut().for_each(|v| *v = 0.0);
    for (a, b, x) in path.intervals() {
        let first = (((a + half) / h).floor() as usize).min(cells - 1);
        let last = (((b + half) / h).ceil() as usize).clamp(first + 1, cells);
        for (c, slot) in out.iter_mut().enumerate().take(last).skip(first) {
            let lo = -half + c as f64 * h;
            let overlap = b.min(lo + h) - a.max(lo);
            if overlap > 0.0 {
                *slot += x * overlap / h;
            }
        }
    }
}

/// `¼ ∬ Cov~(X_u, X_v) K_f(u) K_f(v) du dv` with the covariance estimated as
/// a symmetric matrix of cell averages.
fn kernel_route(ens: &TiltedEnsemble, kernel: &FunctionKernel, cells: usize) -> (f64, f64) {
    let beta = ens.params.beta;
    let h = beta / cells as f64;
    let half = 0.5 * beta;
    let a: Vec<f64> = (0..cells)
        .map(|c| {
            let lo = -half + c as f64 * h;
            kernel.interval_integral(0.0, lo, lo + h).re
        })
        .collect();
    // weighted first and second moments of the cell averages, folded in fixed chunks
    let n = ens.len();
    let dim = cells;
    let moments = ens.exec.chunked_fold(
        n,
        REDUCTION_CHUNK,
        |range| {
            let mut first = vec![0.0; dim];
            let mut second = vec![0.0; dim * (dim + 1) / 2];
            let mut avg = vec![0.0; dim];
            for i in range {
                let w = ens.weights[i];
                cell_averages(&ens.samples[i].path, dim, &mut avg);
                let mut idx = 0;
                for p in 0..dim {
                    first[p] += w * avg[p];
                    let wp = w * avg[p];
                    for q in p..dim {
                        second[idx] += wp * avg[q];
                        idx += 1;
                    }
                }
            }
            (first, second)
        },
        (vec![0.0; dim], vec![0.0; dim * (dim + 1) / 2]),
        |(mut f0, mut s0), (f1, s1)| {
            f0.iter_mut().zip(f1).for_each(|(x, y)| *x += y);
            s0.iter_mut().zip(s1).for_each(|(x, y)| *x += y);
            (f0, s0)
        },
    );
    let (first, second) = moments;
    let mean: Vec<f64> = first.iter().map(|v| v / ens.sum_w).collect();
    let mut quad = 0.0;
    let mut idx = 0;
    for p in 0..dim {
        for q in p..dim {
            let cov = second[idx] / ens.sum_w - mean[p] * mean[q];
            let mult = if p == q { 1.0 } else { 2.0 };
            quad += mult * cov * a[p] * a[q];
            idx += 1;
        }
    }
    let var_kernel = 0.25 * quad;
    // standard error through the equivalent projected variable ½ Σ a_c X̄_c
    let mut avg = vec![0.0; dim];
    let projected: Vec<f64> = ens
        .samples
        .iter()
        .map(|s| {
            cell_averages(&s.path, dim, &mut avg);
            0.5 * avg.iter().zip(&a).map(|(x, y)| x * y).sum::<f64>()
        })
        .collect();
    let (_, _, se) = ens.weighted_variance(&projected);
    (var_kernel, se)
}

pub fn variance_two_routes(ens: &TiltedEnsemble, kernel: &FunctionKernel, cells: usize) -> Result<VarianceRoutes> {
    if cells == 0 {
        return Err(invalid("variance_cells", "must be positive"));
    }
    let z = real_column(&ens.z_column(kernel, 0.0))?;
    let (mean_z, var_direct, se_direct) = ens.weighted_variance(&z);
    let (var_kernel, se_kernel) = kernel_route(ens, kernel, cells);
    let (var_kernel_refined, _) = kernel_route(ens, kernel, 2 * cells);
    let shift = (var_kernel_refined - var_kernel).abs();
    let grid_converged = shift <= 0.02 * var_kernel.abs().max(var_kernel_refined.abs()) || shift < 1e-14;
    if !grid_converged {
        log::warn!("variance grid of {cells} cells too coarse: doubling moves var_kernel by {shift:e}");
    }
    Ok(VarianceRoutes {
        mean_z,
        var_direct,
        se_direct,
        var_kernel,
        se_kernel,
        cells,
        var_kernel_refined,
        grid_converged,
        ess: ens.ess(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationRow {
    pub s: f64,
    /// `|E~[e^{-isZ}] - e^{-isE~[Z]}|`
    pub lhs: f64,
    /// `s²/2 · Var~(Z)`
    pub bound: f64,
    pub std_error: f64,
    /// `bound + 5·SE - lhs`; negative means violation.
    pub margin: f64,
    pub holds: bool,
}

pub fn deviation_bound_check(ens: &TiltedEnsemble, z: &[Complex64], s_grid: &[f64]) -> Result<Vec<DeviationRow>> {
    let zr = real_column(z)?;
    let (mean, var, _) = ens.weighted_variance(&zr);
    Ok(s_grid
        .iter()
        .map(|&s| {
            let phi = ens.characteristic(z, s);
            let reference = Complex64::from_polar(1.0, -s * mean);
            let lhs = (phi.value - reference).norm();
            let bound = 0.5 * s * s * var;
            let margin = bound + 5.0 * phi.std_error - lhs;
            DeviationRow {
                s,
                lhs,
                bound,
                std_error: phi.std_error,
                margin,
                holds: margin >= -1e-12,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CNumberEvidence {
    pub holds: bool,
    pub mean_z: f64,
    pub var_direct: f64,
    pub se_var: f64,
    pub ess: f64,
}

/// c-number substitution holds iff `Z` is almost surely constant:
/// `Var~(Z) ≤ tol · (E~[Z]² + 1)`.
pub fn cnumber_criterion(ens: &TiltedEnsemble, z: &[Complex64], tol: f64) -> Result<CNumberEvidence> {
    let zr = real_column(z)?;
    let (mean_z, var_direct, se_var) = ens.weighted_variance(&zr);
    Ok(CNumberEvidence {
        holds: var_direct <= tol * (mean_z * mean_z + 1.0),
        mean_z,
        var_direct,
        se_var,
        ess: ens.ess(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_averages_are_exact() {
        let path = SpinLoop {
            initial_sign: 1,
            jumps: vec![-0.1, 0.3],
            beta: 1.0,
        };
        let mut out = vec![0.0; 4];
        cell_averages(&path, 4, &mut out);
        // cells [-.5,-.25], [-.25,0], [0,.25], [.25,.5]
        let expect = [1.0, (0.15 - 0.1) / 0.25, -1.0, (-0.05 + 0.2) / 0.25];
        for (o, e) in out.iter().zip(expect) {
            assert!((o - e).abs() < 1e-14, "{out:?}");
        }
    }

    #[test]
    fn constant_kernel_log_weight() {
        let table = ThermalKernelTable::with_constant_kappa(2.0, 0.5, 32);
        let flat = SpinLoop::constant(-1, 2.0);
        assert!((log_weight(&flat, &table) - 0.25 * 0.5 * 4.0).abs() < 1e-14);
        // half up, half down: ∬ X_t X_s = 0
        let split = SpinLoop {
            initial_sign: 1,
            jumps: vec![-0.5, 0.5],
            beta: 2.0,
        };
        assert!(log_weight(&split, &table).abs() < 1e-13);
    }

    use crate::kernels::KernelConfig;
    use crate::momentum::{m_pairing, Dispersion, RadialProfile, SourceProfile, TestFunction};
    use approx::assert_relative_eq;

    fn gaussian_setup(beta: f64) -> (Arc<ThermalKernelTable>, Arc<FunctionKernel>, f64) {
        let disp = Dispersion::new(3, 1.0).unwrap();
        let src = SourceProfile::new(RadialProfile::gaussian(1.0), disp).unwrap();
        let cfg = KernelConfig {
            nodes: 256,
            ..KernelConfig::default()
        };
        let table = ThermalKernelTable::build(beta, &src, &cfg).unwrap();
        let f = TestFunction::gaussian(3, 1.0).unwrap();
        let fk = FunctionKernel::build(&table, &f, &cfg).unwrap();
        let fm = m_pairing(&f, &src, &cfg.quad).unwrap().value().unwrap().re;
        (Arc::new(table), Arc::new(fk), fm)
    }

    fn small(samples: usize) -> EnsembleConfig {
        EnsembleConfig {
            samples,
            seed: 11,
            chunk_size: 512,
            exec: Execution::default(),
        }
    }

    #[test]
    fn zero_source_is_trivial() {
        let disp = Dispersion::new(3, 1.0).unwrap();
        let src = SourceProfile::zero(disp);
        let cfg = KernelConfig {
            nodes: 16,
            ..KernelConfig::default()
        };
        let table = Arc::new(ThermalKernelTable::build(1.0, &src, &cfg).unwrap());
        let f = TestFunction::gaussian(3, 1.0).unwrap();
        let fk = FunctionKernel::build(&table, &f, &cfg).unwrap();
        let params = SpinMeasureParams::new(1.0, 0.8).unwrap();
        let ens = TiltedEnsemble::build(params, table, &small(2000)).unwrap();
        assert!(ens.samples().iter().all(|s| s.log_w == 0.0));
        let s = spin_factor(&ens, &fk, 0.0).unwrap();
        assert_eq!(s.value, Complex64::new(1.0, 0.0));
        assert_relative_eq!(ens.ess(), 2000.0, max_relative = 1e-12);
        assert_relative_eq!(ens.log_partition(), (2.0 * 0.8f64.cosh()).ln(), max_relative = 1e-12);
    }

    #[test]
    fn zero_tunnelling_gives_cosine() {
        let beta = 1.0;
        let (table, fk, fm) = gaussian_setup(beta);
        assert_relative_eq!(fk.half_circle_integral().re, fm, max_relative = 1e-7);
        let params = SpinMeasureParams::new(beta, 0.0).unwrap();
        let ens = TiltedEnsemble::build(params, table.clone(), &small(4000)).unwrap();
        let s = spin_factor(&ens, &fk, 0.0).unwrap();
        assert_relative_eq!(s.value.re, fm.cos(), epsilon = 1e-7);
        assert!(s.value.im.abs() < 0.05);
        let z = ens.z_column(&fk, 0.0);
        let (_, var, _) = ens.weighted_variance(&z.iter().map(|v| v.re).collect::<Vec<_>>());
        assert_relative_eq!(var, fm * fm, max_relative = 0.02);
        let expect = (2.0f64).ln() + 0.5 * table.psi(beta);
        assert_relative_eq!(ens.log_partition(), expect, max_relative = 1e-9);
    }

    #[test]
    fn frozen_spin_reproduces_pairing() {
        let (table, fk, fm) = gaussian_setup(1.0);
        let params = SpinMeasureParams::new(1.0, 0.5).unwrap();
        let ens = TiltedEnsemble::frozen(params, table);
        let z = ens.z_column(&fk, 0.0);
        assert_relative_eq!(z[0].re, fm, max_relative = 1e-7);
        assert_relative_eq!(ell_shift(&ens, &z).value, -fm, max_relative = 1e-7);
    }

    #[test]
    fn log_weight_is_rotation_invariant() {
        let (table, _, _) = gaussian_setup(1.0);
        let path = SpinLoop {
            initial_sign: -1,
            jumps: vec![-0.41, -0.1, 0.07, 0.36],
            beta: 1.0,
        };
        let w = log_weight(&path, &table);
        for a in [0.13, 0.5, 0.77] {
            assert_relative_eq!(log_weight(&path.rotated(a), &table), w, max_relative = 1e-9);
        }
        assert_relative_eq!(log_weight(&path.reflected(), &table), w, max_relative = 1e-9);
    }

    #[test]
    fn z_is_linear_in_real_coefficients() {
        let beta = 1.0;
        let (table, fk, _) = gaussian_setup(beta);
        let cfg = KernelConfig {
            nodes: 256,
            ..KernelConfig::default()
        };
        let g = TestFunction::from_profile(3, RadialProfile::gaussian(0.6)).unwrap();
        let combo = fk.function().scaled_real(2.0).plus(&g.scaled_real(-0.5)).unwrap();
        let gk = FunctionKernel::build(&table, &g, &cfg).unwrap();
        let ck = FunctionKernel::build(&table, &combo, &cfg).unwrap();
        let path = SpinLoop {
            initial_sign: 1,
            jumps: vec![-0.3, 0.2],
            beta,
        };
        let lhs = z_value(&path, &ck, 0.1);
        let rhs = z_value(&path, &fk, 0.1) * 2.0 - z_value(&path, &gk, 0.1) * 0.5;
        assert!((lhs - rhs).norm() < 1e-9 * (1.0 + lhs.norm()));
    }

    #[test]
    fn worker_count_does_not_change_ensemble() {
        let (table, _, _) = gaussian_setup(1.0);
        let params = SpinMeasureParams::new(1.0, 1.0).unwrap();
        let mut cfg = small(3000);
        let a = TiltedEnsemble::build(params, table.clone(), &cfg).unwrap();
        cfg.exec = Execution::Sequential;
        let b = TiltedEnsemble::build(params, table, &cfg).unwrap();
        assert_eq!(a.log_partition().to_bits(), b.log_partition().to_bits());
    }
}
