//! β-periodic thermal covariance kernels of the interaction.
//!
//! The covariance of the sharp-time field is the thermal factor
//! `(e^{-τω} + e^{-(β-τ)ω}) / (1 - e^{-βω})` sandwiched between momentum
//! functions. Time integrals of this factor are elementary, so they are done
//! analytically and the momentum integral is evaluated once per grid node:
//! the self-kernel `κ` is tabulated through its second antiderivative `Ψ`
//! (with `Ψ'` and `Ψ'' = κ` as Hermite data) and each test-function kernel
//! `K_f` through its first antiderivative. Double time integrals of `κ` over
//! rectangles then cost four table lookups.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};
use crate::exec::Execution;
use crate::hermite::QuinticTable;
use crate::momentum::{Pairing, SourceProfile, TestFunction};
use crate::quadrature::{QuadConfig, Vector};

fn thermal_denominator(omega: f64, beta: f64) -> f64 {
    -(-beta * omega).exp_m1()
}

/// `e^{-βω} (e^{yω... })` helper: returns `e^{-βω} g(x)` where `g` may overflow.
fn damped_growth(beta_omega: f64, x: f64, g: impl Fn(f64) -> f64) -> Option<f64> {
    if x < 700.0 {
        Some((-beta_omega).exp() * g(x))
    } else {
        None
    }
}

/// `e^y - 1 - y` without cancellation.
fn phi(y: f64) -> f64 {
    if y.abs() < 0.5 {
        let mut term = y * y / 2.0;
        let mut sum = term;
        for n in 3..24 {
            term *= y / n as f64;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        y.exp_m1() - y
    }
}

/// `(e^{-τω} + e^{-(β-τ)ω}) / (1 - e^{-βω})` for `0 ≤ τ ≤ β`.
pub fn thermal_factor(tau: f64, omega: f64, beta: f64) -> f64 {
    ((-tau * omega).exp() + (-(beta - tau) * omega).exp()) / thermal_denominator(omega, beta)
}

/// `d/dτ` of [`thermal_factor`].
pub fn thermal_factor_dt(tau: f64, omega: f64, beta: f64) -> f64 {
    omega * ((-(beta - tau) * omega).exp() - (-tau * omega).exp()) / thermal_denominator(omega, beta)
}

/// `∫₀^τ` of [`thermal_factor`].
pub fn thermal_factor_integral(tau: f64, omega: f64, beta: f64) -> f64 {
    let x = tau * omega;
    let tail = damped_growth(beta * omega, x, f64::exp_m1).unwrap_or_else(|| ((tau - beta) * omega).exp());
    (-(-x).exp_m1() + tail) / (omega * thermal_denominator(omega, beta))
}

/// `∫₀^τ ∫₀^v` of [`thermal_factor`].
pub fn thermal_factor_double_integral(tau: f64, omega: f64, beta: f64) -> f64 {
    let x = tau * omega;
    let tail = damped_growth(beta * omega, x, phi)
        .unwrap_or_else(|| ((tau - beta) * omega).exp() - (-beta * omega).exp() * (1.0 + x));
    (phi(-x) + tail) / (omega * omega * thermal_denominator(omega, beta))
}

#[derive(Debug, Clone, Copy)]
pub struct KernelConfig {
    /// Initial number of grid intervals on `[0, β]`.
    pub nodes: usize,
    /// Relative agreement required between the table and direct quadrature at midpoints.
    pub refine_tol: f64,
    pub max_nodes: usize,
    pub quad: QuadConfig,
    pub exec: Execution,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            nodes: 2048,
            refine_tol: 1e-9,
            max_nodes: 1 << 16,
            quad: QuadConfig::default(),
            exec: Execution::default(),
        }
    }
}

fn midpoint_probes(n: usize) -> impl Iterator<Item = usize> {
    let count = 16.min(n);
    (0..count).map(move |j| (j * n) / count + (n / count) / 2)
}

/// Tabulated self-kernel `κ(τ) = ⟨ωm, thermal(τ) ωm⟩` and its antiderivatives.
#[derive(Debug, Clone)]
pub struct ThermalKernelTable {
    beta: f64,
    src: SourceProfile,
    psi: QuinticTable<f64>,
    quad: QuadConfig,
    constant_kappa: Option<f64>,
}

impl ThermalKernelTable {
    pub fn build(beta: f64, src: &SourceProfile, cfg: &KernelConfig) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(invalid("beta", format!("must be > 0, got {beta}")));
        }
        if cfg.nodes < 2 {
            return Err(invalid("tau_nodes", "need at least 2 grid intervals"));
        }
        let rho = src.as_test_function();
        let pairing = Pairing::new(src.disp, &rho, &rho)?;
        // κ(0): weight ω^{-1} coth ~ ω^{-2} near zero, ω^{-1} at infinity
        pairing.check("kappa", -2.0, -1.0)?;
        let mut n = cfg.nodes;
        loop {
            let h = beta / n as f64;
            let rows = cfg.exec.map(n + 1, |j| {
                let tau = (j as f64 * h).min(beta);
                pairing.integrate(
                    |_, omega, dens| {
                        let w = dens.re / omega;
                        Vector([
                            w * thermal_factor_double_integral(tau, omega, beta),
                            w * thermal_factor_integral(tau, omega, beta),
                            w * thermal_factor(tau, omega, beta),
                        ])
                    },
                    &cfg.quad,
                )
            });
            let mut psi = QuinticTable {
                start: 0.0,
                step: h,
                values: Vec::with_capacity(n + 1),
                first: Vec::with_capacity(n + 1),
                second: Vec::with_capacity(n + 1),
            };
            let mut quad_err: f64 = 0.0;
            for row in rows {
                let row = row?;
                quad_err = quad_err.max(row.abs_error);
                psi.values.push(row.value.0[0]);
                psi.first.push(row.value.0[1]);
                psi.second.push(row.value.0[2]);
            }
            // Ψ(0) = Ψ'(0) = 0 exactly
            psi.values[0] = 0.0;
            psi.first[0] = 0.0;
            let table = ThermalKernelTable {
                beta,
                src: src.clone(),
                psi,
                quad: cfg.quad,
                constant_kappa: None,
            };
            if src.is_zero() || table.refinement_ok(&pairing, cfg, quad_err)? || 2 * n > cfg.max_nodes {
                return Ok(table);
            }
            n *= 2;
        }
    }

    fn refinement_ok(&self, pairing: &Pairing, cfg: &KernelConfig, quad_err: f64) -> Result<bool> {
        let n = self.psi.len() - 1;
        let scale = self.psi.values[n].abs().max(f64::MIN_POSITIVE);
        let allowed = (cfg.refine_tol * scale).max(10.0 * quad_err);
        for j in midpoint_probes(n) {
            let tau = (j as f64 + 0.5) * self.psi.step;
            let direct = pairing.integrate(
                |_, omega, dens| dens.re / omega * thermal_factor_double_integral(tau, omega, self.beta),
                &cfg.quad,
            )?;
            if (direct.value - self.psi.eval(tau)).abs() > allowed + direct.abs_error {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Test hook: a table for a constant kernel `κ ≡ c₀`.
    pub fn with_constant_kappa(beta: f64, c0: f64, nodes: usize) -> Self {
        let h = beta / nodes as f64;
        let grid: Vec<f64> = (0..=nodes).map(|j| j as f64 * h).collect();
        ThermalKernelTable {
            beta,
            src: SourceProfile::zero(crate::momentum::Dispersion { dim: 3, exponent: 1.0 }),
            psi: QuinticTable {
                start: 0.0,
                step: h,
                values: grid.iter().map(|u| 0.5 * c0 * u * u).collect(),
                first: grid.iter().map(|u| c0 * u).collect(),
                second: vec![c0; nodes + 1],
            },
            quad: QuadConfig::default(),
            constant_kappa: Some(c0),
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn source(&self) -> &SourceProfile {
        &self.src
    }

    pub fn step(&self) -> f64 {
        self.psi.step
    }

    pub fn nodes(&self) -> usize {
        self.psi.len() - 1
    }

    pub fn kappa_values(&self) -> &[f64] {
        &self.psi.second
    }

    pub fn psi_values(&self) -> &[f64] {
        &self.psi.values
    }

    pub fn quad_config(&self) -> &QuadConfig {
        &self.quad
    }

    /// Content hash of (β, source, grid) used to key caches and check handles.
    pub fn fingerprint(&self) -> String {
        cache_key(self.beta, &self.src, self.nodes())
    }

    /// `κ(τ)` by direct momentum quadrature.
    pub fn kappa(&self, tau: f64) -> Result<f64> {
        if !(0.0..=self.beta).contains(&tau) {
            return Err(invalid("tau", format!("must lie in [0, β], got {tau}")));
        }
        if let Some(c0) = self.constant_kappa {
            return Ok(c0);
        }
        let folded = tau.min(self.beta - tau);
        let rho = self.src.as_test_function();
        let pairing = Pairing::new(self.src.disp, &rho, &rho)?;
        let beta = self.beta;
        let est = pairing.integrate(
            |_, omega, dens| dens.re / omega * thermal_factor(folded, omega, beta),
            &self.quad,
        )?;
        Ok(est.value)
    }

    /// `Ψ(u) = ∫₀^u ∫₀^v κ`, interpolated, for `0 ≤ u ≤ β`.
    pub fn psi(&self, u: f64) -> f64 {
        self.psi.eval(u.abs().min(self.beta))
    }

    pub fn psi_prime(&self, u: f64) -> f64 {
        let inner = QuinticTable {
            start: 0.0,
            step: self.psi.step,
            values: self.psi.first.clone(),
            first: self.psi.second.clone(),
            second: vec![0.0; self.psi.len()],
        };
        inner.eval(u.abs().min(self.beta))
    }

    /// `∬_{[a,b]×[c,d]} κ(|t-s|) dt ds`.
    pub fn double_block(&self, a: f64, b: f64, c: f64, d: f64) -> f64 {
        let f = |x: f64| self.psi(x);
        f(d - a) - f(c - a) - f(d - b) + f(c - b)
    }

    /// `⟨f, e^{-τω} ωm⟩`: the zero-temperature limit of the test-function kernel.
    pub fn zero_temperature_kernel(&self, f: &TestFunction, tau: f64) -> Result<Complex64> {
        let pairing = Pairing::new(self.src.disp, f, &self.src.as_test_function())?;
        pairing.check("zero-temperature kernel", -0.5, -0.5)?;
        let est = pairing.integrate(|_, omega, dens| dens * (omega.powf(-0.5) * (-tau * omega).exp()), &self.quad)?;
        Ok(est.value)
    }

    /// `K_f(t, s) = ⟨f, thermal(|t-s|) ωm⟩` by direct quadrature.
    pub fn kernel_k(&self, f: &TestFunction, t: f64, s: f64) -> Result<Complex64> {
        let tau = (t - s).abs();
        if tau > self.beta * (1.0 + 1e-12) {
            return Err(invalid("time", "times must lie in [-β/2, β/2]"));
        }
        let tau = tau.min(self.beta);
        let pairing = Pairing::new(self.src.disp, f, &self.src.as_test_function())?;
        pairing.check("K_f", -1.5, -0.5)?;
        let beta = self.beta;
        let est = pairing.integrate(
            |_, omega, dens| dens * (omega.powf(-0.5) * thermal_factor(tau, omega, beta)),
            &self.quad,
        )?;
        Ok(est.value)
    }

    pub fn save_cache(&self, path: &Path, key: &str) -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&CACHE_VERSION.to_le_bytes())?;
        w.write_all(&(key.len() as u32).to_le_bytes())?;
        w.write_all(key.as_bytes())?;
        w.write_all(&self.beta.to_le_bytes())?;
        w.write_all(&(self.nodes() as u64).to_le_bytes())?;
        for column in [&self.psi.values, &self.psi.first, &self.psi.second] {
            for v in column.iter() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()
    }

    /// Loads a cached table; `Ok(None)` when the file is for a different key.
    pub fn load_cache(path: &Path, key: &str, src: &SourceProfile, quad: QuadConfig) -> std::io::Result<Option<Self>> {
        let bad = |m: &str| std::io::Error::new(std::io::ErrorKind::InvalidData, m.to_string());
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(bad("not a kernel cache file"));
        }
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf)?;
        if u32::from_le_bytes(u32buf) != CACHE_VERSION {
            return Ok(None);
        }
        r.read_exact(&mut u32buf)?;
        let mut stored_key = vec![0u8; u32::from_le_bytes(u32buf) as usize];
        r.read_exact(&mut stored_key)?;
        if stored_key != key.as_bytes() {
            return Ok(None);
        }
        let mut f64buf = [0u8; 8];
        r.read_exact(&mut f64buf)?;
        let beta = f64::from_le_bytes(f64buf);
        r.read_exact(&mut f64buf)?;
        let n = u64::from_le_bytes(f64buf) as usize;
        let mut read_column = || -> std::io::Result<Vec<f64>> {
            (0..=n)
                .map(|_| {
                    r.read_exact(&mut f64buf)?;
                    Ok(f64::from_le_bytes(f64buf))
                })
                .collect()
        };
        let values = read_column()?;
        let first = read_column()?;
        let second = read_column()?;
        Ok(Some(ThermalKernelTable {
            beta,
            src: src.clone(),
            psi: QuinticTable {
                start: 0.0,
                step: beta / n as f64,
                values,
                first,
                second,
            },
            quad,
            constant_kappa: None,
        }))
    }
}

const CACHE_MAGIC: &[u8; 4] = b"SBKT";
const CACHE_VERSION: u32 = 1;

/// Hex SHA-256 over the canonical description of (β, source, grid).
pub fn cache_key(beta: f64, src: &SourceProfile, nodes: usize) -> String {
    let text = format!("beta={beta:e};{};nodes={nodes}", src.fingerprint());
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Tabulated kernel `K_f(τ) = ⟨f, thermal(τ) ωm⟩` of one test function,
/// stored through its first antiderivative `G(τ) = ∫₀^τ K_f`.
#[derive(Debug, Clone)]
pub struct FunctionKernel {
    f: TestFunction,
    beta: f64,
    antiderivative: QuinticTable<Complex64>,
}

impl FunctionKernel {
    pub fn build(table: &ThermalKernelTable, f: &TestFunction, cfg: &KernelConfig) -> Result<Self> {
        let beta = table.beta;
        let src = &table.src;
        let pairing = Pairing::new(src.disp, f, &src.as_test_function())?;
        pairing.check("K_f", -1.5, -0.5)?;
        if table.constant_kappa.is_some() || pairing.is_trivial() {
            let n = cfg.nodes.max(2);
            let zeros = vec![Complex64::new(0.0, 0.0); n + 1];
            return Ok(FunctionKernel {
                f: f.clone(),
                beta,
                antiderivative: QuinticTable {
                    start: 0.0,
                    step: beta / n as f64,
                    values: zeros.clone(),
                    first: zeros.clone(),
                    second: zeros,
                },
            });
        }
        let mut n = cfg.nodes.max(2);
        loop {
            let h = beta / n as f64;
            let rows = cfg.exec.map(n + 1, |j| {
                let tau = (j as f64 * h).min(beta);
                pairing.integrate(
                    |_, omega, dens| {
                        let w = dens * omega.powf(-0.5);
                        Vector([
                            w * thermal_factor_integral(tau, omega, beta),
                            w * thermal_factor(tau, omega, beta),
                            w * thermal_factor_dt(tau, omega, beta),
                        ])
                    },
                    &cfg.quad,
                )
            });
            let mut table_g = QuinticTable {
                start: 0.0,
                step: h,
                values: Vec::with_capacity(n + 1),
                first: Vec::with_capacity(n + 1),
                second: Vec::with_capacity(n + 1),
            };
            let mut quad_err: f64 = 0.0;
            for row in rows {
                let row = row?;
                quad_err = quad_err.max(row.abs_error);
                table_g.values.push(row.value.0[0]);
                table_g.first.push(row.value.0[1]);
                table_g.second.push(row.value.0[2]);
            }
            table_g.values[0] = Complex64::new(0.0, 0.0);
            let kernel = FunctionKernel {
                f: f.clone(),
                beta,
                antiderivative: table_g,
            };
            if kernel.refinement_ok(&pairing, cfg, quad_err)? || 2 * n > cfg.max_nodes {
                return Ok(kernel);
            }
            n *= 2;
        }
    }

    fn refinement_ok(&self, pairing: &Pairing, cfg: &KernelConfig, quad_err: f64) -> Result<bool> {
        let table = &self.antiderivative;
        let n = table.len() - 1;
        let scale = table.values.iter().map(|v| v.norm()).fold(f64::MIN_POSITIVE, f64::max);
        let allowed = (cfg.refine_tol * scale).max(10.0 * quad_err);
        let beta = self.beta;
        for j in midpoint_probes(n) {
            let tau = (j as f64 + 0.5) * table.step;
            let direct = pairing.integrate(
                |_, omega, dens| dens * (omega.powf(-0.5) * thermal_factor_integral(tau, omega, beta)),
                &cfg.quad,
            )?;
            if (direct.value - table.eval(tau)).norm() > allowed + direct.abs_error {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn function(&self) -> &TestFunction {
        &self.f
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn nodes(&self) -> usize {
        self.antiderivative.len() - 1
    }

    /// `∫₀^x K_f(|y|) dy` for `x ∈ [-β, β]`.
    fn signed_antiderivative(&self, x: f64) -> Complex64 {
        let g = self.antiderivative.eval(x.abs().min(self.beta));
        if x < 0.0 {
            -g
        } else {
            g
        }
    }

    /// Tabulated `K_f(τ)` for `τ ∈ [0, β]`.
    pub fn kernel(&self, tau: f64) -> Complex64 {
        let t = &self.antiderivative;
        QuinticTable {
            start: t.start,
            step: t.step,
            values: t.first.clone(),
            first: t.second.clone(),
            second: vec![Complex64::new(0.0, 0.0); t.len()],
        }
        .eval(tau.abs().min(self.beta))
    }

    /// `∫_a^b K_{f,t}(u) du` with `K_{f,t}(u) = K_f(|t-u|)`.
    pub fn interval_integral(&self, t: f64, a: f64, b: f64) -> Complex64 {
        if a == b {
            return Complex64::new(0.0, 0.0);
        }
        self.signed_antiderivative(b - t) - self.signed_antiderivative(a - t)
    }

    /// `½ ∫_{S_β} K_{f,0}(u) du`, which equals `⟨f, m⟩`.
    pub fn half_circle_integral(&self) -> Complex64 {
        self.antiderivative.eval(0.5 * self.beta)
    }
}
