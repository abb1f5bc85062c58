//! Characteristic functionals of the equilibrium state.
//!
//! `ψ(e^{iΦ_t(f)}) = exp(-¼ q₀(f_t) - ¼ q_{≠0,β}(f_t)) · S_{β,t}(f)` with
//! `f_t = e^{-|t|ω/2} f`. The Gaussian part is the free Bose gas; the spin
//! factor carries everything the two-level system adds.

use std::sync::Arc;

use num_complex::Complex64;

use crate::ensemble::{EnsembleConfig, Estimate, TiltedEnsemble};
use crate::error::{invalid, Error, Result};
use crate::kernels::{FunctionKernel, KernelConfig, ThermalKernelTable};
use crate::momentum::{
    classify_direction, form_nonzero, form_zero, m_pairing, symplectic, Direction, Dispersion, MPairing,
    SourceProfile, TestFunction,
};
use crate::spin::SpinMeasureParams;

#[derive(Debug, Clone)]
pub struct ModelParams {
    pub beta: f64,
    pub epsilon: f64,
    pub n0: f64,
    pub mu: f64,
    pub source: SourceProfile,
}

impl ModelParams {
    pub fn new(beta: f64, epsilon: f64, n0: f64, source: SourceProfile) -> Result<Self> {
        SpinMeasureParams::new(beta, epsilon)?;
        if !(n0 >= 0.0 && n0.is_finite()) {
            return Err(invalid("n0", format!("condensate density must be >= 0, got {n0}")));
        }
        Ok(ModelParams {
            beta,
            epsilon,
            n0,
            mu: 0.0,
            source,
        })
    }

    pub fn disp(&self) -> Dispersion {
        self.source.disp
    }

    pub fn spin(&self) -> SpinMeasureParams {
        SpinMeasureParams {
            beta: self.beta,
            epsilon: self.epsilon,
        }
    }

    pub fn at_beta(&self, beta: f64) -> Result<Self> {
        let mut p = ModelParams::new(beta, self.epsilon, self.n0, self.source.clone())?;
        p.mu = self.mu;
        Ok(p)
    }
}

/// How kernels and ensembles are (re)built, e.g. along a β ladder.
#[derive(Debug, Clone, Copy, Default)]
pub struct Numerics {
    pub kernel: KernelConfig,
    pub ensemble: EnsembleConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transport {
    /// `g ↦ e^{iuω} g`
    Time(f64),
    /// `g ↦ τ_x g`
    Space([f64; 3]),
}

/// Accepts physical and condensate directions; everything else is rejected
/// with its ideal tag.
pub fn admit_direction(f: &TestFunction, src: &SourceProfile, n0: f64) -> Result<()> {
    if f.dim() != src.disp.dim {
        return Err(invalid("dimension", "test function and model disagree"));
    }
    match classify_direction(f, src, n0) {
        Direction::Physical | Direction::BecGenerator => Ok(()),
        Direction::InfraredSingular => Err(Error::Rejected {
            class: "J_ir",
            reason: "<f, m> diverges; the direction generates the infrared ideal".into(),
        }),
        Direction::OutsideD0 => Err(Error::Rejected {
            class: "outside_D0",
            reason: "f is outside the form domain of q_0 + q_nonzero".into(),
        }),
    }
}

#[derive(Debug, Clone)]
pub struct EquilibriumState {
    params: ModelParams,
    numerics: Numerics,
    kernels: Arc<ThermalKernelTable>,
    ensemble: Arc<TiltedEnsemble>,
}

fn one() -> Estimate<Complex64> {
    Estimate {
        value: Complex64::new(1.0, 0.0),
        std_error: 0.0,
        ess: f64::NAN,
    }
}

fn scale(e: Estimate<Complex64>, factor: f64) -> Estimate<Complex64> {
    Estimate {
        value: e.value * factor,
        std_error: e.std_error * factor.abs(),
        ess: e.ess,
    }
}

impl EquilibriumState {
    pub fn build(params: ModelParams, numerics: Numerics) -> Result<Self> {
        let kernels = Arc::new(ThermalKernelTable::build(params.beta, &params.source, &numerics.kernel)?);
        let ensemble = Arc::new(TiltedEnsemble::build(params.spin(), kernels.clone(), &numerics.ensemble)?);
        Self::from_parts(params, numerics, kernels, ensemble)
    }

    /// Assembles a state from prebuilt handles after checking that they
    /// describe the same β and source.
    pub fn from_parts(
        params: ModelParams,
        numerics: Numerics,
        kernels: Arc<ThermalKernelTable>,
        ensemble: Arc<TiltedEnsemble>,
    ) -> Result<Self> {
        if kernels.source().fingerprint() != params.source.fingerprint() {
            return Err(Error::Inconsistent("kernel table built for a different source".into()));
        }
        if kernels.beta().to_bits() != params.beta.to_bits() || ensemble.params().beta.to_bits() != params.beta.to_bits()
        {
            return Err(Error::Inconsistent("handles disagree on beta".into()));
        }
        if !Arc::ptr_eq(ensemble.kernels(), &kernels) && ensemble.kernels().fingerprint() != kernels.fingerprint() {
            return Err(Error::Inconsistent("ensemble weighted with a different kernel table".into()));
        }
        if ensemble.params().epsilon != params.epsilon {
            return Err(Error::Inconsistent("ensemble sampled at a different epsilon".into()));
        }
        Ok(EquilibriumState {
            params,
            numerics,
            kernels,
            ensemble,
        })
    }

    /// The diagnostic state whose spin path is frozen at `X ≡ +1`.
    pub fn frozen_spin(params: ModelParams, numerics: Numerics) -> Result<Self> {
        let kernels = Arc::new(ThermalKernelTable::build(params.beta, &params.source, &numerics.kernel)?);
        let ensemble = Arc::new(TiltedEnsemble::frozen(params.spin(), kernels.clone()));
        Self::from_parts(params, numerics, kernels, ensemble)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn numerics(&self) -> &Numerics {
        &self.numerics
    }

    pub fn kernels(&self) -> &Arc<ThermalKernelTable> {
        &self.kernels
    }

    pub fn ensemble(&self) -> &Arc<TiltedEnsemble> {
        &self.ensemble
    }

    pub fn classify(&self, f: &TestFunction) -> Direction {
        classify_direction(f, &self.params.source, self.params.n0)
    }

    fn admit(&self, f: &TestFunction) -> Result<()> {
        admit_direction(f, &self.params.source, self.params.n0)
    }

    pub fn function_kernel(&self, f: &TestFunction) -> Result<FunctionKernel> {
        FunctionKernel::build(&self.kernels, f, &self.numerics.kernel)
    }

    pub fn q_zero(&self, f: &TestFunction, g: &TestFunction) -> Result<Complex64> {
        Ok(form_zero(f, g, self.params.n0)?.value)
    }

    pub fn q_nonzero(&self, f: &TestFunction, g: &TestFunction) -> Result<Complex64> {
        Ok(form_nonzero(
            self.params.disp(),
            f,
            g,
            self.params.beta,
            self.params.mu,
            &self.numerics.kernel.quad,
        )?
        .value)
    }

    /// `q_bec(f) = q₀(f) + q_{≠0,β}(f)`.
    pub fn q_total(&self, f: &TestFunction) -> Result<f64> {
        Ok(self.q_zero(f, f)?.re + self.q_nonzero(f, f)?.re)
    }

    pub fn m_pairing(&self, f: &TestFunction) -> Result<Complex64> {
        match m_pairing(f, &self.params.source, &self.numerics.kernel.quad)? {
            MPairing::Value(v) => Ok(v.value),
            MPairing::NotInDomain { end, exponent } => Err(Error::Divergent {
                what: "m pairing",
                end,
                exponent,
            }),
        }
    }

    /// `S_{β,t}(f)`.
    pub fn spin_factor(&self, f: &TestFunction, t: f64) -> Result<Estimate<Complex64>> {
        if f.is_zero() || self.params.source.is_zero() {
            return Ok(one());
        }
        let fk = self.function_kernel(f)?;
        crate::ensemble::spin_factor(&self.ensemble, &fk, t)
    }

    /// `ψ(e^{iΦ_t(f)})`.
    pub fn charfun(&self, f: &TestFunction, t: f64) -> Result<Estimate<Complex64>> {
        if f.is_zero() {
            return Ok(one());
        }
        self.admit(f)?;
        let damped = f.damped(t);
        let q0 = self.q_zero(&damped, &damped)?.re;
        let q0_plain = self.q_zero(f, f)?.re;
        if q0.to_bits() != q0_plain.to_bits() {
            return Err(Error::Inconsistent(format!(
                "zero-mode form changed under damping: {q0} vs {q0_plain}"
            )));
        }
        let qn = self.q_nonzero(&damped, &damped)?.re;
        let s = self.spin_factor(f, t)?;
        Ok(scale(s, (-0.25 * (q0 + qn)).exp()))
    }

    /// Precomputes everything needed for `s ↦ ψ(e^{isΦ(f)})`.
    pub fn scaled(&self, f: &TestFunction) -> Result<ScaledCharfun> {
        if f.is_zero() {
            return Ok(ScaledCharfun {
                q: 0.0,
                z: Vec::new(),
                ens: None,
            });
        }
        self.admit(f)?;
        let q = self.q_total(f)?;
        if self.params.source.is_zero() {
            return Ok(ScaledCharfun { q, z: Vec::new(), ens: None });
        }
        let fk = self.function_kernel(f)?;
        let z = self.ensemble.z_column(&fk, 0.0);
        Ok(ScaledCharfun {
            q,
            z,
            ens: Some(self.ensemble.clone()),
        })
    }

    pub fn charfun_scaled(&self, f: &TestFunction, s: f64) -> Result<Estimate<Complex64>> {
        Ok(self.scaled(f)?.eval(s))
    }

    /// Joint data for `(s, t) ↦ ψ(e^{iΦ(sf)} e^{iΦ(tg)})`.
    pub fn joint(&self, f: &TestFunction, g: &TestFunction) -> Result<JointCharfun> {
        let sf = self.scaled(f)?;
        let sg = self.scaled(g)?;
        let cross = if f.is_zero() || g.is_zero() {
            0.0
        } else {
            self.q_zero(f, g)?.re + self.q_nonzero(f, g)?.re
        };
        let sigma = if f.is_zero() || g.is_zero() {
            0.0
        } else {
            symplectic(self.params.disp(), f, g, &self.numerics.kernel.quad)?
        };
        let ens = sf.ens.clone().or_else(|| sg.ens.clone());
        let n = ens.as_ref().map_or(0, |e| e.len());
        let pad = |z: Vec<Complex64>| if z.is_empty() { vec![Complex64::new(0.0, 0.0); n] } else { z };
        Ok(JointCharfun {
            qff: sf.q,
            qgg: sg.q,
            qfg: cross,
            sigma,
            zf: pad(sf.z),
            zg: pad(sg.z),
            ens,
        })
    }

    /// `ψ(e^{iΦ(f)} e^{iΦ(Tg)})` assembled as
    /// `exp(-¼q₀(f+g) - ¼q_{≠0}(f+Tg)) · S(f+Tg)`, optionally times the Weyl
    /// phase `e^{-(i/2)σ(f,Tg)}`.
    pub fn two_point_charfun(
        &self,
        f: &TestFunction,
        g: &TestFunction,
        transport: Transport,
        weyl_phase: bool,
    ) -> Result<Estimate<Complex64>> {
        let moved = self.transport(g, transport)?;
        let sum = f.plus(g)?;
        let h = f.plus(&moved)?;
        if h.is_zero() {
            return Ok(one());
        }
        self.admit(f)?;
        self.admit(&moved)?;
        let q0 = self.q_zero(&sum, &sum)?.re;
        let qn = self.q_nonzero(&h, &h)?.re;
        let s = self.spin_factor(&h, 0.0)?;
        let mut out = scale(s, (-0.25 * (q0 + qn)).exp());
        if weyl_phase && !f.is_zero() && !g.is_zero() {
            let sigma = symplectic(self.params.disp(), f, &moved, &self.numerics.kernel.quad)?;
            out.value *= Complex64::from_polar(1.0, -0.5 * sigma);
        }
        Ok(out)
    }

    pub fn transport(&self, g: &TestFunction, transport: Transport) -> Result<TestFunction> {
        match transport {
            Transport::Time(u) => Ok(g.time_evolved(u)),
            Transport::Space(x) => g.shifted(&x[..g.dim().min(3)]),
        }
    }

    /// `exp(-s²/4 (q₀+q_{≠0})(f)) · exp(-i s Re⟨f,m⟩)`.
    pub fn van_hove_charfun(&self, f: &TestFunction, s: f64) -> Result<Complex64> {
        if f.is_zero() || s == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let q = self.q_total(f)?;
        let c = self.m_pairing(f)?.re;
        Ok(Complex64::from_polar((-0.25 * s * s * q).exp(), -s * c))
    }

    /// Spin-boson vs van Hove on an `s` grid.
    pub fn van_hove_comparison(&self, f: &TestFunction, s_grid: &[f64]) -> Result<VanHoveComparison> {
        let scaled = self.scaled(f)?;
        let rows: Vec<VanHoveRow> = s_grid
            .iter()
            .map(|&s| {
                let sb = scaled.eval(s);
                let vh = self.van_hove_charfun(f, s)?;
                Ok(VanHoveRow {
                    s,
                    spin_boson: sb.value,
                    van_hove: vh,
                    gap: (sb.value - vh).norm(),
                    std_error: sb.std_error,
                })
            })
            .collect::<Result<_>>()?;
        let equal = rows.iter().all(|r| r.gap <= 3.0 * r.std_error + 1e-9);
        Ok(VanHoveComparison { rows, equal })
    }

    /// `S_{β,0}(f)` along an increasing β ladder, each rung with its own
    /// kernel table and ensemble. Only diagnostics; no limit is claimed.
    pub fn ground_limit_spin_factor(&self, f: &TestFunction, ladder: &[f64]) -> Result<Vec<GroundRung>> {
        if ladder.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("beta_ladder", "must be strictly increasing"));
        }
        let k_inf = if self.params.source.is_zero() || f.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            self.kernels.zero_temperature_kernel(f, 1.0)?
        };
        let mut out: Vec<GroundRung> = Vec::with_capacity(ladder.len());
        for &beta in ladder {
            let state = EquilibriumState::build(self.params.at_beta(beta)?, self.numerics)?;
            let s = state.spin_factor(f, 0.0)?;
            let kernel_gap = if beta >= 2.0 && !self.params.source.is_zero() && !f.is_zero() {
                Some((state.kernels.kernel_k(f, 0.0, 1.0)? - k_inf).norm())
            } else {
                None
            };
            let diff_prev = out.last().map(|r| (s.value - r.value).norm());
            out.push(GroundRung {
                beta,
                value: s.value,
                std_error: s.std_error,
                ess: s.ess,
                diff_prev,
                kernel_gap,
            });
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct ScaledCharfun {
    q: f64,
    z: Vec<Complex64>,
    ens: Option<Arc<TiltedEnsemble>>,
}

impl ScaledCharfun {
    /// `q_bec(f)`, the Gaussian width.
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn z(&self) -> &[Complex64] {
        &self.z
    }

    /// The ensemble behind the Z column, unless the spin part is trivial.
    pub fn ensemble(&self) -> Option<&TiltedEnsemble> {
        self.ens.as_deref()
    }

    pub fn spin_part(&self, s: f64) -> Estimate<Complex64> {
        match &self.ens {
            Some(ens) if s != 0.0 => ens.characteristic(&self.z, s),
            _ => one(),
        }
    }

    pub fn eval(&self, s: f64) -> Estimate<Complex64> {
        scale(self.spin_part(s), (-0.25 * s * s * self.q).exp())
    }
}

#[derive(Debug, Clone)]
pub struct JointCharfun {
    qff: f64,
    qgg: f64,
    /// `Re (q₀ + q_{≠0})(f, g)`
    qfg: f64,
    sigma: f64,
    zf: Vec<Complex64>,
    zg: Vec<Complex64>,
    ens: Option<Arc<TiltedEnsemble>>,
}

impl JointCharfun {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// The ensemble with the Z columns of `f` and `g`, unless the spin part is trivial.
    pub fn columns(&self) -> Option<(&TiltedEnsemble, &[Complex64], &[Complex64])> {
        self.ens.as_deref().map(|e| (e, self.zf.as_slice(), self.zg.as_slice()))
    }

    /// `(q₀ + q_{≠0})(sf + tg)`.
    pub fn q(&self, s: f64, t: f64) -> f64 {
        s * s * self.qff + t * t * self.qgg + 2.0 * s * t * self.qfg
    }

    /// `E~[e^{-i(sZ_f + tZ_g)}]`.
    pub fn spin_part(&self, s: f64, t: f64) -> Estimate<Complex64> {
        match &self.ens {
            Some(ens) if s != 0.0 || t != 0.0 => {
                let zf = &self.zf;
                let zg = &self.zg;
                ens.weighted_mean(|i| (Complex64::new(0.0, -1.0) * (zf[i] * s + zg[i] * t)).exp())
            }
            _ => one(),
        }
    }

    /// Spin parts on a tensor grid, as a row-major `s.len() × t.len()` matrix.
    pub fn spin_grid(&self, s: &[f64], t: &[f64]) -> Vec<Estimate<Complex64>> {
        let mut out = Vec::with_capacity(s.len() * t.len());
        for &si in s {
            for &tj in t {
                out.push(self.spin_part(si, tj));
            }
        }
        out
    }

    /// `e^{-(i/2)stσ} exp(-¼ q(sf+tg)) E~[e^{-i(sZ_f+tZ_g)}]`.
    pub fn eval(&self, s: f64, t: f64) -> Estimate<Complex64> {
        let mut e = scale(self.spin_part(s, t), (-0.25 * self.q(s, t)).exp());
        e.value *= Complex64::from_polar(1.0, -0.5 * s * t * self.sigma);
        e
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VanHoveRow {
    pub s: f64,
    pub spin_boson: Complex64,
    pub van_hove: Complex64,
    pub gap: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VanHoveComparison {
    pub rows: Vec<VanHoveRow>,
    pub equal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundRung {
    pub beta: f64,
    pub value: Complex64,
    pub std_error: f64,
    pub ess: f64,
    pub diff_prev: Option<f64>,
    /// `|K_β(1) - K_∞(1)|` for the kernel of `f` against the source.
    pub kernel_gap: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Execution;
    use crate::momentum::RadialProfile;
    use approx::assert_relative_eq;

    fn numerics(samples: usize) -> Numerics {
        Numerics {
            kernel: KernelConfig {
                nodes: 256,
                ..KernelConfig::default()
            },
            ensemble: EnsembleConfig {
                samples,
                seed: 5,
                chunk_size: 1024,
                exec: Execution::default(),
            },
        }
    }

    fn gaussian_state(epsilon: f64, n0: f64, zero_source: bool) -> EquilibriumState {
        let disp = Dispersion::new(3, 1.0).unwrap();
        let src = if zero_source {
            SourceProfile::zero(disp)
        } else {
            SourceProfile::new(RadialProfile::gaussian(1.0), disp).unwrap()
        };
        EquilibriumState::build(ModelParams::new(1.0, epsilon, n0, src).unwrap(), numerics(4000)).unwrap()
    }

    #[test]
    fn normalized_at_zero() {
        let st = gaussian_state(1.0, 0.1, false);
        let z = TestFunction::zero(3);
        assert_eq!(st.charfun(&z, 0.3).unwrap().value, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn free_gas_reduction() {
        let st = gaussian_state(1.0, 0.01, true);
        let f = TestFunction::gaussian(3, 1.0).unwrap();
        let v = st.charfun(&f, 0.0).unwrap();
        let q0 = 2.0 * (2.0 * std::f64::consts::PI).powi(3) * 0.01;
        let expect = (-0.25 * (q0 + 13.580932982847241)).exp();
        assert_relative_eq!(v.value.re, expect, max_relative = 1e-9);
        assert_eq!(v.value.im, 0.0);
        // log-linearity in s
        let sc = st.scaled(&f).unwrap();
        for s in [0.3, 1.0, 2.5] {
            let w = -4.0 * sc.eval(s).value.norm().ln() / (s * s);
            assert_relative_eq!(w, q0 + 13.580932982847241, max_relative = 1e-9);
        }
    }

    #[test]
    fn scaled_at_one_matches_charfun() {
        let st = gaussian_state(0.7, 0.0, false);
        let f = TestFunction::gaussian(3, 1.0).unwrap();
        let a = st.charfun(&f, 0.0).unwrap().value;
        let b = st.charfun_scaled(&f, 1.0).unwrap().value;
        assert!((a - b).norm() <= 1e-15 * a.norm());
        let minus = st.charfun_scaled(&f, -0.8).unwrap().value;
        let plus = st.charfun_scaled(&f, 0.8).unwrap().value;
        assert!((minus - plus.conj()).norm() < 1e-14);
    }

    #[test]
    fn zero_tunnelling_closed_form() {
        let st = gaussian_state(0.0, 0.0, false);
        let f = TestFunction::gaussian(3, 1.0).unwrap();
        let c = st.m_pairing(&f).unwrap().re;
        assert_relative_eq!(c, 7.699520220101663, max_relative = 1e-9);
        let v = st.charfun(&f, 0.0).unwrap().value;
        assert_relative_eq!(v.re, (-0.25 * 13.580932982847241f64).exp() * c.cos(), max_relative = 1e-6);
    }

    #[test]
    fn two_point_identities() {
        let st = gaussian_state(1.0, 0.0, false);
        let f = TestFunction::gaussian(3, 1.0).unwrap();
        let g = TestFunction::from_profile(3, RadialProfile::gaussian(0.7)).unwrap();
        let a = st.two_point_charfun(&f, &g, Transport::Time(0.0), false).unwrap().value;
        let b = st.charfun(&f.plus(&g).unwrap(), 0.0).unwrap().value;
        assert!((a - b).norm() <= 1e-14 * b.norm());
        let zero = TestFunction::zero(3);
        let c = st.two_point_charfun(&f, &zero, Transport::Space([3.0, 0.0, 0.0]), false).unwrap().value;
        let d = st.charfun(&f, 0.0).unwrap().value;
        assert!((c - d).norm() <= 1e-14 * d.norm());
    }

    #[test]
    fn van_hove_matches_frozen_spin_only() {
        let disp = Dispersion::new(3, 1.0).unwrap();
        let src = SourceProfile::new(RadialProfile::gaussian(1.0), disp).unwrap();
        let params = ModelParams::new(1.0, 0.0, 0.0, src).unwrap();
        let f = TestFunction::gaussian(3, 1.0).unwrap();
        let frozen = EquilibriumState::frozen_spin(params.clone(), numerics(10)).unwrap();
        let grid = [-2.0, -0.5, 0.0, 0.3, 1.0, 1.7];
        assert!(frozen.van_hove_comparison(&f, &grid).unwrap().equal);
        let sampled = EquilibriumState::build(params, numerics(4000)).unwrap();
        let c = sampled.m_pairing(&f).unwrap().re;
        let s = std::f64::consts::PI / (2.0 * c);
        assert!(!sampled.van_hove_comparison(&f, &[s]).unwrap().equal);
    }

    #[test]
    fn rejects_infrared_directions() {
        let disp = Dispersion::new(3, 0.5).unwrap();
        let src = SourceProfile::new(RadialProfile::point_source_flat(), disp).unwrap();
        let f = TestFunction::from_profile(3, RadialProfile::algebraic(0.0, -2.0, 1.0)).unwrap();
        assert_eq!(classify_direction(&f, &src, 0.0), Direction::InfraredSingular);
        assert!(matches!(admit_direction(&f, &src, 0.0), Err(Error::Rejected { class: "J_ir", .. })));
        let g = TestFunction::from_profile(3, RadialProfile::algebraic(-0.5, -3.0, 1.0)).unwrap();
        assert!(matches!(admit_direction(&g, &src, 0.0), Err(Error::Rejected { class: "outside_D0", .. })));
    }
}
