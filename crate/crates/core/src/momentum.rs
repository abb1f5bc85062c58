//! Momentum-space test functions, the coupling source, and the static
//! sesquilinear forms of the free Bose gas with a condensate.
//!
//! Test functions are finite sums of radial profiles dressed with a complex
//! coefficient, a time-evolution phase `e^{iuω}`, a spatial shift and a
//! Euclidean damping `e^{-tω/2}`. Membership questions (L², form domains,
//! the domain of the source pairing) are decided by power-law exponent
//! arithmetic on the declared families; numbers only come in once an
//! integral is known to converge.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Endpoint, Error, Result};
use crate::quadrature::{integrate_radial, Estimate, QuadConfig, QuadValue};

/// `ω(k) = |k|^s`.
pub fn dispersion(k_mag: f64, s: f64) -> f64 {
    if k_mag == 0.0 {
        0.0
    } else {
        k_mag.powf(s)
    }
}

/// Spatial dimension together with the dispersion exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispersion {
    pub dim: usize,
    pub exponent: f64,
}

impl Dispersion {
    pub fn new(dim: usize, exponent: f64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension", "must be at least 1"));
        }
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(invalid("dispersion", format!("exponent must be > 0, got {exponent}")));
        }
        Ok(Dispersion { dim, exponent })
    }

    pub fn omega(&self, k: f64) -> f64 {
        dispersion(k, self.exponent)
    }

    /// Surface area of the unit sphere in `R^dim`.
    pub fn sphere_area(&self) -> f64 {
        let mut area = if self.dim % 2 == 1 { 2.0 } else { 2.0 * PI };
        let mut d = if self.dim % 2 == 1 { 1 } else { 2 };
        while d < self.dim {
            area *= 2.0 * PI / d as f64;
            d += 2;
        }
        area
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileKind {
    /// `exp(-k²/(2 w²))`
    Gaussian { width: f64 },
    /// `k^a` on `[0, cutoff]`, zero beyond.
    PowerBump { exponent_at_zero: f64, cutoff: f64 },
    /// Constant: the Fourier transform of a point source.
    PointSourceFlat,
    /// `(k/L)^a0 (1 + k²/L²)^((a∞ - a0)/2)`
    Algebraic {
        exponent_at_zero: f64,
        exponent_at_infinity: f64,
        scale: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProfile {
    pub kind: ProfileKind,
    pub amplitude: f64,
}

impl RadialProfile {
    pub fn gaussian(width: f64) -> Self {
        RadialProfile {
            kind: ProfileKind::Gaussian { width },
            amplitude: 1.0,
        }
    }

    pub fn power_bump(exponent_at_zero: f64, cutoff: f64) -> Self {
        RadialProfile {
            kind: ProfileKind::PowerBump {
                exponent_at_zero,
                cutoff,
            },
            amplitude: 1.0,
        }
    }

    pub fn point_source_flat() -> Self {
        RadialProfile {
            kind: ProfileKind::PointSourceFlat,
            amplitude: 1.0,
        }
    }

    pub fn algebraic(exponent_at_zero: f64, exponent_at_infinity: f64, scale: f64) -> Self {
        RadialProfile {
            kind: ProfileKind::Algebraic {
                exponent_at_zero,
                exponent_at_infinity,
                scale,
            },
            amplitude: 1.0,
        }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() {
            return Err(invalid("amplitude", "must be finite"));
        }
        match self.kind {
            ProfileKind::Gaussian { width } if !(width > 0.0 && width.is_finite()) => {
                Err(invalid("width", format!("gaussian width must be > 0, got {width}")))
            }
            ProfileKind::PowerBump {
                exponent_at_zero,
                cutoff,
            } => {
                if !(cutoff > 0.0 && cutoff.is_finite()) {
                    Err(invalid("cutoff", format!("must be > 0, got {cutoff}")))
                } else if !exponent_at_zero.is_finite() {
                    Err(invalid("exponent_at_zero", "must be finite"))
                } else {
                    Ok(())
                }
            }
            ProfileKind::Algebraic {
                exponent_at_zero,
                exponent_at_infinity,
                scale,
            } => {
                if !(scale > 0.0 && scale.is_finite()) {
                    Err(invalid("scale", format!("must be > 0, got {scale}")))
                } else if !(exponent_at_zero.is_finite() && exponent_at_infinity.is_finite()) {
                    Err(invalid("exponent", "algebraic exponents must be finite"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }

    pub fn value(&self, k: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        let shape = match self.kind {
            ProfileKind::Gaussian { width } => {
                let x = k / width;
                (-0.5 * x * x).exp()
            }
            ProfileKind::PowerBump {
                exponent_at_zero,
                cutoff,
            } => {
                if k > cutoff {
                    0.0
                } else if exponent_at_zero == 0.0 {
                    1.0
                } else {
                    k.powf(exponent_at_zero)
                }
            }
            ProfileKind::PointSourceFlat => 1.0,
            ProfileKind::Algebraic {
                exponent_at_zero,
                exponent_at_infinity,
                scale,
            } => {
                let x = k / scale;
                let head = if exponent_at_zero == 0.0 { 1.0 } else { x.powf(exponent_at_zero) };
                head * (1.0 + x * x).powf(0.5 * (exponent_at_infinity - exponent_at_zero))
            }
        };
        self.amplitude * shape
    }

    /// Power-law exponent of the profile as `k → 0`; `+∞` for the zero profile.
    pub fn exponent_at_zero(&self) -> f64 {
        if self.is_zero() {
            return f64::INFINITY;
        }
        match self.kind {
            ProfileKind::Gaussian { .. } | ProfileKind::PointSourceFlat => 0.0,
            ProfileKind::PowerBump { exponent_at_zero, .. } => exponent_at_zero,
            ProfileKind::Algebraic { exponent_at_zero, .. } => exponent_at_zero,
        }
    }

    /// Power-law exponent as `k → ∞`; `-∞` for faster-than-any-power decay.
    pub fn exponent_at_infinity(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        match self.kind {
            ProfileKind::Gaussian { .. } | ProfileKind::PowerBump { .. } => f64::NEG_INFINITY,
            ProfileKind::PointSourceFlat => 0.0,
            ProfileKind::Algebraic {
                exponent_at_infinity, ..
            } => exponent_at_infinity,
        }
    }

    fn breakpoint(&self) -> Option<f64> {
        match self.kind {
            ProfileKind::PowerBump { cutoff, .. } => Some(cutoff),
            _ => None,
        }
    }

    fn value_at_zero(&self) -> Option<f64> {
        let a = self.exponent_at_zero();
        if a > 0.0 {
            Some(0.0)
        } else if a == 0.0 {
            Some(self.amplitude)
        } else {
            None
        }
    }
}

/// One term of a test function:
/// `coeff · profile(|k|) · e^{iuω} · e^{-ik·x} · e^{-tω/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub profile: RadialProfile,
    pub coeff: Complex64,
    pub time_phase: f64,
    pub shift: Vec<f64>,
    pub damp: f64,
}

impl Component {
    pub fn new(dim: usize, profile: RadialProfile) -> Self {
        Component {
            profile,
            coeff: Complex64::new(1.0, 0.0),
            time_phase: 0.0,
            shift: vec![0.0; dim],
            damp: 0.0,
        }
    }

    fn exponent_at_infinity(&self) -> f64 {
        if self.damp > 0.0 {
            f64::NEG_INFINITY
        } else {
            self.profile.exponent_at_infinity()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    dim: usize,
    components: Vec<Component>,
    exponent_at_zero: f64,
    exponent_at_infinity: f64,
}

impl TestFunction {
    pub fn new(dim: usize, components: Vec<Component>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension", "must be at least 1"));
        }
        for c in &components {
            c.profile.validate()?;
            if c.shift.len() != dim {
                return Err(invalid("shift", format!("expected {dim} coordinates, got {}", c.shift.len())));
            }
            if dim != 3 && c.shift.iter().any(|x| *x != 0.0) {
                return Err(invalid("shift", "spatial shifts are supported in dimension 3 only"));
            }
            if !(c.damp >= 0.0 && c.damp.is_finite()) {
                return Err(invalid("damp", format!("must be >= 0, got {}", c.damp)));
            }
            if !(c.coeff.re.is_finite() && c.coeff.im.is_finite() && c.time_phase.is_finite()) {
                return Err(invalid("coeff", "coefficient and phase must be finite"));
            }
        }
        let live = || components.iter().filter(|c| c.coeff != Complex64::new(0.0, 0.0) && !c.profile.is_zero());
        let exponent_at_zero = live().map(|c| c.profile.exponent_at_zero()).fold(f64::INFINITY, f64::min);
        let exponent_at_infinity = live().map(Component::exponent_at_infinity).fold(f64::NEG_INFINITY, f64::max);
        Ok(TestFunction {
            dim,
            components,
            exponent_at_zero,
            exponent_at_infinity,
        })
    }

    pub fn zero(dim: usize) -> Self {
        TestFunction::new(dim, Vec::new()).expect("empty function is valid")
    }

    pub fn from_profile(dim: usize, profile: RadialProfile) -> Result<Self> {
        TestFunction::new(dim, vec![Component::new(dim, profile)])
    }

    pub fn gaussian(dim: usize, width: f64) -> Result<Self> {
        Self::from_profile(dim, RadialProfile::gaussian(width))
    }

    /// Checks user-declared asymptotic exponents against the components.
    pub fn with_declared_exponents(self, at_zero: f64, at_infinity: f64) -> Result<Self> {
        let same = |a: f64, b: f64| a == b || (a - b).abs() <= 1e-12;
        if !same(at_zero, self.exponent_at_zero) {
            return Err(invalid(
                "exponent_at_zero",
                format!("declared {at_zero}, components give {}", self.exponent_at_zero),
            ));
        }
        if !same(at_infinity, self.exponent_at_infinity) {
            return Err(invalid(
                "exponent_at_infinity",
                format!("declared {at_infinity}, components give {}", self.exponent_at_infinity),
            ));
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn exponent_at_zero(&self) -> f64 {
        self.exponent_at_zero
    }

    pub fn exponent_at_infinity(&self) -> f64 {
        self.exponent_at_infinity
    }

    pub fn is_zero(&self) -> bool {
        self.exponent_at_zero == f64::INFINITY
    }

    /// True when `f̂` is real: real coefficients, no phase, no shift.
    pub fn is_real(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.coeff.im == 0.0 && c.time_phase == 0.0 && c.shift.iter().all(|x| *x == 0.0))
    }

    fn map_components(&self, f: impl Fn(&mut Component)) -> Self {
        let mut out = self.clone();
        out.components.iter_mut().for_each(f);
        TestFunction::new(out.dim, out.components).expect("transport preserves validity")
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        self.map_components(|c| c.coeff *= alpha)
    }

    pub fn scaled_real(&self, alpha: f64) -> Self {
        self.scaled(Complex64::new(alpha, 0.0))
    }

    /// `e^{iuω} f`
    pub fn time_evolved(&self, u: f64) -> Self {
        self.map_components(|c| c.time_phase += u)
    }

    /// `τ_x f`, i.e. `f̂(k) ↦ e^{-ik·x} f̂(k)`.
    pub fn shifted(&self, x: &[f64]) -> Result<Self> {
        if x.len() != self.dim {
            return Err(invalid("shift", format!("expected {} coordinates", self.dim)));
        }
        let mut comps = self.components.clone();
        for c in comps.iter_mut() {
            for (s, dx) in c.shift.iter_mut().zip(x) {
                *s += dx;
            }
        }
        TestFunction::new(self.dim, comps)
    }

    /// `e^{-|t|ω/2} f`
    pub fn damped(&self, t: f64) -> Self {
        let t = t.abs();
        self.map_components(|c| c.damp += t)
    }

    pub fn plus(&self, other: &TestFunction) -> Result<Self> {
        if other.dim != self.dim {
            return Err(invalid("dimension", "cannot add functions of different dimension"));
        }
        let mut comps = self.components.clone();
        comps.extend(other.components.iter().cloned());
        TestFunction::new(self.dim, comps)
    }

    /// `f̂(0)`; fails when some component is singular at the origin.
    pub fn value_at_zero(&self) -> Result<Complex64> {
        let mut total = Complex64::new(0.0, 0.0);
        for c in &self.components {
            match c.profile.value_at_zero() {
                Some(v) => total += c.coeff * v,
                None => {
                    return Err(Error::ZeroModeUndefined {
                        exponent: c.profile.exponent_at_zero(),
                    })
                }
            }
        }
        Ok(total)
    }

    fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.components.iter().filter_map(|c| c.profile.breakpoint())
    }
}

/// The coupling source `ϱ` with its derived functions `m̂ = ω^{-3/2} ϱ̂`
/// and `(ωm)^ = ω^{-1/2} ϱ̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceProfile {
    pub rho: RadialProfile,
    pub disp: Dispersion,
}

impl SourceProfile {
    pub fn new(rho: RadialProfile, disp: Dispersion) -> Result<Self> {
        rho.validate()?;
        // m and ωm must pair with a gaussian near k = 0
        let exp_zero = disp.dim as f64 - 1.0 + rho.exponent_at_zero() - 1.5 * disp.exponent;
        if !rho.is_zero() && exp_zero <= -1.0 {
            return Err(Error::Divergent {
                what: "source m",
                end: Endpoint::Zero,
                exponent: exp_zero,
            });
        }
        Ok(SourceProfile { rho, disp })
    }

    pub fn zero(disp: Dispersion) -> Self {
        SourceProfile {
            rho: RadialProfile::gaussian(1.0).with_amplitude(0.0),
            disp,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rho.is_zero()
    }

    pub fn m_hat(&self, k: f64) -> f64 {
        self.rho.value(k) * self.disp.omega(k).powf(-1.5)
    }

    pub fn omega_m_hat(&self, k: f64) -> f64 {
        self.rho.value(k) * self.disp.omega(k).powf(-0.5)
    }

    /// `ϱ` as a test function centred at the origin.
    pub fn as_test_function(&self) -> TestFunction {
        TestFunction::from_profile(self.disp.dim, self.rho).expect("validated profile")
    }

    /// Stable textual identity, used for content hashing.
    pub fn fingerprint(&self) -> String {
        format!(
            "rho={:?};amp={:e};d={};s={:e}",
            self.rho.kind, self.rho.amplitude, self.disp.dim, self.disp.exponent
        )
    }
}

/// A complex form value with the quadrature error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormValue {
    pub value: Complex64,
    pub abs_error: f64,
}

impl FormValue {
    pub fn exact(value: Complex64) -> Self {
        FormValue { value, abs_error: 0.0 }
    }
}

struct PairTerm {
    coeff: Complex64,
    left: RadialProfile,
    right: RadialProfile,
    phase: f64,
    damp: f64,
    distance: f64,
}

/// The radial density `|S^{d-1}| k^{d-1} Σ conj(f̂_c) ĝ_c'` (angle-averaged),
/// ready to be multiplied by a weight in `ω` and integrated.
pub(crate) struct Pairing {
    disp: Dispersion,
    terms: Vec<PairTerm>,
    breaks: Vec<f64>,
    exp_zero: f64,
    exp_inf: f64,
}

impl Pairing {
    pub(crate) fn new(disp: Dispersion, f: &TestFunction, g: &TestFunction) -> Result<Self> {
        if f.dim != disp.dim || g.dim != disp.dim {
            return Err(invalid("dimension", "test function dimension differs from the dispersion"));
        }
        let mut terms = Vec::with_capacity(f.components.len() * g.components.len());
        for a in &f.components {
            for b in &g.components {
                let coeff = a.coeff.conj() * b.coeff;
                if coeff == Complex64::new(0.0, 0.0) || a.profile.is_zero() || b.profile.is_zero() {
                    continue;
                }
                let distance = a
                    .shift
                    .iter()
                    .zip(&b.shift)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                terms.push(PairTerm {
                    coeff,
                    left: a.profile,
                    right: b.profile,
                    phase: b.time_phase - a.time_phase,
                    damp: 0.5 * (a.damp + b.damp),
                    distance,
                });
            }
        }
        let d = disp.dim as f64 - 1.0;
        Ok(Pairing {
            disp,
            terms,
            breaks: f.breakpoints().chain(g.breakpoints()).collect(),
            exp_zero: d + f.exponent_at_zero + g.exponent_at_zero,
            exp_inf: d + f.exponent_at_infinity + g.exponent_at_infinity,
        })
    }

    pub(crate) fn is_trivial(&self) -> bool {
        self.terms.is_empty()
    }

    /// Checks convergence when the weight behaves like `ω^w0` at zero and `ω^winf` at infinity.
    pub(crate) fn check(&self, what: &'static str, w0: f64, winf: f64) -> Result<()> {
        if self.is_trivial() {
            return Ok(());
        }
        let s = self.disp.exponent;
        let at_zero = self.exp_zero + s * w0;
        if at_zero <= -1.0 {
            return Err(Error::Divergent {
                what,
                end: Endpoint::Zero,
                exponent: at_zero,
            });
        }
        let at_inf = self.exp_inf + s * winf;
        if at_inf >= -1.0 {
            return Err(Error::Divergent {
                what,
                end: Endpoint::Infinity,
                exponent: at_inf,
            });
        }
        Ok(())
    }

    pub(crate) fn density(&self, k: f64) -> Complex64 {
        let omega = self.disp.omega(k);
        let radial = self.disp.sphere_area() * k.powi(self.disp.dim as i32 - 1);
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let p = t.left.value(k) * t.right.value(k);
            if p == 0.0 {
                continue;
            }
            let mut v = p * (-t.damp * omega).exp();
            if t.distance > 0.0 {
                let x = k * t.distance;
                v *= x.sin() / x;
            }
            acc += t.coeff * Complex64::from_polar(v, t.phase * omega);
        }
        acc * radial
    }

    pub(crate) fn integrate<V, W>(&self, weight: W, cfg: &QuadConfig) -> Result<Estimate<V>>
    where
        V: QuadValue,
        W: Fn(f64, f64, Complex64) -> V,
    {
        if self.is_trivial() {
            return Ok(Estimate {
                value: V::zero(),
                abs_error: 0.0,
                evaluations: 0,
            });
        }
        integrate_radial(
            |k| {
                if k == 0.0 {
                    return V::zero();
                }
                let dens = self.density(k);
                if dens == Complex64::new(0.0, 0.0) {
                    return V::zero();
                }
                weight(k, self.disp.omega(k), dens)
            },
            &self.breaks,
            cfg,
        )
    }
}

fn to_form(e: Estimate<Complex64>) -> FormValue {
    FormValue {
        value: e.value,
        abs_error: e.abs_error,
    }
}

/// Zero-mode form `q₀(f,g) = 2(2π)^d n₀ conj(f̂(0)) ĝ(0)`.
pub fn form_zero(f: &TestFunction, g: &TestFunction, n0: f64) -> Result<FormValue> {
    if !(n0 >= 0.0 && n0.is_finite()) {
        return Err(invalid("n0", format!("condensate density must be >= 0, got {n0}")));
    }
    if f.dim != g.dim {
        return Err(invalid("dimension", "mismatched test functions"));
    }
    for h in [f, g] {
        if h.exponent_at_zero < 0.0 {
            return Err(Error::ZeroModeUndefined {
                exponent: h.exponent_at_zero,
            });
        }
    }
    let prefactor = 2.0 * (2.0 * PI).powi(f.dim as i32) * n0;
    let value = f.value_at_zero()?.conj() * g.value_at_zero()? * prefactor;
    Ok(FormValue::exact(value))
}

pub fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

/// Thermal form `q_{≠0,β,μ}(f,g) = ⟨f, coth(β(ω-μ)/2) g⟩`.
pub fn form_nonzero(
    disp: Dispersion,
    f: &TestFunction,
    g: &TestFunction,
    beta: f64,
    mu: f64,
    cfg: &QuadConfig,
) -> Result<FormValue> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid("beta", format!("must be > 0, got {beta}")));
    }
    if !(mu <= 0.0) {
        return Err(invalid("mu", format!("chemical potential must be <= 0, got {mu}")));
    }
    let pairing = Pairing::new(disp, f, g)?;
    let w0 = if mu == 0.0 { -1.0 } else { 0.0 };
    pairing.check("q_nonzero", w0, 0.0)?;
    pairing
        .integrate(|_, omega, dens| dens * coth(0.5 * beta * (omega - mu)), cfg)
        .map(to_form)
}

/// Plain `L²` inner product `⟨f, g⟩`.
pub fn inner(disp: Dispersion, f: &TestFunction, g: &TestFunction, cfg: &QuadConfig) -> Result<FormValue> {
    let pairing = Pairing::new(disp, f, g)?;
    pairing.check("inner product", 0.0, 0.0)?;
    pairing.integrate(|_, _, dens| dens, cfg).map(to_form)
}

/// `σ(f, g) = Im⟨f, g⟩`.
pub fn symplectic(disp: Dispersion, f: &TestFunction, g: &TestFunction, cfg: &QuadConfig) -> Result<f64> {
    Ok(inner(disp, f, g, cfg)?.value.im)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MPairing {
    Value(FormValue),
    NotInDomain { end: Endpoint, exponent: f64 },
}

impl MPairing {
    pub fn value(&self) -> Option<Complex64> {
        match self {
            MPairing::Value(v) => Some(v.value),
            MPairing::NotInDomain { .. } => None,
        }
    }
}

/// `⟨f, m⟩ = ∫ conj(f̂) ω^{-3/2} ϱ̂ dk`, or the divergence tag.
pub fn m_pairing(f: &TestFunction, src: &SourceProfile, cfg: &QuadConfig) -> Result<MPairing> {
    let rho = src.as_test_function();
    let pairing = Pairing::new(src.disp, f, &rho)?;
    match pairing.check("m pairing", -1.5, -1.5) {
        Ok(()) => {}
        Err(Error::Divergent { end, exponent, .. }) => return Ok(MPairing::NotInDomain { end, exponent }),
        Err(e) => return Err(e),
    }
    let est = pairing.integrate(|_, omega, dens| dens * omega.powf(-1.5), cfg)?;
    Ok(MPairing::Value(to_form(est)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Physical,
    InfraredSingular,
    BecGenerator,
    OutsideD0,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Physical => "physical",
            Direction::InfraredSingular => "infrared_singular",
            Direction::BecGenerator => "bec_generator",
            Direction::OutsideD0 => "outside_D0",
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// True when `f` lies in the form domain of `q₀` intersected with the
/// thermal form domain at `μ = 0`.
pub fn in_d0(f: &TestFunction, disp: Dispersion) -> bool {
    if f.is_zero() {
        return true;
    }
    let d = disp.dim as f64 - 1.0;
    let a0 = f.exponent_at_zero;
    let ainf = f.exponent_at_infinity;
    let bounded_at_zero = a0 >= 0.0;
    let square_integrable = d + 2.0 * a0 > -1.0 && d + 2.0 * ainf < -1.0;
    let thermal_finite = d + 2.0 * a0 - disp.exponent > -1.0;
    bounded_at_zero && square_integrable && thermal_finite
}

pub fn classify_direction(f: &TestFunction, src: &SourceProfile, n0: f64) -> Direction {
    if !in_d0(f, src.disp) {
        return Direction::OutsideD0;
    }
    let pairing = match Pairing::new(src.disp, f, &src.as_test_function()) {
        Ok(p) => p,
        Err(_) => return Direction::OutsideD0,
    };
    if pairing.check("m pairing", -1.5, -1.5).is_err() {
        return Direction::InfraredSingular;
    }
    match form_zero(f, f, n0) {
        Ok(q0) if q0.value.re > 0.0 => Direction::BecGenerator,
        _ => Direction::Physical,
    }
}
