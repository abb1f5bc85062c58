//! Adaptive Gauss-Kronrod (G10/K21) quadrature with a tangent map for the
//! half line.
//!
//! The integrand may be scalar, complex, or a small fixed-size vector of
//! either; vector integrands share abscissae, which matters when several
//! moments of the same expensive momentum-space integrand are needed.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    /// Size used for error control; the max-norm for vectors.
    fn magnitude(&self) -> f64;
    fn is_finite(&self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Fixed-size vector integrand value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vector<T, const N: usize>(pub [T; N]);

impl<T: QuadValue, const N: usize> Add for Vector<T, N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a = *a + b;
        }
        self
    }
}

impl<T: QuadValue, const N: usize> Sub for Vector<T, N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a = *a - b;
        }
        self
    }
}

impl<T: QuadValue, const N: usize> Mul<f64> for Vector<T, N> {
    type Output = Self;
    fn mul(mut self, rhs: f64) -> Self {
        for a in self.0.iter_mut() {
            *a = *a * rhs;
        }
        self
    }
}

impl<T: QuadValue, const N: usize> QuadValue for Vector<T, N> {
    fn zero() -> Self {
        Vector([T::zero(); N])
    }
    fn magnitude(&self) -> f64 {
        self.0.iter().map(QuadValue::magnitude).fold(0.0, f64::max)
    }
    fn is_finite(&self) -> bool {
        self.0.iter().all(QuadValue::is_finite)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate<V> {
    pub value: V,
    pub abs_error: f64,
    pub evaluations: usize,
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_36,
    0.295_524_224_714_752_87,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

fn gk21<V: QuadValue, F: Fn(f64) -> V>(f: &F, a: f64, b: f64) -> (V, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = V::zero();
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).magnitude();
    (value, err)
}

struct Panel<V> {
    a: f64,
    b: f64,
    value: V,
    err: f64,
}

impl<V> PartialEq for Panel<V> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<V> Eq for Panel<V> {}
impl<V> PartialOrd for Panel<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Panel<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrates `f` over the union of consecutive intervals given by `breaks`
/// (at least two increasing points).
pub fn integrate_breaks<V, F>(f: F, breaks: &[f64], cfg: &QuadConfig) -> Result<Estimate<V>>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    debug_assert!(breaks.len() >= 2);
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (value, err) = gk21(&f, w[0], w[1]);
            evaluations += 21;
            heap.push(Panel { a: w[0], b: w[1], value, err });
        }
    }
    loop {
        let (total, total_err) = heap
            .iter()
            .fold((V::zero(), 0.0), |(v, e), p| (v + p.value, e + p.err));
        if !total.is_finite() {
            return Err(Error::Quadrature {
                achieved: f64::INFINITY,
                requested: cfg.abs_tol,
            });
        }
        let target = cfg.abs_tol.max(cfg.rel_tol * total.magnitude());
        if total_err <= target {
            return Ok(Estimate {
                value: total,
                abs_error: total_err,
                evaluations,
            });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => {
                return Ok(Estimate {
                    value: V::zero(),
                    abs_error: 0.0,
                    evaluations,
                })
            }
        };
        let mid = 0.5 * (worst.a + worst.b);
        let too_narrow = (worst.b - worst.a) <= 64.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs()).max(1e-300);
        if heap.len() + 2 > cfg.max_intervals || too_narrow {
            return Err(Error::Quadrature {
                achieved: total_err,
                requested: target,
            });
        }
        let (lv, le) = gk21(&f, worst.a, mid);
        let (rv, re) = gk21(&f, mid, worst.b);
        evaluations += 42;
        heap.push(Panel { a: worst.a, b: mid, value: lv, err: le });
        heap.push(Panel { a: mid, b: worst.b, value: rv, err: re });
    }
}

pub fn integrate<V, F>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<Estimate<V>>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    if a == b {
        return Ok(Estimate {
            value: V::zero(),
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    if b < a {
        let mut e = integrate_breaks(f, &[b, a], cfg)?;
        e.value = e.value * -1.0;
        return Ok(e);
    }
    integrate_breaks(f, &[a, b], cfg)
}

/// Integrates over `[0, ∞)` through `k = tan θ`, with optional interior
/// breakpoints in `k` (e.g. a hard momentum cutoff).
pub fn integrate_radial<V, F>(f: F, breakpoints: &[f64], cfg: &QuadConfig) -> Result<Estimate<V>>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    let mut thetas = vec![0.0];
    let mut bps: Vec<f64> = breakpoints.iter().copied().filter(|k| *k > 0.0 && k.is_finite()).collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    thetas.extend(bps.iter().map(|k| k.atan()));
    // splits the bulk of typical profiles from the tail
    if bps.is_empty() {
        thetas.push(1.0f64.atan());
    }
    thetas.push(std::f64::consts::FRAC_PI_2);
    let mapped = |theta: f64| {
        let k = theta.tan();
        if !k.is_finite() {
            return V::zero();
        }
        let c = theta.cos();
        f(k) * (1.0 / (c * c))
    };
    integrate_breaks(mapped, &thetas, cfg)
}
