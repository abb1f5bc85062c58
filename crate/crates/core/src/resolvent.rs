//! Resolvent expectations through Laplace transforms of characteristic
//! functionals.
//!
//! `ψ(R(λ,f)) = -i ∫_0^{sgn(λ)∞} e^{-λs} ψ(e^{isΦ(f)}) ds`, evaluated on
//! `[0, s*]` by adaptive quadrature with an explicit tail certificate. All
//! values of `s` share one ensemble, so the integrand is smooth in `s`.

use std::cell::Cell;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::ensemble::Estimate;
use crate::error::{invalid, Result};
use crate::momentum::{classify_direction, Direction, SourceProfile, TestFunction};
use crate::quadrature::{integrate_breaks, QuadConfig, Vector};
use crate::state::{EquilibriumState, JointCharfun, ScaledCharfun};

#[derive(Debug, Clone, Copy)]
pub struct ResolventConfig {
    pub quad: QuadConfig,
    /// Absolute bound required of the discarded tail `∫_{s*}^∞`.
    pub tail_tol: f64,
    /// 8-point Gauss-Legendre panels per octave for two-point integrals;
    /// the error estimate compares against twice as many.
    pub panels: usize,
}

impl Default for ResolventConfig {
    fn default() -> Self {
        ResolventConfig {
            quad: QuadConfig {
                abs_tol: 1e-12,
                rel_tol: 1e-10,
                max_intervals: 2000,
            },
            tail_tol: 1e-12,
            panels: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventValue {
    pub value: Complex64,
    pub quad_error: f64,
    pub mc_error: f64,
    pub tail_bound: f64,
    pub cutoff: f64,
}

impl ResolventValue {
    pub fn error(&self) -> f64 {
        self.quad_error + self.mc_error + self.tail_bound
    }
}

fn check_lambda(name: &'static str, lambda: f64) -> Result<()> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(invalid(name, format!("must be finite and nonzero, got {lambda}")));
    }
    Ok(())
}

/// Cutoff `s*` with `e^{-|λ|s* - q s*²/4}/|λ| ≤ tol`, starting from
/// `max(4/|λ|, 8/√q)`.
fn cutoff(lambda: f64, q: f64, tol: f64) -> (f64, f64) {
    let l = lambda.abs();
    let mut s = 4.0 / l;
    if q > 0.0 {
        s = s.max(8.0 / q.sqrt());
    }
    let tail = |s: f64| (-l * s - 0.25 * q.max(0.0) * s * s).exp() / l;
    while tail(s) > tol {
        s *= 1.5;
    }
    (s, tail(s))
}

/// As [`cutoff`], padded for a factor `s^power`.
fn laplace_cutoff(lambda: f64, q: f64, power: i32, tol: f64) -> (f64, f64) {
    let l = lambda.abs();
    let (mut s_star, mut tail) = cutoff(lambda, q, tol);
    if power > 0 {
        let p = f64::from(power);
        // ∫_s^∞ x^p e^{-l x} dx ≤ e^{-l s} (s + p/l)^p / l  for s ≥ p/l
        let moment_tail = |s: f64| (-l * s - 0.25 * q.max(0.0) * s * s).exp() * (s + p / l).powf(p) / l;
        s_star = s_star.max(p / l);
        while moment_tail(s_star) > tol {
            s_star *= 1.5;
        }
        tail = moment_tail(s_star);
    }
    (s_star, tail)
}

// split where the envelope has decayed by e and by e^4 so panels follow it
fn laplace_breaks(l: f64, s_star: f64) -> Vec<f64> {
    [0.0, 1.0 / l, 4.0 / l, s_star]
        .into_iter()
        .filter(|b| *b <= s_star)
        .collect()
}

/// `∫_0^∞ s^power e^{-|λ|s} φ(sgn(λ) s) ds`, with `|φ(s)| ≤ e^{-qs²/4}`
/// assumed for the tail bound. Generic in `φ`; every evaluation costs a
/// full pass over whatever `φ` averages.
pub fn laplace_half_line<F>(phi: F, lambda: f64, q: f64, power: i32, cfg: &ResolventConfig) -> Result<ResolventValue>
where
    F: Fn(f64) -> Estimate<Complex64>,
{
    check_lambda("lambda", lambda)?;
    let l = lambda.abs();
    let sign = lambda.signum();
    let (s_star, tail) = laplace_cutoff(lambda, q, power, cfg.tail_tol);
    let integrand = |s: f64| {
        let e = phi(sign * s);
        let envelope = (-l * s).exp() * s.powi(power);
        Vector([e.value * envelope, Complex64::new(e.std_error * envelope, 0.0)])
    };
    let est = integrate_breaks(integrand, &laplace_breaks(l, s_star), &cfg.quad)?;
    Ok(ResolventValue {
        value: est.value.0[0],
        quad_error: est.abs_error,
        mc_error: est.value.0[1].re,
        tail_bound: tail,
        cutoff: s_star,
    })
}

/// Chebyshev points of the second kind on `[lo, hi]`, `n + 1` of them
/// (one midpoint for `n = 0`).
fn cheb_nodes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mid = 0.5 * (lo + hi);
    if n == 0 {
        return vec![mid];
    }
    let half = 0.5 * (hi - lo);
    (0..=n)
        .map(|j| mid + half * (PI * j as f64 / n as f64).cos())
        .collect()
}

fn cheb_weight(j: usize, n: usize) -> f64 {
    let w = if j % 2 == 0 { 1.0 } else { -1.0 };
    if j == 0 || j == n {
        0.5 * w
    } else {
        w
    }
}

/// Barycentric Lagrange basis of the nodes at `z`.
fn cheb_basis(nodes: &[f64], z: f64, out: &mut [f64]) {
    let n = nodes.len() - 1;
    if n == 0 {
        out[0] = 1.0;
        return;
    }
    let mut total = 0.0;
    for j in 0..=n {
        let d = z - nodes[j];
        if d == 0.0 {
            out.fill(0.0);
            out[j] = 1.0;
            return;
        }
        out[j] = cheb_weight(j, n) / d;
        total += out[j];
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

fn cheb_eval(nodes: &[f64], values: &[Complex64], z: f64) -> Complex64 {
    let n = nodes.len() - 1;
    if n == 0 {
        return values[0];
    }
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for j in 0..=n {
        let d = z - nodes[j];
        if d == 0.0 {
            return values[j];
        }
        let c = cheb_weight(j, n) / d;
        num += values[j] * c;
        den += c;
    }
    num / den
}

const CHEB_START: usize = 16;
const CHEB_MAX: usize = 1024;

fn real_range(z: impl Iterator<Item = f64>) -> (f64, f64) {
    z.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Ranges this narrow are served by a single node.
fn degenerate(lo: f64, hi: f64) -> bool {
    hi - lo <= 1e-13 * (1.0 + lo.abs().max(hi.abs()))
}

/// Interpolant of `g` on `[lo, hi]`, doubling the Chebyshev order until the
/// new nodes agree with the previous interpolant. Returns nodes, values and
/// the last disagreement.
fn cheb_table<G>(lo: f64, hi: f64, g: G, cfg: &ResolventConfig) -> Result<(Vec<f64>, Vec<Complex64>, f64)>
where
    G: Fn(f64) -> Result<Complex64>,
{
    if degenerate(lo, hi) {
        let nodes = cheb_nodes(lo, hi, 0);
        let values = vec![g(nodes[0])?];
        return Ok((nodes, values, 0.0));
    }
    let mut n = CHEB_START;
    let mut nodes = cheb_nodes(lo, hi, n);
    let mut values = nodes.iter().map(|&z| g(z)).collect::<Result<Vec<_>>>()?;
    loop {
        let fine = cheb_nodes(lo, hi, 2 * n);
        let mut fine_values = Vec::with_capacity(fine.len());
        let mut gap: f64 = 0.0;
        for (j, &z) in fine.iter().enumerate() {
            if j % 2 == 0 {
                fine_values.push(values[j / 2]);
            } else {
                let v = g(z)?;
                gap = gap.max((v - cheb_eval(&nodes, &values, z)).norm());
                fine_values.push(v);
            }
        }
        n *= 2;
        nodes = fine;
        values = fine_values;
        let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.norm()));
        if gap <= cfg.quad.abs_tol.max(cfg.quad.rel_tol * scale) {
            return Ok((nodes, values, gap));
        }
        if n >= CHEB_MAX {
            log::warn!("interpolation table stopped at order {n} with disagreement {gap:e}");
            return Ok((nodes, values, gap));
        }
    }
}

/// `∫_0^∞ s^power e^{-|λ|s} φ_{af}(sgn(λ) s) ds` from the scaled functional
/// of `f`, using `φ_{af}(s) = φ_f(as)`.
///
/// For real Z the integral is done per loop: `g(z) = ∫ s^p e^{-|λ|s - a²qs²/4
/// - i sgn(λ) s a z} ds` is tabulated on a Chebyshev grid over the sampled
/// range and averaged over the ensemble, so the MC error is the standard
/// error of that average.
pub fn laplace_transform(
    sc: &ScaledCharfun,
    lambda: f64,
    amplitude: f64,
    power: i32,
    cfg: &ResolventConfig,
) -> Result<ResolventValue> {
    check_lambda("lambda", lambda)?;
    let l = lambda.abs();
    let sign = lambda.signum();
    let q = sc.q() * amplitude * amplitude;
    let z = sc.z();
    let ens = sc.ensemble();
    if ens.is_some() && z.iter().any(|v| v.im != 0.0) {
        return laplace_half_line(|s| sc.eval(amplitude * s), lambda, q, power, cfg);
    }
    let (s_star, tail) = laplace_cutoff(lambda, q, power, cfg.tail_tol);
    let breaks = laplace_breaks(l, s_star);
    let quad_error = Cell::new(0.0_f64);
    let kernel = |x: f64| -> Result<Complex64> {
        let est = integrate_breaks(
            |s: f64| Complex64::from_polar((-l * s - 0.25 * q * s * s).exp() * s.powi(power), -sign * s * x),
            &breaks,
            &cfg.quad,
        )?;
        quad_error.set(quad_error.get().max(est.abs_error));
        Ok(est.value)
    };
    let (value, mc_error, interp) = match ens {
        None => (kernel(0.0)?, 0.0, 0.0),
        Some(ens) => {
            let (lo, hi) = real_range(z.iter().map(|v| amplitude * v.re));
            let (nodes, values, gap) = cheb_table(lo, hi, kernel, cfg)?;
            let est = ens.weighted_mean(|i| cheb_eval(&nodes, &values, amplitude * z[i].re));
            (est.value, est.std_error, gap)
        }
    };
    Ok(ResolventValue {
        value,
        quad_error: quad_error.get() + interp,
        mc_error,
        tail_bound: tail,
        cutoff: s_star,
    })
}

/// `ψ(R(λ, f))`.
pub fn resolvent_onepoint(state: &EquilibriumState, lambda: f64, f: &TestFunction, cfg: &ResolventConfig) -> Result<ResolventValue> {
    check_lambda("lambda", lambda)?;
    let sc = state.scaled(f)?;
    resolvent_from_scaled(&sc, lambda, cfg)
}

/// `ψ(R(λ, f))` from a precomputed characteristic functional.
pub fn resolvent_from_scaled(sc: &ScaledCharfun, lambda: f64, cfg: &ResolventConfig) -> Result<ResolventValue> {
    let lap = laplace_transform(sc, lambda, 1.0, 0, cfg)?;
    Ok(ResolventValue {
        value: lap.value * Complex64::new(0.0, -lambda.signum()),
        ..lap
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPointValue {
    pub value: Complex64,
    pub quad_error: f64,
    pub mc_error: f64,
    pub tail_bound: f64,
}

impl TwoPointValue {
    pub fn error(&self) -> f64 {
        self.quad_error + self.mc_error + self.tail_bound
    }

    pub fn within_bound(&self, lambda: f64, mu: f64) -> bool {
        self.value.norm() <= 1.0 / (lambda.abs() * mu.abs()) + self.error()
    }
}

// 8-point Gauss-Legendre on [-1, 1]
const GL_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_W: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Gauss-Legendre nodes on `[0, end]`: octaves `[0, h], [h, 2h], [2h, 4h], …`
/// with `h = scale/4`, each split into `panels` equal pieces.
fn gauss_legendre_octaves(scale: f64, end: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let mut breaks = vec![0.0];
    let mut b = (0.25 * scale).min(end);
    while b < end {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(end);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for w in breaks.windows(2) {
        let h = (w[1] - w[0]) / panels as f64;
        for p in 0..panels {
            let mid = w[0] + (p as f64 + 0.5) * h;
            for (x, wt) in GL_X.iter().zip(GL_W) {
                for sgn in [-1.0, 1.0] {
                    nodes.push(mid + sgn * x * 0.5 * h);
                    weights.push(wt * 0.5 * h);
                }
            }
        }
    }
    (nodes, weights)
}

/// The deterministic part of the two-point integrand on a quadrature grid.
struct TwoPointGrid {
    /// `sgn(λ) s_a`, `sgn(μ) t_b`
    s: Vec<f64>,
    t: Vec<f64>,
    /// row-major `s × t`: weights × `e^{-|λ|s-|μ|t} e^{-q/4} e^{-(i/2)stσ}`
    f: Vec<Complex64>,
}

impl TwoPointGrid {
    fn new(joint: &JointCharfun, lambda: f64, mu: f64, s_end: f64, t_end: f64, panels: usize) -> Self {
        let s_scale = axis_scale(lambda, joint.q(1.0, 0.0));
        let t_scale = axis_scale(mu, joint.q(0.0, 1.0));
        let (sn, sw) = gauss_legendre_octaves(s_scale, s_end, panels);
        let (tn, tw) = gauss_legendre_octaves(t_scale, t_end, panels);
        let s: Vec<f64> = sn.iter().map(|v| v * lambda.signum()).collect();
        let t: Vec<f64> = tn.iter().map(|v| v * mu.signum()).collect();
        let mut f = Vec::with_capacity(s.len() * t.len());
        for (&si, &wi) in s.iter().zip(&sw) {
            for (&tj, &wj) in t.iter().zip(&tw) {
                let env = (-lambda * si - mu * tj - 0.25 * joint.q(si, tj)).exp() * wi * wj;
                f.push(Complex64::from_polar(env, -0.5 * si * tj * joint.sigma()));
            }
        }
        TwoPointGrid { s, t, f }
    }

    fn total(&self) -> Complex64 {
        self.f.iter().sum()
    }

    /// `h(x_i, y_j) = Σ_ab F_ab e^{-i(s_a x_i + t_b y_j)}`, row-major `x × y`.
    fn table(&self, xs: &[f64], ys: &[f64]) -> Vec<Complex64> {
        let nt = self.t.len();
        let phases = |nodes: &[f64], pts: &[f64]| -> Vec<Vec<Complex64>> {
            pts.iter()
                .map(|&x| nodes.iter().map(|&s| Complex64::from_polar(1.0, -s * x)).collect())
                .collect()
        };
        let ex = phases(&self.s, xs);
        let ey = phases(&self.t, ys);
        let mut out = vec![Complex64::new(0.0, 0.0); xs.len() * ys.len()];
        for (j, eyj) in ey.iter().enumerate() {
            let v: Vec<Complex64> = self
                .f
                .chunks(nt)
                .map(|row| row.iter().zip(eyj).map(|(a, b)| a * b).sum())
                .collect();
            for (i, exi) in ex.iter().enumerate() {
                out[i * ys.len() + j] = exi.iter().zip(&v).map(|(a, b)| a * b).sum();
            }
        }
        out
    }
}

/// Length scale of the envelope `e^{-|λ|s - qs²/4}` along one axis.
fn axis_scale(lambda: f64, q: f64) -> f64 {
    let mut scale = 1.0 / lambda.abs();
    if q > 0.0 {
        scale = scale.min(2.0 / q.sqrt());
    }
    scale
}

/// Two-dimensional interpolation table over the sampled `(Z_f, Z_g)` box,
/// doubling the order of both axes until the new nodes agree with the
/// previous interpolant along grid lines.
fn twopoint_table(grid: &TwoPointGrid, x: (f64, f64), y: (f64, f64), cfg: &ResolventConfig) -> (Vec<f64>, Vec<f64>, Vec<Complex64>, f64) {
    let order = |r: (f64, f64), n: usize| if degenerate(r.0, r.1) { 0 } else { n };
    let mut n = CHEB_START;
    let mut xs = cheb_nodes(x.0, x.1, order(x, n));
    let mut ys = cheb_nodes(y.0, y.1, order(y, n));
    let mut h = grid.table(&xs, &ys);
    if xs.len() == 1 && ys.len() == 1 {
        return (xs, ys, h, 0.0);
    }
    loop {
        let fx = cheb_nodes(x.0, x.1, order(x, 2 * n));
        let fy = cheb_nodes(y.0, y.1, order(y, 2 * n));
        let fh = grid.table(&fx, &fy);
        let (sx, sy) = (fx.len() / xs.len().max(1), fy.len() / ys.len().max(1));
        let mut gap: f64 = 0.0;
        // new nodes on coarse grid lines: interpolate along the line
        for (i, &xv) in fx.iter().enumerate() {
            for (j, &yv) in fy.iter().enumerate() {
                let (ci, cj) = (i % sx.max(1) == 0 && sx > 1, j % sy.max(1) == 0 && sy > 1);
                let on_x = xs.len() == 1 || ci;
                let on_y = ys.len() == 1 || cj;
                let coarse = if on_x && !on_y {
                    let row: Vec<Complex64> = (0..ys.len()).map(|b| h[(i / sx) * ys.len() + b]).collect();
                    cheb_eval(&ys, &row, yv)
                } else if on_y && !on_x {
                    let col: Vec<Complex64> = (0..xs.len()).map(|a| h[a * ys.len() + j / sy]).collect();
                    cheb_eval(&xs, &col, xv)
                } else {
                    continue;
                };
                gap = gap.max((fh[i * fy.len() + j] - coarse).norm());
            }
        }
        n *= 2;
        xs = fx;
        ys = fy;
        h = fh;
        let scale = h.iter().fold(0.0_f64, |m, v| m.max(v.norm()));
        if gap <= cfg.quad.abs_tol.max(cfg.quad.rel_tol * scale) {
            return (xs, ys, h, gap);
        }
        if n >= CHEB_MAX / 4 {
            log::warn!("two-point table stopped at order {n} with disagreement {gap:e}");
            return (xs, ys, h, gap);
        }
    }
}

/// Weighted spin moments on the tensor grid `s × t` as matrix products over
/// the ensemble: the mean `E~[e^{-i(sZ_f+tZ_g)}]` and its standard error.
/// Used for complex Z, where no interpolation table applies.
fn spin_matrix(joint: &JointCharfun, s: &[f64], t: &[f64]) -> Vec<Estimate<Complex64>> {
    let Some((ens, zf, zg)) = joint.columns() else {
        return vec![
            Estimate {
                value: Complex64::new(1.0, 0.0),
                std_error: 0.0,
                ess: f64::NAN,
            };
            s.len() * t.len()
        ];
    };
    let w = ens.weights();
    let (sum_w, _) = ens.sum_w();
    let minus_i = Complex64::new(0.0, -1.0);
    let b: Vec<Vec<Complex64>> = t
        .iter()
        .map(|&tj| zg.iter().map(|z| (minus_i * z * tj).exp()).collect())
        .collect();
    let rows = ens.exec().map(s.len(), |i| {
        let a: Vec<Complex64> = zf.iter().map(|z| (minus_i * z * s[i]).exp()).collect();
        b.iter()
            .map(|bj| {
                let mut m1 = Complex64::new(0.0, 0.0);
                let mut m2 = Complex64::new(0.0, 0.0);
                let mut abs2 = 0.0;
                let mut w2 = 0.0;
                for k in 0..w.len() {
                    let v = a[k] * bj[k];
                    let wk = w[k];
                    m1 += v * wk;
                    m2 += v * (wk * wk);
                    abs2 += wk * wk * v.norm_sqr();
                    w2 += wk * wk;
                }
                let mean = m1 / sum_w;
                let spread = abs2 - 2.0 * (mean.conj() * m2).re + mean.norm_sqr() * w2;
                Estimate {
                    value: mean,
                    std_error: spread.max(0.0).sqrt() / sum_w,
                    ess: ens.ess(),
                }
            })
            .collect::<Vec<_>>()
    });
    rows.into_iter().flatten().collect()
}

fn twopoint_direct(joint: &JointCharfun, grid: &TwoPointGrid) -> (Complex64, f64) {
    let spin = spin_matrix(joint, &grid.s, &grid.t);
    let mut total = Complex64::new(0.0, 0.0);
    let mut mc = 0.0;
    for (e, fv) in spin.iter().zip(&grid.f) {
        total += e.value * fv;
        mc += e.std_error * fv.norm();
    }
    (total, mc)
}

/// `ψ(R(λ,f) R(μ,g))` by tensor Gauss-Legendre panels; the quadrature error
/// is the change under doubling the panel count.
pub fn resolvent_twopoint(
    state: &EquilibriumState,
    lambda: f64,
    f: &TestFunction,
    mu: f64,
    g: &TestFunction,
    cfg: &ResolventConfig,
) -> Result<TwoPointValue> {
    check_lambda("lambda", lambda)?;
    check_lambda("mu", mu)?;
    let joint = state.joint(f, g)?;
    twopoint_from_joint(&joint, lambda, mu, cfg)
}

pub fn twopoint_from_joint(joint: &JointCharfun, lambda: f64, mu: f64, cfg: &ResolventConfig) -> Result<TwoPointValue> {
    check_lambda("lambda", lambda)?;
    check_lambda("mu", mu)?;
    if cfg.panels == 0 {
        return Err(invalid("panels", "must be positive"));
    }
    // |Φ(s,t)| ≤ 1, so each axis tail is bounded by the pure exponential
    let (s_end, s_tail) = cutoff(lambda, 0.0, cfg.tail_tol);
    let (t_end, t_tail) = cutoff(mu, 0.0, cfg.tail_tol);
    let coarse = TwoPointGrid::new(joint, lambda, mu, s_end, t_end, cfg.panels);
    let fine = TwoPointGrid::new(joint, lambda, mu, s_end, t_end, 2 * cfg.panels);
    let (value, quad_error, mc_error) = match joint.columns() {
        None => {
            let v = fine.total();
            (v, (v - coarse.total()).norm(), 0.0)
        }
        Some((ens, zf, zg)) if zf.iter().chain(zg).all(|v| v.im == 0.0) => {
            let xr = real_range(zf.iter().map(|v| v.re));
            let yr = real_range(zg.iter().map(|v| v.re));
            let (xs, ys, h, gap) = twopoint_table(&fine, xr, yr, cfg);
            let hc = coarse.table(&xs, &ys);
            let quad = h.iter().zip(&hc).fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()));
            let est = ens.weighted_mean(|k| {
                let mut bx = vec![0.0; xs.len()];
                let mut by = vec![0.0; ys.len()];
                cheb_basis(&xs, zf[k].re, &mut bx);
                cheb_basis(&ys, zg[k].re, &mut by);
                let mut acc = Complex64::new(0.0, 0.0);
                for (row, &a) in h.chunks(ys.len()).zip(&bx) {
                    if a != 0.0 {
                        let inner: Complex64 = row.iter().zip(&by).map(|(v, b)| v * b).sum();
                        acc += inner * a;
                    }
                }
                acc
            });
            (est.value, quad + gap, est.std_error)
        }
        Some(_) => {
            let (v, mc) = twopoint_direct(joint, &fine);
            let (c, _) = twopoint_direct(joint, &coarse);
            (v, (v - c).norm(), mc)
        }
    };
    let sign = lambda.signum() * mu.signum();
    Ok(TwoPointValue {
        value: -value * sign,
        quad_error,
        mc_error,
        tail_bound: s_tail / mu.abs() + t_tail / lambda.abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRow {
    pub amplitude: f64,
    pub modulus: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayScan {
    pub lambda: f64,
    pub q_bec: f64,
    pub rows: Vec<DecayRow>,
    pub strictly_decreasing: bool,
    pub below_threshold: bool,
    /// The decay assertions apply only when `q_bec` exceeds the configured floor.
    pub asserted: bool,
}

impl DecayScan {
    pub fn passes(&self) -> bool {
        !self.asserted || (self.strictly_decreasing && self.below_threshold)
    }
}

/// `|ψ(R(λ, t f))|` along increasing amplitudes, reusing `φ_{tf}(s) = φ_f(ts)`.
pub fn bec_decay_scan(
    state: &EquilibriumState,
    lambda: f64,
    f: &TestFunction,
    t_grid: &[f64],
    threshold: f64,
    q_floor: f64,
    cfg: &ResolventConfig,
) -> Result<DecayScan> {
    check_lambda("lambda", lambda)?;
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] <= 0.0 {
        return Err(invalid("t_grid", "amplitudes must be positive and strictly increasing"));
    }
    let sc = state.scaled(f)?;
    decay_from_scaled(&sc, lambda, t_grid, threshold, q_floor, cfg)
}

fn decay_from_scaled(
    sc: &ScaledCharfun,
    lambda: f64,
    t_grid: &[f64],
    threshold: f64,
    q_floor: f64,
    cfg: &ResolventConfig,
) -> Result<DecayScan> {
    let rows = t_grid
        .iter()
        .map(|&t| {
            let lap = laplace_transform(sc, lambda, t, 0, cfg)?;
            Ok(DecayRow {
                amplitude: t,
                modulus: lap.value.norm(),
                error: lap.error(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let strictly_decreasing = rows.windows(2).all(|w| w[1].modulus < w[0].modulus);
    let below_threshold = rows.last().is_some_and(|r| r.modulus < threshold);
    let asserted = sc.q() > q_floor;
    if asserted && !(strictly_decreasing && below_threshold) {
        log::warn!("slow resolvent decay along the amplitude grid (q_bec = {:e})", sc.q());
    }
    Ok(DecayScan {
        lambda,
        q_bec: sc.q(),
        rows,
        strictly_decreasing,
        below_threshold,
        asserted,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdealRow {
    pub name: String,
    pub class: Direction,
    /// `|ψ(R(1, f))|` and its error, for directions the state accepts.
    pub witness: Option<(f64, f64)>,
    pub decay: Option<DecayScan>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdealReport {
    pub rows: Vec<IdealRow>,
    /// Directions generating the infrared ideal.
    pub j_ir: Vec<String>,
    pub x_bec_empty: bool,
}

/// Amplitudes used for the decay evidence of condensate directions.
pub const DECAY_AMPLITUDES: [f64; 3] = [1.0, 2.0, 4.0];

/// Classifies every direction; with a state, physical directions get a
/// nonvanishing resolvent witness and condensate directions a decay scan.
pub fn ideal_report(
    source: &SourceProfile,
    n0: f64,
    directions: &[(String, TestFunction)],
    state: Option<&EquilibriumState>,
    cfg: &ResolventConfig,
) -> Result<IdealReport> {
    let mut rows = Vec::with_capacity(directions.len());
    for (name, f) in directions {
        let class = classify_direction(f, source, n0);
        let mut witness = None;
        let mut decay = None;
        if let Some(st) = state {
            match class {
                Direction::Physical => {
                    let r = resolvent_onepoint(st, 1.0, f, cfg)?;
                    witness = Some((r.value.norm(), r.error()));
                }
                Direction::BecGenerator => {
                    let sc = st.scaled(f)?;
                    let r = resolvent_from_scaled(&sc, 1.0, cfg)?;
                    witness = Some((r.value.norm(), r.error()));
                    let first = r.value.norm();
                    decay = Some(decay_from_scaled(&sc, 1.0, &DECAY_AMPLITUDES, 0.1 * first, 1e-8, cfg)?);
                }
                _ => {}
            }
        }
        rows.push(IdealRow {
            name: name.clone(),
            class,
            witness,
            decay,
        });
    }
    let j_ir = rows
        .iter()
        .filter(|r| r.class == Direction::InfraredSingular)
        .map(|r| r.name.clone())
        .collect();
    let x_bec_empty = rows.iter().all(|r| r.class != Direction::BecGenerator);
    Ok(IdealReport { rows, j_ir, x_bec_empty })
}
