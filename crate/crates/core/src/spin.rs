//! The finite-temperature spin-loop measure: a β-periodic two-state jump
//! process on `S_β = [-β/2, β/2]`, together with exact transfer-matrix
//! oracles for its correlations.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinMeasureParams {
    pub beta: f64,
    pub epsilon: f64,
}

impl SpinMeasureParams {
    pub fn new(beta: f64, epsilon: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(invalid("beta", format!("must be > 0, got {beta}")));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(invalid("epsilon", format!("must be >= 0, got {epsilon}")));
        }
        Ok(SpinMeasureParams { beta, epsilon })
    }
}

/// A β-periodic path: an initial sign at `-β/2` and an even number of
/// sorted jump times in `(-β/2, β/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinLoop {
    pub initial_sign: i8,
    pub jumps: Vec<f64>,
    pub beta: f64,
}

impl SpinLoop {
    pub fn constant(sign: i8, beta: f64) -> Self {
        SpinLoop {
            initial_sign: sign,
            jumps: Vec::new(),
            beta,
        }
    }

    pub fn jump_count(&self) -> usize {
        self.jumps.len()
    }

    /// `X_t = σ (-1)^{#{j : t_j ≤ t}}`.
    pub fn value_at(&self, t: f64) -> f64 {
        let flips = self.jumps.partition_point(|&s| s <= t);
        let sign = if flips % 2 == 0 { self.initial_sign } else { -self.initial_sign };
        sign as f64
    }

    /// Maximal constancy intervals `(a, b, sign)` covering `S_β` in order.
    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let half = 0.5 * self.beta;
        let n = self.jumps.len();
        (0..=n).map(move |i| {
            let a = if i == 0 { -half } else { self.jumps[i - 1] };
            let b = if i == n { half } else { self.jumps[i] };
            let sign = if i % 2 == 0 { self.initial_sign } else { -self.initial_sign };
            (a, b, sign as f64)
        })
    }

    /// The loop rotated by `a` around the circle `S_β`.
    pub fn rotated(&self, a: f64) -> SpinLoop {
        let beta = self.beta;
        let half = 0.5 * beta;
        let wrap = |t: f64| {
            let mut x = (t + half + a).rem_euclid(beta) - half;
            if x >= half {
                x -= beta;
            }
            x
        };
        // the new start -β/2 sits at old time -β/2 - a (mod β)
        let old_start = (-a).rem_euclid(beta) - half;
        let initial_sign = self.value_at(old_start) as i8;
        let mut jumps: Vec<f64> = self.jumps.iter().map(|&t| wrap(t)).collect();
        jumps.sort_by(f64::total_cmp);
        SpinLoop {
            initial_sign,
            jumps,
            beta,
        }
    }

    /// Reflection `t ↦ -t`.
    pub fn reflected(&self) -> SpinLoop {
        let jumps: Vec<f64> = self.jumps.iter().rev().map(|t| -t).collect();
        // parity is even, so the value at β/2 (the new start) is the initial sign
        SpinLoop {
            initial_sign: self.initial_sign,
            jumps,
            beta: self.beta,
        }
    }
}

/// `p_t(σ₁, σ₂) = ½ (1 + σ₁σ₂ e^{-2εt})`.
pub fn transition_prob(epsilon: f64, t: f64, sigma1: i8, sigma2: i8) -> f64 {
    0.5 * (1.0 + (sigma1 * sigma2) as f64 * (-2.0 * epsilon * t).exp())
}

/// Distribution of the number of jump pairs `m`: `P(m) ∝ (εβ)^{2m}/(2m)!`.
///
/// Terms are kept in log space relative to `e^{εβ}` so that large `εβ`
/// neither overflows nor underflows; the series is truncated once a term
/// past the mode drops below `1e-16` of the running sum.
#[derive(Debug, Clone)]
pub struct JumpCountLaw {
    x: f64,
    cumulative: Vec<f64>,
    scaled_mass: f64,
}

impl JumpCountLaw {
    pub fn new(params: &SpinMeasureParams) -> Self {
        let x = params.epsilon * params.beta;
        if x == 0.0 {
            return JumpCountLaw {
                x,
                cumulative: vec![1.0],
                scaled_mass: 1.0,
            };
        }
        let two_ln_x = 2.0 * x.ln();
        let mut log_term = -x;
        let mut sum = 0.0;
        let mut cumulative = Vec::new();
        let mut m = 0usize;
        loop {
            let term = log_term.exp();
            sum += term;
            cumulative.push(sum);
            let past_mode = (2 * m) as f64 >= x;
            if past_mode && term < 1e-16 * sum {
                break;
            }
            log_term += two_ln_x - (((2 * m + 1) * (2 * m + 2)) as f64).ln();
            m += 1;
        }
        JumpCountLaw {
            x,
            cumulative,
            scaled_mass: sum,
        }
    }

    /// `Σ_m (εβ)^{2m}/(2m)!`, which equals `cosh(εβ)`.
    pub fn normalizer(&self) -> f64 {
        self.scaled_mass * self.x.exp()
    }

    pub fn max_pairs(&self) -> usize {
        self.cumulative.len() - 1
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random::<f64>() * self.scaled_mass;
        self.cumulative.partition_point(|&c| c <= u).min(self.max_pairs())
    }
}

/// Sampler for the normalized spin-loop measure.
#[derive(Debug, Clone)]
pub struct LoopSampler {
    params: SpinMeasureParams,
    law: JumpCountLaw,
}

impl LoopSampler {
    pub fn new(params: SpinMeasureParams) -> Self {
        LoopSampler {
            law: JumpCountLaw::new(&params),
            params,
        }
    }

    pub fn params(&self) -> &SpinMeasureParams {
        &self.params
    }

    pub fn law(&self) -> &JumpCountLaw {
        &self.law
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SpinLoop {
        let initial_sign = if rng.random::<bool>() { 1 } else { -1 };
        let pairs = if self.params.epsilon == 0.0 { 0 } else { self.law.sample(rng) };
        let beta = self.params.beta;
        let mut jumps: Vec<f64> = (0..2 * pairs).map(|_| (rng.random::<f64>() - 0.5) * beta).collect();
        jumps.sort_by(f64::total_cmp);
        SpinLoop {
            initial_sign,
            jumps,
            beta,
        }
    }
}

pub fn sample_loop<R: Rng + ?Sized>(params: &SpinMeasureParams, rng: &mut R) -> SpinLoop {
    LoopSampler::new(*params).sample(rng)
}

/// Value at time `t ≥ 0` of the (non-periodic) Markov chain started at `sign`
/// with flip rate `ε`, simulated through exponential waiting times.
pub fn sample_markov_endpoint<R: Rng + ?Sized>(epsilon: f64, t: f64, sign: i8, rng: &mut R) -> i8 {
    if epsilon == 0.0 {
        return sign;
    }
    let waiting = Exp::new(epsilon).expect("positive rate");
    let mut clock = waiting.sample(rng);
    let mut value = sign;
    while clock <= t {
        value = -value;
        clock += waiting.sample(rng);
    }
    value
}

type Mat2 = [[f64; 2]; 2];

fn matmul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

/// `e^{εσ_x t} = cosh(εt) I + sinh(εt) σ_x`.
fn transfer(epsilon: f64, t: f64) -> Mat2 {
    let c = (epsilon * t).cosh();
    let s = (epsilon * t).sinh();
    [[c, s], [s, c]]
}

/// A diagonal observable on the two spin states: its values at `σ = +1`, `σ = -1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalObservable {
    pub plus: f64,
    pub minus: f64,
}

impl DiagonalObservable {
    pub const IDENTITY: DiagonalObservable = DiagonalObservable { plus: 1.0, minus: 1.0 };
    pub const SIGMA_Z: DiagonalObservable = DiagonalObservable { plus: 1.0, minus: -1.0 };

    fn apply_right(&self, m: &Mat2) -> Mat2 {
        [[m[0][0] * self.plus, m[0][1] * self.minus], [m[1][0] * self.plus, m[1][1] * self.minus]]
    }
}

/// `(2cosh εβ)^{-1} Tr[e^{εσ_x(s₁+β/2)} f₁ e^{εσ_x(s₂-s₁)} f₂ ⋯ e^{εσ_x(β/2-s_n)}]`.
pub fn correlation_trace(params: &SpinMeasureParams, times: &[f64], observables: &[DiagonalObservable]) -> Result<f64> {
    if times.len() != observables.len() {
        return Err(invalid("observables", "need one observable per time"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("times", "must be sorted"));
    }
    let half = 0.5 * params.beta;
    let eps = params.epsilon;
    let mut prev = -half;
    let mut acc: Mat2 = [[1.0, 0.0], [0.0, 1.0]];
    for (t, obs) in times.iter().zip(observables) {
        acc = obs.apply_right(&matmul(&acc, &transfer(eps, t - prev)));
        prev = *t;
    }
    acc = matmul(&acc, &transfer(eps, half - prev));
    let trace = acc[0][0] + acc[1][1];
    Ok(trace / (2.0 * (eps * params.beta).cosh()))
}

/// `E[X_u X_{u+τ}] = cosh(ε(β-2τ)) / cosh(εβ)`, via transfer matrices.
pub fn two_point_oracle(params: &SpinMeasureParams, tau: f64) -> Result<f64> {
    if !(0.0..=params.beta).contains(&tau) {
        return Err(invalid("tau", format!("must lie in [0, β], got {tau}")));
    }
    let z = DiagonalObservable::SIGMA_Z;
    let start = -0.5 * params.beta;
    correlation_trace(params, &[start, start + tau], &[z, z])
}

/// One Monte Carlo moment compared with its closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleCheck {
    pub quantity: &'static str,
    /// `τ/β` for time-dependent quantities, `NaN` otherwise.
    pub tau_fraction: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub oracle: f64,
}

impl OracleCheck {
    pub fn z_score(&self) -> f64 {
        let d = self.estimate - self.oracle;
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }

    pub fn within(&self, k: f64) -> bool {
        (self.estimate - self.oracle).abs() <= k * self.std_error + 1e-14
    }
}

/// Sampler-vs-oracle battery: `E[X_{-τ/2} X_{τ/2}]`, the stay frequency of
/// the chain over time `τ` started at `+1`, and the mean jump count.
///
/// Chunk `c` draws from `substream(seed, c)` and the per-chunk sums are
/// folded in order, so the output does not depend on the worker count.
pub fn oracle_checks(
    params: &SpinMeasureParams,
    tau_fractions: &[f64],
    samples: usize,
    seed: u64,
    exec: crate::exec::Execution,
) -> Result<Vec<OracleCheck>> {
    if samples < 2 {
        return Err(invalid("samples", "need at least two samples"));
    }
    if tau_fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
        return Err(invalid("tau_fractions", "must lie in [0, 1]"));
    }
    let sampler = LoopSampler::new(*params);
    let beta = params.beta;
    let k = tau_fractions.len();
    // per quantity: (sum, sum of squares); layout [two-point × k, stay × k, jumps]
    let width = 2 * k + 1;
    let chunk = crate::exec::REDUCTION_CHUNK;
    let sums = exec.chunked_fold(
        samples,
        chunk,
        |range| {
            let mut rng = crate::seeds::substream(seed, (range.start / chunk) as u64);
            let mut acc = vec![(0.0f64, 0.0f64); width];
            let mut push = |slot: usize, v: f64| {
                acc[slot].0 += v;
                acc[slot].1 += v * v;
            };
            for _ in range {
                let path = sampler.sample(&mut rng);
                for (j, frac) in tau_fractions.iter().enumerate() {
                    let tau = frac * beta;
                    push(j, path.value_at(-0.5 * tau) * path.value_at(0.5 * tau));
                }
                for (j, frac) in tau_fractions.iter().enumerate() {
                    let stay = sample_markov_endpoint(params.epsilon, frac * beta, 1, &mut rng) == 1;
                    push(k + j, if stay { 1.0 } else { 0.0 });
                }
                push(2 * k, path.jump_count() as f64);
            }
            acc
        },
        vec![(0.0, 0.0); width],
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                x.0 += y.0;
                x.1 += y.1;
            }
            a
        },
    );
    let n = samples as f64;
    let moment = |slot: usize| {
        let (s1, s2) = sums[slot];
        let mean = s1 / n;
        let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
        (mean, (var / n).sqrt())
    };
    let mut out = Vec::with_capacity(width);
    for (j, frac) in tau_fractions.iter().enumerate() {
        let (estimate, std_error) = moment(j);
        out.push(OracleCheck {
            quantity: "two_point",
            tau_fraction: *frac,
            estimate,
            std_error,
            oracle: two_point_oracle(params, frac * beta)?,
        });
    }
    for (j, frac) in tau_fractions.iter().enumerate() {
        let (estimate, std_error) = moment(k + j);
        out.push(OracleCheck {
            quantity: "transition_stay",
            tau_fraction: *frac,
            estimate,
            std_error,
            oracle: transition_prob(params.epsilon, frac * beta, 1, 1),
        });
    }
    let (estimate, std_error) = moment(2 * k);
    let x = params.epsilon * beta;
    out.push(OracleCheck {
        quantity: "jump_count_mean",
        tau_fraction: f64::NAN,
        estimate,
        std_error,
        oracle: x * x.tanh(),
    });
    Ok(out)
}
