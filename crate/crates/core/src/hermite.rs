//! Quintic Hermite interpolation on a uniform grid.
//!
//! Kernel antiderivatives are tabulated together with their first two
//! derivatives (all three come out of the same momentum integral), so the
//! quintic interpolant is sixth-order accurate in the grid step.

use std::ops::{Add, Mul};

#[derive(Debug, Clone)]
pub struct QuinticTable<V> {
    pub start: f64,
    pub step: f64,
    pub values: Vec<V>,
    pub first: Vec<V>,
    pub second: Vec<V>,
}

impl<V> QuinticTable<V>
where
    V: Copy + Add<Output = V> + Mul<f64, Output = V>,
{
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn end(&self) -> f64 {
        self.start + self.step * (self.values.len() - 1) as f64
    }

    /// Interpolated value at `x`, clamped into the tabulated range.
    pub fn eval(&self, x: f64) -> V {
        let n = self.values.len();
        let pos = ((x - self.start) / self.step).clamp(0.0, (n - 1) as f64);
        let mut i = pos.floor() as usize;
        if i >= n - 1 {
            i = n - 2;
        }
        let t = pos - i as f64;
        if t == 0.0 {
            return self.values[i];
        }
        let h = self.step;
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let t5 = t4 * t;
        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        let h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h5 = 0.5 * (t3 - 2.0 * t4 + t5);
        self.values[i] * h0
            + self.first[i] * (h * h1)
            + self.second[i] * (h * h * h2)
            + self.values[i + 1] * h3
            + self.first[i + 1] * (h * h4)
            + self.second[i + 1] * (h * h * h5)
    }
}
