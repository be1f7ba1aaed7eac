//! Piecewise cubic Hermite interpolation on strictly increasing abscissas.

use crate::error::{Error, Result};

/// Cubic Hermite interpolant through `(x, y, dy/dx)` triples.
#[derive(Debug, Clone)]
pub struct Hermite {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl Hermite {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, ds: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() || xs.len() != ds.len() {
            return Err(Error::InvalidArgument("interpolation needs >= 2 matching samples".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("interpolation abscissas must increase strictly".into()));
        }
        Ok(Self { xs, ys, ds })
    }

    /// Fritsch–Carlson monotone cubic: slopes are chosen from the data so the
    /// interpolant preserves monotonicity of each interval.
    pub fn monotone(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::InvalidArgument("interpolation needs >= 2 matching samples".into()));
        }
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut ds = vec![0.0; n];
        if n == 2 {
            ds[0] = delta[0];
            ds[1] = delta[0];
        } else {
            ds[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            ds[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
            for i in 1..n - 1 {
                if delta[i - 1] * delta[i] > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    ds[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
        }
        Self::new(xs, ys, ds)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    fn locate(&self, x: f64) -> Option<usize> {
        let (lo, hi) = self.range();
        if !(x >= lo && x <= hi) {
            return None;
        }
        let i = self.xs.partition_point(|&v| v <= x);
        Some(i.clamp(1, self.xs.len() - 1) - 1)
    }

    /// Value at `x`, or `None` outside the sampled range.
    pub fn eval(&self, x: f64) -> Option<f64> {
        self.eval_with_slope(x).map(|(v, _)| v)
    }

    /// Value and first derivative of the interpolant at `x`.
    pub fn eval_with_slope(&self, x: f64) -> Option<(f64, f64)> {
        let i = self.locate(x)?;
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let s = (x - x0) / h;
        let (y0, y1, d0, d1) = (self.ys[i], self.ys[i + 1], self.ds[i], self.ds[i + 1]);
        let v = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s) * y0
            + s * (1.0 - s) * (1.0 - s) * h * d0
            + s * s * (3.0 - 2.0 * s) * y1
            + s * s * (s - 1.0) * h * d1;
        let dv = 6.0 * s * (s - 1.0) / h * (y0 - y1)
            + (1.0 - s) * (1.0 - 3.0 * s) * d0
            + s * (3.0 * s - 2.0) * d1;
        Some((v, dv))
    }
}

// Three-point end slope, limited so it keeps the sign of the first secant.
fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}
