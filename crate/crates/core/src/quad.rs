//! Adaptive Gauss–Kronrod (7, 15) quadrature.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Upper bound on panel bisections in one call.
const MAX_SPLITS: usize = 200_000;

/// Kronrod estimate and |Kronrod − Gauss| on one panel.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = r * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * r, ((k - g) * r).abs())
}

struct Panel {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
    owner: usize,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive integration over the consecutive intervals of `grid`:
/// the panel with the largest error estimate is bisected until the summed
/// estimate drops below `tol`. Returns per-interval integrals and the total
/// error estimate.
fn panels<F: Fn(f64) -> f64>(f: &F, grid: &[f64], tol: f64) -> Result<(Vec<f64>, f64)> {
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    for (i, w) in grid.windows(2).enumerate() {
        let (val, err) = gk15(f, w[0], w[1]);
        if !val.is_finite() {
            return Err(Error::Quadrature { a: w[0], b: w[1], err: f64::INFINITY });
        }
        total += err;
        heap.push(Panel { a: w[0], b: w[1], val, err, owner: i });
    }
    let mut splits = 0;
    while total > tol {
        let Some(worst) = heap.pop() else { break };
        let m = 0.5 * (worst.a + worst.b);
        if splits >= MAX_SPLITS || m <= worst.a.min(worst.b) || m >= worst.a.max(worst.b) {
            return Err(Error::Quadrature { a: worst.a, b: worst.b, err: total });
        }
        splits += 1;
        let left = gk15(f, worst.a, m);
        let right = gk15(f, m, worst.b);
        if !left.0.is_finite() || !right.0.is_finite() {
            return Err(Error::Quadrature { a: worst.a, b: worst.b, err: f64::INFINITY });
        }
        total += left.1 + right.1 - worst.err;
        heap.push(Panel { a: worst.a, b: m, val: left.0, err: left.1, owner: worst.owner });
        heap.push(Panel { a: m, b: worst.b, val: right.0, err: right.1, owner: worst.owner });
    }
    let mut sums = vec![0.0; grid.len().saturating_sub(1)];
    for p in heap.into_vec() {
        sums[p.owner] += p.val;
    }
    Ok((sums, total.max(0.0)))
}

/// Integral of `f` over `[a, b]` with estimated absolute error at most `tol`.
/// Returns `(value, error_estimate)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("quadrature tolerance must be positive".into()));
    }
    if a == b {
        return Ok((0.0, 0.0));
    }
    let (v, err) = panels(&f, &[a, b], tol)?;
    Ok((v[0], err))
}

/// Running integral `∫_{grid[0]}^{grid[k]} f` at every grid node. The summed
/// error estimate over the whole grid is at most `tol`.
pub fn cumulative<F: Fn(f64) -> f64>(f: F, grid: &[f64], tol: f64) -> Result<Vec<f64>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("quadrature tolerance must be positive".into()));
    }
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    let (sums, _) = panels(&f, grid, tol)?;
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    out.push(0.0);
    for v in sums {
        acc += v;
        out.push(acc);
    }
    Ok(out)
}
