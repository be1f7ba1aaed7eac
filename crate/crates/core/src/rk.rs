//! Embedded Dormand–Prince 5(4) integrator with step clipping at requested
//! output abscissas and a per-step observer that can stop the run.

use crate::error::{Error, Result};

/// Right-hand side of a first-order system `dy/dx = f(x, y)`.
pub trait System<const N: usize> {
    fn rhs(&self, x: f64, y: &[f64; N]) -> [f64; N];
}

impl<const N: usize, F> System<N> for F
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    fn rhs(&self, x: f64, y: &[f64; N]) -> [f64; N] {
        self(x, y)
    }
}

/// What the observer wants after seeing an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// An accepted step, with enough data for cubic Hermite dense output.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub x0: f64,
    pub y0: [f64; N],
    pub f0: [f64; N],
    pub x1: f64,
    pub y1: [f64; N],
    pub f1: [f64; N],
    /// The step ended exactly on one of the requested stop abscissas.
    pub at_stop: bool,
}

impl<const N: usize> Step<N> {
    /// Cubic Hermite interpolant of the step evaluated at `x`.
    pub fn hermite(&self, x: f64) -> [f64; N] {
        let h = self.x1 - self.x0;
        let s = (x - self.x0) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        std::array::from_fn(|i| {
            h00 * self.y0[i] + h10 * h * self.f0[i] + h01 * self.y1[i] + h11 * h * self.f1[i]
        })
    }
}

/// How an integration run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Finish<const N: usize> {
    pub x: f64,
    pub y: [f64; N],
    /// The observer requested the stop before `x_end` was reached.
    pub stopped: bool,
    pub accepted: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Dopri5 {
    pub fn new(rtol: f64) -> Self {
        Self { rtol, atol: rtol * 1e-6, h_max: f64::INFINITY, max_steps: 2_000_000 }
    }

    pub fn with_atol(mut self, atol: f64) -> Self {
        self.atol = atol;
        self
    }

    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }

    /// Integrates from `x0` to `x_end` (either direction). Every abscissa in
    /// `stops` strictly between the endpoints is hit exactly by a step end.
    /// The observer sees each accepted step in order.
    pub fn integrate<const N: usize, S, O>(
        &self,
        sys: &S,
        x0: f64,
        y0: [f64; N],
        x_end: f64,
        stops: &[f64],
        mut observe: O,
    ) -> Result<Finish<N>>
    where
        S: System<N> + ?Sized,
        O: FnMut(&Step<N>) -> Control,
    {
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if !x0.is_finite() || !x_end.is_finite() {
            return Err(Error::InvalidArgument("integration range must be finite".into()));
        }
        let dir = if x_end >= x0 { 1.0 } else { -1.0 };
        let mut targets: Vec<f64> = stops
            .iter()
            .copied()
            .filter(|&s| (s - x0) * dir > 0.0 && (x_end - s) * dir > 0.0)
            .collect();
        targets.sort_by(|a, b| (dir * a).total_cmp(&(dir * b)));
        targets.dedup();
        targets.push(x_end);
        let mut next_target = 0;

        let mut x = x0;
        let mut y = y0;
        let mut f = sys.rhs(x, &y);
        let mut finish = Finish { x, y, stopped: false, accepted: 0, rejected: 0 };
        if x0 == x_end {
            return Ok(finish);
        }
        let mut h = dir * self.initial_step(sys, x, &y, &f, (x_end - x0).abs());

        loop {
            if finish.accepted + finish.rejected >= self.max_steps {
                return Err(Error::StepUnderflow { x });
            }
            let target = targets[next_target];
            let proposed = h;
            let mut clipped = false;
            if (x + h - target) * dir >= 0.0 {
                h = target - x;
                clipped = true;
            }
            if h.abs() <= 8.0 * f64::EPSILON * x.abs().max(1e-300) {
                return Err(Error::StepUnderflow { x });
            }

            let (y_new, f_new, err) = self.trial(sys, x, &y, &f, h);
            if err <= 1.0 {
                let x_new = if clipped { target } else { x + h };
                let step = Step { x0: x, y0: y, f0: f, x1: x_new, y1: y_new, f1: f_new, at_stop: clipped };
                x = x_new;
                y = y_new;
                f = f_new;
                finish.accepted += 1;
                let done = clipped && next_target + 1 == targets.len();
                if clipped {
                    next_target += 1;
                }
                let step = Step { at_stop: clipped && !done, ..step };
                if observe(&step) == Control::Stop {
                    finish.stopped = !done;
                    break;
                }
                if done {
                    break;
                }
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // a clipped step says nothing about the natural step size
                let base = if clipped { proposed.abs().max(h.abs() * grow) } else { h.abs() * grow };
                h = dir * base.min(self.h_max);
            } else {
                finish.rejected += 1;
                let shrink = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                h *= shrink;
            }
        }
        finish.x = x;
        finish.y = y;
        Ok(finish)
    }

    fn trial<const N: usize, S>(
        &self,
        sys: &S,
        x: f64,
        y: &[f64; N],
        k1: &[f64; N],
        h: f64,
    ) -> ([f64; N], [f64; N], f64)
    where
        S: System<N> + ?Sized,
    {
        let stage = |coef: &[(f64, &[f64; N])]| -> [f64; N] {
            std::array::from_fn(|i| y[i] + h * coef.iter().map(|(c, k)| c * k[i]).sum::<f64>())
        };
        let k2 = sys.rhs(x + h / 5.0, &stage(&[(1.0 / 5.0, k1)]));
        let k3 = sys.rhs(x + 0.3 * h, &stage(&[(3.0 / 40.0, k1), (9.0 / 40.0, &k2)]));
        let k4 = sys.rhs(
            x + 0.8 * h,
            &stage(&[(44.0 / 45.0, k1), (-56.0 / 15.0, &k2), (32.0 / 9.0, &k3)]),
        );
        let k5 = sys.rhs(
            x + 8.0 / 9.0 * h,
            &stage(&[
                (19372.0 / 6561.0, k1),
                (-25360.0 / 2187.0, &k2),
                (64448.0 / 6561.0, &k3),
                (-212.0 / 729.0, &k4),
            ]),
        );
        let k6 = sys.rhs(
            x + h,
            &stage(&[
                (9017.0 / 3168.0, k1),
                (-355.0 / 33.0, &k2),
                (46732.0 / 5247.0, &k3),
                (49.0 / 176.0, &k4),
                (-5103.0 / 18656.0, &k5),
            ]),
        );
        let y_new = stage(&[
            (35.0 / 384.0, k1),
            (500.0 / 1113.0, &k3),
            (125.0 / 192.0, &k4),
            (-2187.0 / 6784.0, &k5),
            (11.0 / 84.0, &k6),
        ]);
        let k7 = sys.rhs(x + h, &y_new);

        let mut sum = 0.0;
        for i in 0..N {
            let e = h
                * (71.0 / 57600.0 * k1[i] - 71.0 / 16695.0 * k3[i] + 71.0 / 1920.0 * k4[i]
                    - 17253.0 / 339200.0 * k5[i]
                    + 22.0 / 525.0 * k6[i]
                    - 1.0 / 40.0 * k7[i]);
            let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
            sum += (e / sc).powi(2);
        }
        let err = (sum / N as f64).sqrt();
        let err = if err.is_finite() { err } else { f64::INFINITY };
        (y_new, k7, err)
    }

    // Hairer–Wanner starting step heuristic.
    fn initial_step<const N: usize, S>(&self, sys: &S, x: f64, y: &[f64; N], f: &[f64; N], span: f64) -> f64
    where
        S: System<N> + ?Sized,
    {
        let sc: [f64; N] = std::array::from_fn(|i| self.atol + self.rtol * y[i].abs());
        let norm = |v: &[f64; N]| (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / N as f64).sqrt();
        let d0 = norm(y);
        let d1 = norm(f);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span).min(self.h_max);
        let y1: [f64; N] = std::array::from_fn(|i| y[i] + h0 * f[i]);
        let f1 = sys.rhs(x + h0, &y1);
        let df: [f64; N] = std::array::from_fn(|i| f1[i] - f[i]);
        let d2 = norm(&df) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        let h = (100.0 * h0).min(h1).min(span).min(self.h_max);
        if h.is_finite() && h > 0.0 {
            h
        } else {
            span * 1e-6
        }
    }
}
