//! Reduced first-order equations in each invariant chart and their
//! integration, including the Majorana equation on `t ∈ [0, 1]` started from
//! a local series at the singular boundary point `(t, u) = (1, 1)`.

use crate::error::{Error, Result};
use crate::homology::{Chart, DresnerConstants, MajoranaConstants};
use crate::interp::Hermite;
use crate::rk::{Control, Dopri5, Step};

pub const DEFAULT_GRID: usize = 2001;
pub const DEFAULT_EPS: f64 = 1e-6;
pub const DEFAULT_TOL: f64 = 1e-12;

fn singular(op: &'static str, a: f64, b: f64) -> Error {
    Error::Singular { op, at0: a, at1: b }
}

/// `du/dv = u(2 - p + pv - u) / (v(1 + u - v))` in Coppel variables.
pub fn coppel_rhs(u: f64, v: f64, p: f64) -> Result<f64> {
    let den = v * (1.0 + u - v);
    if den == 0.0 {
        return Err(singular("coppel_rhs", v, u));
    }
    Ok(u * (2.0 - p + p * v - u) / den)
}

/// `du/dv = u(3 + pv - u) / (v(u - v - 1))` in Milne variables.
pub fn milne_rhs(u: f64, v: f64, p: f64) -> Result<f64> {
    let den = v * (u - v - 1.0);
    if den == 0.0 {
        return Err(singular("milne_rhs", v, u));
    }
    Ok(u * (3.0 + p * v - u) / den)
}

/// `ds/dτ = (4s + τ^(3/2)) / (s + 3τ)` in Dresner variables.
pub fn dresner_rhs(tau: f64, s: f64) -> Result<f64> {
    if tau < 0.0 {
        return Err(Error::domain("dresner_rhs", format!("tau must be non-negative, got {tau}")));
    }
    let den = s + 3.0 * tau;
    if den == 0.0 {
        return Err(singular("dresner_rhs", tau, s));
    }
    Ok((4.0 * s + tau.powf(1.5)) / den)
}

/// `du/dt = -8 (1 - t u²) / (1 - t² u)`.
pub fn majorana_rhs(t: f64, u: f64) -> Result<f64> {
    let den = 1.0 - t * t * u;
    if den == 0.0 {
        return Err(singular("majorana_rhs", t, u));
    }
    Ok(-8.0 * (1.0 - t * u * u) / den)
}

/// `du/dt = 2(b/a) (1 - 4tu²/(3ab²)) / (1 + t²u/(3a²b))` for arbitrary chart
/// constants.
pub fn majorana_general_rhs(t: f64, u: f64, consts: &MajoranaConstants) -> Result<f64> {
    let (k_quad, k_lin) = consts.coefficients();
    let den = 1.0 + k_lin * (t * t * u);
    if den == 0.0 {
        return Err(singular("majorana_general_rhs", t, u));
    }
    Ok(consts.scale() * (1.0 - k_quad * (t * u * u)) / den)
}

/// Slope `u'(1)` of the solution leaving the 0/0 point `(1, 1)` of the
/// Majorana equation: the root of `a² + 18a + 8 = 0` in `(-1, 0)`.
pub fn majorana_boundary_slope() -> f64 {
    // -9 + √73, written without the cancellation
    -8.0 / (9.0 + 73f64.sqrt())
}

/// Coefficients `(a₁, a₂)` of `u = 1 + a₁(t - 1) + a₂(t - 1)² + …` near `t = 1`.
///
/// Substituting into `u'(1 - t²u) = -8(1 - tu²)` and matching the `(t-1)²`
/// terms gives `a₂ = -(10a₁² + 17a₁)/(3a₁ + 20)`.
pub fn majorana_boundary_series() -> (f64, f64) {
    let a1 = majorana_boundary_slope();
    (a1, -(10.0 * a1 * a1 + 17.0 * a1) / (3.0 * a1 + 20.0))
}

/// `B = -(3/16)^(1/3) u(0)`, the initial slope encoded by `u(0)`.
pub fn initial_slope_from_u0(u0: f64) -> f64 {
    -(3.0f64 / 16.0).cbrt() * u0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedSample {
    pub indep: f64,
    pub dep: f64,
    /// d(dep)/d(indep) at the sample.
    pub slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReducedOutcome {
    Completed,
    /// A denominator of the reduced equation vanished between two steps.
    HitSingularity { indep: f64, dep: f64 },
}

/// Samples of a reduced solution with strictly increasing independent variable.
#[derive(Debug, Clone)]
pub struct ReducedSolution {
    chart: Chart,
    samples: Vec<ReducedSample>,
    boundary: String,
    outcome: ReducedOutcome,
}

impl ReducedSolution {
    pub fn new(chart: Chart, samples: Vec<ReducedSample>, boundary: impl Into<String>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidArgument("a reduced solution needs at least two samples".into()));
        }
        if samples.windows(2).any(|w| !(w[1].indep > w[0].indep)) {
            return Err(Error::InvalidArgument("independent variable must increase strictly".into()));
        }
        Ok(Self { chart, samples, boundary: boundary.into(), outcome: ReducedOutcome::Completed })
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn samples(&self) -> &[ReducedSample] {
        &self.samples
    }

    pub fn boundary(&self) -> &str {
        &self.boundary
    }

    pub fn outcome(&self) -> ReducedOutcome {
        self.outcome
    }

    pub fn range(&self) -> (f64, f64) {
        (self.samples[0].indep, self.samples[self.samples.len() - 1].indep)
    }

    pub fn interpolant(&self) -> Hermite {
        Hermite::new(
            self.samples.iter().map(|s| s.indep).collect(),
            self.samples.iter().map(|s| s.dep).collect(),
            self.samples.iter().map(|s| s.slope).collect(),
        )
        .expect("validated on construction")
    }

    /// Rewrites a Majorana solution in Dresner variables through
    /// `τ = A t⁶`, `s = B t⁸ u`.
    pub fn majorana_to_dresner(&self, consts: &DresnerConstants) -> Result<ReducedSolution> {
        if self.chart != Chart::Majorana {
            return Err(Error::InvalidArgument("expected a Majorana-chart solution".into()));
        }
        let (n, m) = (consts.n, consts.m);
        let samples = self
            .samples
            .iter()
            .map(|q| {
                let (tau, s) = consts.from_tu(q.indep, q.dep);
                // ds/dτ = B (m t^(m-1) u + t^m u') / (n A t^(n-1))
                let t = q.indep;
                let slope = consts.big_b * t.powi(m - n) * (m as f64 * q.dep + t * q.slope) / (n as f64 * consts.big_a);
                ReducedSample { indep: tau, dep: s, slope }
            })
            .collect();
        let mut out = ReducedSolution::new(Chart::Dresner, samples, format!("from majorana: {}", self.boundary))?;
        out.outcome = self.outcome;
        Ok(out)
    }

    /// Rewrites a Dresner solution as a Majorana one. A sample at `τ = 0`
    /// carries no information about `u(0)`; it is recovered by extending the
    /// cubic of the first positive interval, and `u'(0) = -8` exactly.
    pub fn dresner_to_majorana(&self, consts: &DresnerConstants) -> Result<ReducedSolution> {
        if self.chart != Chart::Dresner {
            return Err(Error::InvalidArgument("expected a Dresner-chart solution".into()));
        }
        let (n, m) = (consts.n as f64, consts.m);
        let mut samples = Vec::with_capacity(self.samples.len());
        let has_origin = self.samples[0].indep == 0.0;
        for q in self.samples.iter().skip(usize::from(has_origin)) {
            let (t, u) = consts.to_tu(q.indep, q.dep)?;
            // u = s / (B t^m), s' = ds/dτ, dτ/dt = n A t^(n-1)
            let slope = (q.slope * n * consts.big_a * t.powi(consts.n - 1) - m as f64 * q.dep / t) / (consts.big_b * t.powi(m));
            samples.push(ReducedSample { indep: t, dep: u, slope });
        }
        if has_origin {
            if samples.len() < 2 {
                return Err(Error::InvalidArgument("need two positive-tau samples to recover u(0)".into()));
            }
            let first = Hermite::new(
                vec![samples[0].indep, samples[1].indep],
                vec![samples[0].dep, samples[1].dep],
                vec![samples[0].slope, samples[1].slope],
            )?;
            let u0 = extrapolate_left(&first, samples[0].indep, samples[1].indep, 0.0);
            samples.insert(0, ReducedSample { indep: 0.0, dep: u0, slope: majorana_rhs(0.0, u0)? });
        }
        let mut out = ReducedSolution::new(Chart::Majorana, samples, format!("from dresner: {}", self.boundary))?;
        out.outcome = self.outcome;
        Ok(out)
    }
}

/// Evaluates the cubic Hermite polynomial of a single interval `[x0, x1]`
/// outside the interval.
fn extrapolate_left(h: &Hermite, x0: f64, x1: f64, x: f64) -> f64 {
    let (y0, d0) = h.eval_with_slope(x0).expect("in range");
    let (y1, d1) = h.eval_with_slope(x1).expect("in range");
    let w = x1 - x0;
    let s = (x - x0) / w;
    (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s) * y0 + s * (1.0 - s) * (1.0 - s) * w * d0 + s * s * (3.0 - 2.0 * s) * y1 + s * s * (s - 1.0) * w * d1
}

/// One of the reduced equations, viewed as `dy/dx = N(x, y)/D(x, y)`.
#[derive(Debug, Clone, Copy)]
pub struct ReducedEquation {
    pub chart: Chart,
    pub p: f64,
    pub majorana: MajoranaConstants,
}

impl ReducedEquation {
    pub fn new(chart: Chart, p: f64) -> Result<Self> {
        if !chart.supports(p) {
            return Err(Error::domain("ReducedEquation", format!("{} chart is not defined for p = {p}", chart.name())));
        }
        Ok(Self { chart, p, majorana: MajoranaConstants::canonical() })
    }

    pub fn rhs(&self, x: f64, y: f64) -> Result<f64> {
        match self.chart {
            Chart::Coppel => coppel_rhs(y, x, self.p),
            Chart::Milne => milne_rhs(y, x, self.p),
            Chart::Dresner => dresner_rhs(x, y),
            Chart::Majorana => majorana_general_rhs(x, y, &self.majorana),
        }
    }

    pub fn denominator(&self, x: f64, y: f64) -> f64 {
        match self.chart {
            Chart::Coppel => x * (1.0 + y - x),
            Chart::Milne => x * (y - x - 1.0),
            Chart::Dresner => y + 3.0 * x,
            Chart::Majorana => 1.0 + self.majorana.coefficients().1 * (x * x * y),
        }
    }

    // Unchecked form for the integrator; singular loci are caught by the
    // denominator sign test after each step.
    fn raw(&self, x: f64, y: f64) -> f64 {
        let p = self.p;
        match self.chart {
            Chart::Coppel => y * (2.0 - p + p * x - y) / (x * (1.0 + y - x)),
            Chart::Milne => y * (3.0 + p * x - y) / (x * (y - x - 1.0)),
            Chart::Dresner => (4.0 * y + x.max(0.0).powf(1.5)) / (y + 3.0 * x),
            Chart::Majorana => {
                let (k_quad, k_lin) = self.majorana.coefficients();
                self.majorana.scale() * (1.0 - k_quad * (x * y * y)) / (1.0 + k_lin * (x * x * y))
            }
        }
    }
}

/// Integrates one direction from `(x0, y0)` to `x_end`, pushing each
/// accepted sample. Returns the singular point if one was met.
#[allow(clippy::too_many_arguments)]
fn sweep(
    eq: &ReducedEquation,
    x0: f64,
    y0: f64,
    x_end: f64,
    tol: f64,
    stops: &[f64],
    out: &mut Vec<ReducedSample>,
    stops_only: bool,
) -> Result<Option<(f64, f64)>> {
    let sys = |x: f64, y: &[f64; 1]| [eq.raw(x, y[0])];
    let mut hit = None;
    let observer = |st: &Step<1>| {
        let (d0, d1) = (eq.denominator(st.x0, st.y0[0]), eq.denominator(st.x1, st.y1[0]));
        if !st.y1[0].is_finite() || d0.signum() != d1.signum() || d1 == 0.0 {
            hit = Some(locate_sign_change(eq, st));
            return Control::Stop;
        }
        if !stops_only || st.at_stop || st.x1 == x_end {
            out.push(ReducedSample { indep: st.x1, dep: st.y1[0], slope: st.f1[0] });
        }
        Control::Continue
    };
    let solver = Dopri5::new(tol);
    match solver.integrate(&sys, x0, [y0], x_end, stops, observer) {
        Ok(_) => {}
        Err(Error::StepUnderflow { x }) => {
            let y = out.last().map_or(y0, |s| s.dep);
            hit = Some((x, y));
        }
        Err(e) => return Err(e),
    }
    Ok(hit)
}

fn locate_sign_change(eq: &ReducedEquation, st: &Step<1>) -> (f64, f64) {
    let d = |x: f64| eq.denominator(x, st.hermite(x)[0]);
    let (mut a, mut b) = (st.x0, st.x1);
    let da = d(a);
    if !(da * d(b) <= 0.0) {
        return (b, st.y1[0]);
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if d(m) * da > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let x = 0.5 * (a + b);
    (x, st.hermite(x)[0])
}

/// Integrates the reduced equation of `chart` through `start` over
/// `range = (lo, hi)`. Reaching a singular locus ends the run with a
/// [`ReducedOutcome::HitSingularity`] outcome on the side where it occurred.
pub fn solve_reduced_generic(chart: Chart, p: f64, start: (f64, f64), range: (f64, f64), tol: f64) -> Result<ReducedSolution> {
    let eq = ReducedEquation::new(chart, p)?;
    let (lo, hi) = range;
    if !(lo < hi) || !(start.0 >= lo && start.0 <= hi) {
        return Err(Error::InvalidArgument(format!("start {} must lie in the range [{lo}, {hi}]", start.0)));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    if chart == Chart::Dresner && lo < 0.0 {
        return Err(Error::domain("solve_reduced_generic", "Dresner range must have tau >= 0"));
    }
    let slope0 = eq.rhs(start.0, start.1)?;
    if eq.denominator(start.0, start.1) == 0.0 || !slope0.is_finite() {
        return Err(Error::Singular { op: "solve_reduced_generic", at0: start.0, at1: start.1 });
    }
    let mut below = Vec::new();
    let hit_lo = sweep(&eq, start.0, start.1, lo, tol, &[], &mut below, false)?;
    let mut above = Vec::new();
    let hit_hi = sweep(&eq, start.0, start.1, hi, tol, &[], &mut above, false)?;
    let mut samples: Vec<ReducedSample> = below.into_iter().rev().collect();
    samples.push(ReducedSample { indep: start.0, dep: start.1, slope: slope0 });
    samples.extend(above);
    let outcome = match hit_lo.or(hit_hi) {
        Some((indep, dep)) => ReducedOutcome::HitSingularity { indep, dep },
        None => ReducedOutcome::Completed,
    };
    if samples.len() < 2 {
        return Err(Error::Singular { op: "solve_reduced_generic", at0: start.0, at1: start.1 });
    }
    let mut sol = ReducedSolution::new(chart, samples, format!("start ({}, {})", start.0, start.1))?;
    sol.outcome = outcome;
    Ok(sol)
}

/// Solves `du/dt = -8(1 - tu²)/(1 - t²u)` with `u(1) = 1` on the uniform
/// grid `t_k = k/(grid_size - 1)`.
///
/// The run starts at `t = 1 - eps` from the two-term boundary series and
/// integrates downward to `t = 0`. Grid values come from steps clipped onto
/// the grid points; grid points in `(1 - eps, 1)` use the series, and the
/// boundary sample `(1, 1)` carries slope `a₁`.
pub fn solve_majorana(grid_size: usize, tol: f64, eps: f64) -> Result<ReducedSolution> {
    if grid_size < 2 {
        return Err(Error::InvalidArgument("grid size must be at least 2".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, 0.5), got {eps}")));
    }
    let (a1, a2) = majorana_boundary_series();
    let series = |t: f64| {
        let d = t - 1.0;
        (1.0 + d * (a1 + a2 * d), a1 + 2.0 * a2 * d)
    };
    let t_start = 1.0 - eps;
    let (u_start, _) = series(t_start);
    let eq = ReducedEquation::new(Chart::Majorana, crate::odes::TF_P)?;
    let last = (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size).map(|k| k as f64 / last).collect();

    let mut down = Vec::new();
    let hit = sweep(&eq, t_start, u_start, 0.0, tol, &grid, &mut down, true)?;
    if let Some((t, u)) = hit {
        return Err(Error::Singular { op: "solve_majorana", at0: t, at1: u });
    }
    let mut samples: Vec<ReducedSample> = down.into_iter().rev().collect();
    if samples.first().map(|s| s.indep) != Some(0.0) {
        return Err(Error::Singular { op: "solve_majorana", at0: samples.first().map_or(t_start, |s| s.indep), at1: f64::NAN });
    }
    for &t in grid.iter().filter(|&&t| t >= t_start && t < 1.0) {
        let (u, du) = series(t);
        samples.push(ReducedSample { indep: t, dep: u, slope: du });
    }
    samples.push(ReducedSample { indep: 1.0, dep: 1.0, slope: a1 });
    ReducedSolution::new(Chart::Majorana, samples, "u(1) = 1")
}
