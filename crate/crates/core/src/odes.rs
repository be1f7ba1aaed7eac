//! The Emden–Fowler equation `y'' = x^(1-p) y^p`, its Lane–Emden form
//! `θ'' + 2θ'/x = θ^p` (θ = y/x) and the Thomas–Fermi case p = 3/2.
//!
//! Direct integration starts a short distance from the singular origin with
//! a truncated series and then runs the adaptive Dormand–Prince integrator.

use crate::error::{Error, Result};
use crate::interp::Hermite;
use crate::rk::{Control, Dopri5, Step};

/// Thomas–Fermi exponent.
pub const TF_P: f64 = 1.5;
/// Offset from the singular origin where the series start is evaluated.
pub const SERIES_X0: f64 = 1e-6;
/// |y| above this value classifies a run as divergent.
pub const DIVERGENCE_CAP: f64 = 1e6;
pub const DEFAULT_STEP_TOL: f64 = 1e-10;
/// Default shooting bracket for the Thomas–Fermi initial slope.
pub const DEFAULT_BRACKET: (f64, f64) = (-2.0, -1.0);

/// Exponent `p` of the Emden–Fowler equation together with the homology
/// exponent `q = (3 - p)/(p - 1)`, which does not exist at `p = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquationParams {
    p: f64,
    q: Option<f64>,
}

impl EquationParams {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::domain("EquationParams", "p must be finite"));
        }
        let q = (p != 1.0).then(|| (3.0 - p) / (p - 1.0));
        Ok(Self { p, q })
    }

    pub fn thomas_fermi() -> Self {
        Self { p: TF_P, q: Some(3.0) }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// The homology exponent; a domain error at `p = 1`.
    pub fn q(&self) -> Result<f64> {
        self.q.ok_or_else(|| Error::domain("homology_exponent", "q = (3-p)/(p-1) is singular at p = 1"))
    }

    pub fn is_thomas_fermi(&self) -> bool {
        self.p == TF_P
    }
}

fn is_integer(p: f64) -> bool {
    p.fract() == 0.0
}

/// `y^p`, defined for negative `y` only when `p` is an integer.
fn signed_pow(y: f64, p: f64) -> f64 {
    if is_integer(p) && p.abs() < i32::MAX as f64 {
        y.powi(p as i32)
    } else {
        y.max(0.0).powf(p)
    }
}

/// Right-hand side `x^(1-p) y^p` of the Emden–Fowler equation.
pub fn ef_rhs(x: f64, y: f64, p: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("ef_rhs", format!("x must be positive, got {x}")));
    }
    if y < 0.0 && !is_integer(p) {
        return Err(Error::domain("ef_rhs", format!("y = {y} < 0 with non-integer p = {p}")));
    }
    Ok(x.powf(1.0 - p) * signed_pow(y, p))
}

/// Truncated series of the Emden–Fowler solution with `y(0) = 1`,
/// `y'(0) = slope0`, valid for `p < 2`:
///
/// `y = 1 + Bx + c1 x^(3-p) + c2 x^(4-p) + c4 x^(5-p) + c3 x^(6-2p) + c5 x^(7-2p)`.
///
/// At p = 3/2 this is `1 + Bx + 4/3 x^{3/2} + 2B/5 x^{5/2} + x^3/3 + 3B²/70 x^{7/2} + 2B/15 x^4`;
/// the first omitted terms are O(x^{9/2}) in y and O(x^{7/2}) in y'.
pub fn ef_series_start(p: f64, slope0: f64, x0: f64) -> Result<(f64, f64)> {
    if !(x0 > 0.0) {
        return Err(Error::domain("series_start", "x0 must be positive"));
    }
    if !(p < 2.0) {
        return Err(Error::domain(
            "series_start",
            format!("origin start with y(0)=1 requires p < 2, got {p}; use the Lane-Emden form"),
        ));
    }
    let b = slope0;
    let c1 = 1.0 / ((3.0 - p) * (2.0 - p));
    let c2 = p * b / ((4.0 - p) * (3.0 - p));
    let c4 = p * (p - 1.0) * b * b / (2.0 * (5.0 - p) * (4.0 - p));
    let c3 = p * c1 / ((6.0 - 2.0 * p) * (5.0 - 2.0 * p));
    let c5 = (p * (p - 1.0) * b * c1 + p * c2) / ((7.0 - 2.0 * p) * (6.0 - 2.0 * p));
    let terms = [(c1, 3.0 - p), (c2, 4.0 - p), (c4, 5.0 - p), (c3, 6.0 - 2.0 * p), (c5, 7.0 - 2.0 * p)];
    let mut y = 1.0 + b * x0;
    let mut yp = b;
    for (c, e) in terms {
        y += c * x0.powf(e);
        yp += c * e * x0.powf(e - 1.0);
    }
    Ok((y, yp))
}

/// Thomas–Fermi series start `(y, y')` at `x0` for initial slope `slope0`.
pub fn tf_series_start(slope0: f64, x0: f64) -> Result<(f64, f64)> {
    ef_series_start(TF_P, slope0, x0)
}

/// Lane–Emden series with `θ(0) = theta0`, `θ'(0) = 0`:
/// `θ = c + c^p x²/6 + p c^(2p-1) x⁴/120 + p(8p-5) c^(3p-2) x⁶/15120`.
pub fn lane_emden_series_start(p: f64, theta0: f64, x0: f64) -> Result<(f64, f64)> {
    if !(theta0 > 0.0) {
        return Err(Error::domain("lane_emden_series_start", "theta(0) must be positive"));
    }
    let c = theta0;
    let a2 = c.powf(p) / 6.0;
    let a4 = p * c.powf(2.0 * p - 1.0) / 120.0;
    let a6 = p * (8.0 * p - 5.0) * c.powf(3.0 * p - 2.0) / 15120.0;
    let x2 = x0 * x0;
    let theta = c + x2 * (a2 + x2 * (a4 + x2 * a6));
    let dtheta = x0 * (2.0 * a2 + x2 * (4.0 * a4 + x2 * 6.0 * a6));
    Ok((theta, dtheta))
}

/// Which dependent variable a table stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    /// Samples are `(x, y, y')` of `y'' = x^(1-p) y^p`.
    EmdenFowler,
    /// Samples are `(x, θ, θ')` of `θ'' + 2θ'/x = θ^p`.
    LaneEmden,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    /// Integrated all the way to the requested end point.
    Reached,
    /// The solution crossed zero at the given abscissa.
    CrossedZero(f64),
    /// |y| exceeded the divergence cap at the given abscissa.
    Diverged(f64),
    /// y' became positive at the given abscissa (only when requested).
    TurnedUp(f64),
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::Reached => "reached",
            Termination::CrossedZero(_) => "crossed_zero",
            Termination::Diverged(_) => "diverged",
            Termination::TurnedUp(_) => "turned_up",
        }
    }

    pub fn location(&self) -> Option<f64> {
        match *self {
            Termination::Reached => None,
            Termination::CrossedZero(x) | Termination::Diverged(x) | Termination::TurnedUp(x) => Some(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub x: f64,
    pub y: f64,
    pub yp: f64,
}

/// Result of a direct integration. Immutable after construction.
#[derive(Debug, Clone)]
pub struct SolutionTable {
    samples: Vec<Sample>,
    params: EquationParams,
    form: Form,
    origin_value: f64,
    slope0: f64,
    termination: Termination,
}

impl SolutionTable {
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn params(&self) -> EquationParams {
        self.params
    }

    pub fn form(&self) -> Form {
        self.form
    }

    /// Initial slope at the origin (the shooting parameter for Thomas–Fermi).
    pub fn slope0(&self) -> f64 {
        self.slope0
    }

    /// Value of the dependent variable at the origin.
    pub fn origin_value(&self) -> f64 {
        self.origin_value
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.samples[0].x, self.samples[self.samples.len() - 1].x)
    }

    /// Second derivative of the stored variable at a sample.
    pub fn second_derivative(&self, s: &Sample) -> f64 {
        second_derivative(self.form, self.params.p(), s.x, s.y, s.yp)
    }

    /// Samples rewritten as `(x, y, y')` of the Emden–Fowler equation
    /// (`y = xθ`, `y' = θ + xθ'` for the Lane–Emden form).
    pub fn emden_fowler_samples(&self) -> Vec<Sample> {
        match self.form {
            Form::EmdenFowler => self.samples.clone(),
            Form::LaneEmden => self
                .samples
                .iter()
                .map(|s| Sample { x: s.x, y: s.x * s.y, yp: s.y + s.x * s.yp })
                .collect(),
        }
    }

    /// Cubic Hermite interpolation of the stored variable and its derivative.
    pub fn interpolate(&self, x: f64) -> Option<Sample> {
        let xs: Vec<f64> = self.samples.iter().map(|s| s.x).collect();
        let y = Hermite::new(xs.clone(), self.samples.iter().map(|s| s.y).collect(), self.samples.iter().map(|s| s.yp).collect()).ok()?;
        let yp = Hermite::new(xs, self.samples.iter().map(|s| s.yp).collect(), self.samples.iter().map(|s| self.second_derivative(s)).collect()).ok()?;
        Some(Sample { x, y: y.eval(x)?, yp: yp.eval(x)? })
    }

    /// Largest relative mismatch between a three-point finite-difference
    /// estimate of the second derivative (from the stored first derivative)
    /// and the equation's right-hand side, over interior samples.
    pub fn max_residual(&self) -> f64 {
        self.samples
            .windows(3)
            .map(|w| {
                let (h0, h1) = (w[1].x - w[0].x, w[2].x - w[1].x);
                let fd = (-h1 / (h0 * (h0 + h1))) * w[0].yp
                    + ((h1 - h0) / (h0 * h1)) * w[1].yp
                    + (h0 / (h1 * (h0 + h1))) * w[2].yp;
                let exact = self.second_derivative(&w[1]);
                (fd - exact).abs() / exact.abs().max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }
}

fn second_derivative(form: Form, p: f64, x: f64, y: f64, yp: f64) -> f64 {
    match form {
        Form::EmdenFowler => x.powf(1.0 - p) * signed_pow(y, p),
        Form::LaneEmden => signed_pow(y, p) - 2.0 * yp / x,
    }
}

/// Configurable direct integration run.
#[derive(Debug, Clone)]
pub struct DirectRun {
    pub params: EquationParams,
    pub form: Form,
    /// y(0) (θ(0) for the Lane–Emden form).
    pub origin_value: f64,
    /// y'(0) for the Emden–Fowler form; must be 0 for Lane–Emden.
    pub slope0: f64,
    pub x_max: f64,
    pub tol: f64,
    pub x_start: f64,
    pub divergence_cap: f64,
    /// Stop as soon as y' > 0 (decisive for the Thomas–Fermi shooting problem).
    pub stop_on_upturn: bool,
    /// Abscissas that must appear exactly among the samples.
    pub stops: Vec<f64>,
}

impl DirectRun {
    pub fn emden_fowler(params: EquationParams, slope0: f64, x_max: f64, tol: f64) -> Self {
        Self {
            params,
            form: Form::EmdenFowler,
            origin_value: 1.0,
            slope0,
            x_max,
            tol,
            x_start: SERIES_X0,
            divergence_cap: DIVERGENCE_CAP,
            stop_on_upturn: false,
            stops: Vec::new(),
        }
    }

    pub fn lane_emden(params: EquationParams, theta0: f64, x_max: f64, tol: f64) -> Self {
        Self { form: Form::LaneEmden, origin_value: theta0, slope0: 0.0, ..Self::emden_fowler(params, 0.0, x_max, tol) }
    }

    pub fn with_stops(mut self, stops: Vec<f64>) -> Self {
        self.stops = stops;
        self
    }

    pub fn run(&self) -> Result<SolutionTable> {
        if !(self.x_max > self.x_start) {
            return Err(Error::InvalidArgument(format!("x_max must exceed the series start {}", self.x_start)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        let p = self.params.p();
        let x0 = self.x_start;
        let (y0, yp0) = match self.form {
            Form::EmdenFowler => {
                if self.origin_value != 1.0 {
                    return Err(Error::InvalidArgument("Emden-Fowler origin start assumes y(0) = 1".into()));
                }
                ef_series_start(p, self.slope0, x0)?
            }
            Form::LaneEmden => {
                if self.slope0 != 0.0 {
                    return Err(Error::InvalidArgument("Lane-Emden start requires theta'(0) = 0".into()));
                }
                lane_emden_series_start(p, self.origin_value, x0)?
            }
        };
        let form = self.form;
        let sys = move |x: f64, s: &[f64; 2]| [s[1], second_derivative(form, p, x, s[0], s[1])];

        let mut samples = vec![Sample { x: x0, y: y0, yp: yp0 }];
        let mut termination = Termination::Reached;
        let cap = self.divergence_cap;
        let upturn = self.stop_on_upturn;
        let observer = |st: &Step<2>| {
            let [y, yp] = st.y1;
            if y <= 0.0 {
                termination = Termination::CrossedZero(refine(st, 0, 0.0));
                return Control::Stop;
            }
            if y.abs() > cap || !y.is_finite() {
                termination = Termination::Diverged(refine(st, 0, cap));
                return Control::Stop;
            }
            if upturn && yp > 0.0 {
                termination = Termination::TurnedUp(refine(st, 1, 0.0));
                return Control::Stop;
            }
            samples.push(Sample { x: st.x1, y, yp });
            Control::Continue
        };
        let solver = Dopri5::new(self.tol);
        match solver.integrate(&sys, x0, [y0, yp0], self.x_max, &self.stops, observer) {
            Ok(_) => {}
            // a blow-up shows up as step-size collapse before the cap is met
            Err(Error::StepUnderflow { x }) if samples.last().is_some_and(|s| s.yp > 0.0) => {
                termination = Termination::Diverged(x);
            }
            Err(e) => return Err(e),
        }
        Ok(SolutionTable {
            samples,
            params: self.params,
            form: self.form,
            origin_value: self.origin_value,
            slope0: self.slope0,
            termination,
        })
    }
}

/// Bisection on the step's Hermite interpolant for where component `k`
/// equals `level`.
fn refine(st: &Step<2>, k: usize, level: f64) -> f64 {
    let g = |x: f64| st.hermite(x)[k] - level;
    let (mut a, mut b) = (st.x0, st.x1);
    let ga = g(a);
    if ga * g(b) > 0.0 {
        return b;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if g(m) * ga > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Direct integration of `y'' = x^(1-p) y^p` from `y(0) = 1`, `y'(0) = slope0`.
pub fn integrate_direct(params: EquationParams, slope0: f64, x_max: f64, tol: f64) -> Result<SolutionTable> {
    DirectRun::emden_fowler(params, slope0, x_max, tol).run()
}

/// Direct integration of `θ'' + 2θ'/x = θ^p` from `θ(0) = theta0`, `θ'(0) = 0`.
pub fn integrate_lane_emden(params: EquationParams, theta0: f64, x_max: f64, tol: f64) -> Result<SolutionTable> {
    DirectRun::lane_emden(params, theta0, x_max, tol).run()
}

/// Qualitative fate of a Thomas–Fermi trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fate {
    /// Slope above the critical one: the solution turns upward and blows up.
    Divergent,
    /// Slope below the critical one: the solution reaches zero.
    CrossesZero,
    /// Neither happened before the horizon.
    Undecided,
}

/// Bisection shooting for the Thomas–Fermi initial slope.
#[derive(Debug, Clone, Copy)]
pub struct Shooter {
    pub bracket: (f64, f64),
    /// Integrator tolerance for each trial trajectory.
    pub step_tol: f64,
    /// Horizon up to which trajectories are followed.
    pub horizon: f64,
}

impl Default for Shooter {
    fn default() -> Self {
        Self { bracket: DEFAULT_BRACKET, step_tol: 1e-12, horizon: 1e3 }
    }
}

impl Shooter {
    pub fn classify(&self, slope0: f64) -> Result<Fate> {
        let mut run = DirectRun::emden_fowler(EquationParams::thomas_fermi(), slope0, self.horizon, self.step_tol);
        run.stop_on_upturn = true;
        Ok(match run.run()?.termination() {
            Termination::CrossedZero(_) => Fate::CrossesZero,
            Termination::Diverged(_) | Termination::TurnedUp(_) => Fate::Divergent,
            Termination::Reached => Fate::Undecided,
        })
    }

    /// Bisects until the bracket is narrower than `tol` (or cannot be split
    /// further in floating point) and returns its midpoint.
    pub fn shoot(&self, tol: f64) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument("shooting tolerance must be positive".into()));
        }
        let (mut lo, mut hi) = (self.bracket.0.min(self.bracket.1), self.bracket.0.max(self.bracket.1));
        if self.classify(lo)? != Fate::CrossesZero || self.classify(hi)? != Fate::Divergent {
            return Err(Error::Bracket { lo, hi });
        }
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            match self.classify(mid)? {
                Fate::CrossesZero => lo = mid,
                Fate::Divergent => hi = mid,
                Fate::Undecided => return Ok(mid),
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Critical Thomas–Fermi slope by bisection over the default bracket.
pub fn shoot_initial_slope(tol: f64) -> Result<f64> {
    Shooter::default().shoot(tol)
}
