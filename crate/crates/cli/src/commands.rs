use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde_json::{json, Map, Value};

use tf_homology::homology::{Chart, DresnerConstants};
use tf_homology::odes::{self, DirectRun, EquationParams, Form, Shooter, TF_P};
use tf_homology::reconstruct::{
    compare_with_direct, reconstruct_dresner, reconstruct_majorana_with, round_trip_deviation, ParametricSolution,
};
use tf_homology::reduced::{
    self, initial_slope_from_u0, majorana_boundary_slope, majorana_rhs, solve_majorana, ReducedSample, ReducedSolution,
};
use tf_homology::sweep::{invariance_sweep, Execution, InvarianceConfig};

use crate::output::{num, Cell, Report, Table};
use crate::OutputArgs;

#[derive(Debug)]
pub enum CliError {
    Lib(tf_homology::Error),
    Input(String),
}

impl From<tf_homology::Error> for CliError {
    fn from(e: tf_homology::Error) -> Self {
        CliError::Lib(e)
    }
}

type CmdResult = Result<Report, CliError>;

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Input(format!("--{name} must be positive, got {v}")))
    }
}

fn grid_ok(n: usize) -> Result<(), CliError> {
    if n >= 2 {
        Ok(())
    } else {
        Err(CliError::Input(format!("--grid must be at least 2, got {n}")))
    }
}

fn config(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Exponent p of y'' = x^(1-p) y^p.
    #[arg(long, default_value_t = TF_P, allow_negative_numbers = true)]
    pub p: f64,
    /// Initial slope y'(0); for p = 1.5 the shot critical slope when omitted, else 0.
    #[arg(long, allow_negative_numbers = true)]
    pub slope: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub xmax: f64,
    /// Integrate theta'' + 2 theta'/x = theta^p instead (columns hold theta, theta').
    #[arg(long)]
    pub lane_emden: bool,
    /// theta(0) for the Lane-Emden form.
    #[arg(long, default_value_t = 1.0)]
    pub theta0: f64,
    /// Per-step relative tolerance.
    #[arg(long, default_value_t = odes::DEFAULT_STEP_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn solve(a: &SolveArgs) -> CmdResult {
    positive("tol", a.tol)?;
    positive("xmax", a.xmax)?;
    let params = EquationParams::new(a.p)?;
    let (run, slope) = if a.lane_emden {
        if a.slope.is_some_and(|s| s != 0.0) {
            return Err(CliError::Input("--lane-emden starts with theta'(0) = 0; drop --slope".into()));
        }
        (DirectRun::lane_emden(params, a.theta0, a.xmax, a.tol), 0.0)
    } else {
        let slope = match a.slope {
            Some(s) => s,
            None if params.is_thomas_fermi() => precise_shooter().shoot(PRECISE_SHOOT_TOL)?,
            None => 0.0,
        };
        (DirectRun::emden_fowler(params, slope, a.xmax, a.tol), slope)
    };
    let table = run.run()?;
    let mut report = Report::new(
        "solve",
        config(&[
            ("p", num(a.p)),
            ("slope", num(slope)),
            ("xmax", num(a.xmax)),
            ("form", json!(if a.lane_emden { "lane_emden" } else { "emden_fowler" })),
            ("theta0", num(a.theta0)),
            ("tol", num(a.tol)),
        ]),
    );
    let (x0, x1) = table.x_range();
    report.metric("slope", num(table.slope0()));
    report.metric("x_min", num(x0));
    report.metric("x_max", num(x1));
    report.metric("samples", table.samples().len());
    report.metric("termination", table.termination().label());
    report.metric("termination_x", table.termination().location().map_or(Value::Null, num));
    report.metric("residual_max", num(table.max_residual()));
    let mut t = Table::new(&["x", "y", "yp"]);
    for s in table.samples() {
        t.push_nums(&[s.x, s.y, s.yp]);
    }
    debug_assert!(table.form() == if a.lane_emden { Form::LaneEmden } else { Form::EmdenFowler });
    report.table = Some(t);
    Ok(report)
}

const PRECISE_SHOOT_TOL: f64 = 1e-14;
const PRECISE_STEP_TOL: f64 = 1e-13;

fn precise_shooter() -> Shooter {
    Shooter { step_tol: PRECISE_STEP_TOL, ..Shooter::default() }
}

#[derive(Debug, Clone, Args)]
pub struct ShootArgs {
    /// Bracket width at which bisection stops.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Integrator tolerance for each trial trajectory.
    #[arg(long, default_value_t = 1e-12)]
    pub step_tol: f64,
    #[arg(long, default_value_t = odes::DEFAULT_BRACKET.0, allow_negative_numbers = true)]
    pub bracket_lo: f64,
    #[arg(long, default_value_t = odes::DEFAULT_BRACKET.1, allow_negative_numbers = true)]
    pub bracket_hi: f64,
    #[arg(long, default_value_t = 1e3)]
    pub horizon: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn shoot(a: &ShootArgs) -> CmdResult {
    positive("tol", a.tol)?;
    positive("step-tol", a.step_tol)?;
    positive("horizon", a.horizon)?;
    let shooter = Shooter { bracket: (a.bracket_lo, a.bracket_hi), step_tol: a.step_tol, horizon: a.horizon };
    let b = shooter.shoot(a.tol)?;
    let mut report = Report::new(
        "shoot",
        config(&[
            ("tol", num(a.tol)),
            ("step_tol", num(a.step_tol)),
            ("bracket", json!([num(a.bracket_lo), num(a.bracket_hi)])),
            ("horizon", num(a.horizon)),
        ]),
    );
    report.metric("B", num(b));
    Ok(report)
}

#[derive(Debug, Clone, Args)]
pub struct MajoranaArgs {
    /// Number of uniform grid points on [0, 1].
    #[arg(long, default_value_t = reduced::DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, default_value_t = reduced::DEFAULT_TOL)]
    pub tol: f64,
    /// Series start offset from t = 1.
    #[arg(long, default_value_t = reduced::DEFAULT_EPS)]
    pub eps: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Second-order one-sided difference at the right end of the samples.
fn end_slope(s: &[ReducedSample]) -> f64 {
    let n = s.len();
    if n < 3 {
        return (s[n - 1].dep - s[n - 2].dep) / (s[n - 1].indep - s[n - 2].indep);
    }
    let h = s[n - 1].indep - s[n - 2].indep;
    (3.0 * s[n - 1].dep - 4.0 * s[n - 2].dep + s[n - 3].dep) / (2.0 * h)
}

pub fn majorana(a: &MajoranaArgs) -> CmdResult {
    grid_ok(a.grid)?;
    positive("tol", a.tol)?;
    let sol = solve_majorana(a.grid, a.tol, a.eps)?;
    let mut report = Report::new("majorana", config(&[("grid", json!(a.grid)), ("tol", num(a.tol)), ("eps", num(a.eps))]));
    let u0 = sol.samples()[0].dep;
    report.metric("u0", num(u0));
    report.metric("B", num(initial_slope_from_u0(u0)));
    report.metric("boundary_slope", num(majorana_boundary_slope()));
    report.metric("boundary_slope_fd", num(end_slope(sol.samples())));
    let mut t = Table::new(&["t", "u"]);
    for s in sol.samples() {
        t.push_nums(&[s.indep, s.dep]);
    }
    report.table = Some(t);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReconstructChart {
    Majorana,
    Dresner,
}

#[derive(Debug, Clone, Args)]
pub struct ReconstructArgs {
    /// CSV with columns t,u (as written by `majorana`); solved afresh when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Route through the Majorana quadrature directly, or via the Dresner chart.
    #[arg(long, value_enum, default_value = "majorana")]
    pub chart: ReconstructChart,
    #[arg(long, default_value_t = reduced::DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, default_value_t = reduced::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = reduced::DEFAULT_EPS)]
    pub eps: f64,
    #[arg(long, default_value_t = tf_homology::reconstruct::DEFAULT_QUAD_TOL)]
    pub quad_tol: f64,
    /// Reconstruction stops at t = 1 - eps_rec.
    #[arg(long, default_value_t = tf_homology::reconstruct::DEFAULT_EPS_REC)]
    pub eps_rec: f64,
    /// Fail (exit 4) when an exact identity deviates by more than this.
    #[arg(long, default_value_t = 1e-8)]
    pub bound: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Reads a `t,u` CSV into a Majorana reduced solution; slopes come from
/// the reduced equation, with the boundary slope at `(1, 1)`.
pub fn read_majorana_csv(path: &PathBuf) -> Result<ReducedSolution, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header.trim() != "t,u" {
        return Err(CliError::Input(format!("expected header 't,u', found '{header}'")));
    }
    let mut samples = Vec::new();
    for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let mut cols = line.split(',').map(|c| c.trim().parse::<f64>());
        let (Some(Ok(t)), Some(Ok(u)), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(CliError::Input(format!("line {}: expected two numbers", n + 2)));
        };
        let slope = if t == 1.0 && u == 1.0 { majorana_boundary_slope() } else { majorana_rhs(t, u)? };
        samples.push(ReducedSample { indep: t, dep: u, slope });
    }
    Ok(ReducedSolution::new(Chart::Majorana, samples, format!("read from {}", path.display()))?)
}

fn reduced_input(input: &Option<PathBuf>, grid: usize, tol: f64, eps: f64) -> Result<ReducedSolution, CliError> {
    match input {
        Some(p) => read_majorana_csv(p),
        None => {
            grid_ok(grid)?;
            positive("tol", tol)?;
            Ok(solve_majorana(grid, tol, eps)?)
        }
    }
}

pub fn reconstruct(a: &ReconstructArgs) -> CmdResult {
    positive("quad-tol", a.quad_tol)?;
    positive("bound", a.bound)?;
    let red = reduced_input(&a.input, a.grid, a.tol, a.eps)?;
    let param = reconstruct_majorana_with(&red, a.quad_tol, a.eps_rec)?;
    let mut report = Report::new(
        "reconstruct",
        config(&[
            ("input", a.input.as_ref().map_or(Value::Null, |p| json!(p.display().to_string()))),
            ("chart", json!(format!("{:?}", a.chart).to_lowercase())),
            ("grid", json!(a.grid)),
            ("tol", num(a.tol)),
            ("eps", num(a.eps)),
            ("quad_tol", num(a.quad_tol)),
            ("eps_rec", num(a.eps_rec)),
            ("bound", num(a.bound)),
        ]),
    );
    let (dev_power, dev_t) = param.identity_deviations();
    report.metric("identity_x3y_dev", num(dev_power));
    report.metric("identity_t_dev", num(dev_t));
    report.metric("round_trip_dev", num(round_trip_deviation(&param, &red)?));
    let last = param.samples().last().expect("non-empty");
    report.metric("t_max", num(last.t));
    report.metric("x_at_t_max", num(last.x));
    report.metric("y_at_t_max", num(last.y));
    report.bound_exceeded = dev_power > a.bound || dev_t > a.bound;

    let mut t = Table::new(&["t", "x", "y"]);
    match a.chart {
        ReconstructChart::Majorana => {
            for s in param.samples() {
                t.push_nums(&[s.t, s.x, s.y]);
            }
        }
        ReconstructChart::Dresner => {
            let consts = DresnerConstants::canonical();
            let dres = red.majorana_to_dresner(&consts)?;
            let rows = reconstruct_dresner(&dres, a.quad_tol)?;
            let mut worst = 0.0f64;
            for ((tau, x, y), s) in rows.iter().zip(param.samples()) {
                worst = worst.max((x - s.x).abs() / s.x.max(f64::MIN_POSITIVE)).max((y - s.y).abs() / s.y);
                let t_of_tau = (tau / consts.big_a).powf(1.0 / consts.n as f64);
                t.push_nums(&[t_of_tau, *x, *y]);
            }
            report.metric("dresner_vs_majorana_dev", num(worst));
        }
    }
    report.table = Some(t);
    Ok(report)
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = reduced::DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, default_value_t = reduced::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = reduced::DEFAULT_EPS)]
    pub eps: f64,
    #[arg(long, default_value_t = tf_homology::reconstruct::DEFAULT_QUAD_TOL)]
    pub quad_tol: f64,
    /// Bisection tolerance for the direct route's slope.
    #[arg(long, default_value_t = PRECISE_SHOOT_TOL)]
    pub shoot_tol: f64,
    /// Integrator tolerance for shooting and the direct run.
    #[arg(long, default_value_t = PRECISE_STEP_TOL)]
    pub step_tol: f64,
    #[arg(long, default_value_t = 0.01)]
    pub xlo: f64,
    #[arg(long, default_value_t = 50.0)]
    pub xhi: f64,
    /// Fail (exit 4) when the max relative error exceeds this.
    #[arg(long, default_value_t = 1e-4)]
    pub bound: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn compare(a: &CompareArgs) -> CmdResult {
    positive("quad-tol", a.quad_tol)?;
    positive("shoot-tol", a.shoot_tol)?;
    positive("step-tol", a.step_tol)?;
    positive("bound", a.bound)?;
    if !(a.xlo > 0.0 && a.xhi > a.xlo) {
        return Err(CliError::Input(format!("need 0 < xlo < xhi, got [{}, {}]", a.xlo, a.xhi)));
    }
    let red = reduced_input(&a.input, a.grid, a.tol, a.eps)?;
    let param: ParametricSolution = reconstruct_majorana_with(&red, a.quad_tol, tf_homology::reconstruct::DEFAULT_EPS_REC)?;
    let shooter = Shooter { step_tol: a.step_tol, ..Shooter::default() };
    let b_shoot = shooter.shoot(a.shoot_tol)?;
    let direct = DirectRun::emden_fowler(EquationParams::thomas_fermi(), b_shoot, a.xhi, a.step_tol).run()?;
    let points = compare_with_direct(&param, &direct, a.xlo, a.xhi)?;
    let max_err = points.iter().map(|p| p.rel_err).fold(0.0, f64::max);
    let mut report = Report::new(
        "compare",
        config(&[
            ("input", a.input.as_ref().map_or(Value::Null, |p| json!(p.display().to_string()))),
            ("grid", json!(a.grid)),
            ("tol", num(a.tol)),
            ("eps", num(a.eps)),
            ("quad_tol", num(a.quad_tol)),
            ("shoot_tol", num(a.shoot_tol)),
            ("step_tol", num(a.step_tol)),
            ("xlo", num(a.xlo)),
            ("xhi", num(a.xhi)),
            ("bound", num(a.bound)),
        ]),
    );
    report.metric("B_shoot", num(b_shoot));
    report.metric("B_reduced", num(initial_slope_from_u0(red.samples()[0].dep)));
    report.metric("points", points.len());
    report.metric("max_rel_err", num(max_err));
    report.bound_exceeded = !(max_err <= a.bound);
    let mut t = Table::new(&["x", "y_direct", "y_reconstructed", "rel_err"]);
    for p in &points {
        t.push_nums(&[p.x, p.y_direct, p.y_reconstructed, p.rel_err]);
    }
    report.table = Some(t);
    Ok(report)
}

#[derive(Debug, Clone, Args)]
pub struct InvarianceArgs {
    /// Exponents to sweep (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.2, 1.5, 2.0, 2.5, 3.0], allow_negative_numbers = true)]
    pub p: Vec<f64>,
    /// Scale factors to sweep (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 2.0])]
    pub lambda: Vec<f64>,
    /// Random sample abscissas per case.
    #[arg(long, default_value_t = 64)]
    pub points: usize,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.5)]
    pub x_max: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Fail (exit 4) when any deviation exceeds this.
    #[arg(long, default_value_t = 1e-6)]
    pub bound: f64,
    /// Run cases one after another instead of on the thread pool.
    #[arg(long)]
    pub sequential: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn invariance(a: &InvarianceArgs) -> CmdResult {
    positive("tol", a.tol)?;
    positive("x-max", a.x_max)?;
    positive("bound", a.bound)?;
    if a.p.is_empty() || a.lambda.is_empty() {
        return Err(CliError::Input("need at least one --p and one --lambda".into()));
    }
    for &p in &a.p {
        tf_homology::homology::homology_exponent(p)?;
    }
    let cfg = InvarianceConfig { ps: a.p.clone(), lambdas: a.lambda.clone(), x_max: a.x_max, points: a.points, seed: a.seed, tol: a.tol };
    let exec = if a.sequential { Execution::Sequential } else { Execution::Parallel };
    let cases = invariance_sweep(&cfg, exec)?;
    let worst = cases.iter().map(|c| c.max_dev).fold(0.0, f64::max);
    let mut report = Report::new(
        "invariance",
        config(&[
            ("p", json!(a.p.iter().map(|&v| num(v)).collect::<Vec<_>>())),
            ("lambda", json!(a.lambda.iter().map(|&v| num(v)).collect::<Vec<_>>())),
            ("points", json!(a.points)),
            ("seed", json!(a.seed)),
            ("x_max", num(a.x_max)),
            ("tol", num(a.tol)),
            ("bound", num(a.bound)),
        ]),
    );
    report.metric("cases", cases.len());
    report.metric("max_dev", num(worst));
    report.bound_exceeded = !(worst <= a.bound);
    let mut t = Table::new(&["p", "lambda", "chart", "max_dev"]);
    for c in &cases {
        t.rows.push(vec![Cell::Num(c.p), Cell::Num(c.lambda), Cell::Text(c.chart.name().into()), Cell::Num(c.max_dev)]);
    }
    report.table = Some(t);
    Ok(report)
}
