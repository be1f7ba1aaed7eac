//! Parametric reconstruction of the Thomas–Fermi solution from the reduced
//! Majorana (or Dresner) solution:
//!
//! `y(t) = exp(∫₀ᵗ W)`, `x(t) = 144^(1/3) t² exp(-⅓ ∫₀ᵗ W)`,
//! `W(t) = -6tu/(1 - t²u)`.

use crate::error::{Error, Result};
use crate::homology::{to_majorana, Chart, ChartPoint, DresnerConstants, MajoranaConstants};
use crate::interp::Hermite;
use crate::odes::SolutionTable;
use crate::quad;
use crate::reduced::{majorana_boundary_slope, ReducedSolution};

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
/// Reconstruction stops at `t = 1 - DEFAULT_EPS_REC`, where `y` is still positive.
pub const DEFAULT_EPS_REC: f64 = 1e-4;

/// `W(t) = -6tu/(1 - t²u)`.
pub fn w_of_t(t: f64, u: f64) -> Result<f64> {
    let den = 1.0 - t * t * u;
    if den == 0.0 {
        return Err(Error::Singular { op: "w_of_t", at0: t, at1: u });
    }
    Ok(-6.0 * t * u / den)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParametricSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone)]
pub struct ParametricSolution {
    samples: Vec<ParametricSample>,
    quadrature_tol: f64,
}

impl ParametricSolution {
    pub fn samples(&self) -> &[ParametricSample] {
        &self.samples
    }

    pub fn quadrature_tol(&self) -> f64 {
        self.quadrature_tol
    }

    /// Monotone cubic of `ln y` against `ln x` over the samples with `t > 0`.
    pub fn y_of_x(&self) -> Result<impl Fn(f64) -> Option<f64>> {
        let pts: Vec<&ParametricSample> = self.samples.iter().filter(|s| s.t > 0.0).collect();
        let h = Hermite::monotone(pts.iter().map(|s| s.x.ln()).collect(), pts.iter().map(|s| s.y.ln()).collect())?;
        Ok(move |x: f64| h.eval(x.ln()).map(f64::exp))
    }

    /// Largest `|x³y/(144t⁶) - 1|` and `|144^(-1/6) x^(1/2) y^(1/6) - t|` over samples with `t > 0`.
    pub fn identity_deviations(&self) -> (f64, f64) {
        let a = MajoranaConstants::canonical().a();
        self.samples.iter().filter(|s| s.t > 0.0).fold((0.0f64, 0.0f64), |(d1, d2), s| {
            let r = s.x.powi(3) * s.y / (144.0 * s.t.powi(6));
            let t = a * s.x.sqrt() * s.y.powf(1.0 / 6.0);
            (d1.max((r - 1.0).abs()), d2.max((t - s.t).abs()))
        })
    }
}

/// Parametric reconstruction with the default endpoint cutoff.
pub fn reconstruct_majorana(reduced: &ReducedSolution, quad_tol: f64) -> Result<ParametricSolution> {
    reconstruct_majorana_with(reduced, quad_tol, DEFAULT_EPS_REC)
}

/// Parametric reconstruction at the reduced grid nodes up to
/// `t_max = 1 - eps_rec` (included as the last sample). One cumulative
/// integral of `W` feeds both formulas.
pub fn reconstruct_majorana_with(reduced: &ReducedSolution, quad_tol: f64, eps_rec: f64) -> Result<ParametricSolution> {
    if reduced.chart() != Chart::Majorana {
        return Err(Error::InvalidArgument("reconstruct_majorana needs a Majorana-chart solution".into()));
    }
    if !(quad_tol > 0.0) {
        return Err(Error::InvalidArgument("quadrature tolerance must be positive".into()));
    }
    if !(eps_rec > 0.0 && eps_rec < 1.0) {
        return Err(Error::InvalidArgument(format!("eps_rec must lie in (0, 1), got {eps_rec}")));
    }
    let t_max = 1.0 - eps_rec;
    let (lo, hi) = reduced.range();
    if lo != 0.0 || hi < t_max {
        return Err(Error::InvalidArgument(format!("reduced solution must cover [0, {t_max}], covers [{lo}, {hi}]")));
    }
    let u = reduced.interpolant();
    let mut nodes: Vec<f64> = reduced.samples().iter().map(|s| s.indep).filter(|&t| t < t_max).collect();
    nodes.push(t_max);

    // the integrand is evaluated on the interpolant; a vanishing denominator
    // inside a panel shows up as a non-finite value and fails the quadrature
    let w = |t: f64| {
        let uu = u.eval(t).unwrap_or(f64::NAN);
        -6.0 * t * uu / (1.0 - t * t * uu)
    };
    let integral = quad::cumulative(w, &nodes, quad_tol)?;
    let x_scale = 144f64.cbrt();
    let samples: Vec<ParametricSample> = nodes
        .iter()
        .zip(&integral)
        .map(|(&t, &i)| ParametricSample { t, x: x_scale * t * t * (-i / 3.0).exp(), y: i.exp() })
        .collect();
    Ok(ParametricSolution { samples, quadrature_tol: quad_tol })
}

/// Dresner-chart reconstruction `(τ, x, y)`, carried out in the Majorana
/// parameter `τ = 144 t⁶` where the `σ^(-2/3)` endpoint behaviour of the
/// integrand disappears.
pub fn reconstruct_dresner(reduced: &ReducedSolution, quad_tol: f64) -> Result<Vec<(f64, f64, f64)>> {
    if reduced.chart() != Chart::Dresner {
        return Err(Error::InvalidArgument("reconstruct_dresner needs a Dresner-chart solution".into()));
    }
    if reduced.range().0 != 0.0 {
        return Err(Error::Quadrature { a: 0.0, b: reduced.range().0, err: f64::INFINITY });
    }
    let consts = DresnerConstants::canonical();
    let majorana = reduced.dresner_to_majorana(&consts)?;
    let param = reconstruct_majorana(&majorana, quad_tol)?;
    Ok(param.samples().iter().map(|s| (consts.big_a * s.t.powi(consts.n), s.x, s.y)).collect())
}

/// Point of the reconstructed-versus-direct comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparePoint {
    pub x: f64,
    pub y_direct: f64,
    pub y_reconstructed: f64,
    pub rel_err: f64,
}

/// Compares a direct solution with a reconstruction at every direct sample
/// in `[x_lo, x_hi]`.
pub fn compare_with_direct(param: &ParametricSolution, direct: &SolutionTable, x_lo: f64, x_hi: f64) -> Result<Vec<ComparePoint>> {
    let y_rec = param.y_of_x()?;
    direct
        .samples()
        .iter()
        .filter(|s| s.x >= x_lo && s.x <= x_hi)
        .map(|s| {
            let yr = y_rec(s.x).ok_or_else(|| {
                Error::InvalidArgument(format!("x = {} lies outside the reconstructed range", s.x))
            })?;
            Ok(ComparePoint { x: s.x, y_direct: s.y, y_reconstructed: yr, rel_err: (yr - s.y).abs() / s.y.abs() })
        })
        .collect()
}

/// Maps reconstructed `(x, y)` samples back into the Majorana chart, using a
/// three-point finite difference for `y'`, and returns the largest deviation
/// from the reduced solution's `u(t)` over interior samples.
pub fn round_trip_deviation(param: &ParametricSolution, reduced: &ReducedSolution) -> Result<f64> {
    let u = reduced.interpolant();
    let c = MajoranaConstants::canonical();
    let s = param.samples();
    let mut worst = 0.0f64;
    // I = ln y behaves like t² near 0 and like k ln(1-t) near 1. Difference the
    // smooth remainder R = (I - k L)/t², with L = ln(1-t) + t + t²/2 = O(t³),
    // and put the t-power and log parts back exactly. ln(x/t²) = const - I/3.
    let k = 6.0 / (2.0 + majorana_boundary_slope());
    let big_l = |t: f64| (-t).ln_1p() + t + 0.5 * t * t;
    let rem = |p: &ParametricSample| (p.y.ln() - k * big_l(p.t)) / (p.t * p.t);
    let d = |h0: f64, h1: f64, f: [f64; 3]| {
        (-h1 / (h0 * (h0 + h1))) * f[0] + ((h1 - h0) / (h0 * h1)) * f[1] + (h0 / (h1 * (h0 + h1))) * f[2]
    };
    for w in s.windows(3).filter(|w| w[0].t > 0.0) {
        let (h0, h1) = (w[1].t - w[0].t, w[2].t - w[1].t);
        let t1 = w[1].t;
        let di = 2.0 * t1 * rem(&w[1])
            + t1 * t1 * d(h0, h1, [rem(&w[0]), rem(&w[1]), rem(&w[2])])
            - k * t1 * t1 / (1.0 - t1);
        let yp = w[1].y / w[1].x * di / (2.0 / t1 - di / 3.0);
        let ChartPoint::MajoranaTU { t, u: u_rt } = to_majorana(w[1].x, w[1].y, yp, &c)? else { unreachable!() };
        let u_ref = u.eval(w[1].t).ok_or_else(|| Error::InvalidArgument("t outside reduced range".into()))?;
        worst = worst.max((t - w[1].t).abs()).max((u_rt - u_ref).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduced::{solve_majorana, DEFAULT_EPS};

    #[test]
    fn w_examples() {
        assert_eq!(w_of_t(0.0, 17.0).unwrap(), 0.0);
        assert!((w_of_t(0.5, 1.0).unwrap() + 4.0).abs() < 1e-15);
        assert!(matches!(w_of_t(1.0, 1.0), Err(Error::Singular { .. })));
    }

    #[test]
    fn endpoints_and_identities() {
        let red = solve_majorana(401, 1e-11, DEFAULT_EPS).unwrap();
        let par = reconstruct_majorana(&red, 1e-10).unwrap();
        let s = par.samples();
        assert_eq!((s[0].t, s[0].x, s[0].y), (0.0, 0.0, 1.0));
        assert_eq!(s.last().unwrap().t, 1.0 - DEFAULT_EPS_REC);
        assert!(s.last().unwrap().y > 0.0);
        assert!(s.windows(2).all(|w| w[1].t > w[0].t && w[1].x > w[0].x && w[1].y < w[0].y));
        let (d1, d2) = par.identity_deviations();
        assert!(d1 <= 1e-8 && d2 <= 1e-8);
    }

    #[test]
    fn rejects_wrong_chart_and_short_range() {
        let red = solve_majorana(51, 1e-10, DEFAULT_EPS).unwrap();
        let dres = red.majorana_to_dresner(&DresnerConstants::canonical()).unwrap();
        assert!(reconstruct_majorana(&dres, 1e-10).is_err());
        assert!(reconstruct_dresner(&red, 1e-10).is_err());
        let short = ReducedSolution::new(Chart::Majorana, red.samples()[..25].to_vec(), "cut").unwrap();
        assert!(reconstruct_majorana(&short, 1e-10).is_err());
    }
}
