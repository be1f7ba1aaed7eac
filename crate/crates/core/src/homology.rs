//! Homology scalings `x → λx, y → λ^(-q) y` and the four invariant charts
//! (Coppel, Milne, Dresner, Majorana) that turn a solution sample
//! `(x, y, y')` into a pair of scale-free coordinates.

use crate::error::{Error, Result};
use crate::odes::{Sample, TF_P};

/// `q = (3 - p)/(p - 1)`.
pub fn homology_exponent(p: f64) -> Result<f64> {
    if p == 1.0 {
        return Err(Error::domain("homology_exponent", "q = (3-p)/(p-1) is singular at p = 1"));
    }
    Ok((3.0 - p) / (p - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomologyMap {
    lambda: f64,
    q: f64,
}

impl HomologyMap {
    pub fn new(lambda: f64, q: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::domain("HomologyMap", format!("lambda must be positive, got {lambda}")));
        }
        Ok(Self { lambda, q })
    }

    pub fn for_exponent(lambda: f64, p: f64) -> Result<Self> {
        Self::new(lambda, homology_exponent(p)?)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Point map `(x, y, y') → (λx, λ^(-q) y, λ^(-q-1) y')`.
    ///
    /// A sample of a solution `y` at `x` becomes the sample at `λx` of
    /// `ỹ(x) = λ^(-q) y(x/λ)`, which solves the same equation.
    pub fn apply(&self, s: Sample) -> Sample {
        let l = self.lambda;
        Sample { x: l * s.x, y: l.powf(-self.q) * s.y, yp: l.powf(-self.q - 1.0) * s.yp }
    }

    pub fn compose(&self, other: &HomologyMap) -> Result<HomologyMap> {
        if self.q != other.q {
            return Err(Error::InvalidArgument("cannot compose homology maps with different q".into()));
        }
        HomologyMap::new(self.lambda * other.lambda, self.q)
    }
}

/// Tuple form of [`HomologyMap::apply`].
pub fn apply_homology(point: (f64, f64, f64), map: &HomologyMap) -> Result<(f64, f64, f64)> {
    if !(point.0 > 0.0) {
        return Err(Error::domain("apply_homology", "x must be positive"));
    }
    let s = map.apply(Sample { x: point.0, y: point.1, yp: point.2 });
    Ok((s.x, s.y, s.yp))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Chart {
    Coppel,
    Milne,
    Dresner,
    Majorana,
}

impl Chart {
    pub const ALL: [Chart; 4] = [Chart::Coppel, Chart::Milne, Chart::Dresner, Chart::Majorana];

    pub fn name(&self) -> &'static str {
        match self {
            Chart::Coppel => "coppel",
            Chart::Milne => "milne",
            Chart::Dresner => "dresner",
            Chart::Majorana => "majorana",
        }
    }

    /// Dresner and Majorana charts exist only for the Thomas–Fermi exponent.
    pub fn supports(&self, p: f64) -> bool {
        match self {
            Chart::Coppel | Chart::Milne => p != 1.0,
            Chart::Dresner | Chart::Majorana => p == TF_P,
        }
    }
}

impl std::str::FromStr for Chart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Chart::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown chart '{s}'")))
    }
}

/// A point in one of the invariant charts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartPoint {
    CoppelUV { u: f64, v: f64 },
    MilneUV { u: f64, v: f64 },
    DresnerTauS { tau: f64, s: f64 },
    MajoranaTU { t: f64, u: f64 },
}

impl ChartPoint {
    pub fn chart(&self) -> Chart {
        match self {
            ChartPoint::CoppelUV { .. } => Chart::Coppel,
            ChartPoint::MilneUV { .. } => Chart::Milne,
            ChartPoint::DresnerTauS { .. } => Chart::Dresner,
            ChartPoint::MajoranaTU { .. } => Chart::Majorana,
        }
    }

    /// Coordinates as (independent, dependent) of the reduced equation:
    /// `(v, u)`, `(v, u)`, `(τ, s)` and `(t, u)` respectively.
    pub fn coords(&self) -> (f64, f64) {
        match *self {
            ChartPoint::CoppelUV { u, v } | ChartPoint::MilneUV { u, v } => (v, u),
            ChartPoint::DresnerTauS { tau, s } => (tau, s),
            ChartPoint::MajoranaTU { t, u } => (t, u),
        }
    }
}

fn check_x(op: &'static str, x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(op, format!("x must be positive, got {x}")))
    }
}

fn pow_checked(op: &'static str, y: f64, p: f64) -> Result<f64> {
    if y < 0.0 && p.fract() != 0.0 {
        return Err(Error::domain(op, format!("negative base {y} with fractional exponent {p}")));
    }
    Ok(if p.fract() == 0.0 { y.powi(p as i32) } else { y.powf(p) })
}

/// Coppel variables `v = x y'/y`, `u = x^(2-p) y^p / y'`.
pub fn to_coppel(x: f64, y: f64, yp: f64, p: f64) -> Result<ChartPoint> {
    check_x("to_coppel", x)?;
    if y == 0.0 || yp == 0.0 {
        return Err(Error::Singular { op: "to_coppel", at0: x, at1: if y == 0.0 { y } else { yp } });
    }
    let v = x * yp / y;
    let u = x.powf(2.0 - p) * pow_checked("to_coppel", y, p)? / yp;
    Ok(ChartPoint::CoppelUV { u, v })
}

/// Milne variables in terms of `θ = y/x`: `v = x θ'/θ`, `u = x θ^p / θ'`.
pub fn to_milne(x: f64, y: f64, yp: f64, p: f64) -> Result<ChartPoint> {
    check_x("to_milne", x)?;
    let theta = y / x;
    let dtheta = (yp * x - y) / (x * x);
    to_milne_theta(x, theta, dtheta, p)
}

/// Milne variables from `(x, θ, θ')` directly.
pub fn to_milne_theta(x: f64, theta: f64, dtheta: f64, p: f64) -> Result<ChartPoint> {
    check_x("to_milne", x)?;
    if theta == 0.0 || dtheta == 0.0 {
        return Err(Error::Singular { op: "to_milne", at0: x, at1: if theta == 0.0 { theta } else { dtheta } });
    }
    let v = x * dtheta / theta;
    let u = x * pow_checked("to_milne", theta, p)? / dtheta;
    Ok(ChartPoint::MilneUV { u, v })
}

/// Dresner variables `τ = x³ y`, `s = x⁴ y'` (Thomas–Fermi only).
pub fn to_dresner(x: f64, y: f64, yp: f64) -> Result<ChartPoint> {
    check_x("to_dresner", x)?;
    Ok(ChartPoint::DresnerTauS { tau: x.powi(3) * y, s: x.powi(4) * yp })
}

/// Constants `(a, b)` of the chart `t = a x^(1/2) y^(1/6)`, `u = b y^(-4/3) y'`,
/// together with the coefficients they induce in the reduced equation
/// `du/dt = (2b/a) (1 - k_quad t u²) / (1 + k_lin t² u)`.
///
/// When built by [`MajoranaConstants::solve`] the coefficients are kept
/// exactly as requested, so the canonical instance reproduces
/// `-8 (1 - t u²)/(1 - t² u)` bit for bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajoranaConstants {
    a: f64,
    b: f64,
    k_quad: f64,
    k_lin: f64,
    scale: f64,
}

impl MajoranaConstants {
    /// Arbitrary chart constants; coefficients derived from `a` and `b`.
    pub fn from_ab(a: f64, b: f64) -> Result<Self> {
        if a == 0.0 || b == 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(Error::domain("MajoranaConstants", "a and b must be finite and nonzero"));
        }
        let (k_quad, k_lin) = (4.0 / (3.0 * a * b * b), 1.0 / (3.0 * a * a * b));
        Ok(Self { a, b, k_quad, k_lin, scale: 2.0 * b / a })
    }

    /// `a = 144^(-1/6)`, `b = -4a`.
    pub fn canonical() -> Self {
        Self::solve(1.0, -1.0).expect("nonzero coefficients")
    }

    /// Solves `4/(3ab²) = k_quad` and `1/(3a²b) = k_lin` for `(a, b)`.
    ///
    /// Eliminating `b = 1/(3a²k_lin)` gives `12 a³ k_lin² = k_quad`, and then
    /// `2b/a = 8 k_lin / k_quad`.
    pub fn solve(k_quad: f64, k_lin: f64) -> Result<Self> {
        if k_quad == 0.0 || k_lin == 0.0 || !k_quad.is_finite() || !k_lin.is_finite() {
            return Err(Error::domain("MajoranaConstants::solve", "coefficients must be finite and nonzero"));
        }
        let a = (k_quad / (12.0 * k_lin * k_lin)).cbrt();
        let b = 1.0 / (3.0 * a * a * k_lin);
        Ok(Self { a, b, k_quad, k_lin, scale: 8.0 * k_lin / k_quad })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `(4/(3ab²), 1/(3a²b))` recomputed from `a` and `b`.
    pub fn constraint_values(&self) -> (f64, f64) {
        (4.0 / (3.0 * self.a * self.b * self.b), 1.0 / (3.0 * self.a * self.a * self.b))
    }

    /// Coefficients `(k_quad, k_lin)` used by the reduced equation.
    pub fn coefficients(&self) -> (f64, f64) {
        (self.k_quad, self.k_lin)
    }

    /// `2b/a`, the value of the reduced right-hand side at the origin.
    pub fn scale(&self) -> f64 {
        self.scale
    }
}

impl Default for MajoranaConstants {
    fn default() -> Self {
        Self::canonical()
    }
}

/// `a = 144^(-1/6)`, `b = -4a` from the constraints `4/(3ab²) = 1`,
/// `1/(3a²b) = -1`.
pub fn solve_majorana_constants() -> MajoranaConstants {
    MajoranaConstants::canonical()
}

/// Majorana-type variables `t = a x^(1/2) y^(1/6)`, `u = b y^(-4/3) y'`.
pub fn to_majorana(x: f64, y: f64, yp: f64, consts: &MajoranaConstants) -> Result<ChartPoint> {
    check_x("to_majorana", x)?;
    if !(y > 0.0) {
        return Err(Error::domain("to_majorana", format!("y must be positive, got {y}")));
    }
    Ok(ChartPoint::MajoranaTU { t: consts.a() * x.sqrt() * y.powf(1.0 / 6.0), u: consts.b() * y.powf(-4.0 / 3.0) * yp })
}

/// Rationalizing substitution `τ = A tⁿ`, `s = B tᵐ u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DresnerConstants {
    pub big_a: f64,
    pub big_b: f64,
    pub n: i32,
    pub m: i32,
}

impl DresnerConstants {
    pub fn canonical() -> Self {
        Self { big_a: 144.0, big_b: -432.0, n: 6, m: 8 }
    }

    /// `(4B²/(3A^(5/2)), B/(3A))`.
    pub fn coefficients(&self) -> (f64, f64) {
        let (a, b) = (self.big_a, self.big_b);
        (4.0 * b * b / (3.0 * a.powf(2.5)), b / (3.0 * a))
    }

    /// Maps `(τ, s)` to the `(t, u)` pair of the substitution.
    pub fn to_tu(&self, tau: f64, s: f64) -> Result<(f64, f64)> {
        if !(tau > 0.0) {
            return Err(Error::domain("DresnerConstants::to_tu", format!("tau must be positive, got {tau}")));
        }
        let t = (tau / self.big_a).powf(1.0 / self.n as f64);
        Ok((t, s / (self.big_b * t.powi(self.m))))
    }

    /// Maps `(t, u)` back to `(τ, s)`.
    pub fn from_tu(&self, t: f64, u: f64) -> (f64, f64) {
        (self.big_a * t.powi(self.n), self.big_b * t.powi(self.m) * u)
    }
}

impl Default for DresnerConstants {
    fn default() -> Self {
        Self::canonical()
    }
}

/// Smallest even `n` with integer `m` solving `4n - 3m = 0`, then `A`, `B`
/// from `4B²/(3A^(5/2)) = 1`, `B/(3A) = -1`: `B = -3A`, `12 A^(-1/2) = 1`.
pub fn solve_dresner_constants() -> DresnerConstants {
    let n = (2..).step_by(2).find(|n| (4 * n) % 3 == 0).expect("exists");
    let m = 4 * n / 3;
    let big_a = 12f64.powi(2);
    DresnerConstants { big_a, big_b: -3.0 * big_a, n, m }
}

/// Evaluates `chart` on an Emden–Fowler sample. Majorana uses canonical
/// constants; Dresner and Majorana require `p = 3/2`.
pub fn chart_point(chart: Chart, s: &Sample, p: f64) -> Result<ChartPoint> {
    if !chart.supports(p) {
        return Err(Error::domain("chart_point", format!("{} chart is not defined for p = {p}", chart.name())));
    }
    match chart {
        Chart::Coppel => to_coppel(s.x, s.y, s.yp, p),
        Chart::Milne => to_milne(s.x, s.y, s.yp, p),
        Chart::Dresner => to_dresner(s.x, s.y, s.yp),
        Chart::Majorana => to_majorana(s.x, s.y, s.yp, &MajoranaConstants::canonical()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn exponent_examples() {
        assert_eq!(homology_exponent(1.5).unwrap(), 3.0);
        assert_eq!(homology_exponent(3.0).unwrap(), 0.0);
        assert_eq!(homology_exponent(0.0).unwrap(), -3.0);
        assert!(homology_exponent(1.0).is_err());
    }

    #[test]
    fn apply_examples() {
        let m = HomologyMap::new(2.0, 3.0).unwrap();
        assert_eq!(apply_homology((2.0, 5.0, -1.0), &m).unwrap(), (4.0, 5.0 / 8.0, -1.0 / 16.0));
        let id = HomologyMap::new(1.0, 2.7).unwrap();
        let p = (0.37, -1.3e-3, 42.5);
        assert_eq!(apply_homology(p, &id).unwrap(), p);
        assert!(HomologyMap::new(0.0, 3.0).is_err());
        assert!(HomologyMap::new(-1.0, 3.0).is_err());
    }

    #[test]
    fn coppel_examples() {
        assert_eq!(to_coppel(1.0, 1.0, 2.0, 2.2).unwrap(), ChartPoint::CoppelUV { u: 0.5, v: 2.0 });
        assert_eq!(to_coppel(1.0, 1.0, 1.0, 1.5).unwrap(), ChartPoint::CoppelUV { u: 1.0, v: 1.0 });
        assert!(matches!(to_coppel(1.0, 0.0, 1.0, 1.5), Err(Error::Singular { .. })));
        assert!(matches!(to_coppel(1.0, 1.0, 0.0, 1.5), Err(Error::Singular { .. })));
    }

    #[test]
    fn milne_examples() {
        assert_eq!(to_milne(1.0, 1.0, 2.0, 1.5).unwrap(), ChartPoint::MilneUV { u: 1.0, v: 1.0 });
        assert!(matches!(to_milne(2.0, 2.0, 1.0, 0.0), Err(Error::Singular { .. })));
    }

    #[test]
    fn dresner_examples() {
        assert_eq!(to_dresner(2.0, 1.0, -1.0).unwrap(), ChartPoint::DresnerTauS { tau: 8.0, s: -16.0 });
        let ChartPoint::DresnerTauS { tau, s } = to_dresner(1e-8, 1.0, -1.588).unwrap() else { unreachable!() };
        assert!(tau < 1e-23 && s.abs() < 1e-31);
    }

    #[test]
    fn majorana_examples() {
        let c = MajoranaConstants::canonical();
        let ChartPoint::MajoranaTU { t, u } = to_majorana(1.0, 1.0, 0.0, &c).unwrap() else { unreachable!() };
        assert!((t - 0.436_790).abs() < 1e-6);
        assert_eq!(u, 0.0);
        let b = -1.588071;
        let ChartPoint::MajoranaTU { t, u } = to_majorana(1e-300, 1.0, b, &c).unwrap() else { unreachable!() };
        assert!(t < 1e-149);
        assert!(rel(u, -(16f64 / 3.0).cbrt() * b) < 1e-15);
        assert!(to_majorana(1.0, 0.0, 1.0, &c).is_err());
        assert!(to_majorana(1.0, -1.0, 1.0, &c).is_err());
    }

    #[test]
    fn majorana_constants() {
        let c = solve_majorana_constants();
        let (k_quad, k_lin) = c.constraint_values();
        assert!((k_quad - 1.0).abs() <= 1e-14);
        assert!((k_lin + 1.0).abs() <= 1e-14);
        assert!(rel(c.b() / c.a(), -4.0) <= 1e-14);
        assert!(rel(c.a(), 144f64.powf(-1.0 / 6.0)) <= 1e-14);
        assert!(rel(c.a(), 12f64.powf(-1.0 / 3.0)) <= 1e-14);
        assert!(rel(c.b(), -(16f64 / 3.0).cbrt()) <= 1e-14);
        assert_eq!(c.scale(), -8.0);
        let ab = MajoranaConstants::from_ab(c.a(), c.b()).unwrap();
        assert!(rel(ab.scale(), -8.0) <= 1e-15);
        // the opposite sign choice puts t on a negative interval
        let alt = MajoranaConstants::solve(-1.0, 1.0).unwrap();
        let (q, l) = alt.constraint_values();
        assert!((q + 1.0).abs() < 1e-14 && (l - 1.0).abs() < 1e-14);
        assert!(alt.a() < 0.0);
        assert!(MajoranaConstants::from_ab(0.0, 1.0).is_err());
    }

    #[test]
    fn dresner_constants() {
        let d = solve_dresner_constants();
        assert_eq!(d, DresnerConstants::canonical());
        let (k_quad, k_lin) = d.coefficients();
        assert!((k_quad - 1.0).abs() <= 1e-14);
        assert!((k_lin + 1.0).abs() <= 1e-14);
        assert_eq!(4 * d.n - 3 * d.m, 0);
    }

    #[test]
    fn chart_support() {
        let s = Sample { x: 1.0, y: 0.5, yp: -0.3 };
        assert!(chart_point(Chart::Dresner, &s, 2.0).is_err());
        assert!(chart_point(Chart::Coppel, &s, 1.0).is_err());
        assert!(chart_point(Chart::Majorana, &s, 1.5).is_ok());
        assert_eq!("Milne".parse::<Chart>().unwrap(), Chart::Milne);
    }

    proptest! {
        #[test]
        fn coppel_product_identity(x in 0.01f64..20.0, y in 0.01f64..10.0, yp in -5.0f64..5.0, p in 0.0f64..4.0) {
            prop_assume!(yp.abs() > 1e-3);
            let ChartPoint::CoppelUV { u, v } = to_coppel(x, y, yp, p).unwrap() else { unreachable!() };
            prop_assert!(rel(u * v, x.powf(3.0 - p) * y.powf(p - 1.0)) <= 1e-12);
        }

        #[test]
        fn milne_product_identity(x in 0.01f64..20.0, y in 0.01f64..10.0, yp in -5.0f64..5.0, p in 0.0f64..4.0) {
            let theta = y / x;
            let dtheta = (yp * x - y) / (x * x);
            prop_assume!(dtheta.abs() > 1e-6);
            let ChartPoint::MilneUV { u, v } = to_milne(x, y, yp, p).unwrap() else { unreachable!() };
            prop_assert!(rel(u * v, x * x * theta.powf(p - 1.0)) <= 1e-12);
        }

        #[test]
        fn majorana_and_dresner_agree(x in 0.001f64..100.0, y in 1e-4f64..2.0, yp in -3.0f64..-1e-4) {
            let ChartPoint::MajoranaTU { t, u } = to_majorana(x, y, yp, &MajoranaConstants::canonical()).unwrap() else { unreachable!() };
            let ChartPoint::DresnerTauS { tau, s } = to_dresner(x, y, yp).unwrap() else { unreachable!() };
            prop_assert!(rel(144.0 * t.powi(6), tau) <= 1e-12);
            prop_assert!(rel(-(144f64.cbrt() / 3.0) * s / tau.powf(4.0 / 3.0), u) <= 1e-12);
            let (t2, u2) = DresnerConstants::canonical().to_tu(tau, s).unwrap();
            prop_assert!(rel(t2, t) <= 1e-13 && rel(u2, u) <= 1e-12);
        }

        #[test]
        fn homology_composes(l1 in 0.1f64..10.0, l2 in 0.1f64..10.0, q in -3.0f64..3.0, x in 0.1f64..10.0, y in 0.1f64..10.0, yp in -3.0f64..3.0) {
            let m1 = HomologyMap::new(l1, q).unwrap();
            let m2 = HomologyMap::new(l2, q).unwrap();
            let s = Sample { x, y, yp };
            let two = m2.apply(m1.apply(s));
            let one = m1.compose(&m2).unwrap().apply(s);
            prop_assert!(rel(two.x, one.x) < 1e-13 && rel(two.y, one.y) < 1e-12);
            prop_assert!((two.yp - one.yp).abs() <= 1e-12 * one.yp.abs().max(1e-300));
        }

        #[test]
        fn charts_invariant_under_scaling(l in 0.2f64..5.0, x in 0.1f64..10.0, y in 0.1f64..10.0, yp in -3.0f64..-0.01) {
            // pointwise: the transformed sample lives on the homologous solution
            let p = 1.5;
            let m = HomologyMap::for_exponent(l, p).unwrap();
            let s = Sample { x, y, yp };
            let ts = m.apply(s);
            for chart in Chart::ALL {
                let (a0, a1) = chart_point(chart, &s, p).unwrap().coords();
                let (b0, b1) = chart_point(chart, &ts, p).unwrap().coords();
                prop_assert!(rel(b0, a0) < 1e-12 && rel(b1, a1) < 1e-12, "{:?}", chart);
            }
        }
    }
}
