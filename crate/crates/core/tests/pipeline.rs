//! End-to-end checks across modules: direct integration, charts, reduced
//! equations and reconstruction must tell the same story.

use approx::{assert_abs_diff_eq, assert_relative_eq};

use tf_homology::homology::{to_dresner, to_majorana, Chart, ChartPoint, DresnerConstants, MajoranaConstants};
use tf_homology::odes::{DirectRun, EquationParams, Fate, Shooter, SolutionTable, SERIES_X0};
use tf_homology::quad;
use tf_homology::reconstruct::{reconstruct_dresner, reconstruct_majorana, round_trip_deviation};
use tf_homology::reduced::{solve_majorana, solve_reduced_generic, ReducedOutcome, ReducedSolution};

fn critical_slope() -> f64 {
    Shooter { step_tol: 1e-13, ..Shooter::default() }.shoot(1e-14).unwrap()
}

fn tf_direct(x_max: f64) -> SolutionTable {
    DirectRun::emden_fowler(EquationParams::thomas_fermi(), critical_slope(), x_max, 1e-13).run().unwrap()
}

fn majorana_default() -> ReducedSolution {
    solve_majorana(2001, 1e-12, 1e-6).unwrap()
}

#[test]
fn direct_solution_traces_the_majorana_curve() {
    let direct = tf_direct(30.0);
    let red = majorana_default();
    let u = red.interpolant();
    let c = MajoranaConstants::canonical();
    let mut checked = 0;
    for s in direct.samples().iter().filter(|s| s.x >= 0.01) {
        let ChartPoint::MajoranaTU { t, u: u_direct } = to_majorana(s.x, s.y, s.yp, &c).unwrap() else { unreachable!() };
        assert_abs_diff_eq!(u_direct, u.eval(t).unwrap(), epsilon = 1e-5);
        checked += 1;
    }
    assert!(checked > 50);
}

#[test]
fn dresner_equation_seeded_from_direct_sample() {
    let direct = DirectRun::emden_fowler(EquationParams::thomas_fermi(), critical_slope(), 20.0, 1e-13)
        .with_stops(vec![1.0])
        .run()
        .unwrap();
    let seed = *direct.samples().iter().find(|s| s.x == 1.0).unwrap();
    let ChartPoint::DresnerTauS { tau, s } = to_dresner(seed.x, seed.y, seed.yp).unwrap() else { unreachable!() };
    let red = solve_reduced_generic(Chart::Dresner, 1.5, (tau, s), (0.01, 100.0), 1e-12).unwrap();
    assert_eq!(red.outcome(), ReducedOutcome::Completed);
    let s_of_tau = red.interpolant();
    for smp in direct.samples().iter().filter(|p| p.x > 0.3 && p.x < 20.0) {
        let ChartPoint::DresnerTauS { tau, s } = to_dresner(smp.x, smp.y, smp.yp).unwrap() else { unreachable!() };
        if let Some(s_red) = s_of_tau.eval(tau) {
            assert_relative_eq!(s_red, s, max_relative = 1e-6);
        }
    }
}

#[test]
fn round_trip_recovers_reduced_input() {
    let red = majorana_default();
    let param = reconstruct_majorana(&red, 1e-10).unwrap();
    assert!(round_trip_deviation(&param, &red).unwrap() <= 1e-4);
}

#[test]
fn reconstruction_is_monotone_and_approaches_the_asymptote() {
    let param = reconstruct_majorana(&majorana_default(), 1e-10).unwrap();
    let s = param.samples();
    assert!(s.windows(2).all(|w| w[1].x > w[0].x && w[1].y < w[0].y));
    let tau: Vec<f64> = s.iter().map(|p| p.x.powi(3) * p.y).collect();
    assert!(tau.windows(2).all(|w| w[1] > w[0]));
    assert!(tau.iter().all(|&v| v <= 144.0));
    assert_relative_eq!(*tau.last().unwrap(), 144.0, max_relative = 1e-3);
}

#[test]
fn dresner_and_majorana_reconstructions_agree() {
    let red = majorana_default();
    let consts = DresnerConstants::canonical();
    let dres = red.majorana_to_dresner(&consts).unwrap();
    let quad_tol = 1e-10;
    let via_dresner = reconstruct_dresner(&dres, quad_tol).unwrap();
    let via_majorana = reconstruct_majorana(&red, quad_tol).unwrap();
    for ((tau, x, y), p) in via_dresner.iter().zip(via_majorana.samples()) {
        assert_relative_eq!(*tau, 144.0 * p.t.powi(6), max_relative = 1e-14);
        assert_abs_diff_eq!(*x, p.x, epsilon = 10.0 * quad_tol * p.x.max(1.0));
        assert_abs_diff_eq!(*y, p.y, epsilon = 10.0 * quad_tol);
        assert_relative_eq!(*x, (tau / y).cbrt(), max_relative = 1e-12);
    }
}

#[test]
fn dresner_log_derivative_matches_direct_tau_quadrature() {
    // ln y(τ₂) - ln y(τ₁) = ∫ s / (σ (3σ + s)) dσ, away from the σ = 0 endpoint.
    let red = majorana_default();
    let dres = red.majorana_to_dresner(&DresnerConstants::canonical()).unwrap();
    let s_of_tau = dres.interpolant();
    let rows = reconstruct_dresner(&dres, 1e-10).unwrap();
    let pick = |tau: f64| rows.iter().min_by(|a, b| (a.0 - tau).abs().total_cmp(&(b.0 - tau).abs())).copied().unwrap();
    let (t1, _, y1) = pick(1.0);
    for target in [5.0, 20.0, 80.0, 130.0] {
        let (t2, _, y2) = pick(target);
        let (i, _) = quad::integrate(
            |sig| {
                let s = s_of_tau.eval(sig).unwrap();
                s / (sig * (3.0 * sig + s))
            },
            t1,
            t2,
            1e-11,
        )
        .unwrap();
        assert_abs_diff_eq!((y2 / y1).ln(), i, epsilon = 1e-6);
    }
}

#[test]
fn critical_slope_separates_fates() {
    let b = critical_slope();
    let shooter = Shooter::default();
    for d in [1e-3, 1e-5, 1e-7] {
        assert_eq!(shooter.classify(b + d).unwrap(), Fate::Divergent);
        assert_eq!(shooter.classify(b - d).unwrap(), Fate::CrossesZero);
    }
    assert_relative_eq!(b, -1.588071022611375, max_relative = 1e-9);
}

#[test]
fn residual_diagnostic_shrinks_with_sampling() {
    let coarse = tf_direct(10.0);
    // Geometric near the x^(-1/2) behaviour of y'' at the origin, uniform beyond.
    let mut stops: Vec<f64> = (1..).map(|k| SERIES_X0 * 1.02f64.powi(k)).take_while(|&x| x < 0.005).collect();
    stops.extend((1..=2000).map(|i| 0.005 * i as f64));
    let dense = DirectRun::emden_fowler(EquationParams::thomas_fermi(), coarse.slope0(), 10.0, 1e-13)
        .with_stops(stops)
        .run()
        .unwrap();
    assert!(coarse.max_residual() < 1e-2);
    assert!(dense.max_residual() < coarse.max_residual() / 4.0, "{} vs {}", dense.max_residual(), coarse.max_residual());
    let end = dense.samples().last().unwrap();
    assert!(end.y > 0.0 && end.yp < 0.0);
}
