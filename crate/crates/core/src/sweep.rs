//! Batch workloads: homology-invariance sweeps over `(p, λ, chart)` and
//! slope classification scans. With the `parallel` feature the independent
//! cases run on the rayon pool; without it, [`Execution::Parallel`] falls
//! back to a sequential loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::homology::{chart_point, homology_exponent, Chart, HomologyMap};
use crate::odes::{DirectRun, EquationParams, Fate, Sample, Shooter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// Order-preserving map over independent work items.
pub fn map_cases<T, R, F>(items: Vec<T>, exec: Execution, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.into_par_iter().map(f).collect()
        }
        _ => items.into_iter().map(f).collect(),
    }
}

#[derive(Debug, Clone)]
pub struct InvarianceConfig {
    pub ps: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// Right end of the base solution's sample window `[x_max/10, x_max]`.
    pub x_max: f64,
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for InvarianceConfig {
    fn default() -> Self {
        Self {
            ps: vec![1.2, 1.5, 2.0, 2.5, 3.0],
            lambdas: vec![0.5, 2.0],
            x_max: 1.5,
            points: 64,
            seed: 2024,
            tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceCase {
    pub p: f64,
    pub lambda: f64,
    pub chart: Chart,
    /// Largest relative deviation of either chart coordinate.
    pub max_dev: f64,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// For one `(p, λ)`: integrates the Lane–Emden solution `θ(0) = 1` and,
/// independently, its homologous partner `θ̃(0) = λ^(-q-1)` (the image of
/// `y = xθ` under `x → λx, y → λ^(-q) y`), then compares every supported
/// chart at the sample abscissas `xᵢ` and `λxᵢ`.
pub fn invariance_case(p: f64, lambda: f64, abscissas: &[f64], tol: f64) -> Result<Vec<InvarianceCase>> {
    let q = homology_exponent(p)?;
    let map = HomologyMap::new(lambda, q)?;
    let params = EquationParams::new(p)?;
    let x_end = abscissas.iter().copied().fold(0.0, f64::max);
    let base = DirectRun::lane_emden(params, 1.0, x_end, tol).with_stops(abscissas.to_vec()).run()?;
    let scaled_stops: Vec<f64> = abscissas.iter().map(|x| lambda * x).collect();
    let partner = DirectRun::lane_emden(params, lambda.powf(-q - 1.0), lambda * x_end, tol)
        .with_stops(scaled_stops.clone())
        .run()?;
    let pick = |table: &crate::odes::SolutionTable, xs: &[f64]| -> Vec<Sample> {
        let ef = table.emden_fowler_samples();
        xs.iter().filter_map(|&x| ef.iter().find(|s| s.x == x).copied()).collect()
    };
    let a = pick(&base, abscissas);
    let b = pick(&partner, &scaled_stops);
    debug_assert_eq!(a.len(), b.len());

    let mut out = Vec::new();
    for chart in Chart::ALL.into_iter().filter(|c| c.supports(p)) {
        let mut worst = 0.0f64;
        for (sa, sb) in a.iter().zip(&b) {
            // sanity: the partner sample is the image of the base sample
            debug_assert!(rel(map.apply(*sa).x, sb.x) < 1e-12);
            let (a0, a1) = chart_point(chart, sa, p)?.coords();
            let (b0, b1) = chart_point(chart, sb, p)?.coords();
            worst = worst.max(rel(b0, a0)).max(rel(b1, a1));
        }
        out.push(InvarianceCase { p, lambda, chart, max_dev: worst });
    }
    Ok(out)
}

/// Runs [`invariance_case`] for every `(p, λ)` pair of the configuration.
/// Sample abscissas are drawn once from the seed, so results are
/// reproducible and independent of the execution mode.
pub fn invariance_sweep(cfg: &InvarianceConfig, exec: Execution) -> Result<Vec<InvarianceCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut xs: Vec<f64> = (0..cfg.points).map(|_| rng.gen_range(0.1 * cfg.x_max..cfg.x_max)).collect();
    xs.push(cfg.x_max);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let pairs: Vec<(f64, f64)> = cfg.ps.iter().flat_map(|&p| cfg.lambdas.iter().map(move |&l| (p, l))).collect();
    let results = map_cases(pairs, exec, |(p, l)| invariance_case(p, l, &xs, cfg.tol));
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

/// Classifies each trial slope with the shooter's trajectory test.
pub fn classify_slopes(shooter: &Shooter, slopes: &[f64], exec: Execution) -> Result<Vec<Fate>> {
    map_cases(slopes.to_vec(), exec, |b| shooter.classify(b)).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_and_parallel_agree() {
        let cfg = InvarianceConfig { ps: vec![1.5, 3.0], lambdas: vec![2.0], points: 8, ..Default::default() };
        let a = invariance_sweep(&cfg, Execution::Sequential).unwrap();
        let b = invariance_sweep(&cfg, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4 + 2);
    }

    #[test]
    fn slope_scan_is_monotone() {
        let shooter = Shooter { step_tol: 1e-10, ..Shooter::default() };
        let slopes: Vec<f64> = (0..=10).map(|k| -2.0 + 0.1 * k as f64).collect();
        let fates = classify_slopes(&shooter, &slopes, Execution::Parallel).unwrap();
        let first_div = fates.iter().position(|f| *f == Fate::Divergent).unwrap();
        assert!(fates[..first_div].iter().all(|f| *f == Fate::CrossesZero));
        assert!(fates[first_div..].iter().all(|f| *f == Fate::Divergent));
        assert!(slopes[first_div] > -1.6 && slopes[first_div - 1] < -1.58);
    }
}
