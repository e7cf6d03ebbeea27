//! Seeded statistical checks of the sampler, the simulator and the estimators.

use jdoi_core::estimator::european_jdoi;
use jdoi_core::jumps::MixedExpJump;
use jdoi_core::sim::{simulate, TimeGrid};
use jdoi_core::{ContractSpec, ExerciseStyle, H32JParams, MarketState};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};

fn reference_start() -> MarketState {
    MarketState::new(0.0, 100.0, 0.01, 0.01)
}

fn mean_and_se(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut n, mut sum, mut sq) = (0.0, 0.0, 0.0);
    for x in xs {
        n += 1.0;
        sum += x;
        sq += x * x;
    }
    let mean = sum / n;
    let var = (sq - n * mean * mean) / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn sampler_passes_kolmogorov_smirnov() {
    let jumps = MixedExpJump::double_exponential(0.3, 100.0, 25.0);
    let sampler = jumps.sampler().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 100_000;
    let mut draws: Vec<f64> = (0..n).map(|_| sampler.sample(&mut rng)).collect();
    draws.sort_by(f64::total_cmp);
    let d = draws
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let f = jumps.cdf(y);
            (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
        })
        .fold(0.0, f64::max);
    // Asymptotic critical value at significance 0.001.
    let critical = 1.9495 / (n as f64).sqrt();
    assert!(d < critical, "KS statistic {d} >= {critical}");
}

#[test]
fn sampler_mean_matches_zeta() {
    let jumps = MixedExpJump::double_exponential(0.3, 100.0, 25.0);
    let sampler = jumps.sampler().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mean, se) = mean_and_se((0..1_000_000).map(|_| sampler.sample(&mut rng).exp_m1()));
    let zeta = jumps.zeta().unwrap();
    assert!((mean - zeta).abs() < 3.0 * se, "{mean} vs {zeta} (se {se})");
}

#[test]
fn jump_counts_are_poisson() {
    let p = H32JParams::reference();
    let grid = TimeGrid::new(0.5, 10).unwrap();
    let n_paths = 100_000;
    let bundle = simulate(&p, &reference_start(), &grid, n_paths, 21).unwrap();
    let law = Poisson::new(p.lambda * grid.maturity).unwrap();
    let top = 7;
    let mut observed = vec![0.0; top + 1];
    for path in 0..n_paths {
        observed[(bundle.jumps_on_path(path) as usize).min(top)] += 1.0;
    }
    let mut chi2 = 0.0;
    for (k, &o) in observed.iter().enumerate() {
        let prob = if k < top { law.pmf(k as u64) } else { 1.0 - law.cdf(top as u64 - 1) };
        let e = prob * n_paths as f64;
        chi2 += (o - e) * (o - e) / e;
    }
    let critical = ChiSquared::new(top as f64).unwrap().inverse_cdf(0.999);
    assert!(chi2 < critical, "chi-square {chi2} >= {critical}");
}

fn discounted_terminal(p: &H32JParams, x0: &MarketState, grid: &TimeGrid, n_paths: usize, seed: u64) -> (f64, f64) {
    let bundle = simulate(p, x0, grid, n_paths, seed).unwrap();
    let growth = (-(p.r - p.delta) * grid.maturity).exp();
    mean_and_se((0..n_paths).map(|path| growth * bundle.spot_path(path)[grid.n_steps]))
}

#[test]
fn discounted_spot_is_a_martingale_without_noise_in_the_variance() {
    let mut p = H32JParams::reference();
    p.sigma1 = 0.0;
    p.sigma2 = 0.0;
    p.lambda = 0.0;
    let (mean, se) = discounted_terminal(&p, &reference_start(), &TimeGrid::new(0.5, 50).unwrap(), 100_000, 31);
    assert!((mean - 100.0).abs() < 3.0 * se, "{mean} (se {se})");
}

#[test]
fn discounted_spot_is_a_martingale_with_compensated_jumps() {
    let p = H32JParams::reference();
    let (mean, se) = discounted_terminal(&p, &reference_start(), &TimeGrid::new(0.5, 20).unwrap(), 1_000_000, 32);
    assert!((mean - 100.0).abs() < 3.0 * se, "{mean} (se {se})");
}

#[test]
fn variance_factors_stay_nonnegative() {
    let mut p = H32JParams::reference();
    // Feller-violating settings make truncation bite.
    p.sigma1 = 0.8;
    p.sigma2 = 40.0;
    let bundle = simulate(&p, &reference_start(), &TimeGrid::new(0.5, 50).unwrap(), 2_000, 33).unwrap();
    assert!(bundle.nu.iter().chain(&bundle.eta).all(|&v| v >= 0.0));
    assert!(bundle.s.iter().all(|&s| s > 0.0 && s.is_finite()));
}

#[cfg(feature = "parallel")]
#[test]
fn thread_count_does_not_change_results() {
    use jdoi_core::estimator::{run, RunOptions};

    let p = H32JParams::reference();
    let grid = TimeGrid::new(0.5, 40).unwrap();
    let contract = ContractSpec::up_and_out_put(ExerciseStyle::American, 100.0, 110.0, 0.5);
    let go = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let bundle = simulate(&p, &reference_start(), &grid, 3_000, 41).unwrap();
            let result = run(&p, &reference_start(), &contract, &grid, 3_000, 41, &RunOptions::default()).unwrap();
            (bundle, result)
        })
    };
    let (b1, r1) = go(1);
    let (b8, r8) = go(8);
    assert_eq!(b1, b8);
    assert_eq!(r1, r8);
}

#[test]
fn european_estimators_agree_and_jdoi_is_tighter() {
    let p = H32JParams::reference();
    let contract = ContractSpec::put(ExerciseStyle::European, 100.0, 0.5);
    let grid = TimeGrid::new(0.5, 50).unwrap();
    let (mc, jdoi) = european_jdoi(&p, &reference_start(), &contract, &grid, 20_000, 51).unwrap();
    let se = ((mc.sample_std.powi(2) + jdoi.sample_std.powi(2)) / mc.n as f64).sqrt();
    assert!((mc.mean - jdoi.mean).abs() < 3.0 * se, "mc {} jdoi {}", mc.mean, jdoi.mean);
    assert!(jdoi.sample_std < mc.sample_std / 5.0);
}
