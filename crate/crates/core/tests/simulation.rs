use levy_exit::catalog::{builtin_scenarios, drift_up_jump_down, witnesses};
use levy_exit::estimator::{estimate_with, wilson_interval};
use levy_exit::rng::path_rng;
use levy_exit::sampler::{ExitSimulator, PathTrace};
use levy_exit::{estimate, plan, Execution, ExitQuery, LevyModel, MeasureSpec, Outcome, PlanHints, Scheme};
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};

fn hints(dt: Option<f64>, horizon: f64) -> PlanHints {
    PlanHints {
        dt,
        horizon: Some(horizon),
        ..PlanHints::default()
    }
}

#[test]
fn exit_records_are_well_formed() {
    let mut models: Vec<LevyModel> = witnesses().into_iter().map(|w| w.model).collect();
    models.extend(builtin_scenarios().into_iter().map(|s| s.model));
    let barriers = [0.25, 0.5, 1.0, 1.5, 2.5];
    let horizons = [0.5, 2.0, 16.0];
    let mut total = 0u64;
    for (mi, model) in models.iter().enumerate() {
        for (ai, &a) in barriers.iter().enumerate() {
            for &b in &barriers {
                for &horizon in &horizons {
                    let p = plan(model, a, b, &hints(Some(1e-2), horizon)).unwrap();
                    let n = if p.scheme.is_exact() { 1400 } else { 40 };
                    let sim = ExitSimulator::new(model, &p).unwrap();
                    let mut rng = path_rng(mi as u64, ai as u64 + (horizon as u64) * 16);
                    for _ in 0..n {
                        let r = sim.run(a, b, &mut rng);
                        assert!(r.is_well_formed(a, b, horizon), "{model:?} a={a} b={b}: {r:?}");
                        total += 1;
                    }
                }
            }
        }
    }
    assert!(total >= 1_000_000, "{total}");
}

#[test]
fn jump_counts_are_poisson() {
    let model = LevyModel::finite_variation(0.0, MeasureSpec::atoms(&[(-1.0, 1.5), (1.0, 1.5)]), 0.0).unwrap();
    let (a, b) = (1e6, 1e6);
    let p = plan(&model, a, b, &hints(None, 1.0)).unwrap();
    assert_eq!(p.scheme, Scheme::ExactFiniteActivity);
    let sim = ExitSimulator::new(&model, &p).unwrap();
    let n = 20_000;
    let bins = 9;
    let mut counts = vec![0u64; bins];
    for path in 0..n {
        let mut trace = PathTrace::default();
        let r = sim.run_observed(a, b, &mut path_rng(5, path), &mut trace);
        assert!(matches!(r.outcome, Outcome::Censored { .. }));
        counts[trace.jump_count_until(1.0).min(bins - 1)] += 1;
    }
    let pois = Poisson::new(3.0).unwrap();
    let mut expected: Vec<f64> = (0..bins - 1).map(|k| pois.pmf(k as u64) * n as f64).collect();
    expected.push(n as f64 - expected.iter().sum::<f64>());
    let chi2: f64 = counts
        .iter()
        .zip(&expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let critical = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.999);
    assert!(chi2 < critical, "chi2={chi2} critical={critical} counts={counts:?}");
}

#[test]
fn drift_up_jump_down_exit_probability() {
    // up iff no jump before the drift reaches 1: e^{-1}
    let model = drift_up_jump_down();
    let q = ExitQuery::whole_line(1.0, 1.0);
    let p = plan(&model, 1.0, 1.0, &PlanHints::default()).unwrap();
    let e = estimate(&model, &q, 50_000, &p, 1, 0.05).unwrap();
    let truth = (-1.0f64).exp();
    assert!((e.p_up_hat - truth).abs() < 3.0 * e.ci_half_width_up(), "{}", e.p_up_hat);
    assert!((e.p_down_hat - (1.0 - truth)).abs() < 3.0 * e.ci_half_width_down());
    assert_eq!(e.n_censored, 0);
}

#[test]
fn symmetric_jumps_late_window() {
    // first jump at rate 2 exits; up with probability ½ on [1, 2)
    let model = LevyModel::finite_variation(0.0, MeasureSpec::atoms(&[(-1.0, 1.0), (1.0, 1.0)]), 0.0).unwrap();
    let q = ExitQuery::new(0.5, 0.5, 1.0, 2.0).unwrap();
    let p = plan(&model, 0.5, 0.5, &PlanHints::default()).unwrap();
    let e = estimate(&model, &q, 50_000, &p, 2, 0.05).unwrap();
    let truth = 0.5 * ((-2.0f64).exp() - (-4.0f64).exp());
    assert!((e.p_up_hat - truth).abs() < 3.0 * e.ci_half_width_up(), "{}", e.p_up_hat);
    assert!((e.p_down_hat - truth).abs() < 3.0 * e.ci_half_width_down(), "{}", e.p_down_hat);
}

#[test]
fn wilson_coverage_is_calibrated() {
    let model = drift_up_jump_down();
    let q = ExitQuery::whole_line(1.0, 1.0);
    let p = plan(&model, 1.0, 1.0, &PlanHints::default()).unwrap();
    let truth = (-1.0f64).exp();
    let covered = (0..200)
        .filter(|&k| {
            let e = estimate_with(&model, &q, 1000, &p, 1000 + k, 0.05, Execution::Sequential).unwrap();
            e.ci_up.0 <= truth && truth <= e.ci_up.1
        })
        .count();
    assert!(covered >= 180, "{covered}/200");
    let (lo, hi) = wilson_interval(0, 1000, 0.05);
    assert_eq!(lo, 0.0);
    assert!(hi > 0.0 && hi < 0.004);
}

#[test]
fn brownian_grid_refinement_is_stable() {
    // P(up) = b / (a + b), E[T] = ab for standard Brownian motion
    let model = LevyModel::brownian(1.0);
    let q = ExitQuery::whole_line(0.5, 1.0);
    let mut results = Vec::new();
    for dt in [1e-3, 5e-4] {
        let p = plan(&model, 0.5, 1.0, &hints(Some(dt), 16.0)).unwrap();
        assert_eq!(p.scheme, Scheme::GridDiffusion);
        let e = estimate(&model, &q, 20_000, &p, 3, 0.05).unwrap();
        assert!((e.p_up_hat - 2.0 / 3.0).abs() < 0.02, "dt={dt}: {}", e.p_up_hat);
        assert!((e.mean_exit_time.unwrap() - 0.5).abs() < 0.05);
        results.push(e);
    }
    let diff = (results[0].p_up_hat - results[1].p_up_hat).abs();
    let hw = results[0].ci_half_width_up().hypot(results[1].ci_half_width_up());
    assert!(diff < 2.0 * hw, "diff={diff}");
}

#[test]
fn truncation_refinement_is_stable() {
    let model = builtin_scenarios()
        .into_iter()
        .find(|s| s.name == "tempered-stable")
        .unwrap()
        .model;
    let q = ExitQuery::new(0.5, 0.5, 0.0, 1.0).unwrap();
    let mut results = Vec::new();
    for delta in [0.02, 0.01] {
        let h = PlanHints {
            delta: Some(delta),
            dt: Some(1e-3),
            horizon: Some(1.0),
            ..PlanHints::default()
        };
        let p = plan(&model, 0.5, 0.5, &h).unwrap();
        assert_eq!(p.scheme, Scheme::TruncatedInfiniteActivity);
        results.push(estimate(&model, &q, 10_000, &p, 4, 0.05).unwrap());
    }
    let diff = (results[0].p_up_hat - results[1].p_up_hat).abs();
    let hw = results[0].ci_half_width_up().hypot(results[1].ci_half_width_up());
    assert!(diff < 2.0 * hw, "diff={diff} hw={hw}");
    // symmetric measure and zero centre: both sides equally likely
    let e = &results[1];
    assert!((e.p_up_hat - e.p_down_hat).abs() < 2.0 * e.ci_half_width_up().hypot(e.ci_half_width_down()));
}

#[test]
fn parallel_matches_sequential_on_the_grid() {
    let model = LevyModel::brownian(1.0);
    let q = ExitQuery::new(0.5, 0.5, 0.0, 1.0).unwrap();
    let p = plan(&model, 0.5, 0.5, &hints(Some(1e-3), 1.0)).unwrap();
    let s = estimate_with(&model, &q, 5000, &p, 9, 0.05, Execution::Sequential).unwrap();
    let par = estimate_with(&model, &q, 5000, &p, 9, 0.05, Execution::Parallel).unwrap();
    assert_eq!(s, par);
}
