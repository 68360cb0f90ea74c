use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use levy_exit::catalog::drift_up_jump_down;
use levy_exit::estimator::estimate_with;
use levy_exit::{plan, Execution, ExitQuery, LevyModel, PlanHints};

fn campaign(c: &mut Criterion) {
    let cases = [
        ("exact", drift_up_jump_down(), ExitQuery::whole_line(1.0, 1.0)),
        ("grid", LevyModel::brownian(1.0), ExitQuery::new(0.5, 0.5, 0.0, 1.0).unwrap()),
    ];
    let mut group = c.benchmark_group("campaign");
    group.sample_size(10);
    for (name, model, query) in &cases {
        let hints = PlanHints {
            horizon: Some(4.0),
            dt: Some(1e-3),
            ..PlanHints::default()
        };
        let p = plan(model, query.a, query.b, &hints).unwrap();
        for (label, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_with_input(BenchmarkId::new(label, name), &p, |bench, p| {
                bench.iter(|| estimate_with(model, query, 20_000, p, 7, 0.05, execution).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, campaign);
criterion_main!(benches);
