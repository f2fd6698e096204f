use tscv::io::{parse_problem_file, read_solution, write_solution};
use tscv::pareto::{weighted_sweep, SweepOptions};
use tscv::problem::{Functional, VariationalProblem};
use tscv::solver::{
    el_residual, random_directions, recover_multipliers, regularity_probe, solve_scalar,
    ScalarObjective, SolverOptions,
};
use tscv::timescale::TimeScale;

fn three_point() -> VariationalProblem<f64> {
    VariationalProblem::builder(TimeScale::<f64>::parse("0;1;2").unwrap(), 1)
        .objective("y1^2")
        .objective("(y1-2)^2")
        .boundary(vec![0.0], vec![0.0])
        .build()
        .unwrap()
}

#[test]
fn sweep_entries_minimize_their_own_weighted_sum() {
    let p = three_point();
    let front = weighted_sweep(&p, 20, &SweepOptions::default()).unwrap();
    for e in &front.entries {
        let own: f64 = e.weights.iter().zip(&e.objectives).map(|(g, l)| g * l).sum();
        for other in &front.entries {
            let theirs: f64 = e.weights.iter().zip(&other.objectives).map(|(g, l)| g * l).sum();
            assert!(own <= theirs + 1e-6);
        }
    }
}

#[test]
fn trade_off_is_monotone_in_the_first_weight() {
    let p = three_point();
    let mut entries = weighted_sweep(&p, 20, &SweepOptions::default()).unwrap().entries;
    entries.sort_by(|a, b| a.weights[0].partial_cmp(&b.weights[0]).unwrap());
    for w in entries.windows(2) {
        assert!(w[1].objectives[0] <= w[0].objectives[0] + 1e-9);
        assert!(w[1].objectives[1] >= w[0].objectives[1] - 1e-9);
    }
}

#[test]
fn mixed_scale_with_two_components() {
    // components decouple: y1 minimizes the energy, y2 tracks sin(t) on the
    // isolated points as well
    let ts = TimeScale::<f64>::parse("[0,1];1.5;2").unwrap();
    let p = VariationalProblem::builder(ts, 2)
        .resolution(0.02)
        .objective("v1^2 + (y2 - sin(t))^2 + 0.1*v2^2")
        .boundary(vec![0.0, 0.0], vec![2.0, 0.5])
        .build()
        .unwrap();
    let obj = ScalarObjective::single(&p, 0).unwrap();
    let r = solve_scalar(&p, &obj, None, &SolverOptions::default()).unwrap();
    assert!(r.converged(), "{}", r.status);
    let grid = p.grid();
    for i in 0..grid.len() {
        assert!((r.y.at(i)[0] - grid.point(i)).abs() <= 1e-6);
    }
    let el = el_residual(&p, &obj, &r).unwrap();
    assert!(el.max_residual <= 10.0 * 1e-8 / grid.min_mu());
    assert!(el.dr_spread <= 10.0 * 1e-8 * (grid.end() - grid.start()));
}

#[test]
fn constrained_solution_satisfies_first_order_conditions() {
    let p = VariationalProblem::builder(TimeScale::<f64>::interval(0.0, 1.0).unwrap(), 1)
        .resolution(0.02)
        .objective("v1^2 + t*y1")
        .constraint("y1^2", 0.05)
        .boundary(vec![0.0], vec![0.0])
        .build()
        .unwrap();
    let obj = ScalarObjective::single(&p, 0).unwrap();
    let opts = SolverOptions::default();
    let r = solve_scalar(&p, &obj, None, &opts).unwrap();
    assert!(r.converged(), "{}", r.status);
    assert!(r.max_violation() <= opts.constraint_tol);

    let el = el_residual(&p, &obj, &r).unwrap();
    assert!(el.dr_spread <= 10.0 * opts.grad_tol);

    let lambda = r.multipliers[0];
    for eta in random_directions(&p, 10, 11) {
        let dl = p.gateaux(Functional::Objective(0), &r.y, &eta).unwrap();
        let dg = p.gateaux(Functional::Constraint(0), &r.y, &eta).unwrap();
        assert!((dl - lambda * dg).abs() <= 1e-5);
    }
    let det = regularity_probe(&p, &r.y, &random_directions(&p, 1, 3)).unwrap();
    assert!(det.abs() > opts.det_tol);
    let recovered = recover_multipliers(&p, &obj, &r.y).unwrap().unwrap();
    assert!((recovered[0] - lambda).abs() <= 1e-5);
}

#[test]
fn single_precision_pipeline() {
    let p = VariationalProblem::builder(TimeScale::<f32>::parse("0;1;2").unwrap(), 1)
        .objective("y1^2")
        .objective("(y1-2)^2")
        .boundary(vec![0.0], vec![0.0])
        .build()
        .unwrap();
    let opts = SolverOptions::<f32> {
        grad_tol: 1e-4,
        constraint_tol: 1e-4,
        ..SolverOptions::default()
    };
    let obj = ScalarObjective::weighted(&p, &[0.25, 0.75]).unwrap();
    let r = solve_scalar(&p, &obj, None, &opts).unwrap();
    assert!(r.converged());
    assert!((r.y.at(1)[0] - 1.5).abs() <= 1e-3);
    let front = weighted_sweep(
        &p,
        4,
        &SweepOptions {
            solver: opts,
            ..SweepOptions::default()
        },
    )
    .unwrap();
    assert_eq!(front.entries.len(), 3);
}

#[test]
fn problem_file_solution_round_trip() {
    let text = "\
[timescale]
set = [0,1]
resolution = 0.05
[dimension]
n = 1
[objectives]
v1^2
[boundary]
alpha = 0
beta = 1
";
    let file = parse_problem_file::<f64>(text).unwrap();
    let p = file.build().unwrap();
    let obj = ScalarObjective::single(&p, 0).unwrap();
    let init = tscv::calculus::GridFunction::from_fn(p.grid().clone(), 1, |t| vec![t * t]).unwrap();
    let r = solve_scalar(&p, &obj, Some(&init), &file.solver).unwrap();
    let back = read_solution(&write_solution(&r.y), &p).unwrap();
    assert_eq!(back.values(), r.y.values());
    let value = p.evaluate(&back).unwrap().objectives[0];
    assert!((value - r.objective).abs() <= 1e-10);
}

#[test]
fn solves_are_deterministic() {
    let p = VariationalProblem::builder(TimeScale::<f64>::parse("[0,1];2").unwrap(), 1)
        .resolution(0.05)
        .objective("v1^2 + cos(3*y1)")
        .boundary(vec![0.0], vec![1.0])
        .build()
        .unwrap();
    let obj = ScalarObjective::single(&p, 0).unwrap();
    let opts = SolverOptions {
        multistart: 4,
        seed: 9,
        ..SolverOptions::default()
    };
    let a = solve_scalar(&p, &obj, None, &opts).unwrap();
    let b = solve_scalar(&p, &obj, None, &opts).unwrap();
    assert_eq!(a.y.values(), b.y.values());
    assert_eq!(a.start, b.start);
}

#[test]
fn quickstart_flow() -> tscv::Result<()> {
    use tscv::VariationalProblem;

    let p = VariationalProblem::builder(TimeScale::parse("0;1;2")?, 1)
        .objective("y1^2")
        .objective("(y1-2)^2")
        .boundary(vec![0.0], vec![0.0])
        .build()?;

    let obj = ScalarObjective::weighted(&p, &[0.5, 0.5])?;
    let r = solve_scalar(&p, &obj, None, &SolverOptions::default())?;
    assert!((r.y.at(1)[0] - 1.0).abs() < 1e-6);
    let residuals = el_residual(&p, &obj, &r)?;
    assert!(residuals.max_residual < 1e-6);

    let front = weighted_sweep(&p, 20, &SweepOptions::default())?;
    assert_eq!(front.entries.len(), 19);
    Ok(())
}
