//! Acceptance criteria, one line of output per criterion. Exits non-zero if
//! any criterion fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tscv::calculus::{
    delta_derivative, delta_integral, delta_integral_full, dubois_reymond_witness, sigma_shift,
    GridFunction,
};
use tscv::pareto::{dominance_filter, nc_crosscheck, weighted_sweep, SweepOptions};
use tscv::problem::{Functional, VariationalProblem};
use tscv::solver::{
    brute_force_oracle, random_directions, solve_scalar, BruteForceOptions, Lattice,
    ScalarObjective, SolverOptions,
};
use tscv::timescale::{GridTimeScale, TimeScale};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn three_point() -> VariationalProblem<f64> {
    VariationalProblem::builder(TimeScale::<f64>::parse("0;1;2").unwrap(), 1)
        .objective("y1^2")
        .objective("(y1-2)^2")
        .boundary(vec![0.0], vec![0.0])
        .build()
        .unwrap()
}

// 1. weighted sweep with k = 20 on {0,1,2}
fn sweep_reproduction() -> Outcome {
    let start = Instant::now();
    let p = three_point();
    let front = weighted_sweep(&p, 20, &SweepOptions::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let converged = front.entries.iter().filter(|e| e.result.converged()).count();
    let mut arg_err = 0.0f64;
    let mut obj_err = 0.0f64;
    for e in &front.entries {
        let a = e.y().at(1)[0];
        arg_err = arg_err.max((a - 2.0 * (1.0 - e.weights[0])).abs());
        obj_err = obj_err
            .max((e.objectives[0] - a * a).abs())
            .max((e.objectives[1] - (4.0 + (a - 2.0) * (a - 2.0))).abs());
    }
    let points: Vec<Vec<f64>> = front.entries.iter().map(|e| e.objectives.clone()).collect();
    let nondominated = dominance_filter(&points, 1e-9).len() == points.len();
    let pass = front.entries.len() == 19
        && converged == 19
        && arg_err <= 1e-6
        && obj_err <= 1e-9
        && nondominated
        && secs < 1.0;
    outcome(
        pass,
        format!(
            "{} entries ({converged} converged), max |y(1) - 2(1-g1)| = {arg_err:.2e}, \
             max objective error = {obj_err:.2e}, non-dominated = {nondominated}, {secs:.3} s",
            front.entries.len()
        ),
    )
}

// 2. constrained-scalar cross-check of every sweep entry and of a = 3
fn necessity_crosscheck() -> Outcome {
    let start = Instant::now();
    let p = three_point();
    let opts = SolverOptions::default();
    let front = weighted_sweep(&p, 20, &SweepOptions::default()).unwrap();
    let mut worst = f64::NEG_INFINITY;
    let mut inconclusive = 0;
    for e in &front.entries {
        for i in 0..2 {
            match nc_crosscheck(&p, e.y(), i, &opts).unwrap().improvement {
                Some(d) => worst = worst.max(d),
                None => inconclusive += 1,
            }
        }
    }
    let planted = nc_crosscheck(&p, &p.assemble(&[3.0]).unwrap(), 0, &opts).unwrap();
    let refuted = planted.improvement.unwrap_or(f64::NAN);
    let secs = start.elapsed().as_secs_f64();
    let pass = !front.entries.is_empty()
        && inconclusive == 0
        && worst <= 1e-6
        && refuted >= 7.9
        && secs < 5.0;
    outcome(
        pass,
        format!(
            "max improvement over {} checks = {worst:.2e} ({inconclusive} inconclusive), \
             a = 3 improvement = {refuted:.6}, {secs:.3} s",
            2 * front.entries.len()
        ),
    )
}

fn energy_problem(resolution: f64) -> VariationalProblem<f64> {
    VariationalProblem::builder(TimeScale::<f64>::interval(0.0, 1.0).unwrap(), 1)
        .resolution(resolution)
        .objective("v1^2")
        .boundary(vec![0.0], vec![1.0])
        .build()
        .unwrap()
}

fn energy_error(resolution: f64) -> (f64, f64, bool) {
    let p = energy_problem(resolution);
    let obj = ScalarObjective::single(&p, 0).unwrap();
    let r = solve_scalar(&p, &obj, None, &SolverOptions::default()).unwrap();
    let err = p
        .grid()
        .points()
        .iter()
        .enumerate()
        .map(|(i, &t)| (r.y.at(i)[0] - t).abs())
        .fold(0.0, f64::max);
    (err, r.objective, r.converged())
}

// 3. continuous limit of the energy functional
fn continuous_limit() -> Outcome {
    let start = Instant::now();
    let (err, objective, converged) = energy_error(1e-3);
    let secs = start.elapsed().as_secs_f64();
    let pass = converged && err <= 1e-3 && (objective - 1.0).abs() <= 2e-3 && secs < 10.0;
    outcome(
        pass,
        format!(
            "max |y - t| = {err:.2e}, objective = {objective:.9}, converged = {converged}, {secs:.3} s"
        ),
    )
}

// 4. isoperimetric problem with a multiplier
fn multiplier_recovery() -> Outcome {
    let start = Instant::now();
    let p = VariationalProblem::builder(TimeScale::<f64>::interval(0.0, 1.0).unwrap(), 1)
        .resolution(1e-3)
        .objective("v1^2")
        .constraint("y1", 1.0 / 6.0)
        .boundary(vec![0.0], vec![0.0])
        .build()
        .unwrap();
    let obj = ScalarObjective::single(&p, 0).unwrap();
    let r = solve_scalar(&p, &obj, None, &SolverOptions::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let err = p
        .grid()
        .points()
        .iter()
        .enumerate()
        .map(|(i, &t)| (r.y.at(i)[0] - t * (1.0 - t)).abs())
        .fold(0.0, f64::max);
    let lambda = r.multipliers[0];
    let solution_ok = err <= 5e-3;
    let objective_ok = (r.objective - 1.0 / 3.0).abs() <= 5e-3;
    let lambda_ok = (lambda - (-4.0)).abs() <= 5e-2;
    let pass = r.converged() && solution_ok && objective_ok && lambda_ok && secs < 30.0;
    outcome(
        pass,
        format!(
            "status {}, max |y - t(1-t)| = {err:.2e} ({}), objective = {:.6} ({}), \
             lambda = {lambda:.6} vs -4 ({}), {secs:.3} s",
            r.status,
            verdict(solution_ok),
            r.objective,
            verdict(objective_ok),
            verdict(lambda_ok),
        ),
    )
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "out of tolerance"
    }
}

fn random_grid(rng: &mut ChaCha8Rng, min_len: usize, max_len: usize) -> Arc<GridTimeScale<f64>> {
    let len = rng.gen_range(min_len..=max_len);
    let mut t = rng.gen_range(-1.0..1.0);
    let points = (0..len)
        .map(|_| {
            let p = t;
            // mix of fine and coarse steps
            t += if rng.gen_bool(0.5) {
                rng.gen_range(1e-3..1e-2)
            } else {
                rng.gen_range(0.1..1.0)
            };
            p
        })
        .collect();
    Arc::new(GridTimeScale::new(points).unwrap())
}

fn random_function(rng: &mut ChaCha8Rng, grid: &Arc<GridTimeScale<f64>>) -> GridFunction<f64> {
    let values = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    GridFunction::scalar(grid.clone(), values).unwrap()
}

/// Function given on the `k`-truncated grid, padded with one zero to live on
/// the full grid; the pad has no weight in integrals over `[a, b)`.
fn pad(f: &GridFunction<f64>, grid: &Arc<GridTimeScale<f64>>) -> GridFunction<f64> {
    let mut values = f.values().to_vec();
    values.push(0.0);
    GridFunction::scalar(grid.clone(), values).unwrap()
}

// 5. calculus identities
fn calculus_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trials = 100;
    let (mut product, mut parts1, mut parts2, mut ftc, mut dr_forward) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..trials {
        let grid = random_grid(&mut rng, 3, 60);
        let f = random_function(&mut rng, &grid);
        let g = random_function(&mut rng, &grid);
        let last = grid.len() - 1;
        let (fa, fb) = (f.at(0)[0], f.at(last)[0]);
        let (ga, gb) = (g.at(0)[0], g.at(last)[0]);

        let fd = delta_derivative(&f).unwrap();
        let gd = delta_derivative(&g).unwrap();
        let fs = sigma_shift(&f).unwrap();
        let gs = sigma_shift(&g).unwrap();
        let fk = f.truncate_k().unwrap();
        let gk = g.truncate_k().unwrap();

        // (fg)^Δ = f^Δ g^σ + f g^Δ
        let lhs = delta_derivative(&f.mul(&g).unwrap()).unwrap();
        let rhs = fd.mul(&gs).unwrap().axpy(1.0, &fk.mul(&gd).unwrap()).unwrap();
        for (a, b) in lhs.values().iter().zip(rhs.values()) {
            product = product.max((a - b).abs());
        }

        let boundary = fb * gb - fa * ga;
        let int = |h: GridFunction<f64>| delta_integral_full(&pad(&h, &grid))[0];
        // ∫ f^σ g^Δ = [fg] - ∫ f^Δ g
        let e1 = int(fs.mul(&gd).unwrap()) - (boundary - int(fd.mul(&gk).unwrap()));
        // ∫ f g^Δ = [fg] - ∫ f^Δ g^σ
        let e2 = int(fk.mul(&gd).unwrap()) - (boundary - int(fd.mul(&gs).unwrap()));
        parts1 = parts1.max(e1.abs());
        parts2 = parts2.max(e2.abs());

        // ∫_c^d f^Δ = f(d) - f(c)
        let c = rng.gen_range(0..last);
        let d = rng.gen_range(c..=last);
        let e3 = delta_integral(&pad(&fd, &grid), c, d).unwrap()[0] - (f.at(d)[0] - f.at(c)[0]);
        ftc = ftc.max(e3.abs());

        // constant g annihilates every endpoint-vanishing η^Δ
        let constant = rng.gen_range(-2.0..2.0);
        let mut eta = random_function(&mut rng, &grid).into_values();
        eta[0] = 0.0;
        eta[last] = 0.0;
        let eta = GridFunction::scalar(grid.clone(), eta).unwrap();
        let ed = delta_derivative(&eta).unwrap();
        let gc = GridFunction::scalar(grid.clone(), vec![constant; grid.len()]).unwrap();
        let e4 = int(gc.truncate_k().unwrap().mul(&ed).unwrap());
        dr_forward = dr_forward.max(e4.abs());
    }

    // converse: a witness for every non-constant g on discrete grids
    let mut witnesses = 0;
    for _ in 0..trials {
        let len = rng.gen_range(3..30);
        let mut t = 0.0;
        let points: Vec<f64> = (0..len)
            .map(|_| {
                t += rng.gen_range(0.1..2.0);
                t
            })
            .collect();
        let grid = Arc::new(GridTimeScale::new(points).unwrap());
        let g = random_function(&mut rng, &grid);
        let last = grid.len() - 1;
        if let Some(eta) = dubois_reymond_witness(&g).unwrap() {
            let ed = delta_derivative(&eta).unwrap();
            let value = delta_integral_full(&pad(&ed.mul(&g.truncate_k().unwrap()).unwrap(), &grid))[0];
            if eta.at(0)[0] == 0.0 && eta.at(last)[0] == 0.0 && value.abs() > 1e-10 {
                witnesses += 1;
            }
        }
    }

    let worst = product.max(parts1).max(parts2).max(ftc).max(dr_forward);
    let pass = worst <= 1e-10 && witnesses == trials;
    outcome(
        pass,
        format!(
            "{trials} functions per identity: product {product:.1e}, parts(σ) {parts1:.1e}, \
             parts {parts2:.1e}, fundamental {ftc:.1e}, constant {dr_forward:.1e}; \
             witnesses {witnesses}/{trials}"
        ),
    )
}

const POOL: [&str; 8] = [
    "sin(t*Y)",
    "Y*V",
    "V^2",
    "exp(0.3*Y)*cos(V)",
    "sqrt(1+V^2)",
    "log(2+sin(Y))*V",
    "t^2*Y^2",
    "Y^3/(1+V^2)",
];

fn random_integrand(rng: &mut ChaCha8Rng, n: usize) -> String {
    let terms = rng.gen_range(1..=3);
    (0..terms)
        .map(|_| {
            let c = rng.gen_range(-2.0..2.0);
            let t = POOL[rng.gen_range(0..POOL.len())]
                .replace('Y', &format!("y{}", rng.gen_range(1..=n)))
                .replace('V', &format!("v{}", rng.gen_range(1..=n)));
            format!("{c}*{t}")
        })
        .collect::<Vec<_>>()
        .join("+")
}

fn random_smooth(rng: &mut ChaCha8Rng, grid: &Arc<GridTimeScale<f64>>, n: usize) -> GridFunction<f64> {
    let coeffs: Vec<[f64; 4]> = (0..n)
        .map(|_| {
            [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.5..3.0),
                rng.gen_range(0.0..3.0),
            ]
        })
        .collect();
    GridFunction::from_fn(grid.clone(), n, |t| {
        coeffs.iter().map(|c| c[0] + c[1] * (c[2] * t + c[3]).sin()).collect()
    })
    .unwrap()
}

// 6. gradients and Gâteaux derivatives against central differences
fn gradient_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let instances = 50;
    let h = 1e-6;
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..instances {
        let n = rng.gen_range(1..=2);
        let a = rng.gen_range(0.2..1.0);
        let p1 = a + rng.gen_range(0.1..0.5);
        let c = p1 + rng.gen_range(0.1..0.5);
        let d = c + rng.gen_range(0.2..1.0);
        let literal = format!("[0,{a}];{p1};[{c},{d}]");
        let mut b = VariationalProblem::builder(TimeScale::<f64>::parse(&literal).unwrap(), n)
            .resolution(rng.gen_range(0.05..0.2))
            .objective(&random_integrand(&mut rng, n))
            .boundary(vec![0.1; n], vec![-0.2; n]);
        b = b.constraint(&random_integrand(&mut rng, n), 0.0);
        let p = b.build().unwrap();
        let y = random_smooth(&mut rng, p.grid(), n);
        let eta = &random_directions(&p, 1, rng.gen())[0];

        for f in [Functional::Objective(0), Functional::Constraint(0)] {
            let integrand = p.integrand(f).unwrap();
            let value = |z: &GridFunction<f64>| integrand.integrate(z).unwrap();

            let g = p.gateaux(f, &y, eta).unwrap();
            let fd = (value(&y.axpy(h, eta).unwrap()) - value(&y.axpy(-h, eta).unwrap())) / (2.0 * h);
            let scaled = (g - fd).abs() / (1.0 + g.abs());
            worst = worst.max(scaled);
            failures += (scaled > 1e-5) as usize;

            let mut grad = vec![0.0; y.values().len()];
            integrand.accumulate_gradient(&y, 1.0, &mut grad).unwrap();
            for (j, &gj) in grad.iter().enumerate() {
                let bump = |s: f64| {
                    let mut v = y.values().to_vec();
                    v[j] += s;
                    value(&GridFunction::new(p.grid().clone(), n, v).unwrap())
                };
                let fd = (bump(h) - bump(-h)) / (2.0 * h);
                let scaled = (gj - fd).abs() / (1.0 + gj.abs());
                worst = worst.max(scaled);
                failures += (scaled > 1e-5) as usize;
            }
        }
    }
    outcome(
        failures == 0,
        format!("{instances} instances, worst scaled deviation {worst:.2e}, {failures} above 1e-5"),
    )
}

// 7. solver against exhaustive lattice search
fn brute_force_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let step = 1e-3;
    let lattice = Lattice::new(-1.5, 1.5, step).unwrap();
    let instances = 20;
    let (mut obj_gap, mut arg_gap) = (0.0f64, 0.0f64);
    let mut failures = 0;
    for k in 0..instances {
        // cycle through 1 unknown, 2 samples of 1 component, 1 sample of 2
        let (points, n) = match k % 3 {
            0 => (3, 1),
            1 => (4, 1),
            _ => (3, 2),
        };
        let mut t = 0.0;
        let literal = (0..points)
            .map(|i| {
                if i > 0 {
                    t += rng.gen_range(0.75..1.25);
                }
                format!("{t}")
            })
            .collect::<Vec<_>>()
            .join(";");
        let mut terms = Vec::new();
        for c in 1..=n {
            terms.push(format!(
                "{}*(y{c}-({}))^2+{}*v{c}^2+{}*y{c}^4",
                rng.gen_range(0.5..1.5),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.1..0.5),
                rng.gen_range(0.0..0.3),
            ));
        }
        if n == 2 {
            terms.push(format!("{}*y1*y2", rng.gen_range(-0.2..0.2)));
        }
        let alpha = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let beta = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let p = VariationalProblem::builder(TimeScale::<f64>::parse(&literal).unwrap(), n)
            .objective(&terms.join("+"))
            .boundary(alpha, beta)
            .build()
            .unwrap();
        let obj = ScalarObjective::single(&p, 0).unwrap();
        let r = solve_scalar(&p, &obj, None, &SolverOptions::default()).unwrap();
        let brute = brute_force_oracle(&p, &obj, &BruteForceOptions::new(lattice)).unwrap();
        let og = (r.objective - brute.objective).abs();
        let ag = r
            .y
            .values()
            .iter()
            .zip(brute.y.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        obj_gap = obj_gap.max(og);
        arg_gap = arg_gap.max(ag);
        failures += (!r.converged() || og > 1e-5 || ag > step) as usize;
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures == 0,
        format!(
            "{instances} instances, max objective gap {obj_gap:.2e}, max argument gap {arg_gap:.2e}, \
             {failures} failing, {secs:.1} s"
        ),
    )
}

// 8. error reduction when the resolution of criterion 3 is halved
fn convergence_order() -> Outcome {
    let (coarse, _, c1) = energy_error(1e-3);
    let (fine, _, c2) = energy_error(5e-4);
    let ratio = coarse / fine;
    outcome(
        c1 && c2 && ratio >= 1.7,
        format!("error {coarse:.3e} at 1e-3, {fine:.3e} at 5e-4, ratio {ratio:.3}"),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("weighted sweep on {0,1,2}", sweep_reproduction),
        ("constrained-scalar cross-check", necessity_crosscheck),
        ("continuous limit", continuous_limit),
        ("isoperimetric multiplier", multiplier_recovery),
        ("calculus identities", calculus_identities),
        ("gradient and Gateaux derivatives", gradient_correctness),
        ("lattice search equivalence", brute_force_equivalence),
        ("convergence order", convergence_order),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += (!o.pass) as usize;
        println!(
            "criterion {} ({name}): {} | {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
