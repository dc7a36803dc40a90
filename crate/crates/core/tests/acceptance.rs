//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with a
//! nonzero status if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fracvisco_core::assembly::{
    assemble, build_basis, BasisKind, GalerkinBasis, GalerkinSystem, MaterialModel, ProblemSpec,
    SpaceGrid,
};
use fracvisco_core::diagnostics::{
    apriori_check, dissipation_nonneg_check, energy_report, perturb_coefficient,
    trajectory_energy_scale, uniqueness_probe, weak_residual, zero_loads,
};
use fracvisco_core::fracops::identities::{
    constant_rule_check, derivative_by_parts_check, integral_by_parts_check, inverse_check,
    semigroup_check, split_derivative_check,
};
use fracvisco_core::fracops::{rl_derivative_left, FracOrder, TimeGrid, TimeSeries};
use fracvisco_core::fracspace::{
    energy_equivalence_check, energy_equivalence_integral_check, spectral_frac_derivative,
    DEFAULT_PAD,
};
use fracvisco_core::manufactured::ManufacturedSolution;
use fracvisco_core::volterra::{solve, Scheme, SolverConfig, VolterraData};
use fracvisco_core::{volterra, Result};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn order(a: f64) -> FracOrder {
    FracOrder::new(a).unwrap()
}

fn grid(n: usize) -> TimeGrid {
    TimeGrid::new(0.0, 1.0, n).unwrap()
}

/// Smooth bump of half width `w` centred at `c`.
fn bump(c: f64, w: f64) -> impl Fn(f64) -> f64 {
    move |t| {
        let r = (t - c) / w;
        if r.abs() < 1.0 {
            (1.0 - 1.0 / (1.0 - r * r)).exp()
        } else {
            0.0
        }
    }
}

fn series(n: usize, f: impl Fn(f64) -> f64) -> TimeSeries {
    TimeSeries::from_fn(grid(n), f).unwrap()
}

// 1. operator identities

type Residual = Box<dyn Fn(usize) -> Result<f64>>;

fn square(t: f64) -> f64 {
    t * t
}

fn wide_bump(t: f64) -> f64 {
    bump(0.5, 0.4)(t)
}

fn narrow_bump(t: f64) -> f64 {
    bump(0.45, 0.3)(t)
}

fn identity_cases() -> Vec<(String, Residual)> {
    let mut cases: Vec<(String, Residual)> = vec![(
        "semigroup 1 (0.5,0.5)".into(),
        Box::new(|n| semigroup_check(&series(n, |_| 1.0), order(0.5), order(0.5))),
    )];
    for (name, f) in [("t^2", square as fn(f64) -> f64), ("bump", wide_bump)] {
        cases.push((
            format!("semigroup {name} (0.3,0.5)"),
            Box::new(move |n| semigroup_check(&series(n, f), order(0.3), order(0.5))),
        ));
        cases.push((
            format!("inverse {name} a=0.5"),
            Box::new(move |n| inverse_check(&series(n, f), order(0.5))),
        ));
        for a in [0.25, 0.5] {
            cases.push((
                format!("split {name} a={a}"),
                Box::new(move |n| split_derivative_check(&series(n, f), order(a))),
            ));
        }
    }
    for a in [0.25, 0.5, 0.75] {
        cases.push((
            format!("D by parts bumps a={a}"),
            Box::new(move |n| derivative_by_parts_check(&series(n, wide_bump), &series(n, narrow_bump), order(a))),
        ));
        cases.push((
            format!("I by parts 1,t^2 a={a}"),
            Box::new(move |n| integral_by_parts_check(&series(n, |_| 1.0), &series(n, square), order(a))),
        ));
        cases.push((
            format!("I by parts bump,1-t a={a}"),
            Box::new(move |n| integral_by_parts_check(&series(n, wide_bump), &series(n, |t| 1.0 - t), order(a))),
        ));
    }
    cases
}

fn criterion_1() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut weakest = f64::INFINITY;
    let mut failures = Vec::new();
    for (name, case) in identity_cases() {
        let r: Vec<f64> = [256, 512, 1024].iter().map(|&n| case(n)).collect::<Result<_>>()?;
        let rates = [r[0] / r[1], r[1] / r[2]];
        worst = worst.max(r[2]);
        // residuals at round-off cannot shrink further
        let rate = if r[2] < 1e-12 { f64::INFINITY } else { rates[0].min(rates[1]) };
        weakest = weakest.min(rate);
        if r[2] > 1e-3 || rate < 1.8 {
            failures.push(format!("{name}: {:.2e} rates {:.2}/{:.2}", r[2], rates[0], rates[1]));
        }
    }
    Ok(outcome(
        failures.is_empty(),
        format!("max residual {worst:.2e} at n=1024, min rate {weakest:.2} {failures:?}"),
    ))
}

// 2. constant rules

fn criterion_2() -> Result<Outcome> {
    let mut worst = (0.0f64, 0.0f64);
    for a in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let (rl, caputo) = constant_rule_check(grid(1024), order(a))?;
        worst = (worst.0.max(rl), worst.1.max(caputo));
    }
    Ok(outcome(
        worst == (0.0, 0.0),
        format!("RL deviation {:e}, Caputo magnitude {:e}", worst.0, worst.1),
    ))
}

// 3. energy equivalence

fn criterion_3() -> Result<Outcome> {
    let funcs: Vec<(&str, Box<dyn Fn(f64) -> f64>)> = vec![
        ("bump", Box::new(bump(0.5, 0.4))),
        ("sin^2", Box::new(|t: f64| (PI * t).sin().powi(2))),
        ("poly", Box::new(|t: f64| (t * (1.0 - t)).powi(2) * (1.0 + t))),
    ];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (_, f) in &funcs {
        let u = series(4096, f);
        for a in [0.25, 0.5, 0.75] {
            let d = energy_equivalence_check(&u, order(a))?.ratio;
            let i = energy_equivalence_integral_check(&u, order(a))?.ratio;
            for r in [d, i] {
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
    }
    Ok(outcome(
        lo >= 0.999 && hi <= 1.001,
        format!("ratios in [{lo:.6}, {hi:.6}] over 3 functions x 3 orders x 2 forms"),
    ))
}

// 4. Volterra sanity

fn scalar_system(alpha: f64, n: usize, horizon: f64, kvb: (f64, f64), f: impl Fn(f64) -> f64, c: f64, d0: f64) -> GalerkinSystem {
    let tg = TimeGrid::new(0.0, horizon, n).unwrap();
    let one = |v: f64| DMatrix::from_element(1, 1, v);
    let loads = tg.nodes().map(|t| DVector::from_element(1, f(t))).collect();
    GalerkinSystem::from_matrices(
        order(alpha),
        tg,
        one(1.0),
        one(kvb.0),
        one(kvb.1),
        loads,
        DVector::from_element(1, c),
        DVector::from_element(1, d0),
    )
    .unwrap()
}

fn criterion_4() -> Result<Outcome> {
    let cfg = SolverConfig::default();
    // (a) zero data
    let zero = GalerkinSystem::from_matrices(
        order(0.5),
        grid(256),
        DMatrix::identity(3, 3),
        DMatrix::identity(3, 3) * 4.0,
        DMatrix::identity(3, 3),
        zero_loads(grid(256), 3),
        DVector::zeros(3),
        DVector::zeros(3),
    )?;
    let za = solve(&zero, &cfg)?;
    let a_max = za.coeffs.amax().max(za.velocity.amax());
    // (b) classical oscillator
    let osc = scalar_system(0.5, 10_000, 10.0, (1.0, 0.0), |_| 0.0, 1.0, 0.0);
    let h = solve(&osc, &cfg)?;
    let b_err = osc
        .tgrid
        .nodes()
        .enumerate()
        .map(|(j, t)| (h.coeffs[(0, j)] - t.cos()).abs())
        .fold(0.0, f64::max);
    // (c) marching against Picard
    let sys = scalar_system(0.5, 400, 1.0, (2.0, 1.0), |t| t.sin(), 0.5, -0.2);
    let picard = SolverConfig {
        scheme: Scheme::Picard,
        ..cfg
    };
    let c_gap = (&solve(&sys, &cfg)?.coeffs - &solve(&sys, &picard)?.coeffs).amax();
    // (d) inhomogeneity term
    let mut d_err: f64 = 0.0;
    for alpha in [0.25, 0.5, 0.75] {
        let s = scalar_system(alpha, 64, 1.0, (0.0, 1.0), |_| 0.0, 1.0, 0.0);
        let data: VolterraData = volterra::to_volterra_rhs(&s)?;
        let g = fracvisco_core::fracops::gamma(3.0 - alpha)?;
        for (j, t) in s.tgrid.nodes().enumerate() {
            let exact = 1.0 + t.powf(2.0 - alpha) / g;
            d_err = d_err.max((data.inhomogeneity[(0, j)] - exact).abs());
        }
    }
    let passed = a_max == 0.0 && b_err <= 5e-4 && c_gap <= 10.0 * cfg.picard_tol && d_err <= 1e-15;
    Ok(outcome(
        passed,
        format!("(a) {a_max:e} (b) {b_err:.2e} (c) {c_gap:.2e} (d) {d_err:.1e}"),
    ))
}

// 5. dissipation nonnegativity

fn random_trajectory(rng: &mut ChaCha8Rng, m: usize, tg: TimeGrid) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(m, tg.len());
    for k in 0..m {
        let modes: Vec<(f64, f64, f64)> = (0..12)
            .map(|_| {
                (
                    rng.random_range(-1.0..1.0),
                    rng.random_range(0.0..40.0),
                    rng.random_range(0.0..2.0 * PI),
                )
            })
            .collect();
        let offset = rng.random_range(-1.0..1.0);
        for (j, t) in tg.nodes().enumerate() {
            w[(k, j)] = offset + modes.iter().map(|(a, f, p)| a * (f * t + p).sin()).sum::<f64>();
        }
    }
    w
}

fn random_spd(rng: &mut ChaCha8Rng, m: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(m, m) * 0.1
}

fn criterion_5() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_501);
    let tg = grid(1024);
    let mut worst = f64::INFINITY;
    for alpha in [0.25, 0.5, 0.75] {
        for _ in 0..100 {
            let w = random_trajectory(&mut rng, 3, tg);
            let v = random_spd(&mut rng, 3);
            let min = dissipation_nonneg_check(&w, &v, order(alpha), tg)?;
            worst = worst.min(min / trajectory_energy_scale(&w, &v, tg));
        }
    }
    Ok(outcome(
        worst >= -1e-6,
        format!("min accumulated dissipation / energy scale {worst:.3e} over 300 trajectories"),
    ))
}

// 6, 7, 9. manufactured benchmark

const LEVELS: usize = 3;

fn benchmark_spec(alpha: f64) -> (ManufacturedSolution, ProblemSpec) {
    let mat = MaterialModel::uniform(1.0, 1.0, 1.0, 0.5, 0.5);
    let ms = ManufacturedSolution::new(1.0, 1.0, order(alpha), mat);
    let spec = ms.spec().unwrap();
    (ms, spec)
}

/// Level `l`: P1 on `8·2^l` cells, `16·2^l` time steps.
fn benchmark_level(spec: &ProblemSpec, level: usize) -> Result<(GalerkinBasis, GalerkinSystem)> {
    let cells = 8 << level;
    let basis = build_basis(BasisKind::P1, cells - 1, SpaceGrid::new(1.0, cells)?)?;
    let sys = assemble(spec, &basis, grid(16 << level))?;
    Ok((basis, sys))
}

fn min_rate(values: &[f64]) -> f64 {
    values.windows(2).map(|w| w[0].abs() / w[1].abs()).fold(f64::INFINITY, f64::min)
}

fn criterion_6() -> Result<Outcome> {
    let mut weakest = f64::INFINITY;
    let mut last = Vec::new();
    for alpha in [0.25, 0.5, 0.75] {
        let (_, spec) = benchmark_spec(alpha);
        let mut res = Vec::new();
        for level in 0..LEVELS {
            let (_, sys) = benchmark_level(&spec, level)?;
            let h = solve(&sys, &SolverConfig::default())?;
            res.push(energy_report(&h, &sys)?.final_balance_residual());
        }
        weakest = weakest.min(min_rate(&res));
        last.push(res[LEVELS - 1]);
    }
    Ok(outcome(
        weakest >= 1.5,
        format!(
            "min reduction {weakest:.2}x per level, finest residuals {}",
            last.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>().join(" ")
        ),
    ))
}

fn criterion_7() -> Result<Outcome> {
    let mut spread: f64 = 0.0;
    let mut growth: f64 = 0.0;
    for alpha in [0.25, 0.5, 0.75] {
        let (_, spec) = benchmark_spec(alpha);
        let mut ratios = Vec::new();
        for level in 0..LEVELS {
            let (_, sys) = benchmark_level(&spec, level)?;
            let base = apriori_check(&solve(&sys, &SolverConfig::default())?, &sys)?.ratio;
            if level == 0 {
                for scale in [1e-2, 1e-1, 1e1, 1e2] {
                    let mut s = sys.clone();
                    s.c *= scale;
                    s.d0 *= scale;
                    s.loads.iter_mut().for_each(|f| *f *= scale);
                    let r = apriori_check(&solve(&s, &SolverConfig::default())?, &s)?.ratio;
                    spread = spread.max((r / base - 1.0).abs());
                }
            }
            ratios.push(base);
        }
        growth = growth.max(ratios.iter().fold(0.0f64, |a, &r| a.max(r)) / ratios[0]);
    }
    Ok(outcome(
        spread < 1e-10 && growth <= 1.5,
        format!("scale spread {spread:.1e} over 1e-2..1e2, max ratio / level-0 ratio {growth:.4}"),
    ))
}

fn criterion_8() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    for alpha in [0.25, 0.5, 0.75] {
        let spec = ProblemSpec::homogeneous(1.0, 1.0, order(alpha), MaterialModel::uniform(1.0, 1.0, 1.0, 0.5, 0.5));
        for (kind, m, cells) in [(BasisKind::Sine, 2, 16), (BasisKind::Sine, 6, 32), (BasisKind::P1, 7, 8), (BasisKind::P1, 31, 32)] {
            let basis = build_basis(kind, m, SpaceGrid::new(1.0, cells)?)?;
            for n in [16, 64, 256] {
                let sys = assemble(&spec, &basis, grid(n))?;
                for scheme in [Scheme::Marching, Scheme::Picard] {
                    let cfg = SolverConfig {
                        scheme,
                        ..SolverConfig::default()
                    };
                    worst = worst.max(uniqueness_probe(&sys, &cfg)?);
                    runs += 1;
                }
            }
        }
    }
    Ok(outcome(worst <= 1e-12, format!("max mass norm {worst:e} over {runs} runs")))
}

fn criterion_9() -> Result<Outcome> {
    let mut weakest = f64::INFINITY;
    let mut margin = f64::INFINITY;
    for alpha in [0.25, 0.5, 0.75] {
        let (_, spec) = benchmark_spec(alpha);
        let mut res = Vec::new();
        for level in 0..LEVELS {
            let (basis, sys) = benchmark_level(&spec, level)?;
            let h = solve(&sys, &SolverConfig::default())?;
            let m = basis.dim();
            let r = weak_residual(&h, &sys, m)?;
            for k in 0..m {
                let p = weak_residual(&perturb_coefficient(&h, k, 0.1), &sys, m)?;
                margin = margin.min(p / r);
            }
            res.push(r);
        }
        weakest = weakest.min(min_rate(&res));
    }
    Ok(outcome(
        weakest >= 1.5 && margin > 1.0,
        format!("min reduction {weakest:.2}x per level, min perturbed/unperturbed {margin:.1}"),
    ))
}

// 10. quadrature against spectral derivative

fn criterion_10() -> Result<Outcome> {
    let u = series(2048, bump(0.5, 0.4));
    let quad = rl_derivative_left(&u, order(0.5), 0.0)?;
    let spec = spectral_frac_derivative(&u, order(0.5), fracvisco_core::fracops::Side::Left, DEFAULT_PAD)?;
    let gap = quad.max_abs_diff(&spec)?;
    Ok(outcome(gap < 1e-3, format!("max |quadrature - spectral| {gap:.2e}")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>, Option<Duration>); 10] = [
        ("1 operator identities", criterion_1, Some(Duration::from_secs(10))),
        ("2 constant rules", criterion_2, None),
        ("3 energy equivalence", criterion_3, None),
        ("4 Volterra sanity", criterion_4, None),
        ("5 dissipation nonnegativity", criterion_5, Some(Duration::from_secs(30))),
        ("6 energy balance", criterion_6, None),
        ("7 a-priori estimate", criterion_7, None),
        ("8 uniqueness", criterion_8, None),
        ("9 weak residual", criterion_9, None),
        ("10 cross-path agreement", criterion_10, None),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(o) => {
                let in_time = budget.is_none_or(|b| elapsed <= b);
                let note = if in_time { String::new() } else { " (over time budget)".into() };
                (o.passed && in_time, format!("{}{note}", o.detail))
            }
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failed += 1;
        }
        let tag = if passed { "PASS" } else { "FAIL" };
        println!("criterion {name}: {tag} [{:.2}s] {detail}", elapsed.as_secs_f64());
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
