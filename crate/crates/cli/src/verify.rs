//! `fracvisco verify`: identity and invariant suites at fixed resolutions.
//!
//! | suite     | checks                                                         | n_steps   |
//! |-----------|----------------------------------------------------------------|-----------|
//! | operators | semigroup, inverse, split derivative, both by-parts rules, constant rules | 1024 |
//! | spectral  | energy equivalence (derivative and integral forms), quadrature vs spectral | 4096 / 2048 |
//! | energy    | dissipation sign, energy balance rate, a-priori scale invariance, uniqueness, weak residual rate | benchmark levels |

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use fracvisco_core::assembly::{
    assemble, build_basis, BasisKind, GalerkinSystem, MaterialModel, ProblemSpec, SpaceGrid,
};
use fracvisco_core::diagnostics::{
    apriori_check, dissipation_nonneg_check, energy_report, trajectory_energy_scale,
    uniqueness_probe, weak_residual,
};
use fracvisco_core::export::fmt_f64;
use fracvisco_core::fracops::identities::{
    constant_rule_check, derivative_by_parts_check, integral_by_parts_check, inverse_check,
    semigroup_check, split_derivative_check,
};
use fracvisco_core::fracops::{rl_derivative_left, FracOrder, Side, TimeGrid, TimeSeries};
use fracvisco_core::fracspace::{
    energy_equivalence_check, energy_equivalence_integral_check, spectral_frac_derivative,
    DEFAULT_PAD,
};
use fracvisco_core::manufactured::ManufacturedSolution;
use fracvisco_core::volterra::{solve, SolverConfig};
use fracvisco_core::Result;

use crate::output::csv_table;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Operators,
    Spectral,
    Energy,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    AtLeast,
}

/// One line of the verification report.
#[derive(Clone, Debug)]
pub struct Row {
    pub suite: &'static str,
    pub check: String,
    pub case: String,
    pub alpha: f64,
    pub n_steps: usize,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
}

impl Row {
    pub fn passed(&self) -> bool {
        match self.relation {
            Relation::AtMost => self.value <= self.threshold,
            Relation::AtLeast => self.value >= self.threshold,
        }
    }
}

pub const HEADER: [&str; 11] = [
    "suite", "check", "case", "alpha", "n_steps", "lhs", "rhs", "value", "relation", "threshold", "passed",
];

pub fn table(rows: &[Row]) -> Vec<u8> {
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.suite.to_string(),
                r.check.clone(),
                r.case.clone(),
                fmt_f64(r.alpha),
                r.n_steps.to_string(),
                opt(r.lhs),
                opt(r.rhs),
                fmt_f64(r.value),
                match r.relation {
                    Relation::AtMost => "<=".into(),
                    Relation::AtLeast => ">=".into(),
                },
                fmt_f64(r.threshold),
                r.passed().to_string(),
            ]
        })
        .collect();
    csv_table(&HEADER, &body)
}

type Case = Box<dyn Fn() -> Result<Vec<Row>> + Send + Sync>;

/// Runs the selected suites; rows come back in manifest order.
pub fn run(suite: Suite, seed: u64) -> Result<Vec<Row>> {
    let mut cases: Vec<Case> = Vec::new();
    if matches!(suite, Suite::Operators | Suite::All) {
        cases.extend(operator_cases());
    }
    if matches!(suite, Suite::Spectral | Suite::All) {
        cases.extend(spectral_cases());
    }
    if matches!(suite, Suite::Energy | Suite::All) {
        cases.extend(energy_cases(seed));
    }
    let results: Vec<Result<Vec<Row>>> = cases.par_iter().map(|c| c()).collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

fn order(a: f64) -> FracOrder {
    FracOrder::new(a).expect("suite orders are valid")
}

fn unit_grid(n: usize) -> TimeGrid {
    TimeGrid::new(0.0, 1.0, n).expect("suite grids are valid")
}

fn sample(n: usize, f: fn(f64) -> f64) -> Result<TimeSeries> {
    TimeSeries::from_fn(unit_grid(n), f)
}

fn bump(t: f64) -> f64 {
    let r = (t - 0.5) / 0.4;
    if r.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

fn narrow_bump(t: f64) -> f64 {
    let r = (t - 0.45) / 0.3;
    if r.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

fn one(_: f64) -> f64 {
    1.0
}

fn square(t: f64) -> f64 {
    t * t
}

fn falling(t: f64) -> f64 {
    1.0 - t
}

fn sin_squared(t: f64) -> f64 {
    (PI * t).sin().powi(2)
}

fn poly_bump(t: f64) -> f64 {
    (t * (1.0 - t)).powi(2) * (1.0 + t)
}

const OPERATOR_N: usize = 1024;
const IDENTITY_TOL: f64 = 1e-3;

fn residual_row(check: &str, case: &str, alpha: f64, value: f64, threshold: f64) -> Row {
    Row {
        suite: "operators",
        check: check.into(),
        case: case.into(),
        alpha,
        n_steps: OPERATOR_N,
        lhs: None,
        rhs: None,
        value,
        relation: Relation::AtMost,
        threshold,
    }
}

fn operator_cases() -> Vec<Case> {
    let n = OPERATOR_N;
    let mut cases: Vec<Case> = vec![Box::new(move || {
        let r = semigroup_check(&sample(n, one)?, order(0.5), order(0.5))?;
        Ok(vec![residual_row("semigroup", "1 (0.5+0.5)", 0.5, r, IDENTITY_TOL)])
    })];
    for (name, f) in [("t^2", square as fn(f64) -> f64), ("bump", bump)] {
        cases.push(Box::new(move || {
            let u = sample(n, f)?;
            let mut rows = vec![
                residual_row("semigroup", &format!("{name} (0.3+0.5)"), 0.3, semigroup_check(&u, order(0.3), order(0.5))?, IDENTITY_TOL),
                residual_row("inverse", name, 0.5, inverse_check(&u, order(0.5))?, IDENTITY_TOL),
            ];
            for a in [0.25, 0.5] {
                rows.push(residual_row("split_derivative", name, a, split_derivative_check(&u, order(a))?, IDENTITY_TOL));
            }
            Ok(rows)
        }));
    }
    for a in [0.25, 0.5, 0.75] {
        cases.push(Box::new(move || {
            let (b, nb) = (sample(n, bump)?, sample(n, narrow_bump)?);
            Ok(vec![
                residual_row("derivative_by_parts", "bump, narrow bump", a, derivative_by_parts_check(&b, &nb, order(a))?, IDENTITY_TOL),
                residual_row("integral_by_parts", "1, t^2", a, integral_by_parts_check(&sample(n, one)?, &sample(n, square)?, order(a))?, IDENTITY_TOL),
                residual_row("integral_by_parts", "bump, 1-t", a, integral_by_parts_check(&b, &sample(n, falling)?, order(a))?, IDENTITY_TOL),
            ])
        }));
        cases.push(Box::new(move || {
            let (rl, caputo) = constant_rule_check(unit_grid(n), order(a))?;
            Ok(vec![
                residual_row("constant_rule_rl", "1", a, rl, 0.0),
                residual_row("constant_rule_caputo", "1", a, caputo, 0.0),
            ])
        }));
    }
    cases
}

const SPECTRAL_N: usize = 4096;
const CROSS_PATH_N: usize = 2048;

fn spectral_cases() -> Vec<Case> {
    let mut cases: Vec<Case> = Vec::new();
    for (name, f) in [("bump", bump as fn(f64) -> f64), ("sin^2", sin_squared), ("poly", poly_bump)] {
        for a in [0.25, 0.5, 0.75] {
            cases.push(Box::new(move || {
                let u = sample(SPECTRAL_N, f)?;
                let d = energy_equivalence_check(&u, order(a))?;
                let i = energy_equivalence_integral_check(&u, order(a))?;
                let row = |check: &str, lhs: f64, rhs: f64, ratio: f64| Row {
                    suite: "spectral",
                    check: check.into(),
                    case: name.into(),
                    alpha: a,
                    n_steps: SPECTRAL_N,
                    lhs: Some(lhs),
                    rhs: Some(rhs),
                    value: (ratio - 1.0).abs(),
                    relation: Relation::AtMost,
                    threshold: 1e-3,
                };
                Ok(vec![
                    row("energy_equivalence_derivative", d.lhs, d.rhs, d.ratio),
                    row("energy_equivalence_integral", i.lhs, i.rhs, i.ratio),
                ])
            }));
        }
    }
    cases.push(Box::new(|| {
        let u = sample(CROSS_PATH_N, bump)?;
        let quad = rl_derivative_left(&u, order(0.5), 0.0)?;
        let spec = spectral_frac_derivative(&u, order(0.5), Side::Left, DEFAULT_PAD)?;
        Ok(vec![Row {
            suite: "spectral",
            check: "cross_path".into(),
            case: format!("bump, pad {DEFAULT_PAD}"),
            alpha: 0.5,
            n_steps: CROSS_PATH_N,
            lhs: None,
            rhs: None,
            value: quad.max_abs_diff(&spec)?,
            relation: Relation::AtMost,
            threshold: 1e-3,
        }])
    }));
    cases
}

const TRAJECTORIES: usize = 100;
const DISSIPATION_N: usize = 1024;
const LEVELS: usize = 3;

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

fn benchmark_spec(alpha: f64) -> Result<ProblemSpec> {
    let mat = MaterialModel::uniform(1.0, 1.0, 1.0, 0.5, 0.5);
    ManufacturedSolution::new(1.0, 1.0, order(alpha), mat).spec()
}

/// Benchmark level `l`: P1 on `8·2^l` cells with `16·2^l` steps.
fn benchmark_level(spec: &ProblemSpec, level: usize) -> Result<GalerkinSystem> {
    let cells = 8 << level;
    let basis = build_basis(BasisKind::P1, cells - 1, SpaceGrid::new(1.0, cells)?)?;
    assemble(spec, &basis, unit_grid(16 << level))
}

fn min_rate(values: &[f64]) -> f64 {
    values.windows(2).map(|w| w[0].abs() / w[1].abs()).fold(f64::INFINITY, f64::min)
}

fn energy_row(check: &str, case: String, alpha: f64, n_steps: usize, value: f64, relation: Relation, threshold: f64) -> Row {
    Row {
        suite: "energy",
        check: check.into(),
        case,
        alpha,
        n_steps,
        lhs: None,
        rhs: None,
        value,
        relation,
        threshold,
    }
}

fn energy_cases(seed: u64) -> Vec<Case> {
    let mut cases: Vec<Case> = Vec::new();
    for (i, a) in [0.25, 0.5, 0.75].into_iter().enumerate() {
        cases.push(Box::new(move || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let tg = unit_grid(DISSIPATION_N);
            let mut worst = f64::INFINITY;
            for _ in 0..TRAJECTORIES {
                let w = random_trajectory(&mut rng, 3, tg);
                let g = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
                let v = &g * g.transpose() + DMatrix::identity(3, 3) * 0.1;
                let min = dissipation_nonneg_check(&w, &v, order(a), tg)?;
                worst = worst.min(min / trajectory_energy_scale(&w, &v, tg));
            }
            Ok(vec![energy_row(
                "dissipation_nonnegative",
                format!("{TRAJECTORIES} random trajectories, seed {seed}"),
                a,
                DISSIPATION_N,
                worst,
                Relation::AtLeast,
                -1e-6,
            )])
        }));
        cases.push(Box::new(move || {
            let spec = benchmark_spec(a)?;
            let mut balance = Vec::new();
            let mut weak = Vec::new();
            let mut apriori = Vec::new();
            for level in 0..LEVELS {
                let sys = benchmark_level(&spec, level)?;
                let h = solve(&sys, &SolverConfig::default())?;
                balance.push(energy_report(&h, &sys)?.final_balance_residual());
                weak.push(weak_residual(&h, &sys, sys.dim())?);
                apriori.push(apriori_check(&h, &sys)?.ratio);
            }
            let sys = benchmark_level(&spec, 0)?;
            let base = apriori[0];
            let mut spread: f64 = 0.0;
            for scale in [1e-2, 1e-1, 1e1, 1e2] {
                let mut s = sys.clone();
                s.c *= scale;
                s.d0 *= scale;
                s.loads.iter_mut().for_each(|f| *f *= scale);
                let r = apriori_check(&solve(&s, &SolverConfig::default())?, &s)?.ratio;
                spread = spread.max((r / base - 1.0).abs());
            }
            let growth = apriori.iter().fold(0.0f64, |m, &r| m.max(r)) / base;
            let case = format!("manufactured, {LEVELS} levels");
            let finest = 16 << (LEVELS - 1);
            Ok(vec![
                energy_row("energy_balance_rate", case.clone(), a, finest, min_rate(&balance), Relation::AtLeast, 1.5),
                energy_row("weak_residual_rate", case.clone(), a, finest, min_rate(&weak), Relation::AtLeast, 1.5),
                energy_row("apriori_scale_spread", "data scaled 1e-2..1e2".into(), a, 16, spread, Relation::AtMost, 1e-10),
                energy_row("apriori_ratio_growth", case, a, finest, growth, Relation::AtMost, 1.5),
            ])
        }));
        cases.push(Box::new(move || {
            let spec = ProblemSpec::homogeneous(1.0, 1.0, order(a), MaterialModel::uniform(1.0, 1.0, 1.0, 0.5, 0.5));
            let mut worst: f64 = 0.0;
            for (kind, m, cells) in [(BasisKind::Sine, 4, 16), (BasisKind::P1, 15, 16)] {
                let basis = build_basis(kind, m, SpaceGrid::new(1.0, cells)?)?;
                for n in [16, 128] {
                    let sys = assemble(&spec, &basis, unit_grid(n))?;
                    worst = worst.max(uniqueness_probe(&sys, &SolverConfig::default())?);
                }
            }
            Ok(vec![energy_row(
                "uniqueness",
                "zero data, sine m=4 and p1 m=15".into(),
                a,
                128,
                worst,
                Relation::AtMost,
                1e-12,
            )])
        }));
    }
    cases
}
