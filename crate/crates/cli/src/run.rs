//! `fracvisco run`: assemble, solve, diagnose, report.

use std::fmt::Write as _;

use fracvisco_core::assembly::{assemble, verify_hypotheses};
use fracvisco_core::diagnostics::{apriori_check, energy_report, mass_norm_max, weak_residual};
use fracvisco_core::export::fmt_f64;
use fracvisco_core::volterra::solve;

use crate::config::RunConfig;
use crate::output::{csv_table, Artifact};
use crate::CliError;

/// Mass norm below which a zero-data run counts as the zero solution.
pub const UNIQUENESS_TOL: f64 = 1e-12;

pub fn run(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let spec = cfg.spec();
    let report = verify_hypotheses(&spec);
    let d = cfg.discretization;
    let basis = cfg.basis(d.cells)?;
    let tgrid = cfg.tgrid(d.n_steps)?;
    let system = assemble(&spec, &basis, tgrid)?;
    let history = solve(&system, &cfg.solver)?;
    let energy = energy_report(&history, &system)?;
    let weak = weak_residual(&history, &system, system.dim())?;
    let zero_data = system.has_zero_data();

    let mut summary = String::new();
    let p = &cfg.problem;
    let _ = writeln!(summary, "fracvisco run");
    let _ = writeln!(summary, "alpha = {}", p.alpha);
    let _ = writeln!(summary, "length = {}, horizon = {}", p.length, p.horizon);
    let _ = writeln!(summary, "classical_limit = {}", p.classical_limit);
    let _ = writeln!(summary, "rho = {}, a = {}, b = {}", p.rho.source(), p.a.source(), p.b.source());
    for (name, e) in [
        ("source", &p.source),
        ("flux", &p.flux),
        ("initial_displacement", &p.initial_displacement),
        ("initial_velocity", &p.initial_velocity),
    ] {
        let _ = writeln!(summary, "{name} = {}", e.as_ref().map_or("0", |e| e.source()));
    }
    let _ = writeln!(
        summary,
        "basis = {:?}, m = {}, cells = {}, n_steps = {}, scheme = {:?}",
        d.basis, d.m, d.cells, d.n_steps, cfg.solver.scheme
    );
    for c in &report.checks {
        let _ = writeln!(summary, "hypothesis {}: {} ({})", c.name, if c.passed { "pass" } else { "fail" }, c.detail);
    }
    let last = energy.time.len() - 1;
    let _ = writeln!(summary, "final kinetic energy = {}", fmt_f64(energy.kinetic[last]));
    let _ = writeln!(summary, "final elastic energy = {}", fmt_f64(energy.elastic[last]));
    let _ = writeln!(summary, "final work = {}", fmt_f64(energy.work[last]));
    let _ = writeln!(summary, "final dissipation = {}", fmt_f64(energy.dissipation[last]));
    let _ = writeln!(summary, "final balance residual = {}", fmt_f64(energy.final_balance_residual()));
    let monotone = energy.dissipation.windows(2).all(|w| w[1] >= w[0]);
    let _ = writeln!(summary, "dissipation nondecreasing = {monotone}");
    let _ = writeln!(summary, "weak residual = {}", fmt_f64(weak));

    let mut artifacts = Vec::new();
    if zero_data {
        let norm = mass_norm_max(&history, &system);
        let verdict = if norm <= UNIQUENESS_TOL { "pass" } else { "fail" };
        let _ = writeln!(summary, "uniqueness_probe = {verdict} (max mass norm {})", fmt_f64(norm));
        let all_zero = energy.total.iter().chain(&energy.dissipation).all(|&v| v == 0.0);
        let _ = writeln!(summary, "all energies zero = {all_zero}");
    } else {
        let apriori = apriori_check(&history, &system)?;
        let _ = writeln!(summary, "apriori ratio = {}", fmt_f64(apriori.ratio));
        if cfg.reports.apriori {
            artifacts.push(Artifact::render("apriori.csv", |w| apriori.write_csv(w))?);
        }
    }

    if cfg.reports.solution {
        artifacts.push(Artifact::render("solution.csv", |w| history.write_csv(w))?);
    }
    if cfg.reports.energy {
        artifacts.push(Artifact::render("energy.csv", |w| energy.write_csv(w))?);
    }
    if cfg.reports.field {
        let grid = basis.grid();
        let mut rows = Vec::new();
        for j in 0..tgrid.len() {
            let coeffs = history.coeffs.column(j).into_owned();
            for i in 0..=grid.n_cells() {
                let x = grid.node(i);
                rows.push(vec![fmt_f64(tgrid.node(j)), fmt_f64(x), fmt_f64(basis.synthesize(&coeffs, x))]);
            }
        }
        artifacts.push(Artifact::new("field.csv", csv_table(&["t", "x", "u"], &rows)));
    }
    artifacts.push(Artifact::new("summary.txt", summary.into_bytes()));
    Ok(artifacts)
}
