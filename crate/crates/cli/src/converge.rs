//! `fracvisco converge`: dyadic refinement study against the manufactured
//! solution `sin(πx/L)(1 + t²)`.
//!
//! The material, length, horizon and order come from the configuration; the
//! forcing and initial data are replaced by the manufactured ones. Level `l`
//! refines the base discretization by `2^l` in space (`joint`, `spatial`)
//! and/or time (`joint`, `temporal`).

use rayon::prelude::*;

use fracvisco_core::assembly::assemble;
use fracvisco_core::export::fmt_f64;
use fracvisco_core::manufactured::ManufacturedSolution;
use fracvisco_core::volterra::solve;

use crate::config::{RunConfig, Study};
use crate::output::csv_table;
use crate::CliError;

pub const MIN_LEVELS: usize = 3;

#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub level: usize,
    pub h: f64,
    pub dt: f64,
    /// `‖u_m(T) - u*(T)‖_{L²}`
    pub l2_final: f64,
    /// `max_j ‖u_m(t_j) - u*(t_j)‖_{L²}`
    pub l2_max: f64,
    pub order_final: Option<f64>,
    pub order_max: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ConvergenceTable {
    pub study: Study,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> Vec<u8> {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.level.to_string(),
                    fmt_f64(r.h),
                    fmt_f64(r.dt),
                    fmt_f64(r.l2_final),
                    fmt_f64(r.l2_max),
                    opt(r.order_final),
                    opt(r.order_max),
                ]
            })
            .collect();
        csv_table(&["level", "h", "dt", "l2_error_final", "l2_error_max", "order_final", "order_max"], &rows)
    }

    pub fn summary(&self) -> String {
        let mut s = format!("fracvisco converge ({:?} study)\n", self.study);
        for r in &self.rows {
            let ord = |v: Option<f64>| v.map(|o| format!("{o:.3}")).unwrap_or_else(|| "-".into());
            s.push_str(&format!(
                "level {}: h = {:.4e}, dt = {:.4e}, L2(T) error = {:.4e} (order {}), max L2 error = {:.4e} (order {})\n",
                r.level,
                r.h,
                r.dt,
                r.l2_final,
                ord(r.order_final),
                r.l2_max,
                ord(r.order_max)
            ));
        }
        s
    }
}

pub fn converge(cfg: &RunConfig, levels: usize) -> Result<ConvergenceTable, CliError> {
    if levels < MIN_LEVELS {
        return Err(CliError::Config(format!("--levels must be at least {MIN_LEVELS}, got {levels}")));
    }
    let p = &cfg.problem;
    let ms = ManufacturedSolution::new(p.length, p.horizon, cfg.alpha(), cfg.material());
    let spec = ms.spec()?;
    let d = cfg.discretization;
    let results: Vec<Result<(f64, f64, f64, f64), CliError>> = (0..levels)
        .into_par_iter()
        .map(|level| {
            let (cells, n) = match cfg.study {
                Study::Joint => (d.cells << level, d.n_steps << level),
                Study::Temporal => (d.cells, d.n_steps << level),
                Study::Spatial => (d.cells << level, d.n_steps),
            };
            let basis = cfg.basis(cells)?;
            let tgrid = cfg.tgrid(n)?;
            let sys = assemble(&spec, &basis, tgrid)?;
            let h = solve(&sys, &cfg.solver)?;
            let errs: Vec<f64> = tgrid
                .nodes()
                .enumerate()
                .map(|(j, t)| ms.l2_error(&basis, &h.coeffs.column(j).into_owned(), t))
                .collect();
            let max = errs.iter().copied().fold(0.0, f64::max);
            Ok((basis.grid().h(), tgrid.dt(), errs[n], max))
        })
        .collect();
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for (level, r) in results.into_iter().enumerate() {
        let (h, dt, l2_final, l2_max) = r?;
        let order = |prev: f64, cur: f64| (prev / cur).log2();
        let (order_final, order_max) = match rows.last() {
            Some(prev) => (Some(order(prev.l2_final, l2_final)), Some(order(prev.l2_max, l2_max))),
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            level,
            h,
            dt,
            l2_final,
            l2_max,
            order_final,
            order_max,
        });
    }
    Ok(ConvergenceTable {
        study: cfg.study,
        rows,
    })
}
