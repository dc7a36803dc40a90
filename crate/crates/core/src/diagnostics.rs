//! Energy, dissipation, a-priori and weak-form checks on computed histories.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::assembly::GalerkinSystem;
use crate::export::write_columns_csv;
use crate::fracops::{
    cumulative_trapezoid, gamma_pos, rl_derivative_left, rl_integral_left, trapezoid, FracOrder,
    TimeGrid, TimeSeries,
};
use crate::volterra::{solve, FieldHistory, SolverConfig};
use crate::{Error, Result};

/// Per-node energy balance `E(t) - E(0) = work(t) - dissipation(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport {
    pub time: Vec<f64>,
    /// `½ (ρ u', u')`
    pub kinetic: Vec<f64>,
    /// `½ (a u_x, u_x)`
    pub elastic: Vec<f64>,
    pub total: Vec<f64>,
    /// `∫_0^t <f, u'>`
    pub work: Vec<f64>,
    /// `∫_0^t (b I^(1-alpha) u'_x, u'_x)`
    pub dissipation: Vec<f64>,
    /// `E(t) - E(0) - work(t) + dissipation(t)`
    pub balance_residual: Vec<f64>,
}

impl EnergyReport {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_columns_csv(
            &["t", "kinetic", "elastic", "total", "work", "dissipation", "balance_residual"],
            &[
                &self.time,
                &self.kinetic,
                &self.elastic,
                &self.total,
                &self.work,
                &self.dissipation,
                &self.balance_residual,
            ],
            writer,
        )
    }

    pub fn final_balance_residual(&self) -> f64 {
        *self.balance_residual.last().expect("reports cover at least two nodes")
    }
}

fn check_history(history: &FieldHistory, system: &GalerkinSystem) -> Result<()> {
    if history.tgrid != system.tgrid || history.dim() != system.dim() {
        return Err(Error::Shape(format!(
            "history ({} modes on {:?}) does not match system ({} modes on {:?})",
            history.dim(),
            history.tgrid,
            system.dim(),
            system.tgrid
        )));
    }
    Ok(())
}

fn quad_form(m: &DMatrix<f64>, x: nalgebra::DVectorView<f64>, y: nalgebra::DVectorView<f64>) -> f64 {
    x.dot(&(m * y))
}

/// Applies `I^beta` to every row.
fn integrate_rows(mat: &DMatrix<f64>, beta: FracOrder, grid: TimeGrid) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(mat.nrows(), mat.ncols());
    for k in 0..mat.nrows() {
        let s = TimeSeries::new(grid, mat.row(k).iter().copied().collect())?;
        let r = rl_integral_left(&s, beta)?;
        out.set_row(k, &nalgebra::RowDVector::from_row_slice(r.values()));
    }
    Ok(out)
}

/// Kinetic, elastic, work and dissipation terms at every node.
pub fn energy_report(history: &FieldHistory, system: &GalerkinSystem) -> Result<EnergyReport> {
    check_history(history, system)?;
    let grid = history.tgrid;
    let dt = grid.dt();
    let v = &history.velocity;
    let d = &history.coeffs;
    let n = grid.len();
    let kinetic: Vec<f64> = (0..n)
        .map(|j| 0.5 * quad_form(&system.mass, v.column(j), v.column(j)))
        .collect();
    let elastic: Vec<f64> = (0..n)
        .map(|j| 0.5 * quad_form(&system.stiffness, d.column(j), d.column(j)))
        .collect();
    let total: Vec<f64> = kinetic.iter().zip(&elastic).map(|(a, b)| a + b).collect();
    let power: Vec<f64> = (0..n).map(|j| system.loads[j].dot(&v.column(j))).collect();
    let work = cumulative_trapezoid(&power, dt);
    let dissipation = accumulated_dissipation(v, &system.viscous, system.alpha, grid)?;
    let balance_residual = (0..n)
        .map(|j| total[j] - total[0] - work[j] + dissipation[j])
        .collect();
    Ok(EnergyReport {
        time: grid.nodes().collect(),
        kinetic,
        elastic,
        total,
        work,
        dissipation,
        balance_residual,
    })
}

/// `∫_0^{t_j} (V I^(1-alpha) w) · w` for every node.
fn accumulated_dissipation(
    w: &DMatrix<f64>,
    viscous: &DMatrix<f64>,
    alpha: FracOrder,
    grid: TimeGrid,
) -> Result<Vec<f64>> {
    let iw = integrate_rows(w, FracOrder::new(1.0 - alpha.value())?, grid)?;
    let viw = viscous * iw;
    let rate: Vec<f64> = (0..grid.len())
        .map(|j| viw.column(j).dot(&w.column(j)))
        .collect();
    Ok(cumulative_trapezoid(&rate, grid.dt()))
}

/// Minimum over `t` of `∫_0^t (V I^(1-alpha) w, w)` for an arbitrary
/// trajectory `w` (`m x (n+1)`).
pub fn dissipation_nonneg_check(
    trajectory: &DMatrix<f64>,
    viscous: &DMatrix<f64>,
    alpha: FracOrder,
    grid: TimeGrid,
) -> Result<f64> {
    if trajectory.ncols() != grid.len() || trajectory.nrows() != viscous.nrows() {
        return Err(Error::Shape("trajectory does not match the grid or the matrix".into()));
    }
    alpha.require_pde_range()?;
    let acc = accumulated_dissipation(trajectory, viscous, alpha, grid)?;
    Ok(acc.into_iter().fold(f64::INFINITY, f64::min))
}

/// `∫_0^T (V w, w) dt`, the scale against which dissipation tolerances are set.
pub fn trajectory_energy_scale(trajectory: &DMatrix<f64>, viscous: &DMatrix<f64>, grid: TimeGrid) -> f64 {
    let vals: Vec<f64> = (0..grid.len())
        .map(|j| quad_form(viscous, trajectory.column(j), trajectory.column(j)))
        .collect();
    trapezoid(&vals, grid.dt())
}

/// Terms of the a-priori estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AprioriReport {
    /// `max_t ‖u(t)‖_{H¹₀}`
    pub sup_h1: f64,
    /// `max_t ‖u'(t)‖_{L²}`
    pub sup_velocity_l2: f64,
    /// `‖u - g‖_{H_0^(alpha/2)(0,T; H¹₀)}`
    pub frac_time_norm: f64,
    pub lhs: f64,
    /// `‖f‖_{L²(0,T;H⁻¹)} + ‖g‖_{H¹₀} + ‖h‖_{L²}` on the discrete space.
    pub rhs: f64,
    pub ratio: f64,
}

impl AprioriReport {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_columns_csv(
            &["sup_h1", "sup_velocity_l2", "frac_time_norm", "lhs", "rhs", "ratio"],
            &[
                &[self.sup_h1],
                &[self.sup_velocity_l2],
                &[self.frac_time_norm],
                &[self.lhs],
                &[self.rhs],
                &[self.ratio],
            ],
            writer,
        )
    }
}

/// Discrete a-priori estimate. The time-fractional norm is
/// `(∫ ‖w‖² + ∫ ‖aD^(alpha/2) w‖²)^(1/2)` in the H¹₀ metric with `w = u - g`.
pub fn apriori_check(history: &FieldHistory, system: &GalerkinSystem) -> Result<AprioriReport> {
    check_history(history, system)?;
    if system.has_zero_data() {
        return Err(Error::Domain("a-priori ratio is undefined for zero data".into()));
    }
    let grid = history.tgrid;
    let n = grid.len();
    let s = &system.h1_metric;
    let g = &system.gram;
    let d = &history.coeffs;
    let v = &history.velocity;
    let sup_h1 = (0..n)
        .map(|j| quad_form(s, d.column(j), d.column(j)).sqrt())
        .fold(0.0, f64::max);
    let sup_velocity_l2 = (0..n)
        .map(|j| quad_form(g, v.column(j), v.column(j)).sqrt())
        .fold(0.0, f64::max);

    let mut w = d.clone();
    for mut col in w.column_iter_mut() {
        col -= &system.c;
    }
    let half = system.alpha.half();
    let mut dw = DMatrix::zeros(w.nrows(), n);
    for k in 0..w.nrows() {
        let series = TimeSeries::new(grid, w.row(k).iter().copied().collect())?;
        let der = rl_derivative_left(&series, half, 0.0)?;
        dw.set_row(k, &nalgebra::RowDVector::from_row_slice(der.values()));
    }
    let l2_part: Vec<f64> = (0..n).map(|j| quad_form(s, w.column(j), w.column(j))).collect();
    let der_part: Vec<f64> = (0..n).map(|j| quad_form(s, dw.column(j), dw.column(j))).collect();
    let frac_time_norm = (trapezoid(&l2_part, grid.dt()) + trapezoid(&der_part, grid.dt())).sqrt();

    let chol = s
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Assembly("H¹ metric is not positive definite".into()))?;
    let dual: Vec<f64> = system
        .loads
        .iter()
        .map(|f| f.dot(&chol.solve(f)))
        .collect();
    let force_norm = trapezoid(&dual, grid.dt()).sqrt();
    let g_norm = quad_form(s, system.c.as_view(), system.c.as_view()).sqrt();
    let h_norm = quad_form(g, system.d0.as_view(), system.d0.as_view()).sqrt();

    let lhs = sup_h1 + sup_velocity_l2 + frac_time_norm;
    let rhs = force_norm + g_norm + h_norm;
    Ok(AprioriReport {
        sup_h1,
        sup_velocity_l2,
        frac_time_norm,
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

/// Largest mismatch of the weak formulation over the tests
/// `φ = (1 - t/T)^p w_k`, `p = 1..=3`, `k < test_modes`:
///
/// ```text
/// -∫ (ρ u', φ_t) + ∫ (b C D^(alpha/2) u_x, tD_T^(alpha/2) φ_x) + ∫ (a u_x, φ_x)
///     - ∫ <f, φ> - (ρ h, φ(0))
/// ```
pub fn weak_residual(history: &FieldHistory, system: &GalerkinSystem, test_modes: usize) -> Result<f64> {
    check_history(history, system)?;
    let m = system.dim();
    if test_modes == 0 || test_modes > m {
        return Err(Error::Domain(format!(
            "test_modes must lie in 1..={m}, got {test_modes}"
        )));
    }
    let grid = history.tgrid;
    let n = grid.len();
    let dt = grid.dt();
    let t0 = grid.t_start();
    let horizon = grid.t_end() - t0;
    let half = system.alpha.half();
    let s = half.value();

    // Caputo half derivative of every coefficient: D^(alpha/2)(d - d(0))
    let d = &history.coeffs;
    let mut cd = DMatrix::zeros(m, n);
    for k in 0..m {
        let row: Vec<f64> = d.row(k).iter().map(|v| v - d[(k, 0)]).collect();
        let der = rl_derivative_left(&TimeSeries::new(grid, row)?, half, 0.0)?;
        cd.set_row(k, &nalgebra::RowDVector::from_row_slice(der.values()));
    }
    let mv = &system.mass * &history.velocity;
    let vcd = &system.viscous * cd;
    let kd = &system.stiffness * d;
    let loads = DMatrix::from_columns(&system.loads);
    let md0 = &system.mass * &system.d0;

    let mut worst: f64 = 0.0;
    for p in 1..=3 {
        let pf = p as f64;
        let tau = |j: usize| 1.0 - (grid.node(j) - t0) / horizon;
        let theta: Vec<f64> = (0..n).map(|j| tau(j).powi(p)).collect();
        let theta_dot: Vec<f64> = (0..n).map(|j| -pf / horizon * tau(j).powi(p - 1)).collect();
        let coef = gamma_pos(pf + 1.0) / gamma_pos(pf + 1.0 - s) / horizon.powf(s);
        let theta_frac: Vec<f64> = (0..n)
            .map(|j| coef * tau(j).max(0.0).powf(pf - s))
            .collect();
        for k in 0..test_modes {
            let series = |f: &dyn Fn(usize) -> f64| (0..n).map(f).collect::<Vec<f64>>();
            let inertia = trapezoid(&series(&|j| mv[(k, j)] * theta_dot[j]), dt);
            let viscous = trapezoid(&series(&|j| vcd[(k, j)] * theta_frac[j]), dt);
            let elastic = trapezoid(&series(&|j| kd[(k, j)] * theta[j]), dt);
            let force = trapezoid(&series(&|j| loads[(k, j)] * theta[j]), dt);
            let r = -inertia + viscous + elastic - force - theta[0] * md0[k];
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

/// Solves a zero-data system and returns `max_t ‖√ρ u(t)‖`.
pub fn uniqueness_probe(system: &GalerkinSystem, config: &SolverConfig) -> Result<f64> {
    if !system.has_zero_data() {
        return Err(Error::Precondition(
            "uniqueness probe requires zero forcing and zero initial data".into(),
        ));
    }
    Ok(mass_norm_max(&solve(system, config)?, system))
}

/// `max_t ‖√ρ u(t)‖` of a history.
pub fn mass_norm_max(history: &FieldHistory, system: &GalerkinSystem) -> f64 {
    (0..history.tgrid.len())
        .map(|j| quad_form(&system.mass, history.coeffs.column(j), history.coeffs.column(j)).sqrt())
        .fold(0.0, f64::max)
}

/// Adds `delta` to coefficient `k` at every node.
pub fn perturb_coefficient(history: &FieldHistory, k: usize, delta: f64) -> FieldHistory {
    let mut out = history.clone();
    out.coeffs.row_mut(k).add_scalar_mut(delta);
    out
}

/// A zero vector per node, handy when building homogeneous systems by hand.
pub fn zero_loads(grid: TimeGrid, m: usize) -> Vec<DVector<f64>> {
    vec![DVector::zeros(m); grid.len()]
}
