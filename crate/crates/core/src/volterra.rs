//! Time integration through the second-kind Volterra form
//!
//! ```text
//! d(t) = c + d0 t + B c t^(2-alpha) / Γ(3-alpha) + I²f - B I^(2-alpha) d - A I² d
//! A = M⁻¹K,  B = M⁻¹V,  f = M⁻¹F
//! ```
//!
//! and the velocity `d' = d0 + I f - B I^(1-alpha) (d - c) - A I d`.
//!
//! The unknown-dependent integrals `I^(2-alpha) d` and `I² d` are discretized
//! by trapezoidal convolution quadrature, with weights generated by
//! `((dt/2) (1+ζ)/(1-ζ))^beta` and two starting weights per node that make the
//! rule exact on `1` and `t`. Its stability region contains every
//! configuration with `M`, `K`, `V` positive semidefinite, so no step size
//! restriction applies. The inhomogeneity and the velocity recovery are
//! explicit and use the product-trapezoid weights of
//! [`crate::fracops::ConvolutionKernel`].

use std::io::Write;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::assembly::GalerkinSystem;
use crate::export::fmt_f64;
use crate::fracops::{
    caputo_derivative_left, gamma_pos, ConvolutionKernel, FracOrder, Side, TimeGrid, TimeSeries,
};
use crate::{Error, Result};

const OVERFLOW_FACTOR: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Causal time stepping; one factorized solve per node.
    Marching,
    /// Fixed-point iteration on the whole trajectory.
    Picard,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Marching,
            picard_tol: 1e-12,
            picard_max_iter: 500,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.picard_tol > 0.0) {
            return Err(Error::Configuration(format!(
                "picard_tol must be positive, got {}",
                self.picard_tol
            )));
        }
        if self.picard_max_iter == 0 {
            return Err(Error::Configuration("picard_max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Coefficient and velocity trajectories; column `j` holds the values at `t_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldHistory {
    pub tgrid: TimeGrid,
    pub coeffs: DMatrix<f64>,
    pub velocity: DMatrix<f64>,
}

impl FieldHistory {
    pub fn new(tgrid: TimeGrid, coeffs: DMatrix<f64>, velocity: DMatrix<f64>) -> Result<Self> {
        if coeffs.ncols() != tgrid.len() || velocity.shape() != coeffs.shape() {
            return Err(Error::Shape(format!(
                "history needs {} columns for both fields, got {:?} and {:?}",
                tgrid.len(),
                coeffs.shape(),
                velocity.shape()
            )));
        }
        Ok(Self {
            tgrid,
            coeffs,
            velocity,
        })
    }

    pub fn dim(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn coeff_series(&self, k: usize) -> TimeSeries {
        row_series(&self.coeffs, k, self.tgrid)
    }

    pub fn velocity_series(&self, k: usize) -> TimeSeries {
        row_series(&self.velocity, k, self.tgrid)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().chain(self.velocity.iter()).all(|v| v.is_finite())
    }

    /// CSV with columns `t, d_1..d_m, v_1..v_m`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let m = self.dim();
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        header.extend((1..=m).map(|k| format!("d_{k}")));
        header.extend((1..=m).map(|k| format!("v_{k}")));
        w.write_record(&header)?;
        for j in 0..self.tgrid.len() {
            let mut row = vec![fmt_f64(self.tgrid.node(j))];
            row.extend(self.coeffs.column(j).iter().map(|&v| fmt_f64(v)));
            row.extend(self.velocity.column(j).iter().map(|&v| fmt_f64(v)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn row_series(mat: &DMatrix<f64>, k: usize, grid: TimeGrid) -> TimeSeries {
    TimeSeries::from_raw(grid, mat.row(k).iter().copied().collect())
}

/// Applies a left kernel to every row of `mat`.
fn apply_rows(kernel: &ConvolutionKernel, mat: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(mat.nrows(), mat.ncols());
    for k in 0..mat.nrows() {
        let row: Vec<f64> = mat.row(k).iter().copied().collect();
        for (j, v) in kernel.apply_left(&row).into_iter().enumerate() {
            out[(k, j)] = v;
        }
    }
    out
}

fn loads_matrix(system: &GalerkinSystem) -> DMatrix<f64> {
    DMatrix::from_columns(&system.loads)
}

/// Matrix data of the Volterra form.
#[derive(Clone, Debug)]
pub struct VolterraData {
    pub alpha: FracOrder,
    pub tgrid: TimeGrid,
    /// `M⁻¹K`
    pub a: DMatrix<f64>,
    /// `M⁻¹V`
    pub b: DMatrix<f64>,
    /// `c + d0 t + B c t^(2-alpha)/Γ(3-alpha) + I²(M⁻¹F)` at every node.
    pub inhomogeneity: DMatrix<f64>,
}

impl VolterraData {
    /// `B I^(2-alpha) d + A I² d` for a full trajectory.
    pub fn kernel_apply(&self, d: &DMatrix<f64>) -> DMatrix<f64> {
        let qa = CqIntegral::new(2.0, self.tgrid);
        let qb = CqIntegral::new(2.0 - self.alpha.value(), self.tgrid);
        &self.b * qb.apply_rows(d) + &self.a * qa.apply_rows(d)
    }
}

fn order(v: f64) -> FracOrder {
    FracOrder::new(v).expect("orders built from validated alpha are nonnegative")
}

fn mass_cholesky(system: &GalerkinSystem) -> Result<Cholesky<f64, Dyn>> {
    system
        .mass
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Assembly("mass matrix is not positive definite".into()))
}

/// Builds `A`, `B` and the inhomogeneity on the system's time grid.
pub fn to_volterra_rhs(system: &GalerkinSystem) -> Result<VolterraData> {
    let chol = mass_cholesky(system)?;
    let alpha = system.alpha;
    let tgrid = system.tgrid;
    let a = chol.solve(&system.stiffness);
    let b = chol.solve(&system.viscous);
    let f = chol.solve(&loads_matrix(system));
    let i2 = ConvolutionKernel::integral(order(2.0), tgrid, Side::Left);
    let mut inhom = apply_rows(&i2, &f);
    let bc = &b * &system.c;
    let p = 2.0 - alpha.value();
    let g = gamma_pos(3.0 - alpha.value());
    for j in 0..tgrid.len() {
        let t = tgrid.node(j) - tgrid.t_start();
        let tp = if j == 0 { 0.0 } else { t.powf(p) / g };
        let mut col = inhom.column_mut(j);
        col += &system.c + &system.d0 * t + &bc * tp;
    }
    Ok(VolterraData {
        alpha,
        tgrid,
        a,
        b,
        inhomogeneity: inhom,
    })
}

/// Integrates the semidiscrete system on `system.tgrid`.
pub fn solve(system: &GalerkinSystem, config: &SolverConfig) -> Result<FieldHistory> {
    config.validate()?;
    let data = to_volterra_rhs(system)?;
    let coeffs = match config.scheme {
        Scheme::Marching => march(system, &data)?,
        Scheme::Picard => picard(&data, config, data.inhomogeneity.clone())?,
    };
    finish(system, &data, coeffs)
}

/// Picard iteration started from `guess` (an `m x (n+1)` trajectory).
pub fn solve_picard_from(
    system: &GalerkinSystem,
    config: &SolverConfig,
    guess: &DMatrix<f64>,
) -> Result<FieldHistory> {
    config.validate()?;
    let data = to_volterra_rhs(system)?;
    if guess.shape() != data.inhomogeneity.shape() {
        return Err(Error::Shape(format!(
            "initial guess has shape {:?}, expected {:?}",
            guess.shape(),
            data.inhomogeneity.shape()
        )));
    }
    let coeffs = picard(&data, config, guess.clone())?;
    finish(system, &data, coeffs)
}

fn overflow_guard(data: &VolterraData) -> f64 {
    OVERFLOW_FACTOR * data.inhomogeneity.amax()
}

fn march(system: &GalerkinSystem, data: &VolterraData) -> Result<DMatrix<f64>> {
    let tgrid = system.tgrid;
    let n = tgrid.n_steps();
    let m = system.dim();
    let qa = CqIntegral::new(2.0, tgrid);
    let qb = CqIntegral::new(2.0 - system.alpha.value(), tgrid);
    let chol = (&system.mass + &system.viscous * qb.diagonal() + &system.stiffness * qa.diagonal())
        .cholesky()
        .ok_or_else(|| Error::Assembly("marching matrix is not positive definite".into()))?;
    // the equation is solved in mass-weighted form
    let rhs0 = &system.mass * &data.inhomogeneity;
    let guard = overflow_guard(data);

    let mut d = vec![0.0; m * (n + 1)];
    d[..m].copy_from_slice(system.c.as_slice());
    let mut hist_a = vec![0.0; m];
    let mut hist_b = vec![0.0; m];
    for j in 1..=n {
        qa.history(&d, m, j, &mut hist_a);
        qb.history(&d, m, j, &mut hist_b);
        let ha = DVector::from_column_slice(&hist_a);
        let hb = DVector::from_column_slice(&hist_b);
        let rhs = rhs0.column(j) - &system.viscous * hb - &system.stiffness * ha;
        let dj = chol.solve(&rhs);
        let norm = dj.amax();
        if !(norm <= guard) {
            return Err(Error::Divergence {
                time: tgrid.node(j),
                norm,
                guard,
            });
        }
        d[j * m..(j + 1) * m].copy_from_slice(dj.as_slice());
    }
    Ok(DMatrix::from_vec(m, n + 1, d))
}

/// Trapezoidal convolution quadrature for `I^beta` with a starting weight:
///
/// ```text
/// (I^beta u)(t_j) ≈ Σ_{k=0..j} ω_{j-k} u_k + s_j u_0
/// ```
///
/// where `s_j` makes the rule exact on constants. For `beta = 2` this is the
/// composite trapezoid rule applied twice.
#[derive(Clone, Debug)]
pub struct CqIntegral {
    omega: Vec<f64>,
    start: Vec<f64>,
}

impl CqIntegral {
    pub fn new(beta: f64, tgrid: TimeGrid) -> Self {
        let n = tgrid.n_steps();
        let dt = tgrid.dt();
        // (1+ζ)^beta and (1-ζ)^(-beta) series
        let mut plus = vec![1.0; n + 1];
        let mut minus = vec![1.0; n + 1];
        for k in 1..=n {
            let kf = k as f64;
            plus[k] = plus[k - 1] * (beta - kf + 1.0) / kf;
            minus[k] = minus[k - 1] * (beta + kf - 1.0) / kf;
        }
        let scale = (0.5 * dt).powf(beta);
        let omega: Vec<f64> = (0..=n)
            .map(|l| scale * (0..=l).map(|i| plus[i] * minus[l - i]).sum::<f64>())
            .collect();
        let g1 = gamma_pos(beta + 1.0);
        let mut start = vec![0.0; n + 1];
        let mut total = omega[0];
        for j in 1..=n {
            total += omega[j];
            start[j] = (j as f64 * dt).powf(beta) / g1 - total;
        }
        Self { omega, start }
    }

    /// Weight multiplying `u_j` in the value at `t_j`.
    pub fn diagonal(&self) -> f64 {
        self.omega[0]
    }

    /// Contribution of `u_0..u_{j-1}` to the value at `t_j` (`d` holds
    /// `m`-vectors back to back).
    fn history(&self, d: &[f64], m: usize, j: usize, out: &mut [f64]) {
        let w0 = self.omega[j] + self.start[j];
        for (o, &v) in out.iter_mut().zip(&d[..m]) {
            *o = w0 * v;
        }
        for k in 1..j {
            let w = self.omega[j - k];
            for (o, &v) in out.iter_mut().zip(&d[k * m..(k + 1) * m]) {
                *o += w * v;
            }
        }
    }

    /// Values at every node for a scalar series.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len() - 1;
        let mut out = vec![0.0; n + 1];
        for (j, o) in out.iter_mut().enumerate().skip(1) {
            let mut acc = self.start[j] * u[0];
            for k in 0..=j {
                acc += self.omega[j - k] * u[k];
            }
            *o = acc;
        }
        out
    }

    fn apply_rows(&self, mat: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(mat.nrows(), mat.ncols());
        for k in 0..mat.nrows() {
            let row: Vec<f64> = mat.row(k).iter().copied().collect();
            for (j, v) in self.apply(&row).into_iter().enumerate() {
                out[(k, j)] = v;
            }
        }
        out
    }
}

fn picard(data: &VolterraData, config: &SolverConfig, mut d: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let guard = overflow_guard(data);
    let mut residual = f64::INFINITY;
    for _ in 0..config.picard_max_iter {
        let next = &data.inhomogeneity - data.kernel_apply(&d);
        residual = (&next - &d).amax();
        d = next;
        let norm = d.amax();
        if !(norm <= guard.max(f64::MIN_POSITIVE)) && norm != 0.0 {
            return Err(Error::Divergence {
                time: data.tgrid.t_end(),
                norm,
                guard,
            });
        }
        if residual <= config.picard_tol {
            return Ok(d);
        }
    }
    Err(Error::Iteration {
        iterations: config.picard_max_iter,
        residual,
    })
}

fn finish(system: &GalerkinSystem, data: &VolterraData, coeffs: DMatrix<f64>) -> Result<FieldHistory> {
    let velocity = velocity_from_integrated_form(system, data, &coeffs)?;
    FieldHistory::new(system.tgrid, coeffs, velocity)
}

/// `M d' = M d0 + I F - V I^(1-alpha)(d - c) - K I d`.
fn velocity_from_integrated_form(
    system: &GalerkinSystem,
    data: &VolterraData,
    coeffs: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let tgrid = data.tgrid;
    let chol = mass_cholesky(system)?;
    let i1 = ConvolutionKernel::integral(order(1.0), tgrid, Side::Left);
    let iv = ConvolutionKernel::integral(order(1.0 - data.alpha.value()), tgrid, Side::Left);
    let mut shifted = coeffs.clone();
    for mut col in shifted.column_iter_mut() {
        col -= &system.c;
    }
    let mut rhs = apply_rows(&i1, &loads_matrix(system))
        - &system.viscous * apply_rows(&iv, &shifted)
        - &system.stiffness * apply_rows(&i1, coeffs);
    let md0 = &system.mass * &system.d0;
    for mut col in rhs.column_iter_mut() {
        col += &md0;
    }
    let mut v = chol.solve(&rhs);
    v.set_column(0, &system.d0);
    Ok(v)
}

/// Node-wise max-norm of `M d'' + V C D^alpha d + K d - F`, with `d''` from
/// second differences (one-sided at the two end nodes).
pub fn residual(history: &FieldHistory, system: &GalerkinSystem) -> Result<TimeSeries> {
    if history.tgrid != system.tgrid || history.dim() != system.dim() {
        return Err(Error::Shape("history and system do not share grid and dimension".into()));
    }
    let tgrid = history.tgrid;
    let n = tgrid.n_steps();
    if n < 2 {
        return Err(Error::Shape("residual needs at least two time steps".into()));
    }
    let m = history.dim();
    let dt = tgrid.dt();
    let d = &history.coeffs;
    let mut caputo = DMatrix::zeros(m, n + 1);
    for k in 0..m {
        let s = history.coeff_series(k);
        let cd = caputo_derivative_left(&s, system.alpha, s.first())?;
        caputo.set_row(k, &nalgebra::RowDVector::from_row_slice(cd.values()));
    }
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let c = j.clamp(1, n - 1);
        let acc = (d.column(c + 1) - d.column(c) * 2.0 + d.column(c - 1)) / (dt * dt);
        let r = &system.mass * acc + &system.viscous * caputo.column(j) + &system.stiffness * d.column(j)
            - &system.loads[j];
        out.push(r.amax());
    }
    TimeSeries::new(tgrid, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::gamma;

    fn scalar(
        alpha: f64,
        n: usize,
        t_end: f64,
        (m, k, v): (f64, f64, f64),
        f: impl Fn(f64) -> f64,
        c: f64,
        d0: f64,
    ) -> GalerkinSystem {
        let tgrid = TimeGrid::new(0.0, t_end, n).unwrap();
        let one = |x: f64| DMatrix::from_element(1, 1, x);
        let loads = tgrid.nodes().map(|t| DVector::from_element(1, f(t))).collect();
        GalerkinSystem::from_matrices(
            FracOrder::new(alpha).unwrap(),
            tgrid,
            one(m),
            one(k),
            one(v),
            loads,
            DVector::from_element(1, c),
            DVector::from_element(1, d0),
        )
        .unwrap()
    }

    #[test]
    fn kernel_free_inhomogeneity() {
        let sys = scalar(0.5, 20, 1.0, (1.0, 0.0, 0.0), |_| 0.0, 0.3, 2.0);
        let data = to_volterra_rhs(&sys).unwrap();
        for (j, t) in sys.tgrid.nodes().enumerate() {
            assert!((data.inhomogeneity[(0, j)] - (0.3 + 2.0 * t)).abs() < 1e-14);
        }
        assert_eq!(data.a.amax(), 0.0);
        assert_eq!(data.b.amax(), 0.0);
    }

    #[test]
    fn unit_forcing_gives_half_t_squared() {
        let sys = scalar(0.5, 16, 1.0, (1.0, 0.0, 0.0), |_| 1.0, 0.0, 0.0);
        let h = solve(&sys, &SolverConfig::default()).unwrap();
        for (j, t) in sys.tgrid.nodes().enumerate() {
            assert!((h.coeffs[(0, j)] - t * t / 2.0).abs() < 1e-14);
            assert!((h.velocity[(0, j)] - t).abs() < 1e-14);
        }
    }

    #[test]
    fn viscous_inhomogeneity_term_is_analytic() {
        let alpha = 0.5;
        let sys = scalar(alpha, 10, 1.0, (1.0, 0.0, 1.0), |_| 0.0, 1.0, 0.0);
        let data = to_volterra_rhs(&sys).unwrap();
        let g = gamma(3.0 - alpha).unwrap();
        for (j, t) in sys.tgrid.nodes().enumerate() {
            let exact = 1.0 + t.powf(2.0 - alpha) / g;
            assert_eq!(data.inhomogeneity[(0, j)], exact);
        }
    }

    #[test]
    fn zero_data_zero_history() {
        let sys = scalar(0.3, 50, 2.0, (2.0, 3.0, 1.0), |_| 0.0, 0.0, 0.0);
        let h = solve(&sys, &SolverConfig::default()).unwrap();
        assert_eq!(h.coeffs.amax(), 0.0);
        assert_eq!(h.velocity.amax(), 0.0);
    }

    #[test]
    fn classical_oscillator() {
        let sys = scalar(0.5, 2000, 2.0, (1.0, 1.0, 0.0), |_| 0.0, 1.0, 0.0);
        let h = solve(&sys, &SolverConfig::default()).unwrap();
        let err = sys
            .tgrid
            .nodes()
            .enumerate()
            .map(|(j, t)| (h.coeffs[(0, j)] - t.cos()).abs())
            .fold(0.0, f64::max);
        assert!(err < 5e-6, "err {err:e}");
        let verr = sys
            .tgrid
            .nodes()
            .enumerate()
            .map(|(j, t)| (h.velocity[(0, j)] + t.sin()).abs())
            .fold(0.0, f64::max);
        assert!(verr < 5e-6, "velocity err {verr:e}");
    }

    #[test]
    fn marching_matches_picard() {
        let sys = scalar(0.5, 200, 1.0, (1.0, 2.0, 1.0), |t| t, 0.5, -0.2);
        let marching = solve(&sys, &SolverConfig::default()).unwrap();
        let cfg = SolverConfig {
            scheme: Scheme::Picard,
            picard_tol: 1e-12,
            picard_max_iter: 200,
        };
        let picard = solve(&sys, &cfg).unwrap();
        assert!((&marching.coeffs - &picard.coeffs).amax() <= 10.0 * cfg.picard_tol);
        let guess = DMatrix::from_element(1, 201, 3.0);
        let other = solve_picard_from(&sys, &cfg, &guess).unwrap();
        assert!((&other.coeffs - &picard.coeffs).amax() <= 10.0 * cfg.picard_tol);
    }

    #[test]
    fn picard_reports_non_convergence() {
        let sys = scalar(0.5, 50, 1.0, (1.0, 2.0, 1.0), |t| t, 0.5, 0.0);
        let cfg = SolverConfig {
            scheme: Scheme::Picard,
            picard_tol: 1e-14,
            picard_max_iter: 2,
        };
        assert!(matches!(solve(&sys, &cfg), Err(Error::Iteration { iterations: 2, .. })));
    }

    #[test]
    fn stiff_viscous_modes_stay_bounded() {
        for alpha in [0.1, 0.5, 0.9] {
            let sys = scalar(alpha, 400, 1.0, (1.0, 1e7, 1e8), |_| 0.0, 1.0, 0.0);
            let h = solve(&sys, &SolverConfig::default()).unwrap();
            assert!(h.coeffs.amax() <= 1.0 + 1e-9, "alpha {alpha}: {}", h.coeffs.amax());
        }
    }

    #[test]
    fn convolution_quadrature_is_exact_on_constants() {
        let tgrid = TimeGrid::new(0.0, 1.0, 40).unwrap();
        for beta in [0.4, 1.0, 1.5, 2.0] {
            let q = CqIntegral::new(beta, tgrid);
            let out = q.apply(&vec![2.0; tgrid.len()]);
            for (j, t) in tgrid.nodes().enumerate() {
                let exact = 2.0 * t.powf(beta) / gamma(beta + 1.0).unwrap();
                assert!((out[j] - exact).abs() < 1e-12, "beta {beta} j {j}");
            }
        }
    }

    #[test]
    fn residual_of_manufactured_quadratic() {
        // d = t², M = 1, K = 1, V = 1: F = 2 + 2 t^(2-alpha)/Γ(3-alpha) + t²
        let alpha = 0.4;
        let g = gamma(3.0 - alpha).unwrap();
        let mut prev = f64::INFINITY;
        for n in [32, 64, 128] {
            let sys = scalar(
                alpha,
                n,
                1.0,
                (1.0, 1.0, 1.0),
                |t| 2.0 + 2.0 * t.powf(2.0 - alpha) / g + t * t,
                0.0,
                0.0,
            );
            let tg = sys.tgrid;
            let coeffs = DMatrix::from_iterator(1, n + 1, tg.nodes().map(|t| t * t));
            let vel = DMatrix::from_iterator(1, n + 1, tg.nodes().map(|t| 2.0 * t));
            let h = FieldHistory::new(tg, coeffs, vel).unwrap();
            let r = residual(&h, &sys).unwrap().max_abs();
            assert!(r < prev);
            assert!(r < 0.5 / n as f64, "n = {n}: {r:e}");
            prev = r;
        }
    }

    #[test]
    fn history_csv_layout() {
        let sys = scalar(0.5, 3, 1.0, (1.0, 1.0, 1.0), |_| 1.0, 0.0, 0.0);
        let h = solve(&sys, &SolverConfig::default()).unwrap();
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "t,d_1,v_1");
        assert_eq!(text.lines().count(), 5);
    }

    mod invariants {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn solution_is_linear_in_data(
                c in -2.0f64..2.0,
                d0 in -2.0f64..2.0,
                amp in -2.0f64..2.0,
                alpha in 0.05f64..0.95,
                k in 0.1f64..50.0,
                v in 0.0f64..20.0,
            ) {
                let s1 = scalar(alpha, 64, 1.0, (1.0, k, v), |t| amp * t.cos(), c, d0);
                let s2 = scalar(alpha, 64, 1.0, (1.0, k, v), |t| 2.0 * amp * t.cos(), 2.0 * c, 2.0 * d0);
                let h1 = solve(&s1, &SolverConfig::default()).unwrap();
                let h2 = solve(&s2, &SolverConfig::default()).unwrap();
                let gap = (&h1.coeffs * 2.0 - &h2.coeffs).amax();
                prop_assert!(gap <= 1e-12 * (1.0 + h2.coeffs.amax()));
            }

            #[test]
            fn marching_is_causal(
                alpha in 0.05f64..0.95,
                cut in 1usize..63,
            ) {
                let s1 = scalar(alpha, 64, 1.0, (1.0, 4.0, 1.0), |_| 1.0, 0.3, 0.0);
                let tc = s1.tgrid.node(cut);
                let s2 = scalar(alpha, 64, 1.0, (1.0, 4.0, 1.0), |t| if t > tc { 5.0 } else { 1.0 }, 0.3, 0.0);
                let h1 = solve(&s1, &SolverConfig::default()).unwrap();
                let h2 = solve(&s2, &SolverConfig::default()).unwrap();
                prop_assert_eq!(h1.coeffs.columns(0, cut + 1), h2.coeffs.columns(0, cut + 1));
            }

            #[test]
            fn unforced_motion_stays_within_initial_energy(
                alpha in 0.05f64..0.95,
                lam in 1.0f64..1e6,
                ratio in 0.0f64..10.0,
            ) {
                let sys = scalar(alpha, 200, 1.0, (1.0, lam, ratio * lam), |_| 0.0, 1.0, 0.0);
                let h = solve(&sys, &SolverConfig::default()).unwrap();
                prop_assert!(h.coeffs.amax() <= 1.0 + 1e-9);
            }
        }
    }
}
