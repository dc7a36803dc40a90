//! Riemann-Liouville and Caputo fractional operators on uniform time grids.
//!
//! Left-sided operators act on `(a, t)`, right-sided ones on `(t, b)`, where
//! `[a, b]` is the span of the [`TimeGrid`]. Every operator is linear in the
//! samples, causal (left) or anticausal (right), and reduces to the identity
//! at order zero.

mod gamma;
mod grid;
pub mod identities;
mod kernel;

pub use gamma::{gamma, set_gamma_fault};
pub use grid::{FracOrder, TimeGrid, TimeSeries};
pub use kernel::{ConvolutionKernel, OperatorKind, Side};

pub(crate) use gamma::gamma_pos;
pub(crate) use grid::{cumulative_trapezoid, trapezoid};

use crate::{Error, Result};

/// Left-sided Riemann-Liouville integral `aI_t^beta u` at the grid nodes.
///
/// Piecewise-linear product integration: exact whenever `u` is linear.
pub fn rl_integral_left(u: &TimeSeries, beta: FracOrder) -> Result<TimeSeries> {
    ConvolutionKernel::integral(beta, *u.grid(), Side::Left).apply(u)
}

/// Right-sided Riemann-Liouville integral `tI_b^beta u`.
pub fn rl_integral_right(u: &TimeSeries, beta: FracOrder) -> Result<TimeSeries> {
    ConvolutionKernel::integral(beta, *u.grid(), Side::Right).apply(u)
}

/// Left-sided Riemann-Liouville derivative `aD_t^alpha u`, `0 <= alpha < 1`.
///
/// Split as `u(a) / (Γ(1-alpha) (t-a)^alpha) + I^(1-alpha) u'`: the first
/// term is evaluated in closed form, the second by the L1 rule. `u_at_a`
/// replaces the first sample. At `t_0` the value is `0` when `u(a) = 0` and
/// `±inf` otherwise.
pub fn rl_derivative_left(u: &TimeSeries, alpha: FracOrder, u_at_a: f64) -> Result<TimeSeries> {
    alpha.require_derivative_range()?;
    if alpha.is_zero() {
        return Ok(u.clone());
    }
    check_endpoint_value(u_at_a)?;
    let grid = *u.grid();
    let kernel = ConvolutionKernel::derivative(alpha, grid, Side::Left)?;
    let mut samples = u.values().to_vec();
    samples[0] = u_at_a;
    let mut values = kernel.apply_left(&samples);
    if u_at_a != 0.0 {
        let a = alpha.value();
        let g = gamma_pos(1.0 - a);
        let t0 = grid.t_start();
        values[0] = f64::INFINITY.copysign(u_at_a);
        for (j, v) in values.iter_mut().enumerate().skip(1) {
            *v += u_at_a / (g * (grid.node(j) - t0).powf(a));
        }
    }
    Ok(TimeSeries::from_raw(grid, values))
}

/// Right-sided Riemann-Liouville derivative `tD_b^alpha u`, `0 <= alpha < 1`.
pub fn rl_derivative_right(u: &TimeSeries, alpha: FracOrder, u_at_b: f64) -> Result<TimeSeries> {
    Ok(rl_derivative_left(&u.reversed(), alpha, u_at_b)?.reversed())
}

/// Left-sided Caputo derivative `C aD_t^alpha u = aD_t^alpha [u - u(a)]`.
///
/// Zero on constants without rounding. Order zero is the identity on `u`.
pub fn caputo_derivative_left(
    u: &TimeSeries,
    alpha: FracOrder,
    u_at_a: f64,
) -> Result<TimeSeries> {
    alpha.require_derivative_range()?;
    if alpha.is_zero() {
        return Ok(u.clone());
    }
    check_endpoint_value(u_at_a)?;
    let kernel = ConvolutionKernel::derivative(alpha, *u.grid(), Side::Left)?;
    let mut samples = u.values().to_vec();
    samples[0] = u_at_a;
    Ok(TimeSeries::from_raw(*u.grid(), kernel.apply_left(&samples)))
}

/// Right-sided Caputo derivative `C tD_b^alpha u = tD_b^alpha [u - u(b)]`.
pub fn caputo_derivative_right(
    u: &TimeSeries,
    alpha: FracOrder,
    u_at_b: f64,
) -> Result<TimeSeries> {
    Ok(caputo_derivative_left(&u.reversed(), alpha, u_at_b)?.reversed())
}

/// Left integral of the zero-extended piecewise-linear interpolant of `u`,
/// evaluated at a point `t >= t_end` beyond the grid.
pub fn rl_integral_left_beyond(u: &TimeSeries, beta: FracOrder, t: f64) -> Result<f64> {
    let grid = u.grid();
    if !(t >= grid.t_end()) || !t.is_finite() {
        return Err(Error::Domain(format!(
            "evaluation point {t} must lie at or beyond the grid end {}",
            grid.t_end()
        )));
    }
    if beta.is_zero() {
        return Ok(if t == grid.t_end() { u.last() } else { 0.0 });
    }
    let b = beta.value();
    let h = grid.dt();
    let vals = u.values();
    let mut acc = 0.0;
    for k in 0..grid.n_steps() {
        let d1 = t - grid.node(k + 1);
        let d0 = d1 + h;
        let (f1, f2) = if d1 > 0.0 {
            let ratio = (h / d1).ln_1p();
            (
                d1.powf(b) * (b * ratio).exp_m1() / b,
                d1.powf(b + 1.0) * ((b + 1.0) * ratio).exp_m1() / (b + 1.0),
            )
        } else {
            (d0.powf(b) / b, d0.powf(b + 1.0) / (b + 1.0))
        };
        let w_left = (f2 - d1 * f1) / h;
        let w_right = (d0 * f1 - f2) / h;
        acc += w_left * vals[k] + w_right * vals[k + 1];
    }
    Ok(acc / gamma_pos(b))
}

fn check_endpoint_value(v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Data(format!("endpoint value must be finite, got {v}")))
    }
}
