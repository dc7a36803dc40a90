//! Grid-level residuals of the classical fractional-calculus identities.
//!
//! Each check returns a nonnegative residual that tends to zero under grid
//! refinement for admissible inputs. Orders passed as `alpha` are the PDE
//! order; the identities act with `alpha / 2` where the half order appears.

use super::{
    caputo_derivative_left, gamma_pos, rl_derivative_left, rl_derivative_right,
    rl_integral_left, rl_integral_right, FracOrder, TimeGrid, TimeSeries,
};
use crate::{Error, Result};

/// Max-norm of `I^beta I^gamma u - I^(beta+gamma) u`.
pub fn semigroup_check(u: &TimeSeries, beta: FracOrder, gamma: FracOrder) -> Result<f64> {
    let composed = rl_integral_left(&rl_integral_left(u, gamma)?, beta)?;
    let sum = FracOrder::new(beta.value() + gamma.value())?;
    let direct = rl_integral_left(u, sum)?;
    composed.max_abs_diff(&direct)
}

/// Max-norm of `I^(alpha/2) D^(alpha/2) u - u` for `u(a) = 0`.
pub fn inverse_check(u: &TimeSeries, alpha: FracOrder) -> Result<f64> {
    require_vanishing_start(u)?;
    let half = alpha.half();
    let d = rl_derivative_left(u, half, 0.0)?;
    rl_integral_left(&d, half)?.max_abs_diff(u)
}

/// Max-norm of `D^(alpha/2) D^(alpha/2) u - D^alpha u` for `u(a) = 0`.
pub fn split_derivative_check(u: &TimeSeries, alpha: FracOrder) -> Result<f64> {
    require_vanishing_start(u)?;
    let half = alpha.half();
    let inner = rl_derivative_left(u, half, 0.0)?;
    let twice = rl_derivative_left(&inner, half, 0.0)?;
    let direct = rl_derivative_left(u, alpha, 0.0)?;
    twice.max_abs_diff(&direct)
}

/// `|∫ (aD^(alpha/2) u) v - ∫ u (tD_b^(alpha/2) v)|` for `u`, `v` vanishing at
/// both endpoints.
pub fn derivative_by_parts_check(u: &TimeSeries, v: &TimeSeries, alpha: FracOrder) -> Result<f64> {
    u.check_same_grid(v)?;
    for s in [u, v] {
        require_vanishing_start(s)?;
        require_vanishing_start(&s.reversed())?;
    }
    let half = alpha.half();
    let du = rl_derivative_left(u, half, 0.0)?;
    let dv = rl_derivative_right(v, half, 0.0)?;
    Ok((du.dot_trapezoid(v)? - u.dot_trapezoid(&dv)?).abs())
}

/// `|∫ (aI^(alpha/2) u) v - ∫ u (tI_b^(alpha/2) v)|`.
pub fn integral_by_parts_check(u: &TimeSeries, v: &TimeSeries, alpha: FracOrder) -> Result<f64> {
    u.check_same_grid(v)?;
    let half = alpha.half();
    let iu = rl_integral_left(u, half)?;
    let iv = rl_integral_right(v, half)?;
    Ok((iu.dot_trapezoid(v)? - u.dot_trapezoid(&iv)?).abs())
}

/// Constant rules on `grid`: returns the largest absolute deviation of
/// `aD^alpha 1` from `1 / (Γ(1-alpha) (t-a)^alpha)` over nodes `t_1..t_n`,
/// and the largest magnitude of the Caputo derivative of 1.
pub fn constant_rule_check(grid: TimeGrid, alpha: FracOrder) -> Result<(f64, f64)> {
    let one = TimeSeries::from_fn(grid, |_| 1.0)?;
    let rl = rl_derivative_left(&one, alpha, 1.0)?;
    let caputo = caputo_derivative_left(&one, alpha, 1.0)?;
    let a = alpha.value();
    let g = if alpha.is_zero() { 1.0 } else { gamma_pos(1.0 - a) };
    let mut dev: f64 = 0.0;
    for j in 1..grid.len() {
        let exact = if alpha.is_zero() {
            1.0
        } else {
            1.0 / (g * (grid.node(j) - grid.t_start()).powf(a))
        };
        dev = dev.max((rl.values()[j] - exact).abs());
    }
    let caputo_dev = if alpha.is_zero() {
        caputo.max_abs_diff(&one)?
    } else {
        caputo.max_abs()
    };
    Ok((dev, caputo_dev))
}

fn require_vanishing_start(u: &TimeSeries) -> Result<()> {
    let tol = 1e-12 * u.max_abs().max(f64::MIN_POSITIVE);
    if u.first().abs() > tol {
        return Err(Error::Precondition(format!(
            "identity requires u to vanish at the endpoint, found {}",
            u.first()
        )));
    }
    Ok(())
}
