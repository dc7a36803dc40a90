//! Product-integration weights for fractional integrals and derivatives.
//!
//! Integrals of order `beta > 0` integrate the kernel `(t - s)^(beta - 1) / Γ(beta)`
//! exactly against the piecewise-linear interpolant of the samples:
//!
//! ```text
//! (I^beta u)(t_j) = dt^beta / Γ(beta + 2) * ( s_j u_0 + sum_{k=1..j} a_{j-k} u_k )
//! a_0 = 1,  a_l = (l+1)^(beta+1) - 2 l^(beta+1) + (l-1)^(beta+1)
//! s_j = (j-1)^(beta+1) - (j-1-beta) j^beta
//! ```
//!
//! Derivatives of order `alpha` in `(0, 1)` use the same idea on the
//! piecewise-constant derivative of the interpolant (the L1 rule):
//!
//! ```text
//! (I^(1-alpha) u')(t_j) = dt^(-alpha) / Γ(2 - alpha) * sum_{k=1..j} b_{j-k} (u_k - u_{k-1})
//! b_l = (l+1)^(1-alpha) - l^(1-alpha)
//! ```
//!
//! Weight differences are evaluated through `expm1`/`ln_1p` so that they keep
//! full relative accuracy for large lags.

use std::io::Write;

use super::gamma::gamma_pos;
use super::grid::{FracOrder, TimeGrid, TimeSeries};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Integral,
    Derivative,
}

/// Lower-triangular (left) or upper-triangular (right) quadrature weights for
/// one fractional operator on one grid.
///
/// For derivatives the kernel holds only the regular part `I^(1-alpha) u'`;
/// the singular term `u(a) / (Γ(1-alpha) (t-a)^alpha)` is added analytically
/// by [`super::rl_derivative_left`].
#[derive(Clone, Debug)]
pub struct ConvolutionKernel {
    order: FracOrder,
    side: Side,
    kind: OperatorKind,
    grid: TimeGrid,
    scale: f64,
    toeplitz: Vec<f64>,
    start: Vec<f64>,
}

impl ConvolutionKernel {
    pub fn integral(order: FracOrder, grid: TimeGrid, side: Side) -> Self {
        let n = grid.n_steps();
        let beta = order.value();
        if order.is_zero() {
            let mut toeplitz = vec![0.0; n + 1];
            toeplitz[0] = 1.0;
            return Self {
                order,
                side,
                kind: OperatorKind::Integral,
                grid,
                scale: 1.0,
                toeplitz,
                start: vec![0.0; n + 1],
            };
        }
        let p = beta + 1.0;
        let toeplitz = (0..=n).map(|l| second_difference(p, l)).collect();
        let start = (0..=n).map(|j| start_weight(beta, j)).collect();
        Self {
            order,
            side,
            kind: OperatorKind::Integral,
            grid,
            scale: grid.dt().powf(beta) / gamma_pos(beta + 2.0),
            toeplitz,
            start,
        }
    }

    pub fn derivative(order: FracOrder, grid: TimeGrid, side: Side) -> Result<Self> {
        order.require_derivative_range()?;
        let n = grid.n_steps();
        let alpha = order.value();
        if order.is_zero() {
            return Ok(Self {
                order,
                side,
                kind: OperatorKind::Derivative,
                grid,
                scale: 1.0,
                toeplitz: Vec::new(),
                start: Vec::new(),
            });
        }
        let q = 1.0 - alpha;
        let toeplitz = (0..=n).map(|l| first_difference(q, l)).collect();
        Ok(Self {
            order,
            side,
            kind: OperatorKind::Derivative,
            grid,
            scale: grid.dt().powf(-alpha) / gamma_pos(2.0 - alpha),
            toeplitz,
            start: Vec::new(),
        })
    }

    pub fn order(&self) -> FracOrder {
        self.order
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Weight `w_{j,k}` such that `(K u)(t_j) = sum_k w_{j,k} u(t_k)`.
    pub fn weight(&self, j: usize, k: usize) -> f64 {
        let n = self.grid.n_steps();
        match self.side {
            Side::Left => self.left_weight(j, k),
            Side::Right => self.left_weight(n - j, n - k),
        }
    }

    fn left_weight(&self, j: usize, k: usize) -> f64 {
        if k > j {
            return 0.0;
        }
        if self.order.is_zero() {
            return if j == k { 1.0 } else { 0.0 };
        }
        match self.kind {
            OperatorKind::Integral => {
                if k == 0 {
                    self.scale * self.start[j]
                } else {
                    self.scale * self.toeplitz[j - k]
                }
            }
            OperatorKind::Derivative => {
                if j == 0 {
                    0.0
                } else if k == j {
                    self.scale * self.toeplitz[0]
                } else if k == 0 {
                    -self.scale * self.toeplitz[j - 1]
                } else {
                    self.scale * (self.toeplitz[j - k] - self.toeplitz[j - k - 1])
                }
            }
        }
    }

    /// Applies the kernel to a series on the same grid.
    pub fn apply(&self, u: &TimeSeries) -> Result<TimeSeries> {
        if *u.grid() != self.grid {
            return Err(Error::Shape(format!(
                "kernel built for {:?}, series on {:?}",
                self.grid,
                u.grid()
            )));
        }
        let values = match self.side {
            Side::Left => self.apply_left(u.values()),
            Side::Right => {
                let mut rev = u.values().to_vec();
                rev.reverse();
                let mut out = self.apply_left(&rev);
                out.reverse();
                out
            }
        };
        Ok(TimeSeries::from_raw(self.grid, values))
    }

    pub(crate) fn apply_left(&self, u: &[f64]) -> Vec<f64> {
        if self.order.is_zero() {
            return u.to_vec();
        }
        let n = u.len() - 1;
        let mut out = vec![0.0; n + 1];
        match self.kind {
            OperatorKind::Integral => {
                for (j, o) in out.iter_mut().enumerate() {
                    let mut acc = self.start[j] * u[0];
                    for k in 1..=j {
                        acc += self.toeplitz[j - k] * u[k];
                    }
                    *o = self.scale * acc;
                }
            }
            OperatorKind::Derivative => {
                let du: Vec<f64> = u.windows(2).map(|w| w[1] - w[0]).collect();
                for (j, o) in out.iter_mut().enumerate().skip(1) {
                    let mut acc = 0.0;
                    for k in 1..=j {
                        acc += self.toeplitz[j - k] * du[k - 1];
                    }
                    *o = self.scale * acc;
                }
            }
        }
        out
    }

    /// Dense weight matrix as CSV: row `j`, column `k`, zeros outside the band.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let n = self.grid.len();
        let mut w = csv::Writer::from_writer(writer);
        let header: Vec<String> = std::iter::once("j".to_string())
            .chain((0..n).map(|k| format!("k{k}")))
            .collect();
        w.write_record(&header)?;
        for j in 0..n {
            let mut row = vec![j.to_string()];
            row.extend((0..n).map(|k| crate::export::fmt_f64(self.weight(j, k))));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `(l+1)^p - 2 l^p + (l-1)^p` (with the `l = 0` entry equal to 1).
fn second_difference(p: f64, l: usize) -> f64 {
    match l {
        0 => 1.0,
        1 => 2f64.powf(p) - 2.0,
        _ => {
            let lf = l as f64;
            let x = 1.0 / lf;
            lf.powf(p) * ((p * x.ln_1p()).exp_m1() + (p * (-x).ln_1p()).exp_m1())
        }
    }
}

/// `(l+1)^q - l^q`.
fn first_difference(q: f64, l: usize) -> f64 {
    if l == 0 {
        return 1.0;
    }
    let lf = l as f64;
    lf.powf(q) * (q * (1.0 / lf).ln_1p()).exp_m1()
}

/// `(j-1)^(beta+1) - (j-1-beta) j^beta`.
fn start_weight(beta: f64, j: usize) -> f64 {
    match j {
        0 => 0.0,
        1 => beta,
        _ => {
            let p = beta + 1.0;
            let jf = j as f64;
            let x = 1.0 / jf;
            jf.powf(p) * ((p * (-x).ln_1p()).exp_m1() + p * x)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_second(p: f64, l: usize) -> f64 {
        let l = l as f64;
        (l + 1.0).powf(p) - 2.0 * l.powf(p) + (l - 1.0).powf(p)
    }

    #[test]
    fn stable_weights_agree_with_direct_formulas_for_small_lags() {
        for &p in &[1.25, 1.5, 2.0, 2.75] {
            for l in 1..20 {
                let a = second_difference(p, l);
                let b = naive_second(p, l);
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "p={p} l={l}");
            }
        }
        for j in 1..20 {
            let beta = 0.4;
            let jf = j as f64;
            let direct = (jf - 1.0).powf(beta + 1.0) - (jf - 1.0 - beta) * jf.powf(beta);
            assert!((start_weight(beta, j) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn integer_order_two_weights_are_linear_in_lag() {
        // beta = 2: a_l = 6 l exactly
        for l in 1..50 {
            assert!((second_difference(3.0, l) - 6.0 * l as f64).abs() < 1e-9 * l as f64);
        }
    }

    #[test]
    fn derivative_weights_sum_to_zero_per_row() {
        let g = TimeGrid::new(0.0, 1.0, 16).unwrap();
        let k = ConvolutionKernel::derivative(FracOrder::new(0.4).unwrap(), g, Side::Left).unwrap();
        for j in 0..g.len() {
            let s: f64 = (0..g.len()).map(|c| k.weight(j, c)).sum();
            assert!(s.abs() < 1e-12, "row {j}: {s}");
        }
    }

    #[test]
    fn weights_match_application() {
        let g = TimeGrid::new(0.0, 1.0, 12).unwrap();
        let u = TimeSeries::from_fn(g, |t| (3.0 * t).sin() + t * t).unwrap();
        for side in [Side::Left, Side::Right] {
            let kernels = [
                ConvolutionKernel::integral(FracOrder::new(0.7).unwrap(), g, side),
                ConvolutionKernel::derivative(FracOrder::new(0.3).unwrap(), g, side).unwrap(),
            ];
            for ker in kernels {
                let applied = ker.apply(&u).unwrap();
                for j in 0..g.len() {
                    let dense: f64 = (0..g.len()).map(|k| ker.weight(j, k) * u.values()[k]).sum();
                    assert!((dense - applied.values()[j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn csv_export_has_dense_rows() {
        let g = TimeGrid::new(0.0, 1.0, 3).unwrap();
        let k = ConvolutionKernel::integral(FracOrder::new(0.5).unwrap(), g, Side::Left);
        let mut buf = Vec::new();
        k.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "j,k0,k1,k2,k3");
        assert!(lines[1].ends_with(",0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0"));
    }
}
