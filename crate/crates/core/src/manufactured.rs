//! Closed-form benchmark `u*(x, t) = sin(π x / L) (1 + t²)`.
//!
//! The forcing is obtained by applying the strong operator to `u*` with
//! `C D_t^alpha (1 + t²) = 2 t^(2-alpha) / Γ(3-alpha)`, and is passed as a
//! source plus the divergence of a flux so that no derivative of the
//! coefficient fields is needed.

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::assembly::{field, space_time_field, Forcing, GalerkinBasis, MaterialModel, ProblemSpec};
use crate::fracops::{gamma, FracOrder};
use crate::Result;

#[derive(Clone, Debug)]
pub struct ManufacturedSolution {
    pub length: f64,
    pub horizon: f64,
    pub alpha: FracOrder,
    pub material: MaterialModel,
}

impl ManufacturedSolution {
    pub fn new(length: f64, horizon: f64, alpha: FracOrder, material: MaterialModel) -> Self {
        Self {
            length,
            horizon,
            alpha,
            material,
        }
    }

    pub fn displacement(&self, x: f64, t: f64) -> f64 {
        (PI * x / self.length).sin() * (1.0 + t * t)
    }

    pub fn velocity(&self, x: f64, t: f64) -> f64 {
        (PI * x / self.length).sin() * 2.0 * t
    }

    /// Problem data whose exact solution is `u*`.
    pub fn spec(&self) -> Result<ProblemSpec> {
        let alpha = self.alpha.require_pde_range()?;
        let l = self.length;
        let k = PI / l;
        let g = gamma(3.0 - alpha.value())?;
        let p = 2.0 - alpha.value();
        let viscous = !self.material.classical_limit;
        let rho = self.material.rho.clone();
        let a = self.material.a_coef.clone();
        let b = self.material.b_coef.clone();
        let source = space_time_field(move |x, _| 2.0 * rho(x) * (k * x).sin());
        let flux = space_time_field(move |x, t| {
            let ux = k * (k * x).cos();
            let frac = if viscous && t > 0.0 { 2.0 * t.powf(p) / g } else { 0.0 };
            let visc = if viscous { b(x) * ux * frac } else { 0.0 };
            -(visc + a(x) * ux * (1.0 + t * t))
        });
        Ok(ProblemSpec {
            length: l,
            horizon: self.horizon,
            alpha,
            material: self.material.clone(),
            forcing: Forcing {
                source,
                flux: Some(flux),
            },
            initial_displacement: field(move |x| (k * x).sin()),
            initial_velocity: field(|_| 0.0),
        })
    }

    /// `‖u_m(t) - u*(t)‖_{L²(0,L)}` for coefficients `coeffs` at time `t`.
    pub fn l2_error(&self, basis: &GalerkinBasis, coeffs: &DVector<f64>, t: f64) -> f64 {
        basis.l2_distance(coeffs, |x| self.displacement(x, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, build_basis, BasisKind, SpaceGrid};
    use crate::fracops::TimeGrid;
    use crate::volterra::{solve, SolverConfig};

    #[test]
    fn sine_galerkin_reproduces_the_benchmark() {
        let mat = MaterialModel::uniform(1.0, 1.0, 1.0, 0.5, 0.5);
        let ms = ManufacturedSolution::new(1.0, 1.0, FracOrder::new(0.5).unwrap(), mat);
        let spec = ms.spec().unwrap();
        let basis = build_basis(BasisKind::Sine, 4, SpaceGrid::new(1.0, 32).unwrap()).unwrap();
        let mut errs = Vec::new();
        for n in [32, 64] {
            let sys = assemble(&spec, &basis, TimeGrid::new(0.0, 1.0, n).unwrap()).unwrap();
            let h = solve(&sys, &SolverConfig::default()).unwrap();
            let last = h.coeffs.column(n).into_owned();
            errs.push(ms.l2_error(&basis, &last, 1.0));
        }
        assert!(errs[0] < 1e-2, "{errs:?}");
        assert!(errs[1] < errs[0] / 1.8, "{errs:?}");
    }
}
