//! Galerkin discretization in space on `(0, L)` with homogeneous Dirichlet
//! conditions.
//!
//! The semidiscrete system for coefficients `d(t)` reads
//!
//! ```text
//! M d'' + V C D_t^alpha d + K d = F(t),   d(0) = c,   d'(0) = d0
//! M_ij = (rho w_j, w_i),  K_ij = (a w_j', w_i'),  V_ij = (b w_j', w_i')
//! F_i(t) = <f(t), w_i>
//! ```
//!
//! Forcing is given as `f = source + d/dx flux`, so that
//! `<f, w> = (source, w) - (flux, w')`. Pointwise sources use a zero flux.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::fracops::{FracOrder, TimeGrid};
use crate::{Error, Result};

/// A scalar field on `(0, L)`.
pub type Field = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A scalar field on `(0, L) x (0, T)`, called as `f(x, t)`.
pub type SpaceTimeField = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Wraps a closure as a [`Field`].
pub fn field(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Field {
    Arc::new(f)
}

/// Wraps a closure as a [`SpaceTimeField`].
pub fn space_time_field(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> SpaceTimeField {
    Arc::new(f)
}

/// Density, elastic and viscous coefficients with their ellipticity bounds.
///
/// With `classical_limit` set the viscous term is dropped (`V = 0`) and the
/// bounds on `b` are not checked.
#[derive(Clone)]
pub struct MaterialModel {
    pub rho: Field,
    pub a_coef: Field,
    pub b_coef: Field,
    pub nu: f64,
    pub rho0: f64,
    pub classical_limit: bool,
}

impl MaterialModel {
    /// Constant coefficients.
    pub fn uniform(rho: f64, a: f64, b: f64, nu: f64, rho0: f64) -> Self {
        Self {
            rho: field(move |_| rho),
            a_coef: field(move |_| a),
            b_coef: field(move |_| b),
            nu,
            rho0,
            classical_limit: false,
        }
    }
}

impl fmt::Debug for MaterialModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MaterialModel")
            .field("nu", &self.nu)
            .field("rho0", &self.rho0)
            .field("classical_limit", &self.classical_limit)
            .finish_non_exhaustive()
    }
}

/// `f = source + d/dx flux`.
#[derive(Clone)]
pub struct Forcing {
    pub source: SpaceTimeField,
    pub flux: Option<SpaceTimeField>,
}

impl Forcing {
    pub fn zero() -> Self {
        Self::pointwise(space_time_field(|_, _| 0.0))
    }

    pub fn pointwise(source: SpaceTimeField) -> Self {
        Self { source, flux: None }
    }
}

/// Full problem data.
#[derive(Clone)]
pub struct ProblemSpec {
    pub length: f64,
    pub horizon: f64,
    pub alpha: FracOrder,
    pub material: MaterialModel,
    pub forcing: Forcing,
    pub initial_displacement: Field,
    pub initial_velocity: Field,
}

impl ProblemSpec {
    /// Zero forcing and zero initial data.
    pub fn homogeneous(length: f64, horizon: f64, alpha: FracOrder, material: MaterialModel) -> Self {
        Self {
            length,
            horizon,
            alpha,
            material,
            forcing: Forcing::zero(),
            initial_displacement: field(|_| 0.0),
            initial_velocity: field(|_| 0.0),
        }
    }
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("length", &self.length)
            .field("horizon", &self.horizon)
            .field("alpha", &self.alpha)
            .field("material", &self.material)
            .finish_non_exhaustive()
    }
}

/// Uniform partition of `[0, L]` into `n_cells` cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceGrid {
    length: f64,
    n_cells: usize,
}

impl SpaceGrid {
    pub fn new(length: f64, n_cells: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::Domain(format!("domain length must be positive, got {length}")));
        }
        if n_cells < 2 {
            return Err(Error::Configuration(format!(
                "space grid needs at least 2 cells, got {n_cells}"
            )));
        }
        Ok(Self { length, n_cells })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn h(&self) -> f64 {
        self.length / self.n_cells as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n_cells {
            self.length
        } else {
            i as f64 * self.h()
        }
    }

    /// Two-point Gauss nodes and weights on cell `e`.
    fn gauss2(&self, e: usize) -> [(f64, f64); 2] {
        let h = self.h();
        let mid = self.node(e) + 0.5 * h;
        let off = 0.5 * h / 3f64.sqrt();
        [(mid - off, 0.5 * h), (mid + off, 0.5 * h)]
    }

    /// Three-point Gauss nodes and weights on cell `e`.
    fn gauss3(&self, e: usize) -> [(f64, f64); 3] {
        let h = self.h();
        let mid = self.node(e) + 0.5 * h;
        let off = 0.5 * h * 0.6f64.sqrt();
        [
            (mid - off, h * 5.0 / 18.0),
            (mid, h * 8.0 / 18.0),
            (mid + off, h * 5.0 / 18.0),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    /// `w_k(x) = sqrt(2/L) sin(k π x / L)`, `k = 1..=m`.
    Sine,
    /// Hat functions on the interior nodes.
    P1,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GalerkinBasis {
    kind: BasisKind,
    m: usize,
    grid: SpaceGrid,
}

/// Builds a basis of dimension `m` on `grid`.
///
/// The sine basis needs 8 cells per wavelength of the highest mode
/// (`n_cells >= 4 m`); the P1 basis has one function per interior node, so
/// `m = n_cells - 1`.
pub fn build_basis(kind: BasisKind, m: usize, grid: SpaceGrid) -> Result<GalerkinBasis> {
    if m == 0 {
        return Err(Error::Configuration("basis dimension must be at least 1".into()));
    }
    match kind {
        BasisKind::Sine if grid.n_cells() < 4 * m => Err(Error::Configuration(format!(
            "{} cells under-resolve sine mode {m}; need at least {}",
            grid.n_cells(),
            4 * m
        ))),
        BasisKind::P1 if grid.n_cells() != m + 1 => Err(Error::Configuration(format!(
            "a P1 basis of dimension {m} needs {} cells, grid has {}",
            m + 1,
            grid.n_cells()
        ))),
        _ => Ok(GalerkinBasis { kind, m, grid }),
    }
}

impl GalerkinBasis {
    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn grid(&self) -> &SpaceGrid {
        &self.grid
    }

    /// Value of basis function `k` (zero-based) at `x`.
    pub fn value(&self, k: usize, x: f64) -> f64 {
        self.eval(k, x).0
    }

    /// Derivative of basis function `k` at `x`.
    pub fn derivative(&self, k: usize, x: f64) -> f64 {
        self.eval(k, x).1
    }

    fn eval(&self, k: usize, x: f64) -> (f64, f64) {
        let l = self.grid.length();
        match self.kind {
            BasisKind::Sine => {
                let c = (2.0 / l).sqrt();
                let w = (k + 1) as f64 * PI / l;
                (c * (w * x).sin(), c * w * (w * x).cos())
            }
            BasisKind::P1 => {
                let h = self.grid.h();
                let xi = self.grid.node(k + 1);
                let r = (x - xi) / h;
                if r.abs() >= 1.0 {
                    (0.0, 0.0)
                } else if r <= 0.0 {
                    (1.0 + r, 1.0 / h)
                } else {
                    (1.0 - r, -1.0 / h)
                }
            }
        }
    }

    /// Calls `f(k, w_k(x), w_k'(x))` for every basis function that does not
    /// vanish identically on cell `e`; `x` must lie in that cell.
    fn for_each_active(&self, e: usize, x: f64, mut f: impl FnMut(usize, f64, f64)) {
        match self.kind {
            BasisKind::Sine => {
                for k in 0..self.m {
                    let (v, d) = self.eval(k, x);
                    f(k, v, d);
                }
            }
            BasisKind::P1 => {
                let h = self.grid.h();
                let r = (x - self.grid.node(e)) / h;
                if e >= 1 {
                    f(e - 1, 1.0 - r, -1.0 / h);
                }
                if e < self.m {
                    f(e, r, 1.0 / h);
                }
            }
        }
    }

    /// `(φ, w_k)` and `(ψ, w_k')` for every `k`, two-point Gauss per cell.
    pub fn project_load(&self, phi: impl Fn(f64) -> f64, psi: Option<&dyn Fn(f64) -> f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.m);
        for e in 0..self.grid.n_cells() {
            for (x, w) in self.grid.gauss2(e) {
                let pv = phi(x);
                let qv = psi.map_or(0.0, |q| q(x));
                self.for_each_active(e, x, |k, v, d| out[k] += w * (pv * v + qv * d));
            }
        }
        out
    }

    /// Weighted Gram-type matrix `∫ coef * D(w_j) * D(w_i)` with `D` the
    /// value (`derivative = false`) or the derivative.
    fn weighted_matrix(&self, coef: &dyn Fn(f64) -> f64, derivative: bool) -> DMatrix<f64> {
        let m = self.m;
        let mut mat = DMatrix::zeros(m, m);
        let mut active: Vec<(usize, f64)> = Vec::with_capacity(m);
        for e in 0..self.grid.n_cells() {
            for (x, w) in self.grid.gauss2(e) {
                let c = coef(x) * w;
                active.clear();
                self.for_each_active(e, x, |k, v, d| active.push((k, if derivative { d } else { v })));
                for &(i, vi) in &active {
                    for &(j, vj) in &active {
                        mat[(i, j)] += c * vi * vj;
                    }
                }
            }
        }
        symmetrize(&mut mat);
        mat
    }

    /// Evaluates `Σ_k coeffs_k w_k(x)`.
    pub fn synthesize(&self, coeffs: &DVector<f64>, x: f64) -> f64 {
        (0..self.m).map(|k| coeffs[k] * self.value(k, x)).sum()
    }

    /// `‖Σ_k coeffs_k w_k - f‖_{L²(0,L)}` by three-point Gauss per cell.
    pub fn l2_distance(&self, coeffs: &DVector<f64>, f: impl Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for e in 0..self.grid.n_cells() {
            for (x, w) in self.grid.gauss3(e) {
                let mut v = 0.0;
                self.for_each_active(e, x, |k, b, _| v += coeffs[k] * b);
                acc += w * (v - f(x)).powi(2);
            }
        }
        acc.sqrt()
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Matrix form of the semidiscrete problem on one time grid.
#[derive(Clone, Debug)]
pub struct GalerkinSystem {
    pub alpha: FracOrder,
    pub tgrid: TimeGrid,
    /// Density-weighted mass matrix.
    pub mass: DMatrix<f64>,
    /// Elastic stiffness.
    pub stiffness: DMatrix<f64>,
    /// Viscous stiffness.
    pub viscous: DMatrix<f64>,
    /// Unweighted Gram matrix `(w_j, w_i)`, the L² metric on coefficients.
    pub gram: DMatrix<f64>,
    /// Unweighted stiffness `(w_j', w_i')`, the H¹₀ metric on coefficients.
    pub h1_metric: DMatrix<f64>,
    /// `F(t_j)` for every time node.
    pub loads: Vec<DVector<f64>>,
    /// Coefficients of the projected initial displacement.
    pub c: DVector<f64>,
    /// Coefficients of the projected initial velocity.
    pub d0: DVector<f64>,
    pub basis: Option<GalerkinBasis>,
}

impl GalerkinSystem {
    /// A system given directly by its matrices. The L² and H¹₀ metrics default
    /// to `mass` and `stiffness`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_matrices(
        alpha: FracOrder,
        tgrid: TimeGrid,
        mass: DMatrix<f64>,
        stiffness: DMatrix<f64>,
        viscous: DMatrix<f64>,
        loads: Vec<DVector<f64>>,
        c: DVector<f64>,
        d0: DVector<f64>,
    ) -> Result<Self> {
        let m = mass.nrows();
        let square = |x: &DMatrix<f64>| x.nrows() == m && x.ncols() == m;
        if !square(&mass) || !square(&stiffness) || !square(&viscous) {
            return Err(Error::Shape(format!("system matrices must all be {m} x {m}")));
        }
        if loads.len() != tgrid.len() || loads.iter().any(|f| f.len() != m) {
            return Err(Error::Shape(format!(
                "expected {} load vectors of length {m}",
                tgrid.len()
            )));
        }
        if c.len() != m || d0.len() != m {
            return Err(Error::Shape(format!("initial coefficient vectors must have length {m}")));
        }
        Ok(Self {
            alpha,
            tgrid,
            gram: mass.clone(),
            h1_metric: stiffness.clone(),
            mass,
            stiffness,
            viscous,
            loads,
            c,
            d0,
            basis: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.mass.nrows()
    }

    /// True when forcing and both initial vectors vanish identically.
    pub fn has_zero_data(&self) -> bool {
        self.c.iter().all(|&v| v == 0.0)
            && self.d0.iter().all(|&v| v == 0.0)
            && self.loads.iter().all(|f| f.iter().all(|&v| v == 0.0))
    }
}

/// Outcome of one hypothesis check.
#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    /// Location `x` of the worst violation, if any.
    pub witness: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| !c.passed)
    }
}

const HYPOTHESIS_SAMPLES: usize = 2048;

/// Samples coefficients and data on a fine uniform set of points and checks
/// ellipticity (H1), density bounds (H2) and data admissibility (H3).
pub fn verify_hypotheses(spec: &ProblemSpec) -> HypothesisReport {
    let l = spec.length;
    let xs: Vec<f64> = (0..=HYPOTHESIS_SAMPLES)
        .map(|i| l * i as f64 / HYPOTHESIS_SAMPLES as f64)
        .collect();
    let mat = &spec.material;
    let mut checks = Vec::new();

    let mut h1 = vec![("a", &mat.a_coef)];
    if !mat.classical_limit {
        h1.push(("b", &mat.b_coef));
    }
    checks.push(bound_check("H1", &h1, mat.nu, &xs));
    checks.push(bound_check("H2", &[("rho", &mat.rho)], mat.rho0, &xs));
    checks.push(data_check(spec, &xs));
    HypothesisReport { checks }
}

fn bound_check(name: &'static str, fields: &[(&str, &Field)], bound: f64, xs: &[f64]) -> HypothesisCheck {
    if !(bound > 0.0 && bound <= 1.0) {
        return HypothesisCheck {
            name,
            passed: false,
            detail: format!("bound must lie in (0, 1], got {bound}"),
            witness: None,
        };
    }
    let (lo, hi) = (bound, 1.0 / bound);
    for (label, f) in fields {
        let mut worst: Option<(f64, f64, f64)> = None;
        for &x in xs {
            let v = f(x);
            let excess = if v.is_nan() {
                f64::INFINITY
            } else {
                (lo - v).max(v - hi)
            };
            if excess > 0.0 && worst.is_none_or(|(e, _, _)| excess > e) {
                worst = Some((excess, x, v));
            }
        }
        if let Some((_, x, v)) = worst {
            return HypothesisCheck {
                name,
                passed: false,
                detail: format!("{label}({x}) = {v} outside [{lo}, {hi}]"),
                witness: Some(x),
            };
        }
    }
    HypothesisCheck {
        name,
        passed: true,
        detail: format!("coefficients within [{lo}, {hi}]"),
        witness: None,
    }
}

fn data_check(spec: &ProblemSpec, xs: &[f64]) -> HypothesisCheck {
    let fail = |detail: String, witness: Option<f64>| HypothesisCheck {
        name: "H3",
        passed: false,
        detail,
        witness,
    };
    let g = &spec.initial_displacement;
    let h = &spec.initial_velocity;
    let mut g_max: f64 = 0.0;
    for &x in xs {
        let (gv, hv) = (g(x), h(x));
        if !gv.is_finite() || !hv.is_finite() {
            return fail(format!("initial data not finite at x = {x}"), Some(x));
        }
        g_max = g_max.max(gv.abs());
    }
    let tol = 1e-12 * g_max.max(1.0);
    for x in [0.0, spec.length] {
        if g(x).abs() > tol {
            return fail(
                format!("initial displacement g({x}) = {} violates the boundary condition", g(x)),
                Some(x),
            );
        }
    }
    let times: Vec<f64> = (0..=32).map(|j| spec.horizon * j as f64 / 32.0).collect();
    for &t in &times {
        for &x in xs.iter().step_by(8) {
            let s = (spec.forcing.source)(x, t);
            let q = spec.forcing.flux.as_ref().map_or(0.0, |f| f(x, t));
            if !s.is_finite() || !q.is_finite() {
                return fail(format!("forcing not finite at (x, t) = ({x}, {t})"), Some(x));
            }
        }
    }
    HypothesisCheck {
        name: "H3",
        passed: true,
        detail: "data finite and compatible with the boundary conditions".into(),
        witness: None,
    }
}

/// Assembles matrices, loads at every node of `tgrid` and projected initial
/// data. The initial data are L² projections onto the span of the basis.
pub fn assemble(spec: &ProblemSpec, basis: &GalerkinBasis, tgrid: TimeGrid) -> Result<GalerkinSystem> {
    spec.alpha.require_pde_range()?;
    if (spec.length - basis.grid().length()).abs() > 1e-12 * spec.length {
        return Err(Error::Shape(format!(
            "basis built on length {}, problem has length {}",
            basis.grid().length(),
            spec.length
        )));
    }
    if (tgrid.t_start() != 0.0) || (tgrid.t_end() - spec.horizon).abs() > 1e-12 * spec.horizon {
        return Err(Error::Shape(format!(
            "time grid must span [0, {}], got [{}, {}]",
            spec.horizon,
            tgrid.t_start(),
            tgrid.t_end()
        )));
    }
    let report = verify_hypotheses(spec);
    if let Some(bad) = report.first_failure() {
        if bad.detail.contains("not finite") {
            return Err(Error::Data(bad.detail.clone()));
        }
        return Err(Error::Hypothesis {
            hypothesis: bad.name,
            detail: bad.detail.clone(),
        });
    }
    let mat = &spec.material;
    let one = |_: f64| 1.0;
    let mass = basis.weighted_matrix(&*mat.rho, false);
    let stiffness = basis.weighted_matrix(&*mat.a_coef, true);
    let viscous = if mat.classical_limit {
        DMatrix::zeros(basis.dim(), basis.dim())
    } else {
        basis.weighted_matrix(&*mat.b_coef, true)
    };
    let gram = basis.weighted_matrix(&one, false);
    let h1_metric = basis.weighted_matrix(&one, true);
    check_finite(&[&mass, &stiffness, &viscous])?;

    let forcing = &spec.forcing;
    let loads: Vec<DVector<f64>> = (0..tgrid.len())
        .into_par_iter()
        .map(|j| {
            let t = tgrid.node(j);
            let src = |x: f64| (forcing.source)(x, t);
            match &forcing.flux {
                Some(flux) => {
                    let neg_flux = |x: f64| -flux(x, t);
                    basis.project_load(src, Some(&neg_flux))
                }
                None => basis.project_load(src, None),
            }
        })
        .collect();
    if loads.iter().any(|f| f.iter().any(|v| !v.is_finite())) {
        return Err(Error::Data("load vector contains non-finite entries".into()));
    }

    let gram_chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Assembly("Gram matrix is not positive definite".into()))?;
    let c = gram_chol.solve(&basis.project_load(&*spec.initial_displacement, None));
    let d0 = gram_chol.solve(&basis.project_load(&*spec.initial_velocity, None));

    Ok(GalerkinSystem {
        alpha: spec.alpha,
        tgrid,
        mass,
        stiffness,
        viscous,
        gram,
        h1_metric,
        loads,
        c,
        d0,
        basis: Some(*basis),
    })
}

fn check_finite(ms: &[&DMatrix<f64>]) -> Result<()> {
    if ms.iter().any(|m| m.iter().any(|v| !v.is_finite())) {
        return Err(Error::Data("assembled matrix contains non-finite entries".into()));
    }
    Ok(())
}
