//! TOML run configuration.
//!
//! ```toml
//! [problem]
//! length = 1.0
//! horizon = 1.0
//! alpha = 0.5
//! rho = "1"
//! a = "1 + x"
//! b = "1"
//! nu = 0.5
//! rho0 = 0.5
//! source = "sin(PI*x) * t"
//! initial_displacement = "sin(PI*x)"
//! initial_velocity = "0"
//!
//! [discretization]
//! basis = "sine"
//! m = 8
//! cells = 64
//! n_steps = 256
//! ```
//!
//! Field expressions use `x` (and `t` for the forcing) with the usual
//! arithmetic operators, `^`, `PI`, `E` and functions such as `sin`, `exp`,
//! `sqrt`, `abs`, `ln`. Every semantic error names the offending line.

use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use exmex::prelude::*;
use exmex::FlatEx;
use serde::Deserialize;
use toml::Spanned;

use fracvisco_core::assembly::{
    build_basis, field, space_time_field, BasisKind, Forcing, GalerkinBasis, MaterialModel,
    ProblemSpec, SpaceGrid,
};
use fracvisco_core::fracops::{FracOrder, TimeGrid};
use fracvisco_core::volterra::{Scheme, SolverConfig};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: RawProblem,
    discretization: RawDiscretization,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    converge: RawConverge,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    length: Spanned<f64>,
    horizon: Spanned<f64>,
    alpha: Spanned<f64>,
    rho: Spanned<String>,
    a: Spanned<String>,
    b: Spanned<String>,
    nu: Spanned<f64>,
    rho0: Spanned<f64>,
    #[serde(default)]
    classical_limit: bool,
    #[serde(default)]
    source: Option<Spanned<String>>,
    #[serde(default)]
    flux: Option<Spanned<String>>,
    #[serde(default)]
    initial_displacement: Option<Spanned<String>>,
    #[serde(default)]
    initial_velocity: Option<Spanned<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiscretization {
    basis: Spanned<String>,
    #[serde(default)]
    m: Option<Spanned<i64>>,
    cells: Spanned<i64>,
    n_steps: Spanned<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(default = "default_scheme")]
    scheme: Spanned<String>,
    #[serde(default = "default_tol")]
    picard_tol: Spanned<f64>,
    #[serde(default = "default_max_iter")]
    picard_max_iter: Spanned<i64>,
}

impl Default for RawSolver {
    fn default() -> Self {
        Self {
            scheme: default_scheme(),
            picard_tol: default_tol(),
            picard_max_iter: default_max_iter(),
        }
    }
}

fn default_scheme() -> Spanned<String> {
    Spanned::new(0..0, "marching".into())
}

fn default_tol() -> Spanned<f64> {
    Spanned::new(0..0, 1e-12)
}

fn default_max_iter() -> Spanned<i64> {
    Spanned::new(0..0, 500)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default)]
    directory: Option<String>,
    #[serde(default = "yes")]
    solution: bool,
    #[serde(default = "yes")]
    energy: bool,
    #[serde(default = "yes")]
    apriori: bool,
    #[serde(default = "yes")]
    field: bool,
}

impl Default for RawOutput {
    fn default() -> Self {
        Self {
            directory: None,
            solution: true,
            energy: true,
            apriori: true,
            field: true,
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConverge {
    #[serde(default)]
    study: Option<Spanned<String>>,
}

/// A scalar expression in `x` and `t`.
#[derive(Clone, Debug)]
pub struct Expr {
    source: String,
    flat: FlatEx<f64>,
    slots: Vec<Var>,
}

#[derive(Clone, Copy, Debug)]
enum Var {
    X,
    T,
}

impl Expr {
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        let args: Vec<f64> = self
            .slots
            .iter()
            .map(|v| match v {
                Var::X => x,
                Var::T => t,
            })
            .collect();
        self.flat.eval(&args).unwrap_or(f64::NAN)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Study {
    /// Space and time refined together.
    Joint,
    /// Time refined on a fixed space grid.
    Temporal,
    /// Space refined with a fixed time step.
    Spatial,
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub length: f64,
    pub horizon: f64,
    pub alpha: f64,
    pub rho: Expr,
    pub a: Expr,
    pub b: Expr,
    pub nu: f64,
    pub rho0: f64,
    pub classical_limit: bool,
    pub source: Option<Expr>,
    pub flux: Option<Expr>,
    pub initial_displacement: Option<Expr>,
    pub initial_velocity: Option<Expr>,
}

#[derive(Clone, Copy, Debug)]
pub struct Discretization {
    pub basis: BasisKind,
    pub m: usize,
    pub cells: usize,
    pub n_steps: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct Reports {
    pub solution: bool,
    pub energy: bool,
    pub apriori: bool,
    pub field: bool,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub problem: Problem,
    pub discretization: Discretization,
    pub solver: SolverConfig,
    pub directory: Option<PathBuf>,
    pub reports: Reports,
    pub study: Study,
}

/// Maps byte offsets to 1-based line numbers.
struct Lines<'a>(&'a str);

impl Lines<'_> {
    fn at(&self, span: &Range<usize>) -> String {
        if span.is_empty() && span.start == 0 {
            return "default value".into();
        }
        let line = self.0[..span.start.min(self.0.len())].matches('\n').count() + 1;
        format!("line {line}")
    }

    fn err(&self, span: &Range<usize>, msg: impl std::fmt::Display) -> ConfigError {
        ConfigError(format!("{}: {msg}", self.at(span)))
    }
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string().trim_end().to_string()))?;
    let lines = Lines(text);
    let p = &raw.problem;

    let positive = |v: &Spanned<f64>, name: &str| -> Result<f64, ConfigError> {
        let x = *v.get_ref();
        if x > 0.0 && x.is_finite() {
            Ok(x)
        } else {
            Err(lines.err(&v.span(), format!("{name} must be positive and finite, got {x}")))
        }
    };
    let length = positive(&p.length, "length")?;
    let horizon = positive(&p.horizon, "horizon")?;
    let alpha = *p.alpha.get_ref();
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(lines.err(&p.alpha.span(), format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let nu = positive(&p.nu, "nu")?;
    let rho0 = positive(&p.rho0, "rho0")?;

    let space = |s: &Spanned<String>, name: &str| expr(&lines, s, name, false);
    let opt = |s: &Option<Spanned<String>>, name: &str, t: bool| {
        s.as_ref().map(|s| expr(&lines, s, name, t)).transpose()
    };
    let problem = Problem {
        length,
        horizon,
        alpha,
        rho: space(&p.rho, "rho")?,
        a: space(&p.a, "a")?,
        b: space(&p.b, "b")?,
        nu,
        rho0,
        classical_limit: p.classical_limit,
        source: opt(&p.source, "source", true)?,
        flux: opt(&p.flux, "flux", true)?,
        initial_displacement: opt(&p.initial_displacement, "initial_displacement", false)?,
        initial_velocity: opt(&p.initial_velocity, "initial_velocity", false)?,
    };

    let d = &raw.discretization;
    let count = |v: &Spanned<i64>, name: &str, min: i64| -> Result<usize, ConfigError> {
        let x = *v.get_ref();
        if x >= min {
            Ok(x as usize)
        } else {
            Err(lines.err(&v.span(), format!("{name} must be at least {min}, got {x}")))
        }
    };
    let cells = count(&d.cells, "cells", 2)?;
    let n_steps = count(&d.n_steps, "n_steps", 1)?;
    let basis = match d.basis.get_ref().as_str() {
        "sine" => BasisKind::Sine,
        "p1" => BasisKind::P1,
        other => {
            return Err(lines.err(&d.basis.span(), format!("basis must be \"sine\" or \"p1\", got \"{other}\"")))
        }
    };
    let m = match (&d.m, basis) {
        (Some(m), BasisKind::P1) => {
            let v = count(m, "m", 1)?;
            if v != cells - 1 {
                return Err(lines.err(&m.span(), format!("p1 basis needs m = cells - 1 = {}, got {v}", cells - 1)));
            }
            v
        }
        (None, BasisKind::P1) => cells - 1,
        (Some(m), BasisKind::Sine) => {
            let v = count(m, "m", 1)?;
            if cells < 4 * v {
                return Err(lines.err(&d.cells.span(), format!("sine basis with m = {v} needs cells >= {}", 4 * v)));
            }
            v
        }
        (None, BasisKind::Sine) => {
            return Err(lines.err(&d.basis.span(), "sine basis needs m"));
        }
    };

    let s = &raw.solver;
    let scheme = match s.scheme.get_ref().as_str() {
        "marching" => Scheme::Marching,
        "picard" => Scheme::Picard,
        other => {
            return Err(lines.err(
                &s.scheme.span(),
                format!("scheme must be \"marching\" or \"picard\", got \"{other}\""),
            ))
        }
    };
    let solver = SolverConfig {
        scheme,
        picard_tol: positive(&s.picard_tol, "picard_tol")?,
        picard_max_iter: count(&s.picard_max_iter, "picard_max_iter", 1)?,
    };

    let study = match raw.converge.study.as_ref() {
        None => Study::Joint,
        Some(s) => match s.get_ref().as_str() {
            "joint" => Study::Joint,
            "temporal" => Study::Temporal,
            "spatial" => Study::Spatial,
            other => {
                return Err(lines.err(
                    &s.span(),
                    format!("study must be \"joint\", \"temporal\" or \"spatial\", got \"{other}\""),
                ))
            }
        },
    };

    Ok(RunConfig {
        problem,
        discretization: Discretization {
            basis,
            m,
            cells,
            n_steps,
        },
        solver,
        directory: raw.output.directory.map(PathBuf::from),
        reports: Reports {
            solution: raw.output.solution,
            energy: raw.output.energy,
            apriori: raw.output.apriori,
            field: raw.output.field,
        },
        study,
    })
}

fn expr(lines: &Lines, s: &Spanned<String>, name: &str, with_t: bool) -> Result<Expr, ConfigError> {
    let flat = exmex::parse::<f64>(s.get_ref())
        .map_err(|e| lines.err(&s.span(), format!("cannot parse {name} = \"{}\": {e}", s.get_ref())))?;
    let mut slots = Vec::new();
    for v in flat.var_names() {
        slots.push(match v.as_str() {
            "x" => Var::X,
            "t" if with_t => Var::T,
            other => {
                let allowed = if with_t { "x and t" } else { "x" };
                return Err(lines.err(
                    &s.span(),
                    format!("{name} may only use {allowed}, found variable \"{other}\""),
                ));
            }
        });
    }
    Ok(Expr {
        source: s.get_ref().clone(),
        flat,
        slots,
    })
}

impl RunConfig {
    pub fn alpha(&self) -> FracOrder {
        FracOrder::new(self.problem.alpha).expect("alpha validated at parse time")
    }

    pub fn material(&self) -> MaterialModel {
        let p = &self.problem;
        let wrap = |e: &Expr| {
            let e = Arc::new(e.clone());
            field(move |x| e.eval(x, 0.0))
        };
        MaterialModel {
            rho: wrap(&p.rho),
            a_coef: wrap(&p.a),
            b_coef: wrap(&p.b),
            nu: p.nu,
            rho0: p.rho0,
            classical_limit: p.classical_limit,
        }
    }

    /// Problem data with the configured forcing and initial values (missing
    /// entries are zero).
    pub fn spec(&self) -> ProblemSpec {
        let p = &self.problem;
        let st = |e: &Option<Expr>| {
            e.clone().map(|e| {
                let e = Arc::new(e);
                space_time_field(move |x, t| e.eval(x, t))
            })
        };
        let sp = |e: &Option<Expr>| match e.clone() {
            Some(e) => field(move |x| e.eval(x, 0.0)),
            None => field(|_| 0.0),
        };
        ProblemSpec {
            length: p.length,
            horizon: p.horizon,
            alpha: self.alpha(),
            material: self.material(),
            forcing: Forcing {
                source: st(&p.source).unwrap_or_else(|| space_time_field(|_, _| 0.0)),
                flux: st(&p.flux),
            },
            initial_displacement: sp(&p.initial_displacement),
            initial_velocity: sp(&p.initial_velocity),
        }
    }

    pub fn basis(&self, cells: usize) -> fracvisco_core::Result<GalerkinBasis> {
        let d = &self.discretization;
        let m = match d.basis {
            BasisKind::P1 => cells - 1,
            BasisKind::Sine => d.m,
        };
        build_basis(d.basis, m, SpaceGrid::new(self.problem.length, cells)?)
    }

    pub fn tgrid(&self, n_steps: usize) -> fracvisco_core::Result<TimeGrid> {
        TimeGrid::new(0.0, self.problem.horizon, n_steps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[problem]
length = 1.0
horizon = 1.0
alpha = 0.5
rho = "1"
a = "1 + x"
b = "1"
nu = 0.5
rho0 = 0.5
source = "sin(PI*x) * t"

[discretization]
basis = "sine"
m = 4
cells = 32
n_steps = 64
"#;

    fn error_of(text: &str) -> String {
        parse(text).unwrap_err().0
    }

    #[test]
    fn parses_a_complete_file() {
        let c = parse(BASE).unwrap();
        assert_eq!(c.discretization.m, 4);
        assert_eq!(c.solver.scheme, Scheme::Marching);
        assert_eq!(c.study, Study::Joint);
        assert!((c.problem.a.eval(0.25, 0.0) - 1.25).abs() < 1e-15);
        let s = c.problem.source.as_ref().unwrap();
        assert!((s.eval(0.5, 2.0) - 2.0).abs() < 1e-15);
        assert_eq!(s.source(), "sin(PI*x) * t");
    }

    #[test]
    fn range_errors_name_the_line() {
        let text = BASE.replace("alpha = 0.5", "alpha = 1.5");
        assert!(error_of(&text).starts_with("line 5: alpha"), "{}", error_of(&text));
        let text = BASE.replace("m = 4", "m = 9");
        assert!(error_of(&text).starts_with("line 16:"), "{}", error_of(&text));
    }

    #[test]
    fn expression_errors_name_the_line() {
        let text = BASE.replace("a = \"1 + x\"", "a = \"1 + t\"");
        let e = error_of(&text);
        assert!(e.starts_with("line 7:") && e.contains("\"t\""), "{e}");
        let text = BASE.replace("a = \"1 + x\"", "a = \"1 +\"");
        assert!(error_of(&text).starts_with("line 7: cannot parse a"));
    }

    #[test]
    fn syntax_and_unknown_keys_are_reported() {
        let e = error_of(&BASE.replace("nu = 0.5", "nu = "));
        assert!(e.contains("line 9"), "{e}");
        let e = error_of(&format!("{BASE}\n[solver]\nshceme = \"picard\"\n"));
        assert!(e.contains("shceme"), "{e}");
    }

    #[test]
    fn p1_dimension_follows_cells() {
        let text = BASE.replace("basis = \"sine\"", "basis = \"p1\"").replace("m = 4\n", "");
        assert_eq!(parse(&text).unwrap().discretization.m, 31);
        let text = BASE.replace("basis = \"sine\"", "basis = \"p1\"");
        assert!(error_of(&text).contains("m = cells - 1"));
    }
}
