//! Benchmark problems with closed-form solutions and manufactured data.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{OperatorSpec, RandomFeatureModel};
use crate::grid::{self, Points};
use crate::jet::{Jet, MAX_DIM};

pub const DEFAULT_POINTS_1D: usize = 256;
pub const DEFAULT_POINTS_2D: usize = 64;
pub const DEFAULT_REGRESSION_M: f64 = 30.0;
pub const HELMHOLTZ1D_K: f64 = 10.0;
pub const HELMHOLTZ2D_K2: f64 = 125.0;
pub const HELMHOLTZ2D_A: (f64, f64) = (1.0, 4.0);
pub const DEFAULT_GAMMA: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemKind {
    Regression,
    Helmholtz1d,
    Helmholtz2d,
    BurgersSteady1d,
    EllipticRitz1d,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 5] = [
        ProblemKind::Regression,
        ProblemKind::Helmholtz1d,
        ProblemKind::Helmholtz2d,
        ProblemKind::BurgersSteady1d,
        ProblemKind::EllipticRitz1d,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown problem '{s}'")))
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Regression => "regression",
            ProblemKind::Helmholtz1d => "helmholtz1d",
            ProblemKind::Helmholtz2d => "helmholtz2d",
            ProblemKind::BurgersSteady1d => "burgers1d",
            ProblemKind::EllipticRitz1d => "ritz1d",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ProblemKind::Helmholtz2d => 2,
            _ => 1,
        }
    }
}

/// How the model is fitted to the problem data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossKind {
    /// `Σ (u(x_i) - y_i)²`
    Supervised,
    /// `Σ (L u - f)² + γ Σ (u - g)²` over interior and boundary points.
    Collocation,
    /// Quadrature of `∫ ½|∇v|² + ½v² - f v` minus the natural boundary flux `∫ ∂_n u* v`.
    Ritz,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Exact {
    Chirp { m: f64 },
    Multiscale { c0: f64, c1: f64 },
    SineProduct { a1: f64, a2: f64 },
    BurgersWave,
}

/// `sin(4x)/4 - sin(8x)/8 + sin(24x)/36` with two derivatives.
fn multiscale_base(x: f64) -> [f64; 3] {
    let (s4, c4) = (4.0 * x).sin_cos();
    let (s8, c8) = (8.0 * x).sin_cos();
    let (s24, c24) = (24.0 * x).sin_cos();
    [
        s4 / 4.0 - s8 / 8.0 + s24 / 36.0,
        c4 - c8 + 2.0 * c24 / 3.0,
        -4.0 * s4 + 8.0 * s8 - 16.0 * s24,
    ]
}

impl Exact {
    fn multiscale() -> Self {
        let lo = multiscale_base(-1.0)[0];
        let hi = multiscale_base(1.0)[0];
        Exact::Multiscale {
            c0: -(lo + hi) / 2.0,
            c1: (lo - hi) / 2.0,
        }
    }

    fn jet(&self, x: &[f64]) -> Jet {
        let mut j = Jet::default();
        match *self {
            Exact::Chirp { m } => {
                let t = x[0];
                let g = 1.0 - t * t / 2.0;
                let (dg, ddg) = (-t, -1.0);
                let th = m * (t + t * t * t / 2.0);
                let dth = m * (1.0 + 1.5 * t * t);
                let ddth = 3.0 * m * t;
                let (s, c) = th.sin_cos();
                j.value = g * c;
                j.grad[0] = dg * c - g * dth * s;
                j.hess[0] = ddg * c - 2.0 * dg * dth * s - g * ddth * s - g * dth * dth * c;
            }
            Exact::Multiscale { c0, c1 } => {
                let [f, df, ddf] = multiscale_base(x[0]);
                j.value = f + c1 * x[0] + c0;
                j.grad[0] = df + c1;
                j.hess[0] = ddf;
            }
            Exact::SineProduct { a1, a2 } => {
                let (wx, wy) = (a1 * PI, a2 * PI);
                let (sx, cx) = (wx * x[0]).sin_cos();
                let (sy, cy) = (wy * x[1]).sin_cos();
                j.value = sx * sy;
                j.grad[0] = wx * cx * sy;
                j.grad[1] = wy * sx * cy;
                j.hess[0] = -wx * wx * sx * sy;
                j.hess[1] = -wy * wy * sx * sy;
            }
            Exact::BurgersWave => {
                let a = 3.0 * PI * x[0] + 3.0 * PI / 20.0;
                let b = 2.0 * PI * x[0] + PI / 10.0;
                let (sa, ca) = a.sin_cos();
                let (sb, cb) = b.sin_cos();
                j.value = sa * cb + 2.0;
                j.grad[0] = 3.0 * PI * ca * cb - 2.0 * PI * sa * sb;
                j.hess[0] = -13.0 * PI * PI * sa * cb - 12.0 * PI * PI * ca * sb;
            }
        }
        j
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub kind: ProblemKind,
    pub domain: Vec<(f64, f64)>,
    pub operator: OperatorSpec,
    pub loss: LossKind,
    /// Boundary penalty weight for collocation losses.
    pub gamma: f64,
    pub interior: Points,
    /// Quadrature weights on `interior` (used by the Ritz loss and diagnostics).
    pub weights: Vec<f64>,
    pub boundary: Points,
    pub normals: Vec<[f64; MAX_DIM]>,
    pub eval_points: Points,
    pub eval_weights: Vec<f64>,
    exact: Exact,
}

fn refined(n: usize) -> usize {
    4 * (n + 1) + 1
}

impl Problem {
    pub fn new(kind: ProblemKind, n: Option<usize>) -> Self {
        match kind {
            ProblemKind::Regression => {
                Problem::regression(DEFAULT_REGRESSION_M, n.unwrap_or(DEFAULT_POINTS_1D))
            }
            ProblemKind::Helmholtz1d => Problem::helmholtz1d(n.unwrap_or(DEFAULT_POINTS_1D)),
            ProblemKind::Helmholtz2d => Problem::helmholtz2d(n.unwrap_or(DEFAULT_POINTS_2D)),
            ProblemKind::BurgersSteady1d => {
                Problem::burgers_steady1d(n.unwrap_or(DEFAULT_POINTS_1D))
            }
            ProblemKind::EllipticRitz1d => Problem::elliptic_ritz1d(n.unwrap_or(DEFAULT_POINTS_1D)),
        }
    }

    /// Fit `(1 - x²/2) cos(m (x + x³/2))` on `n` points of `[-1, 1]`, endpoints included.
    pub fn regression(m: f64, n: usize) -> Self {
        let (lo, hi) = (-1.0, 1.0);
        let ne = 4 * (n - 1) + 1;
        Problem {
            kind: ProblemKind::Regression,
            domain: vec![(lo, hi)],
            operator: OperatorSpec::identity(1),
            loss: LossKind::Supervised,
            gamma: 0.0,
            interior: Points::from_1d(&grid::linspace(lo, hi, n)),
            weights: grid::trapezoid_weights(lo, hi, n),
            boundary: Points::from_1d(&[]),
            normals: Vec::new(),
            eval_points: Points::from_1d(&grid::linspace(lo, hi, ne)),
            eval_weights: grid::trapezoid_weights(lo, hi, ne),
            exact: Exact::Chirp { m },
        }
    }

    /// `u'' + k² u = f` on `(-1, 1)` with Dirichlet data, `k = 10`.
    pub fn helmholtz1d(n: usize) -> Self {
        let domain = [(-1.0, 1.0)];
        let op = OperatorSpec::laplace_plus(1, 1.0, HELMHOLTZ1D_K * HELMHOLTZ1D_K);
        Problem::collocation_1d(ProblemKind::Helmholtz1d, domain[0], op, Exact::multiscale(), n)
    }

    /// `-u'' + u' u = f` on `(0, 8)` with Dirichlet data.
    pub fn burgers_steady1d(n: usize) -> Self {
        Problem::collocation_1d(
            ProblemKind::BurgersSteady1d,
            (0.0, 8.0),
            OperatorSpec::burgers_steady(),
            Exact::BurgersWave,
            n,
        )
    }

    fn collocation_1d(
        kind: ProblemKind,
        (lo, hi): (f64, f64),
        operator: OperatorSpec,
        exact: Exact,
        n: usize,
    ) -> Self {
        let (boundary, normals) = grid::box_boundary(&[(lo, hi)], 0);
        let ne = refined(n);
        Problem {
            kind,
            domain: vec![(lo, hi)],
            operator,
            loss: LossKind::Collocation,
            gamma: DEFAULT_GAMMA,
            interior: Points::from_1d(&grid::interior_linspace(lo, hi, n)),
            weights: vec![(hi - lo) / (n + 1) as f64; n],
            boundary,
            normals,
            eval_points: Points::from_1d(&grid::linspace(lo, hi, ne)),
            eval_weights: grid::trapezoid_weights(lo, hi, ne),
            exact,
        }
    }

    /// `Δu + k² u = q` on `(-1, 1)²` with `u* = sin(πx) sin(4πy)`, `k² = 125`, `γ = 100`.
    ///
    /// `n` is the number of interior points per axis; each side carries `n` boundary points.
    pub fn helmholtz2d(n: usize) -> Self {
        let domain = vec![(-1.0, 1.0), (-1.0, 1.0)];
        let (boundary, normals) = grid::box_boundary(&domain, n);
        let axis = grid::interior_linspace(-1.0, 1.0, n);
        let h = 2.0 / (n + 1) as f64;
        let ne = refined(n);
        let eval_axis = grid::linspace(-1.0, 1.0, ne);
        let eval_w = grid::trapezoid_weights(-1.0, 1.0, ne);
        Problem {
            kind: ProblemKind::Helmholtz2d,
            operator: OperatorSpec::laplace_plus(2, 1.0, HELMHOLTZ2D_K2),
            loss: LossKind::Collocation,
            gamma: DEFAULT_GAMMA,
            interior: grid::tensor(&[axis.clone(), axis]),
            weights: vec![h * h; n * n],
            boundary,
            normals,
            eval_points: grid::tensor(&[eval_axis.clone(), eval_axis]),
            eval_weights: grid::tensor_weights(&[eval_w.clone(), eval_w]),
            exact: Exact::SineProduct {
                a1: HELMHOLTZ2D_A.0,
                a2: HELMHOLTZ2D_A.1,
            },
            domain,
        }
    }

    /// `-u'' + u = f` on `(-1, 1)` in variational form, `u*` the multiscale function.
    pub fn elliptic_ritz1d(n: usize) -> Self {
        let (lo, hi) = (-1.0, 1.0);
        let (boundary, normals) = grid::box_boundary(&[(lo, hi)], 0);
        let ne = 4 * (n - 1) + 1;
        Problem {
            kind: ProblemKind::EllipticRitz1d,
            domain: vec![(lo, hi)],
            operator: OperatorSpec::laplace_plus(1, -1.0, 1.0),
            loss: LossKind::Ritz,
            gamma: 0.0,
            interior: Points::from_1d(&grid::linspace(lo, hi, n)),
            weights: grid::trapezoid_weights(lo, hi, n),
            boundary,
            normals,
            eval_points: Points::from_1d(&grid::linspace(lo, hi, ne)),
            eval_weights: grid::trapezoid_weights(lo, hi, ne),
            exact: Exact::multiscale(),
        }
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// Exact solution with gradient and pure second derivatives.
    pub fn exact_jet(&self, x: &[f64]) -> Jet {
        self.exact.jet(x)
    }

    pub fn exact(&self, x: &[f64]) -> f64 {
        self.exact.jet(x).value
    }

    /// Right-hand side `f = L u*` (the target itself for regression).
    pub fn forcing(&self, x: &[f64]) -> f64 {
        self.operator.apply(&self.exact.jet(x))
    }

    /// Dirichlet data `g = u*` on the boundary.
    pub fn boundary_value(&self, x: &[f64]) -> f64 {
        self.exact(x)
    }

    /// Outward normal derivative `∂_n u*`.
    pub fn normal_flux(&self, x: &[f64], normal: &[f64; MAX_DIM]) -> f64 {
        let j = self.exact.jet(x);
        (0..self.dim()).map(|k| j.grad[k] * normal[k]).sum()
    }

    /// Interior targets `f(x_i)`.
    pub fn targets(&self) -> Vec<f64> {
        self.interior.iter().map(|x| self.forcing(x)).collect()
    }

    pub fn boundary_targets(&self) -> Vec<f64> {
        self.boundary.iter().map(|x| self.boundary_value(x)).collect()
    }

    /// Discrete Ritz energy of a trial function given by its jets.
    pub fn ritz_functional(&self, v: impl Fn(&[f64]) -> Jet) -> Result<f64> {
        if self.loss != LossKind::Ritz {
            return Err(Error::WrongProblem {
                expected: "ritz1d",
                got: self.name().into(),
            });
        }
        let d = self.dim();
        let mut total = 0.0;
        for (x, q) in self.interior.iter().zip(&self.weights) {
            let j = v(x);
            let grad2: f64 = j.grad[..d].iter().map(|g| g * g).sum();
            total += q * (0.5 * grad2 + 0.5 * j.value * j.value - self.forcing(x) * j.value);
        }
        for (x, n) in self.boundary.iter().zip(&self.normals) {
            total -= self.normal_flux(x, n) * v(x).value;
        }
        Ok(total)
    }
}

/// `(1 - x²/2) cos(m (x + x³/2))`.
pub fn regression_target(m: f64, x: f64) -> f64 {
    Exact::Chirp { m }.jet(&[x]).value
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    #[serde(rename = "Linf")]
    pub linf: f64,
    #[serde(rename = "relL2")]
    pub rel_l2: f64,
    #[serde(rename = "relH1")]
    pub rel_h1: f64,
}

/// Error norms of `u` against the exact solution on the problem's evaluation grid.
pub fn error_metrics_of(problem: &Problem, u: impl Fn(&[f64]) -> Jet) -> Result<ErrorMetrics> {
    error_metrics_on(problem, &problem.eval_points, &problem.eval_weights, u)
}

/// Error norms on an explicit quadrature grid.
pub fn error_metrics_on(
    problem: &Problem,
    points: &Points,
    weights: &[f64],
    u: impl Fn(&[f64]) -> Jet,
) -> Result<ErrorMetrics> {
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let d = problem.dim();
    let mut linf = 0.0_f64;
    let (mut e0, mut e1, mut n0, mut n1) = (0.0, 0.0, 0.0, 0.0);
    for (x, w) in points.iter().zip(weights) {
        let uj = u(x);
        let ej = problem.exact_jet(x);
        let diff = uj.value - ej.value;
        linf = linf.max(diff.abs());
        e0 += w * diff * diff;
        n0 += w * ej.value * ej.value;
        for k in 0..d {
            let dg = uj.grad[k] - ej.grad[k];
            e1 += w * dg * dg;
            n1 += w * ej.grad[k] * ej.grad[k];
        }
    }
    Ok(ErrorMetrics {
        linf,
        rel_l2: (e0 / n0).sqrt(),
        rel_h1: ((e0 + e1) / (n0 + n1)).sqrt(),
    })
}

pub fn error_metrics(model: &RandomFeatureModel, problem: &Problem) -> Result<ErrorMetrics> {
    error_metrics_of(problem, |x| model.eval_jet(x))
}
