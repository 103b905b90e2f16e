//! Random feature model `u(x) = M^{-1/2} Σ_n ψ_n(x) Σ_j a_nj σ(w_nj · (ỹ_n, 1))`.
//!
//! Inner weights act on the cell-local coordinate `ỹ_n = (x - x_n) / r_n`, so the
//! initialization range `R_m` is dimensionless. Features are ordered cell by
//! cell: feature `k` lives in cell `k / J_n`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Points;
use crate::jet::{Jet, MAX_DIM};
use crate::partition::{CellFrame, Partition, PouKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Tanh,
    Sine,
    /// `max(z, 0)^3`
    CubicRelu,
}

impl Activation {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "sin" | "sine" => Ok(Activation::Sine),
            "relu3" | "cubic-relu" => Ok(Activation::CubicRelu),
            other => Err(Error::Config(format!("unknown activation '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Sine => "sin",
            Activation::CubicRelu => "relu3",
        }
    }

    /// `[σ, σ', σ'', σ''']` at `z`.
    #[inline]
    pub fn derivatives(&self, z: f64) -> [f64; 4] {
        match self {
            Activation::Tanh => {
                let t = z.tanh();
                let s1 = 1.0 - t * t;
                let s2 = -2.0 * t * s1;
                let s3 = s1 * (4.0 * t * t - 2.0 * s1);
                [t, s1, s2, s3]
            }
            Activation::Sine => {
                let (s, c) = z.sin_cos();
                [s, c, -s, -c]
            }
            Activation::CubicRelu => {
                let p = z.max(0.0);
                let step = if z > 0.0 { 6.0 } else { 0.0 };
                [p * p * p, 3.0 * p * p, 6.0 * p, step]
            }
        }
    }

    pub fn value(&self, z: f64) -> f64 {
        self.derivatives(z)[0]
    }

    pub fn d1(&self, z: f64) -> f64 {
        self.derivatives(z)[1]
    }

    pub fn d2(&self, z: f64) -> f64 {
        self.derivatives(z)[2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Nonlinearity {
    None,
    /// Adds `u'·u` to the linear part (1-d only).
    BurgersSteady,
}

/// A differential operator of order at most two without mixed derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorSpec {
    pub dim: usize,
    /// `c0` in `value`, first-derivative coefficients in `grad`, pure second-derivative
    /// coefficients in `hess`.
    pub linear: Jet,
    pub nonlinear: Nonlinearity,
}

impl OperatorSpec {
    pub fn identity(dim: usize) -> Self {
        OperatorSpec {
            dim,
            linear: Jet::constant(1.0),
            nonlinear: Nonlinearity::None,
        }
    }

    /// `c2·Δu + c0·u`.
    pub fn laplace_plus(dim: usize, c2: f64, c0: f64) -> Self {
        let mut linear = Jet::constant(c0);
        for k in 0..dim {
            linear.hess[k] = c2;
        }
        OperatorSpec {
            dim,
            linear,
            nonlinear: Nonlinearity::None,
        }
    }

    /// `-u'' + u'·u` in one dimension.
    pub fn burgers_steady() -> Self {
        let mut linear = Jet::default();
        linear.hess[0] = -1.0;
        OperatorSpec {
            dim: 1,
            linear,
            nonlinear: Nonlinearity::BurgersSteady,
        }
    }

    /// Second derivative along axis `axis` only.
    pub fn second_derivative(dim: usize, axis: usize) -> Self {
        let mut linear = Jet::default();
        linear.hess[axis] = 1.0;
        OperatorSpec {
            dim,
            linear,
            nonlinear: Nonlinearity::None,
        }
    }

    pub fn is_linear(&self) -> bool {
        self.nonlinear == Nonlinearity::None
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(Error::UnsupportedOperator(format!("dimension {}", self.dim)));
        }
        if self.nonlinear == Nonlinearity::BurgersSteady && self.dim != 1 {
            return Err(Error::UnsupportedOperator(
                "steady Burgers residual is only defined in 1-d".into(),
            ));
        }
        Ok(())
    }

    /// Operator applied to a field given by its jet.
    pub fn apply(&self, u: &Jet) -> f64 {
        let lin = self.linear.dot(u, self.dim);
        match self.nonlinear {
            Nonlinearity::None => lin,
            Nonlinearity::BurgersSteady => lin + u.grad[0] * u.value,
        }
    }

    /// Coefficients of the derivative of [`apply`](Self::apply) with respect to the jet of `u`.
    pub fn linearization(&self, u: &Jet) -> Jet {
        let mut c = self.linear;
        if self.nonlinear == Nonlinearity::BurgersSteady {
            c.value += u.grad[0];
            c.grad[0] += u.value;
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub seed: u64,
    pub domain: Vec<(f64, f64)>,
    /// Cells per dimension; `M_p` is their product.
    pub cells: Vec<usize>,
    pub neurons_per_cell: usize,
    /// Inner weights are drawn from `U(-R_m, R_m)`.
    pub init_range: f64,
    pub activation: Activation,
    pub pou_kind: PouKind,
    pub trainable_inner: bool,
}

impl ModelConfig {
    pub fn total_neurons(&self) -> usize {
        self.cells.iter().product::<usize>() * self.neurons_per_cell
    }
}

/// Which parameter block a Jacobian is taken with respect to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamBlock {
    Outer,
    Inner,
    /// Outer weights, followed by inner weights when they are trainable.
    Trainable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomFeatureModel {
    partition: Partition,
    activation: Activation,
    neurons_per_cell: usize,
    init_range: f64,
    trainable_inner: bool,
    /// `M × (d+1)`: per feature the input weights then the bias.
    inner: Vec<f64>,
    outer: Vec<f64>,
    output_scale: f64,
}

/// Everything about one feature at one point that the gradient pass needs.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FeatureEval {
    pub k: usize,
    pub psi: Jet,
    pub local: [f64; MAX_DIM],
    pub inv_radius: [f64; MAX_DIM],
    /// `dz/dx_c = w_c / r_c`
    pub slope: [f64; MAX_DIM],
    pub sigma: [f64; 4],
}

impl FeatureEval {
    /// Jet of `ψ·σ` (without the output scale or outer weight).
    #[inline]
    pub fn jet(&self, dim: usize) -> Jet {
        let [s0, s1, s2, _] = self.sigma;
        let p = &self.psi;
        let mut j = Jet::constant(p.value * s0);
        for c in 0..dim {
            let sc = self.slope[c];
            j.grad[c] = p.grad[c] * s0 + p.value * s1 * sc;
            j.hess[c] = p.hess[c] * s0 + 2.0 * p.grad[c] * s1 * sc + p.value * s2 * sc * sc;
        }
        j
    }

    /// `g · jet` and `g · ∂jet/∂θ_j` for the feature's inner parameters `θ = (w, b)`.
    #[inline]
    pub fn sensitivities(&self, g: &Jet, dim: usize) -> (f64, [f64; MAX_DIM + 1]) {
        let [s0, s1, s2, s3] = self.sigma;
        let p = &self.psi;
        let mut p0 = g.value * p.value;
        let mut p1 = 0.0;
        let mut p2 = 0.0;
        for c in 0..dim {
            let sc = self.slope[c];
            p0 += g.grad[c] * p.grad[c] + g.hess[c] * p.hess[c];
            p1 += (g.grad[c] * p.value + 2.0 * g.hess[c] * p.grad[c]) * sc;
            p2 += g.hess[c] * p.value * sc * sc;
        }
        let outer = s0 * p0 + s1 * p1 + s2 * p2;
        let along_z = s1 * p0 + s2 * p1 + s3 * p2;
        let mut inner = [0.0; MAX_DIM + 1];
        for c in 0..dim {
            let explicit = self.inv_radius[c]
                * (s1 * (g.grad[c] * p.value + 2.0 * g.hess[c] * p.grad[c])
                    + 2.0 * s2 * g.hess[c] * p.value * self.slope[c]);
            inner[c] = self.local[c] * along_z + explicit;
        }
        inner[dim] = along_z;
        (outer, inner)
    }
}

impl RandomFeatureModel {
    pub fn init(cfg: &ModelConfig) -> Result<Self> {
        if cfg.neurons_per_cell == 0 {
            return Err(Error::InvalidModel("neurons per cell must be >= 1".into()));
        }
        if !(cfg.init_range > 0.0 && cfg.init_range.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "initialization range must be positive, got {}",
                cfg.init_range
            )));
        }
        let partition = Partition::uniform(&cfg.domain, &cfg.cells, cfg.pou_kind)?;
        let d = partition.dim();
        let m = partition.count() * cfg.neurons_per_cell;

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let r = cfg.init_range;
        let inner: Vec<f64> = (0..m * (d + 1)).map(|_| rng.gen_range(-r..r)).collect();
        let outer = if cfg.trainable_inner {
            (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()
        } else {
            vec![0.0; m]
        };
        Ok(RandomFeatureModel {
            partition,
            activation: cfg.activation,
            neurons_per_cell: cfg.neurons_per_cell,
            init_range: r,
            trainable_inner: cfg.trainable_inner,
            inner,
            outer,
            output_scale: 1.0 / (m as f64).sqrt(),
        })
    }

    /// Builds a model from explicit weights; `inner` holds `(w_1..w_d, b)` per feature.
    pub fn from_parts(
        partition: Partition,
        activation: Activation,
        neurons_per_cell: usize,
        inner: Vec<f64>,
        outer: Vec<f64>,
        trainable_inner: bool,
    ) -> Result<Self> {
        let d = partition.dim();
        let m = partition.count() * neurons_per_cell;
        if m == 0 || inner.len() != m * (d + 1) || outer.len() != m {
            return Err(Error::InvalidModel(format!(
                "expected {m} features with {} inner and {m} outer weights, got {} and {}",
                m * (d + 1),
                inner.len(),
                outer.len()
            )));
        }
        let init_range = inner.iter().fold(0.0_f64, |a, w| a.max(w.abs()));
        Ok(RandomFeatureModel {
            partition,
            activation,
            neurons_per_cell,
            init_range,
            trainable_inner,
            inner,
            outer,
            output_scale: 1.0 / (m as f64).sqrt(),
        })
    }

    pub fn dim(&self) -> usize {
        self.partition.dim()
    }

    pub fn num_features(&self) -> usize {
        self.outer.len()
    }

    pub fn neurons_per_cell(&self) -> usize {
        self.neurons_per_cell
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn init_range(&self) -> f64 {
        self.init_range
    }

    pub fn output_scale(&self) -> f64 {
        self.output_scale
    }

    pub fn trainable_inner(&self) -> bool {
        self.trainable_inner
    }

    pub fn set_trainable_inner(&mut self, on: bool) {
        self.trainable_inner = on;
    }

    pub fn outer(&self) -> &[f64] {
        &self.outer
    }

    pub fn set_outer(&mut self, a: &[f64]) -> Result<()> {
        if a.len() != self.outer.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} outer weights for {} features",
                a.len(),
                self.outer.len()
            )));
        }
        self.outer.copy_from_slice(a);
        Ok(())
    }

    pub fn inner(&self) -> &[f64] {
        &self.inner
    }

    pub fn num_params(&self) -> usize {
        self.param_count(ParamBlock::Trainable)
    }

    pub fn param_count(&self, block: ParamBlock) -> usize {
        let m = self.num_features();
        let inner = m * (self.dim() + 1);
        match block {
            ParamBlock::Outer => m,
            ParamBlock::Inner => inner,
            ParamBlock::Trainable if self.trainable_inner => m + inner,
            ParamBlock::Trainable => m,
        }
    }

    /// Trainable parameters: outer weights then (if trainable) inner weights.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.outer.clone();
        if self.trainable_inner {
            p.extend_from_slice(&self.inner);
        }
        p
    }

    pub fn set_params(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.num_params() {
            return Err(Error::DimensionMismatch(format!(
                "{} parameters for a model with {}",
                p.len(),
                self.num_params()
            )));
        }
        let m = self.num_features();
        self.outer.copy_from_slice(&p[..m]);
        if self.trainable_inner {
            self.inner.copy_from_slice(&p[m..]);
        }
        Ok(())
    }

    /// Applies `θ ← θ - η·g` to the trainable parameters.
    pub fn step(&mut self, grad: &[f64], lr: f64) {
        let m = self.num_features();
        for (a, g) in self.outer.iter_mut().zip(&grad[..m]) {
            *a -= lr * g;
        }
        if self.trainable_inner {
            for (w, g) in self.inner.iter_mut().zip(&grad[m..]) {
                *w -= lr * g;
            }
        }
    }

    #[inline]
    fn feature_eval(&self, k: usize, frame: &CellFrame) -> FeatureEval {
        let d = self.dim();
        let w = &self.inner[k * (d + 1)..(k + 1) * (d + 1)];
        let mut z = w[d];
        let mut slope = [0.0; MAX_DIM];
        for c in 0..d {
            z += w[c] * frame.local[c];
            slope[c] = w[c] * frame.inv_radius[c];
        }
        FeatureEval {
            k,
            psi: frame.psi,
            local: frame.local,
            inv_radius: frame.inv_radius,
            slope,
            sigma: self.activation.derivatives(z),
        }
    }

    /// Evaluates every feature active at `x` into `scratch` and returns the jet of `u`.
    pub(crate) fn point_pass(&self, x: &[f64], scratch: &mut Vec<FeatureEval>) -> Jet {
        scratch.clear();
        let d = self.dim();
        let jn = self.neurons_per_cell;
        let mut u = Jet::default();
        self.partition.for_each_active_cell(x, |frame| {
            for k in frame.cell * jn..(frame.cell + 1) * jn {
                let fe = self.feature_eval(k, frame);
                u.add_scaled(&fe.jet(d), self.outer[k]);
                scratch.push(fe);
            }
        });
        u.scaled(self.output_scale)
    }

    /// Adds `scale · ∂(g·jet(u))/∂θ` into `out`, laid out per `block`.
    pub(crate) fn accumulate(
        &self,
        scratch: &[FeatureEval],
        g: &Jet,
        scale: f64,
        block: ParamBlock,
        out: &mut [f64],
    ) {
        let d = self.dim();
        let m = self.num_features();
        let (want_outer, want_inner, inner_offset) = match block {
            ParamBlock::Outer => (true, false, 0),
            ParamBlock::Inner => (false, true, 0),
            ParamBlock::Trainable => (true, self.trainable_inner, m),
        };
        let s = scale * self.output_scale;
        for fe in scratch {
            let (ga, gw) = fe.sensitivities(g, d);
            if want_outer {
                out[fe.k] += s * ga;
            }
            if want_inner {
                let c = s * self.outer[fe.k];
                let base = inner_offset + fe.k * (d + 1);
                for j in 0..=d {
                    out[base + j] += c * gw[j];
                }
            }
        }
    }

    pub fn eval_jet(&self, x: &[f64]) -> Jet {
        let mut scratch = Vec::new();
        self.point_pass(x, &mut scratch)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_jet(x).value
    }

    pub fn eval_grad_x(&self, x: &[f64]) -> Vec<f64> {
        self.eval_jet(x).grad[..self.dim()].to_vec()
    }

    pub fn eval_hess_diag_x(&self, x: &[f64]) -> Vec<f64> {
        self.eval_jet(x).hess[..self.dim()].to_vec()
    }

    /// Jet of the `k`-th modified basis function `ψ_{n(k)} σ_k` (unscaled).
    pub fn feature_jet(&self, k: usize, x: &[f64]) -> Jet {
        let cell = k / self.neurons_per_cell;
        let mut out = Jet::default();
        self.partition.for_each_active_cell(x, |frame| {
            if frame.cell == cell {
                out = self.feature_eval(k, frame).jet(self.dim());
            }
        });
        out
    }

    /// Rows `∂(g_i · jet(u)(x_i))/∂θ` for every point, with `g_i` supplied per point.
    pub fn jacobian<F>(&self, points: &Points, block: ParamBlock, coeffs: F) -> DMatrix<f64>
    where
        F: Fn(usize, &Jet) -> Jet + Sync,
    {
        let cols = self.param_count(block);
        let n = points.len();
        let mut data = vec![0.0; n * cols];
        if cols > 0 {
            data.par_chunks_mut(cols)
                .enumerate()
                .for_each_init(Vec::new, |scratch, (i, row)| {
                    let u = self.point_pass(points.get(i), scratch);
                    let g = coeffs(i, &u);
                    self.accumulate(scratch, &g, 1.0, block, row);
                });
        }
        DMatrix::from_row_slice(n, cols, &data)
    }
}

/// `Φ_ik = M^{-1/2} (L ψ_{n(k)} σ_k)(x_i)` for a linear operator `L`.
pub fn basis_matrix(
    model: &RandomFeatureModel,
    points: &Points,
    op: &OperatorSpec,
) -> Result<DMatrix<f64>> {
    check_linear(model, points, op)?;
    let coeffs = op.linear;
    Ok(model.jacobian(points, ParamBlock::Outer, |_, _| coeffs))
}

/// `G^[a] = Φ Φᵀ`.
pub fn kernel_ga(phi: &DMatrix<f64>) -> DMatrix<f64> {
    phi * phi.transpose()
}

/// `G^[w] = J_w J_wᵀ`, the Gram matrix of `L u` differentiated with respect to the inner weights.
///
/// For the identity operator this is `M^{-1} Σ_k a_k² σ'(w_k·x_i) σ'(w_k·x_j) (x_i·x_j)` with
/// augmented, cell-local inputs.
pub fn kernel_gw(
    model: &RandomFeatureModel,
    points: &Points,
    op: &OperatorSpec,
) -> Result<DMatrix<f64>> {
    check_linear(model, points, op)?;
    let coeffs = op.linear;
    let jw = model.jacobian(points, ParamBlock::Inner, |_, _| coeffs);
    Ok(&jw * jw.transpose())
}

fn check_linear(model: &RandomFeatureModel, points: &Points, op: &OperatorSpec) -> Result<()> {
    op.validate()?;
    if !op.is_linear() {
        return Err(Error::UnsupportedOperator(
            "nonlinear residuals are assembled by the training code".into(),
        ));
    }
    if op.dim != model.dim() || points.dim() != model.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator dim {}, points dim {}, model dim {}",
            op.dim,
            points.dim(),
            model.dim()
        )));
    }
    Ok(())
}
