//! Full-batch gradient descent, kernel snapshots, the direct least-squares solve
//! and the diagonal-system toy.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{basis_matrix, OperatorSpec, ParamBlock, RandomFeatureModel};
use crate::grid::Points;
use crate::jet::Jet;
use crate::linalg::{effective_rank, least_squares_solve, sym_eigendecomp};
use crate::problems::{error_metrics, ErrorMetrics, LossKind, Problem, ProblemKind};

/// Kernels are assembled on at most this many interior points.
pub const SNAPSHOT_MAX_POINTS: usize = 1024;

const POWER_ITERATIONS: usize = 2000;
const POWER_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrainMode {
    /// Only the outer coefficients move (random feature model).
    OuterOnly,
    /// Inner and outer weights move.
    Full,
}

impl TrainMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "rfm" | "outer" => Ok(TrainMode::OuterOnly),
            "full" => Ok(TrainMode::Full),
            other => Err(Error::Config(format!("unknown mode '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TrainMode::OuterOnly => "rfm",
            TrainMode::Full => "full",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Step size; `None` picks the inverse of the largest Gauss-Newton curvature at the start.
    pub lr: Option<f64>,
    pub epochs: usize,
    /// Overrides the problem's boundary weight.
    pub gamma: Option<f64>,
    pub seed: u64,
    /// Epochs at which kernel snapshots are taken; empty means first and last.
    pub snapshot_epochs: Vec<usize>,
    pub mode: TrainMode,
    /// Error metrics are recorded every this many epochs (and at the end); 0 records only the end.
    pub metrics_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: None,
            epochs: 1000,
            gamma: None,
            seed: 0,
            snapshot_epochs: Vec::new(),
            mode: TrainMode::OuterOnly,
            metrics_every: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidTraining("epochs must be >= 1".into()));
        }
        if let Some(lr) = self.lr {
            if !(lr > 0.0 && lr.is_finite()) {
                return Err(Error::InvalidTraining(format!("learning rate {lr} must be positive")));
            }
        }
        if let Some(&e) = self.snapshot_epochs.iter().find(|&&e| e > self.epochs) {
            return Err(Error::InvalidTraining(format!(
                "snapshot epoch {e} beyond {} epochs",
                self.epochs
            )));
        }
        Ok(())
    }

    pub fn resolved_snapshots(&self) -> Vec<usize> {
        let mut s = if self.snapshot_epochs.is_empty() {
            vec![0, self.epochs]
        } else {
            self.snapshot_epochs.clone()
        };
        s.sort_unstable();
        s.dedup();
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSnapshot {
    pub epoch: usize,
    /// Descending, clamped at zero.
    pub eigenvalues: Vec<f64>,
    pub erank: f64,
    /// `Q e` for the interior residual `e` on the snapshot points.
    pub projected_residual: Vec<f64>,
    /// `Σ e_i²` on the snapshot points.
    pub residual_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub lr: f64,
    pub gamma: f64,
    /// Loss after each epoch, starting with the initial loss.
    pub losses: Vec<f64>,
    pub metrics: Vec<(usize, ErrorMetrics)>,
    pub snapshots: Vec<KernelSnapshot>,
}

impl TrainingRecord {
    pub fn final_loss(&self) -> f64 {
        *self.losses.last().expect("record holds the initial loss")
    }

    pub fn final_metrics(&self) -> Option<ErrorMetrics> {
        self.metrics.last().map(|m| m.1)
    }
}

/// Point data of a loss, with collocation points moved off partition breakpoints.
#[derive(Debug, Clone)]
pub struct LossData {
    kind: LossKind,
    op: OperatorSpec,
    gamma: f64,
    interior: Points,
    targets: Vec<f64>,
    weights: Vec<f64>,
    boundary: Points,
    /// Dirichlet data for collocation, outward flux for Ritz.
    boundary_data: Vec<f64>,
}

impl LossData {
    pub fn for_problem(problem: &Problem, model: &RandomFeatureModel, gamma: Option<f64>) -> Result<Self> {
        if problem.dim() != model.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} is {}-d but the model is {}-d",
                problem.name(),
                problem.dim(),
                model.dim()
            )));
        }
        let mut interior = problem.interior.clone();
        for i in 0..interior.len() {
            model.partition().nudge_off_breakpoints(interior.get_mut(i));
        }
        let targets = interior.iter().map(|x| problem.forcing(x)).collect();
        let boundary_data = match problem.loss {
            LossKind::Ritz => problem
                .boundary
                .iter()
                .zip(&problem.normals)
                .map(|(x, n)| problem.normal_flux(x, n))
                .collect(),
            _ => problem.boundary_targets(),
        };
        Ok(LossData {
            kind: problem.loss,
            op: problem.operator,
            gamma: gamma.unwrap_or(problem.gamma),
            interior,
            targets,
            weights: problem.weights.clone(),
            boundary: problem.boundary.clone(),
            boundary_data,
        })
    }

    pub fn supervised(points: &Points, targets: &[f64]) -> Result<Self> {
        if points.len() != targets.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} points, {} targets",
                points.len(),
                targets.len()
            )));
        }
        Ok(LossData {
            kind: LossKind::Supervised,
            op: OperatorSpec::identity(points.dim()),
            gamma: 0.0,
            interior: points.clone(),
            targets: targets.to_vec(),
            weights: vec![1.0; points.len()],
            boundary: Points::new(points.dim(), Vec::new())?,
            boundary_data: Vec::new(),
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn interior(&self) -> &Points {
        &self.interior
    }

    fn dim(&self) -> usize {
        self.interior.dim()
    }

    /// Loss contribution and its derivative with respect to the jet of `u` at interior point `i`.
    #[inline]
    fn interior_term(&self, i: usize, u: &Jet) -> (f64, Jet) {
        match self.kind {
            LossKind::Supervised => {
                let r = u.value - self.targets[i];
                (r * r, Jet::constant(2.0 * r))
            }
            LossKind::Collocation => {
                let r = self.op.apply(u) - self.targets[i];
                (r * r, self.op.linearization(u).scaled(2.0 * r))
            }
            LossKind::Ritz => {
                let q = self.weights[i];
                let f = self.targets[i];
                let d = self.dim();
                let grad2: f64 = u.grad[..d].iter().map(|g| g * g).sum();
                let mut g = Jet::constant(q * (u.value - f));
                for k in 0..d {
                    g.grad[k] = q * u.grad[k];
                }
                (q * (0.5 * grad2 + 0.5 * u.value * u.value - f * u.value), g)
            }
        }
    }

    #[inline]
    fn boundary_term(&self, b: usize, u: &Jet) -> (f64, Jet) {
        match self.kind {
            LossKind::Supervised => (0.0, Jet::default()),
            LossKind::Collocation => {
                let r = u.value - self.boundary_data[b];
                (self.gamma * r * r, Jet::constant(2.0 * self.gamma * r))
            }
            LossKind::Ritz => {
                let h = self.boundary_data[b];
                (-h * u.value, Jet::constant(-h))
            }
        }
    }

    /// Loss and gradient with respect to the model's trainable parameters.
    pub fn loss_grad(&self, model: &RandomFeatureModel) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; model.num_params()];
        let mut scratch = Vec::new();
        let mut loss = 0.0;
        for (i, x) in self.interior.iter().enumerate() {
            let u = model.point_pass(x, &mut scratch);
            let (l, g) = self.interior_term(i, &u);
            loss += l;
            model.accumulate(&scratch, &g, 1.0, ParamBlock::Trainable, &mut grad);
        }
        for (b, x) in self.boundary.iter().enumerate() {
            let u = model.point_pass(x, &mut scratch);
            let (l, g) = self.boundary_term(b, &u);
            loss += l;
            model.accumulate(&scratch, &g, 1.0, ParamBlock::Trainable, &mut grad);
        }
        (loss, grad)
    }

    pub fn loss(&self, model: &RandomFeatureModel) -> f64 {
        let mut loss = 0.0;
        for (i, x) in self.interior.iter().enumerate() {
            loss += self.interior_term(i, &model.eval_jet(x)).0;
        }
        for (b, x) in self.boundary.iter().enumerate() {
            loss += self.boundary_term(b, &model.eval_jet(x)).0;
        }
        loss
    }

    /// Interior residual `L u(x_i) - f(x_i)` at the given points.
    fn residual_at(&self, model: &RandomFeatureModel, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .map(|&i| self.op.apply(&model.eval_jet(self.interior.get(i))) - self.targets[i])
            .collect()
    }

    /// Jacobian `J` with Gauss-Newton Hessian `c·JᵀJ`; returns `(J, c)`.
    fn gauss_newton(&self, model: &RandomFeatureModel) -> (DMatrix<f64>, f64) {
        let d = self.dim();
        let mut blocks = Vec::new();
        match self.kind {
            LossKind::Supervised | LossKind::Collocation => {
                let op = self.op;
                blocks.push(model.jacobian(&self.interior, ParamBlock::Trainable, |_, u| {
                    op.linearization(u)
                }));
                if self.kind == LossKind::Collocation && !self.boundary.is_empty() {
                    let s = self.gamma.sqrt();
                    blocks.push(model.jacobian(&self.boundary, ParamBlock::Trainable, |_, _| {
                        Jet::constant(s)
                    }));
                }
                (stack(&blocks, model.num_params()), 2.0)
            }
            LossKind::Ritz => {
                let w = &self.weights;
                blocks.push(model.jacobian(&self.interior, ParamBlock::Trainable, |i, _| {
                    Jet::constant(w[i].sqrt())
                }));
                for k in 0..d {
                    blocks.push(model.jacobian(&self.interior, ParamBlock::Trainable, |i, _| {
                        let mut g = Jet::default();
                        g.grad[k] = w[i].sqrt();
                        g
                    }));
                }
                (stack(&blocks, model.num_params()), 1.0)
            }
        }
    }

    /// `1 / λ_max` of the Gauss-Newton Hessian at the current parameters.
    pub fn default_lr(&self, model: &RandomFeatureModel) -> Result<f64> {
        let (j, c) = self.gauss_newton(model);
        let lmax = largest_gram_eigenvalue(&j);
        if !(lmax > 0.0 && lmax.is_finite()) {
            return Err(Error::InvalidTraining(
                "cannot pick a step size: the loss has no curvature at the initial point".into(),
            ));
        }
        Ok(1.0 / (c * lmax))
    }
}

fn stack(blocks: &[DMatrix<f64>], cols: usize) -> DMatrix<f64> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        out.rows_mut(r, b.nrows()).copy_from(b);
        r += b.nrows();
    }
    out
}

/// Largest eigenvalue of `JᵀJ` by power iteration from a fixed start.
pub fn largest_gram_eigenvalue(j: &DMatrix<f64>) -> f64 {
    let n = j.ncols();
    if n == 0 || j.nrows() == 0 {
        return 0.0;
    }
    let mut v = DVector::from_fn(n, |i, _| 1.0 + (i as f64 * 0.618_033_988_75).fract());
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let w = j * &v;
        let z = j.tr_mul(&w);
        let next = v.dot(&z);
        let norm = z.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = z / norm;
        if (next - lambda).abs() <= POWER_TOLERANCE * next {
            return next.max(norm);
        }
        lambda = next;
    }
    lambda
}

/// Per-point feature jets for fixed inner weights, so each epoch is a sparse product.
///
/// Each entry packs `1 + 2d` numbers: value, gradient, then pure second derivatives.
struct OuterCache {
    dim: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    packed: Vec<f64>,
}

impl OuterCache {
    fn build(model: &RandomFeatureModel, points: &Points) -> Self {
        let d = model.dim();
        let scale = model.output_scale();
        let mut offsets = vec![0];
        let mut cols = Vec::new();
        let mut packed = Vec::new();
        let mut scratch = Vec::new();
        for x in points.iter() {
            model.point_pass(x, &mut scratch);
            for fe in &scratch {
                let j = fe.jet(d).scaled(scale);
                cols.push(fe.k);
                packed.push(j.value);
                packed.extend_from_slice(&j.grad[..d]);
                packed.extend_from_slice(&j.hess[..d]);
            }
            offsets.push(cols.len());
        }
        OuterCache {
            dim: d,
            offsets,
            cols,
            packed,
        }
    }

    #[inline]
    fn eval(&self, i: usize, a: &[f64]) -> Jet {
        let d = self.dim;
        let stride = 1 + 2 * d;
        let mut u = Jet::default();
        for p in self.offsets[i]..self.offsets[i + 1] {
            let c = a[self.cols[p]];
            let e = &self.packed[p * stride..(p + 1) * stride];
            u.value += c * e[0];
            for k in 0..d {
                u.grad[k] += c * e[1 + k];
                u.hess[k] += c * e[1 + d + k];
            }
        }
        u
    }

    #[inline]
    fn scatter(&self, i: usize, g: &Jet, grad: &mut [f64]) {
        let d = self.dim;
        let stride = 1 + 2 * d;
        for p in self.offsets[i]..self.offsets[i + 1] {
            let e = &self.packed[p * stride..(p + 1) * stride];
            let mut s = g.value * e[0];
            for k in 0..d {
                s += g.grad[k] * e[1 + k] + g.hess[k] * e[1 + d + k];
            }
            grad[self.cols[p]] += s;
        }
    }
}

struct OuterLoss<'a> {
    data: &'a LossData,
    interior: OuterCache,
    boundary: OuterCache,
}

impl<'a> OuterLoss<'a> {
    fn new(data: &'a LossData, model: &RandomFeatureModel) -> Self {
        OuterLoss {
            data,
            interior: OuterCache::build(model, &data.interior),
            boundary: OuterCache::build(model, &data.boundary),
        }
    }

    fn loss_grad(&self, a: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        for i in 0..self.data.interior.len() {
            let u = self.interior.eval(i, a);
            let (l, g) = self.data.interior_term(i, &u);
            loss += l;
            self.interior.scatter(i, &g, grad);
        }
        for b in 0..self.data.boundary.len() {
            let u = self.boundary.eval(b, a);
            let (l, g) = self.data.boundary_term(b, &u);
            loss += l;
            self.boundary.scatter(b, &g, grad);
        }
        loss
    }
}

pub fn supervised_loss_grad(
    model: &RandomFeatureModel,
    points: &Points,
    targets: &[f64],
) -> Result<(f64, Vec<f64>)> {
    Ok(LossData::supervised(points, targets)?.loss_grad(model))
}

pub fn pinn_loss_grad(model: &RandomFeatureModel, problem: &Problem) -> Result<(f64, Vec<f64>)> {
    if problem.loss != LossKind::Collocation {
        return Err(Error::WrongProblem {
            expected: "a collocation problem",
            got: problem.name().into(),
        });
    }
    problem.operator.validate()?;
    Ok(LossData::for_problem(problem, model, None)?.loss_grad(model))
}

pub fn ritz_loss_grad(model: &RandomFeatureModel, problem: &Problem) -> Result<(f64, Vec<f64>)> {
    if problem.kind != ProblemKind::EllipticRitz1d {
        return Err(Error::WrongProblem {
            expected: "ritz1d",
            got: problem.name().into(),
        });
    }
    Ok(LossData::for_problem(problem, model, None)?.loss_grad(model))
}

fn snapshot_indices(n: usize) -> Vec<usize> {
    let stride = n.div_ceil(SNAPSHOT_MAX_POINTS).max(1);
    (0..n).step_by(stride).collect()
}

fn snapshot_from(data: &LossData, model: &RandomFeatureModel, epoch: usize) -> Result<KernelSnapshot> {
    let idx = snapshot_indices(data.interior.len());
    let coords: Vec<f64> = idx
        .iter()
        .flat_map(|&i| data.interior.get(i).iter().copied())
        .collect();
    let pts = Points::new(data.dim(), coords)?;
    let op = data.op;
    let j = model.jacobian(&pts, ParamBlock::Trainable, |_, u| op.linearization(u));
    let g = &j * j.transpose();
    let spec = sym_eigendecomp(&g)?;
    let e = data.residual_at(model, &idx);
    let projected = spec.project(&e)?;
    Ok(KernelSnapshot {
        epoch,
        erank: spec.effective_rank()?,
        eigenvalues: spec.eigenvalues,
        projected_residual: projected,
        residual_energy: e.iter().map(|r| r * r).sum(),
    })
}

/// Spectrum of the active training kernel on the interior grid.
///
/// The kernel is `J Jᵀ` for the Jacobian of the interior residual with respect
/// to the trainable parameters. For linear operators in outer-only mode this is
/// `Φ Φᵀ`; with trainable inner weights it is `G^[a] + G^[w]`.
pub fn kernel_snapshot(
    model: &RandomFeatureModel,
    problem: &Problem,
    mode: TrainMode,
) -> Result<KernelSnapshot> {
    let mut m = model.clone();
    m.set_trainable_inner(mode == TrainMode::Full);
    let data = LossData::for_problem(problem, &m, None)?;
    snapshot_from(&data, &m, 0)
}

/// Runs full-batch gradient descent on the problem's loss.
pub fn gd_train(
    model: &mut RandomFeatureModel,
    problem: &Problem,
    cfg: &TrainConfig,
) -> Result<TrainingRecord> {
    cfg.validate()?;
    problem.operator.validate()?;
    model.set_trainable_inner(cfg.mode == TrainMode::Full);
    let data = LossData::for_problem(problem, model, cfg.gamma)?;
    train_on(model, &data, cfg, Some(problem))
}

/// Gradient descent on an arbitrary [`LossData`]; error metrics need a problem.
pub fn train_on(
    model: &mut RandomFeatureModel,
    data: &LossData,
    cfg: &TrainConfig,
    problem: Option<&Problem>,
) -> Result<TrainingRecord> {
    cfg.validate()?;
    let lr = match cfg.lr {
        Some(lr) => lr,
        None => data.default_lr(model)?,
    };
    let snaps = cfg.resolved_snapshots();
    let mut record = TrainingRecord {
        lr,
        gamma: data.gamma,
        losses: Vec::with_capacity(cfg.epochs + 1),
        metrics: Vec::new(),
        snapshots: Vec::new(),
    };
    let fast = if model.trainable_inner() {
        None
    } else {
        Some(OuterLoss::new(data, model))
    };
    let mut params = model.params();
    let mut grad = vec![0.0; params.len()];

    for epoch in 0..=cfg.epochs {
        let loss = match &fast {
            Some(f) => f.loss_grad(&params, &mut grad),
            None => {
                model.set_params(&params)?;
                let (l, g) = data.loss_grad(model);
                grad = g;
                l
            }
        };
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch, loss });
        }
        record.losses.push(loss);

        let wants_snapshot = snaps.binary_search(&epoch).is_ok();
        let wants_metrics = problem.is_some()
            && (epoch == cfg.epochs || (cfg.metrics_every > 0 && epoch % cfg.metrics_every == 0));
        if wants_snapshot || wants_metrics {
            model.set_params(&params)?;
            if wants_snapshot {
                record.snapshots.push(snapshot_from(data, model, epoch)?);
            }
            if let (true, Some(p)) = (wants_metrics, problem) {
                record.metrics.push((epoch, error_metrics(model, p)?));
            }
        }
        if epoch == cfg.epochs {
            break;
        }
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= lr * g;
        }
    }
    model.set_params(&params)?;
    Ok(record)
}

/// Fits the outer coefficients directly by linear least squares and writes them into the model.
pub fn rfm_solve(model: &mut RandomFeatureModel, problem: &Problem) -> Result<Vec<f64>> {
    problem.operator.validate()?;
    if !problem.operator.is_linear() {
        return Err(Error::UnsupportedOperator(format!(
            "{} is nonlinear; train it with gradient descent instead",
            problem.name()
        )));
    }
    let data = LossData::for_problem(problem, model, None)?;
    let (a_mat, rhs) = match problem.loss {
        LossKind::Supervised | LossKind::Collocation => {
            let mut blocks = vec![basis_matrix(model, &data.interior, &data.op)?];
            let mut rhs = data.targets.clone();
            if problem.loss == LossKind::Collocation && !data.boundary.is_empty() {
                let s = data.gamma.sqrt();
                let b = basis_matrix(model, &data.boundary, &OperatorSpec::identity(model.dim()))?;
                blocks.push(b * s);
                rhs.extend(data.boundary_data.iter().map(|g| s * g));
            }
            (stack(&blocks, model.num_features()), DVector::from_vec(rhs))
        }
        LossKind::Ritz => {
            // stationarity of the quadratic energy: H a = c
            let mut m = model.clone();
            m.set_trainable_inner(false);
            let (j, _) = data.gauss_newton(&m);
            let h = j.tr_mul(&j);
            let zero = vec![0.0; m.num_features()];
            m.set_outer(&zero)?;
            let (_, g0) = data.loss_grad(&m);
            (h, -DVector::from_vec(g0))
        }
    };
    let a = least_squares_solve(&a_mat, &rhs)?;
    let a: Vec<f64> = a.iter().copied().collect();
    model.set_outer(&a)?;
    Ok(a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumKind {
    Equal,
    Geometric,
    Linear,
    /// `k` copies of the largest value, the rest equal to the smallest.
    TwoCluster { k: usize },
}

pub const DEFAULT_CLUSTER: usize = 8;

impl SpectrumKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "equal" => Ok(SpectrumKind::Equal),
            "geometric" => Ok(SpectrumKind::Geometric),
            "linear" => Ok(SpectrumKind::Linear),
            "two-cluster" | "cluster" => Ok(SpectrumKind::TwoCluster { k: DEFAULT_CLUSTER }),
            other => Err(Error::Config(format!("unknown spectrum kind '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SpectrumKind::Equal => "equal",
            SpectrumKind::Geometric => "geometric",
            SpectrumKind::Linear => "linear",
            SpectrumKind::TwoCluster { .. } => "two-cluster",
        }
    }

    /// `n` values from `hi` down to `lo`.
    pub fn values(&self, n: usize, hi: f64, lo: f64) -> Vec<f64> {
        let t = |i: usize| if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
        (0..n)
            .map(|i| match *self {
                SpectrumKind::Equal => hi,
                SpectrumKind::Geometric => hi * (lo / hi).powf(t(i)),
                SpectrumKind::Linear => hi + (lo - hi) * t(i),
                SpectrumKind::TwoCluster { k } => {
                    if i < k {
                        hi
                    } else {
                        lo
                    }
                }
            })
            .collect()
    }
}

/// Seeded `U(-1, 1)` right-hand side for the toy problem.
pub fn toy_rhs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagToyRecord {
    pub losses: Vec<f64>,
    /// `modes[t][i]` is the squared error of mode `i` after `t` epochs.
    pub modes: Vec<Vec<f64>>,
    pub erank: f64,
}

/// Gradient descent on `(1/N) Σ (√λ_i x_i - b_i)²` from `x = 0`.
///
/// The kernel of this system is `diag(λ)`, so mode `i` contracts by
/// `1 - 2ηλ_i/N` per step.
pub fn diag_toy_run(lambdas: &[f64], b: &[f64], lr: f64, epochs: usize) -> Result<DiagToyRecord> {
    if lambdas.is_empty() || lambdas.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} eigenvalues, {} right-hand side entries",
            lambdas.len(),
            b.len()
        )));
    }
    if lambdas.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::InvalidSpectrum("toy eigenvalues must be positive".into()));
    }
    if lambdas.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidSpectrum("toy eigenvalues must be sorted descending".into()));
    }
    if !(lr > 0.0) {
        return Err(Error::InvalidTraining(format!("learning rate {lr} must be positive")));
    }
    let n = lambdas.len() as f64;
    let a: Vec<f64> = lambdas.iter().map(|l| l.sqrt()).collect();
    let mut x = vec![0.0; lambdas.len()];
    let mut losses = Vec::with_capacity(epochs + 1);
    let mut modes = Vec::with_capacity(epochs + 1);
    for t in 0..=epochs {
        let r: Vec<f64> = a.iter().zip(&x).zip(b).map(|((a, x), b)| a * x - b).collect();
        let sq: Vec<f64> = r.iter().map(|r| r * r).collect();
        losses.push(sq.iter().sum::<f64>() / n);
        modes.push(sq);
        if t == epochs {
            break;
        }
        for i in 0..x.len() {
            x[i] -= lr * 2.0 * a[i] * r[i] / n;
        }
    }
    Ok(DiagToyRecord {
        losses,
        modes,
        erank: effective_rank(lambdas)?,
    })
}

/// Closed-form squared error of mode `i` after `t` steps of [`diag_toy_run`].
pub fn diag_toy_mode_error(lambda: f64, b: f64, n: usize, lr: f64, t: usize) -> f64 {
    (1.0 - 2.0 * lr * lambda / n as f64).powi(2 * t as i32) * b * b
}
