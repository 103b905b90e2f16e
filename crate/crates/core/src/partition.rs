//! Partition-of-unity construction functions and uniform domain decomposition.
//!
//! Each cell `n` carries a center `x_n` and half-width `r_n`; the local
//! coordinate `x̃ = (x - x_n) / r_n` maps the cell onto `[-1, 1]`. In several
//! dimensions cells form a tensor grid and `ψ_n(x) = Π_k ψ_{n_k}(x_k)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, MAX_DIM};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const BLEND_INNER: f64 = 0.75;
const BLEND_OUTER: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PouKind {
    /// `ψ_a`: indicator of the half-open cell.
    Characteristic,
    /// `ψ_b`: flat top with sine blends overlapping the neighbours.
    SineBlend,
}

impl PouKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "a" | "characteristic" => Ok(PouKind::Characteristic),
            "b" | "sine" | "sine-blend" => Ok(PouKind::SineBlend),
            other => Err(Error::Config(format!("unknown PoU kind '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PouKind::Characteristic => "a",
            PouKind::SineBlend => "b",
        }
    }
}

pub fn psi_a(x_tilde: f64) -> f64 {
    if (-1.0..1.0).contains(&x_tilde) {
        1.0
    } else {
        0.0
    }
}

/// `[ψ_b, ψ_b', ψ_b'']` with derivatives taken with respect to `x̃`.
///
/// Pieces are half-open on the right, so at a breakpoint the right limit wins.
pub fn psi_b_all(x_tilde: f64) -> [f64; 3] {
    let t = x_tilde;
    if (-BLEND_OUTER..-BLEND_INNER).contains(&t) {
        let (s, c) = (TWO_PI * t).sin_cos();
        [(1.0 + s) / 2.0, std::f64::consts::PI * c, -TWO_PI * std::f64::consts::PI * s]
    } else if (-BLEND_INNER..BLEND_INNER).contains(&t) {
        [1.0, 0.0, 0.0]
    } else if (BLEND_INNER..BLEND_OUTER).contains(&t) {
        let (s, c) = (TWO_PI * t).sin_cos();
        [(1.0 - s) / 2.0, -std::f64::consts::PI * c, TWO_PI * std::f64::consts::PI * s]
    } else {
        [0.0; 3]
    }
}

pub fn psi_b(x_tilde: f64) -> f64 {
    psi_b_all(x_tilde)[0]
}

pub fn psi_b_d1(x_tilde: f64) -> f64 {
    psi_b_all(x_tilde)[1]
}

pub fn psi_b_d2(x_tilde: f64) -> f64 {
    psi_b_all(x_tilde)[2]
}

/// One axis of a uniform tensor partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisPartition {
    pub lo: f64,
    pub hi: f64,
    pub centers: Vec<f64>,
    pub radii: Vec<f64>,
}

impl AxisPartition {
    pub fn uniform(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidPartition("cell count must be >= 1".into()));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidPartition(format!(
                "degenerate interval [{lo}, {hi}]"
            )));
        }
        let r = (hi - lo) / (2.0 * count as f64);
        let centers = (0..count).map(|n| lo + (2 * n + 1) as f64 * r).collect();
        Ok(AxisPartition {
            lo,
            hi,
            centers,
            radii: vec![r; count],
        })
    }

    pub fn count(&self) -> usize {
        self.centers.len()
    }

    /// Cell owning `x` under the half-open rule, with the last cell closed at `hi`.
    pub fn locate(&self, x: f64) -> usize {
        let width = 2.0 * self.radii[0];
        let idx = ((x - self.lo) / width).floor();
        if idx <= 0.0 {
            0
        } else {
            (idx as usize).min(self.count() - 1)
        }
    }

    pub fn local(&self, cell: usize, x: f64) -> f64 {
        (x - self.centers[cell]) / self.radii[cell]
    }

    /// `[ψ, dψ/dx̃, d²ψ/dx̃²]` of `cell` at `x`, including the boundary extension of edge cells.
    pub fn factor(&self, kind: PouKind, cell: usize, x: f64) -> [f64; 3] {
        match kind {
            PouKind::Characteristic => {
                if self.locate(x) == cell {
                    [1.0, 0.0, 0.0]
                } else {
                    [0.0; 3]
                }
            }
            PouKind::SineBlend => {
                let t = self.local(cell, x);
                let first = cell == 0;
                let last = cell + 1 == self.count();
                if (first && (-BLEND_OUTER..-BLEND_INNER).contains(&t))
                    || (last && (BLEND_INNER..BLEND_OUTER).contains(&t))
                {
                    [1.0, 0.0, 0.0]
                } else {
                    psi_b_all(t)
                }
            }
        }
    }

    fn candidates(&self, kind: PouKind, x: f64) -> ([usize; 3], usize) {
        let home = self.locate(x);
        match kind {
            PouKind::Characteristic => ([home, 0, 0], 1),
            PouKind::SineBlend => {
                let mut out = [0usize; 3];
                let mut n = 0;
                let lo = home.saturating_sub(1);
                let hi = (home + 1).min(self.count() - 1);
                for cell in lo..=hi {
                    let t = self.local(cell, x);
                    if (-BLEND_OUTER..BLEND_OUTER).contains(&t) {
                        out[n] = cell;
                        n += 1;
                    }
                }
                (out, n)
            }
        }
    }

    fn breakpoints(&self, cell: usize) -> [f64; 4] {
        let (c, r) = (self.centers[cell], self.radii[cell]);
        [
            c - BLEND_OUTER * r,
            c - BLEND_INNER * r,
            c + BLEND_INNER * r,
            c + BLEND_OUTER * r,
        ]
    }
}

/// Local frame of one active cell at a point.
#[derive(Debug, Clone, Copy)]
pub struct CellFrame {
    pub cell: usize,
    /// `x̃` per dimension.
    pub local: [f64; MAX_DIM],
    pub inv_radius: [f64; MAX_DIM],
    /// `ψ_n` and its physical-coordinate derivatives.
    pub psi: Jet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub kind: PouKind,
    pub axes: Vec<AxisPartition>,
}

impl Partition {
    pub fn uniform(domain: &[(f64, f64)], counts: &[usize], kind: PouKind) -> Result<Self> {
        if domain.is_empty() || domain.len() > MAX_DIM {
            return Err(Error::InvalidPartition(format!(
                "dimension must be between 1 and {MAX_DIM}, got {}",
                domain.len()
            )));
        }
        if domain.len() != counts.len() {
            return Err(Error::InvalidPartition(format!(
                "{} intervals but {} cell counts",
                domain.len(),
                counts.len()
            )));
        }
        let axes = domain
            .iter()
            .zip(counts)
            .map(|(&(lo, hi), &c)| AxisPartition::uniform(lo, hi, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Partition { kind, axes })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Total number of cells `M_p`.
    pub fn count(&self) -> usize {
        self.axes.iter().map(AxisPartition::count).product()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.axes.iter().map(AxisPartition::count).collect()
    }

    /// Linear index of a multi-index; the last axis varies fastest.
    pub fn linear_index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.axes)
            .fold(0, |acc, (&i, axis)| acc * axis.count() + i)
    }

    pub fn multi_index(&self, mut cell: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        for k in (0..self.dim()).rev() {
            let c = self.axes[k].count();
            out[k] = cell % c;
            cell /= c;
        }
        out
    }

    pub fn center(&self, cell: usize) -> [f64; MAX_DIM] {
        let multi = self.multi_index(cell);
        let mut out = [0.0; MAX_DIM];
        for (k, axis) in self.axes.iter().enumerate() {
            out[k] = axis.centers[multi[k]];
        }
        out
    }

    fn frame(&self, cell: usize, multi: &[usize; MAX_DIM], x: &[f64]) -> CellFrame {
        let d = self.dim();
        let mut local = [0.0; MAX_DIM];
        let mut inv_radius = [0.0; MAX_DIM];
        let mut factors = [[0.0; 3]; MAX_DIM];
        for k in 0..d {
            let axis = &self.axes[k];
            local[k] = axis.local(multi[k], x[k]);
            inv_radius[k] = 1.0 / axis.radii[multi[k]];
            factors[k] = axis.factor(self.kind, multi[k], x[k]);
        }
        let mut psi = Jet::default();
        psi.value = factors[..d].iter().map(|f| f[0]).product();
        for k in 0..d {
            let others: f64 = (0..d).filter(|&e| e != k).map(|e| factors[e][0]).product();
            psi.grad[k] = factors[k][1] * inv_radius[k] * others;
            psi.hess[k] = factors[k][2] * inv_radius[k] * inv_radius[k] * others;
        }
        CellFrame {
            cell,
            local,
            inv_radius,
            psi,
        }
    }

    /// `ψ_n(x)` with gradient and second derivatives.
    pub fn psi(&self, x: &[f64], cell: usize) -> Result<Jet> {
        if cell >= self.count() {
            return Err(Error::CellOutOfRange {
                index: cell,
                count: self.count(),
            });
        }
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "point of dimension {} in a {}-d partition",
                x.len(),
                self.dim()
            )));
        }
        let multi = self.multi_index(cell);
        Ok(self.frame(cell, &multi, x).psi)
    }

    /// Calls `f` for every cell whose construction function (or its derivatives) is nonzero at `x`.
    pub fn for_each_active_cell(&self, x: &[f64], mut f: impl FnMut(&CellFrame)) {
        let d = self.dim();
        let mut cand = [[0usize; 3]; MAX_DIM];
        let mut ncand = [1usize; MAX_DIM];
        for k in 0..d {
            let (c, n) = self.axes[k].candidates(self.kind, x[k]);
            if n == 0 {
                return;
            }
            cand[k] = c;
            ncand[k] = n;
        }
        let mut odo = [0usize; MAX_DIM];
        loop {
            let mut multi = [0usize; MAX_DIM];
            for k in 0..d {
                multi[k] = cand[k][odo[k]];
            }
            let cell = self.linear_index(&multi[..d]);
            let frame = self.frame(cell, &multi, x);
            let p = &frame.psi;
            if p.value != 0.0 || p.grad[..d].iter().chain(&p.hess[..d]).any(|v| *v != 0.0) {
                f(&frame);
            }
            let mut k = 0;
            loop {
                if k == d {
                    return;
                }
                odo[k] += 1;
                if odo[k] < ncand[k] {
                    break;
                }
                odo[k] = 0;
                k += 1;
            }
        }
    }

    /// Moves coordinates sitting exactly on a `ψ_b` breakpoint to the adjacent float.
    pub fn nudge_off_breakpoints(&self, x: &mut [f64]) {
        if self.kind != PouKind::SineBlend {
            return;
        }
        for (k, axis) in self.axes.iter().enumerate() {
            for cell in 0..axis.count() {
                if axis.breakpoints(cell).contains(&x[k]) {
                    x[k] = if x[k] < axis.hi {
                        x[k].next_up()
                    } else {
                        x[k].next_down()
                    };
                }
            }
        }
    }
}
