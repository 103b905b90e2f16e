//! Point sets: uniform tensor grids, box boundaries and trapezoid weights.

use crate::error::{Error, Result};
use crate::jet::MAX_DIM;

/// A flat list of `dim`-dimensional points.
#[derive(Debug, Clone, PartialEq)]
pub struct Points {
    dim: usize,
    coords: Vec<f64>,
}

impl Points {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM || coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates do not form {dim}-d points",
                coords.len()
            )));
        }
        Ok(Points { dim, coords })
    }

    pub fn from_1d(xs: &[f64]) -> Self {
        Points {
            dim: 1,
            coords: xs.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Every `stride`-th point.
    pub fn subsample(&self, stride: usize) -> Points {
        let stride = stride.max(1);
        let coords = self
            .iter()
            .step_by(stride)
            .flat_map(|p| p.iter().copied())
            .collect();
        Points {
            dim: self.dim,
            coords,
        }
    }
}

/// `n` equispaced points on `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => {
            let h = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i + 1 == n { hi } else { lo + i as f64 * h })
                .collect()
        }
    }
}

/// `n` equispaced points strictly inside `(lo, hi)`.
pub fn interior_linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / (n + 1) as f64;
    (1..=n).map(|i| lo + i as f64 * h).collect()
}

/// Trapezoid weights for [`linspace`] with the same arguments.
pub fn trapezoid_weights(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![hi - lo; n];
    }
    let h = (hi - lo) / (n - 1) as f64;
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}

/// Tensor product of per-axis coordinate lists; the last axis varies fastest.
pub fn tensor(axes: &[Vec<f64>]) -> Points {
    let dim = axes.len();
    let total: usize = axes.iter().map(Vec::len).product();
    let mut coords = Vec::with_capacity(total * dim);
    let mut idx = vec![0usize; dim];
    for _ in 0..total {
        for k in 0..dim {
            coords.push(axes[k][idx[k]]);
        }
        for k in (0..dim).rev() {
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
    Points { dim, coords }
}

/// Tensor product of per-axis weights, in the order of [`tensor`].
pub fn tensor_weights(axes: &[Vec<f64>]) -> Vec<f64> {
    let pts = tensor(axes);
    pts.iter().map(|p| p.iter().product()).collect()
}

/// Boundary points of a box together with outward unit normals.
///
/// In 1-d these are the two endpoints. In 2-d each side carries the `n`
/// interior points of that side (corners excluded), `4n` in total.
pub fn box_boundary(domain: &[(f64, f64)], n: usize) -> (Points, Vec<[f64; MAX_DIM]>) {
    match domain.len() {
        1 => {
            let (lo, hi) = domain[0];
            let mut normals = vec![[0.0; MAX_DIM]; 2];
            normals[0][0] = -1.0;
            normals[1][0] = 1.0;
            (Points::from_1d(&[lo, hi]), normals)
        }
        2 => {
            let (xlo, xhi) = domain[0];
            let (ylo, yhi) = domain[1];
            let xs = interior_linspace(xlo, xhi, n);
            let ys = interior_linspace(ylo, yhi, n);
            let mut coords = Vec::with_capacity(8 * n);
            let mut normals = Vec::with_capacity(4 * n);
            for &x in &xs {
                coords.extend([x, ylo]);
                normals.push([0.0, -1.0, 0.0]);
            }
            for &x in &xs {
                coords.extend([x, yhi]);
                normals.push([0.0, 1.0, 0.0]);
            }
            for &y in &ys {
                coords.extend([xlo, y]);
                normals.push([-1.0, 0.0, 0.0]);
            }
            for &y in &ys {
                coords.extend([xhi, y]);
                normals.push([1.0, 0.0, 0.0]);
            }
            (Points { dim: 2, coords }, normals)
        }
        d => panic!("box boundary not implemented for dimension {d}"),
    }
}
