/// Largest spatial dimension supported by the model and partition code.
pub const MAX_DIM: usize = 3;

/// Value, gradient and diagonal of the Hessian of a scalar field at a point.
///
/// The same layout doubles as a set of operator coefficients: a linear
/// second-order operator without mixed terms is `c0·u + Σ c1_k ∂_k u + Σ c2_k ∂_kk u`,
/// which is `coeffs.dot(&u_jet)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; MAX_DIM],
    pub hess: [f64; MAX_DIM],
}

impl Jet {
    pub fn constant(value: f64) -> Self {
        Jet {
            value,
            ..Jet::default()
        }
    }

    pub fn dot(&self, other: &Jet, dim: usize) -> f64 {
        let mut s = self.value * other.value;
        for k in 0..dim {
            s += self.grad[k] * other.grad[k] + self.hess[k] * other.hess[k];
        }
        s
    }

    pub fn add_scaled(&mut self, other: &Jet, c: f64) {
        self.value += c * other.value;
        for k in 0..MAX_DIM {
            self.grad[k] += c * other.grad[k];
            self.hess[k] += c * other.hess[k];
        }
    }

    pub fn scaled(&self, c: f64) -> Jet {
        let mut out = Jet::default();
        out.add_scaled(self, c);
        out
    }

    pub fn laplacian(&self, dim: usize) -> f64 {
        self.hess[..dim].iter().sum()
    }
}
