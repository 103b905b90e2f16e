//! Dense symmetric eigendecomposition, least squares and the effective-rank metric.
//!
//! Eigenvectors are stored as the *rows* of `q`, so a kernel factors as
//! `G = Qᵀ·diag(λ)·Q` and the projected residual of a vector `e` is `Q·e`.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};

/// Relative asymmetry accepted before symmetrizing.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;
/// Eigenvalues below `-PSD_TOLERANCE * max|G|` are rejected.
pub const PSD_TOLERANCE: f64 = 1e-10;
/// Singular values below `LSTSQ_CUTOFF * σ_max` are treated as zero.
pub const LSTSQ_CUTOFF: f64 = 1e-12;

const MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Eigenvalues sorted descending, non-negative after clamping.
    pub eigenvalues: Vec<f64>,
    /// Orthogonal matrix whose rows are eigenvectors.
    pub q: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `Q·e`, the coordinates of `e` in the eigenbasis.
    pub fn project(&self, e: &[f64]) -> Result<Vec<f64>> {
        if e.len() != self.q.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} eigenvectors",
                e.len(),
                self.q.ncols()
            )));
        }
        let v = DVector::from_column_slice(e);
        Ok((&self.q * v).iter().copied().collect())
    }

    /// `Qᵀ·diag(λ)·Q`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut scaled = self.q.clone();
        for (i, lambda) in self.eigenvalues.iter().enumerate() {
            scaled.row_mut(i).scale_mut(*lambda);
        }
        self.q.transpose() * scaled
    }

    pub fn effective_rank(&self) -> Result<f64> {
        effective_rank(&self.eigenvalues)
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

fn symmetrized(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if g.nrows() != g.ncols() {
        return Err(Error::NotSquare {
            rows: g.nrows(),
            cols: g.ncols(),
        });
    }
    let scale = max_abs(g);
    let mut asym = 0.0_f64;
    let n = g.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((g[(i, j)] - g[(j, i)]).abs());
        }
    }
    if scale > 0.0 && asym > SYMMETRY_TOLERANCE * scale {
        return Err(Error::NotSymmetric(asym / scale));
    }
    Ok((g + g.transpose()) * 0.5)
}

fn clamp_psd(values: &mut [f64], scale: f64) -> Result<()> {
    let tolerance = PSD_TOLERANCE * scale.max(f64::MIN_POSITIVE);
    for v in values.iter_mut() {
        if *v < -tolerance {
            return Err(Error::NegativeEigenvalue {
                value: *v,
                tolerance: -tolerance,
            });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(())
}

/// Eigendecomposition of a symmetric positive semi-definite matrix.
pub fn sym_eigendecomp(g: &DMatrix<f64>) -> Result<SpectralDecomposition> {
    let sym = symmetrized(g)?;
    let n = sym.nrows();
    let scale = max_abs(&sym);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::NoConvergence(MAX_SWEEPS))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    clamp_psd(&mut eigenvalues, scale)?;

    let mut q = DMatrix::zeros(n, n);
    for (row, &col) in order.iter().enumerate() {
        q.row_mut(row)
            .copy_from(&eig.eigenvectors.column(col).transpose());
    }
    Ok(SpectralDecomposition { eigenvalues, q })
}

/// Eigenvalues only, sorted descending and clamped like [`sym_eigendecomp`].
pub fn sym_eigenvalues(g: &DMatrix<f64>) -> Result<Vec<f64>> {
    let sym = symmetrized(g)?;
    let scale = max_abs(&sym);
    let mut values: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    clamp_psd(&mut values, scale)?;
    Ok(values)
}

/// Singular values sorted descending.
pub fn singular_values(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let svd = SVD::try_new(a.clone(), false, false, f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::NoConvergence(MAX_SWEEPS))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// `exp(-Σ p_k ln p_k)` with `p_k = σ_k / ‖σ‖₁`; zero entries contribute nothing.
pub fn effective_rank(sigma: &[f64]) -> Result<f64> {
    if sigma.is_empty() {
        return Err(Error::InvalidSpectrum("empty spectrum".into()));
    }
    if let Some(v) = sigma.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidSpectrum(format!(
            "entries must be finite and non-negative, found {v}"
        )));
    }
    let total: f64 = sigma.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidSpectrum("all entries are zero".into()));
    }
    let entropy: f64 = sigma
        .iter()
        .filter(|s| **s > 0.0)
        .map(|s| {
            let p = s / total;
            -p * p.ln()
        })
        .sum();
    let nonzero = sigma.iter().filter(|s| **s > 0.0).count() as f64;
    // round-off can push exp(H) a few ulps outside [1, nonzero]
    Ok(entropy.exp().clamp(1.0, nonzero))
}

/// Effective rank of a general matrix through its singular values.
pub fn effective_rank_of_matrix(a: &DMatrix<f64>) -> Result<f64> {
    effective_rank(&singular_values(a)?)
}

/// Minimum-norm least-squares solution of `A x ≈ b`.
pub fn least_squares_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::DimensionMismatch(format!(
            "empty system {rows}x{cols}"
        )));
    }
    if b.len() != rows {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {rows} rows, right-hand side has {}",
            b.len()
        )));
    }

    // Tall systems are compressed to the square triangular factor first.
    let (core, rhs) = if rows >= 2 * cols {
        let qr = a.clone().qr();
        let rhs = qr.q().transpose() * b;
        (qr.r(), rhs)
    } else {
        (a.clone(), b.clone())
    };

    let svd = SVD::try_new(core, true, true, f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::NoConvergence(MAX_SWEEPS))?;
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested Vᵀ");
    let sigma_max = svd.singular_values.iter().fold(0.0_f64, |m, s| m.max(*s));
    let cutoff = LSTSQ_CUTOFF * sigma_max;

    let mut coeffs = u.transpose() * rhs;
    for (c, s) in coeffs.iter_mut().zip(svd.singular_values.iter()) {
        *c = if *s > cutoff { *c / s } else { 0.0 };
    }
    Ok(v_t.transpose() * coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn check_invariants(g: &DMatrix<f64>, dec: &SpectralDecomposition) {
        let n = g.nrows();
        let qtq = dec.q.transpose() * &dec.q;
        let orth = max_abs(&(qtq - DMatrix::identity(n, n)));
        assert!(orth <= 1e-10, "orthogonality defect {orth}");
        let recon = max_abs(&(dec.reconstruct() - g));
        assert!(recon <= 1e-8 * max_abs(g).max(1.0), "reconstruction {recon}");
        assert!(dec.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn diagonal_input_sorted() {
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let dec = sym_eigendecomp(&g).unwrap();
        assert_eq!(dec.eigenvalues, vec![3.0, 2.0, 1.0]);
        // rows of Q are signed unit vectors: a permutation
        for row in dec.q.row_iter() {
            let ones = row.iter().filter(|v| (v.abs() - 1.0).abs() < 1e-14).count();
            assert_eq!(ones, 1);
        }
        check_invariants(&g, &dec);
    }

    #[test]
    fn two_by_two() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let dec = sym_eigendecomp(&g).unwrap();
        assert_abs_diff_eq!(dec.eigenvalues[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(dec.eigenvalues[1], 1.0, epsilon = 1e-14);
        check_invariants(&g, &dec);
    }

    #[test]
    fn identity() {
        let g = DMatrix::<f64>::identity(4, 4);
        let dec = sym_eigendecomp(&g).unwrap();
        for v in &dec.eigenvalues {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-15);
        }
        check_invariants(&g, &dec);
    }

    #[test]
    fn random_gram_large() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let a = DMatrix::from_fn(200, 150, |_, _| rng.gen_range(-1.0..1.0));
        let g = &a * a.transpose();
        let dec = sym_eigendecomp(&g).unwrap();
        check_invariants(&g, &dec);
        // rank 150: the trailing 50 eigenvalues are round-off, clamped to >= 0
        assert!(dec.eigenvalues.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn rejects_non_square_and_indefinite() {
        let g = DMatrix::<f64>::zeros(2, 3);
        assert!(matches!(sym_eigendecomp(&g), Err(Error::NotSquare { .. })));
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            sym_eigendecomp(&g),
            Err(Error::NegativeEigenvalue { .. })
        ));
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(sym_eigendecomp(&g), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn tiny_negative_eigenvalue_is_clamped() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-13]);
        let dec = sym_eigendecomp(&g).unwrap();
        assert_eq!(dec.eigenvalues, vec![1.0, 0.0]);
    }

    #[test]
    fn effective_rank_examples() {
        assert_abs_diff_eq!(
            effective_rank(&[1.0, 1.0, 1.0, 1.0]).unwrap(),
            4.0,
            epsilon = 1e-12
        );
        assert_eq!(effective_rank(&[7.0, 0.0, 0.0]).unwrap(), 1.0);
        // p = (1/2, 1/4, 1/4): H = 1.5 ln 2
        assert_abs_diff_eq!(
            effective_rank(&[2.0, 1.0, 1.0]).unwrap(),
            2.0 * 2.0_f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn effective_rank_errors() {
        assert!(effective_rank(&[0.0, 0.0]).is_err());
        assert!(effective_rank(&[1.0, -0.5]).is_err());
        assert!(effective_rank(&[]).is_err());
        assert!(effective_rank(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn psd_eigen_and_singular_routes_agree() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let a = DMatrix::from_fn(40, 25, |_, _| rng.gen_range(-1.0..1.0));
        let g = &a * a.transpose();
        let via_eig = effective_rank(&sym_eigenvalues(&g).unwrap()).unwrap();
        let via_svd = effective_rank_of_matrix(&g).unwrap();
        assert_abs_diff_eq!(via_eig, via_svd, epsilon = 1e-10);
    }

    #[test]
    fn least_squares_examples() {
        let a = DMatrix::<f64>::identity(3, 3);
        let b = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let x = least_squares_solve(&a, &b).unwrap();
        assert_abs_diff_eq!((x - &b).norm(), 0.0, epsilon = 1e-14);

        let a = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let b = DVector::from_vec(vec![0.0, 2.0]);
        let x = least_squares_solve(&a, &b).unwrap();
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-14);

        let a = DMatrix::from_row_slice(1, 1, &[1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0]);
        assert!(matches!(
            least_squares_solve(&a, &b),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn least_squares_exact_recovery_tall_and_wide() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for (rows, cols) in [(60, 10), (12, 10), (8, 20)] {
            let a = DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0));
            let x0 = DVector::from_fn(cols, |_, _| rng.gen_range(-1.0..1.0));
            let b = &a * x0;
            let x = least_squares_solve(&a, &b).unwrap();
            assert!((&a * x - &b).norm() <= 1e-10 * b.norm());
        }
    }

    #[test]
    fn least_squares_minimum_norm_when_rank_deficient() {
        // two identical columns: the minimum-norm solution splits the weight
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let b = DVector::from_vec(vec![2.0, 4.0, 6.0]);
        let x = least_squares_solve(&a, &b).unwrap();
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 1.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn effective_rank_scale_invariant(
            sigma in prop::collection::vec(0.0f64..10.0, 1..40),
            c in 1e-3f64..1e3,
        ) {
            prop_assume!(sigma.iter().any(|s| *s > 0.0));
            let scaled: Vec<f64> = sigma.iter().map(|s| s * c).collect();
            let a = effective_rank(&sigma).unwrap();
            let b = effective_rank(&scaled).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }

        #[test]
        fn effective_rank_bounded_by_support(
            sigma in prop::collection::vec(prop_oneof![Just(0.0f64), 0.0f64..5.0], 1..40),
        ) {
            prop_assume!(sigma.iter().any(|s| *s > 0.0));
            let nonzero = sigma.iter().filter(|s| **s > 0.0).count() as f64;
            let r = effective_rank(&sigma).unwrap();
            prop_assert!(r >= 1.0);
            prop_assert!(r <= nonzero);
            prop_assert!(nonzero <= sigma.len() as f64);
        }
    }
}
