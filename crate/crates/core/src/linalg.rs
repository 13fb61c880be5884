//! Small linear-algebra helpers shared across the crate.
//!
//! State vectors live on a uniform midpoint grid of `[0, 1]`; the L² inner
//! product therefore carries the quadrature weight `1/n_s`.

use nalgebra::{DMatrix, DVector};

/// L² inner product on the grid: `(x, y) = (1/n) Σ x_i y_i`.
pub fn l2_inner(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.dot(y) / x.len() as f64
}

/// Squared L² norm with the `1/n` quadrature weight.
pub fn l2_norm_sq(x: &DVector<f64>) -> f64 {
    l2_inner(x, x)
}

pub fn l2_norm(x: &DVector<f64>) -> f64 {
    l2_norm_sq(x).sqrt()
}

/// Midpoints of the uniform `n`-partition of `[0, 1]`.
pub fn grid_midpoints(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
}

/// Largest absolute eigenvalue of a symmetric matrix.
///
/// Power iteration on the norm ratio `‖Mx‖/‖x‖`, which converges even when
/// the extreme eigenvalues come in a `±λ` pair. Falls back to a full
/// symmetric eigendecomposition if the iteration stalls.
pub fn spectral_norm_sym(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    // Deterministic start with components in every coordinate direction.
    let mut x = DVector::from_fn(n, |i, _| 1.0 + (i as f64 + 1.0) / (n as f64 + 1.0));
    let mut sigma = 0.0f64;
    let nx = x.norm();
    if nx == 0.0 {
        return 0.0;
    }
    x /= nx;
    for _ in 0..10_000 {
        let y = m * &x;
        let ny = y.norm();
        if ny == 0.0 {
            return 0.0;
        }
        let new_sigma = ny;
        let converged = (new_sigma - sigma).abs() <= 1e-10 * new_sigma.max(1e-300);
        sigma = new_sigma;
        x = y / ny;
        if converged {
            return sigma;
        }
    }
    // Deflation fallback: resolve the full spectrum and take the extreme.
    let (vals, _) = sym_eigen(m);
    vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Full symmetric eigendecomposition, eigenvalues ascending.
///
/// Returns `(values, vectors)` with eigenvectors as matching columns,
/// ℓ²-normalized.
pub fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let se = nalgebra::SymmetricEigen::new(m.clone());
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &se.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Maximum absolute column sum (induced 1-norm).
pub fn norm_1(m: &DMatrix<f64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        let s: f64 = m.column(j).iter().map(|v| v.abs()).sum();
        best = best.max(s);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn norm_of_zero_matrix_is_zero() {
        let m = DMatrix::zeros(5, 5);
        assert_eq!(spectral_norm_sym(&m), 0.0);
    }

    #[test]
    fn norm_matches_eigendecomposition_on_random_symmetric() {
        let mut seed = 7u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for _ in 0..20 {
            let n = 6;
            let raw = DMatrix::from_fn(n, n, |_, _| next());
            let sym = (&raw + raw.transpose()) * 0.5;
            let (vals, _) = sym_eigen(&sym);
            let expected = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert_relative_eq!(spectral_norm_sym(&sym), expected, max_relative = 1e-8);
        }
    }

    #[test]
    fn norm_handles_plus_minus_pair() {
        // Eigenvalues +2 and -2: the Rayleigh quotient oscillates but the
        // norm ratio converges.
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 2.0, 0.0]);
        assert_relative_eq!(spectral_norm_sym(&m), 2.0, max_relative = 1e-8);
    }

    #[test]
    fn eigen_sorted_ascending() {
        let m = DMatrix::from_row_slice(3, 3, &[3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        let (vals, vecs) = sym_eigen(&m);
        assert_relative_eq!(vals[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(vals[1], 2.0, epsilon = 1e-12);
        assert_relative_eq!(vals[2], 3.0, epsilon = 1e-12);
        // Eigenvector for value 1.0 is e_1.
        assert_relative_eq!(vecs.column(0)[1].abs(), 1.0, epsilon = 1e-12);
    }
}
