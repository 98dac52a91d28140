//! Matrix-free top-k eigenvalues by restarted Arnoldi.
//!
//! Each cycle grows an orthonormal Krylov basis `V` to `max_subspace`
//! columns, keeping the Krylov relation `A V = V H + v g^T`. Ritz pairs of
//! the small projected matrix `H` are checked against the residual row `g`.
//! On restart the basis is compressed onto the real invariant subspace of `H`
//! spanned by the wanted Ritz vectors (real and imaginary parts of conjugate
//! pairs together), and the old residual vector carries on as the next
//! Krylov direction. This is the Krylov-Schur restart written with
//! eigenvectors instead of reordered Schur vectors.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::dense::{axpy, dot, norm2, DenseMatrix};
use super::schur::RealEigen;
use super::spectrum::{spectral_order, Spectrum};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ArnoldiOptions {
    /// Krylov subspace size; defaults to `2k + 10`, capped at `n`.
    pub max_subspace: Option<usize>,
    /// Bound on the relative residual `‖A x − λ x‖ / (‖x‖ max|λ|)`.
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for ArnoldiOptions {
    fn default() -> Self {
        ArnoldiOptions { max_subspace: None, tol: 1e-8, max_restarts: 50, seed: 0 }
    }
}

/// The `k` largest-magnitude eigenvalues of the linear map `apply` on `R^n`.
///
/// `k == n` is allowed and returns the full spectrum. Reported residuals are
/// relative to the largest Ritz magnitude.
pub fn eig_topk<F>(mut apply: F, n: usize, k: usize, opts: &ArnoldiOptions) -> Result<Spectrum>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if k == 0 || k > n {
        return Err(Error::argument(alloc::format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::argument("tolerance must be positive"));
    }
    let m = opts.max_subspace.unwrap_or(2 * k + 10).clamp((k + 2).min(n), n);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    basis.push(random_orthonormal(&mut rng, n, &basis).expect("empty basis"));
    let mut g = DenseMatrix::zeros(m + 1, m);
    let mut p = 0;

    for restart in 0..=opts.max_restarts {
        let mut size = m;
        for j in p..m {
            let mut w = apply(&basis[j])?;
            if w.len() != n {
                return Err(Error::shape(alloc::format!("operator returned length {} for n = {n}", w.len())));
            }
            if w.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite { op: "operator" });
            }
            let w_norm = norm2(&w);
            // Classical Gram-Schmidt, applied twice.
            for _ in 0..2 {
                for (i, b) in basis.iter().enumerate().take(j + 1) {
                    let c = dot(b, &w);
                    g[(i, j)] += c;
                    axpy(-c, b, &mut w);
                }
            }
            let beta = norm2(&w);
            if beta > 1e-12 * w_norm && beta > 0.0 {
                g[(j + 1, j)] = beta;
                w.iter_mut().for_each(|x| *x /= beta);
                basis.push(w);
            } else {
                // Invariant subspace reached; continue with a fresh direction.
                g[(j + 1, j)] = 0.0;
                match (j + 1 < n).then(|| random_orthonormal(&mut rng, n, &basis)).flatten() {
                    Some(v) => basis.push(v),
                    None => {
                        size = j + 1;
                        break;
                    }
                }
            }
        }

        let h = g.block(0, 0, size, size);
        let eig = RealEigen::compute(&h)?;
        let values = eig.eigenvalues();
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&a, &b| spectral_order(&values[a], &values[b]));

        let scale = values.iter().map(|l| l.norm()).fold(0.0, f64::max);
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let residual = |j: usize| -> f64 {
            let y = eig.eigenvector(j);
            let y_norm = libm::sqrt(y.iter().map(|c| c.norm_sqr()).sum::<f64>());
            let gy: Complex64 = y.iter().enumerate().map(|(i, c)| c * g[(size, i)]).sum();
            if y_norm > 0.0 {
                gy.norm() / y_norm / scale
            } else {
                f64::INFINITY
            }
        };
        let wanted: Vec<(Complex64, f64)> = order[..k].iter().map(|&j| (values[j], residual(j))).collect();
        let worst = wanted.iter().map(|w| w.1).fold(0.0, f64::max);
        if worst <= opts.tol || size < m {
            return Ok(Spectrum::arnoldi(wanted));
        }
        if restart == opts.max_restarts {
            return Err(Error::Convergence { iterations: restart, residual: worst });
        }

        // Columns of the real eigenbasis spanning the kept Ritz space.
        let target = (k + (size - k) / 2).min(size - 1).max(1);
        let mut columns: Vec<usize> = Vec::with_capacity(target + 1);
        for &j in &order {
            if columns.len() >= target {
                break;
            }
            let im = values[j].im;
            if im == 0.0 {
                columns.push(j);
            } else if im > 0.0 && columns.len() + 2 <= size - 1 {
                columns.push(j);
                columns.push(j + 1);
            }
        }
        if columns.is_empty() {
            columns.push(order[0]);
        }
        let w_basis = orthonormal_columns(eig.basis(), &columns);
        let kept = w_basis.len();

        let mut next: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        for w in &w_basis {
            let mut v = vec![0.0; n];
            for (i, &c) in w.iter().enumerate() {
                axpy(c, &basis[i], &mut v);
            }
            next.push(v);
        }
        let residual_row: Vec<f64> = (0..size).map(|i| g[(size, i)]).collect();
        let mut new_g = DenseMatrix::zeros(m + 1, m);
        for a in 0..kept {
            let hw: Vec<f64> = h.matvec(&w_basis[a]);
            for b in 0..kept {
                new_g[(b, a)] = dot(&w_basis[b], &hw);
            }
            new_g[(kept, a)] = dot(&residual_row, &w_basis[a]);
        }
        next.push(basis.swap_remove(size));
        basis = next;
        g = new_g;
        p = kept;
    }
    unreachable!("loop returns on the last restart")
}

fn random_orthonormal(rng: &mut ChaCha8Rng, n: usize, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    for _ in 0..4 {
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let start = norm2(&v);
        for _ in 0..2 {
            for b in basis {
                let c = dot(b, &v);
                axpy(-c, b, &mut v);
            }
        }
        let norm = norm2(&v);
        if norm > 1e-8 * start {
            v.iter_mut().for_each(|x| *x /= norm);
            return Some(v);
        }
    }
    None
}

/// Modified Gram-Schmidt on the selected columns, dropping dependent ones.
fn orthonormal_columns(m: &DenseMatrix, columns: &[usize]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(columns.len());
    for &j in columns {
        let mut v = m.column(j);
        let start = norm2(&v);
        for _ in 0..2 {
            for q in &out {
                let c = dot(q, &v);
                axpy(-c, q, &mut v);
            }
        }
        let norm = norm2(&v);
        if norm > 1e-10 * start && norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
            out.push(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_op(m: &DenseMatrix) -> impl FnMut(&[f64]) -> Result<Vec<f64>> + '_ {
        move |x| Ok(m.matvec(x))
    }

    #[test]
    fn diagonal_top_three() {
        let m = DenseMatrix::diagonal(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]);
        let s = eig_topk(dense_op(&m), 10, 3, &ArnoldiOptions::default()).unwrap();
        let got: Vec<f64> = s.eigenvalues.iter().map(|l| l.re).collect();
        for (g, e) in got.iter().zip([10.0, 9.0, 8.0]) {
            assert!((g - e).abs() < 1e-9);
        }
        assert!(s.residual_norms.iter().all(|&r| r <= 1e-8));
    }

    #[test]
    fn rotation_generator_full_spectrum() {
        let m = DenseMatrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).unwrap();
        let s = eig_topk(dense_op(&m), 2, 2, &ArnoldiOptions::default()).unwrap();
        assert!((s.eigenvalues[0] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        assert!((s.eigenvalues[1] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn argument_errors() {
        let m = DenseMatrix::identity(3);
        assert!(matches!(eig_topk(dense_op(&m), 3, 4, &ArnoldiOptions::default()), Err(Error::Argument(_))));
        assert!(matches!(eig_topk(dense_op(&m), 3, 0, &ArnoldiOptions::default()), Err(Error::Argument(_))));
    }

    #[test]
    fn reports_non_convergence() {
        // Clustered magnitudes with a tiny subspace and no restarts.
        let n = 60;
        let values: Vec<f64> = (0..n).map(|i| 1.0 + 1e-3 * i as f64).collect();
        let m = DenseMatrix::diagonal(&values);
        let opts = ArnoldiOptions { max_subspace: Some(6), max_restarts: 0, ..Default::default() };
        assert!(matches!(eig_topk(dense_op(&m), n, 3, &opts), Err(Error::Convergence { .. })));
    }
}
