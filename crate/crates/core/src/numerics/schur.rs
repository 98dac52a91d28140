//! Nonsymmetric real eigenproblem: Householder reduction to upper Hessenberg
//! form followed by the Francis implicit double-shift QR iteration, which
//! leaves the matrix in real Schur form. Eigenvalues are read off the 1x1 and
//! 2x2 diagonal blocks; eigenvectors (when requested) come from
//! back-substitution on the quasi-triangular factor.
//!
//! The iteration follows the classical EISPACK `orthes`/`hqr2` procedures.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::dense::DenseMatrix;
use crate::{Error, Result};

const EPS: f64 = f64::EPSILON;
/// QR sweeps allowed per deflated eigenvalue before giving up.
const MAX_SWEEPS: usize = 60;

/// Eigen-decomposition of a real square matrix in real block form.
///
/// `A V = V D` where `D` is block diagonal: real eigenvalues sit in 1x1
/// blocks and a complex pair `a ± ib` sits in the 2x2 block `[a b; -b a]`
/// with columns `(j, j+1)` of `V` holding the real and imaginary parts of
/// the corresponding eigenvector.
#[derive(Debug, Clone)]
pub struct RealEigen {
    re: Vec<f64>,
    im: Vec<f64>,
    vectors: DenseMatrix,
}

impl RealEigen {
    pub fn compute(m: &DenseMatrix) -> Result<Self> {
        let (re, im, v) = decompose(m, true)?;
        Ok(RealEigen { re, im, vectors: v.expect("vectors requested") })
    }

    pub fn dim(&self) -> usize {
        self.re.len()
    }

    /// Eigenvalues in Schur-block order (conjugate pairs adjacent, `+Im` first).
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.re.iter().zip(&self.im).map(|(&r, &i)| Complex64::new(r, i)).collect()
    }

    /// Real basis `V` (columns as described on the type).
    pub fn basis(&self) -> &DenseMatrix {
        &self.vectors
    }

    /// Whether index `j` opens a complex-conjugate pair.
    pub fn is_pair_start(&self, j: usize) -> bool {
        self.im[j] > 0.0
    }

    /// The block-diagonal matrix `D` with `A V = V D`.
    pub fn block_diagonal(&self) -> DenseMatrix {
        let n = self.dim();
        let mut d = DenseMatrix::zeros(n, n);
        let mut j = 0;
        while j < n {
            d[(j, j)] = self.re[j];
            if self.is_pair_start(j) && j + 1 < n {
                let b = self.im[j];
                d[(j, j + 1)] = b;
                d[(j + 1, j)] = -b;
                d[(j + 1, j + 1)] = self.re[j + 1];
                j += 2;
            } else {
                j += 1;
            }
        }
        d
    }

    /// Complex eigenvector for eigenvalue index `j` (unnormalized).
    pub fn eigenvector(&self, j: usize) -> Vec<Complex64> {
        let n = self.dim();
        let v = &self.vectors;
        if self.im[j] == 0.0 {
            (0..n).map(|i| Complex64::new(v[(i, j)], 0.0)).collect()
        } else if self.is_pair_start(j) {
            // D block [a b; -b a] means A (x + iy) = (a + ib)(x + iy).
            (0..n).map(|i| Complex64::new(v[(i, j)], v[(i, j + 1)])).collect()
        } else {
            (0..n).map(|i| Complex64::new(v[(i, j - 1)], -v[(i, j)])).collect()
        }
    }

    /// Condition number of the eigenvector basis in the 1-norm.
    pub fn basis_condition(&self) -> f64 {
        match self.vectors.inverse() {
            Ok(inv) => self.vectors.norm_one() * inv.norm_one(),
            Err(_) => f64::INFINITY,
        }
    }
}

/// All eigenvalues of a square matrix, in Schur-block order.
pub fn eigenvalues(m: &DenseMatrix) -> Result<Vec<Complex64>> {
    let (re, im, _) = decompose(m, false)?;
    Ok(re.into_iter().zip(im).map(|(r, i)| Complex64::new(r, i)).collect())
}

fn decompose(m: &DenseMatrix, want_vectors: bool) -> Result<(Vec<f64>, Vec<f64>, Option<DenseMatrix>)> {
    if !m.is_square() {
        return Err(Error::shape(alloc::format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n == 0 {
        return Err(Error::argument("empty matrix"));
    }
    if m.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::argument("matrix has non-finite entries"));
    }
    let mut h = m.clone();
    let mut v = if want_vectors { Some(DenseMatrix::identity(n)) } else { None };
    hessenberg(&mut h, v.as_mut());
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    francis_qr(&mut h, v.as_mut(), &mut re, &mut im)?;
    if let Some(v) = v.as_mut() {
        back_substitute(&mut h, v, &re, &im);
    }
    Ok((re, im, v))
}

/// Householder reduction to upper Hessenberg form, accumulating the
/// orthogonal similarity into `v` when present.
fn hessenberg(h: &mut DenseMatrix, v: Option<&mut DenseMatrix>) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = libm::sqrt(hh);
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;
        for j in m..n {
            let f = (m..=high).rev().map(|i| ort[i] * h[(i, j)]).sum::<f64>() / hh;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let f = (m..=high).rev().map(|j| ort[j] * h[(i, j)]).sum::<f64>() / hh;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[(m, m - 1)] = scale * g;
    }

    let Some(v) = v else { return };
    for m in (1..high).rev() {
        if h[(m, m - 1)] == 0.0 {
            continue;
        }
        for i in m + 1..=high {
            ort[i] = h[(i, m - 1)];
        }
        for j in m..=high {
            let g = (m..=high).map(|i| ort[i] * v[(i, j)]).sum::<f64>();
            let g = (g / ort[m]) / h[(m, m - 1)];
            for i in m..=high {
                v[(i, j)] += g * ort[i];
            }
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix. Without `v` only
/// the active diagonal window is updated, which is enough for eigenvalues.
fn francis_qr(h: &mut DenseMatrix, mut v: Option<&mut DenseMatrix>, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let nn = h.rows();
    let full = v.is_some();
    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }

    let mut n = nn as isize - 1;
    let mut exshift = 0.0;
    let mut iter = 0usize;
    let (mut p, mut q, mut r, mut s, mut z);
    let (mut w, mut x, mut y);

    while n >= 0 {
        let nu = n as usize;
        // Look for a single small subdiagonal element.
        let mut l = nu;
        while l > 0 {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            let sub = h[(l, l - 1)].abs();
            if sub == 0.0 || sub < EPS * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            // One root.
            h[(nu, nu)] += exshift;
            d[nu] = h[(nu, nu)];
            e[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            // Two roots.
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            q = p * p + w;
            z = libm::sqrt(q.abs());
            h[(nu, nu)] += exshift;
            h[(nu - 1, nu - 1)] += exshift;
            x = h[(nu, nu)];
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                d[nu - 1] = x + z;
                d[nu] = d[nu - 1];
                if z != 0.0 {
                    d[nu] = x - w / z;
                }
                e[nu - 1] = 0.0;
                e[nu] = 0.0;
                if full {
                    x = h[(nu, nu - 1)];
                    s = x.abs() + z.abs();
                    p = x / s;
                    q = z / s;
                    r = libm::sqrt(p * p + q * q);
                    p /= r;
                    q /= r;
                    for j in nu - 1..nn {
                        z = h[(nu - 1, j)];
                        h[(nu - 1, j)] = q * z + p * h[(nu, j)];
                        h[(nu, j)] = q * h[(nu, j)] - p * z;
                    }
                    for i in 0..=nu {
                        z = h[(i, nu - 1)];
                        h[(i, nu - 1)] = q * z + p * h[(i, nu)];
                        h[(i, nu)] = q * h[(i, nu)] - p * z;
                    }
                    if let Some(v) = v.as_deref_mut() {
                        for i in 0..nn {
                            z = v[(i, nu - 1)];
                            v[(i, nu - 1)] = q * z + p * v[(i, nu)];
                            v[(i, nu)] = q * v[(i, nu)] - p * z;
                        }
                    }
                }
            } else {
                d[nu - 1] = x + p;
                d[nu] = x + p;
                e[nu - 1] = z;
                e[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            // Form shift.
            x = h[(nu, nu)];
            y = h[(nu - 1, nu - 1)];
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];

            // Exceptional shifts break rare cycles.
            if iter == 10 {
                exshift += x;
                for i in 0..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = libm::sqrt(s);
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in 0..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(Error::Convergence { iterations: iter, residual: h[(nu, nu - 1)].abs() });
            }

            // Look for two consecutive small subdiagonal elements.
            let mut m = nu - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(m, m - 1)].abs() * (q.abs() + r.abs())
                    < EPS * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            // Double QR step on rows l..=n and columns m..=n.
            x = 0.0;
            for k in m..nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = libm::sqrt(p * p + q * q + r * r);
                if p < 0.0 {
                    s = -s;
                }
                if s == 0.0 {
                    continue;
                }
                if k != m {
                    h[(k, k - 1)] = -s * x;
                } else if l != m {
                    h[(k, k - 1)] = -h[(k, k - 1)];
                }
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;

                let row_end = if full { nn - 1 } else { nu };
                for j in k..=row_end {
                    p = h[(k, j)] + q * h[(k + 1, j)];
                    if notlast {
                        p += r * h[(k + 2, j)];
                        h[(k + 2, j)] -= p * z;
                    }
                    h[(k, j)] -= p * x;
                    h[(k + 1, j)] -= p * y;
                }
                let col_start = if full { 0 } else { l };
                for i in col_start..=nu.min(k + 3) {
                    p = x * h[(i, k)] + y * h[(i, k + 1)];
                    if notlast {
                        p += z * h[(i, k + 2)];
                        h[(i, k + 2)] -= p * r;
                    }
                    h[(i, k)] -= p;
                    h[(i, k + 1)] -= p * q;
                }
                if let Some(v) = v.as_deref_mut() {
                    for i in 0..nn {
                        p = x * v[(i, k)] + y * v[(i, k + 1)];
                        if notlast {
                            p += z * v[(i, k + 2)];
                            v[(i, k + 2)] -= p * r;
                        }
                        v[(i, k)] -= p;
                        v[(i, k + 1)] -= p * q;
                    }
                }
            }
        }
    }
    Ok(())
}

fn cdiv(xr: f64, xi: f64, yr: f64, yi: f64) -> (f64, f64) {
    if yr.abs() > yi.abs() {
        let r = yi / yr;
        let d = yr + r * yi;
        ((xr + r * xi) / d, (xi - r * xr) / d)
    } else {
        let r = yr / yi;
        let d = yi + r * yr;
        ((r * xr + xi) / d, (r * xi - xr) / d)
    }
}

/// Eigenvectors of the quasi-triangular Schur factor, mapped back through the
/// accumulated transformations.
fn back_substitute(h: &mut DenseMatrix, v: &mut DenseMatrix, d: &[f64], e: &[f64]) {
    let nn = h.rows();
    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }
    if norm == 0.0 {
        return;
    }
    let (mut r, mut s, mut z, mut t, mut w, mut x, mut y, mut q);
    r = 0.0;
    s = 0.0;
    z = 0.0;

    for n in (0..nn).rev() {
        let p = d[n];
        q = e[n];
        if q == 0.0 {
            // Real vector.
            let mut l = n;
            h[(n, n)] = 1.0;
            for i in (0..n).rev() {
                w = h[(i, i)] - p;
                r = (l..=n).map(|j| h[(i, j)] * h[(j, n)]).sum();
                if e[i] < 0.0 {
                    z = w;
                    s = r;
                } else {
                    l = i;
                    if e[i] == 0.0 {
                        h[(i, n)] = if w != 0.0 { -r / w } else { -r / (EPS * norm) };
                    } else {
                        x = h[(i, i + 1)];
                        y = h[(i + 1, i)];
                        q = (d[i] - p) * (d[i] - p) + e[i] * e[i];
                        t = (x * s - z * r) / q;
                        h[(i, n)] = t;
                        h[(i + 1, n)] = if x.abs() > z.abs() { (-r - w * t) / x } else { (-s - y * t) / z };
                    }
                    t = h[(i, n)].abs();
                    if (EPS * t) * t > 1.0 {
                        for j in i..=n {
                            h[(j, n)] /= t;
                        }
                    }
                }
            }
        } else if q < 0.0 {
            // Complex vector, stored in columns n-1 (real) and n (imaginary).
            let mut l = n - 1;
            if h[(n, n - 1)].abs() > h[(n - 1, n)].abs() {
                h[(n - 1, n - 1)] = q / h[(n, n - 1)];
                h[(n - 1, n)] = -(h[(n, n)] - p) / h[(n, n - 1)];
            } else {
                let (cr, ci) = cdiv(0.0, -h[(n - 1, n)], h[(n - 1, n - 1)] - p, q);
                h[(n - 1, n - 1)] = cr;
                h[(n - 1, n)] = ci;
            }
            h[(n, n - 1)] = 0.0;
            h[(n, n)] = 1.0;
            for i in (0..n.saturating_sub(1)).rev() {
                let ra: f64 = (l..=n).map(|j| h[(i, j)] * h[(j, n - 1)]).sum();
                let sa: f64 = (l..=n).map(|j| h[(i, j)] * h[(j, n)]).sum();
                w = h[(i, i)] - p;
                if e[i] < 0.0 {
                    z = w;
                    r = ra;
                    s = sa;
                } else {
                    l = i;
                    if e[i] == 0.0 {
                        let (cr, ci) = cdiv(-ra, -sa, w, q);
                        h[(i, n - 1)] = cr;
                        h[(i, n)] = ci;
                    } else {
                        x = h[(i, i + 1)];
                        y = h[(i + 1, i)];
                        let mut vr = (d[i] - p) * (d[i] - p) + e[i] * e[i] - q * q;
                        let vi = (d[i] - p) * 2.0 * q;
                        if vr == 0.0 && vi == 0.0 {
                            vr = EPS * norm * (w.abs() + q.abs() + x.abs() + y.abs() + z.abs());
                        }
                        let (cr, ci) = cdiv(x * r - z * ra + q * sa, x * s - z * sa - q * ra, vr, vi);
                        h[(i, n - 1)] = cr;
                        h[(i, n)] = ci;
                        if x.abs() > z.abs() + q.abs() {
                            h[(i + 1, n - 1)] = (-ra - w * h[(i, n - 1)] + q * h[(i, n)]) / x;
                            h[(i + 1, n)] = (-sa - w * h[(i, n)] - q * h[(i, n - 1)]) / x;
                        } else {
                            let (cr, ci) = cdiv(-r - y * h[(i, n - 1)], -s - y * h[(i, n)], z, q);
                            h[(i + 1, n - 1)] = cr;
                            h[(i + 1, n)] = ci;
                        }
                    }
                    t = h[(i, n - 1)].abs().max(h[(i, n)].abs());
                    if (EPS * t) * t > 1.0 {
                        for j in i..=n {
                            h[(j, n - 1)] /= t;
                            h[(j, n)] /= t;
                        }
                    }
                }
            }
        }
    }

    // Back transformation.
    for j in (0..nn).rev() {
        for i in 0..nn {
            z = (0..=j).map(|k| v[(i, k)] * h[(k, j)]).sum();
            v[(i, j)] = z;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(m: &DenseMatrix, lambda: Complex64, u: &[Complex64]) -> f64 {
        let n = m.rows();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                acc += u[j] * m[(i, j)];
            }
            num += (acc - lambda * u[i]).norm_sqr();
            den += u[i].norm_sqr();
        }
        libm::sqrt(num / den)
    }

    #[test]
    fn av_equals_vd() {
        let m = DenseMatrix::from_rows(&[
            &[-1.0, 0.0, -1.0, 0.3],
            &[0.0, 2.0, -2.0, 1.0],
            &[5.0, 4.0, 0.0, -0.5],
            &[0.2, -1.0, 0.7, 1.5],
        ])
        .unwrap();
        let eig = RealEigen::compute(&m).unwrap();
        let av = m.matmul(eig.basis()).unwrap();
        let vd = eig.basis().matmul(&eig.block_diagonal()).unwrap();
        assert!(av.max_abs_diff(&vd) < 1e-10, "{av:?} vs {vd:?}");
        for (j, lambda) in eig.eigenvalues().into_iter().enumerate() {
            assert!(residual(&m, lambda, &eig.eigenvector(j)) < 1e-10);
        }
    }

    #[test]
    fn eigenvalue_only_path_matches_full_path() {
        let m = DenseMatrix::from_rows(&[
            &[4.0, 1.0, -2.0, 2.0, 0.5],
            &[1.0, 2.0, 0.0, 1.0, -1.0],
            &[-2.0, 3.0, 3.0, -2.0, 0.0],
            &[2.0, 1.0, -2.0, -1.0, 4.0],
            &[0.0, -3.0, 1.0, 2.0, 1.0],
        ])
        .unwrap();
        let a = eigenvalues(&m).unwrap();
        let b = RealEigen::compute(&m).unwrap().eigenvalues();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn one_by_one_and_zero_matrix() {
        let one = DenseMatrix::from_rows(&[&[-3.5]]).unwrap();
        assert_eq!(eigenvalues(&one).unwrap(), vec![Complex64::new(-3.5, 0.0)]);
        let zero = DenseMatrix::zeros(3, 3);
        assert!(eigenvalues(&zero).unwrap().iter().all(|l| l.norm() == 0.0));
    }

    #[test]
    fn non_square_is_a_shape_error() {
        assert!(matches!(eigenvalues(&DenseMatrix::zeros(2, 3)), Err(Error::Shape(_))));
    }
}
