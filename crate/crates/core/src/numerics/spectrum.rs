use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64;

/// How a spectrum was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMethod {
    Dense,
    Arnoldi,
}

impl SpectrumMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SpectrumMethod::Dense => "dense",
            SpectrumMethod::Arnoldi => "arnoldi",
        }
    }
}

/// Eigenvalues ordered by non-increasing magnitude, ties broken by
/// descending real part and then descending imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub method: SpectrumMethod,
    /// Relative residual per eigenvalue; empty for dense spectra.
    pub residual_norms: Vec<f64>,
}

/// The spectral ordering used everywhere in the crate.
pub fn spectral_order(a: &Complex64, b: &Complex64) -> Ordering {
    b.norm()
        .total_cmp(&a.norm())
        .then_with(|| b.re.total_cmp(&a.re))
        .then_with(|| b.im.total_cmp(&a.im))
}

impl Spectrum {
    pub fn dense(mut eigenvalues: Vec<Complex64>) -> Self {
        eigenvalues.sort_by(spectral_order);
        Spectrum { eigenvalues, method: SpectrumMethod::Dense, residual_norms: Vec::new() }
    }

    pub(crate) fn arnoldi(mut pairs: Vec<(Complex64, f64)>) -> Self {
        pairs.sort_by(|a, b| spectral_order(&a.0, &b.0));
        let (eigenvalues, residual_norms) = pairs.into_iter().unzip();
        Spectrum { eigenvalues, method: SpectrumMethod::Arnoldi, residual_norms }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_magnitude(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max)
    }

    pub fn min_real(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.re).fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.im.abs()).fold(0.0, f64::max)
    }

    /// The first `k` entries (the spectrum is already ordered).
    pub fn top(&self, k: usize) -> Spectrum {
        Spectrum {
            eigenvalues: self.eigenvalues.iter().take(k).copied().collect(),
            method: self.method,
            residual_norms: self.residual_norms.iter().take(k).copied().collect(),
        }
    }

    /// Every eigenvalue with `|Im| > im_tol` has a conjugate partner within `pair_tol`.
    pub fn is_conjugate_closed(&self, im_tol: f64, pair_tol: f64) -> bool {
        self.eigenvalues
            .iter()
            .filter(|l| l.im.abs() > im_tol)
            .all(|l| self.eigenvalues.iter().any(|m| (m - l.conj()).norm() <= pair_tol))
    }
}
