//! Dense and matrix-free linear algebra.

mod arnoldi;
mod dense;
mod schur;
mod spectrum;

pub use arnoldi::{eig_topk, ArnoldiOptions};
pub use dense::{axpy, dot, norm2, DenseMatrix, Lu};
pub use schur::{eigenvalues, RealEigen};
pub use spectrum::{spectral_order, Spectrum, SpectrumMethod};

use crate::Result;

/// All eigenvalues of a real square matrix via Hessenberg reduction and
/// shifted QR (real Schur form).
pub fn eig_dense(m: &DenseMatrix) -> Result<Spectrum> {
    Ok(Spectrum::dense(schur::eigenvalues(m)?))
}
