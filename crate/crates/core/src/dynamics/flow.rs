use alloc::format;
use alloc::vec::Vec;

use crate::numerics::{norm2, DenseMatrix, RealEigen};
use crate::games::JointState;
use crate::{Complex64, Error, Result};

use super::optim::{Checkpoint, Trajectory};

/// Eigenvector bases worse than this are treated as defective.
pub const MAX_BASIS_CONDITION: f64 = 1e8;

/// Threshold for the zero tests of the mode trichotomy.
pub const MODE_ZERO_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeClass {
    Attraction,
    Rotation,
    Both,
}

impl ModeClass {
    pub fn of(lambda: Complex64) -> Self {
        if lambda.im.abs() <= MODE_ZERO_TOL {
            ModeClass::Attraction
        } else if lambda.re.abs() <= MODE_ZERO_TOL {
            ModeClass::Rotation
        } else {
            ModeClass::Both
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModeClass::Attraction => "attraction",
            ModeClass::Rotation => "rotation",
            ModeClass::Both => "both",
        }
    }
}

/// One real eigenvalue or one conjugate pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    /// For a pair, the member with positive imaginary part.
    pub eigenvalue: Complex64,
    pub class: ModeClass,
    /// Index of the first basis column belonging to this mode.
    pub offset: usize,
    /// One column for a real eigenvalue, two for a pair.
    pub basis: Vec<Vec<f64>>,
}

impl Mode {
    pub fn width(&self) -> usize {
        self.basis.len()
    }
}

/// `J = P D P⁻¹` with `D` in real block form.
#[derive(Debug, Clone)]
pub struct ModeDecomposition {
    pub modes: Vec<Mode>,
    basis: DenseMatrix,
    inverse: DenseMatrix,
    blocks: DenseMatrix,
    condition: f64,
}

impl ModeDecomposition {
    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &DenseMatrix {
        &self.basis
    }

    pub fn blocks(&self) -> &DenseMatrix {
        &self.blocks
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// `P D P⁻¹`.
    pub fn reconstruct(&self) -> DenseMatrix {
        self.basis
            .matmul(&self.blocks)
            .and_then(|pd| pd.matmul(&self.inverse))
            .expect("square factors of equal size")
    }

    /// Coordinates of `x` in the mode basis.
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        self.inverse.matvec(x)
    }

    /// `e^{−tD} c` for mode coordinates `c`.
    pub fn evolve_coordinates(&self, c: &[f64], t: f64) -> Vec<f64> {
        let mut out = c.to_vec();
        for m in &self.modes {
            let j = m.offset;
            let decay = libm::exp(-m.eigenvalue.re * t);
            if m.width() == 1 {
                out[j] = decay * c[j];
            } else {
                let (s, co) = libm::sincos(m.eigenvalue.im * t);
                out[j] = decay * (co * c[j] - s * c[j + 1]);
                out[j + 1] = decay * (s * c[j] + co * c[j + 1]);
            }
        }
        out
    }

    /// `ω(t) = P e^{−tD} P⁻¹ (ω0 − ω*) + ω*`.
    pub fn flow(&self, omega0: &[f64], star: &[f64], t: f64) -> Result<Vec<f64>> {
        let n = self.dim();
        if omega0.len() != n || star.len() != n {
            return Err(Error::shape(format!(
                "flow of a {n}-dimensional system from states of length {} and {}",
                omega0.len(),
                star.len()
            )));
        }
        let x: Vec<f64> = omega0.iter().zip(star).map(|(a, b)| a - b).collect();
        let c = self.evolve_coordinates(&self.coordinates(&x), t);
        Ok(self.basis.matvec(&c).iter().zip(star).map(|(a, b)| a + b).collect())
    }
}

/// Splits `J` into attraction and rotation modes.
///
/// Eigenvectors are rescaled to unit norm (pairs jointly) before the
/// conditioning check, so the check measures defectiveness rather than scale.
pub fn decompose_modes(j: &DenseMatrix) -> Result<ModeDecomposition> {
    if !j.is_square() {
        return Err(Error::shape(format!("decomposing a {}x{} matrix", j.rows(), j.cols())));
    }
    let eig = RealEigen::compute(j)?;
    let n = eig.dim();
    let lambdas = eig.eigenvalues();
    let mut basis = eig.basis().clone();
    let mut modes = Vec::new();
    let mut k = 0;
    while k < n {
        let width = if eig.is_pair_start(k) && k + 1 < n { 2 } else { 1 };
        let cols: Vec<Vec<f64>> = (k..k + width).map(|c| basis.column(c)).collect();
        let scale = libm::sqrt(cols.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>()).sum::<f64>());
        let cols: Vec<Vec<f64>> = if scale > 0.0 {
            cols.into_iter().map(|c| c.into_iter().map(|x| x / scale).collect()).collect()
        } else {
            cols
        };
        for (i, c) in cols.iter().enumerate() {
            basis.set_column(k + i, c);
        }
        modes.push(Mode { eigenvalue: lambdas[k], class: ModeClass::of(lambdas[k]), offset: k, basis: cols });
        k += width;
    }
    let inverse = basis.inverse().map_err(|_| Error::Conditioning { condition: f64::INFINITY })?;
    let condition = basis.norm_one() * inverse.norm_one();
    if !(condition <= MAX_BASIS_CONDITION) {
        return Err(Error::Conditioning { condition });
    }
    Ok(ModeDecomposition { modes, basis, inverse, blocks: eig.block_diagonal(), condition })
}

/// Closed-form solution of `dω/dt = −J(ω − ω*)` at time `t`.
pub fn linear_flow_solution(j: &DenseMatrix, omega0: &JointState, star: &JointState, t: f64) -> Result<JointState> {
    let values = linear_flow_values(j, omega0.values(), star.values(), t)?;
    omega0.with_values(values)
}

/// [`linear_flow_solution`] on plain vectors.
pub fn linear_flow_values(j: &DenseMatrix, omega0: &[f64], star: &[f64], t: f64) -> Result<Vec<f64>> {
    decompose_modes(j)?.flow(omega0, star, t)
}

/// Classical fourth-order Runge–Kutta on `dω/dt = −field(ω)`.
///
/// Every step is recorded. The number of steps is `round(T / h)`, so the
/// last checkpoint sits at `T` up to rounding of `h`.
pub fn rk4_integrate<F>(mut field: F, omega0: &[f64], horizon: f64, h: f64) -> Result<Trajectory>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if !(h > 0.0) || !(horizon >= 0.0) {
        return Err(Error::argument(format!("rk4 needs h > 0 and T >= 0, got h = {h}, T = {horizon}")));
    }
    if omega0.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteState { step: 0, last_good: Vec::new() });
    }
    let n = omega0.len();
    let steps = libm::round(horizon / h) as u64;
    let mut traj = Trajectory::new(1, h, None);
    let mut eval = |x: &[f64]| -> Result<Vec<f64>> {
        let v = field(x)?;
        if v.len() != n {
            return Err(Error::shape(format!("field returned {} values for a state of length {n}", v.len())));
        }
        Ok(v)
    };
    let mut omega = omega0.to_vec();
    let mut v = eval(&omega)?;
    traj.checkpoints.push(Checkpoint { iteration: 0, omega: omega.clone(), field_norm: norm2(&v) });
    let shifted = |x: &[f64], k: &[f64], s: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a - s * b).collect() };
    for step in 1..=steps {
        let k1 = &v;
        let k2 = eval(&shifted(&omega, k1, h / 2.0))?;
        let k3 = eval(&shifted(&omega, &k2, h / 2.0))?;
        let k4 = eval(&shifted(&omega, &k3, h))?;
        let next: Vec<f64> = (0..n)
            .map(|i| omega[i] - h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        let v_next = match eval(&next) {
            Ok(v) => v,
            Err(Error::NonFinite { .. }) => return Err(Error::NonFiniteState { step, last_good: omega }),
            Err(e) => return Err(e),
        };
        if next.iter().chain(&v_next).any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteState { step, last_good: omega });
        }
        omega = next;
        v = v_next;
        traj.checkpoints.push(Checkpoint { iteration: step, omega: omega.clone(), field_norm: norm2(&v) });
    }
    Ok(traj)
}
