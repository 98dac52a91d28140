use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{loss_field, Game, Partition};
use crate::autograd::{Tape, Tensor, Var};
use crate::numerics::DenseMatrix;
use crate::{Error, Result};

/// Blocks of the affine field `v(ω) = [[S1, B], [A, S2]] (ω − ω*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGameSpec {
    /// `p x p`
    pub s1: DenseMatrix,
    /// `d x d`
    pub s2: DenseMatrix,
    /// `d x p`
    pub a: DenseMatrix,
    /// `p x d`
    pub b: DenseMatrix,
    /// `ω*`, of length `p + d`.
    pub center: Vec<f64>,
}

impl LinearGameSpec {
    /// Scalar blocks, centred at the origin.
    pub fn scalar(s1: f64, s2: f64, a: f64, b: f64) -> Self {
        let m = |x: f64| DenseMatrix::diagonal(&[x]);
        LinearGameSpec { s1: m(s1), s2: m(s2), a: m(a), b: m(b), center: alloc::vec![0.0, 0.0] }
    }
}

/// The three behaviours of the linearized dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Archetype {
    /// `S1 = S2 = 1`, `A = B = 0`
    Attraction,
    /// `S1 = S2 = 0`, `A = 1`, `B = −1`
    Rotation,
    /// `S1 = S2 = 0.1`, `A = 1`, `B = −1`
    Mixed,
}

impl Archetype {
    pub fn as_str(self) -> &'static str {
        match self {
            Archetype::Attraction => "attraction",
            Archetype::Rotation => "rotation",
            Archetype::Mixed => "mixed",
        }
    }

    pub fn spec(self) -> LinearGameSpec {
        match self {
            Archetype::Attraction => LinearGameSpec::scalar(1.0, 1.0, 0.0, 0.0),
            Archetype::Rotation => LinearGameSpec::scalar(0.0, 0.0, 1.0, -1.0),
            Archetype::Mixed => LinearGameSpec::scalar(0.1, 0.1, 1.0, -1.0),
        }
    }
}

/// A game with an affine vector field.
///
/// With symmetric diagonal blocks the field derives from the losses
/// `L_G = ½ xθᵀ S1 xθ + xθᵀ B xφ` and `L_D = ½ xφᵀ S2 xφ + xφᵀ A xθ`
/// (`x = ω − ω*`); otherwise the game only exposes its field.
#[derive(Debug, Clone)]
pub struct LinearGame {
    name: String,
    spec: LinearGameSpec,
    jacobian: DenseMatrix,
    potential: bool,
}

pub fn make_linear_game(spec: LinearGameSpec) -> Result<LinearGame> {
    LinearGame::new("linear", spec)
}

/// `L_G = θᵀφ`, `L_D = −θᵀφ` in one dimension: pure rotation about the origin.
pub fn make_bilinear() -> LinearGame {
    LinearGame::new("bilinear", LinearGameSpec::scalar(0.0, 0.0, -1.0, 1.0)).expect("consistent blocks")
}

impl LinearGame {
    pub fn new(name: &str, spec: LinearGameSpec) -> Result<Self> {
        let p = spec.s1.rows();
        let d = spec.s2.rows();
        let dims = [
            ("S1", &spec.s1, p, p),
            ("S2", &spec.s2, d, d),
            ("A", &spec.a, d, p),
            ("B", &spec.b, p, d),
        ];
        for (label, m, r, c) in dims {
            if (m.rows(), m.cols()) != (r, c) {
                return Err(Error::shape(format!(
                    "block {label} is {}x{}, expected {r}x{c}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Partition::new(p, d)?;
        if spec.center.len() != p + d {
            return Err(Error::shape(format!("center of length {}, expected {}", spec.center.len(), p + d)));
        }
        if spec.center.iter().any(|x| !x.is_finite()) {
            return Err(Error::argument("center is not finite"));
        }
        let mut jacobian = DenseMatrix::zeros(p + d, p + d);
        jacobian.set_block(0, 0, &spec.s1);
        jacobian.set_block(0, p, &spec.b);
        jacobian.set_block(p, 0, &spec.a);
        jacobian.set_block(p, p, &spec.s2);
        let potential = spec.s1.is_symmetric(0.0) && spec.s2.is_symmetric(0.0);
        Ok(LinearGame { name: name.to_string(), spec, jacobian, potential })
    }

    pub fn archetype(kind: Archetype) -> Self {
        LinearGame::new(kind.as_str(), kind.spec()).expect("consistent blocks")
    }

    pub fn spec(&self) -> &LinearGameSpec {
        &self.spec
    }

    /// The constant Jacobian `[[S1, B], [A, S2]]`.
    pub fn jacobian(&self) -> &DenseMatrix {
        &self.jacobian
    }

    pub fn center(&self) -> &[f64] {
        &self.spec.center
    }
}

fn constant<'t>(tape: &'t Tape, m: &DenseMatrix) -> Var<'t> {
    tape.leaf(Tensor::new(m.rows(), m.cols(), m.as_slice().to_vec()))
}

impl Game for LinearGame {
    fn name(&self) -> &str {
        &self.name
    }

    fn partition(&self) -> Partition {
        Partition { p: self.spec.s1.rows(), d: self.spec.s2.rows() }
    }

    fn losses<'t>(&self, tape: &'t Tape, theta: Var<'t>, phi: Var<'t>) -> Option<(Var<'t>, Var<'t>)> {
        if !self.potential {
            return None;
        }
        let p = self.spec.s1.rows();
        let xt = theta - tape.column(&self.spec.center[..p]);
        let xp = phi - tape.column(&self.spec.center[p..]);
        let lg = xt.dot(constant(tape, &self.spec.s1).matmul(xt)).scale(0.5)
            + xt.dot(constant(tape, &self.spec.b).matmul(xp));
        let ld = xp.dot(constant(tape, &self.spec.s2).matmul(xp)).scale(0.5)
            + xp.dot(constant(tape, &self.spec.a).matmul(xt));
        Some((lg, ld))
    }

    fn field<'t>(&self, tape: &'t Tape, omega: Var<'t>) -> Result<Var<'t>> {
        if self.potential {
            return loss_field(self, tape, omega);
        }
        let x = omega - tape.column(&self.spec.center);
        Ok(constant(tape, &self.jacobian).matmul(x))
    }

    fn closed_form_field(&self, omega: &[f64]) -> Option<Vec<f64>> {
        let x: Vec<f64> = omega.iter().zip(&self.spec.center).map(|(w, c)| w - c).collect();
        Some(self.jacobian.matvec(&x))
    }

    fn is_potential(&self) -> bool {
        self.potential
    }
}
