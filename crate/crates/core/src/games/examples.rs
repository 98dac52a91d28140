use alloc::vec;
use alloc::vec::Vec;

use super::{Game, Partition};
use crate::autograd::{Tape, Var};

/// A rotating saddle: the generator loss is a hyperbolic paraboloid centred
/// at `(1, 1)` whose principal axes are turned by `φ`, and the
/// discriminator plays a bilinear game against it.
///
/// `(1, 1, 0)` is locally stable for the joint dynamics although the
/// generator sits on a saddle of its own loss.
#[derive(Debug, Clone, Copy, Default)]
pub struct Example1;

pub fn make_example1() -> Example1 {
    Example1
}

impl Game for Example1 {
    fn name(&self) -> &str {
        "example1"
    }

    fn partition(&self) -> Partition {
        Partition { p: 2, d: 1 }
    }

    fn losses<'t>(&self, _tape: &'t Tape, theta: Var<'t>, phi: Var<'t>) -> Option<(Var<'t>, Var<'t>)> {
        let t1 = theta.slice(0, 1, 1);
        let t2 = theta.slice(1, 1, 1);
        let descent = (t2 - phi * t1).add_scalar(-1.0);
        let ascent = (t1 + phi * t2).add_scalar(-1.0);
        let lg = descent.square() - ascent.square().scale(0.5);
        let ld = phi * (t1.scale(5.0) + t2.scale(4.0)).add_scalar(-9.0);
        Some((lg, ld))
    }

    fn closed_form_field(&self, w: &[f64]) -> Option<Vec<f64>> {
        let (t1, t2, f) = (w[0], w[1], w[2]);
        Some(vec![
            (2.0 * f * f - 1.0) * t1 - 3.0 * f * t2 + 2.0 * f + 1.0,
            (2.0 - f * f) * t2 - 3.0 * f * t1 - 2.0 + f,
            5.0 * t1 + 4.0 * t2 - 9.0,
        ])
    }
}

/// A one-dimensional game with stationary points `(0, ±1)`: the first is a
/// differential Nash equilibrium that is not locally stable, the second is
/// locally stable but not Nash.
///
/// `L_G = ½θ² + ¼(φ² − 1)θ` and `L_D = 2θφ + φ³/12 − φ/4`, so that
/// `∇v(θ, φ) = [[1, φ/2], [2, φ/2]]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Example2;

pub fn make_example2() -> Example2 {
    Example2
}

impl Game for Example2 {
    fn name(&self) -> &str {
        "example2"
    }

    fn partition(&self) -> Partition {
        Partition { p: 1, d: 1 }
    }

    fn losses<'t>(&self, _tape: &'t Tape, theta: Var<'t>, phi: Var<'t>) -> Option<(Var<'t>, Var<'t>)> {
        let lg = theta.square().scale(0.5) + (phi.square().add_scalar(-1.0) * theta).scale(0.25);
        let ld = (theta * phi).scale(2.0) + (phi.square() * phi).scale(1.0 / 12.0) - phi.scale(0.25);
        Some((lg, ld))
    }

    fn closed_form_field(&self, w: &[f64]) -> Option<Vec<f64>> {
        let (t, f) = (w[0], w[1]);
        Some(vec![t + 0.25 * (f * f - 1.0), 2.0 * t + 0.25 * (f * f - 1.0)])
    }
}
