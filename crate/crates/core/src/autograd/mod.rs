//! Reverse-mode automatic differentiation on a tensor tape.

mod mlp;
mod param;
mod tape;
mod tensor;

pub use mlp::{mlp_apply, MlpSpec, OutputActivation};
pub use param::{ParamLayout, ParamVector, Segment};
pub use tape::{Tape, Var};
pub use tensor::Tensor;

use crate::Result;

/// Gradient of a scalar function at `omega`, with `omega`'s layout.
///
/// `f` receives the parameters as a column var and must return a `1x1` var.
pub fn grad<F>(f: F, omega: &ParamVector) -> Result<ParamVector>
where
    F: for<'t> Fn(&'t Tape, Var<'t>) -> Var<'t>,
{
    let tape = Tape::new();
    let w = tape.column(omega.values());
    let out = f(&tape, w);
    if out.shape() != (1, 1) {
        return Err(crate::Error::shape("grad needs a scalar-valued function"));
    }
    tape.check()?;
    let g = tape.grad(out, &[w])?;
    omega.replaced(g[0].to_vec())
}
