use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::param::{ParamLayout, ParamVector};
use super::tape::{Tape, Var};
use super::tensor::Tensor;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    Identity,
    Sigmoid,
}

/// One hidden ReLU layer between two affine maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub output_dim: usize,
    pub output: OutputActivation,
}

impl MlpSpec {
    pub fn new(input_dim: usize, hidden_dim: usize, output_dim: usize, output: OutputActivation) -> Result<Self> {
        if input_dim == 0 || hidden_dim == 0 || output_dim == 0 {
            return Err(Error::argument(format!(
                "MLP dimensions must be positive, got {input_dim}/{hidden_dim}/{output_dim}"
            )));
        }
        Ok(MlpSpec { input_dim, hidden_dim, output_dim, output })
    }

    /// Segments `w1` (in x hidden), `b1`, `w2` (hidden x out), `b2`, each name prefixed.
    pub fn layout(&self, prefix: &str) -> ParamLayout {
        let n = |s: &str| -> String { format!("{prefix}{s}") };
        ParamLayout::new()
            .with(&n("w1"), self.input_dim, self.hidden_dim)
            .with(&n("b1"), 1, self.hidden_dim)
            .with(&n("w2"), self.hidden_dim, self.output_dim)
            .with(&n("b2"), 1, self.output_dim)
    }

    pub fn param_count(&self) -> usize {
        (self.input_dim + 1) * self.hidden_dim + (self.hidden_dim + 1) * self.output_dim
    }

    /// Batched forward pass on the tape. `params` is a flat var of
    /// `param_count()` entries and `x` holds one input per row.
    pub fn forward<'t>(&self, params: Var<'t>, x: Var<'t>) -> Var<'t> {
        assert_eq!(params.len(), self.param_count(), "MLP parameter count");
        assert_eq!(x.shape().1, self.input_dim, "MLP input width");
        let batch = x.shape().0;
        let (i, h, o) = (self.input_dim, self.hidden_dim, self.output_dim);
        let w1 = params.slice(0, i, h);
        let b1 = params.slice(i * h, 1, h);
        let w2 = params.slice((i + 1) * h, h, o);
        let b2 = params.slice((i + 1) * h + h * o, 1, o);
        let hidden = (x.matmul(w1) + b1.broadcast_rows(batch)).relu();
        let out = hidden.matmul(w2) + b2.broadcast_rows(batch);
        match self.output {
            OutputActivation::Identity => out,
            OutputActivation::Sigmoid => out.sigmoid(),
        }
    }

    pub fn check_params(&self, params: &ParamVector) -> Result<()> {
        if params.len() != self.param_count() || !params.layout().same_shapes(&self.layout("")) {
            return Err(Error::shape(format!(
                "parameters ({} values) do not match a {}-{}-{} MLP",
                params.len(),
                self.input_dim,
                self.hidden_dim,
                self.output_dim
            )));
        }
        Ok(())
    }
}

/// Evaluates the network on one input vector.
pub fn mlp_apply(spec: &MlpSpec, params: &ParamVector, x: &[f64]) -> Result<Vec<f64>> {
    spec.check_params(params)?;
    if x.len() != spec.input_dim {
        return Err(Error::shape(format!("input of length {}, expected {}", x.len(), spec.input_dim)));
    }
    let tape = Tape::new();
    let p = tape.column(params.values());
    let input = tape.leaf(Tensor::new(1, x.len(), x.to_vec()));
    let out = spec.forward(p, input);
    tape.check()?;
    Ok(out.to_vec())
}
