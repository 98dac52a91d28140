//! Two-player differentiable games and their vector fields.

mod examples;
mod linear;

pub use examples::{make_example1, make_example2, Example1, Example2};
pub use linear::{make_bilinear, make_linear_game, Archetype, LinearGame, LinearGameSpec};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::autograd::{ParamLayout, ParamVector, Tape, Var};
use crate::numerics::DenseMatrix;
use crate::{Error, Result};

/// Default bound on the joint dimension for dense Jacobians.
pub const DENSE_JACOBIAN_CAP: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Player {
    Generator,
    Discriminator,
}

impl Player {
    pub fn as_str(self) -> &'static str {
        match self {
            Player::Generator => "generator",
            Player::Discriminator => "discriminator",
        }
    }
}

/// Splits `ω` into `θ` (first `p` entries) and `φ` (the remaining `d`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Partition {
    pub p: usize,
    pub d: usize,
}

impl Partition {
    pub fn new(p: usize, d: usize) -> Result<Self> {
        if p == 0 || d == 0 {
            return Err(Error::argument(format!("both players need parameters, got p = {p}, d = {d}")));
        }
        Ok(Partition { p, d })
    }

    pub fn n(&self) -> usize {
        self.p + self.d
    }

    /// Offset and length of a player's block.
    pub fn range(&self, player: Player) -> (usize, usize) {
        match player {
            Player::Generator => (0, self.p),
            Player::Discriminator => (self.p, self.d),
        }
    }

    pub fn flat_layout(&self) -> ParamLayout {
        ParamLayout::new().with("theta", self.p, 1).with("phi", self.d, 1)
    }
}

/// `ω = (θ, φ)` with its partition.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    omega: ParamVector,
    partition: Partition,
}

impl JointState {
    pub fn new(omega: ParamVector, partition: Partition) -> Result<Self> {
        if omega.len() != partition.n() {
            return Err(Error::shape(format!(
                "state of length {} for a {}+{} partition",
                omega.len(),
                partition.p,
                partition.d
            )));
        }
        Ok(JointState { omega, partition })
    }

    pub fn from_flat(values: Vec<f64>, partition: Partition) -> Result<Self> {
        if values.len() != partition.n() {
            return Err(Error::shape(format!(
                "state of length {} for a {}+{} partition",
                values.len(),
                partition.p,
                partition.d
            )));
        }
        Self::new(ParamVector::new(partition.flat_layout(), values)?, partition)
    }

    pub fn omega(&self) -> &ParamVector {
        &self.omega
    }

    pub fn values(&self) -> &[f64] {
        self.omega.values()
    }

    pub fn partition(&self) -> Partition {
        self.partition
    }

    pub fn theta(&self) -> &[f64] {
        &self.values()[..self.partition.p]
    }

    pub fn phi(&self) -> &[f64] {
        &self.values()[self.partition.p..]
    }

    pub fn player(&self, player: Player) -> &[f64] {
        let (o, l) = self.partition.range(player);
        &self.values()[o..o + l]
    }

    /// Same layout and partition, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Ok(JointState { omega: self.omega.replaced(values)?, partition: self.partition })
    }
}

/// A two-player game: the generator minimizes `L_G` over `θ`, the
/// discriminator minimizes `L_D` over `φ`.
pub trait Game: Send + Sync {
    fn name(&self) -> &str;

    fn partition(&self) -> Partition;

    /// Named layout of `ω`.
    fn layout(&self) -> ParamLayout {
        self.partition().flat_layout()
    }

    /// `(L_G, L_D)` as scalars on the tape, or `None` when the game is only
    /// defined through its vector field.
    fn losses<'t>(&self, tape: &'t Tape, theta: Var<'t>, phi: Var<'t>) -> Option<(Var<'t>, Var<'t>)>;

    /// `v(ω) = (∇θ L_G, ∇φ L_D)` recorded on the tape as an `n x 1` column.
    fn field<'t>(&self, tape: &'t Tape, omega: Var<'t>) -> Result<Var<'t>> {
        loss_field(self, tape, omega)
    }

    /// Hand-derived field, when one exists.
    fn closed_form_field(&self, _omega: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Whether each player's field block is the gradient of a scalar loss.
    fn is_potential(&self) -> bool {
        true
    }

    /// Advances any per-iteration randomness (minibatches, penalty points).
    fn refresh(&mut self, _iteration: u64) {}

    /// Projects a state back onto the feasible set after an update.
    fn project(&self, _omega: &mut [f64]) {}
}

/// The field obtained by differentiating each player's loss in its own block.
pub fn loss_field<'t, G: Game + ?Sized>(g: &G, tape: &'t Tape, omega: Var<'t>) -> Result<Var<'t>> {
    let Partition { p, d } = g.partition();
    let theta = omega.slice(0, p, 1);
    let phi = omega.slice(p, d, 1);
    let (lg, ld) = g
        .losses(tape, theta, phi)
        .ok_or_else(|| Error::argument(format!("game {} defines no losses", g.name())))?;
    let gt = tape.grad(lg, &[theta])?[0];
    let gp = tape.grad(ld, &[phi])?[0];
    Ok(gt.embed(0, p + d, 1) + gp.embed(p, p + d, 1))
}

fn check_len<G: Game + ?Sized>(g: &G, omega: &[f64]) -> Result<()> {
    let n = g.partition().n();
    if omega.len() != n {
        return Err(Error::shape(format!("game {} has dimension {n}, got {}", g.name(), omega.len())));
    }
    Ok(())
}

fn check_state<G: Game + ?Sized>(g: &G, state: &JointState) -> Result<()> {
    if state.partition() != g.partition() {
        return Err(Error::shape(format!(
            "state partition {}+{} does not match game {} ({}+{})",
            state.partition().p,
            state.partition().d,
            g.name(),
            g.partition().p,
            g.partition().d
        )));
    }
    Ok(())
}

/// The field at a flat `ω`.
pub fn field_at<G: Game + ?Sized>(g: &G, omega: &[f64]) -> Result<Vec<f64>> {
    check_len(g, omega)?;
    let tape = Tape::new();
    let w = tape.column(omega);
    let v = g.field(&tape, w)?;
    tape.check()?;
    Ok(v.to_vec())
}

pub fn vector_field<G: Game + ?Sized>(g: &G, state: &JointState) -> Result<ParamVector> {
    check_state(g, state)?;
    state.omega().replaced(field_at(g, state.values())?)
}

/// The field linearized at a point, for repeated Jacobian-vector products.
///
/// Records `r(z) = ∇v(ω)ᵀ z` once with a placeholder `z`; each product
/// `∇v(ω) u = ∇_z ⟨r(z), u⟩` is then a single extra reverse pass.
pub struct Linearization<'t> {
    tape: &'t Tape,
    z: Var<'t>,
    r: Var<'t>,
    field: Vec<f64>,
    mark: usize,
}

impl<'t> Linearization<'t> {
    pub fn new<G: Game + ?Sized>(tape: &'t Tape, g: &G, omega: &[f64]) -> Result<Self> {
        check_len(g, omega)?;
        let w = tape.column(omega);
        let v = g.field(tape, w)?;
        tape.check()?;
        let z = tape.column(&vec![0.0; omega.len()]);
        let r = tape.grad(v.dot(z), &[w])?[0];
        Ok(Linearization { tape, z, r, field: v.to_vec(), mark: tape.mark() })
    }

    pub fn dim(&self) -> usize {
        self.field.len()
    }

    /// `v(ω)` at the linearization point.
    pub fn field(&self) -> &[f64] {
        &self.field
    }

    /// `∇v(ω) u`.
    pub fn jvp(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.dim() {
            return Err(Error::shape(format!("direction of length {}, expected {}", u.len(), self.dim())));
        }
        let uv = self.tape.column(u);
        let out = self.tape.grad(self.r.dot(uv), &[self.z]).map(|g| g[0].to_vec());
        self.tape.truncate(self.mark);
        out
    }
}

/// `∇v(ω) u` by a double reverse pass.
pub fn jvp<G: Game + ?Sized>(g: &G, state: &JointState, u: &ParamVector) -> Result<ParamVector> {
    check_state(g, state)?;
    if u.len() != state.omega().len() {
        return Err(Error::shape(format!("direction of length {}, expected {}", u.len(), state.omega().len())));
    }
    let tape = Tape::new();
    let lin = Linearization::new(&tape, g, state.values())?;
    state.omega().replaced(lin.jvp(u.values())?)
}

/// `∇v(ω)ᵀ u`, the reverse-mode product.
pub fn vjp<G: Game + ?Sized>(g: &G, state: &JointState, u: &ParamVector) -> Result<ParamVector> {
    check_state(g, state)?;
    if u.len() != state.omega().len() {
        return Err(Error::shape(format!("direction of length {}, expected {}", u.len(), state.omega().len())));
    }
    let tape = Tape::new();
    let w = tape.column(state.values());
    let v = g.field(&tape, w)?;
    let uv = tape.column(u.values());
    let r = tape.grad(v.dot(uv), &[w])?[0];
    state.omega().replaced(r.to_vec())
}

/// Product with one player's diagonal Jacobian block, i.e. that player's
/// Hessian of its own loss when the game has losses.
pub fn block_jvp<G: Game + ?Sized>(g: &G, state: &JointState, player: Player, u: &[f64]) -> Result<Vec<f64>> {
    check_state(g, state)?;
    let tape = Tape::new();
    let lin = Linearization::new(&tape, g, state.values())?;
    let (o, l) = g.partition().range(player);
    block_apply(&lin, o, l, u)
}

pub(crate) fn block_apply(lin: &Linearization<'_>, offset: usize, len: usize, u: &[f64]) -> Result<Vec<f64>> {
    if u.len() != len {
        return Err(Error::shape(format!("block direction of length {}, expected {len}", u.len())));
    }
    let mut full = vec![0.0; lin.dim()];
    full[offset..offset + len].copy_from_slice(u);
    let mut out = lin.jvp(&full)?;
    out.truncate(offset + len);
    Ok(out.split_off(offset))
}

/// The Jacobian of the field, one `jvp` per column. Refuses dimensions above `cap`.
pub fn jacobian_dense<G: Game + ?Sized>(g: &G, state: &JointState, cap: usize) -> Result<DenseMatrix> {
    check_state(g, state)?;
    jacobian_at(g, state.values(), cap)
}

pub fn jacobian_at<G: Game + ?Sized>(g: &G, omega: &[f64], cap: usize) -> Result<DenseMatrix> {
    check_len(g, omega)?;
    let n = omega.len();
    if n > cap {
        return Err(Error::TooLarge { dim: n, cap });
    }
    let tape = Tape::new();
    let lin = Linearization::new(&tape, g, omega)?;
    let mut columns = Vec::with_capacity(n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        columns.push(lin.jvp(&e)?);
        e[j] = 0.0;
    }
    DenseMatrix::from_columns(&columns)
}
