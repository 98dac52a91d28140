use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::games::{field_at, Game, JointState};
use crate::numerics::norm2;
use crate::{Error, Result};

/// States with a larger norm count as diverged.
pub const DIVERGENCE_NORM: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Gd,
    Extragradient,
    Adam,
    ExtraAdam,
}

impl OptimizerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerKind::Gd => "gd",
            OptimizerKind::Extragradient => "extragradient",
            OptimizerKind::Adam => "adam",
            OptimizerKind::ExtraAdam => "extra_adam",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub lr_g: f64,
    pub lr_d: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_adam: f64,
    pub iters: u64,
    pub seed: u64,
    /// Iterations between recorded checkpoints.
    pub cadence: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Extragradient,
            lr_g: 0.1,
            lr_d: 0.1,
            beta1: 0.9,
            beta2: 0.999,
            eps_adam: 1e-8,
            iters: 1000,
            seed: 0,
            cadence: 10,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr_g > 0.0 && self.lr_d > 0.0) {
            return Err(Error::argument("step sizes must be positive"));
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return Err(Error::argument("Adam betas must lie in [0, 1)"));
        }
        if !(self.eps_adam > 0.0) {
            return Err(Error::argument("Adam epsilon must be positive"));
        }
        if self.cadence == 0 {
            return Err(Error::argument("checkpoint cadence must be positive"));
        }
        Ok(())
    }
}

/// Adam first and second moments plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        AdamState { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    /// Folds in a gradient and returns the bias-corrected direction.
    fn direction(&mut self, g: &[f64], cfg: &OptimizerConfig) -> Vec<f64> {
        self.t += 1;
        let c1 = 1.0 - libm::pow(cfg.beta1, self.t as f64);
        let c2 = 1.0 - libm::pow(cfg.beta2, self.t as f64);
        let mut dir = Vec::with_capacity(g.len());
        for ((m, v), &gi) in self.m.iter_mut().zip(&mut self.v).zip(g) {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * gi;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * gi * gi;
            dir.push((*m / c1) / (libm::sqrt(*v / c2) + cfg.eps_adam));
        }
        dir
    }
}

/// `ω − lr ⊙ d` with `lr_g` on the first `p` coordinates and `lr_d` on the rest.
fn descend(omega: &[f64], d: &[f64], p: usize, lr_g: f64, lr_d: f64) -> Vec<f64> {
    omega
        .iter()
        .zip(d)
        .enumerate()
        .map(|(i, (w, di))| w - if i < p { lr_g } else { lr_d } * di)
        .collect()
}

fn projected<G: Game + ?Sized>(g: &G, mut omega: Vec<f64>) -> Vec<f64> {
    g.project(&mut omega);
    omega
}

pub(crate) fn step_values<G: Game + ?Sized>(
    g: &G,
    omega: &[f64],
    cfg: &OptimizerConfig,
    adam: &mut AdamState,
) -> Result<Vec<f64>> {
    let p = g.partition().p;
    let (lg, ld) = (cfg.lr_g, cfg.lr_d);
    Ok(match cfg.kind {
        OptimizerKind::Gd => projected(g, descend(omega, &field_at(g, omega)?, p, lg, ld)),
        OptimizerKind::Extragradient => {
            let half = projected(g, descend(omega, &field_at(g, omega)?, p, lg, ld));
            projected(g, descend(omega, &field_at(g, &half)?, p, lg, ld))
        }
        OptimizerKind::Adam => {
            let dir = adam.direction(&field_at(g, omega)?, cfg);
            projected(g, descend(omega, &dir, p, lg, ld))
        }
        OptimizerKind::ExtraAdam => {
            let dir = adam.direction(&field_at(g, omega)?, cfg);
            let half = projected(g, descend(omega, &dir, p, lg, ld));
            let dir = adam.direction(&field_at(g, &half)?, cfg);
            projected(g, descend(omega, &dir, p, lg, ld))
        }
    })
}

fn simple_step<G: Game + ?Sized>(g: &G, state: &JointState, kind: OptimizerKind, lr_g: f64, lr_d: f64) -> Result<JointState> {
    let cfg = OptimizerConfig { kind, lr_g, lr_d, ..OptimizerConfig::default() };
    cfg.validate()?;
    check(g, state)?;
    let mut unused = AdamState::new(0);
    state.with_values(step_values(g, state.values(), &cfg, &mut unused)?)
}

fn check<G: Game + ?Sized>(g: &G, state: &JointState) -> Result<()> {
    if state.partition() != g.partition() {
        return Err(Error::shape(format!("state does not match the partition of game {}", g.name())));
    }
    Ok(())
}

/// Simultaneous gradient step on both players.
pub fn gd_step<G: Game + ?Sized>(g: &G, state: &JointState, lr_g: f64, lr_d: f64) -> Result<JointState> {
    simple_step(g, state, OptimizerKind::Gd, lr_g, lr_d)
}

/// `ω − lr ⊙ v(ω − lr ⊙ v(ω))`.
pub fn extragradient_step<G: Game + ?Sized>(g: &G, state: &JointState, lr_g: f64, lr_d: f64) -> Result<JointState> {
    simple_step(g, state, OptimizerKind::Extragradient, lr_g, lr_d)
}

fn adam_like<G: Game + ?Sized>(
    g: &G,
    state: &JointState,
    moments: &mut AdamState,
    cfg: &OptimizerConfig,
    kind: OptimizerKind,
) -> Result<JointState> {
    cfg.validate()?;
    check(g, state)?;
    if moments.m.len() != state.values().len() || moments.v.len() != state.values().len() {
        return Err(Error::shape("Adam moments do not match the state"));
    }
    let cfg = OptimizerConfig { kind, ..*cfg };
    state.with_values(step_values(g, state.values(), &cfg, moments)?)
}

/// Bias-corrected Adam on the joint field.
pub fn adam_step<G: Game + ?Sized>(g: &G, state: &JointState, moments: &mut AdamState, cfg: &OptimizerConfig) -> Result<JointState> {
    adam_like(g, state, moments, cfg, OptimizerKind::Adam)
}

/// Extrapolation then update, both through Adam with shared moments.
pub fn extra_adam_step<G: Game + ?Sized>(
    g: &G,
    state: &JointState,
    moments: &mut AdamState,
    cfg: &OptimizerConfig,
) -> Result<JointState> {
    adam_like(g, state, moments, cfg, OptimizerKind::ExtraAdam)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub iteration: u64,
    pub omega: Vec<f64>,
    /// `‖v(ω)‖` at this checkpoint.
    pub field_norm: f64,
}

/// Checkpoints of an optimizer run or an integrated flow.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub checkpoints: Vec<Checkpoint>,
    pub cadence: u64,
    /// Time per iteration for integrated flows, `1` for optimizers.
    pub step_size: f64,
    pub diverged: bool,
    template: Option<JointState>,
}

impl Trajectory {
    pub(crate) fn new(cadence: u64, step_size: f64, template: Option<JointState>) -> Self {
        Trajectory { checkpoints: Vec::new(), cadence, step_size, diverged: false, template }
    }

    /// Rebuilds a trajectory from stored checkpoints. `template` supplies
    /// the partition and layout used by [`Trajectory::state`].
    pub fn from_checkpoints(
        checkpoints: Vec<Checkpoint>,
        cadence: u64,
        step_size: f64,
        diverged: bool,
        template: Option<JointState>,
    ) -> Result<Self> {
        if checkpoints.windows(2).any(|w| w[1].iteration <= w[0].iteration) {
            return Err(Error::argument("checkpoint iterations must be strictly increasing"));
        }
        if let Some(t) = &template {
            if checkpoints.iter().any(|c| c.omega.len() != t.values().len()) {
                return Err(Error::shape("checkpoint length does not match the template state"));
            }
        }
        Ok(Trajectory { checkpoints, cadence, step_size, diverged, template })
    }

    pub fn len(&self) -> usize {
        self.checkpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checkpoints.is_empty()
    }

    pub fn last(&self) -> Option<&Checkpoint> {
        self.checkpoints.last()
    }

    /// The `i`-th checkpoint as a state, when the trajectory has a partition.
    pub fn state(&self, i: usize) -> Option<JointState> {
        let t = self.template.as_ref()?;
        t.with_values(self.checkpoints.get(i)?.omega.clone()).ok()
    }

    pub fn norms(&self) -> Vec<f64> {
        self.checkpoints.iter().map(|c| c.field_norm).collect()
    }
}

fn diverged(omega: &[f64]) -> bool {
    omega.iter().any(|x| !x.is_finite()) || norm2(omega) > DIVERGENCE_NORM
}

/// Runs `cfg.iters` optimizer iterations from `init`.
///
/// Checkpoints are taken at iteration 0, every `cfg.cadence` iterations and
/// at the end. A run whose state leaves the finite range or exceeds
/// [`DIVERGENCE_NORM`] stops early with `diverged` set.
pub fn run_training<G: Game + ?Sized>(g: &mut G, cfg: &OptimizerConfig, init: &JointState) -> Result<Trajectory> {
    cfg.validate()?;
    check(g, init)?;
    let mut traj = Trajectory::new(cfg.cadence, 1.0, Some(init.clone()));
    let mut adam = AdamState::new(init.values().len());
    let mut omega = init.values().to_vec();
    g.refresh(0);
    let record = |g: &G, traj: &mut Trajectory, t: u64, omega: &[f64]| -> Result<()> {
        let field_norm = norm2(&field_at(g, omega)?);
        traj.checkpoints.push(Checkpoint { iteration: t, omega: omega.to_vec(), field_norm });
        Ok(())
    };
    record(g, &mut traj, 0, &omega)?;
    for t in 0..cfg.iters {
        g.refresh(t);
        let next = match step_values(g, &omega, cfg, &mut adam) {
            Ok(next) if !diverged(&next) => next,
            Ok(_) | Err(Error::NonFinite { .. }) => {
                traj.diverged = true;
                return Ok(traj);
            }
            Err(e) => return Err(e),
        };
        omega = next;
        let done = t + 1;
        if done % cfg.cadence == 0 || done == cfg.iters {
            match record(g, &mut traj, done, &omega) {
                Ok(()) => {}
                Err(Error::NonFinite { .. }) => {
                    traj.diverged = true;
                    return Ok(traj);
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(traj)
}
