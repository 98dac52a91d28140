//! Discrete optimizers on the game field and the linearized continuous flow.

mod flow;
mod optim;

pub use flow::{
    decompose_modes, linear_flow_solution, linear_flow_values, rk4_integrate, Mode, ModeClass, ModeDecomposition,
    MAX_BASIS_CONDITION, MODE_ZERO_TOL,
};
pub use optim::{
    adam_step, extra_adam_step, extragradient_step, gd_step, run_training, AdamState, Checkpoint, OptimizerConfig,
    OptimizerKind, Trajectory, DIVERGENCE_NORM,
};
