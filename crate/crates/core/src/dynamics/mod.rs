//! Nonlinear forcing and time integration on the periodic box.

mod assemble;
mod init;
mod operator;
mod stepper;

pub use assemble::{assemble_f1, assemble_f2, assemble_f3, f2_point, f3_point, sample_fields};
pub use init::{build_initial, initial_energy, InitFamily, InitSpec, DEFAULT_E0};
pub use operator::{nonlinear_residual, NonlinearOperator, NonlinearResidual};
pub use stepper::{run, step_count, Scheme, Stepper, StepperConfig};
