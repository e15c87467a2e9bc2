//! Energy functionals, decay-law fits and numerical checks of the analytic
//! lemmas.

mod energy;
mod fit;
mod lemmas;

pub use energy::{energy_functionals, sup_norms, EnergyReport};
pub use fit::{default_window, fit_decay, fit_decay_log, lower_bound_check, DecayFit};
pub use lemmas::{cancellation_residuals, commutator_ratio, modq_sobolev_ratio, random_band_limited, random_state};
