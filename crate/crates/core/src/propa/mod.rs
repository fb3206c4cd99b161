//! Property-A kernels on finite spaces and the approximation of operators of
//! small `ε`-propagation by operators of finite propagation.

pub mod kernel;
pub mod phi;
pub mod rademacher;
pub mod sz;

pub use kernel::{support_radius, IsometryField, PropertyAKernel, SaturationPolicy};
pub use phi::{
    certify_eps_propagation, commutator, commutator_bound_check, phi_nu, random_psd, random_valid_contraction, validate_multiplier,
    CommutatorReport, PropagationCheck,
};
pub use rademacher::{rademacher_diagnostics, MomentStat, RademacherInput, RademacherReport, ReconstructionPoint};
pub use sz::{sz_approximate, SzReport};
