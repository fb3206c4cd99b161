//! Finite group representations, the averaging bound for irreducibles and the
//! band-approximation gap certificate.

mod certificate;
mod group;
mod rep;

pub use certificate::{
    gap_certificate, gap_lower_bound, theorem_a_radius, Approximants, CertificateReport, GapCertificateInput, CHAIN_TOL,
};
pub use group::{is_prime, FiniteGroup};
pub use rep::{random_phases, IrreducibilityCertificate, Monomial, Structure, UnitaryRep};
