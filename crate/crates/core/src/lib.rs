//! Numerical verification of contact-geometric constructions on spheres.
//!
//! The crate builds quaternionic contact forms on `S^{4m-1}`, their Reeb
//! fields and contact Hamiltonian flows, the canonical connection of a
//! contact fibration with its parallel transport and loop at infinity, and
//! the winding degree of spheres of complex structures. Each construction
//! comes with an independent numerical check; [`verify`] bundles them into
//! reproducible suites.

pub mod contact;
pub mod degree;
pub mod error;
pub mod integrate;
pub mod linalg;
pub mod quaternionic;
pub mod sampling;
pub mod sphere_family;
pub mod transport;
pub mod verify;

pub use contact::{ContactForm, HamiltonianField, Hamiltonian, SpherePoint, TangentFrame};
pub use error::{GeomError, Result};
pub use quaternionic::{ComplexStructure, QuaternionicTriple, SphereDirection};
pub use transport::{BasePath, ContactFibrationDisk, FibrationForm, TransportResult};
pub use verify::{SuiteConfig, VerificationReport};
