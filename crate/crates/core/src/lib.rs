//! Construction and verification of orthogonal genuinely entangled qudit
//! sets whose only orthogonality-preserving measurements on every
//! all-but-one cut are trivial.

pub mod checker;
pub mod io;
pub mod lattice;
pub mod limits;
pub mod oracle;
pub mod report;
pub mod states;

pub use lattice::*;
pub use limits::Limits;
