//! Exact rational computations for commutative differential graded algebras:
//! cohomology, minimal Sullivan models, polynomial forms on simplices,
//! Hochschild homology and Whitney jets.

pub mod apl;
pub mod cdga;
pub mod cli;
pub mod graded_core;
pub mod hochschild;
pub mod sullivan;
pub mod whitney_jets;
