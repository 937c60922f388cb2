//! Joint network-source coding: rainbow network flow of multiple
//! descriptions over capacity-constrained DAGs, the PET construction of
//! balanced descriptions, and optimization of the description profile.

pub mod crnf;
pub mod error;
pub mod experiment;
pub mod mdc;
pub mod netgen;
pub mod pet;
pub mod rainbow;

pub use error::{Error, Result};
