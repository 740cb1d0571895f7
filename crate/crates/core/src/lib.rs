//! Causal association search over lattices of set partitions.
//!
//! Individuals are the ground set; genotypes, phenotypes and latent factors
//! are all [`partition::Partition`]s, and an association is an arrow
//! `genotype × latent → phenotype`.

pub mod anova;
pub mod cli;
pub mod embedding;
pub mod error;
pub mod genotype;
pub mod io;
pub mod partition;
pub mod pipeline;
pub mod segment;
pub mod synth;

pub use error::{Error, Result};
