//! Executable species of dynamical patterns: lazily presented categories,
//! positive maps between finite-scale *-algebras, flow and Robertson–Walker
//! models, and sampled checks of the laws that tie them together.

pub mod algebra;
pub mod category;
pub mod cosmo;
pub mod error;
pub mod flow;
pub mod pattern;
pub mod report;
pub mod scenario;
pub mod species;
pub mod suites;

pub use error::{Error, Result};
pub use report::{LawReport, Violation};
