//! Decision procedures for higher-order syndeticity of subsets of discrete
//! groups, with replayable certificates.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod group;
pub mod report;
pub mod repro;
pub mod request;
pub mod set_algebra;
pub mod strong;
pub mod symmetric;
pub mod syndetic;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use group::{CayleyTable, GroupElement, GroupKind, GroupModel, Word};
pub use report::{Certificate, DecisionReport, Scope, Verdict};
pub use request::{Invocation, Request};
pub use set_algebra::{normalize, FiniteNF, FreeGroupNF, NormalForm, PeriodicNF, SetExpr, SetSpec, Subset};
